//! Nested Bethe equations: residuals, eigenvalue, residues and the solver.

use nalgebra::{DMatrix, DVector};
use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::reflection::{BoundaryWeights, KPlusMode, OpenChain, WeightSource};
use crate::sampling;
use crate::tensor::C64;

/// Minimum separation |u_ki ± u_kj| and |2u_kj| for admissible roots.
pub const COLLISION_TOL: f64 = 1e-8;
/// Stricter separation used to discard near-collided solver output.
pub const SOLVER_SEPARATION: f64 = 1e-6;
pub const RESIDUAL_TOL: f64 = 1e-10;
/// Roots beyond this modulus (in units of |ħ|) are treated as sent to
/// infinity and discarded.
pub const ROOT_CUTOFF: f64 = 1e6;

const POLE_TOL: f64 = 1e-14;

/// Points at which Λ is sampled to tell solutions apart.
pub const FINGERPRINT_POINTS: [C64; 3] =
    [C64::new(0.3712, 0.8123), C64::new(-0.5234, 0.3341), C64::new(1.1071, -0.4159)];

fn ft_signed(u: C64, v: C64, hbar: C64, sign: f64) -> Result<C64> {
    let den = (u - v) * (u + v);
    if den.norm() < POLE_TOL {
        return Err(Error::Pole { what: "f-tilde factor", at: u });
    }
    let h = hbar * sign;
    Ok((u - v - h) * (u + v - h) / den)
}

/// f(u,v) = (u−v+ħ)(u+v+ħ)/((u−v)(u+v)).
pub fn f_factor(u: C64, v: C64, hbar: C64) -> Result<C64> {
    ft_signed(u, v, hbar, -1.0).map_err(|_| Error::Pole { what: "f factor", at: u })
}

/// f̃(u,v) = (u−v−ħ)(u+v−ħ)/((u−v)(u+v)).
pub fn ft_factor(u: C64, v: C64, hbar: C64) -> Result<C64> {
    ft_signed(u, v, hbar, 1.0)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RootFamilies {
    pub m: Vec<usize>,
    pub roots: Vec<Vec<C64>>,
}

impl RootFamilies {
    pub fn new(roots: Vec<Vec<C64>>) -> Self {
        RootFamilies { m: roots.iter().map(Vec::len).collect(), roots }
    }

    pub fn empty(n: usize) -> Self {
        Self::new(vec![Vec::new(); n - 1])
    }

    pub fn total(&self) -> usize {
        self.m.iter().sum()
    }

    pub fn flatten(&self) -> Vec<C64> {
        self.roots.iter().flatten().copied().collect()
    }

    pub fn from_flat(m: &[usize], z: &[C64]) -> Self {
        let mut roots = Vec::with_capacity(m.len());
        let mut p = 0;
        for &mk in m {
            roots.push(z[p..p + mk].to_vec());
            p += mk;
        }
        RootFamilies { m: m.to_vec(), roots }
    }

    /// Smallest of |2u_kj| and |u_kj ± u_ki| over all families.
    pub fn min_separation(&self) -> f64 {
        let mut best = f64::INFINITY;
        for fam in &self.roots {
            for (j, y) in fam.iter().enumerate() {
                best = best.min((y * 2.0).norm());
                for x in &fam[..j] {
                    best = best.min((y - x).norm()).min((y + x).norm());
                }
            }
        }
        best
    }

    pub fn check_admissible(&self, n: usize) -> Result<()> {
        if self.m.len() != n - 1 || self.roots.len() != n - 1 {
            return Err(Error::Inadmissible(format!("{} families for rank {n}", self.roots.len())));
        }
        if self.m.iter().zip(&self.roots).any(|(m, r)| *m != r.len()) {
            return Err(Error::Inadmissible("family sizes disagree with M".into()));
        }
        if self.flatten().iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::Inadmissible("non-finite root".into()));
        }
        let sep = self.min_separation();
        if sep <= COLLISION_TOL {
            return Err(Error::Inadmissible(format!("root separation {sep:.3e} below {COLLISION_TOL:.0e}")));
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BetheResidual {
    /// (family k, index j, residual), 1-based k
    pub per_root: Vec<(usize, usize, C64)>,
    pub max_norm: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ResidueEntry {
    pub family: usize,
    pub index: usize,
    pub pole: C64,
    pub radius: f64,
    pub relative_residue: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ResidueReport {
    pub entries: Vec<ResidueEntry>,
    pub max_relative: f64,
}

#[derive(Clone, Debug)]
pub struct SolveOptions {
    pub seed: u64,
    /// Track the total-degree homotopy when the path count is below `max_paths`.
    pub homotopy: bool,
    pub max_paths: usize,
    /// Random multi-start Newton runs (always tried when homotopy is off or skipped).
    pub random_tries: usize,
    /// Solutions of adjacent sectors; each seeds runs with one extra random root.
    pub adjacent: Vec<RootFamilies>,
    pub adjacent_tries: usize,
}

impl Default for SolveOptions {
    fn default() -> Self {
        SolveOptions { seed: 0, homotopy: true, max_paths: 40_000, random_tries: 200, adjacent: Vec::new(), adjacent_tries: 8 }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct SolveOutcome {
    pub sector: Vec<usize>,
    pub solutions: Vec<RootFamilies>,
    pub homotopy_paths: usize,
    pub newton_starts: usize,
    pub converged: usize,
    pub notes: Vec<String>,
}

/// The Bethe equations of an open chain, with weights validated against the
/// operator action on the vacuum.
#[derive(Clone, Debug)]
pub struct BetheSystem {
    weights: BoundaryWeights,
}

impl BetheSystem {
    /// Only K⁺ = I is covered by the eigenvalue formula.
    pub fn new(model: &OpenChain) -> Result<Self> {
        if model.boundary.k_plus_mode != KPlusMode::Identity {
            return Err(Error::InvalidArgument("Bethe equations need the identity K-plus".into()));
        }
        Ok(BetheSystem { weights: model.boundary_weights()? })
    }

    pub fn from_weights(weights: BoundaryWeights) -> Self {
        BetheSystem { weights }
    }

    pub fn weights(&self) -> &BoundaryWeights {
        &self.weights
    }

    pub fn model(&self) -> &OpenChain {
        self.weights.model()
    }

    fn n(&self) -> usize {
        self.model().n()
    }

    fn hbar(&self) -> C64 {
        self.model().hbar()
    }

    fn ft(&self, u: C64, v: C64) -> Result<C64> {
        ft_signed(u, v, self.hbar(), self.model().conventions.ft_sign)
    }

    fn f(&self, u: C64, v: C64) -> Result<C64> {
        f_factor(u, v, self.hbar())
    }

    /// Ratio LHS/RHS of the equation for root (k, j), 1-based k.
    fn equation_ratio(&self, roots: &RootFamilies, k: usize, j: usize) -> Result<C64> {
        let h = self.hbar();
        let y = roots.roots[k - 1][j];
        let w = y + h * (k as f64 / 2.0);
        let fl = self.weights.vacuum_weight(k - 1, w)?;
        let fr = self.weights.vacuum_weight(k, w)?;
        let mut rhs = y * 2.0 / (y * 2.0 + h);
        for (i, x) in roots.roots[k - 1].iter().enumerate() {
            if i != j {
                rhs *= self.ft(y, *x)? / self.f(y, *x)?;
            }
        }
        if k < self.n() - 1 {
            for x in &roots.roots[k] {
                rhs *= self.f(y - h * 0.5, *x)?;
            }
        }
        if k >= 2 {
            for x in &roots.roots[k - 2] {
                rhs /= self.ft(y + h * 0.5, *x)?;
            }
        }
        let ratio = fl / (fr * rhs);
        if !ratio.re.is_finite() || !ratio.im.is_finite() || ratio.norm() == 0.0 {
            return Err(Error::Pole { what: "Bethe equation", at: y });
        }
        Ok(ratio)
    }

    /// Log-form residual log(LHS/RHS) per root.
    pub fn residual(&self, roots: &RootFamilies) -> Result<BetheResidual> {
        roots.check_admissible(self.n())?;
        self.residual_unchecked(roots)
    }

    fn residual_unchecked(&self, roots: &RootFamilies) -> Result<BetheResidual> {
        let mut per_root = Vec::with_capacity(roots.total());
        let mut max_norm: f64 = 0.0;
        for k in 1..self.n() {
            for j in 0..roots.roots[k - 1].len() {
                let r = self.equation_ratio(roots, k, j)?.ln();
                max_norm = max_norm.max(r.norm());
                per_root.push((k, j, r));
            }
        }
        Ok(BetheResidual { per_root, max_norm })
    }

    fn residual_vector(&self, m: &[usize], z: &[C64]) -> Option<DVector<C64>> {
        let roots = RootFamilies::from_flat(m, z);
        let r = self.residual_unchecked(&roots).ok()?;
        Some(DVector::from_iterator(r.per_root.len(), r.per_root.into_iter().map(|(_, _, v)| v)))
    }

    /// Λ(u) for the given roots.
    pub fn lambda_eig(&self, u: C64, roots: &RootFamilies) -> Result<C64> {
        let n = self.n();
        let h = self.hbar();
        let f = self.weights.vacuum_weights(u)?;
        let mut total = C64::new(0.0, 0.0);
        for k in 1..=n {
            let den = u * 2.0 - h * k as f64;
            if den.norm() < POLE_TOL {
                return Err(Error::Pole { what: "eigenvalue prefactor", at: u });
            }
            let mut t = (u * 2.0 - h * n as f64) / den * f[k - 1];
            if k < n {
                for y in &roots.roots[k - 1] {
                    t *= self.f(u - h * (k as f64 / 2.0), *y)?;
                }
            }
            if k >= 2 {
                for y in &roots.roots[k - 2] {
                    t *= self.ft(u - h * ((k as f64 - 1.0) / 2.0), *y)?;
                }
            }
            total += t;
        }
        if !total.re.is_finite() || !total.im.is_finite() {
            return Err(Error::Pole { what: "eigenvalue", at: u });
        }
        Ok(total)
    }

    pub fn fingerprint(&self, roots: &RootFamilies) -> Result<[C64; 3]> {
        let mut out = [C64::new(0.0, 0.0); 3];
        for (o, p) in out.iter_mut().zip(FINGERPRINT_POINTS) {
            *o = self.lambda_eig(p, roots)?;
        }
        Ok(out)
    }

    /// Contour estimate of the residue of Λ at each u_kj + kħ/2.
    pub fn residue_check(&self, roots: &RootFamilies) -> Result<ResidueReport> {
        let n = self.n();
        let h = self.hbar();
        let mut singular: Vec<C64> = (1..=n).map(|k| h * (k as f64 / 2.0)).collect();
        for k in 1..n {
            for y in &roots.roots[k - 1] {
                singular.push(y + h * (k as f64 / 2.0));
                singular.push(-y + h * (k as f64 / 2.0));
            }
        }
        let mut entries = Vec::new();
        let mut max_relative: f64 = 0.0;
        const NODES: usize = 64;
        for k in 1..n {
            for (j, y) in roots.roots[k - 1].iter().enumerate() {
                let p = y + h * (k as f64 / 2.0);
                let d = singular
                    .iter()
                    .map(|s| (s - p).norm())
                    .filter(|&x| x > 1e-12)
                    .fold(f64::INFINITY, f64::min);
                let radius = (1e-3 * (1.0 + p.norm())).min(0.25 * d);
                let mut sum = C64::new(0.0, 0.0);
                let mut scale: f64 = 0.0;
                for q in 0..NODES {
                    let e = C64::from_polar(1.0, std::f64::consts::TAU * q as f64 / NODES as f64);
                    let v = self.lambda_eig(p + e * radius, roots)?;
                    scale = scale.max(v.norm());
                    sum += v * e;
                }
                let residue = sum * (radius / NODES as f64);
                let rel = if scale == 0.0 { 0.0 } else { residue.norm() / (radius * scale) };
                max_relative = max_relative.max(rel);
                entries.push(ResidueEntry { family: k, index: j, pole: p, radius, relative_residue: rel });
            }
        }
        Ok(ResidueReport { entries, max_relative })
    }

    /// Damped Newton with step halving on the log-form equations.
    pub fn polish(&self, m: &[usize], start: &[C64]) -> Option<Vec<C64>> {
        let tot = start.len();
        if tot == 0 {
            return Some(Vec::new());
        }
        let mut z = start.to_vec();
        let mut r = self.residual_vector(m, &z)?;
        let mut rn = inf_norm(&r);
        for _ in 0..100 {
            if rn < 1e-14 {
                break;
            }
            let mut jac = DMatrix::<C64>::zeros(tot, tot);
            for b in 0..tot {
                let e = 1e-7 * (1.0 + z[b].norm());
                let mut zp = z.clone();
                zp[b] += e;
                let mut zm = z.clone();
                zm[b] -= e;
                let col = (self.residual_vector(m, &zp)? - self.residual_vector(m, &zm)?) / C64::new(2.0 * e, 0.0);
                jac.set_column(b, &col);
            }
            let step = jac.lu().solve(&(-&r))?;
            let mut lambda = 1.0;
            let mut accepted = false;
            for _ in 0..30 {
                let trial: Vec<C64> = z.iter().zip(step.iter()).map(|(a, d)| a + d * lambda).collect();
                if let Some(rt) = self.residual_vector(m, &trial) {
                    let tn = inf_norm(&rt);
                    if tn < rn {
                        z = trial;
                        r = rt;
                        rn = tn;
                        accepted = true;
                        break;
                    }
                }
                lambda *= 0.5;
            }
            if !accepted || inf_norm(&step) < 1e-15 * (1.0 + z.iter().fold(0.0f64, |a, b| a.max(b.norm()))) {
                break;
            }
        }
        if rn < RESIDUAL_TOL {
            Some(z)
        } else {
            None
        }
    }

    /// Solve the sector `m` = (M₁, …, M_{n−1}).
    pub fn solve(&self, m: &[usize], opts: &SolveOptions) -> Result<SolveOutcome> {
        let n = self.n();
        if m.len() != n - 1 {
            return Err(Error::InvalidArgument(format!("sector of length {} for rank {n}", m.len())));
        }
        let tot: usize = m.iter().sum();
        let mut notes = Vec::new();
        if tot == 0 {
            return Ok(SolveOutcome {
                sector: m.to_vec(),
                solutions: vec![RootFamilies::empty(n)],
                homotopy_paths: 0,
                newton_starts: 0,
                converged: 1,
                notes,
            });
        }
        let mut candidates: Vec<Vec<C64>> = Vec::new();
        let mut homotopy_paths = 0;
        let mut newton_starts = 0;
        let mut use_random = !opts.homotopy;
        if opts.homotopy {
            match self.polynomial_system(m) {
                Some(sys) if sys.path_count() <= opts.max_paths => {
                    homotopy_paths = sys.path_count();
                    let ends = sys.track_all(opts.seed);
                    newton_starts += ends.len();
                    candidates.extend(ends.par_iter().map(|e| self.polish(m, e)).collect::<Vec<_>>().into_iter().flatten());
                }
                Some(sys) => {
                    notes.push(format!("homotopy skipped: {} paths above budget {}", sys.path_count(), opts.max_paths));
                    use_random = true;
                }
                None => {
                    notes.push("homotopy skipped: boundary weights are not in closed form".into());
                    use_random = true;
                }
            }
        }
        if use_random {
            let h = self.hbar().norm();
            let starts: Vec<Vec<C64>> = (0..opts.random_tries)
                .map(|t| {
                    let mut rng = sampling::seeded(opts.seed ^ (0x9e37_79b9_7f4a_7c15u64.wrapping_mul(t as u64 + 1)));
                    let scale = h * (1 + t % 5) as f64;
                    (0..tot).map(|_| sampling::gaussian_complex(&mut rng) * scale).collect()
                })
                .collect();
            newton_starts += starts.len();
            candidates.extend(starts.par_iter().map(|s| self.polish(m, s)).collect::<Vec<_>>().into_iter().flatten());
        }
        if !opts.adjacent.is_empty() {
            let mut starts = Vec::new();
            for (b, base) in opts.adjacent.iter().enumerate() {
                let diff: Vec<isize> = m.iter().zip(&base.m).map(|(a, c)| *a as isize - *c as isize).collect();
                let Some(k) = diff.iter().position(|&d| d == 1) else { continue };
                if diff.iter().enumerate().any(|(i, &d)| i != k && d != 0) {
                    continue;
                }
                for t in 0..opts.adjacent_tries {
                    let mut rng = sampling::seeded(opts.seed.wrapping_add(1 + b as u64 * 1000 + t as u64));
                    let mut fams = base.roots.clone();
                    for fam in fams.iter_mut() {
                        for y in fam.iter_mut() {
                            *y += sampling::gaussian_complex(&mut rng) * 1e-3;
                        }
                    }
                    fams[k].push(sampling::gaussian_complex(&mut rng) * (1.0 + rng.random_range(0.0..2.0)));
                    starts.push(RootFamilies::new(fams).flatten());
                }
            }
            newton_starts += starts.len();
            candidates.extend(starts.par_iter().map(|s| self.polish(m, s)).collect::<Vec<_>>().into_iter().flatten());
        }
        let converged = candidates.len();
        let solutions = self.deduplicate(m, candidates);
        Ok(SolveOutcome { sector: m.to_vec(), solutions, homotopy_paths, newton_starts, converged, notes })
    }

    /// Number of homotopy paths for sector `m`, when the weights allow it.
    pub fn homotopy_paths(&self, m: &[usize]) -> Option<usize> {
        if m.len() != self.n() - 1 {
            return None;
        }
        self.polynomial_system(m).map(|s| s.path_count())
    }

    /// Drop near-collided candidates and merge those with equal Λ-fingerprints.
    fn deduplicate(&self, m: &[usize], candidates: Vec<Vec<C64>>) -> Vec<RootFamilies> {
        let mut kept: Vec<(RootFamilies, [C64; 3])> = Vec::new();
        for z in candidates {
            let roots = RootFamilies::from_flat(m, &z);
            if roots.min_separation() <= SOLVER_SEPARATION || z.iter().any(|y| y.norm() > ROOT_CUTOFF * self.hbar().norm()) {
                continue;
            }
            let Ok(fp) = self.fingerprint(&roots) else { continue };
            let dup = kept.iter().any(|(_, g)| {
                fp.iter().zip(g).all(|(a, b)| (a - b).norm() <= 1e-6 * a.norm().max(1.0))
            });
            if !dup {
                kept.push((canonical(roots), fp));
            }
        }
        let key = |fp: &[C64; 3]| -> Vec<i64> {
            fp.iter().flat_map(|z| [(z.re * 1e6).round() as i64, (z.im * 1e6).round() as i64]).collect()
        };
        kept.sort_by_key(|a| key(&a.1));
        kept.into_iter().map(|(r, _)| r).collect()
    }

    fn polynomial_system(&self, m: &[usize]) -> Option<PolySystem<'_>> {
        if self.weights.source != WeightSource::ClosedForm {
            return None;
        }
        let l = self.model().chain.len();
        let n = self.n();
        let mut degrees = Vec::new();
        for k in 1..n {
            let (an, ad) = vacuum_weight_degrees(k - 1, l);
            let (cn, cd) = vacuum_weight_degrees(k, l);
            let lhs = (an + cd).max(ad + cn);
            if m[k - 1] == 0 {
                continue;
            }
            let mut rhs = 1 + 2 * (m[k - 1] - 1);
            if k < n - 1 {
                rhs += 2 * m[k];
            }
            if k >= 2 {
                rhs += 2 * m[k - 2];
            }
            for _ in 0..m[k - 1] {
                degrees.push(lhs + rhs);
            }
        }
        Some(PolySystem { sys: self, m: m.to_vec(), degrees })
    }

    /// Numerator and denominator of F_i(u), 0-based i, from the closed form.
    fn vacuum_weight_parts(&self, i: usize, u: C64) -> (C64, C64) {
        let model = self.model();
        let cw = model.closed_weights();
        let h = self.hbar();
        let (mut num, mut den) = if i == 0 {
            (cw.kappa(0, u), C64::new(1.0, 0.0))
        } else {
            let d = u * 2.0 - h * i as f64;
            let s: C64 = (0..i).map(|k| cw.kappa(k, u)).sum();
            (cw.kappa(i, u) * d + s * h, d)
        };
        num *= model.chain.lambda(i, u);
        let x = -u;
        let hs = h * model.conventions.lambda_prime_sign;
        for k in 0..i {
            num *= model.chain.lambda(k, x + hs * (k as f64 + 1.0));
            den *= model.chain.lambda(k, x + hs * k as f64);
        }
        den *= model.chain.lambda(i, x + hs * i as f64);
        (num, den)
    }

    /// Cleared-denominator form of every equation: N_L·D_R − D_L·N_R.
    fn polynomial_residuals(&self, m: &[usize], z: &[C64]) -> DVector<C64> {
        let n = self.n();
        let h = self.hbar();
        let s = self.model().conventions.ft_sign;
        let roots = RootFamilies::from_flat(m, z);
        let mut out = Vec::with_capacity(z.len());
        for k in 1..n {
            for (j, &y) in roots.roots[k - 1].iter().enumerate() {
                let w = y + h * (k as f64 / 2.0);
                let (a, b) = self.vacuum_weight_parts(k - 1, w);
                let (c, d) = self.vacuum_weight_parts(k, w);
                let (ln, ld) = (a * d, b * c);
                let mut rn = y * 2.0;
                let mut rd = y * 2.0 + h;
                for (i, &x) in roots.roots[k - 1].iter().enumerate() {
                    if i != j {
                        rn *= (y - x - h * s) * (y + x - h * s);
                        rd *= (y - x + h) * (y + x + h);
                    }
                }
                if k < n - 1 {
                    for &x in &roots.roots[k] {
                        rn *= (y - x + h * 0.5) * (y + x + h * 0.5);
                        rd *= (y - x - h * 0.5) * (y + x - h * 0.5);
                    }
                }
                if k >= 2 {
                    for &x in &roots.roots[k - 2] {
                        let a = y + h * 0.5;
                        rn *= (a - x) * (a + x);
                        rd *= (a - x - h * s) * (a + x - h * s);
                    }
                }
                out.push(ln * rd - ld * rn);
            }
        }
        DVector::from_vec(out)
    }
}

fn inf_norm(v: &DVector<C64>) -> f64 {
    v.iter().fold(0.0, |m, z| m.max(z.norm()))
}

/// Degrees (numerator, denominator) of F_i for a chain of `l` sites.
fn vacuum_weight_degrees(i: usize, l: usize) -> (usize, usize) {
    let (kn, kd) = if i == 0 { (1, 0) } else { (2, 1) };
    (kn + l + i * l, kd + (i + 1) * l)
}

/// Sort roots inside each family for a stable presentation.
fn canonical(mut roots: RootFamilies) -> RootFamilies {
    for fam in roots.roots.iter_mut() {
        fam.sort_by(|a, b| a.re.total_cmp(&b.re).then(a.im.total_cmp(&b.im)));
    }
    roots
}

struct PolySystem<'a> {
    sys: &'a BetheSystem,
    m: Vec<usize>,
    degrees: Vec<usize>,
}

impl PolySystem<'_> {
    fn path_count(&self) -> usize {
        self.degrees.iter().try_fold(1usize, |acc, &d| acc.checked_mul(d)).unwrap_or(usize::MAX)
    }

    /// Track every path of the total-degree homotopy with the γ trick.
    fn track_all(&self, seed: u64) -> Vec<Vec<C64>> {
        let tot = self.degrees.len();
        let mut rng = sampling::seeded(seed ^ 0x706f_6c79);
        let gamma = C64::from_polar(1.0, std::f64::consts::TAU * rng.random::<f64>());
        let probe: Vec<C64> = (0..tot).map(|_| sampling::gaussian_complex(&mut rng)).collect();
        let scale: Vec<f64> = self
            .sys
            .polynomial_residuals(&self.m, &probe)
            .iter()
            .map(|v| if v.norm() > 0.0 { 1.0 / v.norm() } else { 1.0 })
            .collect();
        let count = self.path_count();
        (0..count)
            .into_par_iter()
            .filter_map(|idx| {
                let mut rest = idx;
                let start: Vec<C64> = self
                    .degrees
                    .iter()
                    .map(|&d| {
                        let s = rest % d;
                        rest /= d;
                        C64::from_polar(1.0, std::f64::consts::TAU * s as f64 / d as f64)
                    })
                    .collect();
                self.track(start, gamma, &scale)
            })
            .collect()
    }

    fn target(&self, z: &[C64], scale: &[f64]) -> DVector<C64> {
        let mut p = self.sys.polynomial_residuals(&self.m, z);
        for (v, s) in p.iter_mut().zip(scale) {
            *v *= *s;
        }
        p
    }

    fn start_system(&self, z: &[C64]) -> DVector<C64> {
        DVector::from_iterator(z.len(), z.iter().zip(&self.degrees).map(|(x, &d)| x.powu(d as u32) - 1.0))
    }

    fn homotopy(&self, z: &[C64], t: f64, gamma: C64, scale: &[f64]) -> DVector<C64> {
        self.start_system(z) * (gamma * (1.0 - t)) + self.target(z, scale) * C64::new(t, 0.0)
    }

    fn jacobian(&self, z: &[C64], t: f64, gamma: C64, scale: &[f64]) -> DMatrix<C64> {
        let tot = z.len();
        let mut jac = DMatrix::zeros(tot, tot);
        for b in 0..tot {
            let e = 1e-7 * (1.0 + z[b].norm());
            let mut zp = z.to_vec();
            zp[b] += e;
            let mut zm = z.to_vec();
            zm[b] -= e;
            let col = (self.target(&zp, scale) - self.target(&zm, scale)) * C64::new(t / (2.0 * e), 0.0);
            jac.set_column(b, &col);
            let d = self.degrees[b];
            jac[(b, b)] += gamma * (1.0 - t) * z[b].powu(d as u32 - 1) * d as f64;
        }
        jac
    }

    fn track(&self, mut z: Vec<C64>, gamma: C64, scale: &[f64]) -> Option<Vec<C64>> {
        let norm = |v: &[C64]| v.iter().map(|x| x.norm_sqr()).sum::<f64>().sqrt();
        let mut t = 0.0f64;
        let mut dt = 0.02f64;
        let mut steps = 0;
        while t < 1.0 && steps < 4000 {
            steps += 1;
            let t1 = (t + dt).min(1.0);
            let jac = self.jacobian(&z, t, gamma, scale);
            let ht = self.target(&z, scale) - self.start_system(&z) * gamma;
            let dz = jac.lu().solve(&(-ht))?;
            let mut zp: Vec<C64> = z.iter().zip(dz.iter()).map(|(a, d)| a + d * (t1 - t)).collect();
            let mut good = false;
            for _ in 0..4 {
                let j1 = self.jacobian(&zp, t1, gamma, scale);
                let r = self.homotopy(&zp, t1, gamma, scale);
                let Some(d) = j1.lu().solve(&(-r)) else { break };
                for (a, b) in zp.iter_mut().zip(d.iter()) {
                    *a += b;
                }
                if d.norm() < 1e-9 * (1.0 + norm(&zp)) {
                    good = true;
                    break;
                }
            }
            let moved: Vec<C64> = zp.iter().zip(&z).map(|(a, b)| a - b).collect();
            if good && norm(&moved) < 0.3 * (1.0 + norm(&z)) {
                z = zp;
                t = t1;
                dt = (dt * 1.5).min(0.1);
            } else {
                dt *= 0.5;
                if dt < 1e-10 {
                    return None;
                }
            }
            if z.iter().any(|x| x.norm() > 1e6) {
                return None;
            }
        }
        (t >= 1.0).then_some(z)
    }
}
