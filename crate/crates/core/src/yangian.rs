//! Rational R-matrices, gl(n) highest-weight modules and evaluation monodromies.

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::tensor::{embed, permutation_op, OperatorMatrix, SpaceLayout, C64};

pub const INVERSION_COND_LIMIT: f64 = 1e12;
pub const NORMALIZED_POLE_TOL: f64 = 1e-10;
pub const QDET_RANK_LIMIT: usize = 4;

/// R(u) = u·I⊗I − ħP on C^n⊗C^n, spaces labeled "1" and "2".
pub fn r_matrix(u: C64, n: usize, hbar: C64) -> OperatorMatrix {
    let p = permutation_op(n);
    let data = DMatrix::<C64>::identity(n * n, n * n) * u - p.data() * hbar;
    OperatorMatrix::new(p.layout().clone(), data).expect("finite R-matrix")
}

/// ℝ(u) = R(u)/(u−ħ).
pub fn normalized_r(u: C64, n: usize, hbar: C64) -> Result<OperatorMatrix> {
    if (u - hbar).norm() < NORMALIZED_POLE_TOL {
        return Err(Error::Pole { what: "normalized R-matrix", at: u });
    }
    r_matrix(u, n, hbar).scale(1.0 / (u - hbar))
}

fn projector_diag(n: usize, k: usize) -> Vec<f64> {
    (1..=n).map(|i| if i >= k { 1.0 } else { 0.0 }).collect()
}

/// (I⁽ᵏ⁾⊗I⁽ᵖ⁾)R(u)(I⁽ᵏ⁾⊗I⁽ᵖ⁾) with I⁽ᵏ⁾ = Σ_{i≥k} E_ii, 1-based k, p.
pub fn reduced_r(u: C64, k: usize, p: usize, n: usize, hbar: C64) -> Result<OperatorMatrix> {
    if k == 0 || p == 0 || k > n || p > n {
        return Err(Error::InvalidArgument(format!("reduced R indices ({k},{p}) outside 1..={n}")));
    }
    let r = r_matrix(u, n, hbar);
    let (pk, pp) = (projector_diag(n, k), projector_diag(n, p));
    let data = DMatrix::from_fn(n * n, n * n, |row, col| {
        let w = pk[row / n] * pp[row % n] * pk[col / n] * pp[col % n];
        r.data()[(row, col)] * w
    });
    OperatorMatrix::new(r.layout().clone(), data)
}

/// Normalized reduced R-matrix ℝ⁽ᵏ'ᵖ⁾(u) = R⁽ᵏ'ᵖ⁾(u)/(u−ħ).
pub fn normalized_reduced_r(u: C64, k: usize, p: usize, n: usize, hbar: C64) -> Result<OperatorMatrix> {
    if (u - hbar).norm() < NORMALIZED_POLE_TOL {
        return Err(Error::Pole { what: "normalized reduced R-matrix", at: u });
    }
    reduced_r(u, k, p, n, hbar)?.scale(1.0 / (u - hbar))
}

#[derive(Clone, Debug, PartialEq)]
pub enum RepClass {
    /// Symᵐ(Cⁿ) tensored with the one-dimensional module of weight s·(1,…,1).
    ShiftedSymmetric { m: usize, shift: C64 },
}

#[derive(Clone, Debug)]
pub struct GlRep {
    n: usize,
    mu: Vec<C64>,
    class: RepClass,
    generators: Vec<DMatrix<C64>>,
}

impl GlRep {
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn mu(&self) -> &[C64] {
        &self.mu
    }

    pub fn class(&self) -> &RepClass {
        &self.class
    }

    pub fn dim(&self) -> usize {
        self.generators[0].nrows()
    }

    /// Matrix of 𝓔_ij, 0-based indices.
    pub fn generator(&self, i: usize, j: usize) -> &DMatrix<C64> {
        &self.generators[i * self.n + j]
    }

    /// Index of the highest-weight vector Ω in the module basis.
    pub fn hw_index(&self) -> usize {
        0
    }
}

fn near_nonneg_integer(z: C64) -> Option<usize> {
    let r = z.re.round();
    if z.im.abs() < 1e-12 && (z.re - r).abs() < 1e-12 && r >= 0.0 {
        Some(r as usize)
    } else {
        None
    }
}

fn fmt_weight(mu: &[C64]) -> String {
    let parts: Vec<String> = mu
        .iter()
        .map(|z| if z.im == 0.0 { format!("{}", z.re) } else { format!("{}{:+}i", z.re, z.im) })
        .collect();
    format!("({})", parts.join(", "))
}

/// Exponent tuples of degree m in n variables, descending lexicographic order.
fn monomials(n: usize, m: usize) -> Vec<Vec<usize>> {
    fn rec(n: usize, m: usize, prefix: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if prefix.len() == n - 1 {
            prefix.push(m);
            out.push(prefix.clone());
            prefix.pop();
            return;
        }
        for a in (0..=m).rev() {
            prefix.push(a);
            rec(n, m - a, prefix, out);
            prefix.pop();
        }
    }
    let mut out = Vec::new();
    rec(n, m, &mut Vec::new(), &mut out);
    out
}

/// Highest-weight module of gl(n) with weight `mu`.
///
/// Supported weights are (m+s, s, …, s) with m a non-negative integer: the
/// symmetric power Symᵐ(Cⁿ) with 𝓔_ij = x_i∂_j, shifted by s on the
/// diagonal. This contains the fundamental module, every one-row weight and
/// every gl(2) weight.
pub fn gl_rep(n: usize, mu: &[C64]) -> Result<GlRep> {
    if n < 2 {
        return Err(Error::InvalidArgument(format!("rank {n} < 2")));
    }
    if mu.len() != n {
        return Err(Error::InvalidArgument(format!("weight of length {} for rank {n}", mu.len())));
    }
    if mu.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
        return Err(Error::InvalidArgument("non-finite weight".into()));
    }
    for w in mu.windows(2) {
        if near_nonneg_integer(w[0] - w[1]).is_none() {
            return Err(Error::NonDominantWeight(fmt_weight(mu)));
        }
    }
    let shift = mu[n - 1];
    if mu[1..].iter().any(|z| (z - shift).norm() > 1e-12) {
        return Err(Error::UnsupportedWeight(fmt_weight(mu)));
    }
    let m = near_nonneg_integer(mu[0] - shift).expect("checked above");
    let basis = monomials(n, m);
    let index = |a: &[usize]| basis.iter().position(|b| b.as_slice() == a).expect("monomial in basis");
    let d = basis.len();
    let mut generators = Vec::with_capacity(n * n);
    for i in 0..n {
        for j in 0..n {
            let mut g = DMatrix::<C64>::zeros(d, d);
            for (col, a) in basis.iter().enumerate() {
                if a[j] == 0 {
                    continue;
                }
                let mut b = a.clone();
                b[j] -= 1;
                b[i] += 1;
                g[(index(&b), col)] += C64::new(a[j] as f64, 0.0);
            }
            if i == j {
                for k in 0..d {
                    g[(k, k)] += shift;
                }
            }
            generators.push(g);
        }
    }
    Ok(GlRep { n, mu: mu.to_vec(), class: RepClass::ShiftedSymmetric { m, shift }, generators })
}

#[derive(Clone, Debug)]
pub struct SiteSpec {
    pub rep: GlRep,
    pub a: C64,
}

#[derive(Clone, Debug)]
pub struct ChainSpec {
    n: usize,
    hbar: C64,
    sites: Vec<SiteSpec>,
}

impl ChainSpec {
    pub fn new(n: usize, hbar: C64, sites: Vec<SiteSpec>) -> Result<Self> {
        if n < 2 {
            return Err(Error::InvalidArgument(format!("rank {n} < 2")));
        }
        if hbar.norm() == 0.0 || !hbar.re.is_finite() || !hbar.im.is_finite() {
            return Err(Error::InvalidArgument("hbar must be finite and nonzero".into()));
        }
        if sites.is_empty() {
            return Err(Error::InvalidArgument("a chain needs at least one site".into()));
        }
        if let Some(bad) = sites.iter().position(|s| s.rep.n() != n) {
            return Err(Error::InvalidArgument(format!("site {} has rank {}, chain rank {n}", bad + 1, sites[bad].rep.n())));
        }
        let mut dim: usize = 1;
        for s in &sites {
            dim = dim.checked_mul(s.rep.dim()).ok_or(Error::DimensionOverflow)?;
        }
        Ok(ChainSpec { n, hbar, sites })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn hbar(&self) -> C64 {
        self.hbar
    }

    pub fn sites(&self) -> &[SiteSpec] {
        &self.sites
    }

    pub fn len(&self) -> usize {
        self.sites.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sites.is_empty()
    }

    pub fn site_label(k: usize) -> String {
        format!("q{}", k + 1)
    }

    pub fn quantum_layout(&self) -> SpaceLayout {
        SpaceLayout::new(self.sites.iter().enumerate().map(|(k, s)| (Self::site_label(k), s.rep.dim())))
            .expect("validated in constructor")
    }

    pub fn quantum_dim(&self) -> usize {
        self.sites.iter().map(|s| s.rep.dim()).product()
    }

    /// Index of Ω = ⊗Ωᵢ in the quantum basis.
    pub fn vacuum_index(&self) -> usize {
        0
    }

    /// λ_j(u) = Π_sites (u − a − ħμ_j), 0-based j.
    pub fn lambda(&self, j: usize, u: C64) -> C64 {
        self.sites.iter().map(|s| u - s.a - self.hbar * s.rep.mu()[j]).product()
    }

    /// Closed form for t′_ii(u)Ω/Ω, 0-based i; `sign` flips ħ in the shifts.
    pub fn lambda_prime_with(&self, i: usize, u: C64, sign: f64) -> C64 {
        let h = self.hbar * sign;
        let mut p = C64::new(1.0, 0.0);
        for k in 0..i {
            p *= self.lambda(k, u + h * (k as f64 + 1.0)) / self.lambda(k, u + h * k as f64);
        }
        p / self.lambda(i, u + h * i as f64)
    }

    pub fn lambda_prime(&self, i: usize, u: C64) -> C64 {
        self.lambda_prime_with(i, u, 1.0)
    }
}

/// L(u) = (u−a)·I − ħ Σ E_ij ⊗ π(𝓔_ji) on C^n ⊗ V, spaces labeled "a" and `site_label`.
pub fn site_t_labeled(u: C64, site: &SiteSpec, n: usize, hbar: C64, site_label: &str) -> Result<OperatorMatrix> {
    let d = site.rep.dim();
    let layout = SpaceLayout::new([("a", n), (site_label, d)])?;
    let mut data = DMatrix::<C64>::identity(n * d, n * d) * (u - site.a);
    for i in 0..n {
        for j in 0..n {
            let g = site.rep.generator(j, i);
            let mut blk = data.view_mut((i * d, j * d), (d, d));
            blk -= g * hbar;
        }
    }
    OperatorMatrix::new(layout, data)
}

pub fn site_t(u: C64, site: &SiteSpec, n: usize, hbar: C64) -> Result<OperatorMatrix> {
    site_t_labeled(u, site, n, hbar, "q")
}

/// T(u) = L₁(u)L₂(u)…L_L(u) on [a, q1, …, qL].
pub fn chain_t(u: C64, chain: &ChainSpec) -> Result<OperatorMatrix> {
    let n = chain.n();
    let full = SpaceLayout::new([("a".to_string(), n)])?.concat(&chain.quantum_layout())?;
    let mut t = OperatorMatrix::identity(full.clone());
    for (k, site) in chain.sites().iter().enumerate() {
        let l = site_t_labeled(u, site, n, chain.hbar(), &ChainSpec::site_label(k))?;
        t = t.matmul(&embed(&l, &full)?)?;
    }
    Ok(t)
}

/// 2-norm condition number from singular values.
pub fn condition_number(m: &DMatrix<C64>) -> f64 {
    let sv = m.clone().singular_values();
    let max = sv.iter().cloned().fold(0.0, f64::max);
    let min = sv.iter().cloned().fold(f64::INFINITY, f64::min);
    if min == 0.0 {
        f64::INFINITY
    } else {
        max / min
    }
}

pub fn invert_checked(op: &OperatorMatrix, u: C64) -> Result<OperatorMatrix> {
    let cond = condition_number(op.data());
    if !(cond < INVERSION_COND_LIMIT) {
        return Err(Error::Singular { u, cond });
    }
    let inv = op.data().clone().try_inverse().ok_or(Error::Singular { u, cond })?;
    OperatorMatrix::new(op.layout().clone(), inv)
}

pub fn chain_t_inverse(u: C64, chain: &ChainSpec) -> Result<OperatorMatrix> {
    invert_checked(&chain_t(u, chain)?, u)
}

fn permutations(n: usize) -> Vec<(Vec<usize>, f64)> {
    fn rec(rest: Vec<usize>, prefix: Vec<usize>, sign: f64, out: &mut Vec<(Vec<usize>, f64)>) {
        if rest.is_empty() {
            out.push((prefix, sign));
            return;
        }
        for k in 0..rest.len() {
            let mut r = rest.clone();
            let x = r.remove(k);
            let mut p = prefix.clone();
            p.push(x);
            rec(r, p, if k % 2 == 0 { sign } else { -sign }, out);
        }
    }
    let mut out = Vec::new();
    rec((0..n).collect(), Vec::new(), 1.0, &mut out);
    out
}

/// qdet T(u) = Σ_σ sgn σ · t_{1σ(1)}(u−(n−1)ħ) ⋯ t_{nσ(n)}(u), an operator on H.
pub fn quantum_determinant(u: C64, chain: &ChainSpec) -> Result<OperatorMatrix> {
    let n = chain.n();
    if n > QDET_RANK_LIMIT {
        return Err(Error::RankGuard { n, limit: QDET_RANK_LIMIT });
    }
    let ts: Vec<OperatorMatrix> = (0..n)
        .map(|i| chain_t(u + chain.hbar() * (i as f64 + 1.0 - n as f64), chain))
        .collect::<Result<_>>()?;
    let h = chain.quantum_layout();
    let mut acc = OperatorMatrix::zeros(h.clone());
    for (sigma, sign) in permutations(n) {
        let mut term = OperatorMatrix::identity(h.clone());
        for (i, &s) in sigma.iter().enumerate() {
            term = term.matmul(&ts[i].aux_block(i, s)?)?;
        }
        acc = acc.add(&term.scale(C64::new(sign, 0.0))?)?;
    }
    Ok(acc)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::tensor::rel_residual;

    fn c(re: f64) -> C64 {
        C64::new(re, 0.0)
    }

    fn fundamental(n: usize) -> GlRep {
        let mut mu = vec![c(0.0); n];
        mu[0] = c(1.0);
        gl_rep(n, &mu).unwrap()
    }

    #[test]
    fn r_matrix_n2_at_two() {
        let r = r_matrix(c(2.0), 2, c(1.0));
        let want = [[1.0, 0.0, 0.0, 0.0], [0.0, 2.0, -1.0, 0.0], [0.0, -1.0, 2.0, 0.0], [0.0, 0.0, 0.0, 1.0]];
        for i in 0..4 {
            for j in 0..4 {
                assert_eq!(r.data()[(i, j)], c(want[i][j]));
            }
        }
    }

    #[test]
    fn normalized_r_at_zero_is_flip() {
        let r = normalized_r(c(0.0), 3, c(1.0)).unwrap();
        assert_eq!(r.data(), permutation_op(3).data());
        assert!(normalized_r(c(1.0), 3, c(1.0)).is_err());
    }

    #[test]
    fn reduced_r_corner() {
        let u = C64::new(0.3, 0.7);
        let r = reduced_r(u, 3, 3, 3, c(1.0)).unwrap();
        for i in 0..9 {
            for j in 0..9 {
                let want = if i == 8 && j == 8 { u - 1.0 } else { c(0.0) };
                assert!((r.data()[(i, j)] - want).norm() < 1e-15);
            }
        }
        assert_eq!(reduced_r(u, 1, 1, 3, c(1.0)).unwrap().data(), r_matrix(u, 3, c(1.0)).data());
        assert!(reduced_r(u, 0, 1, 3, c(1.0)).is_err());
    }

    #[test]
    fn reduced_r_block_is_lower_rank_r() {
        let u = C64::new(-0.4, 1.1);
        let r = reduced_r(u, 2, 2, 3, c(1.0)).unwrap();
        let small = r_matrix(u, 2, c(1.0));
        for i in 0..4 {
            for j in 0..4 {
                let (a, b) = (i / 2 + 1, i % 2 + 1);
                let (cc, d) = (j / 2 + 1, j % 2 + 1);
                assert_eq!(r.data()[(a * 3 + b, cc * 3 + d)], small.data()[(i, j)]);
            }
        }
    }

    #[test]
    fn sym_dimensions_and_weights() {
        let spin1 = gl_rep(2, &[c(2.0), c(0.0)]).unwrap();
        assert_eq!(spin1.dim(), 3);
        let d = spin1.generator(0, 0);
        for k in 0..3 {
            assert_eq!(d[(k, k)], c(2.0 - k as f64));
        }
        assert_eq!(gl_rep(3, &[c(2.0), c(0.0), c(0.0)]).unwrap().dim(), 6);
        assert_eq!(gl_rep(4, &[c(3.0), c(0.0), c(0.0), c(0.0)]).unwrap().dim(), 20);
        let f = fundamental(3);
        for i in 0..3 {
            for j in 0..3 {
                assert_eq!(f.generator(i, j), &crate::tensor::unit_matrix(3, i, j));
            }
        }
    }

    #[test]
    fn weight_classes_rejected() {
        assert!(matches!(gl_rep(2, &[c(0.0), c(1.0)]), Err(Error::NonDominantWeight(_))));
        assert!(matches!(gl_rep(3, &[c(1.5), c(0.0), c(0.0)]), Err(Error::NonDominantWeight(_))));
        assert!(matches!(gl_rep(3, &[c(2.0), c(1.0), c(0.0)]), Err(Error::UnsupportedWeight(_))));
    }

    #[test]
    fn site_t_of_fundamental_is_shifted_r() {
        let site = SiteSpec { rep: fundamental(3), a: C64::new(0.2, -0.1) };
        let u = C64::new(0.9, 0.4);
        let l = site_t(u, &site, 3, c(1.0)).unwrap();
        assert!(rel_residual(l.data(), r_matrix(u - site.a, 3, c(1.0)).data()) < 1e-15);
    }

    #[test]
    fn inverse_weight_example() {
        let chain = ChainSpec::new(2, c(1.0), vec![SiteSpec { rep: fundamental(2), a: c(0.0) }]).unwrap();
        assert!((chain.lambda_prime(1, c(3.0)) - 0.375).norm() < 1e-15);
        let inv = chain_t_inverse(c(3.0), &chain).unwrap();
        assert!((inv.aux_block(1, 1).unwrap().data()[(0, 0)] - 0.375).norm() < 1e-14);
    }

    #[test]
    fn qdet_on_vacuum_fundamental() {
        let chain = ChainSpec::new(2, c(1.0), vec![SiteSpec { rep: fundamental(2), a: c(0.0) }]).unwrap();
        let q = quantum_determinant(c(3.0), &chain).unwrap();
        // λ₁(u−ħ)λ₂(u) = (u−2)·u
        assert!((q.data()[(0, 0)] - 3.0).norm() < 1e-13);
        let q2 = quantum_determinant(c(2.0), &chain).unwrap();
        assert!(q2.data()[(0, 0)].norm() < 1e-13);
    }

    #[test]
    fn qdet_of_trivial_site_is_scalar() {
        let rep = gl_rep(3, &[c(0.0); 3]).unwrap();
        let chain = ChainSpec::new(3, c(1.0), vec![SiteSpec { rep, a: c(0.25) }]).unwrap();
        let u = C64::new(0.7, 0.2);
        let q = quantum_determinant(u, &chain).unwrap();
        let want: C64 = (1..=3).map(|i| u - 0.25 + (i as f64 - 3.0)).product();
        assert!((q.data()[(0, 0)] - want).norm() < 1e-13);
    }
}
