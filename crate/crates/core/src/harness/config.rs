//! Experiment configuration: JSON schema and resolution into a model.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::bethe::{RootFamilies, SolveOptions};
use crate::error::{Error, Result};
use crate::reflection::{BoundarySpec, KPlusMode, OpenChain};
use crate::sampling;
use crate::tensor::C64;
use crate::yangian::{gl_rep, ChainSpec, SiteSpec};

/// A complex number written as `x` or `[re, im]`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum ComplexInput {
    Real(f64),
    Pair([f64; 2]),
}

impl ComplexInput {
    pub fn value(self) -> C64 {
        match self {
            ComplexInput::Real(x) => C64::new(x, 0.0),
            ComplexInput::Pair([re, im]) => C64::new(re, im),
        }
    }
}

impl From<C64> for ComplexInput {
    fn from(z: C64) -> Self {
        ComplexInput::Pair([z.re, z.im])
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SiteConfig {
    pub mu: Vec<ComplexInput>,
    #[serde(default = "zero")]
    pub a: ComplexInput,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BoundaryConfig {
    pub a_split: usize,
    pub c_minus: ComplexInput,
    #[serde(default)]
    pub k_plus_mode: KPlusMode,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(untagged)]
pub enum SectorsInput {
    Keyword(String),
    List(Vec<Vec<usize>>),
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(untagged)]
pub enum SamplesInput {
    Spec(String),
    List(Vec<ComplexInput>),
}

#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Tolerances {
    /// identity residuals
    pub identity: f64,
    /// Λ against ED, relative
    pub r#match: f64,
    /// Bethe-equation residuals
    pub residual: f64,
    /// eigenvector residuals
    pub eigenvector: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances { identity: 1e-9, r#match: 1e-7, residual: 1e-10, eigenvector: 1e-7 }
    }
}

#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridConfig {
    pub start: f64,
    pub stop: f64,
    pub count: usize,
}

impl Default for GridConfig {
    fn default() -> Self {
        GridConfig { start: 0.1237, stop: 1.9237, count: 16 }
    }
}

impl GridConfig {
    pub fn points(&self) -> Vec<C64> {
        match self.count {
            0 => Vec::new(),
            1 => vec![C64::new(self.start, 0.0)],
            c => (0..c)
                .map(|k| C64::new(self.start + (self.stop - self.start) * k as f64 / (c - 1) as f64, 0.0))
                .collect(),
        }
    }
}

#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SolverConfig {
    pub homotopy: bool,
    pub max_paths: usize,
    pub random_tries: usize,
}

impl Default for SolverConfig {
    fn default() -> Self {
        let d = SolveOptions::default();
        SolverConfig { homotopy: d.homotopy, max_paths: d.max_paths, random_tries: d.random_tries }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub n: usize,
    #[serde(default = "one")]
    pub hbar: ComplexInput,
    pub sites: Vec<SiteConfig>,
    pub boundary: BoundaryConfig,
    #[serde(default = "all_sectors")]
    pub sectors: SectorsInput,
    #[serde(default = "default_samples")]
    pub sample_points: SamplesInput,
    #[serde(default)]
    pub tolerances: Tolerances,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub grid: Option<GridConfig>,
    #[serde(default)]
    pub solver: SolverConfig,
    /// Root families to check, one list per level.
    #[serde(default)]
    pub roots: Option<Vec<Vec<ComplexInput>>>,
}

fn zero() -> ComplexInput {
    ComplexInput::Real(0.0)
}

fn one() -> ComplexInput {
    ComplexInput::Real(1.0)
}

fn all_sectors() -> SectorsInput {
    SectorsInput::Keyword("all".into())
}

fn default_samples() -> SamplesInput {
    SamplesInput::Spec("random:5".into())
}

/// A validated configuration.
#[derive(Clone, Debug)]
pub struct Experiment {
    pub config: ExperimentConfig,
    pub model: OpenChain,
    pub sectors: Vec<Vec<usize>>,
    pub samples: Vec<C64>,
    pub tolerances: Tolerances,
    pub seed: u64,
    pub grid: Vec<C64>,
    pub roots: Option<RootFamilies>,
}

fn config_err(e: impl std::fmt::Display) -> Error {
    Error::Config(e.to_string())
}

fn finite(z: C64, what: &str) -> Result<C64> {
    if z.re.is_finite() && z.im.is_finite() {
        Ok(z)
    } else {
        Err(Error::Config(format!("{what} is not finite")))
    }
}

/// Sectors M₁ ≥ M₂ ≥ … ≥ M_{n−1} ≥ 0 with M₁ ≤ `cap`.
pub fn all_sectors_up_to(n: usize, cap: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut cur = Vec::with_capacity(n - 1);
    fn rec(level: usize, n: usize, bound: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if level == n - 1 {
            out.push(cur.clone());
            return;
        }
        for m in 0..=bound {
            cur.push(m);
            rec(level + 1, n, m, cur, out);
            cur.pop();
        }
    }
    rec(0, n, cap, &mut cur, &mut out);
    out
}

impl ExperimentConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(config_err)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|source| Error::Io { path: path.display().to_string(), source })?;
        Self::from_json(&text)
    }

    /// Validate and build the model. `seed` overrides the configured seed.
    pub fn resolve(&self, seed: Option<u64>) -> Result<Experiment> {
        let n = self.n;
        if !(2..=4).contains(&n) {
            return Err(Error::Config(format!("rank n = {n} outside 2..=4")));
        }
        let hbar = finite(self.hbar.value(), "hbar")?;
        if hbar.norm() == 0.0 {
            return Err(Error::Config("hbar must be nonzero".into()));
        }
        if self.sites.is_empty() {
            return Err(Error::Config("at least one site is required".into()));
        }
        let mut sites = Vec::with_capacity(self.sites.len());
        let mut cap = 0usize;
        for (k, s) in self.sites.iter().enumerate() {
            if s.mu.len() != n {
                return Err(Error::Config(format!("site {} has a weight of length {}, rank is {n}", k + 1, s.mu.len())));
            }
            let mu: Vec<C64> = s.mu.iter().map(|z| z.value()).collect();
            let rep = gl_rep(n, &mu).map_err(|e| Error::Config(format!("site {}: {e}", k + 1)))?;
            let crate::yangian::RepClass::ShiftedSymmetric { m, .. } = rep.class();
            cap += *m;
            sites.push(SiteSpec { rep, a: finite(s.a.value(), "site inhomogeneity")? });
        }
        let chain = ChainSpec::new(n, hbar, sites).map_err(config_err)?;
        let boundary = BoundarySpec {
            a_split: self.boundary.a_split,
            c_minus: finite(self.boundary.c_minus.value(), "c_minus")?,
            k_plus_mode: self.boundary.k_plus_mode,
        };
        let model = OpenChain::new(chain, boundary).map_err(config_err)?;
        let sectors = match &self.sectors {
            SectorsInput::Keyword(k) if k == "all" => all_sectors_up_to(n, cap),
            SectorsInput::Keyword(k) => return Err(Error::Config(format!("unknown sectors keyword `{k}`"))),
            SectorsInput::List(list) => {
                for m in list {
                    if m.len() != n - 1 {
                        return Err(Error::Config(format!("sector {m:?} must have {} entries", n - 1)));
                    }
                }
                list.clone()
            }
        };
        let seed = seed.unwrap_or(self.seed);
        let samples = match &self.sample_points {
            SamplesInput::List(list) => {
                let pts: Result<Vec<C64>> = list.iter().map(|z| finite(z.value(), "sample point")).collect();
                pts?
            }
            SamplesInput::Spec(spec) => parse_random_spec(spec, seed)?,
        };
        if samples.is_empty() {
            return Err(Error::Config("at least one sample point is required".into()));
        }
        let t = self.tolerances;
        for (name, v) in [("identity", t.identity), ("match", t.r#match), ("residual", t.residual), ("eigenvector", t.eigenvector)] {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::Config(format!("tolerance `{name}` must be positive")));
            }
        }
        let grid_cfg = self.grid.unwrap_or_default();
        if !(grid_cfg.start.is_finite() && grid_cfg.stop.is_finite()) {
            return Err(Error::Config("grid bounds must be finite".into()));
        }
        let roots = match &self.roots {
            None => None,
            Some(fams) => {
                if fams.len() != n - 1 {
                    return Err(Error::Config(format!("roots need {} families", n - 1)));
                }
                Some(RootFamilies::new(fams.iter().map(|f| f.iter().map(|z| z.value()).collect()).collect()))
            }
        };
        Ok(Experiment {
            config: self.clone(),
            model,
            sectors,
            samples,
            tolerances: t,
            seed,
            grid: grid_cfg.points(),
            roots,
        })
    }
}

/// "random:count" or "random:count:seed"; the experiment seed is used when
/// none is given.
fn parse_random_spec(spec: &str, seed: u64) -> Result<Vec<C64>> {
    let parts: Vec<&str> = spec.split(':').collect();
    let bad = || Error::Config(format!("sample_points `{spec}` is not of the form random:count[:seed]"));
    if parts.first() != Some(&"random") || !(2..=3).contains(&parts.len()) {
        return Err(bad());
    }
    let count: usize = parts[1].parse().map_err(|_| bad())?;
    let s: u64 = match parts.get(2) {
        Some(p) => p.parse().map_err(|_| bad())?,
        None => seed,
    };
    let mut rng = sampling::seeded(s);
    Ok(sampling::generic_points(&mut rng, count, |_| true))
}

impl Experiment {
    /// The Bethe-ansatz runners cover K⁺ = I only.
    pub fn require_identity_k_plus(&self) -> Result<()> {
        if self.model.boundary.k_plus_mode == KPlusMode::Identity {
            Ok(())
        } else {
            Err(Error::Config("Bethe-ansatz subcommands need k_plus_mode = \"identity\"".into()))
        }
    }

    /// True when every sector up to the site cap was requested, so the
    /// Bethe spectrum is expected to cover the whole space.
    pub fn all_sectors(&self) -> bool {
        matches!(self.config.sectors, SectorsInput::Keyword(_))
    }

    pub fn solve_options(&self) -> SolveOptions {
        let s = self.config.solver;
        SolveOptions { seed: self.seed, homotopy: s.homotopy, max_paths: s.max_paths, random_tries: s.random_tries, ..SolveOptions::default() }
    }
}
