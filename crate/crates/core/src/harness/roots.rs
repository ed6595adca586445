//! Runners for solving sectors and for checking a given set of roots.

use serde::{Deserialize, Serialize};

use crate::bethe::{BetheSystem, ResidueReport, RootFamilies};
use crate::error::{Error, Result};
use crate::harness::config::Experiment;
use crate::harness::ed::EdSpectrum;
use crate::harness::spectrum::{bethe_vector, solve_sectors, WeightSummary, ED_DIM_LIMIT, RESIDUE_TOL};
use crate::reflection::WeightSource;
use crate::sampling;
use crate::tensor::C64;
use crate::vectors::{align, eigencheck, phi_recursion, phi_trace, EigenReport};

/// Agreement required between the trace and recursion constructions.
pub const CONSTRUCTION_TOL: f64 = 1e-9;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SolvedRoots {
    pub roots: RootFamilies,
    pub bethe_residual: f64,
    pub residue: Option<f64>,
    pub fingerprint: Vec<C64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SolvedSector {
    pub sector: Vec<usize>,
    pub homotopy_paths: usize,
    pub newton_starts: usize,
    pub converged: usize,
    pub notes: Vec<String>,
    pub solutions: Vec<SolvedRoots>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SolveReport {
    pub n: usize,
    pub sites: usize,
    pub sectors: Vec<SolvedSector>,
    pub weights: WeightSummary,
    pub warnings: Vec<String>,
    pub passed: bool,
}

fn summary(sys: &BetheSystem) -> WeightSummary {
    let w = sys.weights();
    WeightSummary { source: w.source, closed_form_error: w.closed_form_error, printed_form_error: w.printed_form_error }
}

pub fn run_bethe_solve(exp: &Experiment) -> Result<SolveReport> {
    exp.require_identity_k_plus()?;
    let sys = BetheSystem::new(&exp.model)?;
    let outcomes = solve_sectors(&sys, &exp.sectors, &exp.solve_options())?;
    let tol = exp.tolerances.residual;
    let mut passed = sys.weights().source == WeightSource::ClosedForm;
    let mut sectors = Vec::with_capacity(outcomes.len());
    for out in outcomes {
        let mut solutions = Vec::with_capacity(out.solutions.len());
        for roots in out.solutions {
            let (bethe_residual, residue) = if roots.total() == 0 {
                (0.0, None)
            } else {
                let r = sys.residual(&roots).map(|r| r.max_norm).unwrap_or(f64::INFINITY);
                let q = sys.residue_check(&roots).map(|r| r.max_relative).unwrap_or(f64::INFINITY);
                (r, Some(q))
            };
            passed &= bethe_residual < tol && residue.is_none_or(|q| q < RESIDUE_TOL);
            let fingerprint = sys.fingerprint(&roots)?.to_vec();
            solutions.push(SolvedRoots { roots, bethe_residual, residue, fingerprint });
        }
        sectors.push(SolvedSector {
            sector: out.sector,
            homotopy_paths: out.homotopy_paths,
            newton_starts: out.newton_starts,
            converged: out.converged,
            notes: out.notes,
            solutions,
        });
    }
    Ok(SolveReport {
        n: exp.model.n(),
        sites: exp.model.chain.len(),
        sectors,
        weights: summary(&sys),
        warnings: sys.weights().warnings.clone(),
        passed,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CheckReport {
    pub roots: RootFamilies,
    pub bethe_residual: f64,
    pub residue: ResidueReport,
    pub lambda: Vec<C64>,
    pub eigen: EigenReport,
    /// relative misfit of the trace construction against the recursion
    pub trace_vs_recursion: Option<f64>,
    /// relative misfit after reversing the order of every family
    pub permutation: Option<f64>,
    /// nearest ED level and its relative mismatch over the samples
    pub ed_mismatch: Option<f64>,
    pub weights: WeightSummary,
    pub warnings: Vec<String>,
    pub passed: bool,
}

fn optional(r: Result<f64>) -> Result<Option<f64>> {
    match r {
        Ok(x) => Ok(Some(x)),
        Err(Error::MemoryGuard { .. }) => Ok(None),
        Err(e) => Err(e),
    }
}

pub fn run_bethe_check(exp: &Experiment) -> Result<CheckReport> {
    exp.require_identity_k_plus()?;
    let roots = exp.roots.clone().ok_or_else(|| Error::Config("bethe-check needs `roots` in the configuration".into()))?;
    roots.check_admissible(exp.model.n()).map_err(|e| Error::Config(e.to_string()))?;
    let model = &exp.model;
    let sys = BetheSystem::new(model)?;
    let tol = exp.tolerances;
    let bethe_residual = sys.residual(&roots)?.max_norm;
    let residue = sys.residue_check(&roots)?;
    let lambda: Vec<C64> = exp.samples.iter().map(|&u| sys.lambda_eig(u, &roots)).collect::<Result<_>>()?;
    let vector = bethe_vector(model, &roots)?;
    let eigen = eigencheck(model, &vector, &exp.samples, Some(&sys))?;
    let trace_vs_recursion = optional((|| {
        let t = phi_trace(model, &roots)?;
        let r = phi_recursion(model, &roots)?;
        Ok(align(&t.state, &r.state).1)
    })())?;
    let permutation = optional((|| {
        let rev = RootFamilies::new(roots.roots.iter().map(|f| f.iter().rev().copied().collect()).collect());
        let a = phi_recursion(model, &roots)?;
        let b = phi_recursion(model, &rev)?;
        Ok(align(&b.state, &a.state).1)
    })())?;
    let ed_mismatch = if model.chain.quantum_dim() <= ED_DIM_LIMIT {
        let mut rng = sampling::seeded(exp.seed ^ 0xc4ec);
        let pts = sampling::generic_points(&mut rng, 2, |_| true);
        let ed = EdSpectrum::compute(model, pts[0], pts[1])?;
        let mut per_level = vec![0.0f64; ed.levels.len()];
        for (&u, lam) in exp.samples.iter().zip(&lambda) {
            for (slot, v) in per_level.iter_mut().zip(ed.eigenvalues_at(model, u)?) {
                *slot = slot.max((lam - v).norm() / v.norm().max(1.0));
            }
        }
        per_level.into_iter().reduce(f64::min)
    } else {
        None
    };
    let passed = bethe_residual < tol.residual
        && residue.max_relative < RESIDUE_TOL
        && eigen.max_residual < tol.eigenvector
        && trace_vs_recursion.is_none_or(|m| m < CONSTRUCTION_TOL)
        && permutation.is_none_or(|m| m < CONSTRUCTION_TOL)
        && ed_mismatch.is_none_or(|m| m < tol.r#match)
        && sys.weights().source == WeightSource::ClosedForm;
    Ok(CheckReport {
        roots,
        bethe_residual,
        residue,
        lambda,
        eigen,
        trace_vs_recursion,
        permutation,
        ed_mismatch,
        weights: summary(&sys),
        warnings: sys.weights().warnings.clone(),
        passed,
    })
}
