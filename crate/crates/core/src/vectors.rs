//! Bethe vectors: the rank-2 product, the trace formula and the level recursion.

use nalgebra::DVector;
use serde::{Deserialize, Serialize};

use crate::bethe::{BetheSystem, RootFamilies};
use crate::error::{Error, Result};
use crate::reflection::OpenChain;
use crate::tensor::{embed, partial_trace, unit_matrix, OperatorMatrix, SpaceLayout, StateVector, C64};
use crate::yangian::normalized_reduced_r;

/// Largest number of complex entries any construction may allocate.
pub const ENTRY_LIMIT: usize = 1 << 20;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    ProductN2,
    Trace,
    Recursion,
}

#[derive(Clone, Debug)]
pub struct BetheVector {
    pub state: DVector<C64>,
    pub roots: RootFamilies,
    pub method: Method,
}

/// Auxiliary spaces a^i_j, one per root, ordered family by family.
#[derive(Clone, Debug)]
pub struct AuxiliaryEnsemble {
    n: usize,
    entries: Vec<(usize, usize)>,
}

impl AuxiliaryEnsemble {
    pub fn new(n: usize, m: &[usize]) -> Self {
        let entries = m.iter().enumerate().flat_map(|(i, &mi)| (0..mi).map(move |j| (i + 1, j))).collect();
        AuxiliaryEnsemble { n, entries }
    }

    pub fn label(level: usize, j: usize) -> String {
        format!("A{level}_{}", j + 1)
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// (level, 0-based index) pairs in order.
    pub fn entries(&self) -> &[(usize, usize)] {
        &self.entries
    }

    /// Spaces of the levels strictly below `level`.
    pub fn layout_below(&self, level: usize) -> Result<SpaceLayout> {
        SpaceLayout::new(
            self.entries.iter().filter(|(i, _)| *i < level).map(|&(i, j)| (Self::label(i, j), self.n)),
        )
    }

    pub fn layout(&self) -> Result<SpaceLayout> {
        self.layout_below(usize::MAX)
    }
}

fn check_roots(model: &OpenChain, roots: &RootFamilies) -> Result<()> {
    roots.check_admissible(model.n())
}

/// A vector this small relative to the product of the norms of the applied
/// operators is cancellation noise.
const ZERO_TOL: f64 = 1e-11;

fn nonzero(state: DVector<C64>, scale: f64, roots: &RootFamilies, method: Method) -> Result<BetheVector> {
    if !(state.norm() > ZERO_TOL * scale) {
        return Err(Error::ZeroVector);
    }
    Ok(BetheVector { state, roots: roots.clone(), method })
}

fn vacuum(model: &OpenChain) -> Result<StateVector> {
    StateVector::basis(model.chain.quantum_layout(), model.chain.vacuum_index())
}

/// Φ = d̂₁₂(u₁)⋯d̂₁₂(u_M)Ω with d̂₁₂(u) = d₁₂(u + ħ/2).
pub fn phi_product_n2(model: &OpenChain, roots: &RootFamilies) -> Result<BetheVector> {
    if model.n() != 2 {
        return Err(Error::InvalidArgument(format!("product construction needs rank 2, got {}", model.n())));
    }
    check_roots(model, roots)?;
    let h = model.hbar();
    let mut v = vacuum(model)?.into_data();
    let mut scale = 1.0;
    for y in roots.roots[0].iter().rev() {
        let b = model.double_row_d(y + h * 0.5)?.aux_block(0, 1)?;
        scale *= b.data().norm();
        v = b.apply(&v)?;
    }
    nonzero(v, scale, roots, Method::ProductN2)
}

/// One factor of the level-i dressing, as an operator on (a^i_j, a^b_c).
struct Dressing {
    op: OperatorMatrix,
}

/// Left dressing R̄ (b descending, c ascending) and right dressing R
/// (b ascending, c descending) for root (level, j).
fn dressings(model: &OpenChain, roots: &RootFamilies, level: usize, j: usize) -> Result<(Vec<Dressing>, Vec<Dressing>)> {
    let n = model.n();
    let h = model.hbar();
    let y = roots.roots[level - 1][j];
    let me = AuxiliaryEnsemble::label(level, j);
    let make = |arg: C64, b: usize, c: usize| -> Result<Dressing> {
        let r = normalized_reduced_r(arg, level, b + 1, n, h)?;
        let other = AuxiliaryEnsemble::label(b, c);
        Ok(Dressing { op: r.relabel(&[&me, &other])? })
    };
    let mut left = Vec::new();
    for b in (1..level).rev() {
        for (c, x) in roots.roots[b - 1].iter().enumerate() {
            left.push(make(y + x + h * ((level - b) as f64 / 2.0), b, c)?);
        }
    }
    let mut right = Vec::new();
    for b in 1..level {
        for (c, x) in roots.roots[b - 1].iter().enumerate().rev() {
            right.push(make(y - x + h * ((level - b) as f64 / 2.0), b, c)?);
        }
    }
    Ok((left, right))
}

/// D̂⁽ⁱ⁾(u_ij + ħ/2) on (a^i_j, q1, …, qL).
fn reduced_factor(model: &OpenChain, roots: &RootFamilies, level: usize, j: usize) -> Result<OperatorMatrix> {
    let y = roots.roots[level - 1][j];
    let d = model.reduced_d(level, y + model.hbar() * 0.5)?;
    let mut labels: Vec<String> = vec![AuxiliaryEnsemble::label(level, j)];
    labels.extend(d.layout().labels().skip(1).map(str::to_string));
    let refs: Vec<&str> = labels.iter().map(String::as_str).collect();
    d.relabel(&refs)
}

/// Trace formula: tr over all auxiliary spaces of the ordered product of
/// dressed reduced monodromies times ⊗ E_{i+1,i}, applied to Ω.
pub fn phi_trace(model: &OpenChain, roots: &RootFamilies) -> Result<BetheVector> {
    check_roots(model, roots)?;
    let n = model.n();
    let ens = AuxiliaryEnsemble::new(n, &roots.m);
    let full = ens.layout()?.concat(&model.chain.quantum_layout())?;
    let dim = full.dim();
    if dim.checked_mul(dim).is_none_or(|e| e > ENTRY_LIMIT) {
        return Err(Error::MemoryGuard { requested: dim.saturating_mul(dim), limit: ENTRY_LIMIT });
    }
    let mut x = OperatorMatrix::identity(full.clone());
    let mut scale = 1.0;
    for &(level, j) in ens.entries() {
        let (left, right) = dressings(model, roots, level, j)?;
        let factor = reduced_factor(model, roots, level, j)?;
        for op in left.iter().map(|f| &f.op).chain([&factor]).chain(right.iter().map(|f| &f.op)) {
            scale *= op.data().norm();
            x = x.matmul(&embed(op, &full)?)?;
        }
    }
    for &(level, j) in ens.entries() {
        let label = AuxiliaryEnsemble::label(level, j);
        let e = OperatorMatrix::new(SpaceLayout::single(&label, n)?, unit_matrix(n, level, level - 1))?;
        x = x.matmul(&embed(&e, &full)?)?;
    }
    for &(level, j) in ens.entries() {
        x = partial_trace(&x, &AuxiliaryEnsemble::label(level, j))?;
    }
    let v = x.apply(vacuum(model)?.data())?;
    nonzero(v, scale, roots, Method::Trace)
}

/// Rank reduction: the vector of level `level` and above, living on the
/// auxiliary spaces of lower levels and H.
fn recurse(model: &OpenChain, roots: &RootFamilies, ens: &AuxiliaryEnsemble, level: usize, scale: &mut f64) -> Result<StateVector> {
    let n = model.n();
    if level == n {
        let mut state = StateVector::basis(SpaceLayout::new(Vec::<(String, usize)>::new())?, 0)?;
        for &(i, j) in ens.entries() {
            let e = StateVector::basis(SpaceLayout::single(&AuxiliaryEnsemble::label(i, j), n)?, i)?;
            state = state.kron(&e)?;
        }
        return state.kron(&vacuum(model)?);
    }
    let mut w = recurse(model, roots, ens, level + 1, scale)?;
    for j in (0..roots.m[level - 1]).rev() {
        let (left, right) = dressings(model, roots, level, j)?;
        let factor = reduced_factor(model, roots, level, j)?;
        for op in right.iter().rev().map(|f| &f.op).chain([&factor]).chain(left.iter().rev().map(|f| &f.op)) {
            *scale *= op.data().norm();
            w = w.apply_local(op)?;
        }
        w = w.project(&AuxiliaryEnsemble::label(level, j), level - 1)?;
    }
    Ok(w)
}

/// Recursion formula: B̂-rows of level 1 applied to the embedded vector of
/// the levels above, each level dressed by the roots below it.
pub fn phi_recursion(model: &OpenChain, roots: &RootFamilies) -> Result<BetheVector> {
    check_roots(model, roots)?;
    let ens = AuxiliaryEnsemble::new(model.n(), &roots.m);
    let dim = ens.layout()?.dim().saturating_mul(model.chain.quantum_dim());
    if dim > ENTRY_LIMIT {
        return Err(Error::MemoryGuard { requested: dim, limit: ENTRY_LIMIT });
    }
    let mut scale = 1.0;
    let v = recurse(model, roots, &ens, 1, &mut scale)?;
    nonzero(v.into_data(), scale, roots, Method::Recursion)
}

/// Best scalar c with a ≈ c·b and the relative misfit ‖a − c·b‖/‖a‖.
pub fn align(a: &DVector<C64>, b: &DVector<C64>) -> (C64, f64) {
    let bb = b.dotc(b);
    if bb.norm() == 0.0 {
        return (C64::new(0.0, 0.0), 1.0);
    }
    let c = b.dotc(a) / bb;
    let misfit = (a - b * c).norm() / a.norm().max(f64::MIN_POSITIVE);
    (c, misfit)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EigenReport {
    pub samples: Vec<C64>,
    pub eigenvalues: Vec<C64>,
    pub residuals: Vec<f64>,
    pub max_residual: f64,
    /// true when the eigenvalue is the Rayleigh quotient rather than Λ(u)
    pub rayleigh: bool,
}

/// ‖d(u)v − Λ(u)v‖ / (‖d(u)‖₂‖v‖) at each sample.
pub fn eigencheck(model: &OpenChain, vec: &BetheVector, samples: &[C64], system: Option<&BetheSystem>) -> Result<EigenReport> {
    let v = &vec.state;
    if !(v.norm() > 0.0) {
        return Err(Error::ZeroVector);
    }
    let mut eigenvalues = Vec::with_capacity(samples.len());
    let mut residuals = Vec::with_capacity(samples.len());
    for &u in samples {
        let d = model.transfer_matrix(u)?;
        let dv = d.apply(v)?;
        let lambda = match system {
            Some(s) => s.lambda_eig(u, &vec.roots)?,
            None => v.dotc(&dv) / v.dotc(v),
        };
        let norm_d = d.data().clone().singular_values().max();
        let r = (dv - v * lambda).norm() / (norm_d * v.norm()).max(f64::MIN_POSITIVE);
        eigenvalues.push(lambda);
        residuals.push(r);
    }
    let max_residual = residuals.iter().cloned().fold(0.0, f64::max);
    Ok(EigenReport { samples: samples.to_vec(), eigenvalues, residuals, max_residual, rayleigh: system.is_none() })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ensemble_labels_in_order() {
        let e = AuxiliaryEnsemble::new(3, &[2, 1]);
        assert_eq!(e.entries(), &[(1, 0), (1, 1), (2, 0)]);
        let labels: Vec<String> = e.layout().unwrap().labels().map(str::to_string).collect();
        assert_eq!(labels, vec!["A1_1", "A1_2", "A2_1"]);
        assert_eq!(e.layout_below(2).unwrap().len(), 2);
    }

    #[test]
    fn align_recovers_scalar() {
        let b = DVector::from_vec(vec![C64::new(1.0, 2.0), C64::new(-0.5, 0.1)]);
        let a = &b * C64::new(0.3, -1.7);
        let (c, misfit) = align(&a, &b);
        assert!((c - C64::new(0.3, -1.7)).norm() < 1e-14);
        assert!(misfit < 1e-14);
    }
}
