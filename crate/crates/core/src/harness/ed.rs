//! Exact diagonalization of the transfer matrix, resolved into common
//! eigenspaces of the commuting family.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::reflection::OpenChain;
use crate::tensor::C64;

/// Relative distance under which two eigenvalues are one cluster.
pub const CLUSTER_TOL: f64 = 1e-8;
const NULL_TOL: f64 = 1e-6;

#[derive(Clone, Debug)]
pub struct EdLevel {
    /// Orthonormal columns spanning the common eigenspace.
    pub basis: DMatrix<C64>,
    pub eigenvalue: C64,
}

impl EdLevel {
    pub fn multiplicity(&self) -> usize {
        self.basis.ncols()
    }
}

#[derive(Clone, Debug)]
pub struct EdSpectrum {
    pub u0: C64,
    pub u1: C64,
    pub dim: usize,
    pub levels: Vec<EdLevel>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SoundnessReport {
    pub point: C64,
    /// max over levels of the distance to the nearest directly computed eigenvalue
    pub max_distance: f64,
    /// max over levels of ‖d V − V (V^H d V)‖ relative to ‖d‖
    pub max_leak: f64,
    /// max over levels of the non-scalar part of V^H d V
    pub max_spread: f64,
}

fn clusters(values: &[C64], tol: f64) -> Vec<(C64, usize)> {
    let mut sorted: Vec<C64> = values.to_vec();
    sorted.sort_by(|a, b| a.re.total_cmp(&b.re).then(a.im.total_cmp(&b.im)));
    let mut groups: Vec<Vec<C64>> = Vec::new();
    for z in sorted {
        let hit = groups.iter_mut().find(|g| {
            let c = g.iter().sum::<C64>() / g.len() as f64;
            (c - z).norm() <= tol * c.norm().max(1.0)
        });
        match hit {
            Some(g) => g.push(z),
            None => groups.push(vec![z]),
        }
    }
    groups.into_iter().map(|g| (g.iter().sum::<C64>() / g.len() as f64, g.len())).collect()
}

pub fn eigenvalues(m: &DMatrix<C64>) -> Vec<C64> {
    let (_, t) = m.clone().schur().unpack();
    t.diagonal().iter().copied().collect()
}

/// Orthonormal basis of the `count`-dimensional near-null space of m.
fn null_space(m: &DMatrix<C64>, count: usize, at: C64) -> Result<DMatrix<C64>> {
    let svd = m.clone().svd(false, true);
    let vt = svd.v_t.ok_or(Error::Defective(at))?;
    let mut order: Vec<usize> = (0..svd.singular_values.len()).collect();
    order.sort_by(|a, b| svd.singular_values[*a].total_cmp(&svd.singular_values[*b]));
    let scale = svd.singular_values.max().max(1.0);
    if svd.singular_values[order[count - 1]] > NULL_TOL * scale {
        return Err(Error::Defective(at));
    }
    let cols: Vec<_> = order[..count].iter().map(|&k| vt.row(k).adjoint()).collect();
    Ok(DMatrix::from_columns(&cols))
}

fn split(a: &DMatrix<C64>, at: C64) -> Result<Vec<(C64, DMatrix<C64>)>> {
    let m = a.nrows();
    let mut out = Vec::new();
    for (lambda, count) in clusters(&eigenvalues(a), CLUSTER_TOL) {
        let shifted = a - DMatrix::<C64>::identity(m, m) * lambda;
        out.push((lambda, null_space(&shifted, count, at)?));
    }
    Ok(out)
}

impl EdSpectrum {
    /// Eigenspaces of d(u0), refined by d(u1).
    pub fn compute(model: &OpenChain, u0: C64, u1: C64) -> Result<Self> {
        let d0 = model.transfer_matrix(u0)?.into_data();
        let d1 = model.transfer_matrix(u1)?.into_data();
        let dim = d0.nrows();
        let mut levels = Vec::new();
        for (lambda, v) in split(&d0, u0)? {
            let a = v.adjoint() * &d1 * &v;
            for (_, w) in split(&a, u1)? {
                levels.push(EdLevel { basis: &v * w, eigenvalue: lambda });
            }
        }
        let cols: Vec<_> = levels.iter().flat_map(|l| l.basis.column_iter().map(|c| c.into_owned())).collect();
        let joint = DMatrix::from_columns(&cols);
        if cols.len() != dim || joint.singular_values().min() < NULL_TOL {
            return Err(Error::Defective(u0));
        }
        levels.sort_by(|a, b| a.eigenvalue.re.total_cmp(&b.eigenvalue.re).then(a.eigenvalue.im.total_cmp(&b.eigenvalue.im)));
        Ok(EdSpectrum { u0, u1, dim, levels })
    }

    pub fn total_multiplicity(&self) -> usize {
        self.levels.iter().map(EdLevel::multiplicity).sum()
    }

    /// tr(V^H d(v) V)/m for every level.
    pub fn eigenvalues_at(&self, model: &OpenChain, v: C64) -> Result<Vec<C64>> {
        let d = model.transfer_matrix(v)?.into_data();
        Ok(self.levels.iter().map(|l| (l.basis.adjoint() * &d * &l.basis).trace() / l.multiplicity() as f64).collect())
    }

    /// Compares the projected eigenvalues with a direct diagonalization at v.
    pub fn soundness(&self, model: &OpenChain, v: C64) -> Result<SoundnessReport> {
        let d = model.transfer_matrix(v)?.into_data();
        let direct = eigenvalues(&d);
        let norm = d.clone().singular_values().max().max(f64::MIN_POSITIVE);
        let mut report = SoundnessReport { point: v, max_distance: 0.0, max_leak: 0.0, max_spread: 0.0 };
        for l in &self.levels {
            let a = l.basis.adjoint() * &d * &l.basis;
            let m = l.multiplicity();
            let lambda = a.trace() / m as f64;
            let dist = direct.iter().map(|z| (z - lambda).norm()).fold(f64::INFINITY, f64::min);
            let leak = (&d * &l.basis - &l.basis * &a).norm() / norm;
            let spread = (&a - DMatrix::<C64>::identity(m, m) * lambda).norm() / norm;
            report.max_distance = report.max_distance.max(dist / lambda.norm().max(1.0));
            report.max_leak = report.max_leak.max(leak);
            report.max_spread = report.max_spread.max(spread);
        }
        Ok(report)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn clusters_merge_close_values() {
        let v = [C64::new(1.0, 0.0), C64::new(1.0 + 1e-12, 0.0), C64::new(2.0, 0.0)];
        let c = clusters(&v, CLUSTER_TOL);
        assert_eq!(c.len(), 2);
        assert_eq!(c[0].1, 2);
    }

    #[test]
    fn split_diagonal_with_repeat() {
        let a = DMatrix::from_diagonal(&nalgebra::DVector::from_vec(vec![
            C64::new(3.0, 0.0),
            C64::new(1.0, 1.0),
            C64::new(3.0, 0.0),
        ]));
        let parts = split(&a, C64::new(0.0, 0.0)).unwrap();
        let mut dims: Vec<usize> = parts.iter().map(|(_, b)| b.ncols()).collect();
        dims.sort();
        assert_eq!(dims, vec![1, 2]);
    }

    #[test]
    fn jordan_block_is_defective() {
        let a = DMatrix::from_row_slice(2, 2, &[C64::new(1.0, 0.0), C64::new(1.0, 0.0), C64::new(0.0, 0.0), C64::new(1.0, 0.0)]);
        assert!(matches!(split(&a, C64::new(0.0, 0.0)), Err(Error::Defective(_))));
    }
}
