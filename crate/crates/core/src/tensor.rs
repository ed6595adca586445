//! Dense complex operators on ordered, labeled tensor products.
//!
//! Basis convention: lexicographic, leftmost space slowest-varying.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::error::{Error, Result};

pub type C64 = Complex64;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SpaceLayout {
    spaces: Vec<(String, usize)>,
    dim: usize,
}

impl SpaceLayout {
    pub fn new<S: Into<String>>(spaces: impl IntoIterator<Item = (S, usize)>) -> Result<Self> {
        let spaces: Vec<(String, usize)> = spaces.into_iter().map(|(l, d)| (l.into(), d)).collect();
        let mut dim: usize = 1;
        for (k, (label, d)) in spaces.iter().enumerate() {
            if *d == 0 {
                return Err(Error::InvalidArgument(format!("space `{label}` has dimension 0")));
            }
            if spaces[..k].iter().any(|(l, _)| l == label) {
                return Err(Error::LabelCollision(label.clone()));
            }
            dim = dim.checked_mul(*d).ok_or(Error::DimensionOverflow)?;
        }
        Ok(SpaceLayout { spaces, dim })
    }

    pub fn single(label: &str, dim: usize) -> Result<Self> {
        Self::new([(label, dim)])
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.spaces.len()
    }

    pub fn is_empty(&self) -> bool {
        self.spaces.is_empty()
    }

    pub fn spaces(&self) -> &[(String, usize)] {
        &self.spaces
    }

    pub fn labels(&self) -> impl Iterator<Item = &str> {
        self.spaces.iter().map(|(l, _)| l.as_str())
    }

    pub fn position(&self, label: &str) -> Option<usize> {
        self.spaces.iter().position(|(l, _)| l == label)
    }

    pub fn dim_of(&self, label: &str) -> Option<usize> {
        self.position(label).map(|p| self.spaces[p].1)
    }

    pub fn concat(&self, other: &SpaceLayout) -> Result<Self> {
        Self::new(self.spaces.iter().chain(other.spaces.iter()).cloned())
    }

    pub fn without(&self, label: &str) -> Result<Self> {
        let p = self.position(label).ok_or_else(|| Error::MissingLabel(label.to_string()))?;
        let mut spaces = self.spaces.clone();
        spaces.remove(p);
        Self::new(spaces)
    }

    fn strides(&self) -> Vec<usize> {
        let mut s = vec![1; self.spaces.len()];
        for k in (0..self.spaces.len().saturating_sub(1)).rev() {
            s[k] = s[k + 1] * self.spaces[k + 1].1;
        }
        s
    }

    /// For each basis index of the sub-layout made of `positions` (in that
    /// order), its offset in this layout.
    fn offsets(&self, positions: &[usize]) -> Vec<usize> {
        let strides = self.strides();
        let mut out = vec![0usize];
        for &p in positions {
            let d = self.spaces[p].1;
            let mut next = Vec::with_capacity(out.len() * d);
            for &o in &out {
                for k in 0..d {
                    next.push(o + k * strides[p]);
                }
            }
            out = next;
        }
        out
    }

    /// Positions of `sub`'s labels inside `self`, checking dimensions.
    fn locate(&self, sub: &SpaceLayout) -> Result<Vec<usize>> {
        sub.spaces
            .iter()
            .map(|(label, d)| {
                let p = self.position(label).ok_or_else(|| Error::MissingLabel(label.clone()))?;
                if self.spaces[p].1 != *d {
                    return Err(Error::DimMismatch {
                        label: label.clone(),
                        expected: self.spaces[p].1,
                        found: *d,
                    });
                }
                Ok(p)
            })
            .collect()
    }

    fn complement(&self, positions: &[usize]) -> Vec<usize> {
        (0..self.spaces.len()).filter(|p| !positions.contains(p)).collect()
    }
}

fn check_finite_matrix(m: &DMatrix<C64>, what: &'static str) -> Result<()> {
    if m.iter().all(|z| z.re.is_finite() && z.im.is_finite()) {
        Ok(())
    } else {
        Err(Error::NonFinite(what))
    }
}

fn check_finite_vector(v: &DVector<C64>, what: &'static str) -> Result<()> {
    if v.iter().all(|z| z.re.is_finite() && z.im.is_finite()) {
        Ok(())
    } else {
        Err(Error::NonFinite(what))
    }
}

#[derive(Clone, Debug)]
pub struct OperatorMatrix {
    layout: SpaceLayout,
    data: DMatrix<C64>,
}

impl OperatorMatrix {
    pub fn new(layout: SpaceLayout, data: DMatrix<C64>) -> Result<Self> {
        if data.nrows() != layout.dim() || data.ncols() != layout.dim() {
            return Err(Error::LayoutMismatch(format!(
                "matrix is {}x{}, layout dimension {}",
                data.nrows(),
                data.ncols(),
                layout.dim()
            )));
        }
        check_finite_matrix(&data, "OperatorMatrix::new")?;
        Ok(OperatorMatrix { layout, data })
    }

    pub fn identity(layout: SpaceLayout) -> Self {
        let d = layout.dim();
        OperatorMatrix { layout, data: DMatrix::identity(d, d) }
    }

    pub fn zeros(layout: SpaceLayout) -> Self {
        let d = layout.dim();
        OperatorMatrix { layout, data: DMatrix::zeros(d, d) }
    }

    pub fn from_diagonal(layout: SpaceLayout, diag: &[C64]) -> Result<Self> {
        if diag.len() != layout.dim() {
            return Err(Error::LayoutMismatch(format!(
                "{} diagonal entries for dimension {}",
                diag.len(),
                layout.dim()
            )));
        }
        let data = DMatrix::from_diagonal(&DVector::from_column_slice(diag));
        Self::new(layout, data)
    }

    pub fn layout(&self) -> &SpaceLayout {
        &self.layout
    }

    pub fn data(&self) -> &DMatrix<C64> {
        &self.data
    }

    pub fn into_data(self) -> DMatrix<C64> {
        self.data
    }

    pub fn dim(&self) -> usize {
        self.layout.dim()
    }

    /// Rename the spaces in order; dimensions are kept.
    pub fn relabel(&self, labels: &[&str]) -> Result<Self> {
        if labels.len() != self.layout.len() {
            return Err(Error::LayoutMismatch(format!(
                "{} labels for {} spaces",
                labels.len(),
                self.layout.len()
            )));
        }
        let layout = SpaceLayout::new(
            labels.iter().zip(self.layout.spaces()).map(|(l, (_, d))| (l.to_string(), *d)),
        )?;
        Ok(OperatorMatrix { layout, data: self.data.clone() })
    }

    fn same_layout(&self, other: &OperatorMatrix) -> Result<()> {
        if self.layout != other.layout {
            return Err(Error::LayoutMismatch(format!(
                "{:?} vs {:?}",
                self.layout.spaces(),
                other.layout.spaces()
            )));
        }
        Ok(())
    }

    pub fn matmul(&self, other: &OperatorMatrix) -> Result<Self> {
        self.same_layout(other)?;
        let data = complex_matmul(&self.data, &other.data);
        check_finite_matrix(&data, "matmul")?;
        Ok(OperatorMatrix { layout: self.layout.clone(), data })
    }

    pub fn add(&self, other: &OperatorMatrix) -> Result<Self> {
        self.same_layout(other)?;
        Ok(OperatorMatrix { layout: self.layout.clone(), data: &self.data + &other.data })
    }

    pub fn sub(&self, other: &OperatorMatrix) -> Result<Self> {
        self.same_layout(other)?;
        Ok(OperatorMatrix { layout: self.layout.clone(), data: &self.data - &other.data })
    }

    pub fn scale(&self, c: C64) -> Result<Self> {
        let data = &self.data * c;
        check_finite_matrix(&data, "scale")?;
        Ok(OperatorMatrix { layout: self.layout.clone(), data })
    }

    pub fn commutator(&self, other: &OperatorMatrix) -> Result<Self> {
        self.matmul(other)?.sub(&other.matmul(self)?)
    }

    pub fn trace(&self) -> C64 {
        self.data.trace()
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0, |m, z| m.max(z.norm()))
    }

    pub fn apply(&self, v: &DVector<C64>) -> Result<DVector<C64>> {
        if v.len() != self.dim() {
            return Err(Error::LayoutMismatch(format!("vector of length {} for dimension {}", v.len(), self.dim())));
        }
        Ok(&self.data * v)
    }

    /// Transpose in the named factor only.
    pub fn partial_transpose(&self, label: &str) -> Result<Self> {
        let p = self.layout.position(label).ok_or_else(|| Error::MissingLabel(label.to_string()))?;
        let s = self.layout.strides()[p];
        let d = self.layout.spaces()[p].1;
        let n = self.dim();
        let digit = |i: usize| (i / s) % d;
        let data = DMatrix::from_fn(n, n, |i, j| {
            let (di, dj) = (digit(i), digit(j));
            self.data[(i - di * s + dj * s, j - dj * s + di * s)]
        });
        Ok(OperatorMatrix { layout: self.layout.clone(), data })
    }

    /// Block (i, j) with respect to the first space, as an operator on the rest.
    pub fn aux_block(&self, i: usize, j: usize) -> Result<Self> {
        let (_, n) = self
            .layout
            .spaces()
            .first()
            .cloned()
            .ok_or_else(|| Error::InvalidArgument("empty layout".into()))?;
        if i >= n || j >= n {
            return Err(Error::InvalidArgument(format!("block ({i},{j}) outside rank {n}")));
        }
        let rest = SpaceLayout::new(self.layout.spaces()[1..].iter().cloned())?;
        let h = rest.dim();
        let data = self.data.view((i * h, j * h), (h, h)).into_owned();
        Ok(OperatorMatrix { layout: rest, data })
    }
}

pub fn kron(a: &OperatorMatrix, b: &OperatorMatrix) -> Result<OperatorMatrix> {
    let layout = a.layout.concat(&b.layout)?;
    let data = a.data.kronecker(&b.data);
    check_finite_matrix(&data, "kron")?;
    Ok(OperatorMatrix { layout, data })
}

/// Acts as `op` on its labels and as the identity on every other space of `target`.
pub fn embed(op: &OperatorMatrix, target: &SpaceLayout) -> Result<OperatorMatrix> {
    let pos = target.locate(&op.layout)?;
    let rest = target.complement(&pos);
    let off_op = target.offsets(&pos);
    let off_rest = target.offsets(&rest);
    let mut data = DMatrix::zeros(target.dim(), target.dim());
    for &b in &off_rest {
        for (r, &or) in off_op.iter().enumerate() {
            for (c, &oc) in off_op.iter().enumerate() {
                data[(b + or, b + oc)] = op.data[(r, c)];
            }
        }
    }
    Ok(OperatorMatrix { layout: target.clone(), data })
}

pub fn partial_trace(op: &OperatorMatrix, label: &str) -> Result<OperatorMatrix> {
    let p = op.layout.position(label).ok_or_else(|| Error::MissingLabel(label.to_string()))?;
    let s = op.layout.strides()[p];
    let d = op.layout.spaces()[p].1;
    let layout = op.layout.without(label)?;
    let rest = op.layout.complement(&[p]);
    let off = op.layout.offsets(&rest);
    let m = layout.dim();
    let data = DMatrix::from_fn(m, m, |i, j| (0..d).map(|k| op.data[(off[i] + k * s, off[j] + k * s)]).sum());
    Ok(OperatorMatrix { layout, data })
}

/// The flip P = Σ E_ij ⊗ E_ji on C^n ⊗ C^n, spaces labeled "1" and "2".
pub fn permutation_op(n: usize) -> OperatorMatrix {
    let layout = SpaceLayout::new([("1", n), ("2", n)]).expect("static layout");
    let mut data = DMatrix::zeros(n * n, n * n);
    for i in 0..n {
        for j in 0..n {
            data[(i * n + j, j * n + i)] = C64::new(1.0, 0.0);
        }
    }
    OperatorMatrix { layout, data }
}

/// Unit matrix E_ij on C^n (0-based indices).
pub fn unit_matrix(n: usize, i: usize, j: usize) -> DMatrix<C64> {
    let mut m = DMatrix::zeros(n, n);
    m[(i, j)] = C64::new(1.0, 0.0);
    m
}

/// Left-to-right product X₁X₂…X_k of operators sharing one layout.
pub fn ordered_product(factors: &[OperatorMatrix]) -> Result<OperatorMatrix> {
    let (first, rest) = factors
        .split_first()
        .ok_or_else(|| Error::InvalidArgument("empty product".into()))?;
    rest.iter().try_fold(first.clone(), |acc, f| acc.matmul(f))
}

/// Right-to-left product X_k…X₁.
pub fn reversed_product(factors: &[OperatorMatrix]) -> Result<OperatorMatrix> {
    let rev: Vec<OperatorMatrix> = factors.iter().rev().cloned().collect();
    ordered_product(&rev)
}

/// max|a−b| relative to the largest entry of either operand.
/// Dense complex product through four real products, which take the
/// optimized f64 kernel.
pub fn complex_matmul(a: &DMatrix<C64>, b: &DMatrix<C64>) -> DMatrix<C64> {
    if a.nrows() * a.ncols() * b.ncols() < 32 * 32 * 32 {
        return a * b;
    }
    let (ar, ai) = (a.map(|z| z.re), a.map(|z| z.im));
    let (br, bi) = (b.map(|z| z.re), b.map(|z| z.im));
    let re = &ar * &br - &ai * &bi;
    let im = &ar * &bi + &ai * &br;
    re.zip_map(&im, C64::new)
}

pub fn rel_residual(a: &DMatrix<C64>, b: &DMatrix<C64>) -> f64 {
    let scale = a.iter().chain(b.iter()).fold(0.0f64, |m, z| m.max(z.norm()));
    let diff = a.iter().zip(b.iter()).fold(0.0f64, |m, (x, y)| m.max((x - y).norm()));
    if scale == 0.0 {
        diff
    } else {
        diff / scale
    }
}

#[derive(Clone, Debug)]
pub struct StateVector {
    layout: SpaceLayout,
    data: DVector<C64>,
}

impl StateVector {
    pub fn new(layout: SpaceLayout, data: DVector<C64>) -> Result<Self> {
        if data.len() != layout.dim() {
            return Err(Error::LayoutMismatch(format!(
                "vector of length {} for layout dimension {}",
                data.len(),
                layout.dim()
            )));
        }
        check_finite_vector(&data, "StateVector::new")?;
        Ok(StateVector { layout, data })
    }

    pub fn basis(layout: SpaceLayout, index: usize) -> Result<Self> {
        if index >= layout.dim() {
            return Err(Error::InvalidArgument(format!("basis index {index} outside dimension {}", layout.dim())));
        }
        let mut data = DVector::zeros(layout.dim());
        data[index] = C64::new(1.0, 0.0);
        Ok(StateVector { layout, data })
    }

    pub fn layout(&self) -> &SpaceLayout {
        &self.layout
    }

    pub fn data(&self) -> &DVector<C64> {
        &self.data
    }

    pub fn into_data(self) -> DVector<C64> {
        self.data
    }

    pub fn kron(&self, other: &StateVector) -> Result<Self> {
        let layout = self.layout.concat(&other.layout)?;
        let data = self.data.kronecker(&other.data);
        Ok(StateVector { layout, data })
    }

    /// Apply an operator acting on a subset of this state's spaces.
    pub fn apply_local(&self, op: &OperatorMatrix) -> Result<Self> {
        let pos = self.layout.locate(&op.layout)?;
        let rest = self.layout.complement(&pos);
        let off_op = self.layout.offsets(&pos);
        let off_rest = self.layout.offsets(&rest);
        let mut data = DVector::zeros(self.layout.dim());
        let mut local = DVector::zeros(off_op.len());
        for &b in &off_rest {
            for (c, &oc) in off_op.iter().enumerate() {
                local[c] = self.data[b + oc];
            }
            let out = &op.data * &local;
            for (r, &or) in off_op.iter().enumerate() {
                data[b + or] = out[r];
            }
        }
        check_finite_vector(&data, "apply_local")?;
        Ok(StateVector { layout: self.layout.clone(), data })
    }

    /// Contract the named space with the basis bra ⟨e_index|.
    pub fn project(&self, label: &str, index: usize) -> Result<Self> {
        let p = self.layout.position(label).ok_or_else(|| Error::MissingLabel(label.to_string()))?;
        let d = self.layout.spaces()[p].1;
        if index >= d {
            return Err(Error::InvalidArgument(format!("index {index} outside space `{label}` of dimension {d}")));
        }
        let s = self.layout.strides()[p];
        let layout = self.layout.without(label)?;
        let off = self.layout.offsets(&self.layout.complement(&[p]));
        let data = DVector::from_iterator(off.len(), off.iter().map(|&o| self.data[o + index * s]));
        Ok(StateVector { layout, data })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn split_product_matches_direct() {
        let a = DMatrix::from_fn(40, 40, |i, j| C64::new((i * 7 + j) as f64 % 3.1, (i + 3 * j) as f64 % 1.7));
        let b = a.adjoint();
        let d = complex_matmul(&a, &b) - &a * &b;
        assert!(d.norm() < 1e-10 * (&a * &b).norm());
    }

    fn c(re: f64) -> C64 {
        C64::new(re, 0.0)
    }

    fn on(label: &str, m: DMatrix<C64>) -> OperatorMatrix {
        let n = m.nrows();
        OperatorMatrix::new(SpaceLayout::single(label, n).unwrap(), m).unwrap()
    }

    #[test]
    fn kron_unit_entry_position() {
        let a = on("a", unit_matrix(2, 0, 1));
        let b = on("b", unit_matrix(2, 1, 0));
        let k = kron(&a, &b).unwrap();
        for i in 0..4 {
            for j in 0..4 {
                let want = if (i, j) == (1, 2) { 1.0 } else { 0.0 };
                assert_eq!(k.data()[(i, j)], c(want));
            }
        }
    }

    #[test]
    fn kron_rejects_collision() {
        let a = OperatorMatrix::identity(SpaceLayout::single("a", 2).unwrap());
        assert!(matches!(kron(&a, &a), Err(Error::LabelCollision(_))));
    }

    #[test]
    fn embedded_swaps_do_not_commute() {
        let target = SpaceLayout::new([("a", 2), ("b", 2), ("c", 2)]).unwrap();
        let p_ab = embed(&permutation_op(2).relabel(&["a", "b"]).unwrap(), &target).unwrap();
        let p_bc = embed(&permutation_op(2).relabel(&["b", "c"]).unwrap(), &target).unwrap();
        let x = p_ab.matmul(&p_bc).unwrap();
        let y = p_bc.matmul(&p_ab).unwrap();
        assert!(rel_residual(x.data(), y.data()) > 0.5);
    }

    #[test]
    fn partial_trace_of_flip_is_identity() {
        let p = permutation_op(2);
        for label in ["1", "2"] {
            let t = partial_trace(&p, label).unwrap();
            assert_eq!(t.data(), &DMatrix::<C64>::identity(2, 2));
        }
    }

    #[test]
    fn flip_trace_counts_fixed_vectors() {
        assert_eq!(permutation_op(4).trace(), c(4.0));
        let p = permutation_op(3);
        assert_eq!(p.matmul(&p).unwrap().data(), &DMatrix::<C64>::identity(9, 9));
    }

    #[test]
    fn partial_transpose_twice_is_identity_map() {
        let l = SpaceLayout::new([("a", 2), ("b", 3)]).unwrap();
        let m = DMatrix::from_fn(6, 6, |i, j| C64::new(i as f64, j as f64 * 0.5));
        let op = OperatorMatrix::new(l, m.clone()).unwrap();
        let back = op.partial_transpose("a").unwrap().partial_transpose("a").unwrap();
        assert_eq!(back.data(), &m);
        let full = op.partial_transpose("a").unwrap().partial_transpose("b").unwrap();
        assert_eq!(full.data(), &m.transpose());
    }

    #[test]
    fn project_picks_component() {
        let l = SpaceLayout::new([("a", 2), ("b", 3)]).unwrap();
        let v = StateVector::new(l, DVector::from_fn(6, |i, _| c(i as f64))).unwrap();
        let p = v.project("a", 1).unwrap();
        assert_eq!(p.data().as_slice(), &[c(3.0), c(4.0), c(5.0)]);
        let q = v.project("b", 2).unwrap();
        assert_eq!(q.data().as_slice(), &[c(2.0), c(5.0)]);
    }

    #[test]
    fn layout_overflow_guarded() {
        let r = SpaceLayout::new([("a", usize::MAX / 2), ("b", 4)]);
        assert!(matches!(r, Err(Error::DimensionOverflow)));
    }
}
