//! Residuals of the algebraic identities, each relative to the size of the
//! operands (max-entry norm unless stated otherwise).

use nalgebra::{DMatrix, DVector};

use crate::error::Result;
use crate::reflection::{k_minus, BoundarySpec, OpenChain};
use crate::tensor::{embed, kron, rel_residual, OperatorMatrix, SpaceLayout, C64};
use crate::yangian::{chain_t, quantum_determinant, r_matrix, reduced_r, ChainSpec};

fn on12(op: &OperatorMatrix) -> OperatorMatrix {
    op.relabel(&["1", "2"]).expect("two spaces")
}

/// R₁₂R₁₃R₂₃ − R₂₃R₁₃R₁₂ with arguments u₁−u₂, u₁−u₃, u₂−u₃.
pub fn yang_baxter(n: usize, hbar: C64, u1: C64, u2: C64, u3: C64) -> Result<f64> {
    let full = SpaceLayout::new([("1", n), ("2", n), ("3", n)])?;
    let r = |u: C64, a: &str, b: &str| embed(&r_matrix(u, n, hbar).relabel(&[a, b])?, &full);
    let (r12, r13, r23) = (r(u1 - u2, "1", "2")?, r(u1 - u3, "1", "3")?, r(u2 - u3, "2", "3")?);
    let lhs = r12.matmul(&r13)?.matmul(&r23)?;
    let rhs = r23.matmul(&r13)?.matmul(&r12)?;
    Ok(rel_residual(lhs.data(), rhs.data()))
}

/// R(u)R(−u) − (u−ħ)(−u−ħ)·I.
pub fn unitarity(n: usize, hbar: C64, u: C64) -> Result<f64> {
    let lhs = r_matrix(u, n, hbar).matmul(&r_matrix(-u, n, hbar))?;
    let rhs = DMatrix::<C64>::identity(n * n, n * n) * ((u - hbar) * (-u - hbar));
    Ok(rel_residual(lhs.data(), &rhs))
}

/// Rᵗ¹(u)Rᵗ¹(−u+nħ) − u(−u+nħ)·I.
pub fn crossing_unitarity(n: usize, hbar: C64, u: C64) -> Result<f64> {
    let v = -u + hbar * n as f64;
    let a = r_matrix(u, n, hbar).partial_transpose("1")?;
    let b = r_matrix(v, n, hbar).partial_transpose("1")?;
    let lhs = a.matmul(&b)?;
    let rhs = DMatrix::<C64>::identity(n * n, n * n) * (u * v);
    Ok(rel_residual(lhs.data(), &rhs))
}

/// [R(u), M⊗M] for an invertible M.
pub fn gl_invariance(n: usize, hbar: C64, u: C64, m: &DMatrix<C64>) -> Result<f64> {
    let mm = OperatorMatrix::new(SpaceLayout::new([("1", n), ("2", n)])?, m.kronecker(m))?;
    let r = r_matrix(u, n, hbar);
    Ok(rel_residual(r.matmul(&mm)?.data(), mm.matmul(&r)?.data()))
}

/// Embed an operator on [a, q…] into [x, y, q…] with `a` renamed to `aux`.
fn lift(op: &OperatorMatrix, aux: &str, full: &SpaceLayout) -> Result<OperatorMatrix> {
    let mut labels: Vec<String> = vec![aux.to_string()];
    labels.extend(op.layout().labels().skip(1).map(str::to_string));
    let refs: Vec<&str> = labels.iter().map(String::as_str).collect();
    embed(&op.relabel(&refs)?, full)
}

fn doubled_layout(n: usize, quantum: &SpaceLayout) -> Result<SpaceLayout> {
    SpaceLayout::new([("1", n), ("2", n)])?.concat(quantum)
}

/// R₁₂(u−v)T₁(u)T₂(v) − T₂(v)T₁(u)R₁₂(u−v).
pub fn rtt(chain: &ChainSpec, u: C64, v: C64) -> Result<f64> {
    let n = chain.n();
    let full = doubled_layout(n, &chain.quantum_layout())?;
    let r = embed(&r_matrix(u - v, n, chain.hbar()), &full)?;
    let t1 = lift(&chain_t(u, chain)?, "1", &full)?;
    let t2 = lift(&chain_t(v, chain)?, "2", &full)?;
    let lhs = r.matmul(&t1)?.matmul(&t2)?;
    let rhs = t2.matmul(&t1)?.matmul(&r)?;
    Ok(rel_residual(lhs.data(), rhs.data()))
}

/// The reflection equation R(u₁−u₂)X₁(u₁)R(u₁+u₂)X₂(u₂) = X₂R(u₁+u₂)X₁R(u₁−u₂)
/// for X given on [a, rest…].
fn reflection_generic(
    n: usize,
    hbar: C64,
    x1: &OperatorMatrix,
    x2: &OperatorMatrix,
    u1: C64,
    u2: C64,
    rank_k: usize,
) -> Result<(OperatorMatrix, OperatorMatrix)> {
    let rest = SpaceLayout::new(x1.layout().spaces()[1..].iter().cloned())?;
    let full = doubled_layout(n, &rest)?;
    let r = |u: C64| -> Result<OperatorMatrix> { embed(&on12(&reduced_r(u, rank_k, rank_k, n, hbar)?), &full) };
    let (rm, rp) = (r(u1 - u2)?, r(u1 + u2)?);
    let a = lift(x1, "1", &full)?;
    let b = lift(x2, "2", &full)?;
    let lhs = rm.matmul(&a)?.matmul(&rp)?.matmul(&b)?;
    let rhs = b.matmul(&rp)?.matmul(&a)?.matmul(&rm)?;
    Ok((lhs, rhs))
}

pub fn k_reflection(n: usize, hbar: C64, boundary: &BoundarySpec, u1: C64, u2: C64) -> Result<f64> {
    let (l, r) = reflection_generic(n, hbar, &k_minus(u1, n, boundary), &k_minus(u2, n, boundary), u1, u2, 1)?;
    Ok(rel_residual(l.data(), r.data()))
}

pub fn d_reflection(model: &OpenChain, u1: C64, u2: C64) -> Result<f64> {
    let (l, r) =
        reflection_generic(model.n(), model.hbar(), &model.double_row_d(u1)?, &model.double_row_d(u2)?, u1, u2, 1)?;
    Ok(rel_residual(l.data(), r.data()))
}

/// R(u₂−u₁)K⁺ᵗ₁(u₁)R(−u₁−u₂+nħ)K⁺ᵗ₂(u₂) − K⁺ᵗ₂(u₂)R(−u₁−u₂+nħ)K⁺ᵗ₁(u₁)R(u₂−u₁).
pub fn dual_reflection(model: &OpenChain, u1: C64, u2: C64) -> Result<f64> {
    let n = model.n();
    let h = model.hbar();
    let full = SpaceLayout::new([("1", n), ("2", n)])?;
    let kt = |u: C64, label: &str| -> Result<OperatorMatrix> {
        let k = model.k_plus(u);
        let t = OperatorMatrix::new(SpaceLayout::single(label, n)?, k.data().transpose())?;
        embed(&t, &full)
    };
    let (k1, k2) = (kt(u1, "1")?, kt(u2, "2")?);
    let ra = on12(&r_matrix(u2 - u1, n, h));
    let rb = on12(&r_matrix(-u1 - u2 + h * n as f64, n, h));
    let lhs = ra.matmul(&k1)?.matmul(&rb)?.matmul(&k2)?;
    let rhs = k2.matmul(&rb)?.matmul(&k1)?.matmul(&ra)?;
    Ok(rel_residual(lhs.data(), rhs.data()))
}

/// ‖[d(u),d(v)]‖_F / (‖d(u)‖_F‖d(v)‖_F).
pub fn transfer_commutator(model: &OpenChain, u: C64, v: C64) -> Result<f64> {
    let du = model.transfer_matrix(u)?;
    let dv = model.transfer_matrix(v)?;
    let c = du.commutator(&dv)?;
    Ok(c.data().norm() / (du.data().norm() * dv.data().norm()).max(f64::MIN_POSITIVE))
}

/// max over entries t_ij(v) of [qdet(u), t_ij(v)], relative.
pub fn qdet_centrality(chain: &ChainSpec, u: C64, v: C64) -> Result<f64> {
    let q = quantum_determinant(u, chain)?;
    let t = chain_t(v, chain)?;
    let n = chain.n();
    let mut worst: f64 = 0.0;
    for i in 0..n {
        for j in 0..n {
            let b = t.aux_block(i, j)?;
            worst = worst.max(rel_residual(q.matmul(&b)?.data(), b.matmul(&q)?.data()));
        }
    }
    Ok(worst)
}

/// Largest |t_ij(u)Ω| for i > j relative to max|T(u)|, and the largest relative
/// deviation of t_ii(u)Ω/Ω from λ_i(u).
pub fn monodromy_vacuum(chain: &ChainSpec, u: C64) -> Result<(f64, f64)> {
    let t = chain_t(u, chain)?;
    let scale = t.max_abs();
    let omega = chain.vacuum_index();
    let n = chain.n();
    let mut annihilation: f64 = 0.0;
    let mut weight: f64 = 0.0;
    for i in 0..n {
        for j in 0..i {
            annihilation = annihilation.max(t.aux_block(i, j)?.data().column(omega).norm() / scale);
        }
        let got = t.aux_block(i, i)?.data()[(omega, omega)];
        let want = chain.lambda(i, u);
        weight = weight.max((got - want).norm() / want.norm().max(1e-300));
    }
    Ok((annihilation, weight))
}

/// t′_ii(u)Ω/Ω from numerical inversion against the closed λ′ formula.
pub fn inverse_vacuum(chain: &ChainSpec, u: C64, lambda_prime_sign: f64) -> Result<f64> {
    let inv = crate::yangian::chain_t_inverse(u, chain)?;
    let t = chain_t(u, chain)?;
    let prod = t.matmul(&inv)?;
    let identity = DMatrix::<C64>::identity(prod.dim(), prod.dim());
    let mut worst = rel_residual(prod.data(), &identity);
    let omega = chain.vacuum_index();
    for i in 0..chain.n() {
        let got = inv.aux_block(i, i)?.data()[(omega, omega)];
        let want = chain.lambda_prime_with(i, u, lambda_prime_sign);
        worst = worst.max((got - want).norm() / got.norm().max(1e-300));
    }
    Ok(worst)
}

fn vacuum_columns(op: &OperatorMatrix, h: usize, omega: usize) -> DMatrix<C64> {
    let blocks = op.dim() / h;
    DMatrix::from_fn(op.dim(), blocks, |r, c| op.data()[(r, c * h + omega)])
}

/// Reduced reflection equation for D̂⁽ᵏ⁾ with R⁽ᵏ⁾, both sides applied to Ω.
pub fn reduced_reflection_on_vacuum(model: &OpenChain, k: usize, u1: C64, u2: C64) -> Result<f64> {
    let (l, r) = reflection_generic(model.n(), model.hbar(), &model.reduced_d(k, u1)?, &model.reduced_d(k, u2)?, u1, u2, k)?;
    let h = model.chain.quantum_dim();
    let omega = model.chain.vacuum_index();
    Ok(rel_residual(&vacuum_columns(&l, h, omega), &vacuum_columns(&r, h, omega)))
}

/// d⁽ᵏ⁾_kk(u)Ω/Ω against 𝒦_k(w)λ_k(w)λ′_k(−w), w = u + (k−1)ħ/2.
pub fn reduced_vacuum_weight(model: &OpenChain, k: usize, u: C64) -> Result<f64> {
    let d = model.reduced_d(k, u)?;
    let omega = model.chain.vacuum_index();
    let got = d.aux_block(k - 1, k - 1)?.data()[(omega, omega)];
    let w = u + model.hbar() * ((k as f64 - 1.0) / 2.0);
    let want = model.closed_weights().vacuum_weight(k - 1, w);
    Ok((got - want).norm() / want.norm().max(got.norm()).max(1e-300))
}

/// d⁽ᵏ⁺¹⁾_{i+1,j+1}(u) against τ applied to the expansion of d⁽ᵏ⁾_ij(u) in
/// the d_ab, where τ(d_ab(w)) = d_{a+1,b+1}(w+ħ/2) + δ_ab (ħ/2w) d_11(w+ħ/2).
/// Both sides act on the given vectors; 1-based k with k+1 ≤ n.
pub fn tau_consistency(model: &OpenChain, k: usize, u: C64, vectors: &[DVector<C64>]) -> Result<f64> {
    let n = model.n();
    let h = model.hbar();
    let w = u + h * ((k as f64 - 1.0) / 2.0);
    let big_d = model.double_row_d(w + h * 0.5)?;
    let blk = |a: usize, b: usize| big_d.aux_block(a, b);
    // τ(d_ab(w)), 0-based a, b in the rank-(n−1) algebra
    let tau = |a: usize, b: usize| -> Result<OperatorMatrix> {
        let mut x = blk(a + 1, b + 1)?;
        if a == b {
            x = x.add(&blk(0, 0)?.scale(h / (w * 2.0))?)?;
        }
        Ok(x)
    };
    let direct = model.reduced_d(k + 1, u)?;
    let mut worst: f64 = 0.0;
    for i in k - 1..n - 1 {
        for j in k - 1..n - 1 {
            let mut image = tau(i, j)?;
            if i == j {
                for a in 0..k - 1 {
                    image = image.add(&tau(a, a)?.scale(h / (u * 2.0))?)?;
                }
            }
            let want = direct.aux_block(i + 1, j + 1)?;
            for v in vectors {
                let a = DMatrix::from_column_slice(v.len(), 1, image.apply(v)?.as_slice());
                let b = DMatrix::from_column_slice(v.len(), 1, want.apply(v)?.as_slice());
                worst = worst.max(rel_residual(&a, &b));
            }
        }
    }
    Ok(worst)
}

/// Ω and the vectors d_ij(v)Ω (i < j) at a spectral point v.
pub fn vacuum_generated(model: &OpenChain, v: C64) -> Result<Vec<DVector<C64>>> {
    let h = model.chain.quantum_dim();
    let mut omega = DVector::zeros(h);
    omega[model.chain.vacuum_index()] = C64::new(1.0, 0.0);
    let d = model.double_row_d(v)?;
    let mut out = vec![omega.clone()];
    for i in 0..model.n() {
        for j in i + 1..model.n() {
            let x = d.aux_block(i, j)?.apply(&omega)?;
            if x.norm() > 1e-12 {
                out.push(x);
            }
        }
    }
    Ok(out)
}

/// K⁻ on the chain is D(u) itself when every site is one-dimensional; the
/// ratio D(u)/K⁻(u) is then a scalar. Returns the deviation from scalar.
pub fn trivial_chain_d(model: &OpenChain, u: C64) -> Result<f64> {
    let d = model.double_row_d(u)?;
    let k = kron(&k_minus(u, model.n(), &model.boundary), &OperatorMatrix::identity(model.chain.quantum_layout()))?;
    let ratio = d.data()[(0, 0)] / k.data()[(0, 0)];
    Ok(rel_residual(d.data(), &(k.data() * ratio)))
}
