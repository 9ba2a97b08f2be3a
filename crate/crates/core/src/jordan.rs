//! Jordan chains at `E = 0` and the transition matrix `Q` with `Q⁻¹ H Q = J`.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use serde::Serialize;

use crate::model::ComplexMatrix;
use crate::spectral::{clusters, dense_eigenvalues};
use crate::{Error, Result};

/// Singular values below this fraction of the largest count as zero.
pub const RANK_TOL: f64 = 1e-8;

/// Relative size of `H q_1` accepted as zero.
pub const CHAIN_TOL: f64 = 1e-6;

#[derive(Clone, Debug, Serialize)]
pub struct TransitionMatrix {
    pub q: ComplexMatrix,
    /// `‖H Q − Q J‖_F / ‖H‖_F`.
    pub similarity_residual: f64,
    /// 2-norm condition number of `Q`.
    pub condition_number: f64,
    pub order: usize,
}

/// Upper shift: ones on the first superdiagonal.
pub fn jordan_block(n: usize) -> ComplexMatrix {
    ComplexMatrix::from_fn(n, |i, j| {
        if j == i + 1 {
            Complex64::new(1.0, 0.0)
        } else {
            Complex64::new(0.0, 0.0)
        }
    })
}

fn singular_values(m: &DMatrix<Complex64>) -> DVector<f64> {
    m.clone().svd(false, false).singular_values
}

/// Residual of the chain relations against the canonical upper-shift block.
pub fn verify_similarity(h: &ComplexMatrix, q: &ComplexMatrix) -> Result<f64> {
    if q.n() != h.n() {
        return Err(Error::InvalidDimension(q.n()));
    }
    let sv = singular_values(q.as_dmatrix());
    let smax = sv.max();
    let smin = sv.min();
    if smax == 0.0 || smin <= f64::EPSILON * smax * q.n() as f64 {
        return Err(Error::SingularMatrix(smin));
    }
    let j = jordan_block(h.n());
    let lhs = h * q;
    let rhs = q * &j;
    Ok((&lhs - &rhs).frobenius_norm() / h.frobenius_norm().max(f64::MIN_POSITIVE))
}

/// Build `q_1, …, q_N` with `H q_1 = 0` and `H q_{k+1} = q_k`.
///
/// The top vector is `q_N = e_1` and the rest follow as `q_k = H q_{k+1}`, so
/// every link except `H q_1 = 0` holds by construction. For a tridiagonal
/// `H` with nonzero off-diagonals these Krylov vectors are linearly
/// independent, and the chain is a certificate exactly when `H^N e_1`
/// vanishes.
pub fn jordan_chain(h: &ComplexMatrix) -> Result<TransitionMatrix> {
    let n = h.n();
    let hm = h.as_dmatrix();
    let scale = hm.norm().max(f64::MIN_POSITIVE);
    let mut chain: Vec<DVector<Complex64>> = Vec::with_capacity(n + 1);
    let mut top = DVector::<Complex64>::zeros(n);
    top[0] = Complex64::new(1.0, 0.0);
    chain.push(top);
    for _ in 0..n {
        let next = hm * chain.last().unwrap();
        chain.push(next);
    }
    let tail = chain.pop().unwrap();
    if tail.norm() > CHAIN_TOL * scale * chain[n - 1].norm() {
        return Err(Error::ChainBreak {
            achieved: zero_block_size(hm, scale),
            expected: n,
        });
    }
    let mut q = DMatrix::<Complex64>::zeros(n, n);
    for (k, v) in chain.iter().rev().enumerate() {
        q.set_column(k, v);
    }
    let sv = singular_values(&q);
    let q = ComplexMatrix::from_dmatrix(q);
    // A reducible H can trap e_1 in an invariant subspace.
    let similarity_residual = match verify_similarity(h, &q) {
        Err(Error::SingularMatrix(_)) => {
            return Err(Error::ChainBreak {
                achieved: zero_block_size(hm, scale),
                expected: n,
            })
        }
        r => r?,
    };
    Ok(TransitionMatrix {
        condition_number: sv.max() / sv.min(),
        similarity_residual,
        order: n,
        q,
    })
}

/// Length of the longest Jordan chain at `E = 0`: the largest `k` with
/// `nullity(H^k) = k`.
fn zero_block_size(hm: &DMatrix<Complex64>, scale: f64) -> usize {
    let n = hm.nrows();
    let mut power = DMatrix::<Complex64>::identity(n, n);
    let mut achieved = 0;
    for k in 1..=n {
        power = &power * hm;
        let nullity = n - numerical_rank(&power, scale.powi(k as i32), CHAIN_TOL);
        if nullity < k {
            break;
        }
        achieved = k;
    }
    achieved
}

fn numerical_rank(m: &DMatrix<Complex64>, scale: f64, tol: f64) -> usize {
    singular_values(m).iter().filter(|&&s| s > tol * scale).count()
}

/// Size of the largest Jordan block at the eigenvalue nearest 0.
///
/// The matrix is shifted by the mean of the eigenvalue cluster nearest 0;
/// the order is the first `k` with `rank(M^k) = rank(M^(k+1))`, with ranks
/// measured relative to `‖M‖₂^k`.
pub fn ep_order(h: &ComplexMatrix, tol: f64) -> Result<usize> {
    if !(tol > 0.0 && tol.is_finite()) {
        return Err(Error::InvalidTolerance(tol));
    }
    let n = h.n();
    let ev = dense_eigenvalues(h.as_dmatrix())?;
    let nearest = (0..n).min_by(|&a, &b| ev[a].norm().total_cmp(&ev[b].norm())).unwrap();
    let group = clusters(&ev, tol)
        .into_iter()
        .find(|g| g.contains(&nearest))
        .unwrap_or_else(|| vec![nearest]);
    let shift = group.iter().map(|&i| ev[i]).sum::<Complex64>() / group.len() as f64;
    let m = h.as_dmatrix() - DMatrix::<Complex64>::identity(n, n) * shift;
    let norm2 = singular_values(&m).max().max(f64::MIN_POSITIVE);
    let mut power = DMatrix::<Complex64>::identity(n, n);
    let mut prev_rank = n;
    for k in 1..=n {
        power = &power * &m;
        let rank = numerical_rank(&power, norm2.powi(k as i32), tol);
        if rank == prev_rank {
            return Ok((k - 1).max(1));
        }
        prev_rank = rank;
    }
    Ok(n)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::build_hamiltonian;
    use crate::CouplingVector;

    fn h(n: usize, v: &[f64]) -> ComplexMatrix {
        build_hamiltonian(&CouplingVector::new(n, v.to_vec()).unwrap())
    }

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn two_site_chain_matches_printed_matrix() {
        let t = jordan_chain(&h(2, &[1.0])).unwrap();
        assert!(t.similarity_residual < 1e-15);
        let want = ComplexMatrix::from_rows(&[vec![c(0.0, -1.0), c(1.0, 0.0)], vec![c(-1.0, 0.0), c(0.0, 0.0)]]).unwrap();
        assert!(t.q.max_abs_diff(&want) < 1e-15);
        assert_eq!(ep_order(&h(2, &[1.0]), RANK_TOL).unwrap(), 2);
    }

    #[test]
    fn printed_three_site_transition_matrix() {
        let s = 2f64.sqrt();
        let q = ComplexMatrix::from_rows(&[
            vec![c(-1.0, 0.0), c(0.0, -s), c(1.0, 0.0)],
            vec![c(0.0, s), c(-1.0, 0.0), c(0.0, 0.0)],
            vec![c(1.0, 0.0), c(0.0, 0.0), c(0.0, 0.0)],
        ])
        .unwrap();
        assert!(verify_similarity(&h(3, &[s]), &q).unwrap() < 1e-12);
        assert!(verify_similarity(&h(3, &[1.0]), &q).unwrap() > 0.1);
        let t = jordan_chain(&h(3, &[s])).unwrap();
        assert!(t.similarity_residual < 1e-15);
        assert!(t.q.max_abs_diff(&q) < 1e-15);
        assert_eq!(ep_order(&h(3, &[s]), RANK_TOL).unwrap(), 3);
        assert_eq!(ep_order(&h(3, &[0.0]), RANK_TOL).unwrap(), 1);
    }

    #[test]
    fn chain_breaks_away_from_ep() {
        match jordan_chain(&h(3, &[1.0])) {
            Err(Error::ChainBreak { achieved, expected: 3 }) => assert_eq!(achieved, 1),
            other => panic!("expected chain break, got {other:?}"),
        }
        assert!(matches!(jordan_chain(&h(4, &[0.3, 0.1])), Err(Error::ChainBreak { achieved: 0, .. })));
        let ep2 = h(2, &[1.0]);
        let embedded = ComplexMatrix::from_fn(3, |i, j| if i < 2 && j < 2 { ep2[(i, j)] } else if i == 2 && j == 2 { c(1.0, 0.0) } else { c(0.0, 0.0) });
        assert!(matches!(jordan_chain(&embedded), Err(Error::ChainBreak { achieved: 2, expected: 3 })));
    }

    #[test]
    fn singular_q_rejected() {
        let z = ComplexMatrix::zeros(2);
        assert!(matches!(verify_similarity(&h(2, &[1.0]), &z), Err(Error::SingularMatrix(_))));
    }
}
