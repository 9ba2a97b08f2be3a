//! Secular polynomial `det(E·I − H)` and the EPN condition system.

use std::fmt;

use num_complex::Complex64;

use crate::model::ComplexMatrix;
use crate::polyalg::{MultiPoly, COUPLING_NAMES};
use crate::{CouplingVector, Error, Result};

/// `det(E·I − H)` of the lattice Hamiltonian, monic in `E`, with coefficients
/// in the `⌊n/2⌋` couplings. `coeffs[k]` multiplies `E^k`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SecularPolynomial {
    pub n: usize,
    pub coeffs: Vec<MultiPoly>,
}

/// Polynomial in `E` over Gaussian integers: (real, imaginary) per power.
type GaussPoly = Vec<(MultiPoly, MultiPoly)>;

fn shift_e(p: &GaussPoly, nvars: usize) -> GaussPoly {
    let mut out = vec![(MultiPoly::zero(nvars), MultiPoly::zero(nvars))];
    out.extend(p.iter().cloned());
    out
}

pub fn secular_symbolic(n: usize) -> Result<SecularPolynomial> {
    if n < 2 {
        return Err(Error::InvalidDimension(n));
    }
    let m = n / 2;
    let zero = || MultiPoly::zero(m);
    // diagonal entry k of H is i * sign * x_j
    let diag = |k: usize| -> Option<(i64, usize)> {
        if k < m {
            Some((-1, k))
        } else if n % 2 == 1 && k == m {
            None
        } else {
            Some((1, n - 1 - k))
        }
    };
    let mut prev: GaussPoly = vec![(MultiPoly::one(m), zero())];
    let mut cur: GaussPoly = prev.clone();
    for k in 0..n {
        // (E - i s x) (R + i I) = E R + s x I + i (E I - s x R)
        let mut next = shift_e(&cur, m);
        if let Some((s, j)) = diag(k) {
            let sx = MultiPoly::var(m, j).scale(&s.into());
            for (p, (re, im)) in cur.iter().enumerate() {
                next[p].0 = &next[p].0 + &(&sx * im);
                next[p].1 = &next[p].1 - &(&sx * re);
            }
        }
        if k > 0 {
            for (p, (re, im)) in prev.iter().enumerate() {
                next[p].0 = &next[p].0 - re;
                next[p].1 = &next[p].1 - im;
            }
        }
        prev = cur;
        cur = next;
    }
    assert!(
        cur.iter().all(|(_, im)| im.is_zero()),
        "imaginary parts of the secular polynomial must cancel"
    );
    Ok(SecularPolynomial {
        n,
        coeffs: cur.into_iter().map(|(re, _)| re).collect(),
    })
}

impl SecularPolynomial {
    pub fn nvars(&self) -> usize {
        self.n / 2
    }

    /// Numeric coefficients at the given couplings, ascending in `E`.
    pub fn eval(&self, c: &CouplingVector) -> Vec<f64> {
        self.coeffs.iter().map(|p| p.eval_f64(c.values())).collect()
    }

    /// Text with descending powers of `E`, e.g. `E^2+(A^2-1)`.
    pub fn to_text(&self) -> String {
        let names = &COUPLING_NAMES[..self.nvars()];
        let mut out = String::new();
        for (k, p) in self.coeffs.iter().enumerate().rev() {
            if p.is_zero() {
                continue;
            }
            let e = match k {
                0 => String::new(),
                1 => "E".to_string(),
                _ => format!("E^{k}"),
            };
            if p.is_one() {
                if !out.is_empty() {
                    out.push('+');
                }
                out.push_str(if e.is_empty() { "1" } else { &e });
                continue;
            }
            if !out.is_empty() {
                out.push('+');
            }
            out.push('(');
            out.push_str(&p.to_text(names));
            out.push(')');
            if !e.is_empty() {
                out.push('*');
                out.push_str(&e);
            }
        }
        out
    }
}

impl fmt::Display for SecularPolynomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_text())
    }
}

/// Non-leading, not identically zero secular coefficients, by descending power of `E`.
pub fn ep_conditions(n: usize) -> Result<Vec<MultiPoly>> {
    let sec = secular_symbolic(n)?;
    Ok(sec.coeffs[..n]
        .iter()
        .rev()
        .filter(|p| !p.is_zero())
        .cloned()
        .collect())
}

/// Coefficients of `det(E·I − h)`, ascending in `E`.
///
/// Tridiagonal input uses the three-term recurrence; anything else falls
/// back to Faddeev–LeVerrier.
pub fn secular_numeric(h: &ComplexMatrix) -> Vec<Complex64> {
    let n = h.n();
    if h.is_tridiagonal() {
        let mut prev = vec![Complex64::new(1.0, 0.0)];
        let mut cur = prev.clone();
        for k in 0..n {
            let mut next = vec![Complex64::new(0.0, 0.0); k + 2];
            for (p, c) in cur.iter().enumerate() {
                next[p + 1] += c;
                next[p] -= h[(k, k)] * c;
            }
            if k > 0 {
                let off = h[(k, k - 1)] * h[(k - 1, k)];
                for (p, c) in prev.iter().enumerate() {
                    next[p] -= off * c;
                }
            }
            prev = cur;
            cur = next;
        }
        return cur;
    }
    faddeev_leverrier(h)
}

fn faddeev_leverrier(h: &ComplexMatrix) -> Vec<Complex64> {
    let n = h.n();
    let a = h.as_dmatrix();
    let mut coeffs = vec![Complex64::new(0.0, 0.0); n + 1];
    coeffs[n] = Complex64::new(1.0, 0.0);
    let mut m = nalgebra::DMatrix::<Complex64>::zeros(n, n);
    for k in 1..=n {
        m = a * &m;
        for i in 0..n {
            m[(i, i)] += coeffs[n - k + 1];
        }
        let am = a * &m;
        coeffs[n - k] = -am.trace() / k as f64;
    }
    coeffs
}
