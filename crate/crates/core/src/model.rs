//! Lattice Hamiltonians `H = Δ + V(A, B, …)`.
//!
//! `Δ` is the shifted Dirichlet Laplacian on `n` sites (zero diagonal, `-1`
//! on both off-diagonals). `V` is diagonal and purely imaginary: the outermost
//! coupling `A` sits at `(0, 0)` as `-iA` and at `(n-1, n-1)` as `+iA`, the next
//! one `B` at `(1, 1)` / `(n-2, n-2)`, and so on inward. For odd `n` the central
//! site carries no potential.

use std::ops::{Add, Index, Mul, Sub};

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::{Error, Result};

/// Absolute tolerance for the structural symmetry checks. Entries are O(1).
pub const SYMMETRY_TOL: f64 = 1e-12;

/// The `⌊n/2⌋` real couplings of an `n`-site potential, outermost first.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CouplingVector {
    n: usize,
    values: Vec<f64>,
}

impl CouplingVector {
    pub fn new(n: usize, values: Vec<f64>) -> Result<Self> {
        if n < 2 {
            return Err(Error::InvalidDimension(n));
        }
        if values.len() != n / 2 {
            return Err(Error::InvalidCouplings(format!(
                "n = {n} needs {} couplings, got {}",
                n / 2,
                values.len()
            )));
        }
        if let Some(bad) = values.iter().find(|v| !v.is_finite()) {
            return Err(Error::InvalidCouplings(format!("non-finite entry {bad}")));
        }
        Ok(Self { n, values })
    }

    /// All couplings zero: the Hermitian Laplacian.
    pub fn zeros(n: usize) -> Result<Self> {
        Self::new(n, vec![0.0; n / 2])
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// Joint sign flip `(A, B, …) -> (-A, -B, …)`.
    pub fn negated(&self) -> Self {
        Self {
            n: self.n,
            values: self.values.iter().map(|v| -v).collect(),
        }
    }
}

impl<'de> Deserialize<'de> for CouplingVector {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        struct Raw {
            n: usize,
            values: Vec<f64>,
        }
        let raw = Raw::deserialize(d)?;
        CouplingVector::new(raw.n, raw.values).map_err(serde::de::Error::custom)
    }
}

/// Dense square complex matrix.
///
/// Serializes as `{"n": n, "entries": [[re, im], …]}` in row-major order.
#[derive(Debug, Clone, PartialEq)]
pub struct ComplexMatrix(DMatrix<Complex64>);

impl ComplexMatrix {
    pub fn zeros(n: usize) -> Self {
        Self(DMatrix::zeros(n, n))
    }

    pub fn identity(n: usize) -> Self {
        Self(DMatrix::identity(n, n))
    }

    pub fn from_fn(n: usize, f: impl FnMut(usize, usize) -> Complex64) -> Self {
        Self(DMatrix::from_fn(n, n, f))
    }

    /// Build from row-major entries; fails unless square and finite.
    pub fn from_rows(rows: &[Vec<Complex64>]) -> Result<Self> {
        let n = rows.len();
        if rows.iter().any(|r| r.len() != n) {
            return Err(Error::InvalidCouplings("matrix rows are not square".into()));
        }
        if rows.iter().flatten().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::InvalidCouplings("non-finite matrix entry".into()));
        }
        Ok(Self::from_fn(n, |i, j| rows[i][j]))
    }

    pub fn from_dmatrix(m: DMatrix<Complex64>) -> Self {
        assert!(m.is_square(), "ComplexMatrix must be square");
        Self(m)
    }

    pub fn n(&self) -> usize {
        self.0.nrows()
    }

    pub fn as_dmatrix(&self) -> &DMatrix<Complex64> {
        &self.0
    }

    pub fn into_dmatrix(self) -> DMatrix<Complex64> {
        self.0
    }

    pub fn set(&mut self, i: usize, j: usize, z: Complex64) {
        self.0[(i, j)] = z;
    }

    pub fn adjoint(&self) -> Self {
        Self(self.0.adjoint())
    }

    pub fn transpose(&self) -> Self {
        Self(self.0.transpose())
    }

    pub fn conj(&self) -> Self {
        Self(self.0.map(|z| z.conj()))
    }

    pub fn scale(&self, s: f64) -> Self {
        Self(self.0.map(|z| z * s))
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.0.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        self.0
            .iter()
            .zip(other.0.iter())
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }

    pub fn trace(&self) -> Complex64 {
        self.0.trace()
    }

    /// `k`-th power by repeated multiplication (`k = 0` gives the identity).
    pub fn pow(&self, k: u32) -> Self {
        let mut out = DMatrix::identity(self.n(), self.n());
        for _ in 0..k {
            out = &out * &self.0;
        }
        Self(out)
    }

    /// Is `M == M†` within `tol` per entry?
    pub fn is_hermitian(&self, tol: f64) -> bool {
        self.max_abs_diff(&self.adjoint()) <= tol
    }

    /// Exact zeros outside the three central diagonals.
    pub fn is_tridiagonal(&self) -> bool {
        let n = self.n();
        (0..n).all(|i| (0..n).all(|j| i.abs_diff(j) <= 1 || self.0[(i, j)] == Complex64::new(0.0, 0.0)))
    }

    pub fn rows(&self) -> Vec<Vec<Complex64>> {
        (0..self.n())
            .map(|i| (0..self.n()).map(|j| self.0[(i, j)]).collect())
            .collect()
    }
}

impl Index<(usize, usize)> for ComplexMatrix {
    type Output = Complex64;

    fn index(&self, idx: (usize, usize)) -> &Complex64 {
        &self.0[idx]
    }
}

impl Add for &ComplexMatrix {
    type Output = ComplexMatrix;

    fn add(self, rhs: Self) -> ComplexMatrix {
        ComplexMatrix(&self.0 + &rhs.0)
    }
}

impl Sub for &ComplexMatrix {
    type Output = ComplexMatrix;

    fn sub(self, rhs: Self) -> ComplexMatrix {
        ComplexMatrix(&self.0 - &rhs.0)
    }
}

impl Mul for &ComplexMatrix {
    type Output = ComplexMatrix;

    fn mul(self, rhs: Self) -> ComplexMatrix {
        ComplexMatrix(&self.0 * &rhs.0)
    }
}

#[derive(Serialize, Deserialize)]
struct MatrixWire {
    n: usize,
    entries: Vec<[f64; 2]>,
}

impl Serialize for ComplexMatrix {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let n = self.n();
        let entries = (0..n)
            .flat_map(|i| (0..n).map(move |j| (i, j)))
            .map(|(i, j)| [self.0[(i, j)].re, self.0[(i, j)].im])
            .collect();
        MatrixWire { n, entries }.serialize(s)
    }
}

impl<'de> Deserialize<'de> for ComplexMatrix {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let wire = MatrixWire::deserialize(d)?;
        if wire.entries.len() != wire.n * wire.n {
            return Err(serde::de::Error::custom(format!(
                "expected {} entries for n = {}, got {}",
                wire.n * wire.n,
                wire.n,
                wire.entries.len()
            )));
        }
        if wire.entries.iter().flatten().any(|x| !x.is_finite()) {
            return Err(serde::de::Error::custom("non-finite matrix entry"));
        }
        let n = wire.n;
        Ok(Self::from_fn(n, |i, j| {
            let [re, im] = wire.entries[i * n + j];
            Complex64::new(re, im)
        }))
    }
}

pub fn build_laplacian(n: usize) -> Result<ComplexMatrix> {
    if n < 2 {
        return Err(Error::InvalidDimension(n));
    }
    Ok(ComplexMatrix::from_fn(n, |i, j| {
        if i.abs_diff(j) == 1 {
            Complex64::new(-1.0, 0.0)
        } else {
            Complex64::new(0.0, 0.0)
        }
    }))
}

/// Diagonal of the potential: `-i c_k` on the first half, mirrored `+i c_k`.
pub fn potential_diagonal(c: &CouplingVector) -> Vec<Complex64> {
    let n = c.n();
    let mut diag = vec![Complex64::new(0.0, 0.0); n];
    for (k, &v) in c.values().iter().enumerate() {
        diag[k] = Complex64::new(0.0, -v);
        diag[n - 1 - k] = Complex64::new(0.0, v);
    }
    diag
}

pub fn build_potential(c: &CouplingVector) -> ComplexMatrix {
    let diag = potential_diagonal(c);
    ComplexMatrix::from_fn(c.n(), |i, j| {
        if i == j {
            diag[i]
        } else {
            Complex64::new(0.0, 0.0)
        }
    })
}

pub fn build_hamiltonian(c: &CouplingVector) -> ComplexMatrix {
    let lap = build_laplacian(c.n()).expect("CouplingVector guarantees n >= 2");
    &lap + &build_potential(c)
}

/// Site-reversal permutation `P` (ones on the anti-diagonal).
pub fn parity(n: usize) -> ComplexMatrix {
    ComplexMatrix::from_fn(n, |i, j| {
        if i + j + 1 == n {
            Complex64::new(1.0, 0.0)
        } else {
            Complex64::new(0.0, 0.0)
        }
    })
}

/// `P conj(H) P == H` entrywise within [`SYMMETRY_TOL`].
pub fn check_pt_symmetry(h: &ComplexMatrix) -> bool {
    let n = h.n();
    (0..n).all(|i| (0..n).all(|j| (h[(n - 1 - i, n - 1 - j)].conj() - h[(i, j)]).norm() <= SYMMETRY_TOL))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn laplacian_small() {
        let l2 = build_laplacian(2).unwrap();
        assert_eq!(l2.rows(), vec![vec![c(0., 0.), c(-1., 0.)], vec![c(-1., 0.), c(0., 0.)]]);
        let l3 = build_laplacian(3).unwrap();
        assert_eq!(l3[(0, 2)], c(0., 0.));
        assert_eq!(l3[(1, 2)], c(-1., 0.));
        assert!(matches!(build_laplacian(1), Err(Error::InvalidDimension(1))));
    }

    #[test]
    fn laplacian_five_spectrum() {
        // Closed form -2 cos(k pi / 6) against a brute-force charpoly sign scan.
        let l5 = build_laplacian(5).unwrap();
        let charpoly = |e: f64| {
            let m = l5.as_dmatrix().map(|z| z.re) - nalgebra::DMatrix::identity(5, 5) * e;
            m.determinant()
        };
        let mut roots = Vec::new();
        let steps = 40_000;
        let mut prev = charpoly(-2.5);
        for s in 1..=steps {
            let x = -2.5 + 5.0 * s as f64 / steps as f64;
            let cur = charpoly(x);
            if prev == 0.0 || prev.signum() != cur.signum() {
                roots.push(x);
            }
            prev = cur;
        }
        let expected = [-(3f64.sqrt()), -1.0, 0.0, 1.0, 3f64.sqrt()];
        assert_eq!(roots.len(), 5);
        for (r, e) in roots.iter().zip(expected) {
            assert!((r - e).abs() < 2e-4, "{r} vs {e}");
            let k = (1..=5).map(|k| -2.0 * (k as f64 * std::f64::consts::PI / 6.0).cos());
            assert!(k.clone().any(|v| (v - e).abs() < 1e-12));
        }
    }

    #[test]
    fn potential_patterns() {
        let v3 = build_potential(&CouplingVector::new(3, vec![2f64.sqrt()]).unwrap());
        assert_eq!(v3[(0, 0)], c(0., -(2f64.sqrt())));
        assert_eq!(v3[(1, 1)], c(0., 0.));
        assert_eq!(v3[(2, 2)], c(0., 2f64.sqrt()));
        let v0 = build_potential(&CouplingVector::zeros(4).unwrap());
        assert_eq!(v0, ComplexMatrix::zeros(4));
        let v4 = build_potential(&CouplingVector::new(4, vec![1.0, 2.0]).unwrap());
        let diag: Vec<_> = (0..4).map(|k| v4[(k, k)]).collect();
        assert_eq!(diag, vec![c(0., -1.), c(0., -2.), c(0., 2.), c(0., 1.)]);
    }

    #[test]
    fn hamiltonian_two_and_four() {
        let h2 = build_hamiltonian(&CouplingVector::new(2, vec![0.7]).unwrap());
        assert_eq!(h2.rows(), vec![vec![c(0., -0.7), c(-1., 0.)], vec![c(-1., 0.), c(0., 0.7)]]);
        let (a, b) = (1.3, -0.4);
        let h4 = build_hamiltonian(&CouplingVector::new(4, vec![a, b]).unwrap());
        let expected = [
            [c(0., -a), c(-1., 0.), c(0., 0.), c(0., 0.)],
            [c(-1., 0.), c(0., -b), c(-1., 0.), c(0., 0.)],
            [c(0., 0.), c(-1., 0.), c(0., b), c(-1., 0.)],
            [c(0., 0.), c(0., 0.), c(-1., 0.), c(0., a)],
        ];
        for (i, row) in expected.iter().enumerate() {
            for (j, z) in row.iter().enumerate() {
                assert_eq!(h4[(i, j)], *z);
            }
        }
        let h5 = build_hamiltonian(&CouplingVector::new(5, vec![a, b]).unwrap());
        assert_eq!(h5[(2, 2)], c(0., 0.));
        assert_eq!(h5[(3, 3)], c(0., b));
        assert_eq!(h5[(4, 3)], c(-1., 0.));
    }

    #[test]
    fn pt_symmetry_detects_violation() {
        assert!(check_pt_symmetry(&build_hamiltonian(
            &CouplingVector::new(3, vec![2f64.sqrt()]).unwrap()
        )));
        let mut h = build_hamiltonian(&CouplingVector::new(2, vec![1.0]).unwrap());
        h.set(0, 1, c(1., 0.));
        assert!(!check_pt_symmetry(&h));
        let real = ComplexMatrix::from_rows(&[
            vec![c(0.5, 0.), c(2., 0.), c(0., 0.)],
            vec![c(2., 0.), c(-1., 0.), c(3., 0.)],
            vec![c(0., 0.), c(3., 0.), c(0.5, 0.)],
        ])
        .unwrap();
        // Real, symmetric diagonal, but the off-diagonals are not mirrored.
        assert!(!check_pt_symmetry(&real));
        let mirrored = ComplexMatrix::from_rows(&[
            vec![c(0.5, 0.), c(2., 0.), c(0., 0.)],
            vec![c(2., 0.), c(-1., 0.), c(2., 0.)],
            vec![c(0., 0.), c(2., 0.), c(0.5, 0.)],
        ])
        .unwrap();
        assert!(check_pt_symmetry(&mirrored));
    }

    #[test]
    fn coupling_validation() {
        assert!(CouplingVector::new(4, vec![1.0]).is_err());
        assert!(CouplingVector::new(3, vec![f64::NAN]).is_err());
        assert!(CouplingVector::new(1, vec![]).is_err());
        let json = r#"{"n":4,"values":[1.0]}"#;
        assert!(serde_json::from_str::<CouplingVector>(json).is_err());
    }

    #[test]
    fn matrix_json_layout() {
        let h = build_hamiltonian(&CouplingVector::new(2, vec![0.5]).unwrap());
        let json = serde_json::to_string(&h).unwrap();
        assert_eq!(json, r#"{"n":2,"entries":[[0.0,-0.5],[-1.0,0.0],[-1.0,0.0],[0.0,0.5]]}"#);
        let back: ComplexMatrix = serde_json::from_str(&json).unwrap();
        assert_eq!(back, h);
        assert!(serde_json::from_str::<ComplexMatrix>(r#"{"n":2,"entries":[[0.0,0.0]]}"#).is_err());
    }

    fn couplings() -> impl Strategy<Value = CouplingVector> {
        (2usize..=12).prop_flat_map(|n| {
            prop::collection::vec(-3.0f64..3.0, n / 2).prop_map(move |v| CouplingVector::new(n, v).unwrap())
        })
    }

    proptest! {
        #[test]
        fn built_hamiltonians_are_structured(c in couplings()) {
            let h = build_hamiltonian(&c);
            let sum = &build_laplacian(c.n()).unwrap() + &build_potential(&c);
            prop_assert_eq!(&h, &sum);
            prop_assert!(check_pt_symmetry(&h));
            prop_assert!(h.trace().norm() <= 1e-12);
            prop_assert_eq!(&h.transpose(), &h);
            let v = build_potential(&c);
            prop_assert!(v.max_abs_diff(&v.adjoint().scale(-1.0)) == 0.0);
            prop_assert!((0..c.n()).all(|k| v[(k, k)].re == 0.0));
        }
    }
}
