//! Physical metrics `Θ` with `H† Θ = Θ H`.

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::Serialize;

use crate::model::{build_hamiltonian, ComplexMatrix};
use crate::spectral::{dense_eigenvalues, eigensystem, sort_eigenvalues, Classification, Tolerances};
use crate::{CouplingVector, Error, Result};

/// Hermiticity tolerance, relative to the matrix scale.
pub const HERMITIAN_TOL: f64 = 1e-12;
/// Smallest admissible last component of a left eigenvector.
pub const NORMALIZATION_TOL: f64 = 1e-12;

#[derive(Clone, Debug, Serialize)]
pub struct MetricMatrix {
    pub theta: ComplexMatrix,
    /// Ascending.
    pub eigenvalues: Vec<f64>,
    pub positive_definite: bool,
    pub quasi_hermiticity_residual: f64,
}

impl MetricMatrix {
    fn new(theta: ComplexMatrix, h: &ComplexMatrix) -> Result<Self> {
        let eigenvalues = hermitian_eigenvalues(&theta)?;
        Ok(Self {
            positive_definite: eigenvalues[0] > 0.0,
            quasi_hermiticity_residual: quasi_hermiticity_residual(h, &theta),
            eigenvalues,
            theta,
        })
    }
}

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

/// Ascending eigenvalues of a Hermitian matrix.
pub fn hermitian_eigenvalues(theta: &ComplexMatrix) -> Result<Vec<f64>> {
    let scale = theta.frobenius_norm().max(1.0);
    let asym = theta.max_abs_diff(&theta.adjoint());
    if asym > HERMITIAN_TOL * scale {
        return Err(Error::NotHermitian(asym));
    }
    let m = theta.as_dmatrix();
    let sym = (m + m.adjoint()) * c(0.5, 0.0);
    let mut ev: Vec<f64> = sym.symmetric_eigenvalues().iter().copied().collect();
    ev.sort_by(f64::total_cmp);
    Ok(ev)
}

/// Definiteness verdict and the smallest eigenvalue.
pub fn positivity_check(theta: &ComplexMatrix) -> Result<(bool, f64)> {
    let ev = hermitian_eigenvalues(theta)?;
    Ok((ev[0] > 0.0, ev[0]))
}

/// `‖H† Θ − Θ H‖_F / ‖Θ‖_F`.
pub fn quasi_hermiticity_residual(h: &ComplexMatrix, theta: &ComplexMatrix) -> f64 {
    let lhs = &h.adjoint() * theta;
    let rhs = theta * h;
    (&lhs - &rhs).frobenius_norm() / theta.frobenius_norm().max(f64::MIN_POSITIVE)
}

/// `Θ = Σ ψ ψ†` over the eigenvectors `ψ` of `H†`, each scaled to last
/// component 1.
pub fn metric_from_left_eigenvectors(h: &ComplexMatrix) -> Result<MetricMatrix> {
    metric_from_left_eigenvectors_with(h, &Tolerances::default())
}

pub fn metric_from_left_eigenvectors_with(h: &ComplexMatrix, tol: &Tolerances) -> Result<MetricMatrix> {
    let es = match eigensystem(h, tol) {
        Ok(es) => es,
        Err(Error::DegenerateSpectrum { min_gap }) => {
            return Err(Error::MetricUndefined(format!(
                "degenerate spectrum (min gap {min_gap:.3e})"
            )))
        }
        Err(e) => return Err(e),
    };
    if es.spectrum.classification != Classification::RealNondegenerate {
        return Err(Error::MetricUndefined(format!(
            "spectrum is {}",
            es.spectrum.classification.as_str()
        )));
    }
    let n = h.n();
    let left = es.left_vectors.as_dmatrix();
    let mut theta = DMatrix::<Complex64>::zeros(n, n);
    for k in 0..n {
        let w = left.column(k);
        let last = w[n - 1];
        if last.norm() < NORMALIZATION_TOL * w.norm() {
            return Err(Error::NormalizationFailure {
                index: k,
                value: last.norm(),
            });
        }
        let psi = w / last;
        theta += &psi * psi.adjoint();
    }
    let theta = (&theta + theta.adjoint()) * c(0.5, 0.0);
    MetricMatrix::new(ComplexMatrix::from_dmatrix(theta), h)
}

/// Two-site family `[[1, ξ − iA], [ξ + iA, 1]]`.
pub fn metric_family_n2(a: f64, xi: f64) -> Result<MetricMatrix> {
    let theta = ComplexMatrix::from_rows(&[vec![c(1.0, 0.0), c(xi, -a)], vec![c(xi, a), c(1.0, 0.0)]])?;
    MetricMatrix::new(theta, &build_hamiltonian(&CouplingVector::new(2, vec![a])?))
}

/// Three-site two-parameter family.
pub fn metric_family_n3(a: f64, xi: f64, eta: f64) -> Result<MetricMatrix> {
    let theta = ComplexMatrix::from_rows(&[
        vec![c(1.0, 0.0), c(eta, -a), c(xi, -a * eta)],
        vec![c(eta, a), c(xi + 1.0 + a * a, 0.0), c(eta, -a)],
        vec![c(xi, a * eta), c(eta, a), c(1.0, 0.0)],
    ])?;
    MetricMatrix::new(theta, &build_hamiltonian(&CouplingVector::new(3, vec![a])?))
}

/// Eigenvalues `(θ₋, θ₀, θ₊)` of the three-site family at `ξ = η = 0`.
pub fn family_n3_eigenvalues(a: f64) -> (f64, f64, f64) {
    let a2 = a * a;
    let r = (8.0 * a2 + a2 * a2).sqrt();
    (1.0 + 0.5 * (a2 - r), 1.0, 1.0 + 0.5 * (a2 + r))
}

/// `t` with the three-site coupling `A = √(2 − 2t²)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct TimeParameter {
    pub t: f64,
}

impl TimeParameter {
    pub fn new(t: f64) -> Result<Self> {
        if !t.is_finite() {
            return Err(Error::InvalidCouplings(format!("t must be finite, got {t}")));
        }
        Ok(Self { t })
    }

    /// Real coupling, defined for `|t| ≤ 1`.
    pub fn coupling(&self) -> Result<f64> {
        let a2 = 2.0 - 2.0 * self.t * self.t;
        if a2 < 0.0 {
            return Err(Error::InvalidCouplings(format!(
                "t = {} gives an imaginary coupling (A^2 = {a2})",
                self.t
            )));
        }
        Ok(a2.sqrt())
    }

    pub fn hamiltonian(&self) -> Result<ComplexMatrix> {
        Ok(build_hamiltonian(&CouplingVector::new(3, vec![self.coupling()?])?))
    }
}

/// `t⁴ − 36 t² + 36`.
pub fn discriminant(t: f64) -> f64 {
    let t2 = t * t;
    t2 * t2 - 36.0 * t2 + 36.0
}

/// Closed-form metric eigenvalues `(θ₁, θ₂, θ₃)` of the last-component
/// normalized three-site metric.
pub fn metric_eigs_n3_closed_form(t: TimeParameter) -> Result<(f64, f64, f64)> {
    let d = discriminant(t.t);
    if d < 0.0 {
        return Err(Error::BranchError { t: t.t, discriminant: d });
    }
    let t2 = t.t * t.t;
    let r = d.sqrt();
    Ok((-3.0 * t2 + 6.0 - r, 4.0 * t2, -3.0 * t2 + 6.0 + r))
}

/// Smallest positive root of the discriminant, `√(18 − √288)`.
pub fn t_max() -> f64 {
    (18.0 - 288f64.sqrt()).sqrt()
}

/// Entries of the three-site sample metric as analytic functions of `t`.
///
/// For `|t| ≤ 1` this is exactly the eigenvector construction at
/// `A = √(2 − 2t²)`. Beyond `|t| = 1` the factor `i√(1 − t²)` is continued
/// to `−√(t² − 1)`; the continued matrix is real but no longer symmetric,
/// and its eigenvalues are the analytic continuation of the closed forms.
pub fn metric_s_n3(t: f64) -> ComplexMatrix {
    let t2 = t * t;
    let is = if t2 <= 1.0 { c(0.0, (1.0 - t2).sqrt()) } else { c(-(t2 - 1.0).sqrt(), 0.0) };
    let k = 3.0 * 2f64.sqrt();
    ComplexMatrix::from_fn(3, |i, j| match (i, j) {
        (0, 0) | (2, 2) => c(3.0, 0.0),
        (1, 1) => c(6.0 - 2.0 * t2, 0.0),
        (0, 2) | (2, 0) => c(4.0 * t2 - 3.0, 0.0),
        (0, 1) | (1, 2) => -is * k,
        _ => is * k,
    })
}

/// Eigenvalues of [`metric_s_n3`] by a general dense solve, sorted.
pub fn metric_s_n3_eigenvalues(t: f64) -> Result<Vec<Complex64>> {
    let mut ev = dense_eigenvalues(metric_s_n3(t).as_dmatrix())?;
    sort_eigenvalues(&mut ev);
    Ok(ev)
}

/// The singular `t → 0⁺` limit of the sample metric.
pub fn metric_s_n3_ep_limit() -> ComplexMatrix {
    let s = 3.0 * 2f64.sqrt();
    ComplexMatrix::from_rows(&[
        vec![c(3.0, 0.0), c(0.0, -s), c(-3.0, 0.0)],
        vec![c(0.0, s), c(6.0, 0.0), c(0.0, -s)],
        vec![c(-3.0, 0.0), c(0.0, s), c(3.0, 0.0)],
    ])
    .expect("constant matrix")
}

/// `(t, max entry distance to the t → 0⁺ limit)` for each `t`, using the
/// eigenvector construction.
pub fn ep_limit_sequence(ts: &[f64]) -> Result<Vec<(f64, f64)>> {
    let limit = metric_s_n3_ep_limit();
    ts.iter()
        .map(|&t| {
            let m = metric_from_left_eigenvectors(&TimeParameter::new(t)?.hamiltonian()?)?;
            Ok((t, m.theta.max_abs_diff(&limit)))
        })
        .collect()
}

/// Dimension of the real solution space of `H† Θ = Θ H` over Hermitian `Θ`.
pub fn quasi_hermitian_nullity(h: &ComplexMatrix, tol: f64) -> usize {
    let n = h.n();
    let mut basis = Vec::with_capacity(n * n);
    for i in 0..n {
        for j in i..n {
            let mut e = DMatrix::<Complex64>::zeros(n, n);
            if i == j {
                e[(i, i)] = c(1.0, 0.0);
                basis.push(e);
            } else {
                e[(i, j)] = c(1.0, 0.0);
                e[(j, i)] = c(1.0, 0.0);
                basis.push(e.clone());
                e[(i, j)] = c(0.0, 1.0);
                e[(j, i)] = c(0.0, -1.0);
                basis.push(e);
            }
        }
    }
    let hm = h.as_dmatrix();
    let hd = hm.adjoint();
    let mut a = DMatrix::<f64>::zeros(2 * n * n, basis.len());
    for (k, e) in basis.iter().enumerate() {
        let r = &hd * e - e * hm;
        for (idx, z) in r.iter().enumerate() {
            a[(2 * idx, k)] = z.re;
            a[(2 * idx + 1, k)] = z.im;
        }
    }
    let sv = a.svd(false, false).singular_values;
    let smax = sv.max();
    sv.iter().filter(|&&s| s <= tol * smax).count()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn two_site_metrics() {
        let h = build_hamiltonian(&CouplingVector::new(2, vec![0.0]).unwrap());
        let m = metric_from_left_eigenvectors(&h).unwrap();
        assert!(m.theta.max_abs_diff(&ComplexMatrix::identity(2).scale(2.0)) < 1e-12);
        let f = metric_family_n2(0.6, 0.0).unwrap();
        assert!((f.eigenvalues[0] - 0.4).abs() < 1e-12 && (f.eigenvalues[1] - 1.6).abs() < 1e-12);
        assert!(f.positive_definite && f.quasi_hermiticity_residual < 1e-12);
        assert!(!metric_family_n2(0.6, 0.9).unwrap().positive_definite);
        let id = ComplexMatrix::identity(2);
        let h5 = build_hamiltonian(&CouplingVector::new(2, vec![0.5]).unwrap());
        assert!(quasi_hermiticity_residual(&h5, &id) > 0.1);
    }

    #[test]
    fn three_site_family() {
        let (lo, mid, _) = family_n3_eigenvalues(0.5);
        assert!((lo - (1.0 + (0.25 - 2.0625f64.sqrt()) / 2.0)).abs() < 1e-15);
        assert_eq!(mid, 1.0);
        let m = metric_family_n3(0.5, 0.0, 0.0).unwrap();
        assert!((m.eigenvalues[0] - lo).abs() < 1e-12);
        assert!(metric_family_n3(0.7, 0.3, -0.2).unwrap().quasi_hermiticity_residual < 1e-12);
        let (ok, min) = positivity_check(&metric_family_n3(1.0, 0.0, 0.0).unwrap().theta).unwrap();
        assert!(!ok || min.abs() < 1e-10);
        assert!(min.abs() < 1e-10);
    }

    #[test]
    fn sample_metric_special_times() {
        let (a, b, c3) = metric_eigs_n3_closed_form(TimeParameter::new(1.0).unwrap()).unwrap();
        assert!((a - 2.0).abs() < 1e-12 && (b - 4.0).abs() < 1e-12 && (c3 - 4.0).abs() < 1e-12);
        let (a, b, c3) = metric_eigs_n3_closed_form(TimeParameter::new(0.0).unwrap()).unwrap();
        assert!(a.abs() < 1e-12 && b == 0.0 && (c3 - 12.0).abs() < 1e-12);
        assert!((t_max() - 1.014611872).abs() < 1e-9);
        assert!(discriminant(t_max()).abs() < 1e-12);
        assert!(matches!(
            metric_eigs_n3_closed_form(TimeParameter::new(1.05).unwrap()),
            Err(Error::BranchError { .. })
        ));
        let ev = metric_s_n3_eigenvalues(1.05).unwrap();
        assert!(ev.iter().any(|z| z.im.abs() > 1e-3));
        assert!(matches!(positivity_check(&metric_s_n3(1.05)), Err(Error::NotHermitian(_))));
    }

    #[test]
    fn sample_metric_matches_eigenvector_construction() {
        for t in [0.1, 0.5, 0.9, 1.0] {
            let m = metric_from_left_eigenvectors(&TimeParameter::new(t).unwrap().hamiltonian().unwrap()).unwrap();
            assert!(m.theta.max_abs_diff(&metric_s_n3(t)) < 1e-9, "t = {t}");
        }
    }

    #[test]
    fn metric_ambiguity_is_two_parametric() {
        let h = build_hamiltonian(&CouplingVector::new(3, vec![0.7]).unwrap());
        assert_eq!(quasi_hermitian_nullity(&h, 1e-10) - 1, 2);
    }

    #[test]
    fn refuses_outside_domain() {
        let h = build_hamiltonian(&CouplingVector::new(2, vec![1.5]).unwrap());
        assert!(matches!(metric_from_left_eigenvectors(&h), Err(Error::MetricUndefined(_))));
    }
}
