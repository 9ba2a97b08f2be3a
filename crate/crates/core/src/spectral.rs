//! Dense eigenvalue and eigenvector computation with spectrum classification.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use serde::Serialize;

use crate::charpoly::secular_numeric;
use crate::model::ComplexMatrix;
use crate::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Classification {
    RealNondegenerate,
    RealDegenerate,
    Complex,
}

impl Classification {
    pub fn as_str(&self) -> &'static str {
        match self {
            Self::RealNondegenerate => "real_nondegenerate",
            Self::RealDegenerate => "real_degenerate",
            Self::Complex => "complex",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Tolerances {
    pub imag: f64,
    pub gap: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self { imag: 1e-8, gap: 1e-8 }
    }
}

impl Tolerances {
    pub fn new(imag: f64, gap: f64) -> Result<Self> {
        for t in [imag, gap] {
            if !(t > 0.0 && t.is_finite()) {
                return Err(Error::InvalidTolerance(t));
            }
        }
        Ok(Self { imag, gap })
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct Spectrum {
    pub eigenvalues: Vec<Complex64>,
    pub classification: Classification,
    pub min_gap: f64,
    pub max_imag: f64,
}

impl Spectrum {
    pub fn from_eigenvalues(mut eigenvalues: Vec<Complex64>, tol: &Tolerances) -> Self {
        sort_eigenvalues(&mut eigenvalues);
        let classification = classify(&eigenvalues, tol.imag, tol.gap);
        Self {
            min_gap: min_gap(&eigenvalues),
            max_imag: eigenvalues.iter().map(|e| e.im.abs()).fold(0.0, f64::max),
            classification,
            eigenvalues,
        }
    }

    pub fn len(&self) -> usize {
        self.eigenvalues.len()
    }

    pub fn is_empty(&self) -> bool {
        self.eigenvalues.is_empty()
    }
}

pub fn sort_eigenvalues(ev: &mut [Complex64]) {
    ev.sort_by(|a, b| a.re.total_cmp(&b.re).then(a.im.total_cmp(&b.im)));
}

pub fn min_gap(ev: &[Complex64]) -> f64 {
    let mut gap = f64::INFINITY;
    for i in 0..ev.len() {
        for j in i + 1..ev.len() {
            gap = gap.min((ev[i] - ev[j]).norm());
        }
    }
    gap
}

/// Groups of eigenvalues that look like a perturbed degeneracy.
///
/// A degenerate eigenvalue of multiplicity `m` splits by `O(ε^(1/m))` under a
/// perturbation of size `ε`, so a group of `m` values counts as one cluster
/// when every member lies within `tol_gap^(1/m)` of the group mean.
pub fn clusters(ev: &[Complex64], tol_gap: f64) -> Vec<Vec<usize>> {
    let n = ev.len();
    if n == 0 {
        return Vec::new();
    }
    let reach = tol_gap.powf(1.0 / n as f64);
    // Single-linkage components at the widest admissible radius.
    let mut comp: Vec<usize> = (0..n).collect();
    fn find(c: &mut [usize], i: usize) -> usize {
        let mut r = i;
        while c[r] != r {
            r = c[r];
        }
        c[i] = r;
        r
    }
    for i in 0..n {
        for j in i + 1..n {
            if (ev[i] - ev[j]).norm() <= 2.0 * reach {
                let (a, b) = (find(&mut comp, i), find(&mut comp, j));
                comp[a.max(b)] = a.min(b);
            }
        }
    }
    let mut groups: std::collections::BTreeMap<usize, Vec<usize>> = Default::default();
    for i in 0..n {
        let r = find(&mut comp, i);
        groups.entry(r).or_default().push(i);
    }
    let mut out = Vec::new();
    for (_, g) in groups {
        if g.len() < 2 {
            out.push(g);
            continue;
        }
        let mean = g.iter().map(|&i| ev[i]).sum::<Complex64>() / g.len() as f64;
        let radius = tol_gap.powf(1.0 / g.len() as f64);
        if g.iter().all(|&i| (ev[i] - mean).norm() <= radius) {
            out.push(g);
        } else {
            out.extend(g.into_iter().map(|i| vec![i]));
        }
    }
    out
}

/// Reality and degeneracy verdict.
///
/// Real eigenvalues follow the plain rule on `tol_imag` and `tol_gap`.
/// Eigenvalues with larger imaginary parts are tolerated only inside a
/// degenerate cluster whose mean is real, which is how a slightly perturbed
/// exceptional point looks.
pub fn classify(ev: &[Complex64], tol_imag: f64, tol_gap: f64) -> Classification {
    if ev.iter().all(|e| e.im.abs() <= tol_imag) {
        return if min_gap(ev) > tol_gap {
            Classification::RealNondegenerate
        } else {
            Classification::RealDegenerate
        };
    }
    for g in clusters(ev, tol_gap) {
        let mean = g.iter().map(|&i| ev[i]).sum::<Complex64>() / g.len() as f64;
        let real = if g.len() == 1 {
            ev[g[0]].im.abs() <= tol_imag
        } else {
            mean.im.abs() <= tol_imag
        };
        if !real {
            return Classification::Complex;
        }
    }
    Classification::RealDegenerate
}

/// Eigenvalues of an arbitrary square matrix by the complex Schur form.
pub fn dense_eigenvalues(m: &DMatrix<Complex64>) -> Result<Vec<Complex64>> {
    let n = m.nrows();
    if n == 0 {
        return Ok(Vec::new());
    }
    if n == 1 {
        return Ok(vec![m[(0, 0)]]);
    }
    // Zero diagonals can stall the deflation test; retry on a shifted copy.
    let scale = m.norm().max(1.0);
    let shifts = [Complex64::new(0.0, 0.0), Complex64::new(scale, 0.0), Complex64::new(0.5 * scale, 0.5 * scale)];
    let mut found = None;
    for shift in shifts {
        let shifted = m - DMatrix::<Complex64>::identity(n, n) * shift;
        if let Some(schur) = nalgebra::Schur::try_new(shifted, f64::EPSILON, 10_000) {
            found = Some((shift, schur.unpack().1));
            break;
        }
    }
    let (shift, t) = found.ok_or(Error::RootFinderFailure { iterations: 10_000, iterates: Vec::new() })?;
    let mut out = Vec::with_capacity(n);
    let mut k = 0;
    while k < n {
        let small = k + 1 == n
            || t[(k + 1, k)].norm() <= f64::EPSILON * (t[(k, k)].norm() + t[(k + 1, k + 1)].norm()).max(f64::MIN_POSITIVE);
        if small {
            out.push(t[(k, k)] + shift);
            k += 1;
        } else {
            let (a, b, c, d) = (t[(k, k)], t[(k, k + 1)], t[(k + 1, k)], t[(k + 1, k + 1)]);
            let half_tr = (a + d) / 2.0;
            let disc = ((a - d) / 2.0).powu(2) + b * c;
            let s = disc.sqrt();
            out.push(half_tr + s + shift);
            out.push(half_tr - s + shift);
            k += 2;
        }
    }
    Ok(out)
}

/// Largest dimension routed through the secular polynomial; beyond it the
/// coefficients grow like `2^n` and the dense solver is more accurate.
pub const SECULAR_MAX_N: usize = 12;

/// Eigenvalues of `h`, classified.
///
/// Small tridiagonal matrices go through the secular recurrence and Aberth
/// iteration, which keeps a real spectrum real much closer to an exceptional
/// point than a dense Schur sweep; everything else, and any Aberth failure,
/// uses the dense solver.
pub fn eigenvalues(h: &ComplexMatrix, tol: &Tolerances) -> Result<Spectrum> {
    Ok(Spectrum::from_eigenvalues(raw_eigenvalues(h)?, tol))
}

fn raw_eigenvalues(h: &ComplexMatrix) -> Result<Vec<Complex64>> {
    if h.n() <= SECULAR_MAX_N && h.is_tridiagonal() {
        if let Ok(ev) = aberth_roots(&secular_numeric(h)) {
            return Ok(ev);
        }
    }
    dense_eigenvalues(h.as_dmatrix())
}

/// Same spectrum through the secular polynomial and simultaneous iteration.
pub fn eigenvalues_secular(h: &ComplexMatrix, tol: &Tolerances) -> Result<Spectrum> {
    let coeffs = secular_numeric(h);
    Ok(Spectrum::from_eigenvalues(aberth_roots(&coeffs)?, tol))
}

fn horner(coeffs: &[Complex64], z: Complex64) -> (Complex64, Complex64, f64) {
    let mut p = Complex64::new(0.0, 0.0);
    let mut dp = Complex64::new(0.0, 0.0);
    let mut scale = 0.0;
    let az = z.norm();
    for c in coeffs.iter().rev() {
        dp = dp * z + p;
        p = p * z + c;
        scale = scale * az + c.norm();
    }
    (p, dp, scale)
}

/// All roots of `sum coeffs[k] z^k` by the Aberth–Ehrlich iteration.
pub fn aberth_roots(coeffs: &[Complex64]) -> Result<Vec<Complex64>> {
    let deg = coeffs.iter().rposition(|c| c.norm() != 0.0).unwrap_or(0);
    if deg == 0 {
        return Ok(Vec::new());
    }
    let coeffs = &coeffs[..=deg];
    let lc = coeffs[deg];
    let bound = 1.0 + coeffs[..deg].iter().map(|c| (c / lc).norm()).fold(0.0, f64::max);
    let radius = bound.min(
        // Geometric-mean radius keeps initial guesses near the root scale.
        (coeffs[0] / lc).norm().powf(1.0 / deg as f64).max(1e-3),
    );
    let mut z: Vec<Complex64> = (0..deg)
        .map(|k| Complex64::from_polar(radius, 2.0 * std::f64::consts::PI * k as f64 / deg as f64 + 0.4))
        .collect();
    let mut done = vec![false; deg];
    let max_iter = 1000;
    for _ in 0..max_iter {
        for k in 0..deg {
            if done[k] {
                continue;
            }
            let (p, dp, scale) = horner(coeffs, z[k]);
            if p.norm() <= 8.0 * deg as f64 * f64::EPSILON * scale {
                done[k] = true;
                continue;
            }
            let ratio = p / dp;
            let sum: Complex64 = (0..deg)
                .filter(|&j| j != k)
                .map(|j| Complex64::new(1.0, 0.0) / (z[k] - z[j]))
                .sum();
            let step = ratio / (Complex64::new(1.0, 0.0) - ratio * sum);
            if step.is_finite() {
                z[k] -= step;
                if step.norm() <= f64::EPSILON * z[k].norm() {
                    done[k] = true;
                }
            } else {
                z[k] += Complex64::new(1e-8, 1e-8);
            }
        }
        if done.iter().all(|&d| d) {
            return Ok(z);
        }
    }
    Err(Error::RootFinderFailure {
        iterations: max_iter,
        iterates: z.iter().map(|c| (c.re, c.im)).collect(),
    })
}

/// Right and left eigenvectors paired by eigenvalue.
#[derive(Clone, Debug)]
pub struct EigenSystem {
    pub spectrum: Spectrum,
    /// Column `i` solves `H v = E_i v`.
    pub right_vectors: ComplexMatrix,
    /// Column `i` solves `H† w = conj(E_i) w`.
    pub left_vectors: ComplexMatrix,
    /// Per pair: `max(‖H v − E v‖, ‖H† w − Ē w‖) / ‖H‖_F`.
    pub residuals: Vec<f64>,
}

fn null_vector(m: &DMatrix<Complex64>) -> DVector<Complex64> {
    let svd = nalgebra::SVD::new(m.clone(), false, true);
    let v_t = svd.v_t.expect("requested V");
    let k = v_t.nrows() - 1;
    // Rows of v_t are conjugated right singular vectors.
    v_t.row(k).transpose().map(|c| c.conj())
}

/// Eigenvectors of `h` and of `h†`, the latter solved independently.
pub fn eigensystem(h: &ComplexMatrix, tol: &Tolerances) -> Result<EigenSystem> {
    let spectrum = eigenvalues(h, tol)?;
    if spectrum.classification == Classification::RealDegenerate {
        return Err(Error::DegenerateSpectrum { min_gap: spectrum.min_gap });
    }
    let n = h.n();
    let hm = h.as_dmatrix();
    let hd = hm.adjoint();
    let mut left_eigs = raw_eigenvalues(&h.adjoint())?;
    let norm = h.frobenius_norm().max(f64::MIN_POSITIVE);
    let mut right = DMatrix::<Complex64>::zeros(n, n);
    let mut left = DMatrix::<Complex64>::zeros(n, n);
    let mut residuals = Vec::with_capacity(n);
    let eye = DMatrix::<Complex64>::identity(n, n);
    for (i, &e) in spectrum.eigenvalues.iter().enumerate() {
        // Pair with the nearest unused eigenvalue of H† to conj(E).
        let (j, _) = left_eigs
            .iter()
            .enumerate()
            .map(|(j, f)| (j, (f - e.conj()).norm()))
            .min_by(|a, b| a.1.total_cmp(&b.1))
            .expect("nonempty spectrum");
        let f = left_eigs.swap_remove(j);
        let v = null_vector(&(hm - &eye * e));
        let w = null_vector(&(&hd - &eye * f));
        let rv = (hm * &v - &v * e).norm();
        let rw = (&hd * &w - &w * e.conj()).norm();
        residuals.push(rv.max(rw) / norm);
        right.set_column(i, &v);
        left.set_column(i, &w);
    }
    Ok(EigenSystem {
        spectrum,
        right_vectors: ComplexMatrix::from_dmatrix(right),
        left_vectors: ComplexMatrix::from_dmatrix(left),
        residuals,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::build_hamiltonian;
    use crate::CouplingVector;

    fn h(n: usize, v: &[f64]) -> ComplexMatrix {
        build_hamiltonian(&CouplingVector::new(n, v.to_vec()).unwrap())
    }

    fn tol() -> Tolerances {
        Tolerances::default()
    }

    #[test]
    fn two_site_spectra() {
        let s = eigenvalues(&h(2, &[0.5]), &tol()).unwrap();
        assert!((s.eigenvalues[0].re + 0.75f64.sqrt()).abs() < 1e-12);
        assert!((s.eigenvalues[1].re - 0.75f64.sqrt()).abs() < 1e-12);
        assert_eq!(s.classification, Classification::RealNondegenerate);
        let c = eigenvalues(&h(2, &[1.5]), &tol()).unwrap();
        assert_eq!(c.classification, Classification::Complex);
        assert!((c.max_imag - 1.25f64.sqrt()).abs() < 1e-12);
    }

    #[test]
    fn three_site_spectrum() {
        let s = eigenvalues(&h(3, &[1.0]), &tol()).unwrap();
        for (e, want) in s.eigenvalues.iter().zip([-1.0, 0.0, 1.0]) {
            assert!((e - want).norm() < 1e-12);
        }
    }

    #[test]
    fn aberth_agrees_with_schur() {
        let m = h(6, &[0.3, 0.2, 0.1]);
        let a = Spectrum::from_eigenvalues(dense_eigenvalues(m.as_dmatrix()).unwrap(), &tol());
        let b = eigenvalues_secular(&m, &tol()).unwrap();
        for (x, y) in a.eigenvalues.iter().zip(&b.eigenvalues) {
            assert!((x - y).norm() < 1e-10);
        }
    }

    #[test]
    fn aberth_simple_polynomials() {
        let one = Complex64::new(1.0, 0.0);
        let z = Complex64::new(0.0, 0.0);
        let mut r = aberth_roots(&[-one * 2.0, z, one]).unwrap();
        sort_eigenvalues(&mut r);
        assert!((r[0].re + 2f64.sqrt()).abs() < 1e-14 && (r[1].re - 2f64.sqrt()).abs() < 1e-14);
        assert!(aberth_roots(&[one]).unwrap().is_empty());
    }

    #[test]
    fn eigensystem_residuals_and_biorthogonality() {
        let m = h(2, &[0.5]);
        let es = eigensystem(&m, &tol()).unwrap();
        assert!(es.residuals.iter().all(|&r| r < 1e-10));
        let l = es.left_vectors.as_dmatrix();
        let r = es.right_vectors.as_dmatrix();
        let overlap = l.adjoint() * r;
        assert!(overlap[(0, 1)].norm() < 1e-12 && overlap[(1, 0)].norm() < 1e-12);

        let herm = eigensystem(&h(2, &[0.0]), &tol()).unwrap();
        for i in 0..2 {
            let v = herm.right_vectors.as_dmatrix().column(i).into_owned();
            let w = herm.left_vectors.as_dmatrix().column(i).into_owned();
            assert!((w.dotc(&v).norm() - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn eigensystem_refuses_exceptional_point() {
        assert!(matches!(
            eigensystem(&h(2, &[1.0]), &tol()),
            Err(Error::DegenerateSpectrum { .. })
        ));
    }

    #[test]
    fn classification_rules() {
        let c = |re: f64, im: f64| Complex64::new(re, im);
        assert_eq!(classify(&[c(-1.0, 0.0), c(1.0, 0.0)], 1e-8, 1e-8), Classification::RealNondegenerate);
        assert_eq!(classify(&[c(0.0, 1e-9), c(0.0, -1e-9)], 1e-8, 1e-8), Classification::RealDegenerate);
        // Perturbed EP4: spread of order 1e-3 around a real centre.
        let ep = [c(1e-3, 0.0), c(-1e-3, 0.0), c(0.0, 1e-3), c(0.0, -1e-3)];
        assert_eq!(classify(&ep, 1e-8, 1e-8), Classification::RealDegenerate);
        assert_eq!(classify(&[c(0.0, 0.5), c(0.0, -0.5)], 1e-8, 1e-8), Classification::Complex);
    }
}
