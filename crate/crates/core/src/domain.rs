//! The physical domain: couplings with a real, simple spectrum.

use std::io::Write;

use rayon::prelude::*;
use serde::Serialize;

use crate::model::build_hamiltonian;
use crate::spectral::{eigenvalues, Classification, Tolerances};
use crate::{CouplingVector, Error, Result};

/// Thread cap for scans.
pub const THREADS_ENV: &str = "EPNLAB_THREADS";

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DomainSample {
    pub couplings: CouplingVector,
    pub classification: Classification,
    pub min_gap: f64,
    pub max_imag: f64,
}

impl DomainSample {
    pub fn inside(&self) -> bool {
        self.classification == Classification::RealNondegenerate
    }

    /// Positive inside, negative outside.
    pub fn margin(&self, tol: &Tolerances) -> f64 {
        if self.classification == Classification::Complex {
            return -(self.max_imag - tol.imag).abs().max(f64::MIN_POSITIVE);
        }
        (self.min_gap - tol.gap).min(tol.imag - self.max_imag)
    }
}

pub fn classify_point(c: &CouplingVector, tol: &Tolerances) -> Result<DomainSample> {
    let spec = eigenvalues(&build_hamiltonian(c), tol)?;
    Ok(DomainSample {
        couplings: c.clone(),
        classification: spec.classification,
        min_gap: spec.min_gap,
        max_imag: spec.max_imag,
    })
}

/// Secular coefficients of the four-site model, `E⁴ + b E² + c`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct N4Inequalities {
    pub b: f64,
    pub c: f64,
    pub disc: f64,
}

impl N4Inequalities {
    pub fn inside(&self) -> bool {
        self.b < 0.0 && self.c > 0.0 && self.disc > 0.0
    }

    pub fn margin(&self) -> f64 {
        (-self.b).min(self.c).min(self.disc)
    }
}

pub fn n4_inequalities(a: f64, b: f64) -> N4Inequalities {
    let bv = -3.0 + a * a + b * b;
    let cv = (1.0 + a * b).powi(2) - a * a;
    N4Inequalities {
        b: bv,
        c: cv,
        disc: bv * bv - 4.0 * cv,
    }
}

/// Grid definition. The first one or two couplings are scanned; any further
/// couplings are held at `slice`.
#[derive(Clone, Debug, PartialEq)]
pub struct ScanSpec {
    pub n: usize,
    pub ranges: Vec<(f64, f64)>,
    pub resolution: usize,
    pub slice: Vec<f64>,
}

impl ScanSpec {
    pub fn new(n: usize, ranges: Vec<(f64, f64)>, resolution: usize, slice: Vec<f64>) -> Result<Self> {
        if n < 2 {
            return Err(Error::InvalidDimension(n));
        }
        let m = n / 2;
        if resolution < 2 {
            return Err(Error::InvalidScan(format!("resolution must be at least 2, got {resolution}")));
        }
        if ranges.is_empty() || ranges.len() > 2 || ranges.len() > m {
            return Err(Error::InvalidScan(format!(
                "n = {n} scans 1 to {} axes, got {}",
                m.min(2),
                ranges.len()
            )));
        }
        if m > ranges.len() && slice.len() != m - ranges.len() {
            return Err(Error::SliceRequired { couplings: m });
        }
        if m == ranges.len() && !slice.is_empty() {
            return Err(Error::InvalidScan("slice given but every coupling is scanned".into()));
        }
        for &(lo, hi) in &ranges {
            if !(lo.is_finite() && hi.is_finite() && lo < hi) {
                return Err(Error::InvalidScan(format!("bad range {lo}:{hi}")));
            }
        }
        if slice.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidScan("non-finite slice value".into()));
        }
        Ok(Self {
            n,
            ranges,
            resolution,
            slice,
        })
    }

    pub fn axis(&self, k: usize) -> Vec<f64> {
        let (lo, hi) = self.ranges[k];
        let r = self.resolution;
        (0..r).map(|i| lo + (hi - lo) * i as f64 / (r - 1) as f64).collect()
    }

    pub fn rows(&self) -> usize {
        self.resolution
    }

    pub fn cols(&self) -> usize {
        if self.ranges.len() == 2 {
            self.resolution
        } else {
            1
        }
    }

    fn point(&self, i: usize, j: usize) -> Result<CouplingVector> {
        let r = self.resolution;
        let at = |k: usize, idx: usize| {
            let (lo, hi) = self.ranges[k];
            lo + (hi - lo) * idx as f64 / (r - 1) as f64
        };
        let mut v = vec![at(0, i)];
        if self.ranges.len() == 2 {
            v.push(at(1, j));
        }
        v.extend_from_slice(&self.slice);
        CouplingVector::new(self.n, v)
    }
}

/// Worker pool sized by `EPNLAB_THREADS` when set.
pub fn thread_pool() -> Result<rayon::ThreadPool> {
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Ok(v) = std::env::var(THREADS_ENV) {
        let k: usize = v
            .trim()
            .parse()
            .map_err(|_| Error::InvalidScan(format!("{THREADS_ENV} must be a positive integer, got {v:?}")))?;
        if k == 0 {
            return Err(Error::InvalidScan(format!("{THREADS_ENV} must be positive")));
        }
        builder = builder.num_threads(k);
    }
    builder
        .build()
        .map_err(|e| Error::InvalidScan(format!("thread pool: {e}")))
}

/// Rows handed to the pool at once.
const ROW_BATCH: usize = 16;

/// Classify the grid row by row. Row `i` fixes the first scanned coupling at
/// its `i`-th value; rows reach `sink` in order.
pub fn scan_rows(
    spec: &ScanSpec,
    tol: &Tolerances,
    mut sink: impl FnMut(usize, Vec<DomainSample>) -> Result<()>,
) -> Result<()> {
    let pool = thread_pool()?;
    let cols = spec.cols();
    let mut start = 0;
    while start < spec.rows() {
        let end = (start + ROW_BATCH).min(spec.rows());
        let batch: Vec<Result<Vec<DomainSample>>> = pool.install(|| {
            (start..end)
                .into_par_iter()
                .map(|i| (0..cols).map(|j| classify_point(&spec.point(i, j)?, tol)).collect())
                .collect()
        });
        for (k, row) in batch.into_iter().enumerate() {
            sink(start + k, row?)?;
        }
        start = end;
    }
    Ok(())
}

/// Row-major grid of classified samples.
pub fn scan_grid(spec: &ScanSpec, tol: &Tolerances) -> Result<Vec<DomainSample>> {
    let mut out = Vec::with_capacity(spec.rows() * spec.cols());
    scan_rows(spec, tol, |_, row| {
        out.extend(row);
        Ok(())
    })?;
    Ok(out)
}

pub type Segment = ((f64, f64), (f64, f64));

/// Zero contour of a row-major field `f[i][j]` over axes `xs` (rows) and `ys`
/// (columns) by marching squares with linear interpolation.
pub fn marching_squares(xs: &[f64], ys: &[f64], f: &[f64]) -> Vec<Segment> {
    let (nx, ny) = (xs.len(), ys.len());
    assert_eq!(f.len(), nx * ny, "field size");
    let at = |i: usize, j: usize| f[i * ny + j];
    let cross = |p: (f64, f64), fp: f64, q: (f64, f64), fq: f64| {
        let t = if fp == fq { 0.5 } else { fp / (fp - fq) };
        (p.0 + t * (q.0 - p.0), p.1 + t * (q.1 - p.1))
    };
    let mut out = Vec::new();
    for i in 0..nx.saturating_sub(1) {
        for j in 0..ny.saturating_sub(1) {
            let corners = [
                ((xs[i], ys[j]), at(i, j)),
                ((xs[i + 1], ys[j]), at(i + 1, j)),
                ((xs[i + 1], ys[j + 1]), at(i + 1, j + 1)),
                ((xs[i], ys[j + 1]), at(i, j + 1)),
            ];
            let mut pts = Vec::with_capacity(4);
            for k in 0..4 {
                let (p, fp) = corners[k];
                let (q, fq) = corners[(k + 1) % 4];
                if (fp > 0.0) != (fq > 0.0) {
                    pts.push(cross(p, fp, q, fq));
                }
            }
            match pts.len() {
                2 => out.push((pts[0], pts[1])),
                4 => {
                    // Saddle: resolve by the cell-centre value.
                    let centre = corners.iter().map(|c| c.1).sum::<f64>() / 4.0;
                    if (centre > 0.0) == (corners[0].1 > 0.0) {
                        out.push((pts[0], pts[3]));
                        out.push((pts[1], pts[2]));
                    } else {
                        out.push((pts[0], pts[1]));
                        out.push((pts[2], pts[3]));
                    }
                }
                _ => {}
            }
        }
    }
    out
}

/// Boundary of a two-axis scan. For `n = 4` without a slice the field is
/// the inequality margin; otherwise the spectral margin.
pub fn scan_boundary(spec: &ScanSpec, samples: &[DomainSample], tol: &Tolerances) -> Result<Vec<Segment>> {
    if spec.ranges.len() != 2 {
        return Err(Error::InvalidScan("boundary tracing needs two scanned couplings".into()));
    }
    let field: Vec<f64> = if spec.n == 4 {
        samples
            .iter()
            .map(|s| n4_inequalities(s.couplings.values()[0], s.couplings.values()[1]).margin())
            .collect()
    } else {
        samples.iter().map(|s| s.margin(tol)).collect()
    };
    Ok(marching_squares(&spec.axis(0), &spec.axis(1), &field))
}

/// Segments as gnuplot data blocks separated by blank lines.
pub fn write_gnuplot(mut w: impl Write, segments: &[Segment]) -> std::io::Result<()> {
    for ((x0, y0), (x1, y1)) in segments {
        writeln!(w, "{x0:.12e} {y0:.12e}\n{x1:.12e} {y1:.12e}\n")?;
    }
    Ok(())
}

/// Bisect the segment from an inside point to an outside point for the
/// domain boundary, to parameter width `tol`. Returns the point on the
/// segment, as couplings.
pub fn bisect_boundary(
    inside: &CouplingVector,
    outside: &CouplingVector,
    tol: f64,
    spectral_tol: &Tolerances,
) -> Result<Vec<f64>> {
    if !(tol > 0.0 && tol.is_finite()) {
        return Err(Error::InvalidTolerance(tol));
    }
    if inside.n() != outside.n() {
        return Err(Error::InvalidDimension(outside.n()));
    }
    let n = inside.n();
    let lerp = |t: f64| -> Vec<f64> {
        inside
            .values()
            .iter()
            .zip(outside.values())
            .map(|(a, b)| a + t * (b - a))
            .collect()
    };
    let is_in = |t: f64| -> Result<bool> { Ok(classify_point(&CouplingVector::new(n, lerp(t))?, spectral_tol)?.inside()) };
    if !is_in(0.0)? || is_in(1.0)? {
        return Err(Error::InvalidScan("bisection needs one inside and one outside endpoint".into()));
    }
    let len = inside
        .values()
        .iter()
        .zip(outside.values())
        .map(|(a, b)| (a - b).powi(2))
        .sum::<f64>()
        .sqrt();
    let (mut lo, mut hi) = (0.0, 1.0);
    while (hi - lo) * len > tol {
        let mid = 0.5 * (lo + hi);
        if is_in(mid)? {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(lerp(0.5 * (lo + hi)))
}

/// Corridor constraint in `A` for the four-site model.
///
/// With `B = cosh β − 1/A` and `A² + B² = 3 − 2A sinh β cos γ`, multiplying by
/// `A²` gives `A⁴ + (A cosh β − 1)² − 3A² + 2A³ sinh β cos γ`. At `β = 0` it
/// reduces to `A⁴ − 2A² − 2A + 1`, whose positive root is the four-site
/// exceptional coupling.
pub fn corridor_constraint(a: f64, beta: f64, gamma: f64) -> f64 {
    let a2 = a * a;
    a2 * a2 + (a * beta.cosh() - 1.0).powi(2) - 3.0 * a2 + 2.0 * a2 * a * beta.sinh() * gamma.cos()
}

/// `A⁴ + (A cosh β − 1)² − 3 + 2A sinh β cos γ`, kept for comparison. Its root
/// at `β = 0` is not the exceptional coupling.
pub fn corridor_constraint_as_printed(a: f64, beta: f64, gamma: f64) -> f64 {
    a.powi(4) + (a * beta.cosh() - 1.0).powi(2) - 3.0 + 2.0 * a * beta.sinh() * gamma.cos()
}

fn corridor_da(a: f64, beta: f64, gamma: f64) -> f64 {
    let (ch, sh) = (beta.cosh(), beta.sinh());
    4.0 * a.powi(3) + 2.0 * ch * (a * ch - 1.0) - 6.0 * a + 6.0 * a * a * sh * gamma.cos()
}

/// Continuation step in `β`.
pub const CORRIDOR_STEP: f64 = 1e-3;

fn corridor_newton(mut a: f64, beta: f64, gamma: f64) -> Result<f64> {
    for _ in 0..50 {
        let f = corridor_constraint(a, beta, gamma);
        let d = corridor_da(a, beta, gamma);
        if d.abs() < 1e-8 {
            return Err(Error::CorridorExit { a, beta, gamma });
        }
        let step = f / d;
        a -= step;
        if step.abs() <= 1e-15 * a.abs().max(1.0) {
            return Ok(a);
        }
    }
    Err(Error::CorridorExit { a, beta, gamma })
}

/// Root of the corridor constraint in `A`, continued in `β` from the
/// four-site exceptional coupling at `β = 0`.
pub fn track_corridor_root(beta: f64, gamma: f64) -> Result<f64> {
    if !(beta.is_finite() && gamma.is_finite()) {
        return Err(Error::InvalidCouplings(format!("beta = {beta}, gamma = {gamma}")));
    }
    let mut a = corridor_newton(1.68, 0.0, gamma)?;
    let steps = (beta.abs() / CORRIDOR_STEP).ceil() as usize;
    for k in 1..=steps {
        let b = beta * k as f64 / steps as f64;
        let next = corridor_newton(a, b, gamma)?;
        // A jump means Newton left the branch.
        if (next - a).abs() > 0.1 {
            return Err(Error::CorridorExit { a, beta: b, gamma });
        }
        a = next;
    }
    Ok(a)
}
