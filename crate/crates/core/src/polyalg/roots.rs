use std::cmp::Ordering;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive};
use serde::Serialize;

use super::UniPoly;
use crate::{Error, Result};

/// Open rational interval `(lo, hi)` isolating exactly one real root.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RootInterval {
    pub lo: BigRational,
    pub hi: BigRational,
    pub multiplicity_free: bool,
}

impl RootInterval {
    pub fn width(&self) -> BigRational {
        &self.hi - &self.lo
    }

    pub fn midpoint_f64(&self) -> f64 {
        to_f64(&((&self.lo + &self.hi) / BigRational::from_integer(2.into())))
    }

    pub fn contains(&self, x: f64) -> bool {
        to_f64(&self.lo) < x && x < to_f64(&self.hi)
    }
}

impl Serialize for RootInterval {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        (to_f64(&self.lo), to_f64(&self.hi)).serialize(s)
    }
}

pub(crate) fn to_f64(x: &BigRational) -> f64 {
    x.to_f64().unwrap_or_else(|| {
        // Huge numerators: scale both parts down before dividing.
        let shift = x.numer().bits().max(x.denom().bits()).saturating_sub(1000);
        let n = (x.numer() >> shift).to_f64().unwrap_or(f64::NAN);
        let d = (x.denom() >> shift).to_f64().unwrap_or(f64::NAN);
        n / d
    })
}

pub(crate) fn from_f64(x: f64) -> BigRational {
    BigRational::from_float(x).expect("finite value")
}

/// Canonical Sturm chain of a squarefree polynomial.
pub struct SturmSequence {
    chain: Vec<UniPoly>,
}

impl SturmSequence {
    pub fn new(p: &UniPoly) -> Self {
        let mut chain = vec![p.clone(), p.derivative()];
        loop {
            let n = chain.len();
            let (a, b) = (&chain[n - 2], &chain[n - 1]);
            if b.degree().unwrap_or(0) == 0 {
                break;
            }
            let da = a.degree().unwrap();
            let db = b.degree().unwrap();
            let mut r = -&a.pseudo_rem(b);
            // prem multiplies by lc(b)^(da-db+1); undo its sign.
            if b.lc().is_negative() && (da - db + 1) % 2 == 1 {
                r = -&r;
            }
            if r.is_zero() {
                break;
            }
            let g = r.content().abs();
            chain.push(UniPoly::new(r.coeffs().iter().map(|c| c / &g).collect()));
        }
        Self { chain }
    }

    pub fn len(&self) -> usize {
        self.chain.len()
    }

    pub fn is_empty(&self) -> bool {
        self.chain.is_empty()
    }

    pub fn variations(&self, x: &BigRational) -> usize {
        let mut last = Ordering::Equal;
        let mut count = 0;
        for q in &self.chain {
            let s = q.sign_at(x);
            if s == Ordering::Equal {
                continue;
            }
            if last != Ordering::Equal && s != last {
                count += 1;
            }
            last = s;
        }
        count
    }

    /// Number of distinct roots in `(lo, hi]`.
    pub fn count(&self, lo: &BigRational, hi: &BigRational) -> usize {
        self.variations(lo).saturating_sub(self.variations(hi))
    }
}

/// A power of two strictly larger than every root modulus (Cauchy bound).
pub fn root_bound(p: &UniPoly) -> BigRational {
    let lc = p.lc().abs();
    let max = p.coeffs().iter().map(|c| c.abs()).max().unwrap_or_default();
    let ratio = BigRational::new(max, lc) + BigRational::one();
    let mut b = BigRational::one();
    while b <= ratio {
        b *= BigRational::from_integer(2.into());
    }
    b
}

/// Isolate every real root of a squarefree polynomial, ascending.
pub fn isolate_real_roots(p: &UniPoly) -> Result<Vec<RootInterval>> {
    if p.is_zero() {
        return Err(Error::ZeroPolynomial);
    }
    if !p.is_squarefree() && p.degree() != Some(0) {
        return Err(Error::NotSquarefree);
    }
    if p.degree() == Some(0) {
        return Ok(Vec::new());
    }
    let sturm = SturmSequence::new(p);
    let b = root_bound(p);
    let two = BigRational::from_integer(2.into());
    let mut out = Vec::new();
    let mut stack = vec![(-b.clone(), b)];
    while let Some((lo, hi)) = stack.pop() {
        let k = sturm.count(&lo, &hi);
        match k {
            0 => {}
            1 => out.push(RootInterval {
                lo,
                hi,
                multiplicity_free: true,
            }),
            _ => {
                let mid = nonroot_split(p, &lo, &hi, &two);
                stack.push((mid.clone(), hi));
                stack.push((lo, mid));
            }
        }
    }
    out.sort_by(|x, y| x.lo.cmp(&y.lo));
    Ok(out)
}

fn nonroot_split(p: &UniPoly, lo: &BigRational, hi: &BigRational, two: &BigRational) -> BigRational {
    let mut mid = (lo + hi) / two;
    let mut step = (hi - lo) / BigRational::from_integer(8.into());
    while p.sign_at(&mid) == Ordering::Equal {
        mid += &step;
        step /= two;
    }
    mid
}

/// Shrink `iv` by exact bisection until its width is at most `width`.
pub fn tighten(p: &UniPoly, iv: &RootInterval, width: &BigRational) -> RootInterval {
    let two = BigRational::from_integer(2.into());
    let (mut lo, mut hi) = (iv.lo.clone(), iv.hi.clone());
    let s_lo = p.sign_at(&lo);
    while &(&hi - &lo) > width {
        let mid = (&lo + &hi) / &two;
        match p.sign_at(&mid) {
            Ordering::Equal => {
                let eps = width / BigRational::from_integer(4.into());
                return RootInterval {
                    lo: &mid - &eps,
                    hi: &mid + &eps,
                    multiplicity_free: iv.multiplicity_free,
                };
            }
            s if s == s_lo => lo = mid,
            _ => hi = mid,
        }
    }
    RootInterval {
        lo,
        hi,
        multiplicity_free: iv.multiplicity_free,
    }
}

/// Approximate the root isolated by `iv` to within `tol`.
///
/// Floating-point Newton proposes candidates; each is accepted only once an
/// exact sign change brackets it within `tol`. Bisection is the fallback.
pub fn refine_root(p: &UniPoly, iv: &RootInterval, tol: f64) -> Result<f64> {
    if !(tol > 0.0 && tol.is_finite()) {
        return Err(Error::InvalidTolerance(tol));
    }
    let dp = p.derivative();
    let half_tol = from_f64(tol / 2.0);
    let two = BigRational::from_integer(2.into());
    let s_lo = p.sign_at(&iv.lo);
    let (mut lo, mut hi) = (iv.lo.clone(), iv.hi.clone());
    if p.sign_at(&hi) == s_lo {
        // Endpoint root would violate isolation; treat as plain bisection target.
        return Ok(to_f64(&((&lo + &hi) / &two)));
    }
    let brackets = |x: &BigRational| {
        let a = x - &half_tol;
        let b = x + &half_tol;
        let sa = p.sign_at(&a);
        let sb = p.sign_at(&b);
        sa == Ordering::Equal || sb == Ordering::Equal || sa != sb
    };
    for _ in 0..10_000 {
        let width = &hi - &lo;
        let mid = (&lo + &hi) / &two;
        if width <= &half_tol * &two {
            return Ok(to_f64(&mid));
        }
        // Newton step from the midpoint in floating point.
        let x0 = to_f64(&mid);
        let (f, df) = (p.eval_f64(x0), dp.eval_f64(x0));
        if f.is_finite() && df.is_finite() && df != 0.0 {
            let x1 = x0 - f / df;
            let (flo, fhi) = (to_f64(&lo), to_f64(&hi));
            if x1.is_finite() && x1 > flo && x1 < fhi {
                let xr = from_f64(x1);
                if brackets(&xr) {
                    return Ok(x1);
                }
            }
        }
        match p.sign_at(&mid) {
            Ordering::Equal => return Ok(to_f64(&mid)),
            s if s == s_lo => lo = mid,
            _ => hi = mid,
        }
    }
    Ok(to_f64(&((&lo + &hi) / &two)))
}

/// All real roots of a squarefree polynomial to within `tol`.
pub fn real_roots(p: &UniPoly, tol: f64) -> Result<Vec<f64>> {
    isolate_real_roots(p)?
        .iter()
        .map(|iv| refine_root(p, iv, tol))
        .collect()
}

/// Scale-free residual `|p(x)| / sum |a_k| |x|^k`, useful for printed data.
pub fn relative_residual(p: &UniPoly, x: f64) -> f64 {
    let mut num = 0.0;
    let mut den = 0.0;
    let mut xp = 1.0;
    for c in p.coeffs() {
        let c = c.to_f64().unwrap_or(f64::NAN);
        num += c * xp;
        den += c.abs() * xp.abs();
        xp *= x;
    }
    if den == 0.0 {
        0.0
    } else {
        num.abs() / den
    }
}

#[allow(dead_code)]
fn integer(x: i64) -> BigRational {
    BigRational::from_integer(BigInt::from(x))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn p(c: &[i64]) -> UniPoly {
        UniPoly::from_i64s(c)
    }

    #[test]
    fn sqrt_two() {
        let q = p(&[-2, 0, 1]);
        let ivs = isolate_real_roots(&q).unwrap();
        assert_eq!(ivs.len(), 2);
        assert!(ivs[0].contains(-2f64.sqrt()));
        assert!(ivs[1].contains(2f64.sqrt()));
        let iv = RootInterval { lo: integer(1), hi: integer(2), multiplicity_free: true };
        let r = refine_root(&q, &iv, 1e-12).unwrap();
        assert!((r - 2f64.sqrt()).abs() < 1e-12);
        assert!(matches!(refine_root(&q, &iv, 0.0), Err(Error::InvalidTolerance(_))));
    }

    #[test]
    fn no_real_roots() {
        assert!(isolate_real_roots(&p(&[1, 0, 1])).unwrap().is_empty());
    }

    #[test]
    fn quartic_eliminant() {
        // Two real roots; the other pair is complex near 1.64 ± 0.46i.
        let q = p(&[-2, 6, -2, -2, 1]);
        let ivs = isolate_real_roots(&q).unwrap();
        assert_eq!(ivs.len(), 2);
        let roots = real_roots(&q, 1e-12).unwrap();
        let in_unit: Vec<f64> = roots.iter().copied().filter(|r| *r > 0.0 && *r < 1.0).collect();
        assert_eq!(in_unit.len(), 1);
        assert!((in_unit[0] - 0.4060952085).abs() < 1e-9);
        assert!((roots[0] + 1.69173951).abs() < 1e-8);
    }

    #[test]
    fn rational_root_on_split_point() {
        // Roots at 0 and 1/2 land on dyadic bisection points.
        let q = &p(&[0, 1]) * &p(&[-1, 2]);
        let roots = real_roots(&q, 1e-12).unwrap();
        assert_eq!(roots.len(), 2);
        assert!(roots[0].abs() < 1e-12 && (roots[1] - 0.5).abs() < 1e-12);
    }

    #[test]
    fn rejects_repeated_roots() {
        assert!(matches!(isolate_real_roots(&p(&[1, -2, 1])), Err(Error::NotSquarefree)));
    }

    fn grid_count(q: &UniPoly) -> usize {
        // Distinct integer roots: check exactly, plus sign changes between them.
        let mut count = 0;
        for k in -200..=200 {
            let x = BigRational::new(k.into(), 20.into());
            let y = BigRational::new((k + 1).into(), 20.into());
            let (sx, sy) = (q.sign_at(&x), q.sign_at(&y));
            if sx == Ordering::Equal || (sy != Ordering::Equal && sx != sy) {
                count += 1;
            }
        }
        count
    }

    proptest! {
        #[test]
        fn sturm_matches_grid_scan(roots in prop::collection::btree_set(-80i64..=80, 1..=6), lc in 1i64..=4) {
            // Roots k/8 (distinct) lie on or between grid points spaced 1/20.
            let q = roots.iter().fold(p(&[lc]), |acc, &r| &acc * &p(&[-r, 8]));
            let n = isolate_real_roots(&q).unwrap().len();
            prop_assert_eq!(n, roots.len());
            let sturm = SturmSequence::new(&q);
            let b = root_bound(&q);
            prop_assert_eq!(sturm.count(&-b.clone(), &b), roots.len());
            // Grid spacing 1/20 < 1/8, so every root gets its own cell.
            prop_assert_eq!(grid_count(&q), roots.len());
        }

        #[test]
        fn refine_backward_error(roots in prop::collection::btree_set(-30i64..=30, 1..=5), shift in 1i64..=6) {
            // Irrational roots: x^2 - shift times distinct linear factors.
            let mut q = p(&[-shift, 0, 1]);
            if (shift as f64).sqrt().fract() == 0.0 {
                q = p(&[-2 * shift - 1, 0, 2]);
            }
            let q = roots.iter().fold(q, |acc, &r| &acc * &p(&[-r, 7]));
            let tol = 1e-10;
            let dq = q.derivative();
            for iv in isolate_real_roots(&q).unwrap() {
                let r = refine_root(&q, &iv, tol).unwrap();
                // Exact evaluation so the bound measures the root, not rounding.
                let x = from_f64(r);
                let lhs = to_f64(&q.eval_rational(&x)).abs();
                let rhs = to_f64(&dq.eval_rational(&x)).abs() * tol * 2.0;
                prop_assert!(lhs <= rhs, "root {} residual {} bound {}", r, lhs, rhs);
            }
        }
    }
}
