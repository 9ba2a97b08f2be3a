use std::collections::BTreeMap;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use num_bigint::BigInt;
use num_complex::Complex64;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use super::UniPoly;
use crate::{Error, Result};

/// Default variable names: couplings are `A, B, C, …`.
pub const COUPLING_NAMES: [&str; 8] = ["A", "B", "C", "D", "F", "G", "K", "L"];

/// Sparse multivariate polynomial over the integers.
///
/// Terms are keyed by exponent tuples of length `nvars`; the map never holds a
/// zero coefficient, so structural equality is polynomial equality.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct MultiPoly {
    nvars: usize,
    terms: BTreeMap<Vec<u32>, BigInt>,
}

impl MultiPoly {
    pub fn zero(nvars: usize) -> Self {
        Self {
            nvars,
            terms: BTreeMap::new(),
        }
    }

    pub fn one(nvars: usize) -> Self {
        Self::constant(nvars, 1)
    }

    pub fn constant(nvars: usize, c: impl Into<BigInt>) -> Self {
        let mut p = Self::zero(nvars);
        p.add_term(vec![0; nvars], c.into());
        p
    }

    /// The polynomial `x_var`.
    pub fn var(nvars: usize, var: usize) -> Self {
        assert!(var < nvars, "variable {var} out of range for {nvars} variables");
        let mut exps = vec![0; nvars];
        exps[var] = 1;
        Self::monomial(exps, 1)
    }

    pub fn monomial(exps: Vec<u32>, c: impl Into<BigInt>) -> Self {
        let mut p = Self::zero(exps.len());
        p.add_term(exps, c.into());
        p
    }

    pub fn from_terms<I, C>(nvars: usize, terms: I) -> Result<Self>
    where
        I: IntoIterator<Item = (Vec<u32>, C)>,
        C: Into<BigInt>,
    {
        let mut p = Self::zero(nvars);
        for (exps, c) in terms {
            if exps.len() != nvars {
                return Err(Error::NvarsMismatch(nvars, exps.len()));
            }
            p.add_term(exps, c.into());
        }
        Ok(p)
    }

    pub fn nvars(&self) -> usize {
        self.nvars
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn is_one(&self) -> bool {
        self.terms.len() == 1 && self.coefficient(&vec![0; self.nvars]).is_one()
    }

    pub fn num_terms(&self) -> usize {
        self.terms.len()
    }

    pub fn terms(&self) -> impl Iterator<Item = (&[u32], &BigInt)> {
        self.terms.iter().map(|(e, c)| (e.as_slice(), c))
    }

    pub fn coefficient(&self, exps: &[u32]) -> BigInt {
        self.terms.get(exps).cloned().unwrap_or_default()
    }

    fn add_term(&mut self, exps: Vec<u32>, c: BigInt) {
        if c.is_zero() {
            return;
        }
        match self.terms.entry(exps) {
            std::collections::btree_map::Entry::Vacant(v) => {
                v.insert(c);
            }
            std::collections::btree_map::Entry::Occupied(mut o) => {
                *o.get_mut() += c;
                if o.get().is_zero() {
                    o.remove();
                }
            }
        }
    }

    /// Degree in `var`; `None` for the zero polynomial.
    pub fn degree_in(&self, var: usize) -> Option<u32> {
        self.terms.keys().map(|e| e[var]).max()
    }

    pub fn total_degree(&self) -> Option<u32> {
        self.terms.keys().map(|e| e.iter().sum()).max()
    }

    /// Variables that actually occur.
    pub fn support(&self) -> Vec<usize> {
        (0..self.nvars)
            .filter(|&v| self.terms.keys().any(|e| e[v] > 0))
            .collect()
    }

    fn check(&self, other: &Self) -> Result<()> {
        if self.nvars != other.nvars {
            Err(Error::NvarsMismatch(self.nvars, other.nvars))
        } else {
            Ok(())
        }
    }

    pub fn checked_add(&self, other: &Self) -> Result<Self> {
        self.check(other)?;
        Ok(self + other)
    }

    pub fn checked_sub(&self, other: &Self) -> Result<Self> {
        self.check(other)?;
        Ok(self - other)
    }

    pub fn checked_mul(&self, other: &Self) -> Result<Self> {
        self.check(other)?;
        Ok(self * other)
    }

    pub fn scale(&self, c: &BigInt) -> Self {
        if c.is_zero() {
            return Self::zero(self.nvars);
        }
        Self {
            nvars: self.nvars,
            terms: self.terms.iter().map(|(e, v)| (e.clone(), v * c)).collect(),
        }
    }

    pub fn pow(&self, k: u32) -> Self {
        let mut base = self.clone();
        let mut acc = Self::one(self.nvars);
        let mut k = k;
        while k > 0 {
            if k & 1 == 1 {
                acc = &acc * &base;
            }
            k >>= 1;
            if k > 0 {
                base = &base * &base;
            }
        }
        acc
    }

    /// Coefficients of `self` viewed as a polynomial in `var`, lowest power
    /// first. The returned coefficients have degree 0 in `var`.
    pub fn coeffs_in(&self, var: usize) -> Vec<MultiPoly> {
        let deg = match self.degree_in(var) {
            Some(d) => d as usize,
            None => return Vec::new(),
        };
        let mut out = vec![Self::zero(self.nvars); deg + 1];
        for (e, c) in &self.terms {
            let k = e[var] as usize;
            let mut e2 = e.clone();
            e2[var] = 0;
            out[k].terms.insert(e2, c.clone());
        }
        out
    }

    /// Inverse of [`coeffs_in`](Self::coeffs_in).
    pub fn from_coeffs_in(nvars: usize, var: usize, coeffs: &[MultiPoly]) -> Self {
        let mut p = Self::zero(nvars);
        for (k, c) in coeffs.iter().enumerate() {
            for (e, v) in &c.terms {
                let mut e2 = e.clone();
                e2[var] += k as u32;
                p.add_term(e2, v.clone());
            }
        }
        p
    }

    /// Replace `var` by `value`, a polynomial free of `var`.
    pub fn substitute(&self, var: usize, value: &MultiPoly) -> Result<Self> {
        self.check(value)?;
        if var >= self.nvars {
            return Err(Error::InvalidElimination {
                var,
                reason: format!("only {} variables", self.nvars),
            });
        }
        if value.degree_in(var).unwrap_or(0) > 0 {
            return Err(Error::InvalidElimination {
                var,
                reason: "substituted value depends on the variable itself".into(),
            });
        }
        let coeffs = self.coeffs_in(var);
        let mut acc = Self::zero(self.nvars);
        for c in coeffs.iter().rev() {
            acc = &(&acc * value) + c;
        }
        Ok(acc)
    }

    /// `p(…, var = r, …) · den(r)^deg_var(p)`, an integer polynomial free of `var`.
    pub fn substitute_rational(&self, var: usize, r: &BigRational) -> Self {
        let coeffs = self.coeffs_in(var);
        if coeffs.is_empty() {
            return Self::zero(self.nvars);
        }
        let (num, den) = (r.numer(), r.denom());
        // Homogenised Horner: sum_k c_k num^k den^(deg-k).
        let mut acc = Self::zero(self.nvars);
        let mut den_pow = BigInt::one();
        for c in coeffs.iter().rev() {
            acc = &acc.scale(num) + &c.scale(&den_pow);
            den_pow = &den_pow * den;
        }
        acc
    }

    pub fn derivative(&self, var: usize) -> Self {
        let mut p = Self::zero(self.nvars);
        for (e, c) in &self.terms {
            if e[var] > 0 {
                let mut e2 = e.clone();
                e2[var] -= 1;
                p.add_term(e2, c * BigInt::from(e[var]));
            }
        }
        p
    }

    pub fn eval_f64(&self, x: &[f64]) -> f64 {
        assert_eq!(x.len(), self.nvars, "point dimension mismatch");
        self.terms
            .iter()
            .map(|(e, c)| {
                let m: f64 = e.iter().zip(x).map(|(&k, &v)| v.powi(k as i32)).product();
                c.to_f64().unwrap_or(f64::NAN) * m
            })
            .sum()
    }

    pub fn eval_complex(&self, x: &[Complex64]) -> Complex64 {
        assert_eq!(x.len(), self.nvars, "point dimension mismatch");
        self.terms
            .iter()
            .map(|(e, c)| {
                let m: Complex64 = e.iter().zip(x).map(|(&k, &v)| v.powu(k)).product();
                m * c.to_f64().unwrap_or(f64::NAN)
            })
            .sum()
    }

    /// gcd of the integer coefficients, signed like the lex-leading term.
    pub fn content(&self) -> BigInt {
        let mut g = BigInt::zero();
        for c in self.terms.values() {
            g = g.gcd(c);
            if g.is_one() {
                break;
            }
        }
        match self.leading_term() {
            Some((_, c)) if c.is_negative() => -g,
            _ => g,
        }
    }

    /// Divide out the integer content; the lex-leading coefficient becomes positive.
    pub fn primitive(&self) -> Self {
        let g = self.content();
        if g.is_zero() {
            return self.clone();
        }
        Self {
            nvars: self.nvars,
            terms: self.terms.iter().map(|(e, c)| (e.clone(), c / &g)).collect(),
        }
    }

    pub fn leading_term(&self) -> Option<(&Vec<u32>, &BigInt)> {
        self.terms.last_key_value()
    }

    /// Exact quotient `self / d`, or `None` if `d` does not divide `self`.
    pub fn exact_div(&self, d: &MultiPoly) -> Option<Self> {
        if d.is_zero() || self.nvars != d.nvars {
            return None;
        }
        let (de, dc) = d.leading_term()?;
        let (de, dc) = (de.clone(), dc.clone());
        let mut rem = self.clone();
        let mut quot = Self::zero(self.nvars);
        while let Some((re, rc)) = rem.leading_term() {
            if re.iter().zip(&de).any(|(a, b)| a < b) {
                return None;
            }
            let (q, r) = rc.div_rem(&dc);
            if !r.is_zero() {
                return None;
            }
            let qe: Vec<u32> = re.iter().zip(&de).map(|(a, b)| a - b).collect();
            let t = Self::monomial(qe, q);
            rem = &rem - &(&t * d);
            quot = &quot + &t;
        }
        Some(quot)
    }

    /// Convert to a univariate polynomial in `var`; fails if another variable occurs.
    pub fn to_unipoly(&self, var: usize) -> Result<UniPoly> {
        if self.support().iter().any(|&v| v != var) {
            return Err(Error::InvalidElimination {
                var,
                reason: "polynomial still depends on other variables".into(),
            });
        }
        let coeffs = self.coeffs_in(var);
        Ok(UniPoly::new(
            coeffs.iter().map(|c| c.coefficient(&vec![0; self.nvars])).collect(),
        ))
    }

    pub fn from_unipoly(nvars: usize, var: usize, p: &UniPoly) -> Self {
        let mut out = Self::zero(nvars);
        for (k, c) in p.coeffs().iter().enumerate() {
            let mut e = vec![0; nvars];
            e[var] = k as u32;
            out.add_term(e, c.clone());
        }
        out
    }

    /// Canonical text: terms by descending total degree, then descending
    /// exponents, e.g. `A^2*B^2-A^2+2*A*B+1`.
    pub fn to_text(&self, names: &[&str]) -> String {
        assert!(names.len() >= self.nvars, "not enough variable names");
        if self.is_zero() {
            return "0".to_string();
        }
        let mut ordered: Vec<_> = self.terms.iter().collect();
        ordered.sort_by(|(a, _), (b, _)| {
            let (da, db) = (a.iter().sum::<u32>(), b.iter().sum::<u32>());
            db.cmp(&da).then_with(|| b.cmp(a))
        });
        let mut out = String::new();
        for (i, (e, c)) in ordered.into_iter().enumerate() {
            let mono: Vec<String> = e
                .iter()
                .enumerate()
                .filter(|(_, &k)| k > 0)
                .map(|(v, &k)| {
                    if k == 1 {
                        names[v].to_string()
                    } else {
                        format!("{}^{}", names[v], k)
                    }
                })
                .collect();
            let neg = c.is_negative();
            let mag = c.abs();
            if neg {
                out.push('-');
            } else if i > 0 {
                out.push('+');
            }
            if mono.is_empty() {
                out.push_str(&mag.to_string());
            } else {
                if !mag.is_one() {
                    out.push_str(&mag.to_string());
                    out.push('*');
                }
                out.push_str(&mono.join("*"));
            }
        }
        out
    }
}

impl fmt::Display for MultiPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let names: Vec<String> = (0..self.nvars)
            .map(|v| {
                COUPLING_NAMES
                    .get(v)
                    .map(|s| s.to_string())
                    .unwrap_or_else(|| format!("x{v}"))
            })
            .collect();
        let refs: Vec<&str> = names.iter().map(String::as_str).collect();
        f.write_str(&self.to_text(&refs))
    }
}

impl fmt::Debug for MultiPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "MultiPoly[{}]({})", self.nvars, self)
    }
}

impl Add for &MultiPoly {
    type Output = MultiPoly;

    fn add(self, rhs: &MultiPoly) -> MultiPoly {
        assert_eq!(self.nvars, rhs.nvars, "nvars mismatch");
        let mut out = self.clone();
        for (e, c) in &rhs.terms {
            out.add_term(e.clone(), c.clone());
        }
        out
    }
}

impl Sub for &MultiPoly {
    type Output = MultiPoly;

    fn sub(self, rhs: &MultiPoly) -> MultiPoly {
        assert_eq!(self.nvars, rhs.nvars, "nvars mismatch");
        let mut out = self.clone();
        for (e, c) in &rhs.terms {
            out.add_term(e.clone(), -c);
        }
        out
    }
}

impl Neg for &MultiPoly {
    type Output = MultiPoly;

    fn neg(self) -> MultiPoly {
        MultiPoly {
            nvars: self.nvars,
            terms: self.terms.iter().map(|(e, c)| (e.clone(), -c)).collect(),
        }
    }
}

impl Mul for &MultiPoly {
    type Output = MultiPoly;

    fn mul(self, rhs: &MultiPoly) -> MultiPoly {
        assert_eq!(self.nvars, rhs.nvars, "nvars mismatch");
        let mut out = MultiPoly::zero(self.nvars);
        for (ea, ca) in &self.terms {
            for (eb, cb) in &rhs.terms {
                let e: Vec<u32> = ea.iter().zip(eb).map(|(a, b)| a + b).collect();
                out.add_term(e, ca * cb);
            }
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn a() -> MultiPoly {
        MultiPoly::var(2, 0)
    }
    fn b() -> MultiPoly {
        MultiPoly::var(2, 1)
    }
    fn k(c: i64) -> MultiPoly {
        MultiPoly::constant(2, c)
    }

    #[test]
    fn ring_identity_and_text() {
        let p = &(&a().pow(2) + &b().pow(2)) - &k(3);
        assert_eq!(&p * &k(1), p);
        assert_eq!(p.to_string(), "A^2+B^2-3");
        let q = &(&(&k(1) + &(&k(2) * &(&a() * &b()))) - &a().pow(2)) + &(&a().pow(2) * &b().pow(2));
        assert_eq!(q.to_string(), "A^2*B^2-A^2+2*A*B+1");
        assert_eq!(MultiPoly::zero(2).to_string(), "0");
    }

    #[test]
    fn substitution() {
        let q = &(&(&k(1) + &(&k(2) * &(&a() * &b()))) - &a().pow(2)) + &(&a().pow(2) * &b().pow(2));
        assert_eq!(q.substitute(1, &MultiPoly::zero(2)).unwrap(), &k(1) - &a().pow(2));
        // E^4 + b E^2 with b = -3 + A^2 + B^2, then A = B = 0.
        let e = MultiPoly::var(3, 0);
        let bb = &(&MultiPoly::var(3, 1).pow(2) + &MultiPoly::var(3, 2).pow(2)) - &MultiPoly::constant(3, 3);
        let sec = &e.pow(2).pow(2) + &(&bb * &e.pow(2));
        let at0 = sec
            .substitute(1, &MultiPoly::zero(3))
            .unwrap()
            .substitute(2, &MultiPoly::zero(3))
            .unwrap();
        assert_eq!(at0.to_text(&["E", "A", "B"]), "E^4-3*E^2");
        assert!(q.substitute(0, &a()).is_err());
        assert!(q.substitute(0, &MultiPoly::zero(3)).is_err());
    }

    #[test]
    fn rational_substitution_clears_denominators() {
        let p = &(&a().pow(2) + &b()) - &k(3);
        let r = BigRational::new(1.into(), 2.into());
        // (1/4 + B - 3) * 4 = 4B - 11
        let s = p.substitute_rational(0, &r);
        assert_eq!(s.to_string(), "4*B-11");
    }

    #[test]
    fn exact_division() {
        let f = &(&a() - &b()) * &(&a().pow(2) + &k(3));
        assert_eq!(f.exact_div(&(&a() - &b())).unwrap(), &a().pow(2) + &k(3));
        assert!(f.exact_div(&(&a() + &b())).is_none());
        assert!(f.scale(&3.into()).exact_div(&k(2)).is_none());
    }

    #[test]
    fn nvars_mismatch() {
        assert!(matches!(a().checked_add(&MultiPoly::var(3, 0)), Err(Error::NvarsMismatch(2, 3))));
        assert!(MultiPoly::from_terms(2, [(vec![1u32], 1)]).is_err());
    }

    #[test]
    fn evaluation() {
        let p = &(&a().pow(2) * &b()) - &k(2);
        assert_eq!(p.eval_f64(&[3.0, 2.0]), 16.0);
        let z = p.eval_complex(&[Complex64::new(0.0, 1.0), Complex64::new(1.0, 0.0)]);
        assert_eq!(z, Complex64::new(-3.0, 0.0));
        assert_eq!(p.derivative(0), (&a() * &b()).scale(&2.into()));
    }

    fn small_poly() -> impl Strategy<Value = MultiPoly> {
        prop::collection::vec(((0u32..3, 0u32..3, 0u32..2), -5i64..=5), 0..6).prop_map(|ts| {
            MultiPoly::from_terms(3, ts.into_iter().map(|((x, y, z), c)| (vec![x, y, z], c))).unwrap()
        })
    }

    proptest! {
        #[test]
        fn ring_axioms(p in small_poly(), q in small_poly(), r in small_poly()) {
            prop_assert_eq!(&(&p * &q) * &r, &p * &(&q * &r));
            prop_assert_eq!(&p * &(&q + &r), &(&p * &q) + &(&p * &r));
            prop_assert_eq!(&(&p + &q) + &r, &p + &(&q + &r));
            prop_assert_eq!(&p * &q, &q * &p);
            prop_assert!((&p - &p).is_zero());
            if !q.is_zero() {
                prop_assert_eq!((&p * &q).exact_div(&q).unwrap(), p.clone());
            }
            prop_assert!(p.terms().all(|(e, c)| e.len() == 3 && !c.is_zero()));
        }
    }
}
