use std::cmp::Ordering;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Serialize, Serializer};

use crate::{Error, Result};

/// Dense univariate polynomial with integer coefficients, lowest degree first.
#[derive(Clone, PartialEq, Eq, Hash, Default)]
pub struct UniPoly {
    coeffs: Vec<BigInt>,
}

impl UniPoly {
    pub fn new(mut coeffs: Vec<BigInt>) -> Self {
        while coeffs.last().is_some_and(Zero::is_zero) {
            coeffs.pop();
        }
        Self { coeffs }
    }

    pub fn from_i64s(coeffs: &[i64]) -> Self {
        Self::new(coeffs.iter().map(|&c| BigInt::from(c)).collect())
    }

    pub fn zero() -> Self {
        Self { coeffs: Vec::new() }
    }

    /// `x - r`.
    pub fn linear_root(r: i64) -> Self {
        Self::from_i64s(&[-r, 1])
    }

    pub fn coeffs(&self) -> &[BigInt] {
        &self.coeffs
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn degree(&self) -> Option<usize> {
        self.coeffs.len().checked_sub(1)
    }

    pub fn lc(&self) -> BigInt {
        self.coeffs.last().cloned().unwrap_or_default()
    }

    pub fn scale(&self, c: &BigInt) -> Self {
        Self::new(self.coeffs.iter().map(|x| x * c).collect())
    }

    pub fn derivative(&self) -> Self {
        Self::new(
            self.coeffs
                .iter()
                .enumerate()
                .skip(1)
                .map(|(k, c)| c * BigInt::from(k))
                .collect(),
        )
    }

    /// `p(-x)`.
    pub fn mirror(&self) -> Self {
        Self::new(
            self.coeffs
                .iter()
                .enumerate()
                .map(|(k, c)| if k % 2 == 1 { -c } else { c.clone() })
                .collect(),
        )
    }

    pub fn content(&self) -> BigInt {
        self.coeffs.iter().fold(BigInt::zero(), |g, c| g.gcd(c))
    }

    /// Content removed, leading coefficient positive.
    pub fn primitive_part(&self) -> Self {
        if self.is_zero() {
            return self.clone();
        }
        let mut g = self.content();
        if self.lc().is_negative() {
            g = -g;
        }
        Self::new(self.coeffs.iter().map(|c| c / &g).collect())
    }

    /// `lc(d)^(deg self - deg d + 1) · self mod d`.
    pub fn pseudo_rem(&self, d: &UniPoly) -> Self {
        let dd = d.degree().expect("pseudo-remainder by the zero polynomial");
        let mut r = self.clone();
        let Some(ds) = self.degree() else {
            return r;
        };
        if ds < dd {
            return r;
        }
        let lc = d.lc();
        let mut steps = 0u32;
        while let Some(dr) = r.degree() {
            if dr < dd {
                break;
            }
            let lead = r.lc();
            let shift = dr - dd;
            let mut next: Vec<BigInt> = r.coeffs.iter().map(|c| c * &lc).collect();
            for (k, c) in d.coeffs.iter().enumerate() {
                next[k + shift] -= &lead * c;
            }
            r = Self::new(next);
            steps += 1;
        }
        let missing = (ds - dd + 1) as u32 - steps;
        if missing > 0 {
            r = r.scale(&num_traits::pow(lc, missing as usize));
        }
        r
    }

    /// Quotient when `d` divides `self` exactly over the integers.
    pub fn div_exact(&self, d: &UniPoly) -> Option<Self> {
        let dd = d.degree()?;
        let mut r = self.coeffs.clone();
        let Some(ds) = self.degree() else {
            return Some(Self::zero());
        };
        if ds < dd {
            return None;
        }
        let lc = d.lc();
        let mut q = vec![BigInt::zero(); ds - dd + 1];
        for k in (0..=ds - dd).rev() {
            let (qk, rem) = r[k + dd].div_rem(&lc);
            if !rem.is_zero() {
                return None;
            }
            for (j, c) in d.coeffs.iter().enumerate() {
                r[k + j] -= &qk * c;
            }
            q[k] = qk;
        }
        if r.iter().all(Zero::is_zero) {
            Some(Self::new(q))
        } else {
            None
        }
    }

    pub fn divides(&self, other: &UniPoly) -> bool {
        other.div_exact(self).is_some()
    }

    /// Greatest common divisor via the primitive PRS, positive leading coefficient.
    pub fn gcd(&self, other: &UniPoly) -> Self {
        if self.is_zero() {
            return other.primitive_part();
        }
        if other.is_zero() {
            return self.primitive_part();
        }
        let cont = self.content().gcd(&other.content());
        let (mut a, mut b) = (self.primitive_part(), other.primitive_part());
        if a.degree() < b.degree() {
            std::mem::swap(&mut a, &mut b);
        }
        while !b.is_zero() {
            let r = a.pseudo_rem(&b);
            a = b;
            b = r.primitive_part();
        }
        a.primitive_part().scale(&cont)
    }

    pub fn is_squarefree(&self) -> bool {
        !self.is_zero() && self.gcd(&self.derivative()).degree() == Some(0)
    }

    /// Product of the distinct irreducible factors: content removed,
    /// positive leading coefficient.
    pub fn squarefree(&self) -> Result<Self> {
        if self.is_zero() {
            return Err(Error::ZeroPolynomial);
        }
        let p = self.primitive_part();
        if p.degree() == Some(0) {
            return Ok(Self::from_i64s(&[1]));
        }
        let g = p.gcd(&p.derivative()).primitive_part();
        Ok(p
            .div_exact(&g)
            .expect("gcd divides the polynomial")
            .primitive_part())
    }

    pub fn eval_f64(&self, x: f64) -> f64 {
        self.coeffs
            .iter()
            .rev()
            .fold(0.0, |acc, c| acc * x + c.to_f64().unwrap_or(f64::NAN))
    }

    pub fn eval_rational(&self, x: &BigRational) -> BigRational {
        self.coeffs.iter().rev().fold(BigRational::zero(), |acc, c| {
            acc * x + BigRational::from_integer(c.clone())
        })
    }

    /// Sign of `p(x)` without building rational intermediates.
    pub fn sign_at(&self, x: &BigRational) -> Ordering {
        let (num, den) = (x.numer(), x.denom());
        let mut acc = BigInt::zero();
        let mut den_pow = BigInt::one();
        for c in self.coeffs.iter().rev() {
            acc = acc * num + c * &den_pow;
            den_pow *= den;
        }
        // den > 0 always for a normalized ratio.
        acc.sign_cmp()
    }

    /// Canonical descending text, e.g. `B^4-2*B^3-2*B^2+6*B-2`.
    pub fn to_text(&self, var: &str) -> String {
        if self.is_zero() {
            return "0".to_string();
        }
        let mut out = String::new();
        for (k, c) in self.coeffs.iter().enumerate().rev() {
            if c.is_zero() {
                continue;
            }
            if c.is_negative() {
                out.push('-');
            } else if !out.is_empty() {
                out.push('+');
            }
            let mag = c.abs();
            match k {
                0 => out.push_str(&mag.to_string()),
                _ => {
                    if !mag.is_one() {
                        out.push_str(&mag.to_string());
                        out.push('*');
                    }
                    out.push_str(var);
                    if k > 1 {
                        out.push('^');
                        out.push_str(&k.to_string());
                    }
                }
            }
        }
        out
    }

    /// Parse the canonical text form produced by [`to_text`](Self::to_text).
    pub fn parse(text: &str, var: &str) -> Result<Self> {
        let bad = |why: &str| Error::InvalidCouplings(format!("cannot parse polynomial {text:?}: {why}"));
        let cleaned: String = text.chars().filter(|c| !c.is_whitespace()).collect();
        let mut coeffs: Vec<BigInt> = Vec::new();
        let mut terms = Vec::new();
        let mut start = 0;
        for (i, ch) in cleaned.char_indices() {
            if (ch == '+' || ch == '-') && i > 0 {
                terms.push(&cleaned[start..i]);
                start = i;
            }
        }
        terms.push(&cleaned[start..]);
        for term in terms {
            let (neg, body) = match term.strip_prefix('-') {
                Some(rest) => (true, rest),
                None => (false, term.strip_prefix('+').unwrap_or(term)),
            };
            if body.is_empty() {
                return Err(bad("empty term"));
            }
            let (coef, power) = match body.find(var) {
                None => (body.parse::<BigInt>().map_err(|_| bad("bad constant"))?, 0usize),
                Some(pos) => {
                    let head = &body[..pos];
                    let coef = if head.is_empty() {
                        BigInt::one()
                    } else {
                        head.strip_suffix('*')
                            .ok_or_else(|| bad("missing '*'"))?
                            .parse::<BigInt>()
                            .map_err(|_| bad("bad coefficient"))?
                    };
                    let tail = &body[pos + var.len()..];
                    let power = if tail.is_empty() {
                        1
                    } else {
                        tail.strip_prefix('^')
                            .ok_or_else(|| bad("missing '^'"))?
                            .parse::<usize>()
                            .map_err(|_| bad("bad exponent"))?
                    };
                    (coef, power)
                }
            };
            if coeffs.len() <= power {
                coeffs.resize(power + 1, BigInt::zero());
            }
            coeffs[power] += if neg { -coef } else { coef };
        }
        Ok(Self::new(coeffs))
    }
}

trait SignCmp {
    fn sign_cmp(&self) -> Ordering;
}

impl SignCmp for BigInt {
    fn sign_cmp(&self) -> Ordering {
        if self.is_positive() {
            Ordering::Greater
        } else if self.is_negative() {
            Ordering::Less
        } else {
            Ordering::Equal
        }
    }
}

impl fmt::Display for UniPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_text("x"))
    }
}

impl fmt::Debug for UniPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "UniPoly({})", self)
    }
}

impl Serialize for UniPoly {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let strs: Vec<String> = self.coeffs.iter().map(|c| c.to_string()).collect();
        strs.serialize(s)
    }
}

impl Add for &UniPoly {
    type Output = UniPoly;

    fn add(self, rhs: &UniPoly) -> UniPoly {
        let n = self.coeffs.len().max(rhs.coeffs.len());
        UniPoly::new(
            (0..n)
                .map(|k| {
                    self.coeffs.get(k).cloned().unwrap_or_default()
                        + rhs.coeffs.get(k).cloned().unwrap_or_default()
                })
                .collect(),
        )
    }
}

impl Neg for &UniPoly {
    type Output = UniPoly;

    fn neg(self) -> UniPoly {
        UniPoly::new(self.coeffs.iter().map(|c| -c).collect())
    }
}

impl Sub for &UniPoly {
    type Output = UniPoly;

    fn sub(self, rhs: &UniPoly) -> UniPoly {
        self + &(-rhs)
    }
}

impl Mul for &UniPoly {
    type Output = UniPoly;

    fn mul(self, rhs: &UniPoly) -> UniPoly {
        if self.is_zero() || rhs.is_zero() {
            return UniPoly::zero();
        }
        let mut out = vec![BigInt::zero(); self.coeffs.len() + rhs.coeffs.len() - 1];
        for (i, a) in self.coeffs.iter().enumerate() {
            for (j, b) in rhs.coeffs.iter().enumerate() {
                out[i + j] += a * b;
            }
        }
        UniPoly::new(out)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p(c: &[i64]) -> UniPoly {
        UniPoly::from_i64s(c)
    }

    #[test]
    fn squarefree_examples() {
        let f = &(&UniPoly::linear_root(1) * &UniPoly::linear_root(1)) * &UniPoly::linear_root(-2);
        assert_eq!(f.squarefree().unwrap(), &UniPoly::linear_root(1) * &UniPoly::linear_root(-2));
        let ep4 = p(&[-2, 6, -2, -2, 1]);
        assert!(ep4.is_squarefree());
        assert_eq!(ep4.squarefree().unwrap(), ep4);
        assert_eq!(p(&[4, -8, 4]).squarefree().unwrap(), p(&[-1, 1]));
        assert_eq!(p(&[-4, 8, -4]).squarefree().unwrap(), p(&[-1, 1]));
        assert!(matches!(UniPoly::zero().squarefree(), Err(Error::ZeroPolynomial)));
    }

    #[test]
    fn text_round_trip() {
        let ep4 = p(&[-2, 6, -2, -2, 1]);
        assert_eq!(ep4.to_text("B"), "B^4-2*B^3-2*B^2+6*B-2");
        assert_eq!(UniPoly::parse("B^4-2*B^3-2*B^2+6*B-2", "B").unwrap(), ep4);
        assert_eq!(UniPoly::parse("-B+1", "B").unwrap(), p(&[1, -1]));
        assert!(UniPoly::parse("B^^2", "B").is_err());
    }

    #[test]
    fn gcd_and_division() {
        let a = &p(&[-1, 1]) * &p(&[3, 0, 1]);
        let b = &p(&[-1, 1]) * &p(&[5, 2]);
        assert_eq!(a.gcd(&b), p(&[-1, 1]));
        assert_eq!(a.div_exact(&p(&[-1, 1])).unwrap(), p(&[3, 0, 1]));
        assert!(a.div_exact(&p(&[1, 1])).is_none());
        assert!(p(&[-1, 1]).divides(&a));
    }

    #[test]
    fn mirror_and_signs() {
        let f = p(&[5, 6, -4, -2, 1]);
        assert_eq!(f.mirror(), p(&[5, -6, -4, 2, 1]));
        let x = BigRational::new(1.into(), 3.into());
        assert_eq!(p(&[-1, 3]).sign_at(&x), Ordering::Equal);
        assert_eq!(p(&[-1, 2]).sign_at(&x), Ordering::Less);
        assert_eq!(f.eval_rational(&BigRational::from_integer(2.into())), BigRational::from_integer(1.into()));
    }

    #[test]
    fn pseudo_remainder_matches_definition() {
        let a = p(&[1, 2, 3, 4]);
        let b = p(&[1, 0, 2]);
        // prem = lc(b)^(3-2+1) a mod b; check lc^2 a - q b = r with deg r < 2.
        let r = a.pseudo_rem(&b);
        assert!(r.degree().unwrap() < 2);
        let lhs = &a.scale(&BigInt::from(4)) - &r;
        assert!(b.divides(&lhs));
    }
}
