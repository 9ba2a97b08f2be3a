use num_bigint::BigInt;
use num_traits::{One, Zero};

use super::MultiPoly;
use crate::{Error, Result};

type Coeffs = Vec<MultiPoly>;

fn degree(p: &[MultiPoly]) -> Option<usize> {
    p.iter().rposition(|c| !c.is_zero())
}

fn trim(mut p: Coeffs) -> Coeffs {
    while p.last().is_some_and(MultiPoly::is_zero) {
        p.pop();
    }
    p
}

fn pseudo_rem(a: &[MultiPoly], b: &[MultiPoly]) -> Coeffs {
    let db = degree(b).expect("nonzero divisor");
    let da = degree(a).expect("nonzero dividend");
    let lc = &b[db];
    let mut r: Coeffs = a.to_vec();
    let mut steps = 0;
    while let Some(dr) = degree(&r) {
        if dr < db {
            break;
        }
        let lead = r[dr].clone();
        let shift = dr - db;
        let mut next: Coeffs = r.iter().map(|c| c * lc).collect();
        for (k, c) in b.iter().enumerate() {
            next[k + shift] = &next[k + shift] - &(&lead * c);
        }
        r = trim(next);
        steps += 1;
    }
    let missing = da + 1 - db - steps;
    if missing > 0 {
        let f = lc.pow(missing as u32);
        r = r.iter().map(|c| c * &f).collect();
    }
    trim(r)
}

fn div_all(p: &[MultiPoly], d: &MultiPoly) -> Coeffs {
    if d.is_one() {
        return p.to_vec();
    }
    p.iter()
        .map(|c| c.exact_div(d).expect("subresultant division is exact"))
        .collect()
}

fn exact(a: &MultiPoly, d: &MultiPoly) -> MultiPoly {
    a.exact_div(d).expect("subresultant division is exact")
}

/// Resultant of `p` and `q` with respect to `var`, by the subresultant
/// pseudo-remainder sequence.
///
/// The result has the same `nvars` and no longer depends on `var`.
pub fn resultant(p: &MultiPoly, q: &MultiPoly, var: usize) -> Result<MultiPoly> {
    if p.nvars() != q.nvars() {
        return Err(Error::NvarsMismatch(p.nvars(), q.nvars()));
    }
    let nvars = p.nvars();
    if var >= nvars {
        return Err(Error::InvalidElimination {
            var,
            reason: format!("variable index out of range for {nvars} variables"),
        });
    }
    for f in [p, q] {
        if f.degree_in(var).unwrap_or(0) == 0 {
            return Err(Error::InvalidElimination {
                var,
                reason: "input has degree 0 in the eliminated variable".into(),
            });
        }
    }
    let mut a = p.coeffs_in(var);
    let mut b = q.coeffs_in(var);
    let mut s = BigInt::one();
    if degree(&a) < degree(&b) {
        if degree(&a).unwrap() % 2 == 1 && degree(&b).unwrap() % 2 == 1 {
            s = -s;
        }
        std::mem::swap(&mut a, &mut b);
    }

    let ca = content(&a);
    let cb = content(&b);
    let a_deg = degree(&a).unwrap() as u32;
    let b_deg = degree(&b).unwrap() as u32;
    let t = num_traits::pow(ca.clone(), b_deg as usize) * num_traits::pow(cb.clone(), a_deg as usize);
    a = div_all(&a, &MultiPoly::constant(nvars, ca));
    b = div_all(&b, &MultiPoly::constant(nvars, cb));

    let mut g = MultiPoly::one(nvars);
    let mut h = MultiPoly::one(nvars);
    loop {
        let da = degree(&a).unwrap();
        let db = degree(&b).unwrap();
        let delta = (da - db) as u32;
        if da % 2 == 1 && db % 2 == 1 {
            s = -s;
        }
        let r = pseudo_rem(&a, &b);
        let divisor = &g * &h.pow(delta);
        a = b;
        b = div_all(&r, &divisor);
        g = a[degree(&a).unwrap()].clone();
        h = match delta {
            0 => h,
            1 => g.clone(),
            _ => exact(&g.pow(delta), &h.pow(delta - 1)),
        };
        match degree(&b) {
            None => return Ok(MultiPoly::zero(nvars)),
            Some(0) => {
                let da = degree(&a).unwrap() as u32;
                let last = exact(&b[0].pow(da), &h.pow(da - 1));
                return Ok(last.scale(&(s * t)));
            }
            Some(_) => {}
        }
    }
}

fn content(p: &[MultiPoly]) -> BigInt {
    use num_integer::Integer;
    let g = p
        .iter()
        .filter(|c| !c.is_zero())
        .fold(BigInt::zero(), |g, c| g.gcd(&c.content()));
    if g.is_zero() {
        BigInt::one()
    } else {
        g
    }
}
