//! Locating maximal-order exceptional points.
//!
//! The condition system is eliminated down to one coupling with resultants,
//! the real roots of the eliminant are isolated exactly, and every root is
//! completed to a full coupling vector by numeric back-substitution followed
//! by Newton polishing on the original conditions. Roots that do not
//! complete to a certified real solution are discarded.

use std::fmt;
use std::str::FromStr;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;

use crate::charpoly::ep_conditions;
use crate::polyalg::{real_roots, resultant, MultiPoly, UniPoly, COUPLING_NAMES};
use crate::spectral::aberth_roots;
use crate::{CouplingVector, Error, Result};

/// Residual bound on every condition for a certified solution.
pub const CERT_TOL: f64 = 1e-9;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Policy {
    /// All couplings positive and strictly decreasing from the outermost
    /// site inward.
    Monotone,
    /// Every real solution, reported with the eliminated-to coupling positive.
    All,
}

impl FromStr for Policy {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s {
            "monotone" => Ok(Self::Monotone),
            "all" => Ok(Self::All),
            other => Err(format!("unknown policy {other:?} (expected monotone or all)")),
        }
    }
}

impl fmt::Display for Policy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::Monotone => "monotone",
            Self::All => "all",
        })
    }
}

#[derive(Clone, Debug)]
pub struct EPSolution {
    pub n: usize,
    pub couplings: CouplingVector,
    /// Squarefree eliminant the solution was projected from; `None` for
    /// purely numeric solutions.
    pub eliminant: Option<UniPoly>,
    pub eliminant_var: usize,
    pub condition_residuals: Vec<f64>,
    pub selection_policy: Policy,
}

impl EPSolution {
    pub fn eliminant_text(&self) -> Option<String> {
        self.eliminant
            .as_ref()
            .map(|p| p.to_text(COUPLING_NAMES[self.eliminant_var]))
    }

    pub fn max_residual(&self) -> f64 {
        self.condition_residuals.iter().copied().fold(0.0, f64::max)
    }

    pub fn to_json(&self) -> serde_json::Value {
        serde_json::json!({
            "n": self.n,
            "couplings": self.couplings.values(),
            "eliminant_text": self.eliminant_text(),
            "residuals": self.condition_residuals,
        })
    }
}

/// Result of a resultant chain.
#[derive(Clone, Debug)]
pub struct Elimination {
    pub keep_var: usize,
    pub order: Vec<usize>,
    /// `levels[k]` is the system after eliminating `order[..k]`.
    pub levels: Vec<Vec<MultiPoly>>,
    pub eliminant: UniPoly,
}

/// Eliminate every variable except `keep_var`, in ascending index order.
pub fn default_order(nvars: usize, keep_var: usize) -> Vec<usize> {
    (0..nvars).filter(|&v| v != keep_var).collect()
}

fn depends_on(p: &MultiPoly, v: usize) -> bool {
    p.degree_in(v).unwrap_or(0) > 0
}

pub fn eliminate_with_order(conds: &[MultiPoly], keep_var: usize, order: &[usize]) -> Result<Elimination> {
    let fail = || Error::EliminationFailure { order: order.to_vec() };
    let Some(first) = conds.first() else {
        return Err(fail());
    };
    let nvars = first.nvars();
    if conds.iter().any(|p| p.nvars() != nvars) {
        return Err(Error::NvarsMismatch(nvars, conds.iter().map(MultiPoly::nvars).find(|&k| k != nvars).unwrap()));
    }
    if conds.len() != order.len() + 1 || keep_var >= nvars || order.contains(&keep_var) {
        return Err(Error::InvalidElimination {
            var: keep_var,
            reason: format!("{} equations cannot be reduced to one by eliminating {:?}", conds.len(), order),
        });
    }
    let mut levels = vec![conds.iter().map(MultiPoly::primitive).collect::<Vec<_>>()];
    for &v in order {
        let cur = levels.last().unwrap();
        let (with, without): (Vec<&MultiPoly>, Vec<&MultiPoly>) = cur.iter().partition(|p| depends_on(p, v));
        let pivot_idx = (0..with.len())
            .min_by_key(|&i| (with[i].degree_in(v), with[i].num_terms()))
            .ok_or_else(fail)?;
        let pivot = with[pivot_idx];
        let mut next: Vec<MultiPoly> = without.into_iter().cloned().collect();
        let others: Vec<&MultiPoly> = with
            .iter()
            .enumerate()
            .filter(|&(i, _)| i != pivot_idx)
            .map(|(_, p)| *p)
            .collect();
        let res: Vec<Result<MultiPoly>> = others.par_iter().map(|q| resultant(pivot, q, v)).collect();
        for r in res {
            let r = r?;
            if r.is_zero() {
                return Err(fail());
            }
            next.push(r.primitive());
        }
        levels.push(next);
    }
    let last = levels.last().unwrap();
    let mut uni: Option<UniPoly> = None;
    for p in last {
        let u = p.to_unipoly(keep_var)?;
        uni = Some(match uni {
            None => u,
            Some(g) => {
                let h = g.gcd(&u);
                if h.degree().unwrap_or(0) > 0 {
                    h
                } else {
                    g
                }
            }
        });
    }
    let u = uni.ok_or_else(fail)?;
    if u.is_zero() || u.degree() == Some(0) {
        return Err(fail());
    }
    let eliminant = u.squarefree()?;
    Ok(Elimination {
        keep_var,
        order: order.to_vec(),
        levels,
        eliminant,
    })
}

/// Squarefree univariate eliminant of a square system in `keep_var`.
pub fn eliminate_system(conds: &[MultiPoly], keep_var: usize) -> Result<UniPoly> {
    let nvars = conds.first().map(MultiPoly::nvars).unwrap_or(0);
    eliminate_with_order(conds, keep_var, &default_order(nvars, keep_var)).map(|e| e.eliminant)
}

/// Numeric coefficients of `p` in `var` with every other variable fixed.
fn univariate_at(p: &MultiPoly, var: usize, point: &[f64]) -> Vec<Complex64> {
    p.coeffs_in(var)
        .iter()
        .map(|c| Complex64::new(c.eval_f64(point), 0.0))
        .collect()
}

fn relative_value(p: &MultiPoly, point: &[f64]) -> f64 {
    let mut num = 0.0;
    let mut den = 0.0;
    for (e, c) in p.terms() {
        let mut t = num_traits::ToPrimitive::to_f64(c).unwrap_or(f64::NAN);
        for (x, &k) in point.iter().zip(e) {
            t *= x.powi(k as i32);
        }
        num += t;
        den += t.abs();
    }
    if den == 0.0 {
        0.0
    } else {
        num.abs() / den
    }
}

/// Residuals `|p_i(x)|` of the conditions at `x`.
pub fn residuals(conds: &[MultiPoly], x: &[f64]) -> Vec<f64> {
    conds.iter().map(|p| p.eval_f64(x).abs()).collect()
}

/// Newton iteration on a square polynomial system.
pub fn newton(conds: &[MultiPoly], initial: &[f64], tol: f64, max_iter: usize) -> Result<Vec<f64>> {
    let m = initial.len();
    let jac: Vec<Vec<MultiPoly>> = conds.iter().map(|p| (0..m).map(|v| p.derivative(v)).collect()).collect();
    let mut x = initial.to_vec();
    let mut res = f64::INFINITY;
    for iteration in 0..max_iter {
        let f = DVector::from_iterator(m, conds.iter().map(|p| p.eval_f64(&x)));
        res = f.amax();
        if !res.is_finite() {
            break;
        }
        if res <= tol {
            // One more step tightens the last digits when it helps.
            if let Some(step) = newton_step(&jac, &x, &f) {
                let y: Vec<f64> = x.iter().zip(step.iter()).map(|(a, d)| a - d).collect();
                if residuals(conds, &y).iter().copied().fold(0.0, f64::max) < res {
                    x = y;
                }
            }
            return Ok(x);
        }
        let step = newton_step(&jac, &x, &f).ok_or(Error::SingularJacobian { iteration })?;
        for (xi, d) in x.iter_mut().zip(step.iter()) {
            *xi -= d;
        }
    }
    Err(Error::Divergence {
        iterations: max_iter,
        residual: res,
    })
}

fn newton_step(jac: &[Vec<MultiPoly>], x: &[f64], f: &DVector<f64>) -> Option<DVector<f64>> {
    let m = x.len();
    let j = DMatrix::from_fn(m, m, |i, k| jac[i][k].eval_f64(x));
    let lu = j.lu();
    let step = lu.solve(f)?;
    step.iter().all(|v| v.is_finite()).then_some(step)
}

/// Newton solve of the EPN conditions from `initial`.
pub fn solve_ep_newton(n: usize, initial: &CouplingVector) -> Result<EPSolution> {
    if initial.n() != n {
        return Err(Error::InvalidCouplings(format!(
            "initial guess has dimension {}, expected {n}",
            initial.n()
        )));
    }
    let conds = ep_conditions(n)?;
    let x = newton(&conds, initial.values(), 1e-12, 100)?;
    Ok(EPSolution {
        n,
        condition_residuals: residuals(&conds, &x),
        couplings: CouplingVector::new(n, x)?,
        eliminant: None,
        eliminant_var: 0,
        selection_policy: Policy::All,
    })
}

const REAL_TOL: f64 = 1e-6;

fn near_real_roots(coeffs: &[Complex64]) -> Vec<f64> {
    match aberth_roots(coeffs) {
        Ok(rs) => rs
            .into_iter()
            .filter(|z| z.im.abs() <= REAL_TOL * z.norm().max(1.0) * 1e2)
            .map(|z| z.re)
            .collect(),
        Err(_) => Vec::new(),
    }
}

/// Complete `root` of the eliminant to full real solutions.
pub fn back_substitute_with(elim: &Elimination, conds: &[MultiPoly], n: usize, root: f64) -> Result<Vec<CouplingVector>> {
    let nvars = conds[0].nvars();
    let mut partial: Vec<Vec<f64>> = vec![{
        let mut x = vec![0.0; nvars];
        x[elim.keep_var] = root;
        x
    }];
    for k in (0..elim.order.len()).rev() {
        let v = elim.order[k];
        let level = &elim.levels[k];
        let mut next = Vec::new();
        for x in &partial {
            let solvers: Vec<&MultiPoly> = level.iter().filter(|p| depends_on(p, v)).collect();
            let Some(solver) = solvers.iter().min_by_key(|p| (p.degree_in(v), p.num_terms())) else {
                continue;
            };
            for r in near_real_roots(&univariate_at(solver, v, x)) {
                let mut y = x.clone();
                y[v] = r;
                // Loose screen: the numeric coefficients may carry rounding.
                if solvers.iter().all(|p| relative_value(p, &y) <= 1e-4) {
                    next.push(y);
                }
            }
        }
        partial = next;
    }
    let mut out: Vec<Vec<f64>> = Vec::new();
    for x in partial {
        let Ok(y) = newton(conds, &x, 1e-12, 50) else {
            continue;
        };
        if (y[elim.keep_var] - root).abs() > 1e-6 * root.abs().max(1.0) {
            continue;
        }
        if residuals(conds, &y).iter().any(|&r| r > CERT_TOL) {
            continue;
        }
        if out.iter().any(|z| z.iter().zip(&y).all(|(a, b)| (a - b).abs() <= 1e-8)) {
            continue;
        }
        out.push(y);
    }
    sort_lex(&mut out);
    out.into_iter().map(|x| CouplingVector::new(n, x)).collect()
}

/// Real completions of `root` (value of `keep_var`) to solutions of `conds`.
pub fn back_substitute(n: usize, conds: &[MultiPoly], keep_var: usize, root: f64) -> Result<Vec<CouplingVector>> {
    let nvars = conds.first().map(MultiPoly::nvars).unwrap_or(0);
    if nvars == 1 {
        let r = residuals(conds, &[root]);
        return Ok(if r.iter().all(|&x| x <= CERT_TOL) {
            vec![CouplingVector::new(n, vec![root])?]
        } else {
            Vec::new()
        });
    }
    let elim = eliminate_with_order(conds, keep_var, &default_order(nvars, keep_var))?;
    back_substitute_with(&elim, conds, n, root)
}

fn sort_lex(v: &mut [Vec<f64>]) {
    v.sort_by(|a, b| {
        a.iter()
            .zip(b)
            .map(|(x, y)| x.total_cmp(y))
            .find(|o| o.is_ne())
            .unwrap_or(std::cmp::Ordering::Equal)
    });
}

fn is_monotone(c: &CouplingVector) -> bool {
    c.values().windows(2).all(|w| w[0] > w[1]) && c.values().last().is_some_and(|&v| v > 0.0)
}

/// Keep variable used for the eliminant: `B` when there are at least two
/// couplings, otherwise `A`.
pub fn keep_var_for(n: usize) -> usize {
    usize::from(n / 2 >= 2)
}

/// Every real EPN coupling vector allowed by `policy`, sorted.
pub fn find_ep(n: usize, policy: Policy) -> Result<Vec<EPSolution>> {
    let conds = ep_conditions(n)?;
    let nvars = n / 2;
    let keep = keep_var_for(n);
    let (eliminant, candidates) = if nvars == 1 {
        let u = conds[0].to_unipoly(0)?.squarefree()?;
        let roots = real_roots(&u, 1e-14)?;
        let cands: Vec<Vec<f64>> = roots
            .into_iter()
            .filter_map(|r| newton(&conds, &[r], 1e-12, 20).ok())
            .collect();
        (u, cands)
    } else {
        let elim = eliminate_with_order(&conds, keep, &default_order(nvars, keep))?;
        let roots = real_roots(&elim.eliminant, 1e-14)?;
        let per_root: Vec<Result<Vec<CouplingVector>>> = roots
            .par_iter()
            .map(|&r| back_substitute_with(&elim, &conds, n, r))
            .collect();
        let mut cands = Vec::new();
        for r in per_root {
            cands.extend(r?.into_iter().map(|c| c.values().to_vec()));
        }
        (elim.eliminant, cands)
    };
    let mut sols: Vec<Vec<f64>> = Vec::new();
    for mut x in candidates {
        // One representative per sign orbit: the kept coupling positive.
        if x[keep] < 0.0 {
            x.iter_mut().for_each(|v| *v = -*v);
        }
        if x[keep] <= 0.0 {
            continue;
        }
        if residuals(&conds, &x).iter().any(|&r| r > CERT_TOL) {
            continue;
        }
        if sols.iter().any(|z| z.iter().zip(&x).all(|(a, b)| (a - b).abs() <= 1e-8)) {
            continue;
        }
        sols.push(x);
    }
    sort_lex(&mut sols);
    let mut out = Vec::new();
    for x in sols {
        let couplings = CouplingVector::new(n, x)?;
        if policy == Policy::Monotone && !is_monotone(&couplings) {
            continue;
        }
        out.push(EPSolution {
            n,
            condition_residuals: residuals(&conds, couplings.values()),
            couplings,
            eliminant: Some(eliminant.clone()),
            eliminant_var: keep,
            selection_policy: policy,
        });
    }
    if out.is_empty() {
        return Err(Error::NotFound { n });
    }
    Ok(out)
}
