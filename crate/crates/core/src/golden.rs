//! Golden reference suite: the published EP couplings, eliminants, transition
//! matrices, metric closed forms and domain geometry, each checked at a fixed
//! tolerance.

use std::time::{Duration, Instant};

use num_complex::Complex64;
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};
use serde::Serialize;

use crate::charpoly::ep_conditions;
use crate::domain::{
    bisect_boundary, classify_point, n4_inequalities, scan_grid, track_corridor_root, ScanSpec,
};
use crate::ep_finder::{eliminate_system, find_ep, Policy};
use crate::jordan::{jordan_block, jordan_chain, verify_similarity};
use crate::metric::{
    family_n3_eigenvalues, metric_eigs_n3_closed_form, metric_family_n2, metric_family_n3,
    metric_from_left_eigenvectors, metric_s_n3_ep_limit, metric_s_n3_eigenvalues, t_max,
    hermitian_eigenvalues, TimeParameter,
};
use crate::model::{build_hamiltonian, check_pt_symmetry};
use crate::polyalg::{isolate_real_roots, real_roots, UniPoly};
use crate::spectral::{eigenvalues, Classification, Tolerances};
use crate::{ComplexMatrix, CouplingVector, Result};

/// Printed four-site eliminant factor.
pub const N4_FACTOR: &str = "B^4-2*B^3-2*B^2+6*B-2";

/// Printed six-site eliminant.
pub const P6: &str = "B^23-2*B^22-20*B^21+32*B^20+188*B^19-216*B^18-1060*B^17+768*B^16\
+3782*B^15-1308*B^14-8492*B^13+16*B^12+11164*B^11+4008*B^10-6668*B^9-7072*B^8-703*B^7\
+5678*B^6+2320*B^5-1200*B^4-1248*B^3-96*B^2+160*B+32";

/// Printed six-site roots of `P6` in `(0, 1)`.
pub const P6_ROOTS: [f64; 2] = [0.8635733388, 0.4333101655];

/// Three-decimal table of positive EP couplings for `N = 2…6`.
pub const TABLE: [(usize, &[f64]); 5] = [
    (2, &[1.000]),
    (3, &[1.414]),
    (4, &[1.684, 0.406]),
    (5, &[1.885, 0.608]),
    (6, &[2.046, 0.864, 0.261]),
];

/// Five-site `B` as stated in the running text; the table's `0.608` does not
/// solve the conditions.
pub const B_EP5_TEXT: f64 = 0.6683178062;

pub const A_EP4_TEXT: f64 = 1.683771565;
pub const B_EP4_TEXT: f64 = 0.4060952085;

#[derive(Clone, Debug, Serialize)]
pub struct Check {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

#[derive(Clone, Debug, Serialize)]
pub struct CriterionReport {
    pub id: usize,
    pub title: &'static str,
    pub checks: Vec<Check>,
    pub elapsed: Duration,
    pub budget: Option<Duration>,
}

impl CriterionReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed) && self.budget.is_none_or(|b| self.elapsed <= b)
    }

    pub fn summary(&self) -> String {
        let failed: Vec<&str> = self.checks.iter().filter(|c| !c.passed).map(|c| c.name.as_str()).collect();
        let mut s = format!(
            "criterion {}: {} ({}; {}/{} checks, {:.2?}",
            self.id,
            if self.passed() { "PASS" } else { "FAIL" },
            self.title,
            self.checks.len() - failed.len(),
            self.checks.len(),
            self.elapsed
        );
        if let Some(b) = self.budget {
            s.push_str(&format!(" of {:.0?} budget", b));
        }
        s.push(')');
        if !failed.is_empty() {
            s.push_str(&format!(" failed: {}", failed.join(", ")));
        }
        s
    }
}

struct Checks(Vec<Check>);

impl Checks {
    fn add(&mut self, name: impl Into<String>, passed: bool, detail: impl Into<String>) {
        self.0.push(Check {
            name: name.into(),
            passed,
            detail: detail.into(),
        });
    }

    fn add_result(&mut self, name: &str, r: Result<(bool, String)>) {
        match r {
            Ok((p, d)) => self.add(name, p, d),
            Err(e) => self.add(name, false, format!("error: {e}")),
        }
    }
}

pub const CRITERIA: [(usize, &str); 8] = [
    (1, "table of EP couplings"),
    (2, "eliminant golden tests"),
    (3, "Jordan certification"),
    (4, "three-site metric closed forms"),
    (5, "two- and three-site metric families"),
    (6, "domain geometry"),
    (7, "property suites"),
    (8, "corridor behaviour"),
];

pub fn run_criterion(id: usize) -> Option<CriterionReport> {
    let (_, title) = *CRITERIA.iter().find(|c| c.0 == id)?;
    let start = Instant::now();
    let (checks, budget) = match id {
        1 => (table_checks(), Some(Duration::from_secs(10))),
        2 => (eliminant_checks(), Some(Duration::from_secs(60))),
        3 => (jordan_checks(), None),
        4 => (metric_checks(), None),
        5 => (family_checks(), None),
        6 => (domain_checks(), Some(Duration::from_secs(30))),
        7 => (property_checks(), None),
        _ => (corridor_checks(), None),
    };
    Some(CriterionReport {
        id,
        title,
        checks,
        elapsed: start.elapsed(),
        budget,
    })
}

pub fn run_all() -> Vec<CriterionReport> {
    CRITERIA.iter().filter_map(|&(id, _)| run_criterion(id)).collect()
}

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

fn round3(x: f64) -> f64 {
    (x * 1000.0).round() / 1000.0
}

fn table_checks() -> Vec<Check> {
    let mut ch = Checks(Vec::new());
    for (n, want) in TABLE {
        let got = find_ep(n, Policy::Monotone);
        let sol = match got {
            Ok(v) if v.len() == 1 => v.into_iter().next().unwrap(),
            Ok(v) => {
                ch.add(format!("N={n}"), false, format!("{} monotone solutions", v.len()));
                continue;
            }
            Err(e) => {
                ch.add(format!("N={n}"), false, format!("error: {e}"));
                continue;
            }
        };
        for (k, (&g, &w)) in sol.couplings.values().iter().zip(want).enumerate() {
            let name = format!("N={n} {}", crate::polyalg::COUPLING_NAMES[k]);
            if n == 5 && k == 1 {
                let ok = (g - B_EP5_TEXT).abs() <= 1e-8;
                ch.add(
                    name,
                    ok,
                    format!("{g:.10} vs text value {B_EP5_TEXT} (table prints {w:.3})"),
                );
            } else {
                ch.add(name, round3(g) == w, format!("{g:.10} rounds to {:.3}, table {w:.3}", round3(g)));
            }
        }
        ch.add(
            format!("N={n} residuals"),
            sol.max_residual() <= crate::ep_finder::CERT_TOL,
            format!("{:.2e}", sol.max_residual()),
        );
    }
    ch.0
}

fn eliminant_checks() -> Vec<Check> {
    let mut ch = Checks(Vec::new());
    ch.add_result("N=4 divisibility", (|| {
        let e = eliminate_system(&ep_conditions(4)?, 1)?;
        let f = UniPoly::parse(N4_FACTOR, "B")?;
        Ok((e.is_squarefree() && f.divides(&e), format!("eliminant {}", e.to_text("B"))))
    })());
    ch.add_result("N=6 shares P6 roots in (0,1)", (|| {
        let e = eliminate_system(&ep_conditions(6)?, 1)?;
        let p6 = UniPoly::parse(P6, "B")?;
        let in01 = |p: &UniPoly| -> Result<Vec<f64>> {
            Ok(real_roots(p, 1e-13)?.into_iter().filter(|r| *r > 0.0 && *r < 1.0).collect())
        };
        let (rp, re) = (in01(&p6)?, in01(&e)?);
        let shared = rp.iter().all(|r| re.iter().any(|s| (r - s).abs() <= 1e-10));
        Ok((
            e.is_squarefree() && shared && p6.divides(&e),
            format!(
                "degree {} eliminant, P6 divides it: {}; P6 roots in (0,1) {rp:?}; eliminant roots in (0,1) {re:?}",
                e.degree().unwrap_or(0),
                p6.divides(&e)
            ),
        ))
    })());
    ch.add_result("N=6 printed roots recovered", (|| {
        let sols = find_ep(6, Policy::All)?;
        let bs: Vec<f64> = sols.iter().map(|s| s.couplings.values()[1]).collect();
        let ok = P6_ROOTS.iter().all(|r| bs.iter().any(|b| (b - r).abs() <= 1e-8));
        Ok((ok, format!("B values {bs:?}")))
    })());
    ch.0
}

/// Printed three-site transition matrix at `A = √2`.
pub fn printed_q3() -> ComplexMatrix {
    let s = 2f64.sqrt();
    ComplexMatrix::from_rows(&[
        vec![c(-1.0, 0.0), c(0.0, -s), c(1.0, 0.0)],
        vec![c(0.0, s), c(-1.0, 0.0), c(0.0, 0.0)],
        vec![c(1.0, 0.0), c(0.0, 0.0), c(0.0, 0.0)],
    ])
    .expect("constant matrix")
}

/// Printed ten-digit four-site transition matrix.
pub fn printed_q4() -> ComplexMatrix {
    let z = c(0.0, 0.0);
    ComplexMatrix::from_rows(&[
        vec![c(0.0, 1.0), c(-1.835086683, 0.0), c(0.0, -1.683771565), c(1.0, 0.0)],
        vec![c(1.683771562, 0.0), c(0.0, 2.089866772), c(-1.0, 0.0), z],
        vec![c(0.0, -1.683771565), c(1.0, 0.0), z, z],
        vec![c(-1.0, 0.0), z, z, z],
    ])
    .expect("constant matrix")
}

fn jordan_checks() -> Vec<Check> {
    let mut ch = Checks(Vec::new());
    for n in 2..=6 {
        ch.add_result(&format!("N={n} chain"), (|| {
            let sol = find_ep(n, Policy::Monotone)?.remove(0);
            let t = jordan_chain(&build_hamiltonian(&sol.couplings))?;
            Ok((
                t.order == n && t.similarity_residual <= 1e-6,
                format!("length {}, residual {:.2e}, cond {:.2e}", t.order, t.similarity_residual, t.condition_number),
            ))
        })());
    }
    ch.add_result("printed Q3", (|| {
        let h = build_hamiltonian(&CouplingVector::new(3, vec![2f64.sqrt()])?);
        let r = verify_similarity(&h, &printed_q3())?;
        Ok((r <= 1e-12, format!("{r:.2e}")))
    })());
    ch.add_result("printed Q4", (|| {
        let h = build_hamiltonian(&CouplingVector::new(4, vec![A_EP4_TEXT, B_EP4_TEXT])?);
        let r = verify_similarity(&h, &printed_q4())?;
        Ok((r <= 1e-6, format!("{r:.2e}")))
    })());
    ch.0
}

fn metric_checks() -> Vec<Check> {
    let mut ch = Checks(Vec::new());
    ch.add_result("closed form vs eigenvector metric", (|| {
        let mut worst: f64 = 0.0;
        for k in 0..50 {
            let t = 0.05 + 0.95 * (k + 1) as f64 / 50.0;
            let tp = TimeParameter::new(t)?;
            let m = metric_from_left_eigenvectors(&tp.hamiltonian()?)?;
            let (a, b, d) = metric_eigs_n3_closed_form(tp)?;
            let mut want = [a, b, d];
            want.sort_by(f64::total_cmp);
            for (x, y) in m.eigenvalues.iter().zip(want) {
                worst = worst.max((x - y).abs());
            }
        }
        Ok((worst <= 1e-8, format!("max deviation {worst:.2e} over 50 t")))
    })());
    let tm = t_max();
    ch.add("t_max", (tm - 1.014611872).abs() <= 1e-8, format!("{tm:.12}"));
    ch.add_result("t -> 0 limit", (|| {
        let limit = metric_s_n3_ep_limit();
        let m = metric_from_left_eigenvectors(&TimeParameter::new(1e-4)?.hamiltonian()?)?;
        let d = m.theta.max_abs_diff(&limit);
        let ev = hermitian_eigenvalues(&limit)?;
        let ev_ok = ev[0].abs() <= 1e-12 && ev[1].abs() <= 1e-12 && (ev[2] - 12.0).abs() <= 1e-12;
        let near = [0.0, 0.0, 12.0].iter().zip(&m.eigenvalues).all(|(w, g)| (w - g).abs() <= 1e-6);
        Ok((
            d <= 1e-6 && ev_ok && near,
            format!("entrywise distance {d:.2e} at t = 1e-4; limit eigenvalues {ev:?}; metric eigenvalues {:?}", m.eigenvalues),
        ))
    })());
    ch.add_result("t = 1 eigenvalues", (|| {
        let m = metric_from_left_eigenvectors(&TimeParameter::new(1.0)?.hamiltonian()?)?;
        let ok = [2.0, 4.0, 4.0].iter().zip(&m.eigenvalues).all(|(w, g)| (w - g).abs() <= 1e-10);
        Ok((ok, format!("{:?}", m.eigenvalues)))
    })());
    ch.add_result("ordering swap past t = 1", (|| {
        let mut ok = true;
        for k in 1..20 {
            let t = 1.0 + (tm - 1.0) * k as f64 / 20.0;
            let (a, b, d) = metric_eigs_n3_closed_form(TimeParameter::new(t)?)?;
            ok &= a < d && d < b;
            let ev = metric_s_n3_eigenvalues(t)?;
            ok &= ev.iter().all(|z| z.im.abs() <= 1e-9);
        }
        let (_, b, d) = metric_eigs_n3_closed_form(TimeParameter::new(0.9)?)?;
        ok &= b < d;
        Ok((ok, "theta1 < theta3 < theta2 on (1, t_max), theta2 < theta3 below 1".into()))
    })());
    ch.0
}

fn family_checks() -> Vec<Check> {
    let mut ch = Checks(Vec::new());
    let mut rng = StdRng::seed_from_u64(5);
    ch.add_result("two-site eigenvalues", (|| {
        let mut worst: f64 = 0.0;
        for _ in 0..100 {
            let (a, xi) = (rng.gen_range(-2.0..2.0), rng.gen_range(-2.0..2.0));
            let m = metric_family_n2(a, xi)?;
            let r = (a * a + xi * xi).sqrt();
            worst = worst.max((m.eigenvalues[0] - (1.0 - r)).abs()).max((m.eigenvalues[1] - (1.0 + r)).abs());
        }
        Ok((worst <= 1e-12, format!("max deviation {worst:.2e}")))
    })());
    ch.add_result("three-site zero crossing", (|| {
        let lo_eig = |a: f64| -> Result<f64> { Ok(metric_family_n3(a, 0.0, 0.0)?.eigenvalues[0]) };
        let (mut lo, mut hi) = (0.5, 1.5);
        if !(lo_eig(lo)? > 0.0 && lo_eig(hi)? < 0.0) {
            return Ok((false, "no sign change on [0.5, 1.5]".into()));
        }
        while hi - lo > 1e-13 {
            let mid = 0.5 * (lo + hi);
            if lo_eig(mid)? > 0.0 {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        let a = 0.5 * (lo + hi);
        Ok(((a - 1.0).abs() <= 1e-10, format!("crossing at A = {a:.14}")))
    })());
    let mut rng = StdRng::seed_from_u64(19);
    ch.add_result("three-site triplet formula", (|| {
        let mut worst: f64 = 0.0;
        for _ in 0..100 {
            let a: f64 = rng.gen_range(-2.0..2.0);
            let m = metric_family_n3(a, 0.0, 0.0)?;
            let (x, y, z) = family_n3_eigenvalues(a);
            let mut want = [x, y, z];
            want.sort_by(f64::total_cmp);
            for (g, w) in m.eigenvalues.iter().zip(want) {
                worst = worst.max((g - w).abs());
            }
        }
        Ok((worst <= 1e-10, format!("max deviation {worst:.2e}")))
    })());
    ch.0
}

/// Every real solution of the four-site conditions, both signs.
pub fn ep4_corners() -> Result<Vec<CouplingVector>> {
    let mut out = Vec::new();
    for s in find_ep(4, Policy::All)? {
        out.push(s.couplings.negated());
        out.push(s.couplings);
    }
    Ok(out)
}

fn domain_checks() -> Vec<Check> {
    let mut ch = Checks(Vec::new());
    let tol = Tolerances::default();
    ch.add_result("inequalities vs spectrum", (|| {
        let res = 200;
        let spec = ScanSpec::new(4, vec![(-2.0, 2.0), (-2.0, 2.0)], res, vec![])?;
        let grid = scan_grid(&spec, &tol)?;
        let verdict: Vec<bool> = grid
            .iter()
            .map(|s| n4_inequalities(s.couplings.values()[0], s.couplings.values()[1]).inside())
            .collect();
        let mut agree = 0;
        let mut stray = 0;
        for i in 0..res {
            for j in 0..res {
                let k = i * res + j;
                if verdict[k] == grid[k].inside() {
                    agree += 1;
                    continue;
                }
                let near = (i.saturating_sub(1)..=(i + 1).min(res - 1))
                    .flat_map(|a| (j.saturating_sub(1)..=(j + 1).min(res - 1)).map(move |b| a * res + b))
                    .any(|m| verdict[m] != verdict[k]);
                if !near {
                    stray += 1;
                }
            }
        }
        let frac = agree as f64 / (res * res) as f64;
        Ok((
            frac >= 0.99 && stray == 0,
            format!("agreement {:.4}%, {} disagreements away from the boundary", 100.0 * frac, stray),
        ))
    })());
    ch.add_result("EP4 corners degenerate", (|| {
        let mut pts = vec![
            CouplingVector::new(4, vec![A_EP4_TEXT, B_EP4_TEXT])?,
            CouplingVector::new(4, vec![-A_EP4_TEXT, -B_EP4_TEXT])?,
        ];
        pts.extend(ep4_corners()?);
        let mut ok = pts.len() == 6;
        let mut detail = Vec::new();
        for p in &pts {
            let s = classify_point(p, &tol)?;
            ok &= s.classification == Classification::RealDegenerate;
            detail.push(format!("{:?}: {}", p.values(), s.classification.as_str()));
        }
        Ok((ok, detail.join("; ")))
    })());
    ch.add_result("two-site boundary", (|| {
        let a = bisect_boundary(&CouplingVector::new(2, vec![0.0])?, &CouplingVector::new(2, vec![2.0])?, 1e-12, &tol)?[0];
        let b = bisect_boundary(&CouplingVector::new(2, vec![0.0])?, &CouplingVector::new(2, vec![-2.0])?, 1e-12, &tol)?[0];
        Ok(((a - 1.0).abs() <= 1e-10 && (b + 1.0).abs() <= 1e-10, format!("{a:.13}, {b:.13}")))
    })());
    ch.0
}

/// Random couplings inside the physical domain.
pub fn random_inside(n: usize, rng: &mut impl Rng, tol: &Tolerances) -> Result<CouplingVector> {
    loop {
        let v: Vec<f64> = (0..n / 2).map(|_| rng.gen_range(-0.6..0.6)).collect();
        let c = CouplingVector::new(n, v)?;
        if classify_point(&c, tol)?.inside() {
            return Ok(c);
        }
    }
}

fn property_checks() -> Vec<Check> {
    let mut ch = Checks(Vec::new());
    let tol = Tolerances::default();
    let mut rng = StdRng::seed_from_u64(7);
    ch.add_result("PT symmetry, conjugation, trace", (|| {
        let (mut pt, mut conj, mut trace) = (true, true, true);
        for _ in 0..200 {
            let n = rng.gen_range(2..=10);
            let v: Vec<f64> = (0..n / 2).map(|_| rng.gen_range(-3.0..3.0)).collect();
            let h = build_hamiltonian(&CouplingVector::new(n, v)?);
            pt &= check_pt_symmetry(&h);
            let ev = eigenvalues(&h, &tol)?.eigenvalues;
            let scale = ev.iter().map(|z| z.norm()).fold(1.0, f64::max);
            conj &= ev.iter().all(|z| ev.iter().any(|w| (w - z.conj()).norm() <= 1e-6 * scale));
            trace &= ev.iter().sum::<Complex64>().norm() <= 1e-10 * n as f64;
        }
        Ok((pt && conj && trace, format!("pt {pt}, conjugation {conj}, trace {trace}")))
    })());
    ch.add_result("eigenvector metrics", (|| {
        let (mut worst, mut pd) = (0.0f64, true);
        for n in 2..=6 {
            for _ in 0..20 {
                let m = metric_from_left_eigenvectors(&build_hamiltonian(&random_inside(n, &mut rng, &tol)?))?;
                worst = worst.max(m.quasi_hermiticity_residual);
                pd &= m.positive_definite;
            }
        }
        Ok((worst <= 1e-9 && pd, format!("max residual {worst:.2e}, all positive {pd}")))
    })());
    ch.add_result("Sturm count vs sign scan", (|| {
        let mut ok = true;
        for _ in 0..200 {
            let deg = rng.gen_range(1..=6);
            let mut roots: Vec<i64> = Vec::new();
            while roots.len() < deg {
                let r = rng.gen_range(-6..=6);
                if !roots.contains(&r) {
                    roots.push(r);
                }
            }
            let p = roots
                .iter()
                .fold(UniPoly::from_i64s(&[1]), |acc, &r| &acc * &UniPoly::linear_root(r));
            let sturm = isolate_real_roots(&p)?.len();
            let grid: Vec<f64> = (0..=28).map(|k| -7.25 + 0.5 * k as f64).collect();
            let scan = grid.windows(2).filter(|w| (p.eval_f64(w[0]) > 0.0) != (p.eval_f64(w[1]) > 0.0)).count();
            ok &= sturm == deg && scan == deg;
        }
        Ok((ok, "200 random polynomials with distinct integer roots".into()))
    })());
    ch.add_result("Jordan gauge invariance", (|| {
        let mut worst: f64 = 0.0;
        for n in 2..=6 {
            let sol = find_ep(n, Policy::Monotone)?.remove(0);
            let h = build_hamiltonian(&sol.couplings);
            let q = jordan_chain(&h)?.q;
            let base = verify_similarity(&h, &q)?;
            let j = jordan_block(n);
            for _ in 0..10 {
                let mut g = ComplexMatrix::identity(n);
                let mut jk = ComplexMatrix::identity(n);
                for _ in 1..n {
                    jk = &jk * &j;
                    let t = c(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
                    g = &g + &ComplexMatrix::from_fn(n, |a, b| jk[(a, b)] * t);
                }
                let r = verify_similarity(&h, &(&q * &g))?;
                worst = worst.max((r - base).abs());
            }
        }
        Ok((worst <= 1e-12, format!("max change {worst:.2e}")))
    })());
    ch.0
}

fn corridor_checks() -> Vec<Check> {
    let mut ch = Checks(Vec::new());
    ch.add_result("monotone decrease in beta", (|| {
        let a0 = find_ep(4, Policy::Monotone)?[0].couplings.values()[0];
        let vals: Vec<f64> = (0..20)
            .map(|k| track_corridor_root(0.1 * k as f64 / 19.0, 0.0))
            .collect::<Result<_>>()?;
        let start = (vals[0] - a0).abs() <= 1e-12;
        let dec = vals.windows(2).all(|w| w[1] < w[0]);
        Ok((
            start && dec,
            format!("A({}) = {:.12} .. A(0.1) = {:.12}", 0, vals[0], vals[19]),
        ))
    })());
    ch.0
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn printed_constants_parse() {
        assert_eq!(UniPoly::parse(P6, "B").unwrap().degree(), Some(23));
        assert_eq!(UniPoly::parse(N4_FACTOR, "B").unwrap().degree(), Some(4));
        assert!(run_criterion(9).is_none());
    }

    #[test]
    fn five_site_table_entry_is_not_a_solution() {
        let conds = ep_conditions(5).unwrap();
        let sol = find_ep(5, Policy::Monotone).unwrap().remove(0);
        let at_table = crate::ep_finder::residuals(&conds, &[sol.couplings.values()[0], 0.608]);
        assert!(at_table.iter().any(|r| r.abs() > 0.1));
    }
}
