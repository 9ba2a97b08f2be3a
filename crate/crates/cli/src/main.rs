//! `epnlab` command-line front end.
//!
//! Exit status: 0 on success, 1 when a computation is refused (outside the
//! real-spectrum domain, broken Jordan chain, failed verification), 2 on
//! usage errors.

use std::fs::File;
use std::io::BufWriter;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use num_complex::Complex64;
use serde_json::{json, Value};

use epnlab::domain::{scan_boundary, scan_rows, write_gnuplot, DomainSample, ScanSpec};
use epnlab::emit::{canonical_json, domain_header, domain_row, fmt_num, matrix_table, spectrum_table, write_output, CsvStream, Format, Table};
use epnlab::ep_finder::{find_ep, EPSolution, Policy, CERT_TOL};
use epnlab::jordan::{ep_order, jordan_chain, RANK_TOL};
use epnlab::metric::{
    metric_eigs_n3_closed_form, metric_family_n2, metric_family_n3, metric_from_left_eigenvectors_with,
    metric_s_n3, metric_s_n3_eigenvalues, MetricMatrix, TimeParameter,
};
use epnlab::model::build_hamiltonian;
use epnlab::polyalg::COUPLING_NAMES;
use epnlab::spectral::{eigenvalues, Spectrum, Tolerances};
use epnlab::{golden, ComplexMatrix, CouplingVector, Error};

const COUPLINGS_HELP: &str =
    "Comma-separated couplings, outermost site first: A,B,C,... (n/2 values)";

#[derive(Parser)]
#[command(name = "epnlab", version, about = "Exceptional points of PT-symmetric lattice chains")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Solve the EPN conditions for n sites.
    EpFind(EpFindArgs),
    /// Eigenvalues and their classification.
    Spectrum(SpectrumArgs),
    /// A physical metric for the given Hamiltonian or closed-form family.
    Metric(MetricArgs),
    /// EPN order and Jordan transition matrix at E = 0.
    Jordan(JordanArgs),
    /// Classify a grid of couplings.
    DomainScan(DomainScanArgs),
    /// Run the golden regression suite.
    Verify(VerifyArgs),
}

#[derive(Args)]
struct EpFindArgs {
    #[arg(long)]
    n: usize,
    /// monotone: A > B > ... > 0; all: every real solution with B > 0 (A > 0 for n < 4).
    #[arg(long, default_value = "monotone")]
    policy: Policy,
    /// Largest accepted condition residual.
    #[arg(long, default_value_t = CERT_TOL, value_parser = parse_tol)]
    tol: f64,
    /// json (default), csv or text. Monotone json is one object, `all` an array.
    #[arg(long, default_value = "json")]
    format: Format,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct SpectrumArgs {
    #[arg(long)]
    n: usize,
    #[arg(long, help = COUPLINGS_HELP)]
    couplings: Couplings,
    /// Imaginary-part and gap tolerance of the classification.
    #[arg(long, default_value_t = 1e-8, value_parser = parse_tol)]
    tol: f64,
    #[arg(long, default_value = "text")]
    format: Format,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct MetricArgs {
    /// Site count for the eigenvector construction (with --couplings).
    #[arg(long, requires = "couplings")]
    n: Option<usize>,
    #[arg(long, help = COUPLINGS_HELP, requires = "n", conflicts_with_all = ["t", "family"])]
    couplings: Option<Couplings>,
    /// Three-site time parameter, A = sqrt(2 - 2 t^2). |t| > 1 gives the formal continuation.
    #[arg(long, allow_hyphen_values = true, conflicts_with = "family")]
    t: Option<f64>,
    /// Closed-form family: n2 (needs --a, --xi) or n3 (needs --a, --xi, --eta).
    #[arg(long, requires_all = ["a", "xi"])]
    family: Option<Family>,
    #[arg(long, allow_hyphen_values = true)]
    a: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    xi: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    eta: Option<f64>,
    /// Spectrum tolerance for the eigenvector construction.
    #[arg(long, default_value_t = 1e-8, value_parser = parse_tol)]
    tol: f64,
    #[arg(long, default_value = "text")]
    format: Format,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Clone, Copy, clap::ValueEnum)]
enum Family {
    N2,
    N3,
}

#[derive(Args)]
struct JordanArgs {
    #[arg(long)]
    n: usize,
    #[arg(long, help = COUPLINGS_HELP)]
    couplings: Couplings,
    /// Relative singular-value cutoff for the EP order.
    #[arg(long, default_value_t = RANK_TOL, value_parser = parse_tol)]
    tol: f64,
    #[arg(long, default_value = "text")]
    format: Format,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct DomainScanArgs {
    #[arg(long)]
    n: usize,
    /// One or two "lo:hi" ranges for the leading couplings, e.g. -2:2,-2:2.
    #[arg(long, allow_hyphen_values = true)]
    range: Ranges,
    /// Grid points per axis.
    #[arg(long, default_value_t = 200)]
    res: usize,
    /// Values of the remaining couplings when n/2 exceeds the scanned axes.
    #[arg(long, allow_hyphen_values = true)]
    slice: Option<Couplings>,
    /// Imaginary-part and gap tolerance of the classification.
    #[arg(long, default_value_t = 1e-8, value_parser = parse_tol)]
    tol: f64,
    /// csv (default, streamed) or json.
    #[arg(long, default_value = "csv")]
    format: Format,
    #[arg(long)]
    out: Option<PathBuf>,
    /// Also write the domain boundary as gnuplot segments to this file.
    #[arg(long)]
    boundary: Option<PathBuf>,
}

/// Tolerances are pinned per criterion and not overridable.
#[derive(Args)]
#[group(required = true, multiple = false)]
struct VerifyArgs {
    /// Run every criterion.
    #[arg(long)]
    all: bool,
    /// Run one criterion (1-8).
    #[arg(long, value_parser = clap::value_parser!(u8).range(1..=8))]
    criterion: Option<u8>,
}

#[derive(Clone, Debug)]
struct Couplings(Vec<f64>);

impl std::str::FromStr for Couplings {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        s.split(',')
            .map(|p| {
                let v: f64 = p.trim().parse().map_err(|_| format!("not a number: {p:?}"))?;
                if v.is_finite() {
                    Ok(v)
                } else {
                    Err(format!("not finite: {p:?}"))
                }
            })
            .collect::<Result<_, _>>()
            .map(Couplings)
    }
}

#[derive(Clone, Debug)]
struct Ranges(Vec<(f64, f64)>);

impl std::str::FromStr for Ranges {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        s.split(',')
            .map(|r| {
                let (lo, hi) = r.split_once(':').ok_or_else(|| format!("expected lo:hi, got {r:?}"))?;
                let lo: f64 = lo.trim().parse().map_err(|_| format!("bad bound {lo:?}"))?;
                let hi: f64 = hi.trim().parse().map_err(|_| format!("bad bound {hi:?}"))?;
                Ok((lo, hi))
            })
            .collect::<Result<_, _>>()
            .map(Ranges)
    }
}

fn parse_tol(s: &str) -> Result<f64, String> {
    match s.parse::<f64>() {
        Ok(t) if t > 0.0 && t.is_finite() => Ok(t),
        _ => Err(format!("tolerance must be a positive number, got {s:?}")),
    }
}

enum Failure {
    Usage(String),
    Refused(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::InvalidDimension(_)
            | Error::InvalidCouplings(_)
            | Error::InvalidTolerance(_)
            | Error::SliceRequired { .. }
            | Error::InvalidScan(_) => Failure::Usage(e.to_string()),
            _ => Failure::Refused(e.to_string()),
        }
    }
}

type Outcome = Result<(), Failure>;

fn main() -> ExitCode {
    let cli = Cli::parse();
    let res = match cli.command {
        Command::EpFind(a) => ep_find(a),
        Command::Spectrum(a) => spectrum(a),
        Command::Metric(a) => metric(a),
        Command::Jordan(a) => jordan(a),
        Command::DomainScan(a) => domain_scan(a),
        Command::Verify(a) => verify(a),
    };
    match res {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Refused(msg)) => {
            eprintln!("epnlab: {msg}");
            ExitCode::from(1)
        }
        Err(Failure::Usage(msg)) => {
            eprintln!("epnlab: usage: {msg}");
            ExitCode::from(2)
        }
    }
}

fn couplings(n: usize, c: &Couplings) -> Result<CouplingVector, Failure> {
    Ok(CouplingVector::new(n, c.0.clone())?)
}

fn emit(out: Option<&Path>, content: &str) -> Outcome {
    Ok(write_output(out, content)?)
}

fn to_json(v: &Value) -> Result<String, Failure> {
    Ok(canonical_json(v)?)
}

fn fmt_complex(z: Complex64) -> String {
    let im = if z.im == 0.0 { 0.0 } else { z.im };
    if im < 0.0 {
        format!("{} - {}i", fmt_num(z.re), fmt_num(-im))
    } else {
        format!("{} + {}i", fmt_num(z.re), fmt_num(im))
    }
}

fn complex_json(z: Complex64) -> Value {
    let fold = |x: f64| if x == 0.0 { 0.0 } else { x };
    json!([fold(z.re), fold(z.im)])
}

fn matrix_json(m: &ComplexMatrix) -> Value {
    Value::Array(
        m.rows()
            .into_iter()
            .map(|r| Value::Array(r.into_iter().map(complex_json).collect()))
            .collect(),
    )
}

fn matrix_text(m: &ComplexMatrix) -> String {
    m.rows()
        .into_iter()
        .map(|r| r.into_iter().map(fmt_complex).collect::<Vec<_>>().join("  ") + "\n")
        .collect()
}

fn ep_find(a: EpFindArgs) -> Outcome {
    let sols = find_ep(a.n, a.policy)?;
    if let Some(s) = sols.iter().find(|s| s.max_residual() > a.tol) {
        return Err(Failure::Refused(format!(
            "solution {:?} has residual {:e} above tolerance {:e}",
            s.couplings.values(),
            s.max_residual(),
            a.tol
        )));
    }
    let content = match a.format {
        Format::Json => {
            let v = match (a.policy, sols.as_slice()) {
                (Policy::Monotone, [one]) => one.to_json(),
                _ => Value::Array(sols.iter().map(EPSolution::to_json).collect()),
            };
            to_json(&v)?
        }
        Format::Csv => {
            let m = a.n / 2;
            let mut header = vec!["n"];
            header.extend(&COUPLING_NAMES[..m]);
            header.push("max_residual");
            let mut t = Table::new(&header);
            for s in &sols {
                let mut row = vec![s.n.to_string()];
                row.extend(s.couplings.values().iter().map(|&v| fmt_num(v)));
                row.push(fmt_num(s.max_residual()));
                t.push(row);
            }
            t.to_csv()
        }
        Format::Text => {
            let mut s = String::new();
            for sol in &sols {
                let cs: Vec<String> = sol
                    .couplings
                    .values()
                    .iter()
                    .zip(COUPLING_NAMES)
                    .map(|(v, name)| format!("{name} = {}", fmt_num(*v)))
                    .collect();
                s.push_str(&format!("EP{}: {}  (max residual {:e})\n", sol.n, cs.join(", "), sol.max_residual()));
            }
            if let Some(p) = sols.first().and_then(|s| s.eliminant.as_ref()) {
                let var = COUPLING_NAMES[sols[0].eliminant_var];
                s.push_str(&format!("eliminant in {var}: degree {}\n", p.degree().unwrap_or(0)));
            }
            s
        }
    };
    emit(a.out.as_deref(), &content)
}

fn spectrum_json(n: usize, c: &CouplingVector, s: &Spectrum) -> Value {
    json!({
        "n": n,
        "couplings": c.values(),
        "eigenvalues": s.eigenvalues.iter().map(|&z| complex_json(z)).collect::<Vec<_>>(),
        "classification": s.classification.as_str(),
        "min_gap": s.min_gap,
        "max_imag": s.max_imag,
    })
}

fn spectrum(a: SpectrumArgs) -> Outcome {
    let c = couplings(a.n, &a.couplings)?;
    let tol = Tolerances::new(a.tol, a.tol)?;
    let s = eigenvalues(&build_hamiltonian(&c), &tol)?;
    let content = match a.format {
        Format::Csv => spectrum_table(&s).to_csv(),
        Format::Json => to_json(&spectrum_json(a.n, &c, &s))?,
        Format::Text => {
            let mut t: String = s.eigenvalues.iter().map(|&z| fmt_complex(z) + "\n").collect();
            t.push_str(&format!(
                "classification: {} (min gap {:e}, max |Im| {:e})\n",
                s.classification.as_str(),
                s.min_gap,
                s.max_imag
            ));
            t
        }
    };
    emit(a.out.as_deref(), &content)
}

/// Metric output: the matrix, its eigenvalues, and optional extras.
struct MetricReport {
    theta: ComplexMatrix,
    eigenvalues: Vec<Complex64>,
    positive_definite: bool,
    quasi_hermiticity_residual: Option<f64>,
    closed_form: Option<(f64, f64, f64)>,
    continued: bool,
}

impl From<MetricMatrix> for MetricReport {
    fn from(m: MetricMatrix) -> Self {
        Self {
            eigenvalues: m.eigenvalues.iter().map(|&x| Complex64::new(x, 0.0)).collect(),
            positive_definite: m.positive_definite,
            quasi_hermiticity_residual: Some(m.quasi_hermiticity_residual),
            closed_form: None,
            continued: false,
            theta: m.theta,
        }
    }
}

fn metric_report(a: &MetricArgs) -> Result<MetricReport, Failure> {
    let tol = Tolerances::new(a.tol, a.tol)?;
    if let Some(family) = a.family {
        let (av, xi) = (a.a.unwrap_or_default(), a.xi.unwrap_or_default());
        let m = match family {
            Family::N2 => metric_family_n2(av, xi)?,
            Family::N3 => {
                let eta = a.eta.ok_or_else(|| Failure::Usage("--family n3 needs --eta".into()))?;
                metric_family_n3(av, xi, eta)?
            }
        };
        return Ok(m.into());
    }
    if let Some(t) = a.t {
        let tp = TimeParameter::new(t)?;
        let closed_form = metric_eigs_n3_closed_form(tp).ok();
        if t.abs() > 1.0 {
            return Ok(MetricReport {
                theta: metric_s_n3(t),
                eigenvalues: metric_s_n3_eigenvalues(t)?,
                positive_definite: false,
                quasi_hermiticity_residual: None,
                closed_form,
                continued: true,
            });
        }
        let mut r: MetricReport = metric_from_left_eigenvectors_with(&tp.hamiltonian()?, &tol)?.into();
        r.closed_form = closed_form;
        return Ok(r);
    }
    match (a.n, &a.couplings) {
        (Some(n), Some(c)) => {
            let h = build_hamiltonian(&couplings(n, c)?);
            Ok(metric_from_left_eigenvectors_with(&h, &tol)?.into())
        }
        _ => Err(Failure::Usage("metric needs --n with --couplings, --t, or --family".into())),
    }
}

fn metric(a: MetricArgs) -> Outcome {
    let r = metric_report(&a)?;
    let content = match a.format {
        Format::Csv => {
            let mut t = Table::new(&["kind", "i", "j", "re", "im"]);
            for row in matrix_table(&r.theta).rows {
                let mut full = vec!["theta".to_string()];
                full.extend(row);
                t.push(full);
            }
            for (k, z) in r.eigenvalues.iter().enumerate() {
                t.push(vec!["eigenvalue".into(), k.to_string(), String::new(), fmt_num(z.re), fmt_num(z.im)]);
            }
            t.to_csv()
        }
        Format::Json => to_json(&json!({
            "theta": matrix_json(&r.theta),
            "eigenvalues": r.eigenvalues.iter().map(|&z| complex_json(z)).collect::<Vec<_>>(),
            "positive_definite": r.positive_definite,
            "quasi_hermiticity_residual": r.quasi_hermiticity_residual,
            "closed_form_eigenvalues": r.closed_form.map(|(x, y, z)| vec![x, y, z]),
            "continued": r.continued,
        }))?,
        Format::Text => {
            let mut s = String::from("theta:\n");
            s.push_str(&matrix_text(&r.theta));
            s.push_str("eigenvalues:\n");
            for &z in &r.eigenvalues {
                s.push_str(&format!("  {}\n", fmt_complex(z)));
            }
            if let Some((x, y, z)) = r.closed_form {
                s.push_str(&format!("closed form: {} {} {}\n", fmt_num(x), fmt_num(y), fmt_num(z)));
            }
            s.push_str(&format!("positive definite: {}\n", r.positive_definite));
            if let Some(q) = r.quasi_hermiticity_residual {
                s.push_str(&format!("quasi-Hermiticity residual: {q:e}\n"));
            }
            if r.continued {
                s.push_str("note: |t| > 1, formal continuation (not Hermitian)\n");
            }
            s
        }
    };
    emit(a.out.as_deref(), &content)
}

fn jordan(a: JordanArgs) -> Outcome {
    let h = build_hamiltonian(&couplings(a.n, &a.couplings)?);
    let order = ep_order(&h, a.tol)?;
    let t = match jordan_chain(&h) {
        Ok(t) => t,
        Err(e) => return Err(Failure::Refused(format!("{e} (EP order {order} at tolerance {:e})", a.tol))),
    };
    let content = match a.format {
        Format::Csv => matrix_table(&t.q).to_csv(),
        Format::Json => to_json(&json!({
            "ep_order": order,
            "q": matrix_json(&t.q),
            "similarity_residual": t.similarity_residual,
            "condition_number": t.condition_number,
        }))?,
        Format::Text => format!(
            "EP order: {order}\nQ:\n{}similarity residual: {:e}\ncondition number: {:e}\n",
            matrix_text(&t.q),
            t.similarity_residual,
            t.condition_number
        ),
    };
    emit(a.out.as_deref(), &content)
}

fn domain_scan(a: DomainScanArgs) -> Outcome {
    let slice = a.slice.map(|s| s.0).unwrap_or_default();
    let spec = ScanSpec::new(a.n, a.range.0, a.res, slice)?;
    if spec.ranges.len() != 2 && a.boundary.is_some() {
        return Err(Failure::Usage("--boundary needs two scanned couplings".into()));
    }
    let tol = Tolerances::new(a.tol, a.tol)?;
    let keep = a.boundary.is_some() || a.format == Format::Json;
    let mut samples: Vec<DomainSample> = Vec::new();
    match a.format {
        Format::Csv => {
            let mut csv = CsvStream::create(a.out.as_deref(), &domain_header(a.n / 2))?;
            scan_rows(&spec, &tol, |_, row| {
                for s in &row {
                    csv.line(&domain_row(s))?;
                }
                if keep {
                    samples.extend(row);
                }
                Ok(())
            })?;
            csv.finish()?;
        }
        Format::Json => {
            scan_rows(&spec, &tol, |_, row| {
                samples.extend(row);
                Ok(())
            })?;
            let v: Vec<Value> = samples
                .iter()
                .map(|s| {
                    json!({
                        "couplings": s.couplings.values(),
                        "class": s.classification.as_str(),
                        "min_gap": s.min_gap,
                        "max_imag": s.max_imag,
                    })
                })
                .collect();
            emit(a.out.as_deref(), &to_json(&Value::Array(v))?)?;
        }
        Format::Text => return Err(Failure::Usage("domain-scan writes csv or json".into())),
    }
    if let Some(path) = a.boundary {
        let segments = scan_boundary(&spec, &samples, &tol)?;
        let io = |e: std::io::Error| Failure::Refused(format!("{}: {e}", path.display()));
        let f = File::create(&path).map_err(io)?;
        write_gnuplot(BufWriter::new(f), &segments).map_err(io)?;
    }
    Ok(())
}

fn verify(a: VerifyArgs) -> Outcome {
    let reports = match a.criterion {
        Some(k) => golden::run_criterion(k as usize).into_iter().collect(),
        None => golden::run_all(),
    };
    let mut failed = 0;
    for r in &reports {
        println!("{}", r.summary());
        for c in r.checks.iter().filter(|c| !c.passed) {
            println!("  {}: {}", c.name, c.detail);
        }
        failed += usize::from(!r.passed());
    }
    if failed > 0 {
        return Err(Failure::Refused(format!("{failed} of {} criteria failed", reports.len())));
    }
    Ok(())
}
