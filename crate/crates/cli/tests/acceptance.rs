//! Every acceptance criterion at its pinned tolerance, one line each.
//! Runs without the libtest harness so the lines are never captured.

use std::process::ExitCode;

use epnlab::golden::{run_criterion, CRITERIA};

fn main() -> ExitCode {
    let mut failed = Vec::new();
    for (id, _) in CRITERIA {
        let report = run_criterion(id).expect("known criterion");
        println!("{}", report.summary());
        for c in report.checks.iter().filter(|c| !c.passed) {
            println!("    {}: {}", c.name, c.detail);
        }
        if !report.passed() {
            failed.push(id);
        }
    }
    if failed.is_empty() {
        println!("acceptance: all {} criteria passed", CRITERIA.len());
        ExitCode::SUCCESS
    } else {
        println!("acceptance: failed criteria {failed:?}");
        ExitCode::FAILURE
    }
}
