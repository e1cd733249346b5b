use std::fs;
use std::path::Path;

use mermin_core::config::ExperimentFile;
use mermin_core::montecarlo::EstimatedStats;
use mermin_core::rational::{render_fraction, to_f64};
use mermin_core::stats::ComparisonReport;
use mermin_core::{CaseStats, SimulationPlan};
use serde_json::{json, Value};

use crate::commands::CliError;

pub fn write_text(path: &Path, text: &str) -> Result<(), CliError> {
    fs::write(path, text).map_err(|e| CliError::io(path, e))
}

pub fn write_json(path: &Path, value: &Value) -> Result<(), CliError> {
    let mut text = serde_json::to_string_pretty(value).expect("JSON values serialize");
    text.push('\n');
    write_text(path, &text)
}

pub fn print_case_stats(s: &CaseStats) {
    println!("{:<24} {:>12} {:>12}", "field", "exact", "value");
    for (name, v) in s.fields() {
        match v {
            Some(r) => println!("{name:<24} {:>12} {:>12.6}", render_fraction(r), to_f64(r)),
            None => println!("{name:<24} {:>12} {:>12}", "undefined", "-"),
        }
    }
}

pub fn print_estimates(s: &EstimatedStats) {
    println!("{:<24} {:>10} {:>10} {:>23}", "field", "estimate", "std err", "95% Wilson CI");
    for (name, e) in s.fields() {
        match e {
            Some(e) => println!(
                "{name:<24} {:>10.6} {:>10.6}   [{:.6}, {:.6}]",
                e.value, e.std_error, e.ci_low, e.ci_high
            ),
            None => println!("{name:<24} {:>10} {:>10}", "undefined", "-"),
        }
    }
}

pub fn print_comparison(r: &ComparisonReport) {
    println!("{:<24} {:>10} {:>10} {:>10} {:>8}  result", "field", "exact", "estimate", "std err", "z");
    let num = |v: Option<f64>, w: usize| v.map(|x| format!("{x:>w$.6}")).unwrap_or_else(|| format!("{:>w$}", "-"));
    for row in &r.rows {
        println!(
            "{:<24} {:>10} {} {} {:>8}  {}",
            row.name,
            row.exact.as_deref().unwrap_or("undefined"),
            num(row.estimate, 10),
            num(row.std_error, 10),
            row.z.map(|z| format!("{z:.2}")).unwrap_or_else(|| "-".into()),
            if row.pass { "ok" } else { "FAIL" }
        );
    }
}

/// Everything needed to rerun a simulation. The timestamp is the only
/// field that changes between identical runs, and it lives only here.
pub struct Manifest {
    value: Value,
}

impl Manifest {
    pub fn new(command: &str, file: &ExperimentFile, plan: &SimulationPlan, outputs: &[&str]) -> Self {
        let value = json!({
            "command": command,
            "tool": env!("CARGO_PKG_NAME"),
            "version": env!("CARGO_PKG_VERSION"),
            "timestamp": chrono::Utc::now().to_rfc3339_opts(chrono::SecondsFormat::Secs, true),
            "config": file.to_json(),
            "seed": plan.seed,
            "n_trials": plan.n_trials,
            "n_streams": plan.n_streams,
            "outputs": outputs,
        });
        Manifest { value }
    }

    pub fn write(&self, dir: &Path) -> Result<(), CliError> {
        write_json(&dir.join("manifest.json"), &self.value)
    }
}
