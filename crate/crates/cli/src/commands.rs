use std::fs;
use std::path::{Path, PathBuf};

use mermin_core::config::{parse_experiment, ExperimentFile};
use mermin_core::exact::{detector_invariance_check, enumerate_joint, eta_factorizes, CaseStats};
use mermin_core::rational::{parse_decimal, ratio, render};
use mermin_core::report::{self, ScanParameter};
use mermin_core::stats::{compare, settings_independence_test, INDEPENDENCE_ALPHA};
use mermin_core::{conditional_stats, estimate_stats, run_trials, SimulationPlan};
use serde_json::json;
use thiserror::Error;

use crate::output::{print_case_stats, print_comparison, print_estimates, write_json, write_text, Manifest};
use crate::{Common, RunArgs};

pub const DEFAULT_TRIALS: u64 = 1_000_000;
pub const DEFAULT_SEED: u64 = 1;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error("config error in {path}: {message}")]
    Config { path: String, message: String },
    #[error("{0} verification check(s) failed")]
    VerificationFailed(usize),
}

impl CliError {
    pub fn io(path: &Path, source: std::io::Error) -> Self {
        CliError::Io { path: path.to_path_buf(), source }
    }

    fn config(path: &Path, message: impl ToString) -> Self {
        CliError::Config { path: path.display().to_string(), message: message.to_string() }
    }
}

fn load(common: &Common) -> Result<ExperimentFile, CliError> {
    let text = fs::read_to_string(&common.config).map_err(|e| CliError::io(&common.config, e))?;
    parse_experiment(&text).map_err(|e| CliError::config(&common.config, e))
}

fn out_dir(common: &Common) -> Result<&Path, CliError> {
    fs::create_dir_all(&common.out_dir).map_err(|e| CliError::io(&common.out_dir, e))?;
    Ok(&common.out_dir)
}

pub fn enumerate(common: &Common) -> Result<(), CliError> {
    let file = load(common)?;
    let table = enumerate_joint(&file.config).map_err(|e| CliError::config(&common.config, e))?;
    let stats = conditional_stats(&table);

    println!("exact statistics for {}", common.config.display());
    print_case_stats(&stats);

    let dir = out_dir(common)?;
    write_json(
        &dir.join("enumerate.json"),
        &json!({
            "config": file.to_json(),
            "case_stats": report::case_stats_json(&stats),
            "joint_table": report::joint_table_json(&table),
        }),
    )?;
    write_text(&dir.join("case_stats.csv"), &report::case_stats_csv(&stats))?;
    write_text(&dir.join("joint_table.csv"), &report::joint_table_csv(&table))?;
    Ok(())
}

fn plan(file: &ExperimentFile, run: &RunArgs) -> SimulationPlan {
    let n = run.n.or(file.n_trials).unwrap_or(DEFAULT_TRIALS);
    let seed = run.seed.or(file.seed).unwrap_or(DEFAULT_SEED);
    SimulationPlan::new(file.config.clone(), n, seed).with_streams(run.streams.max(1))
}

pub fn simulate(common: &Common, run: &RunArgs) -> Result<(), CliError> {
    let file = load(common)?;
    let plan = plan(&file, run);
    let tally = run_trials(&plan).map_err(|e| CliError::config(&common.config, e))?;
    let est = estimate_stats(&tally);

    println!(
        "simulated {} trials (seed {}, {} streams) for {}",
        plan.n_trials,
        plan.seed,
        plan.n_streams,
        common.config.display()
    );
    print_estimates(&est);

    let dir = out_dir(common)?;
    let outputs = ["tally.csv", "tally.json", "estimates.csv", "estimates.json"];
    write_text(&dir.join(outputs[0]), &report::tally_csv(&tally))?;
    write_json(&dir.join(outputs[1]), &report::tally_json(&tally))?;
    write_text(&dir.join(outputs[2]), &report::estimated_stats_csv(&est))?;
    write_json(&dir.join(outputs[3]), &report::estimated_stats_json(&est))?;
    Manifest::new("simulate", &file, &plan, &outputs).write(dir)?;
    Ok(())
}

struct Check {
    name: &'static str,
    /// `None` for informational rows that do not affect the exit code.
    pass: Option<bool>,
    detail: String,
}

pub fn verify(common: &Common, run: &RunArgs, threshold: f64) -> Result<(), CliError> {
    if threshold.is_nan() || threshold <= 0.0 {
        return Err(CliError::config(&common.config, format!("--threshold must be positive, got {threshold}")));
    }
    let file = load(common)?;
    let config_err = |e: &dyn std::fmt::Display| CliError::config(&common.config, e);
    let table = enumerate_joint(&file.config).map_err(|e| config_err(&e))?;
    let exact = conditional_stats(&table);
    let plan = plan(&file, run);
    let tally = run_trials(&plan).map_err(|e| config_err(&e))?;
    let est = estimate_stats(&tally);
    let comparison = compare(&exact, &est, threshold);

    let mut checks = Vec::new();
    checks.push(Check {
        name: "exact_vs_simulation",
        pass: Some(comparison.all_pass()),
        detail: format!(
            "{} of {} fields within |z| <= {threshold}",
            comparison.rows.iter().filter(|r| r.pass).count(),
            comparison.rows.len()
        ),
    });

    let independence = settings_independence_test(&tally).ok();
    checks.push(match (&independence, exact.coincidence_uniform()) {
        (None, _) => Check {
            name: "settings_independence",
            pass: Some(exact.coincidence_rate.iter().flatten().all(|c| c.as_ref().is_some_and(|c| *c == ratio(0, 1)))),
            detail: "no coincidences in the sample".into(),
        },
        (Some(r), true) => Check {
            name: "settings_independence",
            pass: Some(r.passes(INDEPENDENCE_ALPHA)),
            detail: format!("chi2 = {:.3}, dof = {}, p = {:.4} (alpha = {INDEPENDENCE_ALPHA})", r.statistic, r.degrees_of_freedom, r.p_value),
        },
        (Some(r), false) => Check {
            name: "settings_independence",
            pass: None,
            detail: format!(
                "exact coincidence rates differ across setting pairs; chi2 = {:.3}, p = {:.3e}",
                r.statistic, r.p_value
            ),
        },
    });

    let ps = [ratio(0, 1), ratio(1, 5), ratio(1, 2)];
    let invariance = detector_invariance_check(&file.config, &ps).map_err(|e| config_err(&e))?;
    checks.push(Check {
        name: "detector_invariance",
        pass: Some(invariance.holds()),
        detail: format!(
            "p in {{0, 1/5, 1/2}}: conditionals {}, coincidence scaling {}",
            if invariance.conditionals_invariant { "unchanged" } else { "CHANGED" },
            if invariance.coincidence_scaling_holds { "(1-p)^2" } else { "BROKEN" }
        ),
    });
    checks.push(Check {
        name: "eta_factorization",
        pass: Some(eta_factorizes(&exact)),
        detail: format!(
            "eta_a = {}, eta_u_a = {}, eta_f_a = {}",
            render(&exact.eta_a),
            exact.eta_u_a.as_ref().map(render).unwrap_or_else(|| "undefined".into()),
            render(&exact.eta_f_a)
        ),
    });
    checks.push(conundrum(&exact));

    print_comparison(&comparison);
    println!();
    let mut failed = 0;
    for c in &checks {
        let tag = match c.pass {
            Some(true) => "PASS",
            Some(false) => {
                failed += 1;
                "FAIL"
            }
            None => "INFO",
        };
        println!("{tag:<5} {:<22} {}", c.name, c.detail);
    }

    let dir = out_dir(common)?;
    let outputs = ["verify.json"];
    write_json(
        &dir.join(outputs[0]),
        &json!({
            "config": file.to_json(),
            "exact": report::case_stats_json(&exact),
            "estimates": report::estimated_stats_json(&est),
            "comparison": report::comparison_json(&comparison),
            "independence": independence.as_ref().map(report::independence_json),
            "checks": checks.iter().map(|c| json!({ "name": c.name, "pass": c.pass, "detail": c.detail })).collect::<Vec<_>>(),
        }),
    )?;
    Manifest::new("verify", &file, &plan, &outputs).write(dir)?;

    if failed > 0 {
        Err(CliError::VerificationFailed(failed))
    } else {
        Ok(())
    }
}

/// Whether the detected statistics reproduce Mermin's targets: perfect
/// Case-a agreement and Case-b same colour at 1/4.
fn conundrum(exact: &CaseStats) -> Check {
    let target_b = ratio(1, 4);
    let show = |c: &Option<_>| c.as_ref().map(render).unwrap_or_else(|| "undefined".into());
    let reproduced = exact.p_same_case_a == Some(ratio(1, 1)) && exact.p_same_case_b == Some(target_b);
    let detail = if reproduced {
        "Case a = 1, Case b = 1/4: Mermin statistics reproduced".to_string()
    } else {
        format!(
            "GAP: Case a = {}, Case b = {} vs Mermin target 1 and 1/4",
            show(&exact.p_same_case_a),
            show(&exact.p_same_case_b)
        )
    };
    Check { name: "conundrum", pass: None, detail }
}

pub fn scan(common: &Common, parameter: &str, grid: &[String]) -> Result<(), CliError> {
    let file = load(common)?;
    let param: ScanParameter = parameter
        .parse()
        .map_err(|_| CliError::config(&common.config, format!("--parameter must be p_a, p_b or p_both, got {parameter}")))?;
    let mut values = Vec::with_capacity(grid.len());
    for g in grid {
        let v = parse_decimal(g).map_err(|e| CliError::config(&common.config, format!("--grid: {e}")))?;
        if v < ratio(0, 1) || v >= ratio(1, 1) {
            return Err(CliError::config(&common.config, format!("--grid value {g} is outside [0, 1)")));
        }
        values.push(v);
    }
    let rows = report::scan(&file.config, param, &values).map_err(|e| CliError::config(&common.config, e))?;

    let csv = report::scan_csv(&rows);
    print!("{csv}");
    let dir = out_dir(common)?;
    write_text(&dir.join("scan.csv"), &csv)?;
    write_json(&dir.join("scan.json"), &json!({ "parameter": parameter, "config": file.to_json(), "rows": report::scan_json(&rows) }))?;
    Ok(())
}
