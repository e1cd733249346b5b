//! wasm-bindgen surface for the browser demo in `www/`.
//!
//! Every export returns a JSON string; the page parses it. The `*_json`
//! functions hold the logic and are plain Rust so they can be tested off
//! the browser.

use mermin_core::config::ExperimentFile;
use mermin_core::exact::{analyze, min_case_b_no_noflash};
use mermin_core::model::Builtin;
use mermin_core::rational::{parse_decimal, render, to_f64};
use mermin_core::report::{self, ScanParameter};
use num_rational::BigRational;
use mermin_core::stats::{compare, settings_independence_test, DEFAULT_Z_THRESHOLD};
use mermin_core::{estimate_stats, run_trials, SimulationPlan};
use serde_json::json;
use wasm_bindgen::prelude::*;

/// Upper bound on trials per call, to keep the page responsive.
pub const MAX_TRIALS: u32 = 5_000_000;

fn probability(p: f64, name: &str) -> Result<BigRational, String> {
    if !(0.0..=1.0).contains(&p) {
        return Err(format!("{name} = {p} is outside [0, 1]"));
    }
    // the shortest decimal that round-trips, read exactly
    parse_decimal(&format!("{p}")).map_err(|e| e.to_string())
}

fn experiment(source: &str, p_a: f64, p_b: f64) -> Result<ExperimentFile, String> {
    let builtin: Builtin = source.parse().map_err(|e: mermin_core::ModelError| e.to_string())?;
    ExperimentFile::builtin(builtin, probability(p_a, "p_a")?, probability(p_b, "p_b")?)
        .map_err(|e| e.to_string())
}

pub fn exact_stats_json(source: &str, p_a: f64, p_b: f64) -> Result<String, String> {
    let file = experiment(source, p_a, p_b)?;
    let stats = analyze(&file.config).map_err(|e| e.to_string())?;
    Ok(json!({
        "config": file.to_json(),
        "stats": report::case_stats_json(&stats),
    })
    .to_string())
}

pub fn simulate_json(source: &str, p_a: f64, p_b: f64, n: u32, seed: u32) -> Result<String, String> {
    if n > MAX_TRIALS {
        return Err(format!("n = {n} exceeds the demo limit of {MAX_TRIALS}"));
    }
    let file = experiment(source, p_a, p_b)?;
    let exact = analyze(&file.config).map_err(|e| e.to_string())?;
    let tally = run_trials(&SimulationPlan::new(file.config.clone(), n.into(), seed.into()))
        .map_err(|e| e.to_string())?;
    let est = estimate_stats(&tally);
    let independence = settings_independence_test(&tally).ok();
    Ok(json!({
        "n_trials": n,
        "seed": seed,
        "estimates": report::estimated_stats_json(&est),
        "comparison": report::comparison_json(&compare(&exact, &est, DEFAULT_Z_THRESHOLD)),
        "independence": independence.as_ref().map(report::independence_json),
        "tally": report::tally_json(&tally),
    })
    .to_string())
}

pub fn scan_json(source: &str, parameter: &str, p_a: f64, p_b: f64, steps: u32) -> Result<String, String> {
    let file = experiment(source, p_a, p_b)?;
    let param: ScanParameter = parameter.parse().map_err(|_| format!("unknown parameter {parameter}"))?;
    let steps = steps.clamp(1, 1000);
    // 0, 1/steps, ..., (steps-1)/steps, staying below 1
    let grid: Vec<_> = (0..steps)
        .map(|k| BigRational::new(k.into(), steps.into()))
        .collect();
    let rows = report::scan(&file.config, param, &grid).map_err(|e| e.to_string())?;
    let points: Vec<_> = rows
        .iter()
        .map(|r| {
            let s = &r.stats;
            let f = |x: Option<&BigRational>| x.map(to_f64);
            json!({
                "p": to_f64(&r.p),
                "eta_a": to_f64(&s.eta_a),
                "eta_b": to_f64(&s.eta_b),
                "eta_u_a": f(s.eta_u_a.as_ref()),
                "p_same_case_a": f(s.p_same_case_a.as_ref()),
                "p_same_case_b": f(s.p_same_case_b.as_ref()),
                "mean_coincidence_rate": f(s.mean_coincidence_rate().as_ref()),
            })
        })
        .collect();
    Ok(json!({ "parameter": parameter, "points": points }).to_string())
}

pub fn case_b_minimum_json() -> String {
    let m = min_case_b_no_noflash();
    json!({
        "value": render(&m.value),
        "support": m.support.iter().map(|s| s.to_string()).collect::<Vec<_>>(),
        "vertices": m.vertex_values.iter().map(|(s, v)| json!([s.to_string(), render(v)])).collect::<Vec<_>>(),
    })
    .to_string()
}

fn js(r: Result<String, String>) -> Result<String, JsValue> {
    r.map_err(|e| JsValue::from_str(&e))
}

/// Exact conditional statistics for a builtin source and failure
/// probabilities.
#[wasm_bindgen]
pub fn exact_stats(source: &str, p_a: f64, p_b: f64) -> Result<String, JsValue> {
    js(exact_stats_json(source, p_a, p_b))
}

/// Monte Carlo estimates alongside their agreement with the exact values.
#[wasm_bindgen]
pub fn simulate(source: &str, p_a: f64, p_b: f64, n: u32, seed: u32) -> Result<String, JsValue> {
    js(simulate_json(source, p_a, p_b, n, seed))
}

/// Exact statistics on an evenly spaced grid of failure probabilities.
#[wasm_bindgen]
pub fn scan(source: &str, parameter: &str, p_a: f64, p_b: f64, steps: u32) -> Result<String, JsValue> {
    js(scan_json(source, parameter, p_a, p_b, steps))
}

#[wasm_bindgen]
pub fn case_b_minimum() -> String {
    case_b_minimum_json()
}

#[cfg(test)]
mod tests {
    use super::*;
    use serde_json::Value;

    fn parse(s: String) -> Value {
        serde_json::from_str(&s).unwrap()
    }

    #[test]
    fn exact_table1() {
        let v = parse(exact_stats_json("table1_uniform", 0.0, 0.0).unwrap());
        assert_eq!(v["stats"]["p_same_case_b"]["exact"], "1/4");
        let v = parse(exact_stats_json("table1_uniform", 0.5, 0.5).unwrap());
        assert_eq!(v["stats"]["eta_a"]["exact"], "5/12");
        assert_eq!(v["config"]["detector_a"]["failure_probability"], "1/2");
        // 0.1 is read as exactly 1/10
        let v = parse(exact_stats_json("single(GNR-GGR)", 0.1, 0.0).unwrap());
        assert_eq!(v["config"]["detector_a"]["failure_probability"], "1/10");
    }

    #[test]
    fn rejects_bad_input() {
        assert!(exact_stats_json("nope", 0.0, 0.0).is_err());
        assert!(exact_stats_json("table1_uniform", 1.5, 0.0).is_err());
        assert!(exact_stats_json("table1_uniform", f64::NAN, 0.0).is_err());
        assert!(simulate_json("table1_uniform", 0.0, 0.0, MAX_TRIALS + 1, 1).is_err());
        assert!(scan_json("table1_uniform", "p_x", 0.0, 0.0, 4).is_err());
    }

    #[test]
    fn simulate_agrees() {
        let v = parse(simulate_json("two_one_uniform", 0.2, 0.0, 200_000, 3).unwrap());
        assert_eq!(v["comparison"]["all_pass"], true);
        assert_eq!(v["tally"]["n_trials"], 200_000);
        let again = parse(simulate_json("two_one_uniform", 0.2, 0.0, 200_000, 3).unwrap());
        assert_eq!(v, again);
    }

    #[test]
    fn scan_curve() {
        let v = parse(scan_json("table1_uniform", "p_both", 0.0, 0.0, 4).unwrap());
        let pts = v["points"].as_array().unwrap();
        assert_eq!(pts.len(), 4);
        assert_eq!(pts[2]["p"], 0.5);
        assert_eq!(pts[3]["p_same_case_b"], 0.25);
        assert!((pts[2]["eta_a"].as_f64().unwrap() - 5.0 / 12.0).abs() < 1e-15);
    }

    #[test]
    fn minimum() {
        let v = parse(case_b_minimum_json());
        assert_eq!(v["value"], "1/3");
        assert_eq!(v["support"].as_array().unwrap().len(), 6);
    }
}
