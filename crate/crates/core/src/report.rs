//! Machine-readable renderings (JSON values and CSV text) of analysis and
//! simulation results, plus the failure-probability scan.
//!
//! Exact values appear as `{"exact": "num/den", "float": x}`; undefined
//! conditionals as `null`.

use std::fmt::Write as _;
use std::str::FromStr;

use num_rational::BigRational;
use serde_json::{json, Map, Value};

use crate::error::{ExactError, ModelError};
use crate::exact::{analyze, CaseStats, JointTable};
use crate::model::{cell_key, DetectorModel, ExperimentConfig, CELL_COUNT};
use crate::montecarlo::{Estimate, EstimatedStats, TallyCounts};
use crate::rational::{render_fraction, to_f64};
use crate::stats::{ComparisonReport, IndependenceTestResult};

pub fn exact_json(r: Option<&BigRational>) -> Value {
    match r {
        Some(r) => json!({ "exact": render_fraction(r), "float": to_f64(r) }),
        None => Value::Null,
    }
}

pub fn case_stats_json(s: &CaseStats) -> Value {
    let mut m = Map::new();
    for (name, v) in s.fields() {
        m.insert(name, exact_json(v));
    }
    m.insert("mean_coincidence_rate".into(), exact_json(s.mean_coincidence_rate().as_ref()));
    Value::Object(m)
}

/// Non-zero cells only, keyed `"21NG"` style.
pub fn joint_table_json(t: &JointTable) -> Value {
    let mut m = Map::new();
    for (cell, p) in t.cells().iter().enumerate() {
        if *p != BigRational::from_integer(0.into()) {
            m.insert(cell_label(cell), exact_json(Some(p)));
        }
    }
    Value::Object(m)
}

pub fn cell_label(cell: usize) -> String {
    let (sa, sb, oa, ob) = cell_key(cell);
    format!("{sa}{sb}{oa}{ob}")
}

/// All 144 cells: `switch_a,switch_b,outcome_a,outcome_b,exact,probability`.
/// Switch 0 is the failure position.
pub fn joint_table_csv(t: &JointTable) -> String {
    let mut out = String::from("switch_a,switch_b,outcome_a,outcome_b,exact,probability\n");
    for (cell, p) in t.cells().iter().enumerate() {
        let (sa, sb, oa, ob) = cell_key(cell);
        let _ = writeln!(out, "{sa},{sb},{oa},{ob},{},{}", render_fraction(p), to_f64(p));
    }
    out
}

/// `field,exact,value` rows.
pub fn case_stats_csv(s: &CaseStats) -> String {
    let mut out = String::from("field,exact,value\n");
    for (name, v) in s.fields() {
        match v {
            Some(r) => {
                let _ = writeln!(out, "{name},{},{}", render_fraction(r), to_f64(r));
            }
            None => {
                let _ = writeln!(out, "{name},undefined,");
            }
        }
    }
    out
}

pub fn estimate_json(e: Option<&Estimate>) -> Value {
    match e {
        Some(e) => json!({
            "value": e.value,
            "std_error": e.std_error,
            "ci95": [e.ci_low, e.ci_high],
            "successes": e.successes,
            "trials": e.trials,
        }),
        None => Value::Null,
    }
}

pub fn estimated_stats_json(s: &EstimatedStats) -> Value {
    let mut m = Map::new();
    m.insert("n_trials".into(), json!(s.n_trials));
    for (name, e) in s.fields() {
        m.insert(name, estimate_json(e));
    }
    Value::Object(m)
}

/// `field,successes,trials,value,std_error,ci_low,ci_high`.
pub fn estimated_stats_csv(s: &EstimatedStats) -> String {
    let mut out = String::from("field,successes,trials,value,std_error,ci_low,ci_high\n");
    for (name, e) in s.fields() {
        match e {
            Some(e) => {
                let _ = writeln!(
                    out,
                    "{name},{},{},{},{},{},{}",
                    e.successes, e.trials, e.value, e.std_error, e.ci_low, e.ci_high
                );
            }
            None => {
                let _ = writeln!(out, "{name},0,0,,,,");
            }
        }
    }
    out
}

/// All 144 cells: `switch_a,switch_b,outcome_a,outcome_b,count`.
pub fn tally_csv(t: &TallyCounts) -> String {
    let mut out = String::from("switch_a,switch_b,outcome_a,outcome_b,count\n");
    for cell in 0..CELL_COUNT {
        let (sa, sb, oa, ob) = cell_key(cell);
        let _ = writeln!(out, "{sa},{sb},{oa},{ob},{}", t.counts()[cell]);
    }
    out
}

pub fn tally_json(t: &TallyCounts) -> Value {
    let mut cells = Map::new();
    for (cell, n) in t.nonzero() {
        cells.insert(cell_label(cell), json!(n));
    }
    json!({ "n_trials": t.n_trials(), "counts": cells })
}

pub fn comparison_json(r: &ComparisonReport) -> Value {
    json!({
        "threshold": r.threshold,
        "all_pass": r.all_pass(),
        "rows": r.rows.iter().map(|row| json!({
            "name": row.name,
            "exact": row.exact,
            "exact_float": row.exact_value,
            "estimate": row.estimate,
            "std_error": row.std_error,
            "z": row.z.filter(|z| z.is_finite()),
            "pass": row.pass,
        })).collect::<Vec<_>>(),
    })
}

pub fn independence_json(r: &IndependenceTestResult) -> Value {
    json!({
        "statistic": r.statistic,
        "degrees_of_freedom": r.degrees_of_freedom,
        "p_value": r.p_value,
        "expected_per_cell": r.expected,
        "observed": r.observed,
    })
}

/// Which failure probability a scan varies.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ScanParameter {
    PA,
    PB,
    PBoth,
}

impl FromStr for ScanParameter {
    type Err = ModelError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "p_a" => Ok(ScanParameter::PA),
            "p_b" => Ok(ScanParameter::PB),
            "p_both" => Ok(ScanParameter::PBoth),
            other => Err(ModelError::UnknownDistribution(format!("scan parameter {other}"))),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ScanRow {
    pub p: BigRational,
    pub stats: CaseStats,
}

/// Exact stats at each grid value of the chosen failure probability. The
/// other detector keeps its configured value.
pub fn scan(
    config: &ExperimentConfig,
    parameter: ScanParameter,
    grid: &[BigRational],
) -> Result<Vec<ScanRow>, ExactError> {
    grid.iter()
        .map(|p| {
            let d = DetectorModel::new(p.clone())?;
            let mut cfg = config.clone();
            match parameter {
                ScanParameter::PA => cfg.detector_a = d,
                ScanParameter::PB => cfg.detector_b = d,
                ScanParameter::PBoth => {
                    cfg.detector_a = d.clone();
                    cfg.detector_b = d;
                }
            }
            Ok(ScanRow { p: p.clone(), stats: analyze(&cfg)? })
        })
        .collect()
}

pub const SCAN_CSV_HEADER: &str = "p,eta_a,eta_b,eta_u_a,eta_u_b,p_same_a,p_same_b,mean_coincidence_rate";

/// One line per grid point in [`SCAN_CSV_HEADER`] order; undefined values
/// are empty.
pub fn scan_csv(rows: &[ScanRow]) -> String {
    let f = |r: Option<&BigRational>| r.map(|r| to_f64(r).to_string()).unwrap_or_default();
    let mut out = format!("{SCAN_CSV_HEADER}\n");
    for row in rows {
        let s = &row.stats;
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{},{}",
            to_f64(&row.p),
            f(Some(&s.eta_a)),
            f(Some(&s.eta_b)),
            f(s.eta_u_a.as_ref()),
            f(s.eta_u_b.as_ref()),
            f(s.p_same_case_a.as_ref()),
            f(s.p_same_case_b.as_ref()),
            f(s.mean_coincidence_rate().as_ref()),
        );
    }
    out
}

pub fn scan_json(rows: &[ScanRow]) -> Value {
    Value::Array(
        rows.iter()
            .map(|r| json!({ "p": exact_json(Some(&r.p)), "stats": case_stats_json(&r.stats) }))
            .collect(),
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exact::enumerate_joint;
    use crate::model::builtin_distribution;
    use crate::rational::ratio;

    fn table1() -> ExperimentConfig {
        ExperimentConfig::new(builtin_distribution("table1_uniform").unwrap())
    }

    #[test]
    fn stats_json_shape() {
        let s = analyze(&table1()).unwrap();
        let v = case_stats_json(&s);
        assert_eq!(v["p_same_case_b"]["exact"], "1/4");
        assert_eq!(v["p_same_case_a"]["exact"], "1/1");
        assert_eq!(v["eta_a"]["float"], 5.0 / 6.0);
    }

    #[test]
    fn joint_csv_has_all_cells() {
        let t = enumerate_joint(&table1()).unwrap();
        let csv = joint_table_csv(&t);
        assert_eq!(csv.lines().count(), CELL_COUNT + 1);
        assert!(csv.contains("\n0,0,N,N,0/1,0\n"));
        let v = joint_table_json(&t);
        assert!(v.get("11GG").is_some());
        assert!(v.get("00NN").is_none());
    }

    #[test]
    fn scan_table1() {
        let grid = [ratio(0, 1), ratio(1, 4), ratio(1, 2)];
        let rows = scan(&table1(), ScanParameter::PBoth, &grid).unwrap();
        for row in &rows {
            assert_eq!(row.stats.p_same_case_b, Some(ratio(1, 4)));
            assert_eq!(row.stats.eta_a, (ratio(1, 1) - &row.p) * ratio(5, 6));
            assert!(row.stats.eta_a <= ratio(5, 6));
        }
        let csv = scan_csv(&rows);
        let lines: Vec<&str> = csv.lines().collect();
        assert_eq!(lines[0], SCAN_CSV_HEADER);
        assert!(lines[1].starts_with("0,0.8333333333333334,"));
        assert_eq!(lines.len(), 4);
    }

    #[test]
    fn scan_one_side() {
        let rows = scan(&table1(), ScanParameter::PB, &[ratio(1, 2)]).unwrap();
        assert_eq!(rows[0].stats.eta_a, ratio(5, 6));
        assert_eq!(rows[0].stats.eta_b, ratio(5, 12));
        assert!("p_c".parse::<ScanParameter>().is_err());
    }
}
