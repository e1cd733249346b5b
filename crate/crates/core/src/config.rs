//! Experiment files: one JSON document describing the source, both
//! detectors and optional run defaults.
//!
//! ```json
//! {
//!   "source": { "builtin": "table1_uniform" },
//!   "detector_a": { "failure_probability": 0.2 },
//!   "detector_b": { "failure_probability": "1/5" },
//!   "seed": 1,
//!   "n_trials": 1000000
//! }
//! ```
//!
//! `source` may instead list entries:
//! `{ "entries": [ { "state": "GNR-GGR", "weight": "1/2" }, ... ] }`.
//! Numbers are read at their written decimal value; strings may be `num/den`.

use std::fmt;

use num_rational::BigRational;
use serde_json::{json, Map, Value};

use crate::error::ModelError;
use crate::model::{Builtin, DetectorModel, ExperimentConfig, PairState, SourceDistribution};
use crate::rational::{parse_decimal, render};

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ConfigError {
    /// JSON path of the offending field, e.g. `source.entries[2].weight`.
    pub field: String,
    pub message: String,
}

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.field.is_empty() {
            write!(f, "{}", self.message)
        } else {
            write!(f, "field `{}`: {}", self.field, self.message)
        }
    }
}

impl std::error::Error for ConfigError {}

fn err(field: impl Into<String>, message: impl fmt::Display) -> ConfigError {
    ConfigError { field: field.into(), message: message.to_string() }
}

/// Where the source distribution came from.
#[derive(Clone, Debug, PartialEq)]
pub enum SourceSpec {
    Builtin(Builtin),
    Entries(Vec<(PairState, BigRational)>),
}

#[derive(Clone, Debug, PartialEq)]
pub struct ExperimentFile {
    pub source_spec: SourceSpec,
    pub config: ExperimentConfig,
    pub seed: Option<u64>,
    pub n_trials: Option<u64>,
}

impl ExperimentFile {
    /// An in-memory experiment using a builtin source and the given failure
    /// probabilities.
    pub fn builtin(builtin: Builtin, p_a: BigRational, p_b: BigRational) -> Result<Self, ModelError> {
        let config = ExperimentConfig::new(builtin.distribution())
            .with_detectors(DetectorModel::new(p_a)?, DetectorModel::new(p_b)?);
        Ok(ExperimentFile { source_spec: SourceSpec::Builtin(builtin), config, seed: None, n_trials: None })
    }

    /// Canonical JSON form: exact values as `num/den` strings.
    pub fn to_json(&self) -> Value {
        let source = match &self.source_spec {
            SourceSpec::Builtin(b) => json!({ "builtin": b.to_string() }),
            SourceSpec::Entries(entries) => json!({
                "entries": entries
                    .iter()
                    .map(|(s, w)| json!({ "state": s.to_string(), "weight": render(w) }))
                    .collect::<Vec<_>>()
            }),
        };
        let detector = |d: &DetectorModel| json!({ "failure_probability": render(d.failure_probability()) });
        let mut out = Map::new();
        out.insert("source".into(), source);
        out.insert("detector_a".into(), detector(&self.config.detector_a));
        out.insert("detector_b".into(), detector(&self.config.detector_b));
        out.insert("settings_law".into(), json!(self.config.settings_law));
        if let Some(seed) = self.seed {
            out.insert("seed".into(), json!(seed));
        }
        if let Some(n) = self.n_trials {
            out.insert("n_trials".into(), json!(n));
        }
        Value::Object(out)
    }
}

/// Reads an exact value from a JSON number or string.
fn exact_value(v: &Value, field: &str) -> Result<BigRational, ConfigError> {
    let text = match v {
        Value::Number(n) => n.to_string(),
        Value::String(s) => s.clone(),
        other => return Err(err(field, format!("expected a number or \"num/den\" string, got {other}"))),
    };
    parse_decimal(&text).map_err(|e| err(field, e))
}

fn integer(v: &Value, field: &str) -> Result<u64, ConfigError> {
    match v {
        Value::Number(n) => n
            .to_string()
            .parse::<u64>()
            .map_err(|_| err(field, format!("expected a non-negative integer, got {n}"))),
        other => Err(err(field, format!("expected a non-negative integer, got {other}"))),
    }
}

fn object<'a>(v: &'a Value, field: &str) -> Result<&'a Map<String, Value>, ConfigError> {
    v.as_object().ok_or_else(|| err(field, "expected an object"))
}

fn reject_unknown(map: &Map<String, Value>, prefix: &str, allowed: &[&str]) -> Result<(), ConfigError> {
    for key in map.keys() {
        if !allowed.contains(&key.as_str()) {
            let path = if prefix.is_empty() { key.clone() } else { format!("{prefix}.{key}") };
            return Err(err(path, "unknown key"));
        }
    }
    Ok(())
}

fn detector(root: &Map<String, Value>, key: &str) -> Result<DetectorModel, ConfigError> {
    let Some(v) = root.get(key) else {
        return Ok(DetectorModel::ideal());
    };
    let obj = object(v, key)?;
    reject_unknown(obj, key, &["failure_probability"])?;
    let field = format!("{key}.failure_probability");
    let p = match obj.get("failure_probability") {
        Some(v) => exact_value(v, &field)?,
        None => return Ok(DetectorModel::ideal()),
    };
    DetectorModel::new(p).map_err(|e| err(field, e))
}

fn source(root: &Map<String, Value>) -> Result<(SourceSpec, SourceDistribution), ConfigError> {
    let v = root.get("source").ok_or_else(|| err("source", "missing"))?;
    if let Value::String(name) = v {
        let b: Builtin = name.parse().map_err(|e| err("source", e))?;
        let d = b.distribution();
        return Ok((SourceSpec::Builtin(b), d));
    }
    let obj = object(v, "source")?;
    reject_unknown(obj, "source", &["builtin", "entries"])?;
    match (obj.get("builtin"), obj.get("entries")) {
        (Some(_), Some(_)) => Err(err("source", "give either `builtin` or `entries`, not both")),
        (Some(name), None) => {
            let name = name.as_str().ok_or_else(|| err("source.builtin", "expected a string"))?;
            let b: Builtin = name.parse().map_err(|e| err("source.builtin", e))?;
            let d = b.distribution();
            Ok((SourceSpec::Builtin(b), d))
        }
        (None, Some(list)) => {
            let list = list.as_array().ok_or_else(|| err("source.entries", "expected an array"))?;
            let mut entries = Vec::with_capacity(list.len());
            for (i, item) in list.iter().enumerate() {
                let path = format!("source.entries[{i}]");
                let obj = object(item, &path)?;
                reject_unknown(obj, &path, &["state", "weight"])?;
                let state = obj
                    .get("state")
                    .and_then(Value::as_str)
                    .ok_or_else(|| err(format!("{path}.state"), "expected a \"XXX-YYY\" string"))?
                    .parse::<PairState>()
                    .map_err(|e| err(format!("{path}.state"), e))?;
                let weight_path = format!("{path}.weight");
                let weight = exact_value(
                    obj.get("weight").ok_or_else(|| err(&weight_path, "missing"))?,
                    &weight_path,
                )?;
                entries.push((state, weight));
            }
            let d = SourceDistribution::new(entries.clone()).map_err(|e| {
                let field = match &e {
                    ModelError::NegativeWeight { index, .. } => format!("source.entries[{index}].weight"),
                    ModelError::DuplicateState { index, .. } => format!("source.entries[{index}].state"),
                    _ => "source.entries".to_string(),
                };
                err(field, e)
            })?;
            Ok((SourceSpec::Entries(entries), d))
        }
        (None, None) => Err(err("source", "expected `builtin` or `entries`")),
    }
}

pub fn parse_experiment(text: &str) -> Result<ExperimentFile, ConfigError> {
    let value: Value = serde_json::from_str(text).map_err(|e| err("", format!("invalid JSON: {e}")))?;
    from_value(&value)
}

pub fn from_value(value: &Value) -> Result<ExperimentFile, ConfigError> {
    let root = object(value, "")?;
    reject_unknown(
        root,
        "",
        &["source", "detector_a", "detector_b", "settings_law", "seed", "n_trials"],
    )?;
    if let Some(law) = root.get("settings_law") {
        if law.as_str() != Some("independent_uniform") {
            return Err(err("settings_law", "only \"independent_uniform\" is supported"));
        }
    }
    let (source_spec, dist) = source(root)?;
    let config = ExperimentConfig::new(dist).with_detectors(detector(root, "detector_a")?, detector(root, "detector_b")?);
    let seed = root.get("seed").map(|v| integer(v, "seed")).transpose()?;
    let n_trials = root.get("n_trials").map(|v| integer(v, "n_trials")).transpose()?;
    Ok(ExperimentFile { source_spec, config, seed, n_trials })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::ratio;

    #[test]
    fn builtin_source() {
        let f = parse_experiment(
            r#"{"source": {"builtin": "table1_uniform"}, "detector_a": {"failure_probability": 0.2}, "seed": 4}"#,
        )
        .unwrap();
        assert_eq!(f.config.source.len(), 12);
        assert_eq!(*f.config.detector_a.failure_probability(), ratio(1, 5));
        assert_eq!(*f.config.detector_b.failure_probability(), ratio(0, 1));
        assert_eq!(f.seed, Some(4));
        assert_eq!(f.n_trials, None);
        assert!(parse_experiment(r#"{"source": "single(GNR-GGR)"}"#).is_ok());
    }

    #[test]
    fn explicit_entries() {
        let f = parse_experiment(
            r#"{"source": {"entries": [
                {"state": "GNR-GGR", "weight": "1/3"},
                {"state": "GGR-GNR", "weight": 0.666666666667}
            ]}}"#,
        )
        .unwrap();
        let w = &f.config.source.entries()[0].1;
        // renormalized by the exact decimal sum
        assert_eq!(*w, ratio(1, 3) / (ratio(1, 3) + parse_decimal("0.666666666667").unwrap()));
    }

    #[test]
    fn weight_sum_error_names_field() {
        let e = parse_experiment(
            r#"{"source": {"entries": [{"state": "GGR-GGR", "weight": 0.9}]}}"#,
        )
        .unwrap_err();
        assert_eq!(e.field, "source.entries");
        assert!(e.to_string().contains("WeightSumMismatch"), "{e}");
    }

    #[test]
    fn field_paths_in_errors() {
        let cases = [
            (r#"{}"#, "source"),
            (r#"{"source": {"builtin": "nope"}}"#, "source.builtin"),
            (r#"{"source": {"entries": [{"state": "GXR-GGR", "weight": 1}]}}"#, "source.entries[0].state"),
            (r#"{"source": {"entries": [{"state": "GGR-GGR", "weight": "x"}]}}"#, "source.entries[0].weight"),
            (
                r#"{"source": {"entries": [{"state": "GGR-GGR", "weight": 1.1}, {"state": "RRR-RRR", "weight": -0.1}]}}"#,
                "source.entries[1].weight",
            ),
            (
                r#"{"source": {"entries": [{"state": "GGR-GGR", "weight": 0.5}, {"state": "GGR-GGR", "weight": 0.5}]}}"#,
                "source.entries[1].state",
            ),
            (r#"{"source": "table1_uniform", "detector_b": {"failure_probability": 1.5}}"#, "detector_b.failure_probability"),
            (r#"{"source": "table1_uniform", "seed": -1}"#, "seed"),
            (r#"{"source": "table1_uniform", "colour": 1}"#, "colour"),
            (r#"{"source": "table1_uniform", "settings_law": "biased"}"#, "settings_law"),
        ];
        for (text, field) in cases {
            let e = parse_experiment(text).unwrap_err();
            assert_eq!(e.field, field, "{text}: {e}");
        }
        assert!(parse_experiment("not json").is_err());
    }

    #[test]
    fn snapshot_round_trips() {
        let f = parse_experiment(
            r#"{"source": {"entries": [{"state": "GGR-GGR", "weight": 0.25}, {"state": "RRR-RRR", "weight": "3/4"}]},
                "detector_b": {"failure_probability": "1/3"}, "n_trials": 10}"#,
        )
        .unwrap();
        let again = from_value(&f.to_json()).unwrap();
        assert_eq!(again, f);
    }
}
