//! Agreement between simulation and the exact values, and a chi-square test
//! of whether the detected sample size depends on the setting pair.

use num_rational::BigRational;

use crate::error::StatsError;
use crate::exact::CaseStats;
use crate::montecarlo::{Estimate, EstimatedStats, TallyCounts};
use crate::rational::{render, to_f64};

/// Default |z| threshold for agreement.
pub const DEFAULT_Z_THRESHOLD: f64 = 5.0;

/// Significance level used for the settings-independence check.
pub const INDEPENDENCE_ALPHA: f64 = 1e-3;

#[derive(Clone, Debug, PartialEq)]
pub struct ComparisonRow {
    pub name: String,
    /// `num/den`, or `None` when undefined.
    pub exact: Option<String>,
    pub exact_value: Option<f64>,
    pub estimate: Option<f64>,
    pub std_error: Option<f64>,
    pub z: Option<f64>,
    pub pass: bool,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ComparisonReport {
    pub threshold: f64,
    pub rows: Vec<ComparisonRow>,
}

impl ComparisonReport {
    pub fn all_pass(&self) -> bool {
        self.rows.iter().all(|r| r.pass)
    }

    pub fn failures(&self) -> impl Iterator<Item = &ComparisonRow> {
        self.rows.iter().filter(|r| !r.pass)
    }

    pub fn row(&self, name: &str) -> Option<&ComparisonRow> {
        self.rows.iter().find(|r| r.name == name)
    }
}

/// Compares one field. Returns `None` if both sides are undefined.
pub fn compare_field(
    name: &str,
    exact: Option<&BigRational>,
    est: Option<&Estimate>,
    threshold: f64,
) -> Option<ComparisonRow> {
    let exact_value = exact.map(to_f64);
    let mut row = ComparisonRow {
        name: name.to_string(),
        exact: exact.map(render),
        exact_value,
        estimate: est.map(|e| e.value),
        std_error: est.map(|e| e.std_error),
        z: None,
        pass: false,
    };
    match (exact_value, est) {
        (None, None) => return None,
        (Some(x), Some(e)) => {
            if x == e.value {
                row.z = Some(0.0);
                row.pass = true;
            } else {
                let z = (e.value - x) / e.std_error;
                row.z = Some(z);
                row.pass = z.abs() <= threshold;
            }
        }
        _ => {}
    }
    Some(row)
}

pub fn compare(exact: &CaseStats, est: &EstimatedStats, threshold: f64) -> ComparisonReport {
    let rows = exact
        .fields()
        .into_iter()
        .zip(est.fields())
        .filter_map(|((name, x), (_, e))| compare_field(&name, x, e, threshold))
        .collect();
    ComparisonReport { threshold, rows }
}

#[derive(Clone, Debug, PartialEq)]
pub struct IndependenceTestResult {
    pub statistic: f64,
    pub degrees_of_freedom: u32,
    pub p_value: f64,
    /// Double-flash counts per setting pair, `[a][b]`.
    pub observed: [[u64; 3]; 3],
    pub expected: f64,
}

impl IndependenceTestResult {
    pub fn passes(&self, alpha: f64) -> bool {
        self.p_value > alpha
    }
}

/// Pearson chi-square of the nine per-setting-pair coincidence counts
/// against a uniform split of their total. Failure positions are excluded.
pub fn settings_independence_test(t: &TallyCounts) -> Result<IndependenceTestResult, StatsError> {
    chi_square_uniform(t.coincidences_by_setting())
}

/// Chi-square test of nine cell counts against equal expected counts.
pub fn chi_square_uniform(observed: [[u64; 3]; 3]) -> Result<IndependenceTestResult, StatsError> {
    let total: u64 = observed.iter().flatten().sum();
    if total == 0 {
        return Err(StatsError::NoCoincidences);
    }
    let expected = total as f64 / 9.0;
    let statistic: f64 = observed
        .iter()
        .flatten()
        .map(|&o| {
            let d = o as f64 - expected;
            d * d / expected
        })
        .sum();
    let dof = 8;
    let p_value = regularized_gamma_q(dof as f64 / 2.0, statistic / 2.0)?;
    Ok(IndependenceTestResult { statistic, degrees_of_freedom: dof, p_value, observed, expected })
}

const EPS: f64 = 1e-16;
const MAX_ITER: usize = 10_000;

/// Natural log of the gamma function (Lanczos, g = 7, n = 9), for x > 0.
pub fn ln_gamma(x: f64) -> f64 {
    const COEF: [f64; 9] = [
        0.999_999_999_999_809_9,
        676.520_368_121_885_1,
        -1_259.139_216_722_402_8,
        771.323_428_777_653_1,
        -176.615_029_162_140_6,
        12.507_343_278_686_905,
        -0.138_571_095_265_720_12,
        9.984_369_578_019_572e-6,
        1.505_632_735_149_311_6e-7,
    ];
    if x < 0.5 {
        // reflection
        let pi = std::f64::consts::PI;
        return (pi / (pi * x).sin()).ln() - ln_gamma(1.0 - x);
    }
    let x = x - 1.0;
    let mut a = COEF[0];
    let t = x + 7.5;
    for (i, c) in COEF.iter().enumerate().skip(1) {
        a += c / (x + i as f64);
    }
    0.5 * (2.0 * std::f64::consts::PI).ln() + (x + 0.5) * t.ln() - t + a.ln()
}

/// Regularized upper incomplete gamma function Q(a, x) = Γ(a, x) / Γ(a).
///
/// Series expansion of P for x < a + 1, Lentz continued fraction for Q
/// otherwise.
pub fn regularized_gamma_q(a: f64, x: f64) -> Result<f64, StatsError> {
    if a.is_nan() || a <= 0.0 || a.is_infinite() {
        return Err(StatsError::Domain(format!("shape a = {a} must be positive")));
    }
    if x.is_nan() || x < 0.0 {
        return Err(StatsError::Domain(format!("x = {x} must be non-negative")));
    }
    if x == 0.0 {
        return Ok(1.0);
    }
    if x.is_infinite() {
        return Ok(0.0);
    }
    let log_prefactor = a * x.ln() - x - ln_gamma(a);
    if x < a + 1.0 {
        let mut term = 1.0 / a;
        let mut sum = term;
        let mut ap = a;
        for _ in 0..MAX_ITER {
            ap += 1.0;
            term *= x / ap;
            sum += term;
            if term.abs() < sum.abs() * EPS {
                break;
            }
        }
        Ok((1.0 - sum * log_prefactor.exp()).clamp(0.0, 1.0))
    } else {
        let tiny = 1e-300;
        let mut b = x + 1.0 - a;
        let mut c = 1.0 / tiny;
        let mut d = 1.0 / b;
        let mut h = d;
        for i in 1..MAX_ITER {
            let an = -(i as f64) * (i as f64 - a);
            b += 2.0;
            d = an * d + b;
            if d.abs() < tiny {
                d = tiny;
            }
            c = b + an / c;
            if c.abs() < tiny {
                c = tiny;
            }
            d = 1.0 / d;
            let delta = d * c;
            h *= delta;
            if (delta - 1.0).abs() < EPS {
                break;
            }
        }
        Ok((log_prefactor.exp() * h).clamp(0.0, 1.0))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::ratio;

    fn est(value: f64, se: f64) -> Estimate {
        Estimate { successes: 0, trials: 0, value, std_error: se, ci_low: 0.0, ci_high: 1.0 }
    }

    #[test]
    fn compare_examples() {
        let row = compare_field("x", Some(&ratio(1, 4)), Some(&est(0.2502, 0.0005)), 5.0).unwrap();
        assert!((row.z.unwrap() - 0.4).abs() < 1e-9);
        assert!(row.pass);

        let row = compare_field("x", Some(&ratio(1, 1)), Some(&est(1.0, 0.0)), 5.0).unwrap();
        assert!(row.pass);
        assert_eq!(row.z, Some(0.0));

        let row = compare_field("x", Some(&ratio(5, 6)), Some(&est(0.80, 0.004)), 5.0).unwrap();
        assert!((row.z.unwrap() + 8.333).abs() < 1e-3);
        assert!(!row.pass);
    }

    #[test]
    fn compare_undefined_fields() {
        assert!(compare_field("x", None, None, 5.0).is_none());
        assert!(!compare_field("x", Some(&ratio(1, 2)), None, 5.0).unwrap().pass);
        assert!(!compare_field("x", None, Some(&est(0.5, 0.1)), 5.0).unwrap().pass);
    }

    #[test]
    fn zero_variance_mismatch_fails() {
        let row = compare_field("x", Some(&ratio(1, 2)), Some(&est(1.0, 0.0)), 5.0).unwrap();
        assert!(!row.pass);
    }

    #[test]
    fn chi_square_examples() {
        let r = chi_square_uniform([[1000; 3]; 3]).unwrap();
        assert_eq!(r.statistic, 0.0);
        assert_eq!(r.p_value, 1.0);
        assert_eq!(r.degrees_of_freedom, 8);

        // one empty cell, eight cells of 1125: total 9000, expected 1000
        // statistic = 1000 + 8 * 125^2 / 1000 = 1125
        let mut obs = [[1125; 3]; 3];
        obs[1][2] = 0;
        let r = chi_square_uniform(obs).unwrap();
        assert!((r.statistic - 1125.0).abs() < 1e-9);
        assert!(r.p_value < 1e-6);

        assert_eq!(chi_square_uniform([[0; 3]; 3]), Err(StatsError::NoCoincidences));
    }

    #[test]
    fn gamma_q_examples() {
        assert_eq!(regularized_gamma_q(2.5, 0.0).unwrap(), 1.0);
        assert!((regularized_gamma_q(0.5, 1.0).unwrap() - 0.157_299_207_050_285_1).abs() < 1e-12);
        // e^-8 (1 + 8 + 32 + 256/3)
        let closed = (-8f64).exp() * (1.0 + 8.0 + 32.0 + 256.0 / 3.0);
        assert!((regularized_gamma_q(4.0, 8.0).unwrap() - closed).abs() < 1e-13);
        assert!((closed - 0.0424).abs() < 1e-4);
        assert!(regularized_gamma_q(0.0, 1.0).is_err());
        assert!(regularized_gamma_q(-1.0, 1.0).is_err());
        assert!(regularized_gamma_q(1.0, -1.0).is_err());
        assert!(regularized_gamma_q(f64::NAN, 1.0).is_err());
    }

    #[test]
    fn ln_gamma_factorials() {
        let mut fact = 1.0f64;
        for n in 1..20 {
            assert!((ln_gamma(n as f64) - fact.ln()).abs() < 1e-12, "n = {n}");
            fact *= n as f64;
        }
        assert!((ln_gamma(0.5) - std::f64::consts::PI.sqrt().ln()).abs() < 1e-13);
    }

    proptest::proptest! {
        #[test]
        fn gamma_q_is_decreasing_in_x(a in 0.1f64..50.0, x in 0.0f64..100.0, dx in 1e-3f64..5.0) {
            let q1 = regularized_gamma_q(a, x).unwrap();
            let q2 = regularized_gamma_q(a, x + dx).unwrap();
            proptest::prop_assert!(q2 <= q1 + 1e-12);
            proptest::prop_assert!((0.0..=1.0).contains(&q1));
        }

        #[test]
        fn equal_variance_free_fields_pass_both_ways(n in 1i64..100, d in 1i64..100) {
            let r = ratio(n.min(d), d);
            let v = to_f64(&r);
            let a = compare_field("x", Some(&r), Some(&est(v, 0.0)), 5.0).unwrap();
            proptest::prop_assert!(a.pass);
        }
    }
}
