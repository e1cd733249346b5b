use crate::model::{Setting, Switch};

use super::TallyCounts;

/// Two-sided 95% normal quantile.
pub const Z_95: f64 = 1.959_963_984_540_054;

/// A relative-frequency estimate with binomial standard error and a 95%
/// Wilson score interval.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Estimate {
    pub successes: u64,
    pub trials: u64,
    pub value: f64,
    pub std_error: f64,
    pub ci_low: f64,
    pub ci_high: f64,
}

impl Estimate {
    /// `None` when `trials` is zero.
    pub fn from_counts(successes: u64, trials: u64) -> Option<Estimate> {
        Self::scaled(successes, trials, 1.0)
    }

    /// `scale * successes / trials`, for a probability divided by a known
    /// constant (such as a coincidence count over the 1/9 chance of one
    /// setting pair). Error and interval scale with it.
    pub fn scaled(successes: u64, trials: u64, scale: f64) -> Option<Estimate> {
        if trials == 0 {
            return None;
        }
        let n = trials as f64;
        let p = successes as f64 / n;
        let (lo, hi) = wilson_interval(successes, trials, Z_95);
        Some(Estimate {
            successes,
            trials,
            value: scale * p,
            std_error: scale * (p * (1.0 - p) / n).sqrt(),
            ci_low: scale * lo,
            ci_high: scale * hi,
        })
    }
}

/// Wilson score interval for `successes` out of `trials` at normal quantile `z`.
pub fn wilson_interval(successes: u64, trials: u64, z: f64) -> (f64, f64) {
    if trials == 0 {
        return (0.0, 1.0);
    }
    let n = trials as f64;
    let p = successes as f64 / n;
    let z2 = z * z;
    let denom = 1.0 + z2 / n;
    let centre = (p + z2 / (2.0 * n)) / denom;
    let half = z * (p * (1.0 - p) / n + z2 / (4.0 * n * n)).sqrt() / denom;
    let lo = if successes == 0 { 0.0 } else { (centre - half).max(0.0) };
    let hi = if successes == trials { 1.0 } else { (centre + half).min(1.0) };
    (lo, hi)
}

/// Estimated counterpart of [`crate::exact::CaseStats`]. `None` marks fields
/// whose conditioning event never occurred.
#[derive(Clone, Debug, PartialEq)]
pub struct EstimatedStats {
    pub n_trials: u64,
    pub p_same_case_a: Option<Estimate>,
    pub p_same_case_b: Option<Estimate>,
    pub eta_a: Option<Estimate>,
    pub eta_b: Option<Estimate>,
    pub eta_u_a: Option<Estimate>,
    pub eta_u_b: Option<Estimate>,
    pub eta_f_a: Option<Estimate>,
    pub eta_f_b: Option<Estimate>,
    pub coincidence_rate: [[Option<Estimate>; 3]; 3],
}

impl EstimatedStats {
    /// Fields in the same order and with the same names as
    /// [`crate::exact::CaseStats::fields`].
    pub fn fields(&self) -> Vec<(String, Option<&Estimate>)> {
        let mut out = vec![
            ("p_same_case_a".to_string(), self.p_same_case_a.as_ref()),
            ("p_same_case_b".to_string(), self.p_same_case_b.as_ref()),
            ("eta_a".to_string(), self.eta_a.as_ref()),
            ("eta_b".to_string(), self.eta_b.as_ref()),
            ("eta_u_a".to_string(), self.eta_u_a.as_ref()),
            ("eta_u_b".to_string(), self.eta_u_b.as_ref()),
            ("eta_f_a".to_string(), self.eta_f_a.as_ref()),
            ("eta_f_b".to_string(), self.eta_f_b.as_ref()),
        ];
        for a in Setting::ALL {
            for b in Setting::ALL {
                out.push((
                    crate::exact::coincidence_field_name(a, b),
                    self.coincidence_rate[a.index()][b.index()].as_ref(),
                ));
            }
        }
        out
    }
}

pub fn estimate_stats(t: &TallyCounts) -> EstimatedStats {
    let both = |oa: crate::model::Outcome, ob: crate::model::Outcome| oa.is_flash() && ob.is_flash();
    let case = |equal: bool| {
        let selected = move |sa: Switch, sb: Switch| match (sa.setting(), sb.setting()) {
            (Some(a), Some(b)) => (a == b) == equal,
            _ => false,
        };
        let den = t.count(|sa, sb, oa, ob| selected(sa, sb) && both(oa, ob));
        let num = t.count(|sa, sb, oa, ob| selected(sa, sb) && both(oa, ob) && oa == ob);
        Estimate::from_counts(num, den)
    };
    let n = t.n_trials();
    let on_a = t.count(|sa, _, _, _| sa != Switch::Failure);
    let on_b = t.count(|_, sb, _, _| sb != Switch::Failure);
    let flash_a = t.count(|_, _, oa, _| oa.is_flash());
    let flash_b = t.count(|_, _, _, ob| ob.is_flash());

    let mut coincidence_rate: [[Option<Estimate>; 3]; 3] = Default::default();
    for a in Setting::ALL {
        for b in Setting::ALL {
            let (swa, swb) = (Switch::Set(a), Switch::Set(b));
            let coincident = t.count(|sa, sb, oa, ob| sa == swa && sb == swb && both(oa, ob));
            // each setting pair is chosen with probability 1/9
            coincidence_rate[a.index()][b.index()] = Estimate::scaled(coincident, n, 9.0);
        }
    }

    EstimatedStats {
        n_trials: n,
        p_same_case_a: case(true),
        p_same_case_b: case(false),
        eta_a: Estimate::from_counts(flash_a, n),
        eta_b: Estimate::from_counts(flash_b, n),
        eta_u_a: Estimate::from_counts(flash_a, on_a),
        eta_u_b: Estimate::from_counts(flash_b, on_b),
        eta_f_a: Estimate::from_counts(on_a, n),
        eta_f_b: Estimate::from_counts(on_b, n),
        coincidence_rate,
    }
}
