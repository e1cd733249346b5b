//! Exact enumeration of the joint distribution over switch positions and lamp
//! outcomes, and the conditional statistics computed on coincidences.
//!
//! Everything here is rational arithmetic; the Monte Carlo engine is checked
//! against these values.

use num_rational::BigRational;
use num_traits::{One, Zero};

use crate::error::ExactError;
use crate::model::{
    cell_index, cell_key, DetectorModel, ExperimentConfig, InstructionSet, Outcome, PairState,
    Setting, SourceDistribution, Switch, TrialRecord, CELL_COUNT,
};

/// Exact probability of every (switch_a, switch_b, outcome_a, outcome_b) cell.
#[derive(Clone, Debug, PartialEq)]
pub struct JointTable {
    prob: Vec<BigRational>,
}

impl JointTable {
    pub fn get(&self, sa: Switch, sb: Switch, oa: Outcome, ob: Outcome) -> &BigRational {
        &self.prob[cell_index(sa, sb, oa, ob)]
    }

    pub fn cells(&self) -> &[BigRational] {
        &self.prob
    }

    pub fn total(&self) -> BigRational {
        self.prob.iter().cloned().sum()
    }

    /// Sum of the cells matching `pred`.
    pub fn mass(&self, pred: impl Fn(Switch, Switch, Outcome, Outcome) -> bool) -> BigRational {
        self.prob
            .iter()
            .enumerate()
            .filter(|(c, _)| {
                let (sa, sb, oa, ob) = cell_key(*c);
                pred(sa, sb, oa, ob)
            })
            .map(|(_, p)| p.clone())
            .sum()
    }
}

/// Builds the joint table: every source entry under every switch pair,
/// weighted by the entry weight and both switch probabilities.
pub fn enumerate_joint(config: &ExperimentConfig) -> Result<JointTable, ExactError> {
    config.validate()?;
    let switch_a = config.detector_a.switch_probabilities();
    let switch_b = config.detector_b.switch_probabilities();
    let mut prob = vec![BigRational::zero(); CELL_COUNT];
    for (state, weight) in config.source.entries() {
        if weight.is_zero() {
            continue;
        }
        for sa in Switch::ALL {
            let wa = weight * &switch_a[sa.index()];
            if wa.is_zero() {
                continue;
            }
            for sb in Switch::ALL {
                let pb = &switch_b[sb.index()];
                if pb.is_zero() {
                    continue;
                }
                let cell = TrialRecord::evaluate(state, sa, sb).cell();
                prob[cell] += &wa * pb;
            }
        }
    }
    Ok(JointTable { prob })
}

/// A conditional probability, or `None` when the conditioning event has
/// probability zero.
pub type Conditional = Option<BigRational>;

/// Statistics of the detected sub-ensemble, plus detector efficiencies.
#[derive(Clone, Debug, PartialEq)]
pub struct CaseStats {
    /// P(same colour | equal settings, both flashed).
    pub p_same_case_a: Conditional,
    /// P(same colour | different settings, both flashed).
    pub p_same_case_b: Conditional,
    pub eta_a: BigRational,
    pub eta_b: BigRational,
    /// P(flash | switch not on 0), per detector.
    pub eta_u_a: Conditional,
    pub eta_u_b: Conditional,
    /// P(switch not on 0), per detector.
    pub eta_f_a: BigRational,
    pub eta_f_b: BigRational,
    /// P(both flash | setting pair chosen), indexed `[a][b]`. The chosen pair
    /// has probability 1/9 under the settings law; a switch landing on 0
    /// counts as a chosen setting that failed, so the rate scales by
    /// (1 - p_a)(1 - p_b).
    pub coincidence_rate: [[Conditional; 3]; 3],
}

impl CaseStats {
    /// Every field by its report name, undefined fields as `None`.
    pub fn fields(&self) -> Vec<(String, Option<&BigRational>)> {
        let mut out = vec![
            ("p_same_case_a".to_string(), self.p_same_case_a.as_ref()),
            ("p_same_case_b".to_string(), self.p_same_case_b.as_ref()),
            ("eta_a".to_string(), Some(&self.eta_a)),
            ("eta_b".to_string(), Some(&self.eta_b)),
            ("eta_u_a".to_string(), self.eta_u_a.as_ref()),
            ("eta_u_b".to_string(), self.eta_u_b.as_ref()),
            ("eta_f_a".to_string(), Some(&self.eta_f_a)),
            ("eta_f_b".to_string(), Some(&self.eta_f_b)),
        ];
        for a in Setting::ALL {
            for b in Setting::ALL {
                out.push((
                    coincidence_field_name(a, b),
                    self.coincidence_rate[a.index()][b.index()].as_ref(),
                ));
            }
        }
        out
    }

    /// Mean of the nine coincidence rates, if all are defined.
    pub fn mean_coincidence_rate(&self) -> Conditional {
        let mut sum = BigRational::zero();
        for row in &self.coincidence_rate {
            for c in row {
                sum += c.as_ref()?;
            }
        }
        Some(sum / BigRational::from_integer(9.into()))
    }

    /// True when all nine coincidence rates are defined and equal.
    pub fn coincidence_uniform(&self) -> bool {
        let first = &self.coincidence_rate[0][0];
        first.is_some() && self.coincidence_rate.iter().flatten().all(|c| c == first)
    }
}

pub fn coincidence_field_name(a: Setting, b: Setting) -> String {
    format!("coincidence_rate[{a}{b}]")
}

/// Probability the experimenter chooses a given setting pair.
fn setting_pair_probability() -> BigRational {
    BigRational::new(1.into(), 9.into())
}

fn conditional(num: BigRational, den: BigRational) -> Conditional {
    if den.is_zero() {
        None
    } else {
        Some(num / den)
    }
}

/// Conditional statistics of a joint table. Colour comparisons use
/// double-flash events only.
pub fn conditional_stats(t: &JointTable) -> CaseStats {
    let both = |oa: Outcome, ob: Outcome| oa.is_flash() && ob.is_flash();
    let case = |equal: bool| {
        let selected = move |sa: Switch, sb: Switch| match (sa.setting(), sb.setting()) {
            (Some(a), Some(b)) => (a == b) == equal,
            _ => false,
        };
        let den = t.mass(|sa, sb, oa, ob| selected(sa, sb) && both(oa, ob));
        let num = t.mass(|sa, sb, oa, ob| selected(sa, sb) && both(oa, ob) && oa == ob);
        conditional(num, den)
    };

    let eta_a = t.mass(|_, _, oa, _| oa.is_flash());
    let eta_b = t.mass(|_, _, _, ob| ob.is_flash());
    let eta_f_a = t.mass(|sa, _, _, _| sa != Switch::Failure);
    let eta_f_b = t.mass(|_, sb, _, _| sb != Switch::Failure);
    let eta_u_a = conditional(
        t.mass(|sa, _, oa, _| sa != Switch::Failure && oa.is_flash()),
        eta_f_a.clone(),
    );
    let eta_u_b = conditional(
        t.mass(|_, sb, _, ob| sb != Switch::Failure && ob.is_flash()),
        eta_f_b.clone(),
    );

    let mut coincidence_rate: [[Conditional; 3]; 3] = Default::default();
    for a in Setting::ALL {
        for b in Setting::ALL {
            let (swa, swb) = (Switch::Set(a), Switch::Set(b));
            let coincident = t.mass(|sa, sb, oa, ob| sa == swa && sb == swb && both(oa, ob));
            coincidence_rate[a.index()][b.index()] = conditional(coincident, setting_pair_probability());
        }
    }

    CaseStats {
        p_same_case_a: case(true),
        p_same_case_b: case(false),
        eta_a,
        eta_b,
        eta_u_a,
        eta_u_b,
        eta_f_a,
        eta_f_b,
        coincidence_rate,
    }
}

/// Shorthand for `conditional_stats(enumerate_joint(config))`.
pub fn analyze(config: &ExperimentConfig) -> Result<CaseStats, ExactError> {
    Ok(conditional_stats(&enumerate_joint(config)?))
}

/// Fraction of the six different-setting pairs giving equal colours when
/// both particles carry `set`. Computed by direct comparison of entries,
/// independently of the joint table.
pub fn case_b_same_fraction(set: &InstructionSet) -> Result<BigRational, ExactError> {
    if set.has_no_flash() {
        return Err(ExactError::ContainsNoFlash(set.to_string()));
    }
    let mut same = 0i64;
    let mut total = 0i64;
    for a in Setting::ALL {
        for b in Setting::ALL {
            if a != b {
                total += 1;
                if set.outcome_for(a) == set.outcome_for(b) {
                    same += 1;
                }
            }
        }
    }
    Ok(BigRational::new(same.into(), total.into()))
}

/// Result of minimising Case-b same-colour frequency over sources emitting
/// identical, N-free pairs.
#[derive(Clone, Debug, PartialEq)]
pub struct CaseBMinimum {
    pub value: BigRational,
    /// Instruction sets attaining the minimum.
    pub support: Vec<InstructionSet>,
    /// Case-b fraction of each of the eight candidate sets.
    pub vertex_values: Vec<(InstructionSet, BigRational)>,
}

/// The objective is linear in the source weights, so its minimum over the
/// simplex is attained at a vertex: evaluating the eight pure sources is
/// enough.
pub fn min_case_b_no_noflash() -> CaseBMinimum {
    let vertex_values: Vec<(InstructionSet, BigRational)> = InstructionSet::all_without_no_flash()
        .map(|s| {
            let v = case_b_same_fraction(&s).expect("N-free set");
            (s, v)
        })
        .collect();
    let value = vertex_values
        .iter()
        .map(|(_, v)| v.clone())
        .min()
        .expect("eight vertices");
    let support = vertex_values
        .iter()
        .filter(|(_, v)| *v == value)
        .map(|(s, _)| *s)
        .collect();
    CaseBMinimum { value, support, vertex_values }
}

/// Stats at one detector failure probability.
#[derive(Clone, Debug, PartialEq)]
pub struct InvariancePoint {
    pub p: BigRational,
    pub stats: CaseStats,
}

#[derive(Clone, Debug, PartialEq)]
pub struct InvarianceReport {
    pub points: Vec<InvariancePoint>,
    /// Case-a/Case-b conditionals and both eta_u equal at every p.
    pub conditionals_invariant: bool,
    /// Every coincidence rate equals its ideal-detector value times (1 - p)^2.
    pub coincidence_scaling_holds: bool,
    /// eta = eta_u * eta_f on both sides at every p.
    pub multiplicative: bool,
}

impl InvarianceReport {
    pub fn holds(&self) -> bool {
        self.conditionals_invariant && self.coincidence_scaling_holds && self.multiplicative
    }
}

/// Re-analyzes `config` with both detector failure probabilities replaced by
/// each value in `p_values`.
pub fn detector_invariance_check(
    config: &ExperimentConfig,
    p_values: &[BigRational],
) -> Result<InvarianceReport, ExactError> {
    config.validate()?;
    let ideal = analyze(&ExperimentConfig {
        detector_a: DetectorModel::ideal(),
        detector_b: DetectorModel::ideal(),
        ..config.clone()
    })?;
    let mut points = Vec::with_capacity(p_values.len());
    for p in p_values {
        if *p >= BigRational::one() {
            return Err(ExactError::DegenerateConditioning(format!(
                "failure probability {} leaves no detected pairs",
                crate::rational::render(p)
            )));
        }
        let detector = DetectorModel::new(p.clone())?;
        let stats = analyze(&config.clone().with_detectors(detector.clone(), detector))?;
        points.push(InvariancePoint { p: p.clone(), stats });
    }

    let conditionals_invariant = points.windows(2).all(|w| {
        let (x, y) = (&w[0].stats, &w[1].stats);
        x.p_same_case_a == y.p_same_case_a
            && x.p_same_case_b == y.p_same_case_b
            && x.eta_u_a == y.eta_u_a
            && x.eta_u_b == y.eta_u_b
    });
    let coincidence_scaling_holds = points.iter().all(|pt| {
        let keep = BigRational::one() - &pt.p;
        let factor = &keep * &keep;
        pt.stats
            .coincidence_rate
            .iter()
            .flatten()
            .zip(ideal.coincidence_rate.iter().flatten())
            .all(|(got, base)| match (got, base) {
                (Some(g), Some(b)) => *g == b * &factor,
                (None, None) => true,
                _ => false,
            })
    });
    let multiplicative = points.iter().all(|pt| eta_factorizes(&pt.stats));
    Ok(InvarianceReport { points, conditionals_invariant, coincidence_scaling_holds, multiplicative })
}

/// eta = eta_u * eta_f on both sides. When eta_f is zero eta_u is undefined
/// and eta must be zero.
pub fn eta_factorizes(s: &CaseStats) -> bool {
    let side = |eta: &BigRational, u: &Conditional, f: &BigRational| match u {
        Some(u) => *eta == u * f,
        None => eta.is_zero() && f.is_zero(),
    };
    side(&s.eta_a, &s.eta_u_a, &s.eta_f_a) && side(&s.eta_b, &s.eta_u_b, &s.eta_f_b)
}

/// Joint table for one pair state under ideal detectors.
pub fn enumerate_single(state: PairState) -> JointTable {
    enumerate_joint(&ExperimentConfig::new(SourceDistribution::single(state)))
        .expect("single-state config is valid")
}
