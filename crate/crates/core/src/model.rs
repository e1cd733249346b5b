//! Domain vocabulary of the device: outcomes, switch settings, instruction
//! sets carried by the particles, pair states, the source distribution and
//! the detector failure model.
//!
//! The detector's "position 0" (a switch position that never flashes) is not
//! a [`Setting`]. It lives in [`DetectorModel`] and shows up in trial records
//! as [`Switch::Failure`], so particle-carried and apparatus-carried
//! non-detection stay distinguishable.

use std::collections::HashSet;
use std::fmt;
use std::str::FromStr;

use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};

use crate::error::ModelError;
use crate::rational::{parse_decimal, render};

/// Absolute tolerance on the sum of source weights.
pub const WEIGHT_SUM_TOLERANCE: &str = "1e-12";

/// Lamp behaviour of one detector on one trial.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Outcome {
    Green,
    Red,
    NoFlash,
}

impl Outcome {
    pub const ALL: [Outcome; 3] = [Outcome::Green, Outcome::Red, Outcome::NoFlash];

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn from_index(i: usize) -> Outcome {
        Self::ALL[i]
    }

    pub fn symbol(self) -> char {
        match self {
            Outcome::Green => 'G',
            Outcome::Red => 'R',
            Outcome::NoFlash => 'N',
        }
    }

    pub fn from_symbol(c: char) -> Option<Outcome> {
        match c {
            'G' => Some(Outcome::Green),
            'R' => Some(Outcome::Red),
            'N' => Some(Outcome::NoFlash),
            _ => None,
        }
    }

    #[inline]
    pub fn is_flash(self) -> bool {
        self != Outcome::NoFlash
    }
}

impl fmt::Display for Outcome {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.symbol())
    }
}

/// One of the three switch positions of a detector.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Setting {
    S1,
    S2,
    S3,
}

impl Setting {
    pub const ALL: [Setting; 3] = [Setting::S1, Setting::S2, Setting::S3];

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn from_index(i: usize) -> Setting {
        Self::ALL[i]
    }

    /// Switch label as printed on the device (1, 2 or 3).
    pub fn label(self) -> u8 {
        self as u8 + 1
    }
}

impl fmt::Display for Setting {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.label())
    }
}

/// Where a detector's switch landed on one trial: the failure position 0 or
/// one of the three settings.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Switch {
    Failure,
    Set(Setting),
}

impl Switch {
    pub const ALL: [Switch; 4] = [
        Switch::Failure,
        Switch::Set(Setting::S1),
        Switch::Set(Setting::S2),
        Switch::Set(Setting::S3),
    ];

    /// 0 for the failure position, 1..=3 for the settings.
    pub fn index(self) -> usize {
        match self {
            Switch::Failure => 0,
            Switch::Set(s) => s.index() + 1,
        }
    }

    pub fn from_index(i: usize) -> Switch {
        Self::ALL[i]
    }

    pub fn setting(self) -> Option<Setting> {
        match self {
            Switch::Failure => None,
            Switch::Set(s) => Some(s),
        }
    }
}

impl fmt::Display for Switch {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.index())
    }
}

/// Class of an instruction set.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum InstructionClass {
    /// All three entries the same colour (RRR, GGG).
    Homogeneous,
    /// No N; one colour once, the other twice.
    TwoOne,
    /// At least one N entry.
    WithNoFlash,
}

/// The hidden variable carried by one particle: the outcome it produces at
/// each of the three settings.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct InstructionSet([Outcome; 3]);

impl InstructionSet {
    pub const fn new(outcomes: [Outcome; 3]) -> Self {
        InstructionSet(outcomes)
    }

    pub fn outcomes(&self) -> [Outcome; 3] {
        self.0
    }

    #[inline]
    pub fn outcome_for(&self, setting: Setting) -> Outcome {
        self.0[setting.index()]
    }

    pub fn has_no_flash(&self) -> bool {
        self.0.contains(&Outcome::NoFlash)
    }

    pub fn classify(&self) -> InstructionClass {
        if self.has_no_flash() {
            InstructionClass::WithNoFlash
        } else if self.0[0] == self.0[1] && self.0[1] == self.0[2] {
            InstructionClass::Homogeneous
        } else {
            InstructionClass::TwoOne
        }
    }

    /// All 27 maps from settings to outcomes, in lexicographic G < R < N order.
    pub fn all() -> impl Iterator<Item = InstructionSet> {
        (0..27).map(|k| {
            InstructionSet([
                Outcome::from_index(k / 9),
                Outcome::from_index((k / 3) % 3),
                Outcome::from_index(k % 3),
            ])
        })
    }

    /// The eight sets without any N entry.
    pub fn all_without_no_flash() -> impl Iterator<Item = InstructionSet> {
        Self::all().filter(|s| !s.has_no_flash())
    }
}

/// Free-function form of [`InstructionSet::outcome_for`].
#[inline]
pub fn outcome_for(set: &InstructionSet, setting: Setting) -> Outcome {
    set.outcome_for(setting)
}

impl fmt::Display for InstructionSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for o in self.0 {
            write!(f, "{}", o.symbol())?;
        }
        Ok(())
    }
}

impl FromStr for InstructionSet {
    type Err = ModelError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let bad = || ModelError::InvalidInstructionSet(s.to_string());
        let chars: Vec<char> = s.trim().chars().collect();
        if chars.len() != 3 {
            return Err(bad());
        }
        let mut out = [Outcome::NoFlash; 3];
        for (slot, c) in out.iter_mut().zip(chars) {
            *slot = Outcome::from_symbol(c.to_ascii_uppercase()).ok_or_else(bad)?;
        }
        Ok(InstructionSet(out))
    }
}

impl Serialize for InstructionSet {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for InstructionSet {
    fn deserialize<D: serde::Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// Instruction sets of the two particles of one emitted pair, written
/// `XXX-YYY` (Alice, Bob).
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct PairState {
    pub alice: InstructionSet,
    pub bob: InstructionSet,
}

impl PairState {
    pub const fn new(alice: InstructionSet, bob: InstructionSet) -> Self {
        PairState { alice, bob }
    }

    /// Both particles carry the same instructions.
    pub const fn identical(set: InstructionSet) -> Self {
        PairState { alice: set, bob: set }
    }

    /// Exchange the two particles.
    pub fn swapped(&self) -> Self {
        PairState { alice: self.bob, bob: self.alice }
    }
}

impl fmt::Display for PairState {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}-{}", self.alice, self.bob)
    }
}

impl FromStr for PairState {
    type Err = ModelError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let (a, b) = s
            .trim()
            .split_once('-')
            .ok_or_else(|| ModelError::InvalidPairState(s.to_string()))?;
        let parse = |t: &str| {
            t.parse::<InstructionSet>()
                .map_err(|_| ModelError::InvalidPairState(s.to_string()))
        };
        Ok(PairState { alice: parse(a)?, bob: parse(b)? })
    }
}

impl Serialize for PairState {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for PairState {
    fn deserialize<D: serde::Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// Weighted list of pair states emitted by the source.
///
/// Construction validates the weights. The stored weights are renormalized
/// by their exact sum, so a decimal input such as three weights of
/// `0.333333333333` is accepted (within tolerance) and stored as exactly 1/3.
#[derive(Clone, Debug, PartialEq)]
pub struct SourceDistribution {
    entries: Vec<(PairState, BigRational)>,
}

impl SourceDistribution {
    pub fn new(entries: Vec<(PairState, BigRational)>) -> Result<Self, ModelError> {
        validate(&entries)?;
        let sum: BigRational = entries.iter().map(|(_, w)| w.clone()).sum();
        let entries = if sum.is_one() {
            entries
        } else {
            entries.into_iter().map(|(s, w)| (s, w / &sum)).collect()
        };
        Ok(SourceDistribution { entries })
    }

    /// Equal weights over the given states.
    pub fn uniform(states: impl IntoIterator<Item = PairState>) -> Result<Self, ModelError> {
        let states: Vec<PairState> = states.into_iter().collect();
        let w = BigRational::new(1.into(), states.len().max(1).into());
        Self::new(states.into_iter().map(|s| (s, w.clone())).collect())
    }

    pub fn single(state: PairState) -> Self {
        SourceDistribution { entries: vec![(state, BigRational::one())] }
    }

    pub fn entries(&self) -> &[(PairState, BigRational)] {
        &self.entries
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Same weights with Alice and Bob exchanged in every state.
    pub fn swapped(&self) -> Self {
        SourceDistribution {
            entries: self.entries.iter().map(|(s, w)| (s.swapped(), w.clone())).collect(),
        }
    }
}

/// Checks the source-distribution invariants on a raw entry list.
pub fn validate(entries: &[(PairState, BigRational)]) -> Result<(), ModelError> {
    if entries.is_empty() {
        return Err(ModelError::EmptyDistribution);
    }
    let mut seen = HashSet::with_capacity(entries.len());
    for (index, (state, weight)) in entries.iter().enumerate() {
        if weight.is_negative() {
            return Err(ModelError::NegativeWeight {
                index,
                state: state.to_string(),
                weight: render(weight),
            });
        }
        if !seen.insert(*state) {
            return Err(ModelError::DuplicateState { index, state: state.to_string() });
        }
    }
    let sum: BigRational = entries.iter().map(|(_, w)| w.clone()).sum();
    let tolerance = parse_decimal(WEIGHT_SUM_TOLERANCE).expect("constant parses");
    if (&sum - BigRational::one()).abs() > tolerance || sum.is_zero() {
        return Err(ModelError::WeightSumMismatch { sum: render(&sum) });
    }
    Ok(())
}

/// Validates an already-constructed distribution.
pub fn validate_distribution(d: &SourceDistribution) -> Result<(), ModelError> {
    validate(d.entries())
}

/// The twelve Table I pair states. The last six are the first six with the
/// particles exchanged.
pub const TABLE1_STATES: [&str; 12] = [
    "NRG-GRG", "NGR-RGR", "RNG-RRG", "GNR-GGR", "RGN-RGG", "GRN-GRR",
    "GRG-NRG", "RGR-NGR", "RRG-RNG", "GGR-GNR", "RGG-RGN", "GRR-GRN",
];

/// Named source distributions.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Builtin {
    Table1Uniform,
    TwoOneUniform,
    AllEightUniform,
    Single(PairState),
}

impl FromStr for Builtin {
    type Err = ModelError;

    /// Accepts `table1_uniform`, `two_one_uniform`, `all_eight_uniform` and
    /// `single(XXX-YYY)`.
    fn from_str(name: &str) -> Result<Self, Self::Err> {
        let name = name.trim();
        match name {
            "table1_uniform" => Ok(Builtin::Table1Uniform),
            "two_one_uniform" => Ok(Builtin::TwoOneUniform),
            "all_eight_uniform" => Ok(Builtin::AllEightUniform),
            _ => name
                .strip_prefix("single(")
                .and_then(|rest| rest.strip_suffix(')'))
                .map(|inner| inner.parse().map(Builtin::Single))
                .unwrap_or_else(|| Err(ModelError::UnknownDistribution(name.to_string()))),
        }
    }
}

impl fmt::Display for Builtin {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Builtin::Table1Uniform => write!(f, "table1_uniform"),
            Builtin::TwoOneUniform => write!(f, "two_one_uniform"),
            Builtin::AllEightUniform => write!(f, "all_eight_uniform"),
            Builtin::Single(s) => write!(f, "single({s})"),
        }
    }
}

impl Builtin {
    pub fn distribution(&self) -> SourceDistribution {
        let identical = |class: fn(&InstructionSet) -> bool| {
            InstructionSet::all_without_no_flash()
                .filter(&class)
                .map(PairState::identical)
                .collect::<Vec<_>>()
        };
        let dist = match self {
            Builtin::Table1Uniform => SourceDistribution::uniform(
                TABLE1_STATES.iter().map(|s| s.parse().expect("table state parses")),
            ),
            Builtin::TwoOneUniform => SourceDistribution::uniform(identical(|s| {
                s.classify() == InstructionClass::TwoOne
            })),
            Builtin::AllEightUniform => SourceDistribution::uniform(identical(|_| true)),
            Builtin::Single(state) => Ok(SourceDistribution::single(*state)),
        };
        dist.expect("builtin distributions are valid")
    }
}

/// Looks up a named source distribution.
pub fn builtin_distribution(name: &str) -> Result<SourceDistribution, ModelError> {
    Ok(name.parse::<Builtin>()?.distribution())
}

/// Apparatus-side non-detection: with probability `failure_probability` the
/// switch lands on position 0 and the detector stays dark; otherwise each
/// setting is selected with probability (1 - p)/3.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct DetectorModel {
    failure_probability: BigRational,
}

impl DetectorModel {
    pub fn new(failure_probability: BigRational) -> Result<Self, ModelError> {
        if failure_probability.is_negative() || failure_probability > BigRational::one() {
            return Err(ModelError::InvalidProbability(render(&failure_probability)));
        }
        Ok(DetectorModel { failure_probability })
    }

    /// A detector whose switch never lands on position 0.
    pub fn ideal() -> Self {
        DetectorModel { failure_probability: BigRational::zero() }
    }

    pub fn failure_probability(&self) -> &BigRational {
        &self.failure_probability
    }

    /// Fair-sampling efficiency `1 - p`.
    pub fn fair_efficiency(&self) -> BigRational {
        BigRational::one() - &self.failure_probability
    }

    /// Probability of each switch position, indexed as [`Switch::index`].
    pub fn switch_probabilities(&self) -> [BigRational; 4] {
        let each = self.fair_efficiency() / BigRational::from_integer(3.into());
        [self.failure_probability.clone(), each.clone(), each.clone(), each]
    }
}

impl Default for DetectorModel {
    fn default() -> Self {
        Self::ideal()
    }
}

/// How the two switches are chosen. Only one law exists; it is carried so
/// reports state it explicitly.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SettingsLaw {
    #[default]
    IndependentUniform,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ExperimentConfig {
    pub source: SourceDistribution,
    pub detector_a: DetectorModel,
    pub detector_b: DetectorModel,
    pub settings_law: SettingsLaw,
}

impl ExperimentConfig {
    /// Ideal detectors on both sides.
    pub fn new(source: SourceDistribution) -> Self {
        ExperimentConfig {
            source,
            detector_a: DetectorModel::ideal(),
            detector_b: DetectorModel::ideal(),
            settings_law: SettingsLaw::IndependentUniform,
        }
    }

    pub fn with_detectors(mut self, a: DetectorModel, b: DetectorModel) -> Self {
        self.detector_a = a;
        self.detector_b = b;
        self
    }

    pub fn validate(&self) -> Result<(), ModelError> {
        validate_distribution(&self.source)?;
        for d in [&self.detector_a, &self.detector_b] {
            DetectorModel::new(d.failure_probability.clone())?;
        }
        Ok(())
    }
}

/// One trial: where each switch landed and what each lamp did.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct TrialRecord {
    pub switch_a: Switch,
    pub switch_b: Switch,
    pub outcome_a: Outcome,
    pub outcome_b: Outcome,
}

impl TrialRecord {
    /// Evaluates a pair state under the given switch positions.
    pub fn evaluate(state: &PairState, switch_a: Switch, switch_b: Switch) -> Self {
        let side = |set: &InstructionSet, sw: Switch| match sw {
            Switch::Failure => Outcome::NoFlash,
            Switch::Set(s) => set.outcome_for(s),
        };
        TrialRecord {
            switch_a,
            switch_b,
            outcome_a: side(&state.alice, switch_a),
            outcome_b: side(&state.bob, switch_b),
        }
    }

    /// Index into the 144-cell joint layout shared by exact tables and tallies.
    #[inline]
    pub fn cell(&self) -> usize {
        cell_index(self.switch_a, self.switch_b, self.outcome_a, self.outcome_b)
    }

    pub fn is_coincidence(&self) -> bool {
        self.outcome_a.is_flash() && self.outcome_b.is_flash()
    }
}

impl fmt::Display for TrialRecord {
    /// `21GR` style: two switch digits then two lamp letters.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}{}{}{}", self.switch_a, self.switch_b, self.outcome_a, self.outcome_b)
    }
}

/// Number of cells in the joint (switch_a, switch_b, outcome_a, outcome_b) layout.
pub const CELL_COUNT: usize = 4 * 4 * 3 * 3;

#[inline]
pub fn cell_index(sa: Switch, sb: Switch, oa: Outcome, ob: Outcome) -> usize {
    ((sa.index() * 4 + sb.index()) * 3 + oa.index()) * 3 + ob.index()
}

/// Inverse of [`cell_index`].
pub fn cell_key(cell: usize) -> (Switch, Switch, Outcome, Outcome) {
    (
        Switch::from_index(cell / 36),
        Switch::from_index((cell / 9) % 4),
        Outcome::from_index((cell / 3) % 3),
        Outcome::from_index(cell % 3),
    )
}
