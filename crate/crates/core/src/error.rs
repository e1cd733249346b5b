use thiserror::Error;

/// Invalid domain values: malformed encodings, bad weights, bad probabilities.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ModelError {
    #[error("invalid instruction set `{0}`: expected three of G, R, N")]
    InvalidInstructionSet(String),
    #[error("invalid pair state `{0}`: expected XXX-YYY over G, R, N")]
    InvalidPairState(String),
    #[error("unknown distribution `{0}`")]
    UnknownDistribution(String),
    #[error("NegativeWeight: entry {index} ({state}) has weight {weight}")]
    NegativeWeight { index: usize, state: String, weight: String },
    #[error("WeightSumMismatch: weights sum to {sum}, expected 1 within 1e-12")]
    WeightSumMismatch { sum: String },
    #[error("EmptyDistribution: source has no entries")]
    EmptyDistribution,
    #[error("DuplicateState: entry {index} repeats {state}")]
    DuplicateState { index: usize, state: String },
    #[error("probability {0} is outside [0, 1]")]
    InvalidProbability(String),
    #[error("cannot parse `{0}` as an exact number")]
    InvalidNumber(String),
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ExactError {
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error("instruction set {0} contains a no-flash entry")]
    ContainsNoFlash(String),
    #[error("DegenerateConditioning: {0}")]
    DegenerateConditioning(String),
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum TallyError {
    #[error("tally count overflow in cell {cell}")]
    Overflow { cell: usize },
    #[error("trial count overflow")]
    TrialOverflow,
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum StatsError {
    #[error("NoCoincidences: tally contains no double-flash trials")]
    NoCoincidences,
    #[error("domain error: {0}")]
    Domain(String),
}
