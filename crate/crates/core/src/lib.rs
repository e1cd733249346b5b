//! Exact analysis and Monte Carlo simulation of Mermin's three-setting,
//! two-colour device and its local-realist extensions with non-detection.
//!
//! Non-detection enters in two ways. Detector-side: a switch position that
//! never flashes, chosen with probability `p` independently of the particle
//! ([`model::DetectorModel`]). Particle-side: instruction sets containing a
//! "no flash" entry ([`model::Outcome::NoFlash`]). Statistics are computed
//! on coincidences (both lamps flash), as in a real experiment.
//!
//! * [`exact`] enumerates the joint distribution in rational arithmetic.
//! * [`montecarlo`] simulates trials with a counter-based generator so the
//!   tally depends only on `(config, n_trials, seed)`.
//! * [`stats`] compares the two and tests whether the detected sample size
//!   depends on the setting pair.

pub mod config;
pub mod error;
pub mod exact;
pub mod model;
pub mod montecarlo;
pub mod rational;
pub mod report;
pub mod stats;

pub use error::{ExactError, ModelError, StatsError, TallyError};
pub use exact::{
    analyze, case_b_same_fraction, conditional_stats, detector_invariance_check, enumerate_joint,
    min_case_b_no_noflash, CaseStats, JointTable,
};
pub use model::{
    builtin_distribution, outcome_for, validate_distribution, DetectorModel, ExperimentConfig,
    InstructionClass, InstructionSet, Outcome, PairState, Setting, SourceDistribution, Switch,
    TrialRecord,
};
pub use montecarlo::{estimate_stats, run_trials, EstimatedStats, SimulationPlan, TallyCounts};
pub use stats::{compare, regularized_gamma_q, settings_independence_test};
