//! Seeded Monte Carlo simulation of the device.
//!
//! Trial `i` draws all of its randomness from counter positions derived from
//! `(seed, i)`, so a run is a pure function of `(config, n_trials, seed)`.
//! The trial range is cut into `n_streams` contiguous blocks which may run
//! on any number of threads; their tallies merge to the same result.

mod estimate;
mod rng;
mod tally;

pub use estimate::{estimate_stats, wilson_interval, Estimate, EstimatedStats, Z_95};
pub use rng::{below, mix64, CounterRng, TrialWords, WORDS_PER_TRIAL};
pub use tally::{merge, TallyCounts};

use std::ops::Range;

use crate::error::ModelError;
use crate::model::{ExperimentConfig, Outcome, Setting, Switch, TrialRecord};
use crate::rational::to_fixed64;

#[derive(Clone, Debug)]
pub struct SimulationPlan {
    pub config: ExperimentConfig,
    pub n_trials: u64,
    pub seed: u64,
    pub n_streams: usize,
}

impl SimulationPlan {
    pub fn new(config: ExperimentConfig, n_trials: u64, seed: u64) -> Self {
        SimulationPlan { config, n_trials, seed, n_streams: 1 }
    }

    pub fn with_streams(mut self, n_streams: usize) -> Self {
        self.n_streams = n_streams;
        self
    }

    /// Contiguous trial ranges, one per stream.
    pub fn stream_ranges(&self) -> Vec<Range<u64>> {
        let k = self.n_streams.max(1) as u64;
        let (base, extra) = (self.n_trials / k, self.n_trials % k);
        let mut start = 0;
        (0..k)
            .map(|s| {
                let len = base + u64::from(s < extra);
                let r = start..start + len;
                start += len;
                r
            })
            .collect()
    }
}

// word slots within a trial
const W_STATE: u64 = 0;
const W_FAIL_A: u64 = 1;
const W_SET_A: u64 = 2;
const W_FAIL_B: u64 = 3;
const W_SET_B: u64 = 4;

/// Precomputed sampling tables for one config.
///
/// State selection compares one uniform word against cumulative weights in
/// 64-bit fixed point, taken exactly from the rational weights.
#[derive(Clone, Debug)]
pub struct TrialSampler {
    cumulative: Vec<u128>,
    /// Outcome index per state, side and switch index.
    outcomes: Vec<[[u8; 4]; 2]>,
    fail_a: u128,
    fail_b: u128,
}

impl TrialSampler {
    pub fn new(config: &ExperimentConfig) -> Result<Self, ModelError> {
        config.validate()?;
        let entries = config.source.entries();
        let mut acc = num_rational::BigRational::from_integer(0.into());
        let mut cumulative = Vec::with_capacity(entries.len());
        let mut outcomes = Vec::with_capacity(entries.len());
        for (i, (state, w)) in entries.iter().enumerate() {
            acc += w;
            let last = i + 1 == entries.len();
            cumulative.push(if last { 1u128 << 64 } else { to_fixed64(&acc) });
            let table = |set: &crate::model::InstructionSet| {
                let mut row = [Outcome::NoFlash.index() as u8; 4];
                for s in Setting::ALL {
                    row[s.index() + 1] = set.outcome_for(s).index() as u8;
                }
                row
            };
            outcomes.push([table(&state.alice), table(&state.bob)]);
        }
        Ok(TrialSampler {
            cumulative,
            outcomes,
            fail_a: to_fixed64(config.detector_a.failure_probability()),
            fail_b: to_fixed64(config.detector_b.failure_probability()),
        })
    }

    #[inline]
    fn pick_state(&self, word: u64) -> usize {
        let w = word as u128;
        self.cumulative.iter().position(|&c| w < c).unwrap_or(self.cumulative.len() - 1)
    }

    #[inline]
    fn pick_switch(threshold: u128, fail_word: impl FnOnce() -> u64, set_word: impl FnOnce() -> u64) -> usize {
        if threshold != 0 && (fail_word() as u128) < threshold {
            0
        } else {
            below(set_word(), 3) as usize + 1
        }
    }

    /// Switch indices, state index and cell of one trial.
    #[inline]
    fn sample_cell(&self, words: TrialWords<'_>) -> usize {
        let state = if self.cumulative.len() == 1 { 0 } else { self.pick_state(words.get(W_STATE)) };
        let sa = Self::pick_switch(self.fail_a, || words.get(W_FAIL_A), || words.get(W_SET_A));
        let sb = Self::pick_switch(self.fail_b, || words.get(W_FAIL_B), || words.get(W_SET_B));
        let [row_a, row_b] = &self.outcomes[state];
        let (oa, ob) = (row_a[sa] as usize, row_b[sb] as usize);
        ((sa * 4 + sb) * 3 + oa) * 3 + ob
    }

    /// Full record of trial `i`; the slow path of what [`run_trials`] counts.
    pub fn trial(&self, config: &ExperimentConfig, rng: &CounterRng, i: u64) -> TrialRecord {
        let words = rng.trial(i);
        let state_index = if self.cumulative.len() == 1 { 0 } else { self.pick_state(words.get(W_STATE)) };
        let sa = Self::pick_switch(self.fail_a, || words.get(W_FAIL_A), || words.get(W_SET_A));
        let sb = Self::pick_switch(self.fail_b, || words.get(W_FAIL_B), || words.get(W_SET_B));
        let state = &config.source.entries()[state_index].0;
        TrialRecord::evaluate(state, Switch::from_index(sa), Switch::from_index(sb))
    }

    /// Tally of the trials in `range`.
    pub fn run_range(&self, rng: &CounterRng, range: Range<u64>) -> TallyCounts {
        let mut tally = TallyCounts::empty();
        for i in range {
            tally.add_to_cell(self.sample_cell(rng.trial(i)));
        }
        tally
    }
}

/// Runs `plan.n_trials` trials and returns their tally.
pub fn run_trials(plan: &SimulationPlan) -> Result<TallyCounts, ModelError> {
    let sampler = TrialSampler::new(&plan.config)?;
    let rng = CounterRng::new(plan.seed);
    let ranges = plan.stream_ranges();

    #[cfg(feature = "parallel")]
    let parts: Vec<TallyCounts> = {
        use rayon::prelude::*;
        ranges.into_par_iter().map(|r| sampler.run_range(&rng, r)).collect()
    };
    #[cfg(not(feature = "parallel"))]
    let parts: Vec<TallyCounts> = ranges.into_iter().map(|r| sampler.run_range(&rng, r)).collect();

    let mut total = TallyCounts::empty();
    for p in &parts {
        // a single run cannot exceed u64 trials, so this never overflows
        total.merge_from(p).expect("per-run counts fit in u64");
    }
    Ok(total)
}

/// Caps the global worker pool. Returns false if a pool already exists.
#[cfg(feature = "parallel")]
pub fn init_thread_pool(max_threads: Option<usize>) -> bool {
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(n) = max_threads {
        builder = builder.num_threads(n.max(1));
    }
    builder.build_global().is_ok()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::builtin_distribution;

    fn config(name: &str) -> ExperimentConfig {
        ExperimentConfig::new(builtin_distribution(name).unwrap())
    }

    #[test]
    fn homogeneous_state_always_same_colour() {
        let plan = SimulationPlan::new(config("single(RRR-RRR)"), 1000, 42);
        let t = run_trials(&plan).unwrap();
        assert_eq!(t.n_trials(), 1000);
        assert_eq!(t.count(|_, _, oa, ob| oa == Outcome::Red && ob == Outcome::Red), 1000);
    }

    #[test]
    fn empty_run() {
        let plan = SimulationPlan::new(config("table1_uniform"), 0, 3).with_streams(4);
        let t = run_trials(&plan).unwrap();
        assert_eq!(t, TallyCounts::empty());
    }

    #[test]
    fn stream_ranges_cover_exactly() {
        let plan = SimulationPlan::new(config("table1_uniform"), 10, 0).with_streams(4);
        let r = plan.stream_ranges();
        assert_eq!(r, vec![0..3, 3..6, 6..8, 8..10]);
        let plan = SimulationPlan::new(config("table1_uniform"), 2, 0).with_streams(4);
        assert_eq!(plan.stream_ranges().iter().map(|r| r.end - r.start).sum::<u64>(), 2);
    }

    #[test]
    fn stream_count_does_not_change_tally() {
        let base = SimulationPlan::new(config("table1_uniform"), 50_001, 9);
        let one = run_trials(&base.clone().with_streams(1)).unwrap();
        for k in [2, 3, 4, 7] {
            assert_eq!(run_trials(&base.clone().with_streams(k)).unwrap(), one);
        }
    }

    #[test]
    fn fast_path_agrees_with_trial_records() {
        let cfg = config("table1_uniform").with_detectors(
            crate::model::DetectorModel::new(crate::rational::ratio(1, 4)).unwrap(),
            crate::model::DetectorModel::new(crate::rational::ratio(1, 3)).unwrap(),
        );
        let sampler = TrialSampler::new(&cfg).unwrap();
        let rng = CounterRng::new(5);
        let mut slow = TallyCounts::empty();
        for i in 0..5000 {
            let rec = sampler.trial(&cfg, &rng, i);
            if rec.switch_a == Switch::Failure {
                assert_eq!(rec.outcome_a, Outcome::NoFlash);
            }
            slow.record(&rec);
        }
        assert_eq!(slow, sampler.run_range(&rng, 0..5000));
    }

    #[test]
    fn failure_cells_never_flash() {
        let d = crate::model::DetectorModel::new(crate::rational::ratio(1, 2)).unwrap();
        let plan = SimulationPlan::new(config("all_eight_uniform").with_detectors(d.clone(), d), 20_000, 1);
        let t = run_trials(&plan).unwrap();
        assert_eq!(t.count(|sa, _, oa, _| sa == Switch::Failure && oa.is_flash()), 0);
        assert_eq!(t.count(|_, sb, _, ob| sb == Switch::Failure && ob.is_flash()), 0);
        assert!(t.count(|sa, _, _, _| sa == Switch::Failure) > 9_000);
    }

    #[test]
    fn always_failing_detector() {
        let d = crate::model::DetectorModel::new(crate::rational::ratio(1, 1)).unwrap();
        let plan = SimulationPlan::new(config("table1_uniform").with_detectors(d, Default::default()), 1000, 1);
        let t = run_trials(&plan).unwrap();
        assert_eq!(t.count(|sa, _, _, _| sa == Switch::Failure), 1000);
    }
}
