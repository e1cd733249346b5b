//! Counter-based random words.
//!
//! Word `j` of trial `i` is a pure function of `(seed, i, j)`: the SplitMix64
//! finalizer applied to a Weyl sequence position. Any trial can be generated
//! without touching the others, so the trial range can be split arbitrarily
//! across workers.

const GAMMA: u64 = 0x9E37_79B9_7F4A_7C15;

/// Words reserved per trial. Only five are used.
pub const WORDS_PER_TRIAL: u64 = 8;

#[inline]
pub fn mix64(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct CounterRng {
    key: u64,
}

impl CounterRng {
    pub fn new(seed: u64) -> Self {
        CounterRng { key: mix64(seed ^ 0x6A09_E667_F3BC_C909) }
    }

    #[inline]
    pub fn word(&self, counter: u64) -> u64 {
        mix64(self.key.wrapping_add(counter.wrapping_add(1).wrapping_mul(GAMMA)))
    }

    #[inline]
    pub fn trial(&self, trial: u64) -> TrialWords<'_> {
        TrialWords { rng: self, base: trial.wrapping_mul(WORDS_PER_TRIAL) }
    }
}

/// The words of a single trial.
#[derive(Clone, Copy, Debug)]
pub struct TrialWords<'a> {
    rng: &'a CounterRng,
    base: u64,
}

impl TrialWords<'_> {
    #[inline]
    pub fn get(&self, j: u64) -> u64 {
        debug_assert!(j < WORDS_PER_TRIAL);
        self.rng.word(self.base + j)
    }
}

/// Maps a uniform word onto `0..n` by the high half of a 128-bit product.
#[inline]
pub fn below(word: u64, n: u64) -> u64 {
    ((word as u128 * n as u128) >> 64) as u64
}
