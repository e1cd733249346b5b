use std::fmt;

use crate::error::TallyError;
use crate::model::{cell_key, Outcome, Setting, Switch, TrialRecord, CELL_COUNT};

/// Trial counts per (switch_a, switch_b, outcome_a, outcome_b) cell.
///
/// Tallies form a commutative monoid under [`TallyCounts::merge`] with
/// [`TallyCounts::empty`] as identity.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct TallyCounts {
    counts: [u64; CELL_COUNT],
    n_trials: u64,
}

impl TallyCounts {
    pub fn empty() -> Self {
        TallyCounts { counts: [0; CELL_COUNT], n_trials: 0 }
    }

    /// Builds a tally from raw cell counts; `n_trials` is their sum.
    pub fn from_counts(counts: [u64; CELL_COUNT]) -> Result<Self, TallyError> {
        let mut n = 0u64;
        for c in counts {
            n = n.checked_add(c).ok_or(TallyError::TrialOverflow)?;
        }
        Ok(TallyCounts { counts, n_trials: n })
    }

    #[inline]
    pub fn record(&mut self, trial: &TrialRecord) {
        self.add_to_cell(trial.cell());
    }

    #[inline]
    pub(crate) fn add_to_cell(&mut self, cell: usize) {
        self.counts[cell] += 1;
        self.n_trials += 1;
    }

    pub fn n_trials(&self) -> u64 {
        self.n_trials
    }

    pub fn counts(&self) -> &[u64; CELL_COUNT] {
        &self.counts
    }

    pub fn get(&self, sa: Switch, sb: Switch, oa: Outcome, ob: Outcome) -> u64 {
        self.counts[crate::model::cell_index(sa, sb, oa, ob)]
    }

    /// Sum of the cells matching `pred`.
    pub fn count(&self, pred: impl Fn(Switch, Switch, Outcome, Outcome) -> bool) -> u64 {
        self.counts
            .iter()
            .enumerate()
            .filter(|(c, _)| {
                let (sa, sb, oa, ob) = cell_key(*c);
                pred(sa, sb, oa, ob)
            })
            .map(|(_, n)| *n)
            .sum()
    }

    /// Double-flash counts per setting pair, indexed `[a][b]`.
    pub fn coincidences_by_setting(&self) -> [[u64; 3]; 3] {
        let mut out = [[0u64; 3]; 3];
        for a in Setting::ALL {
            for b in Setting::ALL {
                out[a.index()][b.index()] = self.count(|sa, sb, oa, ob| {
                    sa == Switch::Set(a) && sb == Switch::Set(b) && oa.is_flash() && ob.is_flash()
                });
            }
        }
        out
    }

    pub fn merge(&self, other: &TallyCounts) -> Result<TallyCounts, TallyError> {
        let mut out = self.clone();
        out.merge_from(other)?;
        Ok(out)
    }

    pub fn merge_from(&mut self, other: &TallyCounts) -> Result<(), TallyError> {
        let mut counts = self.counts;
        for (cell, (slot, add)) in counts.iter_mut().zip(other.counts.iter()).enumerate() {
            *slot = slot.checked_add(*add).ok_or(TallyError::Overflow { cell })?;
        }
        let n_trials = self
            .n_trials
            .checked_add(other.n_trials)
            .ok_or(TallyError::TrialOverflow)?;
        self.counts = counts;
        self.n_trials = n_trials;
        Ok(())
    }

    /// Non-zero cells as `(cell, count)`.
    pub fn nonzero(&self) -> impl Iterator<Item = (usize, u64)> + '_ {
        self.counts.iter().copied().enumerate().filter(|(_, n)| *n > 0)
    }
}

impl Default for TallyCounts {
    fn default() -> Self {
        Self::empty()
    }
}

impl fmt::Debug for TallyCounts {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut m = f.debug_map();
        for (cell, n) in self.nonzero() {
            let (sa, sb, oa, ob) = cell_key(cell);
            m.entry(&format!("{sa}{sb}{oa}{ob}"), &n);
        }
        m.finish()?;
        write!(f, " (n_trials = {})", self.n_trials)
    }
}

/// Free-function form of [`TallyCounts::merge`].
pub fn merge(t1: &TallyCounts, t2: &TallyCounts) -> Result<TallyCounts, TallyError> {
    t1.merge(t2)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn arb_tally() -> impl Strategy<Value = TallyCounts> {
        proptest::collection::vec(0u64..1_000_000, CELL_COUNT).prop_map(|v| {
            let mut counts = [0u64; CELL_COUNT];
            counts.copy_from_slice(&v);
            TallyCounts::from_counts(counts).unwrap()
        })
    }

    proptest! {
        #[test]
        fn merge_is_a_commutative_monoid(a in arb_tally(), b in arb_tally(), c in arb_tally()) {
            prop_assert_eq!(a.merge(&TallyCounts::empty()).unwrap(), a.clone());
            prop_assert_eq!(a.merge(&b).unwrap(), b.merge(&a).unwrap());
            prop_assert_eq!(
                a.merge(&b).unwrap().merge(&c).unwrap(),
                a.merge(&b.merge(&c).unwrap()).unwrap()
            );
            let m = a.merge(&b).unwrap();
            prop_assert_eq!(m.n_trials(), a.n_trials() + b.n_trials());
            prop_assert_eq!(m.counts().iter().sum::<u64>(), m.n_trials());
        }
    }

    #[test]
    fn overflow_is_reported() {
        let mut big = [0u64; CELL_COUNT];
        big[5] = u64::MAX;
        let a = TallyCounts::from_counts(big).unwrap();
        let mut one = [0u64; CELL_COUNT];
        one[5] = 1;
        let b = TallyCounts::from_counts(one).unwrap();
        assert_eq!(a.merge(&b), Err(TallyError::Overflow { cell: 5 }));

        let mut two = [0u64; CELL_COUNT];
        two[0] = u64::MAX;
        two[1] = 1;
        assert_eq!(TallyCounts::from_counts(two), Err(TallyError::TrialOverflow));
    }
}
