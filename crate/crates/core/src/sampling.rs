//! Reproducible trial streams and exact inverse-CDF sampling.
//!
//! Each trial owns a fixed window of [`DRAWS_PER_TRIAL`] 64-bit words in a
//! ChaCha20 keystream, so trial `t` can be generated without generating
//! trials `0..t` first. Sharded generation therefore reproduces the serial
//! table exactly, whatever the shard count.

use std::collections::{BTreeMap, VecDeque};
use std::ops::Range;

use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha20Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::scalar::{Scalar, UNIT_SCALE};

/// Uniform 64-bit draws consumed by one trial.
pub const DRAWS_PER_TRIAL: u64 = 3;

// a u64 is two 32-bit ChaCha words
const WORDS_PER_TRIAL: u128 = 2 * DRAWS_PER_TRIAL as u128;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct RngSpec {
    pub seed: u64,
    pub stream_id: u64,
}

impl RngSpec {
    pub fn new(seed: u64, stream_id: u64) -> Self {
        Self { seed, stream_id }
    }

    fn rng_at(&self, trial: u64) -> ChaCha20Rng {
        let mut rng = ChaCha20Rng::seed_from_u64(self.seed);
        rng.set_stream(self.stream_id);
        rng.set_word_pos(trial as u128 * WORDS_PER_TRIAL);
        rng
    }
}

/// The uniform draws belonging to one trial.
pub struct TrialDraws<'a> {
    rng: &'a mut ChaCha20Rng,
    used: u64,
}

impl TrialDraws<'_> {
    pub fn next_u64(&mut self) -> u64 {
        assert!(self.used < DRAWS_PER_TRIAL, "trial drew more than its window");
        self.used += 1;
        self.rng.next_u64()
    }
}

/// Generate `n` trials, splitting the index range into `shards` contiguous
/// pieces processed in parallel and concatenated in index order.
pub fn generate_trials<E, F>(n: u64, rng: RngSpec, shards: usize, trial: F) -> Vec<E>
where
    E: Send,
    F: Fn(&mut TrialDraws<'_>) -> E + Sync,
{
    let shards = shards.clamp(1, n.max(1) as usize) as u64;
    let run = |range: Range<u64>| -> Vec<E> {
        let mut chacha = rng.rng_at(range.start);
        let mut out = Vec::with_capacity((range.end - range.start) as usize);
        for _ in range {
            let mut draws = TrialDraws {
                rng: &mut chacha,
                used: 0,
            };
            out.push(trial(&mut draws));
            // skip whatever the trial left unused to stay aligned
            for _ in draws.used..DRAWS_PER_TRIAL {
                chacha.next_u64();
            }
        }
        out
    };
    if shards == 1 {
        return run(0..n);
    }
    let chunk = n.div_ceil(shards);
    let ranges: Vec<Range<u64>> = (0..shards)
        .map(|s| (s * chunk).min(n)..((s + 1) * chunk).min(n))
        .collect();
    ranges.into_par_iter().map(run).flatten().collect()
}

/// Inverse-CDF table: index `i` is chosen when `u < ⌊(p₀+…+pᵢ)·2⁶⁴⌋`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CumulativeTable {
    thresholds: Vec<u128>,
}

impl CumulativeTable {
    pub fn new<T: Scalar>(probabilities: &[T]) -> Self {
        let mut acc = T::zero();
        let mut thresholds: Vec<u128> = probabilities
            .iter()
            .map(|p| {
                acc = acc.clone() + p.clone();
                acc.unit_threshold()
            })
            .collect();
        if let Some(last) = thresholds.last_mut() {
            *last = UNIT_SCALE;
        }
        Self { thresholds }
    }

    pub fn sample(&self, u: u64) -> usize {
        let u = u as u128;
        self.thresholds
            .iter()
            .position(|&t| u < t)
            .unwrap_or(self.thresholds.len() - 1)
    }

    pub fn len(&self) -> usize {
        self.thresholds.len()
    }

    pub fn is_empty(&self) -> bool {
        self.thresholds.is_empty()
    }
}

/// One inverse-CDF table per column of a column-stochastic matrix.
pub(crate) fn column_tables<T: Scalar>(m: &crate::qcore::StochMatrix<T>) -> Vec<CumulativeTable> {
    (0..m.dim()).map(|j| CumulativeTable::new(m.column(j))).collect()
}

/// Result of cancelling every negative-branch record against a
/// positive-branch record with the same key.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Matching {
    /// `true` for every record removed from the table.
    pub cancelled: Vec<bool>,
    /// For each negative record (by table index), the positive record it cancelled.
    pub partners: Vec<(usize, usize)>,
    /// Negative records left without a partner, counted per key.
    pub unmatched: BTreeMap<usize, u64>,
}

impl Matching {
    pub fn removed_pairs(&self) -> u64 {
        self.partners.len() as u64
    }

    pub fn is_complete(&self) -> bool {
        self.unmatched.is_empty()
    }
}

/// FIFO matching per key: each negative record, in table order, cancels the
/// earliest not-yet-cancelled positive record with the same key, wherever
/// that record sits in the table.
pub fn fifo_match(records: &[(bool, usize)], num_keys: usize) -> Matching {
    let mut queues: Vec<VecDeque<usize>> = vec![VecDeque::new(); num_keys];
    for (idx, &(negative, key)) in records.iter().enumerate() {
        if !negative {
            queues[key].push_back(idx);
        }
    }
    let mut cancelled = vec![false; records.len()];
    let mut partners = Vec::new();
    let mut unmatched = BTreeMap::new();
    for (idx, &(negative, key)) in records.iter().enumerate() {
        if !negative {
            continue;
        }
        match queues[key].pop_front() {
            Some(partner) => {
                cancelled[idx] = true;
                cancelled[partner] = true;
                partners.push((idx, partner));
            }
            None => *unmatched.entry(key).or_insert(0) += 1,
        }
    }
    Matching {
        cancelled,
        partners,
        unmatched,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::Rational;

    #[test]
    fn sharding_reproduces_serial_stream() {
        let spec = RngSpec::new(7, 3);
        let draw = |d: &mut TrialDraws<'_>| (d.next_u64(), d.next_u64());
        let serial = generate_trials(1001, spec, 1, draw);
        for shards in [2, 3, 8, 5000] {
            assert_eq!(generate_trials(1001, spec, shards, draw), serial);
        }
    }

    #[test]
    fn unused_draws_keep_alignment() {
        let spec = RngSpec::new(1, 0);
        let full = generate_trials(10, spec, 1, |d| {
            let a = d.next_u64();
            d.next_u64();
            d.next_u64();
            a
        });
        let partial = generate_trials(10, spec, 4, |d| d.next_u64());
        assert_eq!(full, partial);
    }

    #[test]
    fn streams_differ() {
        let draw = |d: &mut TrialDraws<'_>| d.next_u64();
        assert_ne!(
            generate_trials(4, RngSpec::new(7, 0), 1, draw),
            generate_trials(4, RngSpec::new(7, 1), 1, draw)
        );
    }

    #[test]
    fn table_boundaries() {
        let p = [
            Rational::from_fraction(1, 4),
            Rational::from_fraction(0, 1),
            Rational::from_fraction(3, 4),
        ];
        let t = CumulativeTable::new(&p);
        assert_eq!(t.sample(0), 0);
        assert_eq!(t.sample((1u64 << 62) - 1), 0);
        // a zero-probability index is never selected
        assert_eq!(t.sample(1u64 << 62), 2);
        assert_eq!(t.sample(u64::MAX), 2);
    }

    #[test]
    fn fifo_matches_earliest_partner_even_if_later() {
        // (b, x): (1,0) precedes its partner
        let m = fifo_match(&[(true, 0), (false, 1), (false, 0), (false, 0)], 2);
        assert_eq!(m.partners, vec![(0, 2)]);
        assert!(m.is_complete());
        let m = fifo_match(&[(true, 0)], 1);
        assert_eq!(m.unmatched.get(&0), Some(&1));
    }
}
