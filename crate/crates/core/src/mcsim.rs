//! Single-system simulation of a quasi-stochastic map by a nebit-controlled
//! stochastic process followed by post-selection.
//!
//! Each trial flips a coin (`b = 0` with probability `r`), samples an input
//! state from `p`, and moves it with `S⁺` (`b = 0`) or `S⁻` (`b = 1`). Every
//! `b = 1` record then cancels one `b = 0` record with the same outcome; if
//! that succeeds for all of them the surviving frequencies estimate `S·p`.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::decomp::{decompose_minimal, NebitDecomposition};
use crate::error::{Error, Result};
use crate::qcore::{Dist, QuasiMatrix};
use crate::sampling::{column_tables, fifo_match, generate_trials, CumulativeTable, RngSpec};
use crate::scalar::Scalar;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Branch {
    /// `b = 0`, the `S⁺` branch.
    Positive,
    /// `b = 1`, the `S⁻` branch.
    Negative,
}

impl Branch {
    pub fn bit(self) -> u8 {
        match self {
            Branch::Positive => 0,
            Branch::Negative => 1,
        }
    }

    pub fn from_bit(bit: u8) -> Option<Self> {
        match bit {
            0 => Some(Branch::Positive),
            1 => Some(Branch::Negative),
            _ => None,
        }
    }

    pub fn is_negative(self) -> bool {
        self == Branch::Negative
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Event {
    pub b: Branch,
    pub x: usize,
}

impl Event {
    pub fn new(bit: u8, x: usize) -> Self {
        Self {
            b: Branch::from_bit(bit).expect("bit is 0 or 1"),
            x,
        }
    }
}

/// Raw trial records in generation order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EventTable {
    pub dim: usize,
    pub events: Vec<Event>,
}

impl EventTable {
    pub fn new(dim: usize, events: Vec<Event>) -> Result<Self> {
        if let Some(e) = events.iter().find(|e| e.x >= dim) {
            return Err(Error::DimensionMismatch {
                expected: dim,
                found: e.x + 1,
            });
        }
        Ok(Self { dim, events })
    }

    pub fn trial_count(&self) -> usize {
        self.events.len()
    }

    /// Counts `N_{b,x}` indexed `[b][x]`.
    pub fn counts(&self) -> [Vec<u64>; 2] {
        let mut c = [vec![0; self.dim], vec![0; self.dim]];
        for e in &self.events {
            c[e.b.bit() as usize][e.x] += 1;
        }
        c
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Status {
    Success,
    Failure,
}

/// Result of post-selection. `estimate` is present only on success.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimOutcome {
    pub status: Status,
    pub estimate: Option<Vec<f64>>,
    #[serde(rename = "N")]
    pub n: u64,
    #[serde(rename = "N_prime")]
    pub n_prime: u64,
    pub removed_pairs: u64,
    pub unmatched: BTreeMap<usize, u64>,
    /// Surviving `b = 0` counts per outcome.
    pub counts: Vec<u64>,
}

impl SimOutcome {
    pub fn is_success(&self) -> bool {
        self.status == Status::Success
    }
}

/// Precomputed samplers for one (input, decomposition) pair.
pub(crate) struct TrialSampler {
    coin: CumulativeTable,
    input: CumulativeTable,
    plus: Vec<CumulativeTable>,
    minus: Vec<CumulativeTable>,
}

impl TrialSampler {
    pub(crate) fn new<T: Scalar>(p: &Dist<T>, d: &NebitDecomposition<T>) -> Result<Self> {
        if p.dim() != d.dim() {
            return Err(Error::DimensionMismatch {
                expected: d.dim(),
                found: p.dim(),
            });
        }
        Ok(Self {
            coin: CumulativeTable::new(&[d.r.clone(), T::one() - d.r.clone()]),
            input: CumulativeTable::new(p.entries()),
            plus: column_tables(&d.s_plus),
            minus: column_tables(&d.s_minus),
        })
    }

    /// Draw order: coin, input index, output index.
    pub(crate) fn trial(&self, next: &mut impl FnMut() -> u64) -> (Branch, usize, usize) {
        let b = if self.coin.sample(next()) == 0 {
            Branch::Positive
        } else {
            Branch::Negative
        };
        let input = self.input.sample(next());
        let column = match b {
            Branch::Positive => &self.plus[input],
            Branch::Negative => &self.minus[input],
        };
        (b, input, column.sample(next()))
    }
}

/// Generate `n` trials serially.
pub fn run_trials<T: Scalar>(p: &Dist<T>, d: &NebitDecomposition<T>, n: u64, rng: RngSpec) -> Result<EventTable> {
    run_trials_sharded(p, d, n, rng, 1)
}

/// Generate `n` trials in `shards` parallel pieces; the table is identical
/// to the serial one.
pub fn run_trials_sharded<T: Scalar>(
    p: &Dist<T>,
    d: &NebitDecomposition<T>,
    n: u64,
    rng: RngSpec,
    shards: usize,
) -> Result<EventTable> {
    let sampler = TrialSampler::new(p, d)?;
    let events = generate_trials(n, rng, shards, |draws| {
        let (b, _, x) = sampler.trial(&mut || draws.next_u64());
        Event { b, x }
    });
    EventTable::new(d.dim(), events)
}

/// Cancel each `b = 1` record against the earliest uncancelled `b = 0`
/// record with the same `x`.
pub fn post_select(table: &EventTable) -> SimOutcome {
    let records: Vec<(bool, usize)> = table.events.iter().map(|e| (e.b.is_negative(), e.x)).collect();
    let matching = fifo_match(&records, table.dim);
    let n = table.events.len() as u64;
    let removed_pairs = matching.removed_pairs();
    let mut counts = vec![0u64; table.dim];
    for (e, gone) in table.events.iter().zip(&matching.cancelled) {
        if !gone && !e.b.is_negative() {
            counts[e.x] += 1;
        }
    }
    let n_prime = n - 2 * removed_pairs;
    let success = matching.is_complete();
    let estimate = (success && n_prime > 0).then(|| counts.iter().map(|&c| c as f64 / n_prime as f64).collect());
    SimOutcome {
        status: if estimate.is_some() {
            Status::Success
        } else {
            Status::Failure
        },
        estimate,
        n,
        n_prime,
        removed_pairs,
        unmatched: matching.unmatched,
        counts,
    }
}

/// Decompose, sample and post-select.
pub fn simulate<T: Scalar>(p: &Dist<T>, s: &QuasiMatrix<T>, n: u64, rng: RngSpec) -> Result<SimOutcome> {
    simulate_sharded(p, s, n, rng, 1)
}

pub fn simulate_sharded<T: Scalar>(
    p: &Dist<T>,
    s: &QuasiMatrix<T>,
    n: u64,
    rng: RngSpec,
    shards: usize,
) -> Result<SimOutcome> {
    let d = decompose_minimal(s);
    let table = run_trials_sharded(p, &d, n, rng, shards)?;
    Ok(post_select(&table))
}

/// Analytic means of the raw counts: `N·r·p⁺ₓ` and `N·(1−r)·p⁻ₓ`.
#[derive(Debug, Clone, PartialEq)]
pub struct ExpectedCounts<T> {
    pub positive: Vec<T>,
    pub negative: Vec<T>,
    pub trials: T,
    pub r: T,
}

impl<T: Scalar> ExpectedCounts<T> {
    pub fn negative_total(&self) -> T {
        crate::scalar::sum(&self.negative)
    }

    /// Expected table size after removal, `N·(2r − 1) = N/(q⁺+q⁻)`.
    pub fn surviving_total(&self) -> T {
        self.trials.clone() * (self.r.clone() + self.r.clone() - T::one())
    }

    /// Expected surviving `b = 0` count per outcome.
    pub fn surviving(&self) -> Vec<T> {
        self.positive
            .iter()
            .zip(&self.negative)
            .map(|(a, b)| a.clone() - b.clone())
            .collect()
    }
}

pub fn expected_counts<T: Scalar>(p: &Dist<T>, d: &NebitDecomposition<T>, n: u64) -> Result<ExpectedCounts<T>> {
    let p_plus = d.s_plus.apply(p)?;
    let p_minus = d.s_minus.apply(p)?;
    let trials = T::from_int(n as i64);
    let pos_w = trials.clone() * d.r.clone();
    let neg_w = trials.clone() * (T::one() - d.r.clone());
    Ok(ExpectedCounts {
        positive: p_plus.entries().iter().map(|v| pos_w.clone() * v.clone()).collect(),
        negative: p_minus.entries().iter().map(|v| neg_w.clone() * v.clone()).collect(),
        trials,
        r: d.r.clone(),
    })
}
