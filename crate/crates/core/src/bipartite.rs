//! Two-party harness: Alice holds `y`, Bob holds `x` and runs the nebit
//! simulation of a local quasi-stochastic map on his share.
//!
//! Post-selection can pair records on Bob's outcome alone (blind) or on the
//! joint outcome `(x, y)`, which requires Alice's results to reach Bob
//! (communicating). Only the latter reproduces `(𝟙 ⊗ S)·p`.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::decomp::NebitDecomposition;
use crate::error::{Error, Result};
use crate::mcsim::{Branch, Status};
use crate::qcore::{Dist, QuasiDist, QuasiMatrix};
use crate::sampling::{column_tables, fifo_match, generate_trials, CumulativeTable, RngSpec};
use crate::scalar::{total_variation, Scalar};

/// Joint distribution over Alice's `y` and Bob's `x`, stored at index
/// `y·d_bob + x`.
#[derive(Debug, Clone, PartialEq)]
pub struct JointDist<T> {
    dist: Dist<T>,
    d_alice: usize,
    d_bob: usize,
}

impl<T: Scalar> JointDist<T> {
    pub fn new(dist: Dist<T>, d_alice: usize, d_bob: usize) -> Result<Self> {
        if dist.dim() != d_alice * d_bob {
            return Err(Error::DimensionMismatch {
                expected: d_alice * d_bob,
                found: dist.dim(),
            });
        }
        Ok(Self { dist, d_alice, d_bob })
    }

    /// Two three-level systems.
    pub fn qutrits(dist: Dist<T>) -> Result<Self> {
        Self::new(dist, 3, 3)
    }

    pub fn dist(&self) -> &Dist<T> {
        &self.dist
    }

    pub fn d_alice(&self) -> usize {
        self.d_alice
    }

    pub fn d_bob(&self) -> usize {
        self.d_bob
    }

    pub fn index(&self, y: usize, x: usize) -> usize {
        y * self.d_bob + x
    }

    pub fn get(&self, y: usize, x: usize) -> &T {
        &self.dist.entries()[self.index(y, x)]
    }

    /// Alice's block `y`, unnormalised.
    pub fn block(&self, y: usize) -> &[T] {
        &self.dist.entries()[y * self.d_bob..(y + 1) * self.d_bob]
    }

    pub fn bob_marginal(&self) -> Vec<T> {
        (0..self.d_bob)
            .map(|x| (0..self.d_alice).fold(T::zero(), |acc, y| acc + self.get(y, x).clone()))
            .collect()
    }

    pub fn alice_marginal(&self) -> Vec<T> {
        (0..self.d_alice)
            .map(|y| self.block(y).iter().fold(T::zero(), |acc, v| acc + v.clone()))
            .collect()
    }
}

/// The correlated pair `p_AB = ⅓ Σ_y |y⟩ ⊗ e_{2y}` and its image
/// `p′_AB = (𝟙 ⊗ S)·p_AB = ⅓ Σ_y |y⟩ ⊗ e_{2y+1}`.
pub fn canonical_states<T: Scalar>() -> (JointDist<T>, JointDist<T>) {
    let p = Dist::from_weights(&[2, 1, 0, 0, 2, 1, 1, 0, 2]).expect("valid");
    let p_prime = Dist::from_weights(&[1, 2, 0, 0, 1, 2, 2, 0, 1]).expect("valid");
    (
        JointDist::qutrits(p).expect("9 entries"),
        JointDist::qutrits(p_prime).expect("9 entries"),
    )
}

/// `(Sⁿ ⊗ Sᵐ)·p ≥ 0` for every `n, m < period`.
pub fn local_positivity_scan<T: Scalar>(p: &JointDist<T>, s: &QuasiMatrix<T>, period: usize) -> Result<bool> {
    if period == 0 || !s.power(period as u64).is_identity() {
        return Err(Error::PeriodMismatch { period });
    }
    if p.d_alice != s.dim() || p.d_bob != s.dim() {
        return Err(Error::DimensionMismatch {
            expected: s.dim(),
            found: p.d_bob,
        });
    }
    let powers: Vec<QuasiMatrix<T>> = (0..period).map(|k| s.power(k as u64)).collect();
    for a in &powers {
        for b in &powers {
            if !a.tensor(b).apply(&p.dist)?.is_nonneg() {
                return Ok(false);
            }
        }
    }
    Ok(true)
}

/// `𝟙 ⊗ M` applied to a joint distribution.
pub fn apply_bob<T: Scalar>(p: &JointDist<T>, m: &QuasiMatrix<T>) -> Result<QuasiDist<T>> {
    QuasiMatrix::identity(p.d_alice).tensor(m).apply(&p.dist)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct JointEvent {
    pub b: Branch,
    /// Bob's outcome.
    pub x: usize,
    /// Alice's outcome.
    pub y: usize,
}

impl JointEvent {
    pub fn new(bit: u8, x: usize, y: usize) -> Self {
        Self {
            b: Branch::from_bit(bit).expect("bit is 0 or 1"),
            x,
            y,
        }
    }
}

/// Sample `(y, x_in)` jointly, flip the nebit coin, move Bob's `x_in` with
/// `S⁺` or `S⁻`. Alice's value is recorded untouched.
pub fn run_bipartite<T: Scalar>(
    p: &JointDist<T>,
    d: &NebitDecomposition<T>,
    n: u64,
    rng: RngSpec,
) -> Result<Vec<JointEvent>> {
    run_bipartite_sharded(p, d, n, rng, 1)
}

pub fn run_bipartite_sharded<T: Scalar>(
    p: &JointDist<T>,
    d: &NebitDecomposition<T>,
    n: u64,
    rng: RngSpec,
    shards: usize,
) -> Result<Vec<JointEvent>> {
    if d.dim() != p.d_bob {
        return Err(Error::DimensionMismatch {
            expected: p.d_bob,
            found: d.dim(),
        });
    }
    let coin = CumulativeTable::new(&[d.r.clone(), T::one() - d.r.clone()]);
    let joint = CumulativeTable::new(p.dist.entries());
    let plus = column_tables(&d.s_plus);
    let minus = column_tables(&d.s_minus);
    let d_bob = p.d_bob;
    Ok(generate_trials(n, rng, shards, |draws| {
        let b = if coin.sample(draws.next_u64()) == 0 {
            Branch::Positive
        } else {
            Branch::Negative
        };
        let idx = joint.sample(draws.next_u64());
        let (y, x_in) = (idx / d_bob, idx % d_bob);
        let column = match b {
            Branch::Positive => &plus[x_in],
            Branch::Negative => &minus[x_in],
        };
        JointEvent {
            b,
            x: column.sample(draws.next_u64()),
            y,
        }
    }))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    Blind,
    Communicating,
}

/// Surviving joint statistics after one of the two removal rules.
///
/// `joint_estimate` is always reported (frequencies of the surviving
/// `b = 0` records over the surviving table size); `status` says whether
/// every `b = 1` record found a partner.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BipartiteOutcome {
    pub status: Status,
    pub mode: Mode,
    pub joint_estimate: Vec<f64>,
    pub tv_to_target: f64,
    #[serde(rename = "N")]
    pub n: u64,
    #[serde(rename = "N_prime")]
    pub n_prime: u64,
    pub removed_pairs: u64,
    /// Unmatched `b = 1` records per matching key: `x` (blind) or `y·d_bob + x`.
    pub unmatched: BTreeMap<usize, u64>,
    /// Surviving `b = 0` counts at joint index `y·d_bob + x`.
    pub counts: Vec<u64>,
}

impl BipartiteOutcome {
    pub fn is_success(&self) -> bool {
        self.status == Status::Success
    }
}

fn post_select_by(events: &[JointEvent], d_alice: usize, d_bob: usize, target: &[f64], mode: Mode) -> BipartiteOutcome {
    let key = |e: &JointEvent| match mode {
        Mode::Blind => e.x,
        Mode::Communicating => e.y * d_bob + e.x,
    };
    let num_keys = match mode {
        Mode::Blind => d_bob,
        Mode::Communicating => d_alice * d_bob,
    };
    let records: Vec<(bool, usize)> = events.iter().map(|e| (e.b.is_negative(), key(e))).collect();
    let matching = fifo_match(&records, num_keys);
    let mut counts = vec![0u64; d_alice * d_bob];
    for (e, gone) in events.iter().zip(&matching.cancelled) {
        if !gone && !e.b.is_negative() {
            counts[e.y * d_bob + e.x] += 1;
        }
    }
    let n = events.len() as u64;
    let removed_pairs = matching.removed_pairs();
    let n_prime = n - 2 * removed_pairs;
    let survivors: u64 = counts.iter().sum();
    let joint_estimate: Vec<f64> = counts
        .iter()
        .map(|&c| {
            if survivors == 0 {
                0.0
            } else {
                c as f64 / survivors as f64
            }
        })
        .collect();
    BipartiteOutcome {
        status: if matching.is_complete() && survivors > 0 {
            Status::Success
        } else {
            Status::Failure
        },
        mode,
        tv_to_target: total_variation(&joint_estimate, target),
        joint_estimate,
        n,
        n_prime,
        removed_pairs,
        unmatched: matching.unmatched,
        counts,
    }
}

/// Bob pairs on `x` only; which `y` gets cancelled is not under his control.
pub fn post_select_blind(events: &[JointEvent], d_alice: usize, d_bob: usize, target: &[f64]) -> BipartiteOutcome {
    post_select_by(events, d_alice, d_bob, target, Mode::Blind)
}

/// Pairs on `(x, y)`: Bob knows Alice's outcome for every record.
pub fn post_select_communicating(
    events: &[JointEvent],
    d_alice: usize,
    d_bob: usize,
    target: &[f64],
) -> BipartiteOutcome {
    post_select_by(events, d_alice, d_bob, target, Mode::Communicating)
}

/// Large-`N` limit of the blind estimate:
///
/// ```text
/// q(x, y) ∝ r·p⁺(x, y) − (1 − r)·p⁻(x)·p⁺(x, y)/p⁺(x)
/// ```
///
/// with `p± = (𝟙 ⊗ S±)·p` and `p±(x)` Bob's marginals. The cancelled
/// partner of a `b = 1, x` record is a `b = 0, x` record whose `y` follows
/// `P(y | b = 0, x) = p⁺(x, y)/p⁺(x)`; FIFO selection keeps this because `y`
/// is exchangeable within the `(b = 0, x)` records. The normaliser is
/// `r − (1 − r) = 2r − 1`. Cells with `p⁺(x) = 0` are zero. The result can
/// go negative when blind removal itself would fail.
pub fn blind_limit<T: Scalar>(p: &JointDist<T>, d: &NebitDecomposition<T>) -> Result<QuasiDist<T>> {
    let plus = apply_bob(p, d.s_plus.matrix())?;
    let minus = apply_bob(p, d.s_minus.matrix())?;
    let plus_joint = JointDist {
        dist: plus.to_dist()?,
        d_alice: p.d_alice,
        d_bob: p.d_bob,
    };
    let minus_joint = JointDist {
        dist: minus.to_dist()?,
        d_alice: p.d_alice,
        d_bob: p.d_bob,
    };
    let plus_marg = plus_joint.bob_marginal();
    let minus_marg = minus_joint.bob_marginal();
    let r = d.r.clone();
    let one_minus_r = T::one() - r.clone();
    let norm = r.clone() - one_minus_r.clone();
    let mut cells = vec![T::zero(); p.dist.dim()];
    for y in 0..p.d_alice {
        for x in 0..p.d_bob {
            if plus_marg[x].is_zero() {
                continue;
            }
            let pp = plus_joint.get(y, x).clone();
            let v = r.clone() * pp.clone() - one_minus_r.clone() * minus_marg[x].clone() * pp / plus_marg[x].clone();
            cells[p.index(y, x)] = v / norm.clone();
        }
    }
    QuasiDist::new(cells)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Cell {
    pub y: usize,
    pub x: usize,
    pub target: f64,
    pub oracle: f64,
    pub blind: f64,
    pub comm: f64,
    pub delta_blind: f64,
    pub delta_comm: f64,
}

/// Paired blind/communicating comparison on one event stream.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BiasReport {
    pub tv_blind: f64,
    pub tv_comm: f64,
    pub tv_blind_vs_oracle: f64,
    pub tv_oracle_vs_target: f64,
    pub status_blind: Status,
    pub status_comm: Status,
    #[serde(rename = "N")]
    pub n: u64,
    pub seed: u64,
    pub stream_id: u64,
    pub cells: Vec<Cell>,
}

/// Run both removal rules on the same `(p_AB, S)` event stream.
pub fn bias_report(n: u64, rng: RngSpec, shards: usize) -> Result<BiasReport> {
    use crate::decomp::decompose_minimal;
    use crate::qcore::ModelS;
    use crate::Rational;

    let model = ModelS::<Rational>::new();
    let (p, p_prime) = canonical_states::<Rational>();
    let d = decompose_minimal(&model.s);
    let oracle = blind_limit(&p, &d)?.to_f64();
    let target = p_prime.dist().to_f64();
    let events = run_bipartite_sharded(&p, &d, n, rng, shards)?;
    let blind = post_select_blind(&events, 3, 3, &target);
    let comm = post_select_communicating(&events, 3, 3, &target);
    let cells = (0..9)
        .map(|i| Cell {
            y: i / 3,
            x: i % 3,
            target: target[i],
            oracle: oracle[i],
            blind: blind.joint_estimate[i],
            comm: comm.joint_estimate[i],
            delta_blind: blind.joint_estimate[i] - target[i],
            delta_comm: comm.joint_estimate[i] - target[i],
        })
        .collect();
    Ok(BiasReport {
        tv_blind: blind.tv_to_target,
        tv_comm: comm.tv_to_target,
        tv_blind_vs_oracle: total_variation(&blind.joint_estimate, &oracle),
        tv_oracle_vs_target: total_variation(&oracle, &target),
        status_blind: blind.status,
        status_comm: comm.status,
        n,
        seed: rng.seed,
        stream_id: rng.stream_id,
        cells,
    })
}
