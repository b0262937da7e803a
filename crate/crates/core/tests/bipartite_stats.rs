use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};

use quasim::bipartite::{
    blind_limit, canonical_states, post_select_blind, post_select_communicating, run_bipartite, run_bipartite_sharded,
    JointDist,
};
use quasim::decomp::{decompose_minimal, NebitDecomposition};
use quasim::mcsim::{simulate, Branch};
use quasim::qcore::{QuasiMatrix, StochMatrix};
use quasim::scalar::total_variation;
use quasim::{RModel, Rational, RngSpec, Scalar};

fn setup() -> (JointDist<Rational>, JointDist<Rational>, NebitDecomposition<Rational>) {
    let (p, p_prime) = canonical_states::<Rational>();
    (p, p_prime, decompose_minimal(&RModel::new().s))
}

fn sample_index(weights: &[f64], u: f64) -> usize {
    let mut acc = 0.0;
    for (i, w) in weights.iter().enumerate() {
        acc += w;
        if u < acc {
            return i;
        }
    }
    weights.len() - 1
}

/// Naive simulator: floating-point sampling from a different generator and
/// quadratic first-match removal on Bob's outcome. Returns surviving
/// `b = 0` counts per joint cell, or `None` when a `b = 1` record is left.
fn naive_blind_run(rng: &mut StdRng, n: usize) -> Option<[u64; 9]> {
    let p_ab = [2.0, 1.0, 0.0, 0.0, 2.0, 1.0, 1.0, 0.0, 2.0].map(|v| v / 9.0);
    let s_plus = [[0.5, 0.5, 0.0], [0.0, 0.5, 0.5], [0.5, 0.0, 0.5]]; // columns
    let s_minus = [[0.0, 0.0, 1.0], [1.0, 0.0, 0.0], [0.0, 1.0, 0.0]];
    let mut table: Vec<(bool, usize, usize)> = Vec::with_capacity(n);
    for _ in 0..n {
        let negative = rng.random::<f64>() >= 0.8;
        let idx = sample_index(&p_ab, rng.random());
        let (y, x_in) = (idx / 3, idx % 3);
        let col = if negative { s_minus[x_in] } else { s_plus[x_in] };
        table.push((negative, sample_index(&col, rng.random()), y));
    }
    let mut alive = vec![true; n];
    for i in 0..n {
        if !table[i].0 {
            continue;
        }
        let partner = (0..n).find(|&j| alive[j] && !table[j].0 && table[j].1 == table[i].1)?;
        alive[i] = false;
        alive[partner] = false;
    }
    let mut counts = [0u64; 9];
    for (i, &(neg, x, y)) in table.iter().enumerate() {
        if alive[i] && !neg {
            counts[y * 3 + x] += 1;
        }
    }
    Some(counts)
}

#[test]
fn blind_oracle_confirmed_by_naive_simulation() {
    let (p, _, d) = setup();
    let oracle = blind_limit(&p, &d).unwrap().to_f64();
    let mut rng = StdRng::seed_from_u64(2024);
    let mut pooled = [0u64; 9];
    let mut runs = 0;
    for _ in 0..2000 {
        if let Some(c) = naive_blind_run(&mut rng, 200) {
            for (a, b) in pooled.iter_mut().zip(c) {
                *a += b;
            }
            runs += 1;
        }
    }
    assert!(runs > 1900, "naive blind runs mostly succeed ({runs})");
    let total: u64 = pooled.iter().sum();
    let freq: Vec<f64> = pooled.iter().map(|&c| c as f64 / total as f64).collect();
    let tv = total_variation(&freq, &oracle);
    println!("pooled naive blind vs oracle: TV {tv:.4} over {total} survivors");
    assert!(tv < 0.01, "tv {tv}");
}

#[test]
fn communicating_equals_nine_level_simulation() {
    let (p, p_prime, d) = setup();
    let lifted = QuasiMatrix::identity(3).tensor(&RModel::new().s);
    let target = p_prime.dist().to_f64();
    for seed in 0..4 {
        let rng = RngSpec::new(seed, 0);
        let events = run_bipartite(&p, &d, 20_000, rng).unwrap();
        let comm = post_select_communicating(&events, 3, 3, &target);
        let sim = simulate(p.dist(), &lifted, 20_000, rng).unwrap();
        assert_eq!(comm.status, sim.status);
        assert_eq!(comm.counts, sim.counts);
        assert_eq!(comm.unmatched, sim.unmatched);
        assert_eq!(comm.removed_pairs, sim.removed_pairs);
        assert_eq!(comm.n_prime, sim.n_prime);
        if let Some(est) = sim.estimate {
            assert_eq!(comm.joint_estimate, est);
        }
    }
}

#[test]
fn alice_marginal_untouched_in_raw_data() {
    let (p, _, d) = setup();
    let n = 60_000u64;
    let events = run_bipartite(&p, &d, n, RngSpec::new(3, 0)).unwrap();
    let mut counts = [0u64; 3];
    for e in &events {
        counts[e.y] += 1;
    }
    let sigma = (n as f64 * (1.0 / 3.0) * (2.0 / 3.0)).sqrt();
    for c in counts {
        assert!((c as f64 - n as f64 / 3.0).abs() < 3.0 * sigma, "{counts:?}");
    }
    let neg = events.iter().filter(|e| e.b == Branch::Negative).count() as f64 / n as f64;
    assert!((neg - 0.2).abs() < 3.0 * (0.16 / n as f64).sqrt());
}

#[test]
fn joint_input_sampling_follows_p() {
    // identity dynamics: Bob's output equals his input
    let (p, _, _) = setup();
    let d = NebitDecomposition::trivial(StochMatrix::identity(3));
    let n = 90_000u64;
    let events = run_bipartite(&p, &d, n, RngSpec::new(4, 0)).unwrap();
    let hits = events.iter().filter(|e| e.y == 0 && e.x == 0).count() as f64 / n as f64;
    let expected = 2.0 / 9.0;
    assert!((hits - expected).abs() < 3.0 * (expected * (1.0 - expected) / n as f64).sqrt());
    assert!(events.iter().all(|e| p.get(e.y, e.x) > &Rational::from_int(0)));
}

#[test]
fn sharded_stream_matches_serial() {
    let (p, _, d) = setup();
    let serial = run_bipartite(&p, &d, 10_001, RngSpec::new(8, 1)).unwrap();
    for shards in [2, 3, 9] {
        assert_eq!(
            run_bipartite_sharded(&p, &d, 10_001, RngSpec::new(8, 1), shards).unwrap(),
            serial
        );
    }
}

#[test]
fn blind_and_communicating_share_the_stream() {
    let (p, p_prime, d) = setup();
    let events = run_bipartite(&p, &d, 100_000, RngSpec::new(7, 0)).unwrap();
    let target = p_prime.dist().to_f64();
    let blind = post_select_blind(&events, 3, 3, &target);
    let comm = post_select_communicating(&events, 3, 3, &target);
    assert_eq!(blind.n, comm.n);
    println!(
        "blind {:?} tv {:.4}; comm {:?} tv {:.4}",
        blind.status, blind.tv_to_target, comm.status, comm.tv_to_target
    );
    assert!(blind.tv_to_target > 0.05);
    assert!(comm.tv_to_target < 0.02);
}
