mod common;

use common::*;
use edvw_core::synth::asymmetric_fixture;
use edvw_core::walks::{stationary_residual, DEFAULT_STATIONARY_MAX_ITERS, DEFAULT_STATIONARY_TOL};
use edvw_core::*;
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn markov(h: &Hypergraph) -> TransitionMatrix {
    markov_transition(&incidence_matrices(h)).unwrap()
}

fn pi_of(p: &TransitionMatrix) -> Vec<f64> {
    stationary(p, DEFAULT_STATIONARY_TOL, DEFAULT_STATIONARY_MAX_ITERS).unwrap()
}

proptest! {
    #[test]
    fn markov_matches_direct_summation(specs in edge_specs(8, 6, 5, true)) {
        let h = build(&specs);
        let p = markov(&h);
        prop_assert!(max_abs_diff(&p.p, &markov_oracle(&h)) < 1e-12);
        prop_assert!(max_row_error(&p.p) < 1e-12);
    }

    #[test]
    fn clique_matches_direct_summation(specs in edge_specs(8, 6, 5, true)) {
        let h = build(&specs);
        let p = clique_transition(&h).unwrap();
        prop_assert!(max_abs_diff(&p.p, &clique_oracle(&h)) < 1e-12);
        prop_assert!(max_row_error(&p.p) < 1e-12);
    }

    #[test]
    fn vertex_only_weights_make_both_walks_equal(
        specs in edge_specs(10, 6, 5, false),
        weights in proptest::collection::vec(0.1f64..5.0, 10),
    ) {
        let specs: Vec<EdgeSpec> = specs
            .into_iter()
            .map(|(m, w)| (m.into_iter().map(|(v, _)| (v, weights[v])).collect(), w))
            .collect();
        let h = build(&specs);
        prop_assert!(max_abs_diff(&markov(&h).p, &clique_transition(&h).unwrap().p) < 1e-12);
    }

    #[test]
    fn clique_walk_is_reversible(seed in 0u64..1000) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let h = common::random_connected(&mut rng, 9, 5, 5);
        let p = clique_transition(&h).unwrap();
        let report = balance_report(&p, &pi_of(&p), BalanceThresholds::default()).unwrap();
        prop_assert!(report.reversible, "max violation {}", report.max_violation);
    }

    #[test]
    fn empirical_rows_are_distributions(seed in 0u64..1000) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let h = common::random_connected(&mut rng, 6, 3, 4);
        let st = hyperwalk_estimate(&h, 50, 4, seed).unwrap();
        for m in &st.steps {
            prop_assert!(max_row_error(m) < 1e-9);
        }
    }
}

#[test]
fn asymmetric_vertex_weights_break_detailed_balance() {
    let h = asymmetric_fixture();
    let p = markov(&h);
    let pi = pi_of(&p);
    assert!(stationary_residual(&p.p, &pi) < 1e-10);
    let report = balance_report(&p, &pi, BalanceThresholds::default()).unwrap();
    assert!(!report.reversible);
    assert!(report.severe_violations > 0);
    assert_eq!(
        report.total_violations,
        report.moderate_violations + report.severe_violations
    );
    assert!(report.mean_max_violation <= report.max_violation);
}

#[test]
fn balance_report_rejects_non_stationary_input() {
    let h = asymmetric_fixture();
    let p = markov(&h);
    let err = balance_report(&p, &[1.0, 0.0, 0.0], BalanceThresholds::default()).unwrap_err();
    assert!(matches!(err, Error::NotStationary(_)));
}

#[test]
fn powers_converge_to_the_stationary_distribution() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let h = common::random_connected(&mut rng, 10, 6, 4);
    let p = markov(&h);
    let pi = pi_of(&p);
    let steps = similarity_steps(StepSource::Analytic(&p), 400).unwrap();
    let last = &steps.last().unwrap().s;
    for row in last.rows() {
        for (a, b) in row.iter().zip(&pi) {
            assert!((a - b).abs() < 1e-9, "{a} vs {b}");
        }
    }
}

#[test]
fn matrix_powers_match_repeated_products() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let h = common::random_connected(&mut rng, 7, 4, 4);
    let p = markov(&h);
    let steps = similarity_steps(StepSource::Analytic(&p), 5).unwrap();
    let mut power = ndarray::Array2::<f64>::eye(7);
    for s in &steps {
        let mut next = ndarray::Array2::<f64>::zeros((7, 7));
        for i in 0..7 {
            for j in 0..7 {
                next[(i, j)] = (0..7).map(|k| power[(i, k)] * p.p[(k, j)]).sum();
            }
        }
        power = next;
        assert!(max_abs_diff(&s.s, &power) < 1e-13);
        assert!(max_row_error(&s.s) < 1e-12);
    }
}

#[test]
fn two_uniform_hyperwalk_is_markovian() {
    // with |e| = 2 the walker re-draws a hyperedge at every step
    let h = build(&[
        (vec![(0, 1.0), (1, 2.0)], 1.0),
        (vec![(1, 1.0), (2, 1.0)], 2.0),
        (vec![(2, 3.0), (0, 1.0)], 1.5),
        (vec![(2, 1.0), (3, 1.0)], 1.0),
    ]);
    let n = 20_000;
    let p = markov(&h);
    let est = hyperwalk_estimate(&h, n, 1, 5).unwrap();
    for (a, b) in est.steps[0].iter().zip(p.p.iter()) {
        let sigma = (b * (1.0 - b) / n as f64).sqrt();
        assert!((a - b).abs() <= 3.0 * sigma + 1e-15, "{a} vs {b}");
    }
}

#[test]
fn hyperwalk_is_thread_count_independent() {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let h = common::random_connected(&mut rng, 8, 4, 5);
    let run = |threads| {
        rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build()
            .unwrap()
            .install(|| hyperwalk_estimate(&h, 300, 6, 9).unwrap().steps)
    };
    assert_eq!(run(1), run(4));
}

#[test]
fn two_step_hyperwalk_matches_exact_enumeration() {
    let h = build(&[
        (vec![(0, 2.0), (1, 1.0), (2, 1.0), (3, 1.0)], 4.0),
        (vec![(3, 1.0), (4, 3.0), (5, 1.0)], 2.0),
        (vec![(0, 1.0), (5, 1.0)], 1.0),
    ]);
    let p = markov(&h);
    let n = h.num_nodes();
    let mut exact = ndarray::Array2::<f64>::zeros((n, n));
    for v in 0..n {
        for &e in h.incident_edges(v) {
            let edge = h.edge(e);
            let first = edge.omega() / h.degree(v);
            let restart = 2.0 / edge.len() as f64;
            for (&w, &gw) in edge.members().iter().zip(edge.gammas()) {
                let to_w = first * gw / edge.degree();
                for x in 0..n {
                    let stay = edge.gamma(x).map_or(0.0, |g| g / edge.degree());
                    exact[(v, x)] += to_w * (restart * p.p[(w, x)] + (1.0 - restart) * stay);
                }
            }
        }
    }
    let walks = 40_000;
    let est = hyperwalk_estimate(&h, walks, 2, 17).unwrap();
    assert!(max_abs_diff(&est.steps[0], &p.p) < 0.02);
    for (a, b) in est.steps[1].iter().zip(exact.iter()) {
        let sigma = (b * (1.0 - b) / walks as f64).sqrt();
        assert!((a - b).abs() <= 4.0 * sigma + 1e-15, "{a} vs {b}");
    }
}
