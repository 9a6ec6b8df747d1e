mod common;

use common::*;
use edvw_core::sampling::alpha_count;
use edvw_core::synth::{planted_communities, PlantedConfig};
use edvw_core::tasks::*;
use edvw_core::{split_train_probe, Hypergraph, NodeId, SimilarityMatrix, SimilarityMode};
use ndarray::Array2;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn planted() -> Hypergraph {
    planted_communities(&PlantedConfig::default(), 0).unwrap()
}

fn random_similarity(rng: &mut ChaCha8Rng, n: usize) -> SimilarityMatrix {
    let mut s = Array2::from_shape_fn((n, n), |_| if rng.random_bool(0.3) { 0.0 } else { rng.random::<f64>() });
    for (i, mut row) in s.rows_mut().into_iter().enumerate() {
        row[i] += 0.1;
        let total = row.sum();
        row /= total;
    }
    SimilarityMatrix {
        s,
        mode: SimilarityMode::PerStep,
        steps: 1,
    }
}

proptest! {
    #[test]
    fn refinement_never_lowers_the_score(seed in any::<u64>(), m in 1usize..5, n_steps in 1usize..4) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let steps: Vec<SimilarityMatrix> = (0..n_steps).map(|_| random_similarity(&mut rng, 12)).collect();
        let cfg = RefinementConfig { n_passes: 6, early_stop: false, patience: 2 };
        let g = guess_with_refinement(&[0, 1], m, &steps, &(2..12).collect::<Vec<_>>(), &cfg).unwrap();
        prop_assert_eq!(g.nodes.len(), m);
        prop_assert!(g.score.unwrap() >= g.greedy_score.unwrap());
        let mut distinct = g.nodes.clone();
        distinct.sort_unstable();
        distinct.dedup();
        prop_assert_eq!(distinct.len(), m);
        prop_assert!(g.nodes.iter().all(|v| *v >= 2));
    }

    #[test]
    fn seen_matches_subset_scan(seed in 0u64..300, picks in proptest::collection::vec(0usize..15, 1..5)) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let h = random_connected(&mut rng, 15, 10, 6);
        let mut nodes = picks;
        nodes.sort_unstable();
        nodes.dedup();
        let oracle = h.edges().iter().any(|e| nodes.iter().all(|v| e.members().contains(v)));
        prop_assert_eq!(seen_in(&h, &nodes), oracle);
        for e in h.edges() {
            prop_assert!(seen_in(&h, e.members()));
        }
    }
}

#[test]
fn greedy_first_pick_is_the_pool_argmax() {
    let h = planted();
    let split = split_train_probe(&h, 0.1, 0, 0).unwrap();
    let train = h.restrict(&split.train).unwrap();
    let p = edvw_core::markov_transition(&edvw_core::incidence_matrices(&train)).unwrap();
    let steps = edvw_core::similarity_steps(edvw_core::StepSource::Analytic(&p), 3).unwrap();
    let no_refine = RefinementConfig {
        n_passes: 0,
        ..Default::default()
    };
    let mut recovered = 0;
    for &e in &split.probe {
        let members = h.edge(e).members();
        let (missing, preserved) = (members[0], &members[1..]);
        let pool: Vec<NodeId> = (0..h.num_nodes()).filter(|v| !preserved.contains(v)).collect();
        let g = guess_with_refinement(preserved, 1, &steps, &pool, &no_refine).unwrap();
        let mut best = (f64::NEG_INFINITY, usize::MAX);
        for &j in &pool {
            let mut set = preserved.to_vec();
            set.push(j);
            let sc = edvw_core::hyperedge_score(&steps[0], &set).unwrap();
            if sc > best.0 {
                best = (sc, j);
            }
        }
        assert_eq!(g.nodes, vec![best.1]);
        recovered += usize::from(g.nodes[0] == missing);
    }
    assert!(recovered > 0);
}

#[test]
fn greedy_recovers_a_node_sharing_an_edge_with_all_preserved() {
    // node 3 shares hyperedge {0,1,2,3} with the preserved {0,1}; 4..7 form a separate group
    let h = build(&[
        (vec![(0, 1.0), (1, 1.0), (2, 1.0), (3, 1.0)], 4.0),
        (vec![(0, 1.0), (1, 1.0), (3, 1.0)], 3.0),
        (vec![(4, 1.0), (5, 1.0), (6, 1.0), (7, 1.0)], 4.0),
        (vec![(2, 1.0), (4, 1.0)], 1.0),
    ]);
    let id = |name: &str| h.node_index(name).unwrap();
    let p = edvw_core::markov_transition(&edvw_core::incidence_matrices(&h)).unwrap();
    let steps = edvw_core::similarity_steps(edvw_core::StepSource::Analytic(&p), 1).unwrap();
    let preserved = [id("v0"), id("v1")];
    let pool: Vec<NodeId> = (0..h.num_nodes()).filter(|v| !preserved.contains(v)).collect();
    let g = guess_with_refinement(&preserved, 1, &steps, &pool, &RefinementConfig::default()).unwrap();
    assert_eq!(g.nodes, vec![id("v3")]);
}

fn small_prediction() -> PredictionConfig {
    PredictionConfig {
        folds: 3,
        methods: vec![Method::Markov, Method::Hyperwalk],
        n_walks: 300,
        max_steps: 4,
        ..Default::default()
    }
}

#[test]
fn prediction_accounting_holds() {
    let h = planted();
    let report = run_prediction(&h, &small_prediction()).unwrap();
    assert!(report.entries.iter().any(|e| e.method == Method::Random));
    for e in &report.entries {
        let t = &e.tally;
        assert_eq!(t.seen_correct + t.novel_correct, t.overall_correct);
        assert!(t.overall_correct <= t.overall_max);
        assert!(t.seen_correct <= t.seen_max);
        assert!(t.novel_correct <= t.novel_max);
        for r in [e.overall, e.seen, e.novel].into_iter().flatten() {
            assert!((0.0..=1.0).contains(&r));
        }
    }
}

#[test]
fn prediction_is_deterministic_across_thread_counts() {
    let h = planted();
    let cfg = small_prediction();
    let run = |threads| {
        let report = rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build()
            .unwrap()
            .install(|| run_prediction(&h, &cfg).unwrap());
        let mut buf = Vec::new();
        report::write_prediction_csv(&report, &mut buf).unwrap();
        buf
    };
    assert_eq!(run(1), run(3));
}

#[test]
fn random_baseline_matches_sampling_expectation() {
    // guessing m of P pool nodes without replacement hits m²/P deleted nodes
    // on average, hypergeometric variance m·(m/P)(1−m/P)(P−m)/(P−1)
    let h = planted();
    let cfg = PredictionConfig {
        folds: 4,
        methods: vec![],
        trials: 25,
        ..Default::default()
    };
    let report = run_prediction(&h, &cfg).unwrap();
    let (mut expected, mut var, mut correct) = (0.0, 0.0, 0usize);
    for fold in 0..cfg.folds {
        let split = split_train_probe(&h, cfg.probe_fraction, cfg.seed, fold).unwrap();
        for &e in &split.probe {
            let len = h.edge(e).len();
            let m = alpha_count(cfg.alpha, len) as f64;
            let pool = (h.num_nodes() - (len - m as usize)) as f64;
            expected += cfg.trials as f64 * m * m / pool;
            var += cfg.trials as f64 * m * (m / pool) * (1.0 - m / pool) * (pool - m) / (pool - 1.0);
        }
    }
    for e in report.entries.iter().filter(|e| e.method == Method::Random) {
        correct += e.tally.overall_correct;
    }
    let z = (correct as f64 - expected) / var.sqrt();
    assert!(z.abs() < 4.0, "correct {correct}, expected {expected:.1}, z {z:.2}");
}

#[test]
fn single_deletion_beats_random() {
    let h = planted();
    let cfg = PredictionConfig {
        alpha: 0.999,
        folds: 3,
        methods: vec![Method::Markov, Method::Clique],
        trials: 3,
        ..small_prediction()
    };
    let report = run_prediction(&h, &cfg).unwrap();
    let random = report.summary.iter().find(|s| s.method == Method::Random).unwrap();
    for s in report.summary.iter().filter(|s| s.method != Method::Random) {
        assert!(s.overall.unwrap().0 >= random.overall.unwrap().0);
    }
}

#[test]
fn detection_with_random_scores_is_chance() {
    let h = planted();
    let cfg = DetectionConfig {
        methods: vec![Method::Random],
        ..Default::default()
    };
    let report = run_detection(&h, &cfg).unwrap();
    let s = &report.summary[0];
    assert!((s.mean - 0.5).abs() <= 0.05, "{}", s.mean);
    // every planted hyperedge has size 2..=6, so only two bins can appear
    assert!(report.summary.iter().all(|s| s.bin.lo <= 6));
}

#[test]
fn auc_sampling_caps_pairs() {
    let h = planted();
    let cfg = DetectionConfig {
        folds: 2,
        probe_fraction: 0.3,
        methods: vec![Method::Random],
        n_auc_samples: 50,
        ..Default::default()
    };
    for e in run_detection(&h, &cfg).unwrap().entries {
        assert_eq!(e.n_pairs, (e.n_true * e.n_fake).min(50));
    }
}

#[test]
fn hyperwalk_gap_decays_slower_than_markov() {
    let h = planted();
    let cfg = DetectionConfig {
        folds: 3,
        methods: vec![Method::Markov, Method::Hyperwalk],
        n_walks: 1000,
        max_steps: 50,
        ..Default::default()
    };
    let curves = gap_over_steps(&h, &cfg).unwrap();
    let overall = |m| curves.iter().find(|c| c.method == m && c.bin.is_none()).unwrap();
    let (mk, hw) = (overall(Method::Markov), overall(Method::Hyperwalk));
    for k in 5..50 {
        assert!(hw.gaps[k - 1] > mk.gaps[k - 1], "k = {k}");
    }
}

#[test]
fn noisy_fit_is_within_three_standard_errors() {
    let (a, b, c) = (0.2, -0.5, 0.01);
    let x: Vec<f64> = (1..=40).map(f64::from).collect();
    let truth: Vec<f64> = x.iter().map(|&x| a * (b * x).exp() + c).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(42);
    let mut noise = || {
        // Box–Muller
        let (u, v): (f64, f64) = (rng.random(), rng.random());
        0.01 * (-2.0 * (1.0 - u).ln()).sqrt() * (std::f64::consts::TAU * v).cos()
    };
    let y: Vec<f64> = truth.iter().map(|t| t + noise()).collect();
    let fit = fit_exponential_points(&x, &y).unwrap();
    let se = fit.std_errors.unwrap();
    assert!((fit.a - a).abs() <= 3.0 * se[0]);
    assert!((fit.b - b).abs() <= 3.0 * se[1]);
    assert!((fit.c - c).abs() <= 3.0 * se[2]);

    // bootstrap over residuals: the analytic errors should be of the same size
    let resid: Vec<f64> = x.iter().zip(&y).map(|(&xi, &yi)| yi - fit.eval(xi)).collect();
    let mut boot = [Vec::new(), Vec::new(), Vec::new()];
    for _ in 0..100 {
        let yb: Vec<f64> = x
            .iter()
            .map(|&xi| fit.eval(xi) + resid[rng.random_range(0..resid.len())])
            .collect();
        let f = fit_exponential_points(&x, &yb).unwrap();
        for (slot, v) in boot.iter_mut().zip([f.a, f.b, f.c]) {
            slot.push(v);
        }
    }
    for (i, samples) in boot.iter().enumerate() {
        let mean = samples.iter().sum::<f64>() / samples.len() as f64;
        let sd = (samples.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / samples.len() as f64).sqrt();
        assert!(
            sd / se[i] > 0.5 && sd / se[i] < 2.0,
            "param {i}: bootstrap {sd}, analytic {}",
            se[i]
        );
    }
}
