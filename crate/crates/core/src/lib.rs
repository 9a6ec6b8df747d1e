//! Random walks on hypergraphs with edge-dependent vertex weights (EDVW).
//!
//! Three walk dynamics are provided: the Markovian EDVW walk
//! `P = D_V⁻¹ W D_E⁻¹ R`, the walk on the weighted clique expansion, and the
//! non-Markovian hyperwalk whose k-step transitions are estimated by
//! seeded Monte Carlo. On top of them sit a generalized Jensen–Shannon
//! hyperedge score and two self-supervised benchmarks: fake-hyperedge
//! detection and hyperedge prediction.
//!
//! ```
//! use edvw_core::{hyperedge_score, incidence_matrices, markov_transition, similarity_avg, Hypergraph, StepSource};
//!
//! let mut b = Hypergraph::builder();
//! b.add_edge(&[("a", 2.0), ("b", 1.0), ("c", 1.0)], 3.0).unwrap();
//! b.add_edge(&[("a", 1.0), ("d", 1.0)], 2.0).unwrap();
//! let h = b.build().unwrap();
//!
//! let p = markov_transition(&incidence_matrices(&h)).unwrap();
//! let s = similarity_avg(StepSource::Analytic(&p), 3).unwrap();
//! let score = hyperedge_score(&s, &[0, 1, 2]).unwrap();
//! assert!((0.0..=1.0).contains(&score));
//! ```

pub mod error;
pub mod hypergraph;
pub mod ingest;
pub(crate) mod rng;
pub mod sampling;
pub mod scoring;
pub mod synth;
pub mod tasks;
pub mod walks;

pub use error::{Error, Result};
pub use hypergraph::{incidence_matrices, EdgeId, Hyperedge, Hypergraph, HypergraphBuilder, NodeId, WalkMatrices};
pub use ingest::{build_edvw_from_cables, load_hyperedge_list, CableRecord, Level, Weighting};
pub use sampling::{sample_negatives, split_train_probe, FakeEdge, FoldSplit, NegativeSet, Strategy};
pub use scoring::{
    gjs_divergence, hyperedge_score, similarity_avg, similarity_steps, SimilarityMatrix, SimilarityMode, StepSource,
};
pub use tasks::{
    auc, fit_exponential, guess_with_refinement, intruder_line, run_detection, run_prediction, DetectionConfig,
    DetectionReport, ExpFit, GapCurve, Method, PredictionConfig, PredictionReport, SizeBin,
};
pub use walks::{
    balance_report, clique_transition, hyperwalk_estimate, markov_transition, stationary, BalanceReport,
    BalanceThresholds, StepTransitions, TransitionMatrix,
};
