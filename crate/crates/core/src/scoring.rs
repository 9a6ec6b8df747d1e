//! Walk-based node similarity and the generalized Jensen–Shannon
//! hyperedge score.
//!
//! Row `i` of a similarity matrix is the distribution of the walker's
//! position when started at `i`. A set of nodes whose rows nearly agree
//! has low generalized JS divergence and therefore a score close to 1.

use ndarray::Array2;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::hypergraph::NodeId;
use crate::walks::{StepTransitions, TransitionMatrix};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum SimilarityMode {
    /// `S = (1/K)·Σ_{k=1..K} P^k`
    Averaged,
    /// `S_k = P^k`
    PerStep,
}

#[derive(Debug, Clone)]
pub struct SimilarityMatrix {
    pub s: Array2<f64>,
    pub mode: SimilarityMode,
    pub steps: usize,
}

/// Where k-step transition matrices come from.
#[derive(Debug, Clone, Copy)]
pub enum StepSource<'a> {
    /// Powers `P^k` of a transition matrix.
    Analytic(&'a TransitionMatrix),
    /// Monte Carlo estimates `P̂_k`.
    Empirical(&'a StepTransitions),
}

impl StepSource<'_> {
    fn check(&self, k: usize) -> Result<()> {
        if k == 0 {
            return Err(Error::InvalidParameter {
                name: "K",
                msg: "at least one step is required".into(),
            });
        }
        if let StepSource::Empirical(st) = self {
            if k > st.steps.len() {
                return Err(Error::StepsUnavailable {
                    requested: k,
                    available: st.steps.len(),
                });
            }
        }
        Ok(())
    }

    /// Calls `f(k, M_k)` for `k = 1..=k_max` with `M_k` the k-step matrix.
    pub fn for_each_step(&self, k_max: usize, mut f: impl FnMut(usize, &Array2<f64>)) -> Result<()> {
        self.check(k_max)?;
        match self {
            StepSource::Analytic(tm) => {
                let mut power = tm.p.clone();
                f(1, &power);
                for k in 2..=k_max {
                    power = power.dot(&tm.p);
                    f(k, &power);
                }
            }
            StepSource::Empirical(st) => {
                for (i, m) in st.steps[..k_max].iter().enumerate() {
                    f(i + 1, m);
                }
            }
        }
        Ok(())
    }
}

/// `S = (1/K)·Σ_{k=1..K} M_k`.
pub fn similarity_avg(src: StepSource<'_>, k: usize) -> Result<SimilarityMatrix> {
    let mut prefixes = similarity_avg_prefixes(src, k)?;
    Ok(prefixes.pop().expect("k >= 1"))
}

/// Averaged similarity for every horizon `K' = 1..=K`.
pub fn similarity_avg_prefixes(src: StepSource<'_>, k: usize) -> Result<Vec<SimilarityMatrix>> {
    let mut out = Vec::with_capacity(k);
    let mut sum: Option<Array2<f64>> = None;
    src.for_each_step(k, |step, m| {
        let acc = match sum.as_mut() {
            Some(acc) => {
                *acc += m;
                acc
            }
            None => sum.insert(m.clone()),
        };
        out.push(SimilarityMatrix {
            s: &*acc / step as f64,
            mode: SimilarityMode::Averaged,
            steps: step,
        });
    })?;
    Ok(out)
}

/// `[M_1, …, M_K]` as per-step similarity matrices.
pub fn similarity_steps(src: StepSource<'_>, k: usize) -> Result<Vec<SimilarityMatrix>> {
    let mut out = Vec::with_capacity(k);
    src.for_each_step(k, |step, m| {
        out.push(SimilarityMatrix {
            s: m.clone(),
            mode: SimilarityMode::PerStep,
            steps: step,
        })
    })?;
    Ok(out)
}

const NORMALIZATION_TOL: f64 = 1e-6;
const SNAP: f64 = 1e-14;

/// Generalized Jensen–Shannon divergence (base 2)
/// `JS_π = Σ_i π_i Σ_x p_i(x)·log₂(p_i(x)/r(x))`, `r = Σ_i π_i p_i`.
///
/// `weights` defaults to uniform `1/t`. Terms with `p_i(x) = 0` contribute 0.
pub fn gjs_divergence(rows: &[&[f64]], weights: Option<&[f64]>) -> Result<f64> {
    let t = rows.len();
    if t < 2 {
        return Err(Error::InvalidParameter {
            name: "rows",
            msg: format!("need at least 2 distributions, got {t}"),
        });
    }
    let width = rows[0].len();
    for (i, row) in rows.iter().enumerate() {
        if row.len() != width {
            return Err(Error::InvalidParameter {
                name: "rows",
                msg: "distributions differ in length".into(),
            });
        }
        let sum: f64 = row.iter().sum();
        if (sum - 1.0).abs() > NORMALIZATION_TOL || row.iter().any(|&p| p < 0.0) {
            return Err(Error::NotNormalized { row: i, sum });
        }
    }
    let uniform = vec![1.0 / t as f64; t];
    let pi = match weights {
        Some(w) if w.len() == t => w,
        Some(_) => {
            return Err(Error::InvalidParameter {
                name: "weights",
                msg: "one weight per distribution required".into(),
            })
        }
        None => &uniform[..],
    };
    Ok(gjs_unchecked(rows, pi))
}

fn gjs_unchecked(rows: &[&[f64]], pi: &[f64]) -> f64 {
    let width = rows[0].len();
    let mut js = 0.0;
    for x in 0..width {
        let r: f64 = rows.iter().zip(pi).map(|(row, w)| w * row[x]).sum();
        if r <= 0.0 {
            continue;
        }
        for (row, w) in rows.iter().zip(pi) {
            let p = row[x];
            if p > 0.0 {
                js += w * p * (p / r).log2();
            }
        }
    }
    js
}

/// LRW-GJS score `1 − JS_{π_t}(S_{i_1}, …, S_{i_t}) / log₂ t` of the node
/// set `members` (uniform `π_t`, `t = |members|`), clamped to `[0, 1]`; values within 1e-14 of an end snap to it.
///
/// Members are sorted and deduplicated first, so the score is exactly
/// invariant under permutations.
pub fn hyperedge_score(s: &SimilarityMatrix, members: &[NodeId]) -> Result<f64> {
    let mut set = members.to_vec();
    set.sort_unstable();
    set.dedup();
    let n = s.s.nrows();
    if let Some(&bad) = set.iter().find(|&&v| v >= n) {
        return Err(Error::UnknownNode(format!("index {bad} (similarity has {n} rows)")));
    }
    let t = set.len();
    if t < 2 {
        return Err(Error::InvalidParameter {
            name: "members",
            msg: format!("a hyperedge needs at least 2 distinct members, got {t}"),
        });
    }
    let rows: Vec<&[f64]> = set
        .iter()
        .map(|&v| s.s.row(v).to_slice().expect("standard layout"))
        .collect();
    let pi = vec![1.0 / t as f64; t];
    let js = gjs_unchecked(&rows, &pi);
    let score = 1.0 - js / (t as f64).log2();
    // rounding in log₂ leaves a few ulps at the extremes
    Ok(if score < SNAP {
        0.0
    } else if score > 1.0 - SNAP {
        1.0
    } else {
        score
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use ndarray::arr2;

    fn tm(p: Array2<f64>) -> TransitionMatrix {
        let n = p.nrows();
        TransitionMatrix {
            p,
            nodes: (0..n).map(|i| i.to_string()).collect(),
        }
    }

    #[test]
    fn gjs_hand_values() {
        let a = [1.0, 0.0];
        let b = [0.5, 0.5];
        let js = gjs_divergence(&[&a, &b], None).unwrap();
        let expected = 0.5 * (4.0f64 / 3.0).log2() + 0.25 * (2.0f64 / 3.0).log2() + 0.25 * 2f64.log2();
        assert_abs_diff_eq!(js, expected, epsilon = 1e-15);
        assert_abs_diff_eq!(js, 0.3113, epsilon = 1e-4);
        assert_eq!(gjs_divergence(&[&b, &b, &b], None).unwrap(), 0.0);
    }

    #[test]
    fn gjs_disjoint_point_masses_reach_log_t() {
        for t in 2..8usize {
            let rows: Vec<Vec<f64>> = (0..t)
                .map(|i| (0..t).map(|x| if x == i { 1.0 } else { 0.0 }).collect())
                .collect();
            let refs: Vec<&[f64]> = rows.iter().map(Vec::as_slice).collect();
            assert_abs_diff_eq!(gjs_divergence(&refs, None).unwrap(), (t as f64).log2(), epsilon = 1e-12);
        }
    }

    #[test]
    fn gjs_rejects_unnormalized_rows() {
        let a = [0.5, 0.4];
        let b = [0.5, 0.5];
        assert!(matches!(
            gjs_divergence(&[&a, &b], None),
            Err(Error::NotNormalized { row: 0, .. })
        ));
        assert!(gjs_divergence(&[&b], None).is_err());
    }

    #[test]
    fn averaged_similarity_small_cases() {
        let p = tm(arr2(&[[0.5, 0.5, 0.0], [0.25, 0.5, 0.25], [0.0, 0.5, 0.5]]));
        let s1 = similarity_avg(StepSource::Analytic(&p), 1).unwrap();
        assert_eq!(s1.s, p.p);
        let s2 = similarity_avg(StepSource::Analytic(&p), 2).unwrap();
        let p2 = p.p.dot(&p.p);
        let expected = (&p.p + &p2) / 2.0;
        for (a, b) in s2.s.iter().zip(expected.iter()) {
            assert_abs_diff_eq!(a, b, epsilon = 1e-15);
        }
        let id = tm(Array2::eye(3));
        for k in [1, 4, 9] {
            assert_eq!(
                similarity_avg(StepSource::Analytic(&id), k).unwrap().s,
                Array2::<f64>::eye(3)
            );
        }
    }

    #[test]
    fn empirical_horizon_is_bounded() {
        let st = StepTransitions {
            steps: vec![Array2::eye(2)],
            n_walks: 1,
            max_len: 1,
            nodes: vec!["a".into(), "b".into()],
        };
        assert!(matches!(
            similarity_avg(StepSource::Empirical(&st), 2),
            Err(Error::StepsUnavailable {
                requested: 2,
                available: 1
            })
        ));
        assert_eq!(similarity_steps(StepSource::Empirical(&st), 1).unwrap().len(), 1);
    }

    #[test]
    fn score_extremes() {
        let same = SimilarityMatrix {
            s: arr2(&[[0.2, 0.3, 0.5], [0.2, 0.3, 0.5], [0.2, 0.3, 0.5]]),
            mode: SimilarityMode::Averaged,
            steps: 1,
        };
        assert_eq!(hyperedge_score(&same, &[0, 1, 2]).unwrap(), 1.0);
        let disjoint = SimilarityMatrix {
            s: Array2::eye(3),
            mode: SimilarityMode::Averaged,
            steps: 1,
        };
        assert_eq!(hyperedge_score(&disjoint, &[2, 0, 1]).unwrap(), 0.0);
        assert!(hyperedge_score(&disjoint, &[0, 3]).is_err());
    }
}
