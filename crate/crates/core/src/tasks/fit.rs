//! Exponential decay fits of gap curves and the intruder-count regression.

use nalgebra::{Matrix3, Vector3};
use serde::Serialize;

use super::detection::{gap_over_steps, DetectionConfig, GapCurve};
use super::{Method, SizeBin};
use crate::error::{Error, Result};
use crate::hypergraph::Hypergraph;
use crate::sampling::Strategy;

const MAX_ITERS: usize = 500;
const REL_TOL: f64 = 1e-10;

/// Least-squares fit of `y = a·e^{b·x} + c`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ExpFit {
    pub a: f64,
    pub b: f64,
    pub c: f64,
    /// Sum of squared errors.
    pub residual: f64,
    /// Standard errors of `(a, b, c)` from `s²·(JᵀJ)⁻¹`; `None` when
    /// the fit is degenerate or has no spare degrees of freedom.
    pub std_errors: Option<[f64; 3]>,
    pub iterations: usize,
}

impl ExpFit {
    pub fn eval(&self, x: f64) -> f64 {
        self.a * (self.b * x).exp() + self.c
    }
}

/// Fits the gap curve against `k = 1..=K`.
pub fn fit_exponential(curve: &GapCurve) -> Result<ExpFit> {
    let (x, y) = curve.points();
    fit_exponential_points(&x, &y)
}

pub fn fit_exponential_points(x: &[f64], y: &[f64]) -> Result<ExpFit> {
    if x.len() != y.len() {
        return Err(Error::InvalidParameter {
            name: "points",
            msg: "x and y differ in length".into(),
        });
    }
    if x.len() < 4 {
        return Err(Error::InvalidParameter {
            name: "points",
            msg: format!("need at least 4 points, got {}", x.len()),
        });
    }
    if x.iter().chain(y).any(|v| !v.is_finite()) {
        return Err(Error::FitFailure("non-finite input".into()));
    }

    let (lo, hi) = y
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(l, h), &v| (l.min(v), h.max(v)));
    let scale = lo.abs().max(hi.abs()).max(f64::MIN_POSITIVE);
    if hi - lo <= 1e-14 * scale {
        let c = y.iter().sum::<f64>() / y.len() as f64;
        return Ok(ExpFit {
            a: 0.0,
            b: 0.0,
            c,
            residual: sse(x, y, [0.0, 0.0, c]),
            std_errors: None,
            iterations: 0,
        });
    }

    let mut theta = initial_guess(x, y, lo, hi);
    let mut cost = sse(x, y, theta);
    let mut lambda = 1e-3;
    let mut iterations = 0;
    while iterations < MAX_ITERS {
        iterations += 1;
        let (jtj, jtr) = normal_equations(x, y, theta);
        let mut damped = jtj;
        for i in 0..3 {
            damped[(i, i)] += lambda * jtj[(i, i)].max(1e-12);
        }
        let Some(delta) = damped.lu().solve(&(-jtr)) else {
            lambda *= 10.0;
            if lambda > 1e16 {
                break;
            }
            continue;
        };
        let trial = [theta[0] + delta[0], theta[1] + delta[1], theta[2] + delta[2]];
        let trial_cost = sse(x, y, trial);
        if trial_cost.is_finite() && trial_cost < cost {
            let rel = (cost - trial_cost) / cost.max(f64::MIN_POSITIVE);
            theta = trial;
            cost = trial_cost;
            lambda = (lambda / 10.0).max(1e-15);
            if rel < REL_TOL || cost == 0.0 {
                break;
            }
        } else {
            lambda *= 10.0;
            if lambda > 1e16 {
                break;
            }
        }
    }

    if theta.iter().any(|v| !v.is_finite()) || !cost.is_finite() {
        return Err(Error::FitFailure(format!(
            "diverged to a={}, b={}, c={}",
            theta[0], theta[1], theta[2]
        )));
    }
    Ok(ExpFit {
        a: theta[0],
        b: theta[1],
        c: theta[2],
        residual: cost,
        std_errors: std_errors(x, y, theta, cost),
        iterations,
    })
}

/// `c₀ = min(y)`, then `ln(y − c₀) ≈ ln a₀ + b₀·x` over the points where
/// `y > c₀`.
fn initial_guess(x: &[f64], y: &[f64], lo: f64, hi: f64) -> [f64; 3] {
    let c0 = lo;
    let pts: Vec<(f64, f64)> = x
        .iter()
        .zip(y)
        .filter(|(_, &v)| v > c0)
        .map(|(&xi, &v)| (xi, (v - c0).ln()))
        .collect();
    if let Some((slope, intercept)) = ols(&pts) {
        if slope.is_finite() && intercept.is_finite() {
            return [intercept.exp(), slope, c0];
        }
    }
    let span = x.iter().cloned().fold(f64::NEG_INFINITY, f64::max) - x.iter().cloned().fold(f64::INFINITY, f64::min);
    [hi - lo, -1.0 / span.max(1.0), c0]
}

fn sse(x: &[f64], y: &[f64], [a, b, c]: [f64; 3]) -> f64 {
    x.iter()
        .zip(y)
        .map(|(&xi, &yi)| (a * (b * xi).exp() + c - yi).powi(2))
        .sum()
}

fn normal_equations(x: &[f64], y: &[f64], [a, b, c]: [f64; 3]) -> (Matrix3<f64>, Vector3<f64>) {
    let mut jtj = Matrix3::zeros();
    let mut jtr = Vector3::zeros();
    for (&xi, &yi) in x.iter().zip(y) {
        let e = (b * xi).exp();
        let row = Vector3::new(e, a * xi * e, 1.0);
        let r = a * e + c - yi;
        jtj += row * row.transpose();
        jtr += row * r;
    }
    (jtj, jtr)
}

fn std_errors(x: &[f64], y: &[f64], theta: [f64; 3], cost: f64) -> Option<[f64; 3]> {
    let dof = x.len().checked_sub(3).filter(|&d| d > 0)?;
    let (jtj, _) = normal_equations(x, y, theta);
    let cov = jtj.try_inverse()? * (cost / dof as f64);
    let se = [cov[(0, 0)], cov[(1, 1)], cov[(2, 2)]].map(|v| v.max(0.0).sqrt());
    se.iter().all(|v| v.is_finite()).then_some(se)
}

fn ols(pts: &[(f64, f64)]) -> Option<(f64, f64)> {
    if pts.len() < 2 {
        return None;
    }
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    if sxx <= 0.0 {
        return None;
    }
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let slope = sxy / sxx;
    Some((slope, my - slope * mx))
}

/// Ordinary least-squares line of the fitted amplitude `a` against the
/// number of intruders.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct IntruderLine {
    pub slope: f64,
    pub intercept: f64,
    pub r2: f64,
}

impl IntruderLine {
    /// Intruder count whose line value is closest to `a`.
    pub fn predict_intruders(&self, a: f64) -> Option<i64> {
        if self.slope == 0.0 {
            return None;
        }
        let n = ((a - self.intercept) / self.slope).round();
        n.is_finite().then_some(n as i64)
    }
}

pub fn intruder_line(fits: &[(usize, ExpFit)]) -> Result<IntruderLine> {
    let mut distinct: Vec<usize> = fits.iter().map(|f| f.0).collect();
    distinct.sort_unstable();
    distinct.dedup();
    if distinct.len() < 3 {
        return Err(Error::DegenerateRegression(format!(
            "need at least 3 distinct intruder counts, got {}",
            distinct.len()
        )));
    }
    let pts: Vec<(f64, f64)> = fits.iter().map(|(n, f)| (*n as f64, f.a)).collect();
    let (slope, intercept) = ols(&pts).ok_or_else(|| Error::DegenerateRegression("no variance in x".into()))?;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / pts.len() as f64;
    let ss_tot: f64 = pts.iter().map(|p| (p.1 - my).powi(2)).sum();
    let ss_res: f64 = pts.iter().map(|p| (p.1 - slope * p.0 - intercept).powi(2)).sum();
    let r2 = if ss_tot > 0.0 { 1.0 - ss_res / ss_tot } else { 1.0 };
    Ok(IntruderLine { slope, intercept, r2 })
}

#[derive(Debug, Clone, Serialize)]
pub struct IntruderFit {
    pub method: Method,
    pub intruders: usize,
    pub curve: GapCurve,
    pub fit: ExpFit,
}

#[derive(Debug, Clone, Serialize)]
pub struct IntruderReport {
    /// Hyperedge sizes scored; every fake has exactly `n` intruders.
    pub bin: SizeBin,
    pub fits: Vec<IntruderFit>,
    pub lines: Vec<(Method, IntruderLine)>,
}

/// For each intruder count `n`, builds fakes by replacing exactly `n`
/// members of each probe (probes of size `> max n` only), fits the
/// per-step gap curve of every walk method and regresses `a` on `n`.
///
/// `base` supplies folds, seed, horizon and methods; its sampler and bins
/// are overridden.
pub fn run_intruders(h: &Hypergraph, base: &DetectionConfig, intruders: &[usize]) -> Result<IntruderReport> {
    let max_n = intruders.iter().copied().max().ok_or(Error::InvalidParameter {
        name: "intruders",
        msg: "no intruder count given".into(),
    })?;
    if intruders.contains(&0) {
        return Err(Error::InvalidParameter {
            name: "intruders",
            msg: "intruder counts must be positive".into(),
        });
    }
    let bin = SizeBin {
        lo: max_n + 1,
        hi: None,
    };
    let methods: Vec<Method> = base.methods.iter().copied().filter(|m| *m != Method::Random).collect();
    let mut fits = Vec::new();
    for &n in intruders {
        let cfg = DetectionConfig {
            strategy: Strategy::KReplace { k: n },
            bins: vec![bin],
            methods: methods.clone(),
            ..base.clone()
        };
        for curve in gap_over_steps(h, &cfg)? {
            if curve.bin != Some(bin) {
                continue;
            }
            let fit = fit_exponential(&curve)?;
            fits.push(IntruderFit {
                method: curve.method,
                intruders: n,
                curve,
                fit,
            });
        }
    }
    let mut lines = Vec::new();
    for &method in &methods {
        let pts: Vec<(usize, ExpFit)> = fits
            .iter()
            .filter(|f| f.method == method)
            .map(|f| (f.intruders, f.fit))
            .collect();
        if pts.is_empty() {
            continue;
        }
        lines.push((method, intruder_line(&pts)?));
    }
    Ok(IntruderReport { bin, fits, lines })
}
