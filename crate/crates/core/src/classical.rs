//! Maximum pseudolikelihood and Monte Carlo maximum likelihood.

use std::collections::BTreeMap;

use nalgebra::DMatrix;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{ErgmError, Result};
use crate::graph::Graph;
use crate::linalg::{distance, log_sum_exp, max_abs, spd_inverse_sqrt_diag, spd_solve};
use crate::rng::{stream_rng, streams};
use crate::sampler::{GraphSampler, SamplerConfig};
use crate::statistics::{dot, log1p_exp, logistic, ModelSpec, StatVector};

const NEWTON_MAX_ITER: usize = 50;
const GRADIENT_TOL: f64 = 1e-8;
const MAX_HALVINGS: usize = 10;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FitResult {
    pub estimate: StatVector,
    /// `None` when the fit did not converge.
    pub std_errors: Option<StatVector>,
    pub converged: bool,
    pub diagnostics: BTreeMap<String, f64>,
    pub message: Option<String>,
}

/// One distinct `(change statistic, response)` pattern with its multiplicity.
struct DesignRow {
    delta: Vec<f64>,
    y: f64,
    weight: f64,
}

fn pseudolikelihood_design(g: &Graph, spec: &ModelSpec) -> Vec<DesignRow> {
    let eval = spec.evaluator(g.n());
    let mut delta = vec![0.0; spec.dim()];
    let mut counts: BTreeMap<(Vec<u64>, bool), f64> = BTreeMap::new();
    for k in 0..g.dyad_count() {
        let d = g.dyad_at(k);
        eval.change_into(g, d.i(), d.j(), &mut delta);
        let key: Vec<u64> = delta.iter().map(|x| x.to_bits()).collect();
        *counts.entry((key, g.has_edge(d.i(), d.j()))).or_insert(0.0) += 1.0;
    }
    counts
        .into_iter()
        .map(|((key, y), weight)| DesignRow {
            delta: key.into_iter().map(f64::from_bits).collect(),
            y: if y { 1.0 } else { 0.0 },
            weight,
        })
        .collect()
}

/// Log pseudolikelihood, its gradient and the observed information.
fn pseudolikelihood(rows: &[DesignRow], theta: &[f64]) -> (f64, Vec<f64>, DMatrix<f64>) {
    let d = theta.len();
    let mut ll = 0.0;
    let mut grad = vec![0.0; d];
    let mut info = DMatrix::zeros(d, d);
    for row in rows {
        let eta = dot(theta, &row.delta);
        ll += row.weight * (row.y * eta - log1p_exp(eta));
        let p = logistic(eta);
        let r = row.weight * (row.y - p);
        let v = row.weight * p * (1.0 - p);
        for a in 0..d {
            grad[a] += r * row.delta[a];
            for b in 0..=a {
                info[(a, b)] += v * row.delta[a] * row.delta[b];
            }
        }
    }
    for a in 0..d {
        for b in 0..a {
            info[(b, a)] = info[(a, b)];
        }
    }
    (ll, grad, info)
}

/// Every dyad fitted with probability within 1e-6 of its observed value:
/// Newton can drive the gradient below tolerance while `theta` runs off.
fn perfectly_separated(rows: &[DesignRow], theta: &[f64]) -> bool {
    rows.iter()
        .all(|r| (r.y - logistic(dot(theta, &r.delta))).abs() < 1e-6)
}

/// Maximum pseudolikelihood estimate: logistic regression of each dyad on
/// its change statistics, fitted by Newton–Raphson from zero.
pub fn mple(g: &Graph, spec: &ModelSpec) -> Result<FitResult> {
    spec.check_graph(g)?;
    let rows = pseudolikelihood_design(g, spec);
    let mut theta = vec![0.0; spec.dim()];
    let (mut ll, mut grad, mut info) = pseudolikelihood(&rows, &theta);
    let mut iterations = 0;
    let mut message = None;
    while max_abs(&grad) >= GRADIENT_TOL {
        if iterations == NEWTON_MAX_ITER {
            message = Some(format!(
                "no convergence after {NEWTON_MAX_ITER} Newton iterations; \
                 the pseudolikelihood may have no finite maximizer"
            ));
            break;
        }
        let Some(step) = spd_solve(&info, &grad) else {
            message = Some("information matrix is singular (complete separation?)".into());
            break;
        };
        let mut scale = 1.0;
        let mut moved = false;
        for _ in 0..=MAX_HALVINGS {
            let cand: Vec<f64> = theta.iter().zip(&step).map(|(t, s)| t + scale * s).collect();
            let next = pseudolikelihood(&rows, &cand);
            if next.0 >= ll - 1e-12 * (1.0 + ll.abs()) {
                theta = cand;
                (ll, grad, info) = next;
                moved = true;
                break;
            }
            scale *= 0.5;
        }
        iterations += 1;
        if !moved {
            message = Some("step halving failed to increase the pseudolikelihood".into());
            break;
        }
    }
    let mut converged = max_abs(&grad) < GRADIENT_TOL;
    if converged && perfectly_separated(&rows, &theta) {
        converged = false;
        message = Some("dyads are perfectly separated; the pseudolikelihood has no finite maximizer".into());
    }
    let std_errors = if converged {
        spd_inverse_sqrt_diag(&info).map(StatVector::new)
    } else {
        None
    };
    let converged = converged && std_errors.is_some();
    if converged {
        message = None;
    } else if message.is_none() {
        message = Some("information matrix is singular at the estimate".into());
    }
    let mut diagnostics = BTreeMap::new();
    diagnostics.insert("iterations".into(), iterations as f64);
    diagnostics.insert("gradient_norm".into(), max_abs(&grad));
    diagnostics.insert("log_pseudolikelihood".into(), ll);
    Ok(FitResult {
        estimate: StatVector::new(theta),
        std_errors,
        converged,
        diagnostics,
        message,
    })
}

/// Statistics of graphs simulated at `theta0`, together with the observed
/// statistics: everything the importance-sampled log-likelihood ratio needs.
#[derive(Clone, Debug)]
pub struct ImportanceSample {
    theta0: StatVector,
    s_obs: StatVector,
    stats: Vec<StatVector>,
    /// `s_i - s_obs`, kept for numerical stability.
    centered: Vec<Vec<f64>>,
}

impl ImportanceSample {
    pub fn new(theta0: StatVector, s_obs: StatVector, stats: Vec<StatVector>) -> Result<Self> {
        if stats.len() < 2 {
            return Err(ErgmError::config("importance sample needs m >= 2 graphs"));
        }
        let d = s_obs.len();
        for v in std::iter::once(&theta0).chain(&stats) {
            if v.len() != d {
                return Err(ErgmError::Dimension { expected: d, got: v.len() });
            }
        }
        let centered = stats.iter().map(|s| s.sub(&s_obs).into_vec()).collect();
        Ok(ImportanceSample { theta0, s_obs, stats, centered })
    }

    /// Draws `m` graphs from `pi(. | theta0)`, each by an independent run of
    /// `cfg.iterations` toggles started at the observed graph.
    pub fn simulate(
        g: &Graph,
        spec: &ModelSpec,
        theta0: &[f64],
        m: usize,
        cfg: &SamplerConfig,
    ) -> Result<Self> {
        spec.check_graph(g)?;
        spec.check_dim(theta0)?;
        cfg.validate()?;
        let s_obs = spec.evaluator(g.n()).global(g);
        let stats: Vec<StatVector> = (0..m)
            .into_par_iter()
            .map(|i| {
                let mut rng = stream_rng(cfg.seed, streams::MCMLE_SAMPLE | i as u64);
                let mut sampler = GraphSampler::new(spec, g.n(), cfg.proposal);
                let mut y = g.clone();
                let mut s = s_obs.clone();
                sampler.run(theta0, &mut y, cfg.iterations, &mut s, &mut rng);
                s
            })
            .collect();
        Self::new(StatVector::from(theta0.to_vec()), s_obs, stats)
    }

    pub fn theta0(&self) -> &StatVector {
        &self.theta0
    }

    pub fn observed(&self) -> &StatVector {
        &self.s_obs
    }

    pub fn stats(&self) -> &[StatVector] {
        &self.stats
    }

    fn exponents(&self, theta: &[f64]) -> Vec<f64> {
        let step: Vec<f64> = theta.iter().zip(self.theta0.iter()).map(|(a, b)| a - b).collect();
        self.centered.iter().map(|c| dot(&step, c)).collect()
    }

    /// `w(theta) = (theta - theta0)' s_obs - log mean_i exp{(theta - theta0)' s_i}`.
    pub fn log_ratio(&self, theta: &[f64]) -> f64 {
        let u = self.exponents(theta);
        (u.len() as f64).ln() - log_sum_exp(&u)
    }

    /// Self-normalized importance weights at `theta`.
    pub fn weights(&self, theta: &[f64]) -> Vec<f64> {
        let u = self.exponents(theta);
        let lse = log_sum_exp(&u);
        u.iter().map(|v| (v - lse).exp()).collect()
    }

    /// `1 / sum w_i^2`.
    pub fn effective_size(&self, theta: &[f64]) -> f64 {
        1.0 / self.weights(theta).iter().map(|w| w * w).sum::<f64>()
    }

    fn weighted_moments(&self, theta: &[f64]) -> (Vec<f64>, DMatrix<f64>) {
        let w = self.weights(theta);
        let d = self.s_obs.len();
        let mut mean = vec![0.0; d];
        for (wi, c) in w.iter().zip(&self.centered) {
            for (m, x) in mean.iter_mut().zip(c) {
                *m += wi * x;
            }
        }
        let mut cov = DMatrix::zeros(d, d);
        for (wi, c) in w.iter().zip(&self.centered) {
            for a in 0..d {
                let da = c[a] - mean[a];
                for b in 0..=a {
                    cov[(a, b)] += wi * da * (c[b] - mean[b]);
                }
            }
        }
        for a in 0..d {
            for b in 0..a {
                cov[(b, a)] = cov[(a, b)];
            }
        }
        (mean, cov)
    }

    /// `s_obs - sum_i w_i s_i`.
    pub fn gradient(&self, theta: &[f64]) -> StatVector {
        let (mean, _) = self.weighted_moments(theta);
        StatVector::new(mean.into_iter().map(|m| -m).collect())
    }

    /// Minus the importance-weighted covariance of the sampled statistics.
    pub fn hessian(&self, theta: &[f64]) -> DMatrix<f64> {
        -self.weighted_moments(theta).1
    }

    /// Whether each coordinate of `s_obs` lies within the range of the sample.
    pub fn observed_in_range(&self) -> bool {
        (0..self.s_obs.len()).all(|k| {
            let (lo, hi) = self
                .centered
                .iter()
                .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), c| (lo.min(c[k]), hi.max(c[k])));
            lo <= 0.0 && hi >= 0.0
        })
    }

    /// Evaluates `w` at every grid point.
    pub fn surface(&self, grid: &[StatVector]) -> Vec<(StatVector, f64)> {
        grid.iter().map(|t| (t.clone(), self.log_ratio(t))).collect()
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct McmleConfig {
    /// Number of simulated graphs `m`.
    pub sample_size: usize,
    pub sampler: SamplerConfig,
    pub max_iterations: usize,
    /// Largest `|theta - theta0|` before the fit is declared divergent.
    pub trust_radius: f64,
    pub min_effective_size: f64,
}

impl McmleConfig {
    pub fn new(sample_size: usize, sampler: SamplerConfig) -> Self {
        McmleConfig {
            sample_size,
            sampler,
            max_iterations: 100,
            trust_radius: 20.0,
            min_effective_size: 5.0,
        }
    }
}

impl Default for McmleConfig {
    fn default() -> Self {
        McmleConfig::new(1000, SamplerConfig::new(1000))
    }
}

/// Monte Carlo MLE around `theta0` (Geyer–Thompson).
pub fn mcmle(g: &Graph, spec: &ModelSpec, theta0: &[f64], cfg: &McmleConfig) -> Result<FitResult> {
    if cfg.sample_size < 2 {
        return Err(ErgmError::config("mcmle needs m >= 2"));
    }
    let sample = ImportanceSample::simulate(g, spec, theta0, cfg.sample_size, &cfg.sampler)?;
    Ok(maximize_log_ratio(&sample, cfg))
}

/// Newton ascent on `w` from `theta0`, with the failure checks applied.
pub fn maximize_log_ratio(sample: &ImportanceSample, cfg: &McmleConfig) -> FitResult {
    let theta0 = sample.theta0().as_slice();
    let tol = GRADIENT_TOL * (1.0 + max_abs(sample.observed()));
    let mut theta = theta0.to_vec();
    let mut w = sample.log_ratio(&theta);
    let mut failures: Vec<String> = Vec::new();
    if !sample.observed_in_range() {
        failures.push("observed statistics lie outside the range of the simulated statistics".into());
    }
    let mut iterations = 0;
    let mut grad = sample.gradient(&theta).into_vec();
    while max_abs(&grad) >= tol && iterations < cfg.max_iterations {
        let cov = -sample.hessian(&theta);
        let Some(step) = spd_solve(&cov, &grad) else {
            failures.push("weighted covariance of the sample is singular".into());
            break;
        };
        let mut scale = 1.0;
        let mut moved = false;
        for _ in 0..=MAX_HALVINGS {
            let cand: Vec<f64> = theta.iter().zip(&step).map(|(t, s)| t + scale * s).collect();
            let wc = sample.log_ratio(&cand);
            if wc >= w - 1e-12 * (1.0 + w.abs()) {
                theta = cand;
                w = wc;
                moved = true;
                break;
            }
            scale *= 0.5;
        }
        iterations += 1;
        if !moved {
            failures.push("step halving failed to increase the log ratio".into());
            break;
        }
        grad = sample.gradient(&theta).into_vec();
        if distance(&theta, theta0) > cfg.trust_radius {
            failures.push(format!(
                "estimate left the trust region (|theta - theta0| > {})",
                cfg.trust_radius
            ));
            break;
        }
    }
    if max_abs(&grad) >= tol && failures.is_empty() {
        failures.push(format!("no convergence after {iterations} iterations"));
    }
    let m_eff = sample.effective_size(&theta);
    if m_eff < cfg.min_effective_size {
        failures.push(format!("importance weights degenerate (effective size {m_eff:.2})"));
    }
    let std_errors = if failures.is_empty() {
        spd_inverse_sqrt_diag(&-sample.hessian(&theta)).map(StatVector::new)
    } else {
        None
    };
    if failures.is_empty() && std_errors.is_none() {
        failures.push("weighted covariance is singular at the estimate".into());
    }
    let mut diagnostics = BTreeMap::new();
    diagnostics.insert("iterations".into(), iterations as f64);
    diagnostics.insert("gradient_norm".into(), max_abs(&grad));
    diagnostics.insert("effective_sample_size".into(), m_eff);
    diagnostics.insert("log_ratio".into(), w);
    diagnostics.insert("sample_size".into(), sample.stats().len() as f64);
    FitResult {
        estimate: StatVector::new(theta),
        converged: failures.is_empty(),
        std_errors,
        diagnostics,
        message: (!failures.is_empty()).then(|| failures.join("; ")),
    }
}

/// `w_{theta0}` evaluated over `grid` from one shared simulated sample.
pub fn log_ratio_surface(
    g: &Graph,
    spec: &ModelSpec,
    theta0: &[f64],
    m: usize,
    cfg: &SamplerConfig,
    grid: &[StatVector],
) -> Result<Vec<(StatVector, f64)>> {
    if grid.is_empty() {
        return Err(ErgmError::config("log-ratio grid is empty"));
    }
    for t in grid {
        spec.check_dim(t)?;
    }
    Ok(ImportanceSample::simulate(g, spec, theta0, m, cfg)?.surface(grid))
}

/// The points `t * direction` for each `t`.
pub fn scaled_grid(direction: &[f64], ts: &[f64]) -> Vec<StatVector> {
    ts.iter()
        .map(|t| direction.iter().map(|x| t * x).collect::<Vec<_>>().into())
        .collect()
}

/// Whether the maximum of a 1-D sequence of surface values is attained
/// strictly inside the grid.
pub fn has_interior_maximum(values: &[f64]) -> bool {
    let Some((k, _)) = values
        .iter()
        .enumerate()
        .filter(|(_, v)| v.is_finite())
        .max_by(|a, b| a.1.total_cmp(b.1))
    else {
        return false;
    };
    k > 0 && k + 1 < values.len()
}
