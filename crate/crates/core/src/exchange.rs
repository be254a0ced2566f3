//! The exchange algorithm for the doubly-intractable ERGM posterior.

use nalgebra::{Cholesky, DMatrix, DVector, Dyn};
use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{ErgmError, Result};
use crate::graph::Graph;
use crate::linalg::cholesky;
use crate::rng::{stream_rng, streams, ErgmRng};
use crate::sampler::{GraphSampler, SamplerConfig};
use crate::statistics::{ModelSpec, StatVector};

/// Multivariate normal prior on `theta`.
#[derive(Clone, Debug)]
pub struct Prior {
    mean: StatVector,
    covariance: DMatrix<f64>,
    chol: Cholesky<f64, Dyn>,
    log_norm: f64,
}

impl Prior {
    pub fn new(mean: StatVector, covariance: DMatrix<f64>) -> Result<Self> {
        let d = mean.len();
        if covariance.nrows() != d || covariance.ncols() != d {
            return Err(ErgmError::Dimension { expected: d, got: covariance.nrows() });
        }
        let asym = (&covariance - covariance.transpose()).amax();
        if asym > 1e-12 * (1.0 + covariance.amax()) {
            return Err(ErgmError::NotPositiveDefinite);
        }
        let chol = cholesky(&covariance).ok_or(ErgmError::NotPositiveDefinite)?;
        let log_det: f64 = 2.0 * chol.l().diagonal().iter().map(|x| x.ln()).sum::<f64>();
        let log_norm = -0.5 * (log_det + d as f64 * (2.0 * std::f64::consts::PI).ln());
        Ok(Prior { mean, covariance, chol, log_norm })
    }

    /// `N(mean, variance * I)`.
    pub fn isotropic(mean: StatVector, variance: f64) -> Result<Self> {
        if !(variance > 0.0 && variance.is_finite()) {
            return Err(ErgmError::NotPositiveDefinite);
        }
        let d = mean.len();
        Prior::new(mean, DMatrix::from_diagonal_element(d, d, variance))
    }

    pub fn dim(&self) -> usize {
        self.mean.len()
    }

    pub fn mean(&self) -> &StatVector {
        &self.mean
    }

    pub fn covariance(&self) -> &DMatrix<f64> {
        &self.covariance
    }

    pub fn log_density(&self, theta: &[f64]) -> f64 {
        let diff = DVector::from_iterator(self.dim(), theta.iter().zip(self.mean.iter()).map(|(a, b)| a - b));
        let z = self.chol.l().solve_lower_triangular(&diff).expect("cholesky factor is nonsingular");
        self.log_norm - 0.5 * z.norm_squared()
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> StatVector {
        let z = DVector::from_iterator(self.dim(), (0..self.dim()).map(|_| rng.sample::<f64, _>(StandardNormal)));
        let x = self.chol.l() * z;
        self.mean.iter().zip(x.iter()).map(|(m, v)| m + v).collect::<Vec<_>>().into()
    }
}

/// `log` of the exchange acceptance ratio for moving `theta -> theta_prop`
/// given an auxiliary draw at `theta_prop` with statistics `s_aux`.
pub fn exchange_log_alpha(
    theta: &[f64],
    theta_prop: &[f64],
    s_obs: &[f64],
    s_aux: &[f64],
    prior: &Prior,
) -> f64 {
    let lik: f64 = theta
        .iter()
        .zip(theta_prop)
        .zip(s_aux.iter().zip(s_obs))
        .map(|((t, tp), (a, o))| (t - tp) * (a - o))
        .sum();
    lik + prior.log_density(theta_prop) - prior.log_density(theta)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExchangeConfig {
    /// Number of sweeps; each sweep updates every component once.
    pub main_iterations: usize,
    /// Auxiliary chain settings; its `seed` is unused, draws come from the
    /// chain's own stream.
    pub aux: SamplerConfig,
    pub proposal_sd: Vec<f64>,
    pub init: StatVector,
    pub seed: u64,
    pub record_aux: bool,
}

impl ExchangeConfig {
    pub fn new(main_iterations: usize, aux_iterations: usize, proposal_sd: Vec<f64>, init: StatVector) -> Self {
        ExchangeConfig {
            main_iterations,
            aux: SamplerConfig::new(aux_iterations),
            proposal_sd,
            init,
            seed: 0,
            record_aux: false,
        }
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    /// Per-component proposal scales given as variances.
    pub fn with_proposal_variances(mut self, variances: &[f64]) -> Self {
        self.proposal_sd = variances.iter().map(|v| v.sqrt()).collect();
        self
    }

    pub fn validate(&self, d: usize) -> Result<()> {
        if self.main_iterations == 0 {
            return Err(ErgmError::config("main_iterations must be >= 1"));
        }
        self.aux.validate()?;
        if self.proposal_sd.len() != d {
            return Err(ErgmError::Dimension { expected: d, got: self.proposal_sd.len() });
        }
        if self.proposal_sd.iter().any(|s| !(*s > 0.0 && s.is_finite())) {
            return Err(ErgmError::config("proposal scales must be positive"));
        }
        if self.init.len() != d {
            return Err(ErgmError::Dimension { expected: d, got: self.init.len() });
        }
        if !self.init.is_finite() {
            return Err(ErgmError::config("initial theta must be finite"));
        }
        Ok(())
    }
}

/// One auxiliary draw: its statistics, edge count and whether the move it
/// served was accepted.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AuxRecord {
    pub stats: StatVector,
    pub edges: usize,
    pub accepted: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ChainOutput {
    pub chain: usize,
    /// Seed of the run that produced this chain.
    pub seed: u64,
    /// One row per iteration (sweep).
    pub draws: Vec<StatVector>,
    /// Leading rows produced by a warmup phase and excluded from summaries.
    pub warmup: usize,
    /// Per-component acceptance counts. Full-vector moves count once for
    /// every component.
    pub accepted: Vec<u64>,
    pub proposed: Vec<u64>,
    pub aux_log: Option<Vec<AuxRecord>>,
}

impl ChainOutput {
    pub fn dim(&self) -> usize {
        self.accepted.len()
    }

    pub fn acceptance_rates(&self) -> Vec<f64> {
        self.accepted
            .iter()
            .zip(&self.proposed)
            .map(|(&a, &p)| if p == 0 { 0.0 } else { a as f64 / p as f64 })
            .collect()
    }

    pub fn overall_acceptance(&self) -> f64 {
        let p: u64 = self.proposed.iter().sum();
        if p == 0 {
            0.0
        } else {
            self.accepted.iter().sum::<u64>() as f64 / p as f64
        }
    }

    /// Draws of one component, all iterations.
    pub fn column(&self, k: usize) -> Vec<f64> {
        self.draws.iter().map(|t| t[k]).collect()
    }
}

/// Mutable per-chain machinery shared by the single-site and population
/// updates: auxiliary sampler, graph buffer and RNG stream.
pub(crate) struct AuxEngine<'a> {
    observed: &'a Graph,
    s_obs: StatVector,
    sampler: GraphSampler,
    iterations: usize,
    buffer: Graph,
    s_aux: Vec<f64>,
    pub(crate) rng: ErgmRng,
}

impl<'a> AuxEngine<'a> {
    pub(crate) fn new(observed: &'a Graph, spec: &ModelSpec, aux: &SamplerConfig, rng: ErgmRng) -> Self {
        let sampler = GraphSampler::new(spec, observed.n(), aux.proposal);
        let s_obs = sampler.evaluator().global(observed);
        AuxEngine {
            observed,
            s_aux: s_obs.to_vec(),
            s_obs,
            sampler,
            iterations: aux.iterations,
            buffer: observed.clone(),
            rng,
        }
    }

    /// Simulates `y' ~ pi(. | theta)` from the observed graph and returns `s(y')`.
    fn draw(&mut self, theta: &[f64]) -> &[f64] {
        self.buffer.clone_from(self.observed);
        self.s_aux.copy_from_slice(&self.s_obs);
        self.sampler
            .run(theta, &mut self.buffer, self.iterations, &mut self.s_aux, &mut self.rng);
        &self.s_aux
    }

    /// Proposes the exchange move to `theta_prop` and reports acceptance.
    pub(crate) fn exchange_move(
        &mut self,
        theta: &[f64],
        theta_prop: &[f64],
        prior: &Prior,
        log: Option<&mut Vec<AuxRecord>>,
    ) -> bool {
        self.draw(theta_prop);
        let log_alpha = exchange_log_alpha(theta, theta_prop, &self.s_obs, &self.s_aux, prior);
        let accept = log_alpha >= 0.0 || self.rng.random::<f64>().ln() < log_alpha;
        if let Some(log) = log {
            log.push(AuxRecord {
                stats: StatVector::new(self.s_aux.clone()),
                edges: self.buffer.edge_count(),
                accepted: accept,
            });
        }
        accept
    }
}

pub(crate) fn check_prior(spec: &ModelSpec, prior: &Prior) -> Result<()> {
    if prior.dim() != spec.dim() {
        return Err(ErgmError::Dimension { expected: spec.dim(), got: prior.dim() });
    }
    Ok(())
}

/// Single-site exchange sampler; `chain` selects the RNG stream so that
/// replicate chains under one seed are independent.
pub fn run_exchange_chain(
    g: &Graph,
    spec: &ModelSpec,
    prior: &Prior,
    cfg: &ExchangeConfig,
    chain: usize,
) -> Result<ChainOutput> {
    spec.check_graph(g)?;
    check_prior(spec, prior)?;
    let d = spec.dim();
    cfg.validate(d)?;
    let rng = stream_rng(cfg.seed, streams::EXCHANGE | chain as u64);
    let mut engine = AuxEngine::new(g, spec, &cfg.aux, rng);
    let mut theta = cfg.init.to_vec();
    let mut draws = Vec::with_capacity(cfg.main_iterations);
    let mut accepted = vec![0u64; d];
    let mut aux_log = cfg.record_aux.then(|| Vec::with_capacity(cfg.main_iterations * d));
    let mut prop = theta.clone();
    for _ in 0..cfg.main_iterations {
        for k in 0..d {
            prop.copy_from_slice(&theta);
            let z: f64 = engine.rng.sample(StandardNormal);
            prop[k] += cfg.proposal_sd[k] * z;
            if engine.exchange_move(&theta, &prop, prior, aux_log.as_mut()) {
                theta[k] = prop[k];
                accepted[k] += 1;
            }
        }
        draws.push(StatVector::new(theta.clone()));
    }
    Ok(ChainOutput {
        chain,
        seed: cfg.seed,
        draws,
        warmup: 0,
        accepted,
        proposed: vec![cfg.main_iterations as u64; d],
        aux_log,
    })
}

pub fn run_exchange(g: &Graph, spec: &ModelSpec, prior: &Prior, cfg: &ExchangeConfig) -> Result<ChainOutput> {
    run_exchange_chain(g, spec, prior, cfg, 0)
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct ExtremeFractions {
    pub count: usize,
    pub empty: f64,
    pub complete: f64,
    pub near_empty: f64,
    pub near_complete: f64,
}

impl ExtremeFractions {
    fn of<'a>(records: impl Iterator<Item = &'a AuxRecord>, dyads: usize, tolerance: f64) -> Self {
        let band = tolerance * dyads as f64;
        let mut out = ExtremeFractions::default();
        for r in records {
            out.count += 1;
            let e = r.edges as f64;
            out.empty += f64::from(r.edges == 0);
            out.complete += f64::from(r.edges == dyads);
            out.near_empty += f64::from(e <= band);
            out.near_complete += f64::from(e >= dyads as f64 - band);
        }
        if out.count > 0 {
            let c = out.count as f64;
            out.empty /= c;
            out.complete /= c;
            out.near_empty /= c;
            out.near_complete /= c;
        }
        out
    }

    pub fn near_extreme(&self) -> f64 {
        self.near_empty + self.near_complete
    }
}

/// How often auxiliary graphs hit (or come within `tolerance * dyads` edges
/// of) the empty and complete graphs, over all proposals and over accepted ones.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DegeneracyReport {
    pub tolerance: f64,
    pub all: ExtremeFractions,
    pub accepted: ExtremeFractions,
}

pub fn degeneracy_monitor(log: &[AuxRecord], dyads: usize, tolerance: f64) -> Result<DegeneracyReport> {
    if log.is_empty() {
        return Err(ErgmError::config("auxiliary log is empty"));
    }
    if !(0.0..0.5).contains(&tolerance) {
        return Err(ErgmError::config("tolerance must lie in [0, 0.5)"));
    }
    Ok(DegeneracyReport {
        tolerance,
        all: ExtremeFractions::of(log.iter(), dyads, tolerance),
        accepted: ExtremeFractions::of(log.iter().filter(|r| r.accepted), dyads, tolerance),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::statistics::{dot, global_stats};
    use proptest::prelude::*;
    use rand::Rng;
    use rand::SeedableRng;

    fn flat(d: usize) -> Prior {
        Prior::isotropic(StatVector::zeros(d), 30.0).unwrap()
    }

    #[test]
    fn prior_density_matches_closed_form() {
        let cov = DMatrix::from_row_slice(2, 2, &[2.0, 0.5, 0.5, 1.0]);
        let p = Prior::new([1.0, -1.0].into(), cov).unwrap();
        let x = [0.3, 0.2];
        let det: f64 = 2.0 - 0.25;
        let (a, b) = (x[0] - 1.0, x[1] + 1.0);
        let quad = (1.0 * a * a - 2.0 * 0.5 * a * b + 2.0 * b * b) / det;
        let want = -0.5 * quad - 0.5 * det.ln() - (2.0 * std::f64::consts::PI).ln();
        assert!((p.log_density(&x) - want).abs() < 1e-12);
        assert!(Prior::new([0.0, 0.0].into(), DMatrix::from_row_slice(2, 2, &[1.0, 2.0, 2.0, 1.0])).is_err());
        assert!(Prior::isotropic([0.0].into(), -1.0).is_err());
    }

    #[test]
    fn prior_samples_have_right_moments() {
        let cov = DMatrix::from_row_slice(2, 2, &[2.0, 0.5, 0.5, 1.0]);
        let p = Prior::new([1.0, -1.0].into(), cov).unwrap();
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(0);
        let n = 200_000;
        let xs: Vec<StatVector> = (0..n).map(|_| p.sample(&mut rng)).collect();
        let m0 = xs.iter().map(|x| x[0]).sum::<f64>() / n as f64;
        let m1 = xs.iter().map(|x| x[1]).sum::<f64>() / n as f64;
        let c01 = xs.iter().map(|x| (x[0] - m0) * (x[1] - m1)).sum::<f64>() / n as f64;
        assert!((m0 - 1.0).abs() < 0.01 && (m1 + 1.0).abs() < 0.01);
        assert!((c01 - 0.5).abs() < 0.02);
    }

    #[test]
    fn log_alpha_trivial_cases() {
        let prior = flat(2);
        let t = [-1.0, 0.2];
        assert_eq!(exchange_log_alpha(&t, &t, &[15.0, 36.0], &[70.0, 400.0], &prior), 0.0);
        // equal prior density at +-theta under a centred prior
        let tp = [1.0, -0.2];
        assert!(exchange_log_alpha(&t, &tp, &[15.0, 36.0], &[15.0, 36.0], &prior).abs() < 1e-12);
    }

    proptest! {
        #[test]
        fn log_alpha_is_the_four_factor_ratio(
            t in proptest::collection::vec(-2.0f64..2.0, 3),
            tp in proptest::collection::vec(-2.0f64..2.0, 3),
            seed in 0u64..500,
        ) {
            // unnormalized likelihoods evaluated on actual graphs
            let spec = ModelSpec::parse("edges + kstar2 + triangle", false).unwrap();
            let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
            let mk = |rng: &mut rand_chacha::ChaCha8Rng| {
                let mut g = Graph::new(7, false).unwrap();
                for d in g.clone().dyads() {
                    if rng.random_bool(0.4) {
                        g.toggle(d).unwrap();
                    }
                }
                g
            };
            let y = mk(&mut rng);
            let y_aux = mk(&mut rng);
            let s = global_stats(&y, &spec).unwrap();
            let sa = global_stats(&y_aux, &spec).unwrap();
            let prior = Prior::new([0.1, -0.2, 0.3].into(), DMatrix::from_diagonal_element(3, 3, 4.0)).unwrap();
            let log_q = |theta: &[f64], s: &[f64]| dot(theta, s);
            let direct = log_q(&tp, &s) + prior.log_density(&tp) + log_q(&t, &sa)
                - log_q(&t, &s) - prior.log_density(&t) - log_q(&tp, &sa);
            let got = exchange_log_alpha(&t, &tp, &s, &sa, &prior);
            prop_assert!((got - direct).abs() < 1e-9 * (1.0 + direct.abs()));
            // the reverse move with the same pair of graphs negates log alpha
            let back = exchange_log_alpha(&tp, &t, &s, &sa, &prior);
            prop_assert!((got + back).abs() < 1e-9 * (1.0 + got.abs()));
            // swapping the statistics along with the parameters only flips
            // the prior part
            let swapped = exchange_log_alpha(&tp, &t, &sa, &s, &prior);
            let prior_part = prior.log_density(&tp) - prior.log_density(&t);
            prop_assert!((got - prior_part - (swapped + prior_part)).abs() < 1e-9 * (1.0 + got.abs()));
        }
    }

    #[test]
    fn config_rejects_bad_scales() {
        let g = Graph::from_edges(5, false, [(0, 1)]).unwrap();
        let spec = ModelSpec::parse("edges", false).unwrap();
        let cfg = ExchangeConfig::new(10, 10, vec![0.0], [0.0].into());
        assert!(run_exchange(&g, &spec, &flat(1), &cfg).is_err());
        let cfg = ExchangeConfig::new(10, 10, vec![1.0, 1.0], [0.0].into());
        assert!(run_exchange(&g, &spec, &flat(1), &cfg).is_err());
        let cfg = ExchangeConfig::new(10, 10, vec![1.0], [0.0].into());
        assert!(run_exchange(&g, &spec, &flat(2), &cfg).is_err());
    }

    #[test]
    fn variance_interpretation() {
        let cfg = ExchangeConfig::new(1, 1, vec![], [0.0, 0.0].into()).with_proposal_variances(&[1.0, 0.1]);
        assert_eq!(cfg.proposal_sd[0], 1.0);
        assert!((cfg.proposal_sd[1] - 0.1f64.sqrt()).abs() < 1e-15);
    }

    #[test]
    fn seeded_runs_are_identical_and_logged() {
        let g = Graph::from_edges(8, false, [(0, 1), (1, 2), (2, 3), (5, 6)]).unwrap();
        let spec = ModelSpec::parse("edges + kstar2", false).unwrap();
        let mut cfg = ExchangeConfig::new(200, 200, vec![0.5, 0.1], [-1.0, 0.0].into()).with_seed(3);
        cfg.record_aux = true;
        let a = run_exchange(&g, &spec, &flat(2), &cfg).unwrap();
        let b = run_exchange(&g, &spec, &flat(2), &cfg).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.draws.len(), 200);
        assert_eq!(a.aux_log.as_ref().unwrap().len(), 400);
        let acc = a.overall_acceptance();
        assert!(acc > 0.0 && acc < 1.0);
        let logged = a.aux_log.as_ref().unwrap().iter().filter(|r| r.accepted).count() as u64;
        assert_eq!(logged, a.accepted.iter().sum::<u64>());
        let c = run_exchange_chain(&g, &spec, &flat(2), &cfg, 1).unwrap();
        assert_ne!(a.draws, c.draws);
    }

    #[test]
    fn edges_only_posterior_mean() {
        // conjugate-like check on a tiny graph; full KS comparison lives in
        // the acceptance suite
        let g = Graph::from_edges(6, false, [(0, 1), (1, 2), (2, 3), (3, 4), (4, 5)]).unwrap();
        let spec = ModelSpec::parse("edges", false).unwrap();
        let prior = flat(1);
        let cfg = ExchangeConfig::new(20_000, 200, vec![0.8], [0.0].into()).with_seed(1);
        let out = run_exchange(&g, &spec, &prior, &cfg).unwrap();
        // quadrature of exp(5 t - 15 log(1 + e^t)) N(t; 0, 30)
        let (mut z, mut m) = (0.0, 0.0);
        let mut t = -10.0;
        while t < 10.0 {
            let w = (5.0 * t - 15.0 * crate::statistics::log1p_exp(t) + prior.log_density(&[t])).exp();
            z += w;
            m += w * t;
            t += 1e-3;
        }
        let post = out.column(0)[2000..].iter().sum::<f64>() / 18_000.0;
        assert!((post - m / z).abs() < 0.05, "{post} vs {}", m / z);
    }

    #[test]
    fn degeneracy_fractions() {
        let rec = |edges, accepted| AuxRecord { stats: [edges as f64].into(), edges, accepted };
        let all_empty = vec![rec(0, false); 5];
        let r = degeneracy_monitor(&all_empty, 10, 0.0).unwrap();
        assert_eq!(r.all.empty, 1.0);
        assert_eq!(r.accepted.count, 0);
        let log = vec![rec(0, false), rec(10, false), rec(9, true), rec(5, true), rec(1, false)];
        let r = degeneracy_monitor(&log, 10, 0.1).unwrap();
        assert_eq!(r.all.count, 5);
        assert_eq!(r.all.empty, 0.2);
        assert_eq!(r.all.complete, 0.2);
        assert_eq!(r.all.near_empty, 0.4);
        assert_eq!(r.all.near_complete, 0.4);
        assert_eq!(r.accepted.count, 2);
        assert_eq!(r.accepted.near_complete, 0.5);
        assert_eq!(r.accepted.empty, 0.0);
        assert!(degeneracy_monitor(&[], 10, 0.1).is_err());
    }
}
