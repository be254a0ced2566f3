//! Population MCMC: H exchange chains coupled by parallel adaptive-direction
//! sampling (ADS) moves.

use nalgebra::{DMatrix, DVector};
use rand::seq::index;
use rand::Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;

use crate::diagnostics::{summarize, PosteriorSummary};
use crate::error::{ErgmError, Result};
use crate::exchange::{check_prior, AuxEngine, AuxRecord, ChainOutput, Prior};
use crate::graph::Graph;
use crate::linalg::cholesky;
use crate::rng::{stream_rng, streams};
use crate::sampler::SamplerConfig;
use crate::statistics::{ModelSpec, StatVector};

#[derive(Clone, Debug)]
pub struct PopulationConfig {
    /// Number of chains `H` (at least 3).
    pub chains: usize,
    pub gamma: f64,
    /// Covariance of the ADS noise `epsilon`.
    pub epsilon_cov: DMatrix<f64>,
    /// Iterations per chain, warmup included.
    pub iterations: usize,
    /// Leading iterations that use block random-walk updates.
    pub warmup: usize,
    /// Per-component scales of the warmup random walk.
    pub block_sd: Vec<f64>,
    pub aux: SamplerConfig,
    pub prior: Prior,
    pub seed: u64,
    /// Starting states; drawn from `N(prior mean, init_sd^2 I)` when absent.
    pub init: Option<Vec<StatVector>>,
    pub init_sd: f64,
    pub record_aux: bool,
}

impl PopulationConfig {
    /// Defaults: `H = 2d`, gamma 0.5, noise sd 0.1 per component
    /// (`epsilon_cov = 0.01 I`), warmup 20% of the iterations, warmup scales
    /// `sqrt(0.1)`, starting spread 3.
    pub fn new(prior: Prior, iterations: usize, aux_iterations: usize) -> Self {
        let d = prior.dim();
        PopulationConfig {
            chains: (2 * d).max(3),
            gamma: 0.5,
            epsilon_cov: DMatrix::from_diagonal_element(d, d, 0.01),
            iterations,
            warmup: iterations / 5,
            block_sd: vec![0.1f64.sqrt(); d],
            aux: SamplerConfig::new(aux_iterations),
            prior,
            seed: 0,
            init: None,
            init_sd: 3.0,
            record_aux: false,
        }
    }

    pub fn validate(&self, d: usize) -> Result<()> {
        if self.chains < 3 {
            return Err(ErgmError::config("population needs at least 3 chains"));
        }
        if !self.gamma.is_finite() {
            return Err(ErgmError::config("gamma must be finite"));
        }
        if self.epsilon_cov.nrows() != d || self.epsilon_cov.ncols() != d {
            return Err(ErgmError::Dimension { expected: d, got: self.epsilon_cov.nrows() });
        }
        cholesky(&self.epsilon_cov).ok_or(ErgmError::NotPositiveDefinite)?;
        if self.iterations == 0 || self.warmup >= self.iterations {
            return Err(ErgmError::config("need 0 <= warmup < iterations"));
        }
        if self.block_sd.len() != d {
            return Err(ErgmError::Dimension { expected: d, got: self.block_sd.len() });
        }
        if self.block_sd.iter().any(|s| !(*s > 0.0 && s.is_finite())) {
            return Err(ErgmError::config("block proposal scales must be positive"));
        }
        if !(self.init_sd > 0.0 && self.init_sd.is_finite()) {
            return Err(ErgmError::config("init_sd must be positive"));
        }
        if let Some(init) = &self.init {
            if init.len() != self.chains {
                return Err(ErgmError::config(format!(
                    "{} initial states given for {} chains",
                    init.len(),
                    self.chains
                )));
            }
            if let Some(bad) = init.iter().find(|t| t.len() != d) {
                return Err(ErgmError::Dimension { expected: d, got: bad.len() });
            }
        }
        self.aux.validate()
    }
}

/// `theta_h + gamma (theta_h1 - theta_h2) + epsilon` for given partners.
pub fn ads_move(states: &[StatVector], h: usize, h1: usize, h2: usize, gamma: f64, eps: &[f64]) -> StatVector {
    let (t, a, b) = (&states[h], &states[h1], &states[h2]);
    (0..t.len())
        .map(|k| t[k] + gamma * (a[k] - b[k]) + eps[k])
        .collect::<Vec<_>>()
        .into()
}

/// Picks `h1 != h2`, both different from `h`, uniformly without replacement.
pub fn ads_partners<R: Rng + ?Sized>(chains: usize, h: usize, rng: &mut R) -> (usize, usize) {
    let pick = index::sample(rng, chains - 1, 2);
    let lift = |k: usize| if k >= h { k + 1 } else { k };
    (lift(pick.index(0)), lift(pick.index(1)))
}

/// ADS proposal for chain `h` given the noise draw `eps`.
pub fn ads_propose<R: Rng + ?Sized>(
    states: &[StatVector],
    h: usize,
    gamma: f64,
    eps: &[f64],
    rng: &mut R,
) -> Result<StatVector> {
    if states.len() < 3 {
        return Err(ErgmError::config("ADS needs at least 3 chains"));
    }
    if h >= states.len() {
        return Err(ErgmError::config(format!("chain index {h} out of range")));
    }
    let (h1, h2) = ads_partners(states.len(), h, rng);
    Ok(ads_move(states, h, h1, h2, gamma, eps))
}

#[derive(Clone, Debug)]
pub struct PopulationOutput {
    pub chains: Vec<ChainOutput>,
    /// Summaries over the post-warmup draws.
    pub summary: PosteriorSummary,
}

struct Worker<'a> {
    engine: AuxEngine<'a>,
    theta: Vec<f64>,
    draws: Vec<StatVector>,
    accepted: u64,
    proposed: u64,
    log: Option<Vec<AuxRecord>>,
}

impl Worker<'_> {
    fn step(&mut self, h: usize, snapshot: &[StatVector], warm: bool, cfg: &PopulationConfig, eps_l: &DMatrix<f64>) {
        let d = self.theta.len();
        let rng = &mut self.engine.rng;
        let prop: Vec<f64> = if warm {
            self.theta
                .iter()
                .zip(&cfg.block_sd)
                .map(|(t, s)| t + s * rng.sample::<f64, _>(StandardNormal))
                .collect()
        } else {
            let z = DVector::from_iterator(d, (0..d).map(|_| rng.sample::<f64, _>(StandardNormal)));
            let eps = eps_l * z;
            let (h1, h2) = ads_partners(snapshot.len(), h, rng);
            // snapshot[h] is this chain's own current state
            ads_move(snapshot, h, h1, h2, cfg.gamma, eps.as_slice()).into_vec()
        };
        let accept = self.engine.exchange_move(&self.theta, &prop, &cfg.prior, self.log.as_mut());
        if !warm {
            self.proposed += 1;
            self.accepted += u64::from(accept);
        }
        if accept {
            self.theta = prop;
        }
        self.draws.push(StatVector::new(self.theta.clone()));
    }
}

/// Runs the population sampler. Within an iteration every ADS proposal reads
/// the other chains from the start-of-iteration snapshot, so chains update
/// in parallel.
pub fn run_population(g: &Graph, spec: &ModelSpec, cfg: &PopulationConfig) -> Result<PopulationOutput> {
    spec.check_graph(g)?;
    check_prior(spec, &cfg.prior)?;
    let d = spec.dim();
    cfg.validate(d)?;
    let eps_l = cholesky(&cfg.epsilon_cov).ok_or(ErgmError::NotPositiveDefinite)?.l();
    let init: Vec<StatVector> = match &cfg.init {
        Some(init) => init.clone(),
        None => {
            let spread = Prior::isotropic(cfg.prior.mean().clone(), cfg.init_sd * cfg.init_sd)?;
            let mut rng = stream_rng(cfg.seed, streams::POPULATION_INIT);
            (0..cfg.chains).map(|_| spread.sample(&mut rng)).collect()
        }
    };
    let mut workers: Vec<Worker> = init
        .iter()
        .enumerate()
        .map(|(h, theta)| Worker {
            engine: AuxEngine::new(g, spec, &cfg.aux, stream_rng(cfg.seed, streams::POPULATION_CHAIN | h as u64)),
            theta: theta.to_vec(),
            draws: Vec::with_capacity(cfg.iterations),
            accepted: 0,
            proposed: 0,
            log: cfg.record_aux.then(Vec::new),
        })
        .collect();
    let mut snapshot = init;
    for t in 0..cfg.iterations {
        let warm = t < cfg.warmup;
        workers
            .par_iter_mut()
            .enumerate()
            .for_each(|(h, w)| w.step(h, &snapshot, warm, cfg, &eps_l));
        for (s, w) in snapshot.iter_mut().zip(&workers) {
            s.copy_from_slice(&w.theta);
        }
    }
    let chains: Vec<ChainOutput> = workers
        .into_iter()
        .enumerate()
        .map(|(h, w)| ChainOutput {
            chain: h,
            seed: cfg.seed,
            draws: w.draws,
            warmup: cfg.warmup,
            accepted: vec![w.accepted; d],
            proposed: vec![w.proposed; d],
            aux_log: w.log,
        })
        .collect();
    let summary = summarize(&chains, 0.0)?;
    Ok(PopulationOutput { chains, summary })
}
