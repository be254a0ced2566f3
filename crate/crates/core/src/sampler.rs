//! Metropolis–Hastings simulation of `pi(y | theta)` by single-dyad toggles.

use std::fmt;
use std::str::FromStr;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{ErgmError, Result};
use crate::graph::{Dyad, Graph};
use crate::rng::{stream_rng, streams};
use crate::statistics::{dot, ModelSpec, StatEvaluator, StatVector};

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub enum Proposal {
    /// Tie/no-tie: pick the edge set or the empty-dyad set with equal
    /// probability, then a uniform dyad within it.
    #[default]
    Tnt,
    UniformDyad,
}

impl fmt::Display for Proposal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Proposal::Tnt => "tnt",
            Proposal::UniformDyad => "uniform",
        })
    }
}

impl FromStr for Proposal {
    type Err = ErgmError;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "tnt" => Ok(Proposal::Tnt),
            "uniform" | "uniformdyad" | "uniform-dyad" => Ok(Proposal::UniformDyad),
            other => Err(ErgmError::config(format!("unknown proposal `{other}`"))),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SamplerConfig {
    pub proposal: Proposal,
    /// Number of proposed toggles (not sweeps).
    pub iterations: usize,
    pub seed: u64,
    pub record_stats_every: Option<usize>,
}

impl SamplerConfig {
    pub fn new(iterations: usize) -> Self {
        SamplerConfig {
            proposal: Proposal::Tnt,
            iterations,
            seed: 0,
            record_stats_every: None,
        }
    }

    pub fn with_proposal(mut self, proposal: Proposal) -> Self {
        self.proposal = proposal;
        self
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.iterations == 0 {
            return Err(ErgmError::config("sampler iterations must be >= 1"));
        }
        if self.record_stats_every == Some(0) {
            return Err(ErgmError::config("record_stats_every must be >= 1"));
        }
        Ok(())
    }
}

/// Probability that tie/no-tie selects one particular dyad of the given kind
/// when the graph has `edges` of `dyads` dyads present.
fn tnt_select_prob(edges: usize, dyads: usize, pick_edge: bool) -> f64 {
    if pick_edge {
        let share = if edges == dyads { 1.0 } else { 0.5 };
        share / edges as f64
    } else {
        let share = if edges == 0 { 1.0 } else { 0.5 };
        share / (dyads - edges) as f64
    }
}

/// `log q(y | y') - log q(y' | y)` for a tie/no-tie move from a graph with
/// `edges` edges; `removing` says whether the proposed dyad is an edge.
pub fn tnt_log_hastings(edges: usize, dyads: usize, removing: bool) -> f64 {
    let forward = tnt_select_prob(edges, dyads, removing);
    let after = if removing { edges - 1 } else { edges + 1 };
    let reverse = tnt_select_prob(after, dyads, !removing);
    reverse.ln() - forward.ln()
}

/// Draws a tie/no-tie proposal and its log Hastings correction. `None` when
/// the graph has no dyads.
pub fn tnt_propose<R: Rng + ?Sized>(g: &Graph, rng: &mut R) -> Option<(Dyad, f64)> {
    let dyads = g.dyad_count();
    if dyads == 0 {
        return None;
    }
    let edges = g.edge_count();
    let pick_edge = if edges == 0 {
        false
    } else if edges == dyads {
        true
    } else {
        rng.random_bool(0.5)
    };
    let d = if pick_edge {
        g.edge_at(rng.random_range(0..edges))
    } else {
        g.empty_dyad_at(rng.random_range(0..dyads - edges))
    };
    Some((d, tnt_log_hastings(edges, dyads, pick_edge)))
}

/// Reusable MH engine for one model and graph order.
#[derive(Clone, Debug)]
pub struct GraphSampler {
    evaluator: StatEvaluator,
    proposal: Proposal,
    delta: Vec<f64>,
}

impl GraphSampler {
    pub fn new(spec: &ModelSpec, n: usize, proposal: Proposal) -> Self {
        GraphSampler {
            evaluator: spec.evaluator(n),
            proposal,
            delta: vec![0.0; spec.dim()],
        }
    }

    pub fn evaluator(&self) -> &StatEvaluator {
        &self.evaluator
    }

    /// One MH step. On acceptance the signed change statistic is added to
    /// `stats`. Returns whether the toggle was accepted.
    #[inline]
    pub fn step<R: Rng + ?Sized>(
        &mut self,
        theta: &[f64],
        g: &mut Graph,
        stats: &mut [f64],
        rng: &mut R,
    ) -> bool {
        let (d, log_h) = match self.proposal {
            Proposal::Tnt => match tnt_propose(g, rng) {
                Some(p) => p,
                None => return false,
            },
            Proposal::UniformDyad => {
                let dyads = g.dyad_count();
                if dyads == 0 {
                    return false;
                }
                (g.dyad_at(rng.random_range(0..dyads)), 0.0)
            }
        };
        let (i, j) = (d.i(), d.j());
        self.evaluator.change_into(g, i, j, &mut self.delta);
        let sign = if g.has_edge(i, j) { -1.0 } else { 1.0 };
        let log_alpha = sign * dot(theta, &self.delta) + log_h;
        if log_alpha >= 0.0 || rng.random::<f64>().ln() < log_alpha {
            g.flip(i, j);
            for (s, x) in stats.iter_mut().zip(&self.delta) {
                *s += sign * x;
            }
            true
        } else {
            false
        }
    }

    /// Runs `iterations` steps; `stats` must hold `s(g)` on entry and holds
    /// `s` of the final graph on return. Returns the number of accepted toggles.
    pub fn run<R: Rng + ?Sized>(
        &mut self,
        theta: &[f64],
        g: &mut Graph,
        iterations: usize,
        stats: &mut [f64],
        rng: &mut R,
    ) -> usize {
        (0..iterations)
            .filter(|_| self.step(theta, g, stats, rng))
            .count()
    }
}

fn check_inputs(theta: &[f64], spec: &ModelSpec, init: &Graph, cfg: &SamplerConfig) -> Result<()> {
    spec.check_graph(init)?;
    spec.check_dim(theta)?;
    cfg.validate()
}

/// Runs the sampler from `init` and returns the final graph.
pub fn sample_graph(
    theta: &[f64],
    spec: &ModelSpec,
    init: &Graph,
    cfg: &SamplerConfig,
) -> Result<Graph> {
    check_inputs(theta, spec, init, cfg)?;
    let mut rng = stream_rng(cfg.seed, streams::SIMULATE);
    let mut sampler = GraphSampler::new(spec, init.n(), cfg.proposal);
    let mut g = init.clone();
    let mut stats = sampler.evaluator().global(&g);
    sampler.run(theta, &mut g, cfg.iterations, &mut stats, &mut rng);
    Ok(g)
}

/// Like [`sample_graph`] but records `s(y)` after every
/// `record_stats_every` steps (default 1) and returns the trace.
pub fn stats_trace(
    theta: &[f64],
    spec: &ModelSpec,
    init: &Graph,
    cfg: &SamplerConfig,
) -> Result<Vec<StatVector>> {
    Ok(simulate_with_trace(theta, spec, init, cfg)?.1)
}

/// Final graph together with its statistics trace.
pub fn simulate_with_trace(
    theta: &[f64],
    spec: &ModelSpec,
    init: &Graph,
    cfg: &SamplerConfig,
) -> Result<(Graph, Vec<StatVector>)> {
    check_inputs(theta, spec, init, cfg)?;
    let every = cfg.record_stats_every.unwrap_or(1);
    let mut rng = stream_rng(cfg.seed, streams::SIMULATE);
    let mut sampler = GraphSampler::new(spec, init.n(), cfg.proposal);
    let mut g = init.clone();
    let mut stats = sampler.evaluator().global(&g);
    let mut trace = Vec::with_capacity(cfg.iterations / every);
    for t in 1..=cfg.iterations {
        sampler.step(theta, &mut g, &mut stats, &mut rng);
        if t % every == 0 {
            trace.push(stats.clone());
        }
    }
    Ok((g, trace))
}
