//! Bayesian goodness of fit: graphs simulated at posterior draws, compared
//! with the observed network on summaries the model does not fit directly.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{ErgmError, Result};
use crate::graph::Graph;
use crate::rng::{stream_rng, streams};
use crate::sampler::{GraphSampler, SamplerConfig};
use crate::statistics::{ModelSpec, StatVector};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GofBin {
    /// Degree, shared-partner count or path length; `inf` for unreachable pairs.
    pub label: String,
    pub observed: f64,
    pub p5: f64,
    pub p50: f64,
    pub p95: f64,
}

impl GofBin {
    pub fn covers_observed(&self) -> bool {
        self.p5 <= self.observed && self.observed <= self.p95
    }

    pub fn occupied(&self) -> bool {
        self.observed > 0.0 || self.p95 > 0.0
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GofFamily {
    pub name: String,
    pub bins: Vec<GofBin>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GofReport {
    pub simulations: usize,
    pub families: Vec<GofFamily>,
}

impl GofReport {
    /// Fraction of occupied bins whose observed value lies in `[p5, p95]`.
    pub fn coverage(&self) -> f64 {
        let (hit, total) = self
            .families
            .iter()
            .flat_map(|f| &f.bins)
            .filter(|b| b.occupied())
            .fold((0usize, 0usize), |(h, t), b| (h + usize::from(b.covers_observed()), t + 1));
        if total == 0 {
            1.0
        } else {
            hit as f64 / total as f64
        }
    }

    pub fn family(&self, name: &str) -> Option<&GofFamily> {
        self.families.iter().find(|f| f.name == name)
    }
}

fn proportions(counts: &[usize]) -> Vec<f64> {
    let total: usize = counts.iter().sum();
    if total == 0 {
        return vec![0.0; counts.len()];
    }
    counts.iter().map(|&c| c as f64 / total as f64).collect()
}

/// The summary families for one graph, as `(name, values)`: degree (or in-
/// and out-degree) proportions of nodes, edgewise shared partner proportions
/// of edges and geodesic proportions of pairs, whose last entry is the
/// unreachable bin.
pub fn graph_summaries(g: &Graph) -> Vec<(&'static str, Vec<f64>)> {
    let mut out = Vec::with_capacity(4);
    if g.is_directed() {
        out.push(("indegree", proportions(&g.in_degree_histogram())));
        out.push(("outdegree", proportions(&g.out_degree_histogram())));
    } else {
        out.push(("degree", proportions(&g.degree_histogram().expect("undirected"))));
    }
    out.push(("esp", proportions(&g.weak_esp_histogram())));
    let geo = g.geodesic_distribution();
    let mut counts = geo.by_length;
    counts.push(geo.unreachable);
    out.push(("geodesic", proportions(&counts)));
    out
}

/// Type-7 (linear interpolation) quantile of sorted data.
fn quantile(sorted: &[f64], q: f64) -> f64 {
    let h = (sorted.len() - 1) as f64 * q;
    let lo = h.floor() as usize;
    let hi = h.ceil() as usize;
    sorted[lo] + (h - lo as f64) * (sorted[hi] - sorted[lo])
}

/// Indices of `count` draws spread uniformly over `len`.
pub fn thin_indices(len: usize, count: usize) -> Vec<usize> {
    (0..count).map(|k| k * len / count).collect()
}

/// Simulates one graph per thinned posterior draw (from the observed graph,
/// `aux.iterations` toggles) and reports percentile bands per summary bin.
pub fn bayesian_gof(
    g: &Graph,
    spec: &ModelSpec,
    draws: &[StatVector],
    count: usize,
    aux: &SamplerConfig,
    seed: u64,
) -> Result<GofReport> {
    spec.check_graph(g)?;
    aux.validate()?;
    if draws.is_empty() || count == 0 {
        return Err(ErgmError::config("GOF needs at least one draw and one simulation"));
    }
    if count > draws.len() {
        return Err(ErgmError::config(format!(
            "{count} GOF simulations requested from {} draws",
            draws.len()
        )));
    }
    for t in draws {
        spec.check_dim(t)?;
    }
    let picks = thin_indices(draws.len(), count);
    let simulated: Vec<Vec<(&'static str, Vec<f64>)>> = picks
        .par_iter()
        .enumerate()
        .map(|(k, &idx)| {
            let mut rng = stream_rng(seed, streams::GOF_TASK | k as u64);
            let mut sampler = GraphSampler::new(spec, g.n(), aux.proposal);
            let mut y = g.clone();
            let mut s = sampler.evaluator().global(g);
            sampler.run(&draws[idx], &mut y, aux.iterations, &mut s, &mut rng);
            graph_summaries(&y)
        })
        .collect();
    let observed = graph_summaries(g);
    let families = observed
        .into_iter()
        .enumerate()
        .map(|(f, (name, obs))| {
            let geodesic = name == "geodesic";
            // keep finite bins up to the largest occupied one; the
            // unreachable bin is always kept
            let finite = if geodesic { obs.len() - 1 } else { obs.len() };
            let occupied = |v: &[f64]| v[..finite].iter().rposition(|x| *x > 0.0).map_or(0, |p| p + 1);
            let keep = simulated
                .iter()
                .map(|sim| occupied(&sim[f].1))
                .chain(std::iter::once(occupied(&obs)))
                .max()
                .unwrap_or(0)
                .max(1);
            let mut idx: Vec<usize> = (0..keep.min(finite)).collect();
            if geodesic {
                idx.push(finite);
            }
            let bins = idx
                .into_iter()
                .map(|b| {
                    let mut col: Vec<f64> = simulated.iter().map(|sim| sim[f].1[b]).collect();
                    col.sort_by(f64::total_cmp);
                    let label = if geodesic && b == finite {
                        "inf".to_string()
                    } else if geodesic {
                        (b + 1).to_string()
                    } else {
                        b.to_string()
                    };
                    GofBin {
                        label,
                        observed: obs[b],
                        p5: quantile(&col, 0.05),
                        p50: quantile(&col, 0.5),
                        p95: quantile(&col, 0.95),
                    }
                })
                .collect();
            GofFamily { name: name.to_string(), bins }
        })
        .collect();
    Ok(GofReport { simulations: count, families })
}
