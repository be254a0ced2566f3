//! End-to-end use of the public API on the bundled Florentine marriage network.

use ergm_core::datasets::load_dataset;
use ergm_core::{
    bayesian_gof, mcmle, mple, run_exchange, run_population, sample_graph, stats_trace, summarize, Dataset,
    ErgmError, ExchangeConfig, Graph, McmleConfig, ModelSpec, PopulationConfig, Prior, SamplerConfig, StatVector,
};

fn florentine() -> (Graph, ModelSpec) {
    let d = Dataset::Florentine;
    (load_dataset(d).unwrap(), d.reference_model())
}

#[test]
fn mcmle_recovers_the_logit_for_edges_only() {
    let (g, _) = florentine();
    let spec = ModelSpec::parse("edges", false).unwrap();
    let start = mple(&g, &spec).unwrap();
    let (e, n) = (g.edge_count() as f64, g.dyad_count() as f64);
    let logit = (e / (n - e)).ln();
    assert!((start.estimate[0] - logit).abs() < 1e-8);
    let cfg = McmleConfig::new(4000, SamplerConfig::new(500).with_seed(3));
    let fit = mcmle(&g, &spec, &[logit + 0.3], &cfg).unwrap();
    assert!(fit.converged, "{:?}", fit.message);
    assert!((fit.estimate[0] - logit).abs() < 0.1, "{} vs {logit}", fit.estimate[0]);
}

#[test]
fn simulation_is_seeded() {
    let (g, spec) = florentine();
    let theta = [-2.0, 0.1];
    let cfg = SamplerConfig::new(5000).with_seed(8);
    let a = sample_graph(&theta, &spec, &g, &cfg).unwrap();
    let b = sample_graph(&theta, &spec, &g, &cfg).unwrap();
    assert_eq!(a, b);
    let other = sample_graph(&theta, &spec, &g, &SamplerConfig::new(5000).with_seed(9)).unwrap();
    assert_ne!(a, other);
    let trace = stats_trace(&theta, &spec, &g, &cfg).unwrap();
    assert_eq!(trace.len(), 5000);
    let last = trace.last().unwrap();
    assert_eq!(last[0], a.edge_count() as f64);
}

#[test]
fn posterior_then_gof() {
    let (g, spec) = florentine();
    let prior = Prior::isotropic(StatVector::zeros(2), 30.0).unwrap();
    let cfg = ExchangeConfig::new(1500, 500, vec![0.3, 0.05], StatVector::zeros(2)).with_seed(5);
    let chain = run_exchange(&g, &spec, &prior, &cfg).unwrap();
    assert_eq!(chain.draws.len(), 1500);
    let rate = chain.overall_acceptance();
    assert!(rate > 0.05 && rate < 0.95, "acceptance {rate}");

    let summary = summarize(std::slice::from_ref(&chain), 0.2).unwrap();
    assert!(summary.pooled.mean[0] < -1.0, "edges mean {}", summary.pooled.mean[0]);

    let draws = &chain.draws[300..];
    let report = bayesian_gof(&g, &spec, draws, 30, &SamplerConfig::new(2000), 1).unwrap();
    let coverage = report.coverage();
    assert!(coverage > 0.5, "coverage {coverage}");
}

#[test]
fn population_sampler_runs_in_parallel() {
    let (g, spec) = florentine();
    let prior = Prior::isotropic(StatVector::zeros(2), 30.0).unwrap();
    let mut cfg = PopulationConfig::new(prior, 400, 300);
    cfg.seed = 4;
    let out = run_population(&g, &spec, &cfg).unwrap();
    assert_eq!(out.chains.len(), 4);
    assert!(out.chains.iter().all(|c| c.draws.len() == 400 && c.warmup == 80));
    assert_eq!(out.summary.pooled.draws, 4 * 320);
    let again = run_population(&g, &spec, &cfg).unwrap();
    assert_eq!(out.chains[3].draws, again.chains[3].draws);
}

#[test]
fn mismatched_inputs_are_rejected() {
    let (g, spec) = florentine();
    assert!(matches!(
        sample_graph(&[1.0], &spec, &g, &SamplerConfig::new(10)),
        Err(ErgmError::Dimension { expected: 2, got: 1 })
    ));
    assert!(ModelSpec::parse("edges + mutual", false).is_err());
    let prior = Prior::isotropic(StatVector::zeros(3), 1.0).unwrap();
    let cfg = ExchangeConfig::new(10, 10, vec![0.1; 3], StatVector::zeros(3));
    assert!(run_exchange(&g, &spec, &prior, &cfg).is_err());
}
