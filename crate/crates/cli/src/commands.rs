//! Subcommand implementations. Each one resolves and validates every key it
//! uses, writes the config echo, and only then starts sampling.

use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};
use std::str::FromStr;
use std::time::Instant;

use ergm_core::classical::{maximize_log_ratio, scaled_grid};
use ergm_core::datasets::{fetch_datasets, load_dataset, load_dataset_from, FetchReport, FetchStatus};
use ergm_core::diagnostics::{ChainSummary, PosteriorSummary};
use ergm_core::exchange::{run_exchange_chain, DegeneracyReport};
use ergm_core::io::{load_adjacency_csv, load_graph, save_graph};
use ergm_core::rng::streams;
use ergm_core::sampler::simulate_with_trace;
use ergm_core::{
    autocorrelation, bayesian_gof, degeneracy_monitor, mple, run_population, summarize, ChainOutput, Dataset,
    DMatrix, ExchangeConfig, FitResult, Graph, ImportanceSample, McmleConfig, ModelSpec, PopulationConfig, Prior,
    Proposal, SamplerConfig, StatVector,
};
use rayon::prelude::*;
use serde::Serialize;

use crate::artifacts::{self, *};
use crate::config::{Keys, NumList, RunConfig};
use crate::error::{CliError, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Command {
    Simulate,
    Mple,
    Mcmle,
    Exchange,
    PopExchange,
    Gof,
    FetchData,
    Summarize,
}

impl Command {
    pub const ALL: [Command; 8] = [
        Command::Simulate,
        Command::Mple,
        Command::Mcmle,
        Command::Exchange,
        Command::PopExchange,
        Command::Gof,
        Command::FetchData,
        Command::Summarize,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Command::Simulate => "simulate",
            Command::Mple => "mple",
            Command::Mcmle => "mcmle",
            Command::Exchange => "exchange",
            Command::PopExchange => "pop-exchange",
            Command::Gof => "gof",
            Command::FetchData => "fetch-data",
            Command::Summarize => "summarize",
        }
    }
}

impl fmt::Display for Command {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Command {
    type Err = CliError;

    fn from_str(s: &str) -> Result<Self> {
        Command::ALL
            .into_iter()
            .find(|c| c.name() == s)
            .ok_or_else(|| CliError::Config(format!("unknown subcommand `{s}`")))
    }
}

/// What a run produced.
#[derive(Clone, Debug)]
pub struct RunReport {
    pub command: Command,
    pub out_dir: PathBuf,
    pub files: Vec<PathBuf>,
    /// Short human-readable result lines.
    pub notes: Vec<String>,
}

/// Runs one subcommand with a resolved config.
pub fn run(command: Command, cfg: &RunConfig) -> Result<RunReport> {
    let keys = Keys::new(cfg);
    let out = PathBuf::from(keys.value::<String>("out", default_out(command))?);
    let job = Job::resolve(command, &keys)?;
    let echo = keys.finish(command.name())?;
    fs::create_dir_all(&out).map_err(|e| CliError::io(&out, e))?;
    let mut report = RunReport { command, out_dir: out.clone(), files: Vec::new(), notes: Vec::new() };
    let echo_path = out.join(CONFIG_ECHO);
    artifacts::write_echo(&echo_path, command.name(), &echo, &job.streams())?;
    report.files.push(echo_path);
    job.execute(&out, &mut report)?;
    Ok(report)
}

fn default_out(command: Command) -> String {
    match command {
        Command::FetchData => default_data_dir(),
        _ => "ergm-out".to_string(),
    }
}

fn default_data_dir() -> String {
    std::env::var("ERGM_DATA_DIR").unwrap_or_else(|_| "data".to_string())
}

/// Observed network plus model, shared by every estimating subcommand.
struct Input {
    graph: Graph,
    spec: ModelSpec,
}

impl Input {
    fn resolve(keys: &Keys) -> Result<Self> {
        let dataset: Option<String> = keys.optional("dataset")?;
        let file: Option<String> = keys.optional("graph")?;
        let adjacency: Option<String> = keys.optional("adjacency")?;
        let (graph, known) = match (dataset, file, adjacency) {
            (Some(name), None, None) => {
                let d: Dataset = name.parse()?;
                let dir = keys.value::<String>("data_dir", default_data_dir())?;
                let g = if d.is_vendored() { load_dataset(d)? } else { load_dataset_from(d, &dir)? };
                (g, Some(d))
            }
            (None, Some(path), None) => (load_graph(&path)?, None),
            (None, None, Some(path)) => {
                let directed = keys.value("directed", false)?;
                (load_adjacency_csv(&path, directed)?, None)
            }
            _ => {
                return Err(CliError::Config(
                    "give exactly one of `dataset`, `graph` or `adjacency`".into(),
                ))
            }
        };
        let spec = match (keys.optional::<String>("model")?, known) {
            (Some(terms), _) => ModelSpec::parse(&terms, graph.is_directed())?,
            (None, Some(d)) => d.reference_model(),
            (None, None) => return Err(CliError::Config("missing required key `model`".into())),
        };
        spec.check_graph(&graph)?;
        keys.resolved("model", spec.term_names().join(" + "));
        Ok(Input { graph, spec })
    }

    fn dim(&self) -> usize {
        self.spec.dim()
    }

    fn vector(&self, keys: &Keys, key: &str, default: &str) -> Result<StatVector> {
        let list = keys.value(key, default.parse::<NumList>().expect("valid default"))?;
        Ok(list.expand(key, self.dim())?.into())
    }

    fn prior(&self, keys: &Keys) -> Result<Prior> {
        let mean = self.vector(keys, "prior_mean", "0")?;
        let var: f64 = keys.value("prior_var", 30.0)?;
        Ok(Prior::isotropic(mean, var)?)
    }

    fn sampler(&self, keys: &Keys, key: &str, default_iterations: usize) -> Result<SamplerConfig> {
        let iterations = keys.value(key, default_iterations)?;
        let proposal: Proposal = keys.value("proposal", Proposal::Tnt)?;
        let cfg = SamplerConfig::new(iterations).with_proposal(proposal);
        cfg.validate()?;
        Ok(cfg)
    }
}

struct PosteriorOptions {
    burn_in: f64,
    max_lag: usize,
}

impl PosteriorOptions {
    fn resolve(keys: &Keys) -> Result<Self> {
        let burn_in: f64 = keys.value("burn_in", 0.0)?;
        if !(0.0..1.0).contains(&burn_in) {
            return Err(CliError::Config("burn_in must lie in [0, 1)".into()));
        }
        let max_lag = keys.value("max_lag", 200usize)?;
        Ok(PosteriorOptions { burn_in, max_lag })
    }
}

enum Job {
    Simulate {
        input: Input,
        theta: StatVector,
        sampler: SamplerConfig,
        start_empty: bool,
    },
    Mple {
        input: Input,
    },
    Mcmle {
        input: Input,
        theta0: Option<StatVector>,
        cfg: McmleConfig,
        surface: Option<(Vec<f64>, Option<StatVector>)>,
    },
    Exchange {
        input: Input,
        prior: Prior,
        cfg: ExchangeConfig,
        chains: usize,
        post: PosteriorOptions,
    },
    Population {
        input: Input,
        cfg: PopulationConfig,
        post: PosteriorOptions,
    },
    Gof {
        input: Input,
        draws: PathBuf,
        burn_in: f64,
        simulations: usize,
        aux: SamplerConfig,
        seed: u64,
    },
    Fetch,
    Summarize {
        draws: PathBuf,
        post: PosteriorOptions,
    },
}

fn positive(key: &str, v: usize) -> Result<usize> {
    if v == 0 {
        return Err(CliError::Config(format!("`{key}` must be >= 1")));
    }
    Ok(v)
}

fn surface_grid(keys: &Keys) -> Result<Option<Vec<f64>>> {
    let Some(step) = keys.optional::<f64>("surface_step")? else {
        return Ok(None);
    };
    let from: f64 = keys.value("surface_from", -1.0)?;
    let to: f64 = keys.value("surface_to", 3.0)?;
    if !(step > 0.0 && from.is_finite() && to.is_finite() && from <= to) {
        return Err(CliError::Config("surface grid needs surface_step > 0 and surface_from <= surface_to".into()));
    }
    let n = ((to - from) / step + 1e-9).floor() as usize;
    Ok(Some((0..=n).map(|k| from + k as f64 * step).collect()))
}

impl Job {
    fn resolve(command: Command, keys: &Keys) -> Result<Self> {
        let seed = || keys.value("seed", 1u64);
        let job = match command {
            Command::Simulate => {
                let input = Input::resolve(keys)?;
                let theta = input.vector(keys, "theta", "0")?;
                let mut sampler = input.sampler(keys, "iterations", 10_000)?.with_seed(seed()?);
                sampler.record_stats_every = Some(positive("record_every", keys.value("record_every", 1)?)?);
                let start_empty = match keys.value::<String>("start", "observed".into())?.as_str() {
                    "observed" => false,
                    "empty" => true,
                    other => return Err(CliError::Config(format!("start must be observed|empty, got `{other}`"))),
                };
                Job::Simulate { input, theta, sampler, start_empty }
            }
            Command::Mple => Job::Mple { input: Input::resolve(keys)? },
            Command::Mcmle => {
                let input = Input::resolve(keys)?;
                let theta0 = keys
                    .optional::<NumList>("theta0")?
                    .map(|l| l.expand("theta0", input.dim()).map(StatVector::from))
                    .transpose()?;
                let sampler = input.sampler(keys, "aux_iterations", 1000)?.with_seed(seed()?);
                let mut cfg = McmleConfig::new(keys.value("sample_size", 1000)?, sampler);
                if cfg.sample_size < 2 {
                    return Err(CliError::Config("sample_size must be >= 2".into()));
                }
                cfg.max_iterations = positive("max_iterations", keys.value("max_iterations", cfg.max_iterations)?)?;
                cfg.trust_radius = keys.value("trust_radius", cfg.trust_radius)?;
                let surface = match surface_grid(keys)? {
                    Some(ts) => {
                        let direction = keys
                            .optional::<NumList>("surface_direction")?
                            .map(|l| l.expand("surface_direction", input.dim()).map(StatVector::from))
                            .transpose()?;
                        Some((ts, direction))
                    }
                    None => None,
                };
                Job::Mcmle { input, theta0, cfg, surface }
            }
            Command::Exchange => {
                let input = Input::resolve(keys)?;
                let prior = input.prior(keys)?;
                let aux = input.sampler(keys, "aux_iterations", 1000)?;
                let variances = input.vector(keys, "proposal_var", "0.1")?;
                let init = keys
                    .optional::<NumList>("init")?
                    .map(|l| l.expand("init", input.dim()).map(StatVector::from))
                    .transpose()?
                    .unwrap_or_else(|| prior.mean().clone());
                let mut cfg = ExchangeConfig::new(keys.value("main_iterations", 30_000)?, aux.iterations, Vec::new(), init)
                    .with_proposal_variances(&variances)
                    .with_seed(seed()?);
                cfg.aux = aux;
                cfg.record_aux = keys.value("record_aux", false)?;
                cfg.validate(input.dim())?;
                let chains = positive("chains", keys.value("chains", 1)?)?;
                let post = PosteriorOptions::resolve(keys)?;
                Job::Exchange { input, prior, cfg, chains, post }
            }
            Command::PopExchange => {
                let input = Input::resolve(keys)?;
                let prior = input.prior(keys)?;
                let aux = input.sampler(keys, "aux_iterations", 1000)?;
                let d = input.dim();
                let mut cfg = PopulationConfig::new(prior, keys.value("main_iterations", 5000)?, aux.iterations);
                cfg.aux = aux;
                cfg.chains = keys.value("chains", cfg.chains)?;
                cfg.gamma = keys.value("gamma", cfg.gamma)?;
                let eps: f64 = keys.value("epsilon_var", cfg.epsilon_cov[(0, 0)])?;
                cfg.epsilon_cov = DMatrix::from_diagonal_element(d, d, eps);
                let warmup: f64 = keys.value("warmup", 0.2)?;
                if !(0.0..1.0).contains(&warmup) {
                    return Err(CliError::Config("warmup must lie in [0, 1)".into()));
                }
                cfg.warmup = (warmup * cfg.iterations as f64).floor() as usize;
                let block_var: f64 = keys.value("block_var", 0.1)?;
                cfg.block_sd = vec![block_var.sqrt(); d];
                cfg.init_sd = keys.value("init_sd", cfg.init_sd)?;
                cfg.record_aux = keys.value("record_aux", false)?;
                cfg.seed = seed()?;
                cfg.validate(d)?;
                let post = PosteriorOptions::resolve(keys)?;
                Job::Population { input, cfg, post }
            }
            Command::Gof => {
                let input = Input::resolve(keys)?;
                let draws = PathBuf::from(keys.required::<String>("draws")?);
                let burn_in: f64 = keys.value("burn_in", 0.0)?;
                if !(0.0..1.0).contains(&burn_in) {
                    return Err(CliError::Config("burn_in must lie in [0, 1)".into()));
                }
                let simulations = positive("simulations", keys.value("simulations", 100)?)?;
                let aux = input.sampler(keys, "aux_iterations", 10_000)?;
                Job::Gof { input, draws, burn_in, simulations, aux, seed: seed()? }
            }
            Command::FetchData => Job::Fetch,
            Command::Summarize => Job::Summarize {
                draws: PathBuf::from(keys.required::<String>("draws")?),
                post: PosteriorOptions::resolve(keys)?,
            },
        };
        Ok(job)
    }

    /// RNG streams this job will draw from, for the config echo.
    fn streams(&self) -> Vec<(String, u64)> {
        match self {
            Job::Simulate { .. } => vec![("simulate".into(), streams::SIMULATE)],
            Job::Mcmle { cfg, .. } => vec![(
                format!("sample runs 0..{}", cfg.sample_size),
                streams::MCMLE_SAMPLE,
            )],
            Job::Exchange { chains, .. } => (0..*chains)
                .map(|c| (format!("chain {c}"), streams::EXCHANGE | c as u64))
                .collect(),
            Job::Population { cfg, .. } => std::iter::once(("initial states".into(), streams::POPULATION_INIT))
                .chain((0..cfg.chains).map(|h| (format!("chain {h}"), streams::POPULATION_CHAIN | h as u64)))
                .collect(),
            Job::Gof { simulations, .. } => vec![(format!("gof tasks 0..{simulations}"), streams::GOF_TASK)],
            Job::Mple { .. } | Job::Fetch | Job::Summarize { .. } => Vec::new(),
        }
    }

    fn execute(self, out: &Path, report: &mut RunReport) -> Result<()> {
        let start = Instant::now();
        match self {
            Job::Simulate { input, theta, sampler, start_empty } => {
                let init = if start_empty { Graph::new(input.graph.n(), input.graph.is_directed())? } else { input.graph };
                let (g, trace) = simulate_with_trace(&theta, &input.spec, &init, &sampler)?;
                let terms = input.spec.term_names();
                let every = sampler.record_stats_every.unwrap_or(1);
                write_trace(&out.join(TRACE_CSV), &terms, every, &trace)?;
                save_graph(&g, out.join(GRAPH_EDGES))?;
                let mean = column_means(&trace);
                let summary = SimulateSummary {
                    command: "simulate",
                    terms,
                    iterations: sampler.iterations,
                    final_density: g.density(),
                    final_stats: trace.last().cloned(),
                    mean_stats: mean,
                    wall_clock_seconds: start.elapsed().as_secs_f64(),
                };
                write_json(&out.join(SUMMARY_JSON), &summary)?;
                report.notes.push(format!("final density {:.4}", g.density()));
                report.files.extend([TRACE_CSV, GRAPH_EDGES, SUMMARY_JSON].map(|f| out.join(f)));
            }
            Job::Mple { input } => {
                let fit = mple(&input.graph, &input.spec)?;
                report.notes.push(fit_note("MPLE", &fit));
                let doc = FitDocument { method: "mple", terms: input.spec.term_names(), theta0: None, fit };
                write_json(&out.join(FIT_JSON), &doc)?;
                report.files.push(out.join(FIT_JSON));
            }
            Job::Mcmle { input, theta0, cfg, surface } => {
                let needs_mple = theta0.is_none() || matches!(surface, Some((_, None)));
                let mple_fit = if needs_mple { Some(mple(&input.graph, &input.spec)?.estimate) } else { None };
                let theta0 = theta0.or_else(|| mple_fit.clone()).expect("resolved above");
                let sample = ImportanceSample::simulate(&input.graph, &input.spec, &theta0, cfg.sample_size, &cfg.sampler)?;
                let fit = maximize_log_ratio(&sample, &cfg);
                report.notes.push(fit_note("MC-MLE", &fit));
                if let Some((ts, direction)) = surface {
                    let direction = direction.or(mple_fit).expect("resolved above");
                    let values = sample.surface(&scaled_grid(&direction, &ts));
                    write_surface(&out.join(SURFACE_CSV), &ts, &values)?;
                    report.files.push(out.join(SURFACE_CSV));
                }
                let doc = FitDocument { method: "mcmle", terms: input.spec.term_names(), theta0: Some(theta0), fit };
                write_json(&out.join(FIT_JSON), &doc)?;
                report.files.push(out.join(FIT_JSON));
            }
            Job::Exchange { input, prior, cfg, chains, post } => {
                let runs = (0..chains)
                    .into_par_iter()
                    .map(|c| run_exchange_chain(&input.graph, &input.spec, &prior, &cfg, c))
                    .collect::<ergm_core::Result<Vec<_>>>()?;
                write_posterior("exchange", &input, &runs, &post, cfg.seed, start, out, report)?;
            }
            Job::Population { input, cfg, post } => {
                let run = run_population(&input.graph, &input.spec, &cfg)?;
                write_posterior("pop-exchange", &input, &run.chains, &post, cfg.seed, start, out, report)?;
            }
            Job::Gof { input, draws, burn_in, simulations, aux, seed } => {
                let chains = read_draws(&draws)?;
                let kept: Vec<StatVector> = chains
                    .iter()
                    .flat_map(|c| ergm_core::diagnostics::retained_draws(c, burn_in).iter().cloned())
                    .collect();
                let gof = bayesian_gof(&input.graph, &input.spec, &kept, simulations.min(kept.len()), &aux, seed)?;
                write_gof(&out.join(GOF_CSV), &gof)?;
                let summary = GofSummary {
                    command: "gof",
                    simulations: gof.simulations,
                    coverage: gof.coverage(),
                    wall_clock_seconds: start.elapsed().as_secs_f64(),
                };
                write_json(&out.join(SUMMARY_JSON), &summary)?;
                report.notes.push(format!(
                    "{} simulations, {:.0}% of occupied bins inside the 5-95% band",
                    gof.simulations,
                    100.0 * gof.coverage()
                ));
                report.files.extend([GOF_CSV, SUMMARY_JSON].map(|f| out.join(f)));
            }
            Job::Fetch => {
                let reports: Vec<FetchReport> = fetch_datasets(out)?;
                let entries: Vec<FetchEntry> = reports
                    .iter()
                    .map(|r| FetchEntry { dataset: r.dataset, file: r.dataset.file_name(), status: r.status })
                    .collect();
                for r in &reports {
                    report.notes.push(format!("{:<10} {:?}", r.dataset.name(), r.status));
                }
                write_json(&out.join(FETCH_JSON), &entries)?;
                report.files.push(out.join(FETCH_JSON));
            }
            Job::Summarize { draws, post } => {
                let chains = read_draws(&draws)?;
                let mut summary = summarize(&chains, post.burn_in)?;
                // no acceptance counts in a draws file
                for row in summary.chains.iter_mut().chain(std::iter::once(&mut summary.pooled)) {
                    row.acceptance = f64::NAN;
                }
                write_acf(&out.join(ACF_CSV), &acf_table(&chains, &post)?, chains[0].dim())?;
                let doc = PosteriorDocument {
                    command: "summarize",
                    terms: None,
                    seed: None,
                    posterior: &summary,
                    degeneracy: None,
                    wall_clock_seconds: start.elapsed().as_secs_f64(),
                };
                write_json(&out.join(SUMMARY_JSON), &doc)?;
                report.notes.push(pooled_note(&summary.pooled));
                report.files.extend([SUMMARY_JSON, ACF_CSV].map(|f| out.join(f)));
            }
        }
        Ok(())
    }
}

/// One line of `fetch.json`; `file` is relative to the data directory.
#[derive(Serialize)]
struct FetchEntry {
    dataset: Dataset,
    file: String,
    status: FetchStatus,
}

#[derive(Serialize)]
struct FitDocument {
    method: &'static str,
    terms: Vec<String>,
    theta0: Option<StatVector>,
    fit: FitResult,
}

#[derive(Serialize)]
struct SimulateSummary {
    command: &'static str,
    terms: Vec<String>,
    iterations: usize,
    final_density: f64,
    final_stats: Option<StatVector>,
    mean_stats: Vec<f64>,
    wall_clock_seconds: f64,
}

#[derive(Serialize)]
struct GofSummary {
    command: &'static str,
    simulations: usize,
    coverage: f64,
    wall_clock_seconds: f64,
}

#[derive(Serialize)]
struct PosteriorDocument<'a> {
    command: &'static str,
    terms: Option<Vec<String>>,
    seed: Option<u64>,
    posterior: &'a PosteriorSummary,
    degeneracy: Option<Vec<DegeneracyReport>>,
    wall_clock_seconds: f64,
}

fn column_means(rows: &[StatVector]) -> Vec<f64> {
    let d = rows.first().map_or(0, |r| r.len());
    (0..d)
        .map(|k| rows.iter().map(|r| r[k]).sum::<f64>() / rows.len() as f64)
        .collect()
}

fn fmt_vec(v: &[f64]) -> String {
    let parts: Vec<String> = v.iter().map(|x| format!("{x:.4}")).collect();
    format!("({})", parts.join(", "))
}

fn fit_note(label: &str, fit: &FitResult) -> String {
    let status = if fit.converged { "converged" } else { "NOT converged" };
    let mut s = format!("{label} {} {status}", fmt_vec(&fit.estimate));
    if let Some(se) = &fit.std_errors {
        s.push_str(&format!(", SE {}", fmt_vec(se)));
    }
    if let Some(msg) = &fit.message {
        s.push_str(&format!(" [{msg}]"));
    }
    s
}

fn pooled_note(p: &ChainSummary) -> String {
    format!("posterior mean {} sd {}", fmt_vec(&p.mean), fmt_vec(&p.sd))
}

/// Per-chain ACF of the retained draws, lags clamped to the chain length.
fn acf_table(chains: &[ChainOutput], post: &PosteriorOptions) -> Result<Vec<(usize, Vec<Vec<f64>>)>> {
    chains
        .iter()
        .map(|c| {
            let kept = ergm_core::diagnostics::retained_draws(c, post.burn_in);
            let lag = post.max_lag.min(kept.len().saturating_sub(1));
            let per_k = (0..c.dim())
                .map(|k| {
                    let series: Vec<f64> = kept.iter().map(|t| t[k]).collect();
                    autocorrelation(&series, lag)
                })
                .collect::<ergm_core::Result<Vec<_>>>()?;
            Ok((c.chain, per_k))
        })
        .collect()
}

#[allow(clippy::too_many_arguments)]
fn write_posterior(
    command: &'static str,
    input: &Input,
    chains: &[ChainOutput],
    post: &PosteriorOptions,
    seed: u64,
    start: Instant,
    out: &Path,
    report: &mut RunReport,
) -> Result<()> {
    let summary = summarize(chains, post.burn_in)?;
    let d = input.dim();
    write_draws(&out.join(DRAWS_CSV), chains)?;
    write_acf(&out.join(ACF_CSV), &acf_table(chains, post)?, d)?;
    report.files.extend([DRAWS_CSV, ACF_CSV].map(|f| out.join(f)));
    let degeneracy = if chains.iter().all(|c| c.aux_log.is_some()) {
        let logs: Vec<(usize, &[ergm_core::exchange::AuxRecord])> =
            chains.iter().map(|c| (c.chain, c.aux_log.as_deref().unwrap_or_default())).collect();
        write_aux(&out.join(AUX_CSV), &logs, &input.spec.term_names())?;
        report.files.push(out.join(AUX_CSV));
        let dyads = input.graph.dyad_count();
        Some(
            logs.iter()
                .map(|(_, log)| degeneracy_monitor(log, dyads, 0.05))
                .collect::<ergm_core::Result<Vec<_>>>()?,
        )
    } else {
        None
    };
    let doc = PosteriorDocument {
        command,
        terms: Some(input.spec.term_names()),
        seed: Some(seed),
        posterior: &summary,
        degeneracy,
        wall_clock_seconds: start.elapsed().as_secs_f64(),
    };
    write_json(&out.join(SUMMARY_JSON), &doc)?;
    report.files.push(out.join(SUMMARY_JSON));
    report.notes.push(pooled_note(&summary.pooled));
    report.notes.push(format!("acceptance {:.3}", summary.pooled.acceptance));
    Ok(())
}
