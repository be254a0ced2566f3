//! Artifact writers and readers.
//!
//! CSV files are UTF-8 with `\n` line endings and a header row. Parameter
//! values are written with 17 significant digits (`{:.16e}`), so reading a
//! file back recovers the exact doubles.

use std::fs;
use std::path::Path;

use ergm_core::exchange::AuxRecord;
use ergm_core::gof::GofReport;
use ergm_core::{ChainOutput, StatVector};
use serde::Serialize;

use crate::error::{CliError, Result};

pub const DRAWS_CSV: &str = "draws.csv";
pub const SUMMARY_JSON: &str = "summary.json";
pub const CONFIG_ECHO: &str = "config.txt";
pub const ACF_CSV: &str = "acf.csv";
pub const AUX_CSV: &str = "aux_stats.csv";
pub const GOF_CSV: &str = "gof.csv";
pub const FIT_JSON: &str = "fit.json";
pub const SURFACE_CSV: &str = "surface.csv";
pub const TRACE_CSV: &str = "trace.csv";
pub const GRAPH_EDGES: &str = "graph.edges";
pub const FETCH_JSON: &str = "fetch.json";

pub fn num(x: f64) -> String {
    format!("{x:.16e}")
}

pub fn theta_header(d: usize) -> impl Iterator<Item = String> {
    (1..=d).map(|k| format!("theta_{k}"))
}

fn writer(path: &Path) -> Result<csv::Writer<fs::File>> {
    csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_path(path)
        .map_err(|e| CliError::artifact(path, e))
}

fn write_rows<I, R>(path: &Path, header: Vec<String>, rows: I) -> Result<()>
where
    I: IntoIterator<Item = R>,
    R: IntoIterator<Item = String>,
{
    let mut w = writer(path)?;
    let fail = |e: csv::Error| CliError::artifact(path, e);
    w.write_record(&header).map_err(fail)?;
    for row in rows {
        w.write_record(row.into_iter().collect::<Vec<_>>()).map_err(fail)?;
    }
    w.flush().map_err(|e| CliError::io(path, e))
}

/// `chain,iteration,theta_1..theta_d`; warmup rows are left out and
/// `iteration` counts from the first iteration of the chain.
pub fn write_draws(path: &Path, chains: &[ChainOutput]) -> Result<()> {
    let d = chains.first().map_or(0, ChainOutput::dim);
    let header = ["chain".to_string(), "iteration".to_string()].into_iter().chain(theta_header(d)).collect();
    let rows = chains.iter().flat_map(|c| {
        c.draws.iter().enumerate().skip(c.warmup).map(move |(t, theta)| {
            [c.chain.to_string(), t.to_string()]
                .into_iter()
                .chain(theta.iter().map(|x| num(*x)))
                .collect::<Vec<_>>()
        })
    });
    write_rows(path, header, rows)
}

/// Reads a draws CSV back into chains (no acceptance counts, no warmup).
pub fn read_draws(path: &Path) -> Result<Vec<ChainOutput>> {
    let mut r = csv::Reader::from_path(path).map_err(|e| CliError::artifact(path, e))?;
    let header = r.headers().map_err(|e| CliError::artifact(path, e))?.clone();
    let expected: Vec<String> = ["chain".into(), "iteration".into()]
        .into_iter()
        .chain(theta_header(header.len().saturating_sub(2)))
        .collect();
    if header.len() < 3 || header.iter().ne(expected.iter().map(String::as_str)) {
        return Err(CliError::artifact(path, "header must be chain,iteration,theta_1..theta_d"));
    }
    let d = header.len() - 2;
    let mut chains: Vec<ChainOutput> = Vec::new();
    for (line, rec) in r.records().enumerate() {
        let rec = rec.map_err(|e| CliError::artifact(path, e))?;
        let bad = |what: &str| CliError::artifact(path, format!("row {}: bad {what}", line + 2));
        let chain: usize = rec[0].parse().map_err(|_| bad("chain"))?;
        rec[1].parse::<usize>().map_err(|_| bad("iteration"))?;
        let theta = (2..2 + d)
            .map(|k| rec[k].parse::<f64>().map_err(|_| bad("value")))
            .collect::<Result<Vec<f64>>>()?;
        match chains.iter_mut().find(|c| c.chain == chain) {
            Some(c) => c.draws.push(StatVector::new(theta)),
            None => chains.push(ChainOutput {
                chain,
                seed: 0,
                draws: vec![StatVector::new(theta)],
                warmup: 0,
                accepted: vec![0; d],
                proposed: vec![0; d],
                aux_log: None,
            }),
        }
    }
    if chains.is_empty() {
        return Err(CliError::artifact(path, "no draws"));
    }
    Ok(chains)
}

/// `chain,lag,theta_1..theta_d` for lags `0..=max_lag` of the retained draws.
pub fn write_acf(path: &Path, acf: &[(usize, Vec<Vec<f64>>)], d: usize) -> Result<()> {
    let header = ["chain".to_string(), "lag".to_string()].into_iter().chain(theta_header(d)).collect();
    let rows = acf.iter().flat_map(|(chain, per_k)| {
        let lags = per_k.first().map_or(0, Vec::len);
        (0..lags).map(move |lag| {
            [chain.to_string(), lag.to_string()]
                .into_iter()
                .chain(per_k.iter().map(|v| num(v[lag])))
                .collect::<Vec<_>>()
        })
    });
    write_rows(path, header, rows)
}

/// `chain,index,accepted,edges,s_<term>...`, one row per auxiliary draw.
pub fn write_aux(path: &Path, chains: &[(usize, &[AuxRecord])], terms: &[String]) -> Result<()> {
    let header = ["chain", "index", "accepted", "edges"]
        .into_iter()
        .map(String::from)
        .chain(terms.iter().map(|t| format!("s_{t}")))
        .collect();
    let rows = chains.iter().flat_map(|(chain, log)| {
        log.iter().enumerate().map(move |(k, rec)| {
            [chain.to_string(), k.to_string(), u8::from(rec.accepted).to_string(), rec.edges.to_string()]
                .into_iter()
                .chain(rec.stats.iter().map(|x| num(*x)))
                .collect::<Vec<_>>()
        })
    });
    write_rows(path, header, rows)
}

/// `family,bin,observed,p5,p50,p95`.
pub fn write_gof(path: &Path, report: &GofReport) -> Result<()> {
    let header = ["family", "bin", "observed", "p5", "p50", "p95"].map(String::from).to_vec();
    let rows = report.families.iter().flat_map(|f| {
        f.bins.iter().map(move |b| {
            vec![f.name.clone(), b.label.clone(), num(b.observed), num(b.p5), num(b.p50), num(b.p95)]
        })
    });
    write_rows(path, header, rows)
}

/// `step,<term names>`.
pub fn write_trace(path: &Path, terms: &[String], every: usize, trace: &[StatVector]) -> Result<()> {
    let header = std::iter::once("step".to_string()).chain(terms.iter().cloned()).collect();
    let rows = trace.iter().enumerate().map(|(k, s)| {
        std::iter::once(((k + 1) * every).to_string())
            .chain(s.iter().map(|x| num(*x)))
            .collect::<Vec<_>>()
    });
    write_rows(path, header, rows)
}

/// `t,theta_1..theta_d,log_ratio` along `theta(t) = t * direction`.
pub fn write_surface(path: &Path, ts: &[f64], surface: &[(StatVector, f64)]) -> Result<()> {
    let d = surface.first().map_or(0, |(t, _)| t.len());
    let header = std::iter::once("t".to_string())
        .chain(theta_header(d))
        .chain(std::iter::once("log_ratio".to_string()))
        .collect();
    let rows = ts.iter().zip(surface).map(|(t, (theta, v))| {
        std::iter::once(num(*t))
            .chain(theta.iter().map(|x| num(*x)))
            .chain(std::iter::once(num(*v)))
            .collect::<Vec<_>>()
    });
    write_rows(path, header, rows)
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value).map_err(|e| CliError::artifact(path, e))?;
    text.push('\n');
    fs::write(path, text).map_err(|e| CliError::io(path, e))
}

/// Resolved config as `key = value` lines, with the derived RNG streams as
/// trailing comments. The file is itself a valid config.
pub fn write_echo(path: &Path, command: &str, echo: &[(String, String)], streams: &[(String, u64)]) -> Result<()> {
    let mut text = format!("# ergm {command}\n");
    for (k, v) in echo {
        text.push_str(&format!("{k} = {v}\n"));
    }
    if !streams.is_empty() {
        text.push_str("# derived RNG streams (ChaCha8 keyed by seed, stream id):\n");
        for (name, id) in streams {
            text.push_str(&format!("#   {name}: {id:#018x}\n"));
        }
    }
    fs::write(path, text).map_err(|e| CliError::io(path, e))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn chain(id: usize, warmup: usize, rows: &[[f64; 2]]) -> ChainOutput {
        ChainOutput {
            chain: id,
            seed: 0,
            draws: rows.iter().map(|r| StatVector::new(r.to_vec())).collect(),
            warmup,
            accepted: vec![0; 2],
            proposed: vec![0; 2],
            aux_log: None,
        }
    }

    #[test]
    fn draws_round_trip_exactly() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join(DRAWS_CSV);
        let third = 1.0 / 3.0;
        let chains = [chain(0, 1, &[[9.0, 9.0], [third, -2.5e-300]]), chain(1, 0, &[[0.1, 1e10]])];
        write_draws(&path, &chains).unwrap();
        let text = fs::read_to_string(&path).unwrap();
        assert!(text.starts_with("chain,iteration,theta_1,theta_2\n0,1,3.3333333333333331e-1,"));
        assert!(!text.contains('\r'));
        let back = read_draws(&path).unwrap();
        assert_eq!(back.len(), 2);
        assert_eq!(back[0].draws, vec![StatVector::new(vec![third, -2.5e-300])]);
        assert_eq!(back[1].draws[0][1], 1e10);
    }

    #[test]
    fn bad_draw_files_are_rejected() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("d.csv");
        fs::write(&path, "chain,iter,theta_1\n0,0,1\n").unwrap();
        assert!(read_draws(&path).is_err());
        fs::write(&path, "chain,iteration,theta_1\n0,0,x\n").unwrap();
        assert!(read_draws(&path).is_err());
        fs::write(&path, "chain,iteration,theta_1\n").unwrap();
        assert!(read_draws(&path).is_err());
    }
}
