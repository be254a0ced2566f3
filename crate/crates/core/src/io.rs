//! Edge-list files and the adjacency-matrix CSV converter.
//!
//! An edge list starts with a header line `<n> directed|undirected`, then one
//! dyad per line as two whitespace-separated 0-based node indices. Blank
//! lines and `#` comments are ignored. Undirected files list each edge once.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use crate::error::{ErgmError, Result};
use crate::graph::Graph;

fn parse_err(path: &str, line: usize, msg: impl Into<String>) -> ErgmError {
    ErgmError::Parse {
        path: path.to_string(),
        line,
        msg: msg.into(),
    }
}

/// Parses edge-list text; `source` names the input in error messages.
pub fn parse_edge_list(text: &str, source: &str) -> Result<Graph> {
    let mut lines = text
        .lines()
        .enumerate()
        .map(|(k, l)| (k + 1, l.split('#').next().unwrap_or("").trim()))
        .filter(|(_, l)| !l.is_empty());
    let (hline, header) = lines
        .next()
        .ok_or_else(|| parse_err(source, 1, "missing header `<n> directed|undirected`"))?;
    let mut fields = header.split_whitespace();
    let bad_header = || parse_err(source, hline, format!("malformed header `{header}`"));
    let n: usize = fields.next().and_then(|f| f.parse().ok()).ok_or_else(bad_header)?;
    let directed = match fields.next() {
        Some("directed") => true,
        Some("undirected") => false,
        _ => return Err(bad_header()),
    };
    if fields.next().is_some() || n == 0 {
        return Err(bad_header());
    }
    let mut g = Graph::new(n, directed).map_err(|e| parse_err(source, hline, e.to_string()))?;
    for (lineno, line) in lines {
        let mut f = line.split_whitespace();
        let (Some(a), Some(b), None) = (f.next(), f.next(), f.next()) else {
            return Err(parse_err(source, lineno, format!("expected two node indices, got `{line}`")));
        };
        let index = |s: &str| -> Result<usize> {
            let v: usize = s
                .parse()
                .map_err(|_| parse_err(source, lineno, format!("`{s}` is not a node index")))?;
            if v >= n {
                return Err(parse_err(source, lineno, format!("node index {v} out of range (n = {n})")));
            }
            Ok(v)
        };
        let (i, j) = (index(a)?, index(b)?);
        if i == j {
            return Err(parse_err(source, lineno, format!("self-loop at node {i}")));
        }
        if g.has_edge(i, j) {
            return Err(parse_err(source, lineno, format!("duplicate edge {i} {j}")));
        }
        g.toggle(g.dyad(i, j)?)?;
    }
    Ok(g)
}

pub fn load_graph(path: impl AsRef<Path>) -> Result<Graph> {
    let path = path.as_ref();
    parse_edge_list(&fs::read_to_string(path)?, &path.display().to_string())
}

/// Canonical edge-list text: header, then edges in row-major order.
pub fn format_edge_list(g: &Graph) -> String {
    let mut out = format!(
        "{} {}\n",
        g.n(),
        if g.is_directed() { "directed" } else { "undirected" }
    );
    for d in g.edges() {
        writeln!(out, "{} {}", d.i(), d.j()).expect("writing to a String");
    }
    out
}

pub fn save_graph(g: &Graph, path: impl AsRef<Path>) -> Result<()> {
    fs::write(path, format_edge_list(g))?;
    Ok(())
}

/// Reads a square 0/1 adjacency matrix, comma or whitespace separated. For
/// undirected graphs the matrix must be symmetric.
pub fn parse_adjacency_csv(text: &str, directed: bool, source: &str) -> Result<Graph> {
    let rows: Vec<(usize, Vec<&str>)> = text
        .lines()
        .enumerate()
        .map(|(k, l)| (k + 1, l.trim()))
        .filter(|(_, l)| !l.is_empty() && !l.starts_with('#'))
        .map(|(k, l)| (k, l.split(|c: char| c == ',' || c.is_whitespace()).filter(|s| !s.is_empty()).collect()))
        .collect();
    let n = rows.len();
    if n == 0 {
        return Err(parse_err(source, 1, "empty adjacency matrix"));
    }
    let mut g = Graph::new(n, directed).map_err(|e| parse_err(source, 1, e.to_string()))?;
    let mut cells = vec![false; n * n];
    for (i, (lineno, row)) in rows.iter().enumerate() {
        if row.len() != n {
            return Err(parse_err(source, *lineno, format!("expected {n} entries, got {}", row.len())));
        }
        for (j, cell) in row.iter().enumerate() {
            cells[i * n + j] = match *cell {
                "0" => false,
                "1" => true,
                other => return Err(parse_err(source, *lineno, format!("entry `{other}` is not 0 or 1"))),
            };
            if i == j && cells[i * n + j] {
                return Err(parse_err(source, *lineno, format!("self-loop at node {i}")));
            }
        }
    }
    for i in 0..n {
        for j in 0..n {
            if i == j || !cells[i * n + j] {
                continue;
            }
            if !directed {
                if !cells[j * n + i] {
                    return Err(parse_err(source, rows[i].0, format!("matrix is not symmetric at ({i}, {j})")));
                }
                if j < i {
                    continue;
                }
            }
            g.toggle(g.dyad(i, j)?)?;
        }
    }
    Ok(g)
}

pub fn load_adjacency_csv(path: impl AsRef<Path>, directed: bool) -> Result<Graph> {
    let path = path.as_ref();
    parse_adjacency_csv(&fs::read_to_string(path)?, directed, &path.display().to_string())
}
