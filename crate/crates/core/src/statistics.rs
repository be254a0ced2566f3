//! Sufficient statistics, change statistics and model specifications.

use std::fmt;
use std::ops::{Deref, DerefMut};
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{ErgmError, Result};
use crate::graph::{and_count, Dyad, Graph};

/// A real vector indexed like the terms of a [`ModelSpec`]. Used both for
/// statistics `s(y)` and for parameters `theta`.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct StatVector(Vec<f64>);

impl StatVector {
    pub fn new(values: Vec<f64>) -> Self {
        StatVector(values)
    }

    pub fn zeros(d: usize) -> Self {
        StatVector(vec![0.0; d])
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn into_vec(self) -> Vec<f64> {
        self.0
    }

    pub fn dot(&self, other: &[f64]) -> f64 {
        dot(&self.0, other)
    }

    pub fn sub(&self, other: &[f64]) -> StatVector {
        StatVector(self.0.iter().zip(other).map(|(a, b)| a - b).collect())
    }

    pub fn add(&self, other: &[f64]) -> StatVector {
        StatVector(self.0.iter().zip(other).map(|(a, b)| a + b).collect())
    }

    pub fn is_finite(&self) -> bool {
        self.0.iter().all(|v| v.is_finite())
    }
}

impl Deref for StatVector {
    type Target = [f64];

    fn deref(&self) -> &[f64] {
        &self.0
    }
}

impl DerefMut for StatVector {
    fn deref_mut(&mut self) -> &mut [f64] {
        &mut self.0
    }
}

impl From<Vec<f64>> for StatVector {
    fn from(v: Vec<f64>) -> Self {
        StatVector(v)
    }
}

impl<const N: usize> From<[f64; N]> for StatVector {
    fn from(v: [f64; N]) -> Self {
        StatVector(v.to_vec())
    }
}

#[inline]
pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// One sufficient-statistic term. Decay parameters of the geometrically
/// weighted terms are fixed constants.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub enum Term {
    Edges,
    TwoStars,
    ThreeStars,
    Triangles,
    Mutual,
    CyclicTriples,
    GwDegree(f64),
    Gwesp(f64),
}

impl Term {
    pub fn allows_directed(&self) -> bool {
        matches!(self, Term::Edges | Term::Mutual | Term::CyclicTriples)
    }

    pub fn allows_undirected(&self) -> bool {
        !matches!(self, Term::Mutual | Term::CyclicTriples)
    }
}

impl fmt::Display for Term {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Term::Edges => f.write_str("edges"),
            Term::TwoStars => f.write_str("kstar2"),
            Term::ThreeStars => f.write_str("kstar3"),
            Term::Triangles => f.write_str("triangle"),
            Term::Mutual => f.write_str("mutual"),
            Term::CyclicTriples => f.write_str("ctriple"),
            Term::GwDegree(phi) => write!(f, "gwdegree({phi})"),
            Term::Gwesp(phi) => write!(f, "gwesp({phi})"),
        }
    }
}

impl FromStr for Term {
    type Err = ErgmError;

    fn from_str(s: &str) -> Result<Self> {
        let t = s.trim().to_ascii_lowercase();
        let decay = |prefix: &str| -> Option<Result<f64>> {
            let rest = t.strip_prefix(prefix)?.trim();
            let inner = rest.strip_prefix('(')?.strip_suffix(')')?;
            Some(
                inner
                    .trim()
                    .parse::<f64>()
                    .ok()
                    .filter(|phi| phi.is_finite() && *phi >= 0.0)
                    .ok_or_else(|| ErgmError::UnknownTerm(s.trim().to_string())),
            )
        };
        let term = match t.as_str() {
            "edges" => Term::Edges,
            "kstar2" => Term::TwoStars,
            "kstar3" => Term::ThreeStars,
            "triangle" => Term::Triangles,
            "mutual" => Term::Mutual,
            "ctriple" => Term::CyclicTriples,
            _ => {
                if let Some(phi) = decay("gwdegree") {
                    Term::GwDegree(phi?)
                } else if let Some(phi) = decay("gwesp") {
                    Term::Gwesp(phi?)
                } else {
                    return Err(ErgmError::UnknownTerm(s.trim().to_string()));
                }
            }
        };
        Ok(term)
    }
}

/// Ordered list of terms defining `s(y)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ModelSpec {
    terms: Vec<Term>,
    directed: bool,
}

impl ModelSpec {
    pub fn new(terms: Vec<Term>, directed: bool) -> Result<Self> {
        if terms.is_empty() {
            return Err(ErgmError::config("a model needs at least one term"));
        }
        for t in &terms {
            let ok = if directed {
                t.allows_directed()
            } else {
                t.allows_undirected()
            };
            if !ok {
                return Err(ErgmError::IncompatibleTerm {
                    term: t.to_string(),
                    kind: kind(directed),
                });
            }
            if let Term::GwDegree(phi) | Term::Gwesp(phi) = t {
                if !(phi.is_finite() && *phi >= 0.0) {
                    return Err(ErgmError::config(format!("decay must be >= 0 in {t}")));
                }
            }
        }
        Ok(ModelSpec { terms, directed })
    }

    /// Parses a list such as `"edges + kstar2"` or `"edges, gwesp(0.8)"`.
    pub fn parse(list: &str, directed: bool) -> Result<Self> {
        let terms = list
            .split(['+', ',', ';'])
            .map(str::trim)
            .filter(|s| !s.is_empty())
            .map(str::parse)
            .collect::<Result<Vec<Term>>>()?;
        ModelSpec::new(terms, directed)
    }

    pub fn terms(&self) -> &[Term] {
        &self.terms
    }

    pub fn dim(&self) -> usize {
        self.terms.len()
    }

    pub fn is_directed(&self) -> bool {
        self.directed
    }

    pub fn term_names(&self) -> Vec<String> {
        self.terms.iter().map(Term::to_string).collect()
    }

    pub fn check_graph(&self, g: &Graph) -> Result<()> {
        if g.is_directed() != self.directed {
            return Err(ErgmError::DirectednessMismatch {
                model: kind(self.directed),
                graph: kind(g.is_directed()),
            });
        }
        Ok(())
    }

    pub fn check_dim(&self, v: &[f64]) -> Result<()> {
        if v.len() != self.dim() {
            return Err(ErgmError::Dimension {
                expected: self.dim(),
                got: v.len(),
            });
        }
        Ok(())
    }

    /// Precomputes decay powers for graphs with `n` nodes.
    pub fn evaluator(&self, n: usize) -> StatEvaluator {
        StatEvaluator::new(self, n)
    }
}

impl fmt::Display for ModelSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.term_names().join(" + "))
    }
}

fn kind(directed: bool) -> &'static str {
    if directed {
        "directed"
    } else {
        "undirected"
    }
}

pub fn global_stats(g: &Graph, spec: &ModelSpec) -> Result<StatVector> {
    spec.check_graph(g)?;
    Ok(spec.evaluator(g.n()).global(g))
}

/// `s(y with d present) - s(y with d absent)`, computed locally.
pub fn change_stats(g: &Graph, d: Dyad, spec: &ModelSpec) -> Result<StatVector> {
    spec.check_graph(g)?;
    let d = g.dyad(d.i(), d.j())?;
    let mut out = StatVector::zeros(spec.dim());
    spec.evaluator(g.n()).change_into(g, d.i(), d.j(), &mut out);
    Ok(out)
}

/// `P(y_ij = 1 | rest) = logistic(theta . delta)`.
pub fn conditional_edge_probability(theta: &[f64], delta: &[f64]) -> f64 {
    logistic(dot(theta, delta))
}

#[inline]
pub fn logistic(x: f64) -> f64 {
    if x >= 0.0 {
        1.0 / (1.0 + (-x).exp())
    } else {
        let e = x.exp();
        e / (1.0 + e)
    }
}

/// `log(1 + exp(x))` without overflow.
#[inline]
pub fn log1p_exp(x: f64) -> f64 {
    if x > 0.0 {
        x + (-x).exp().ln_1p()
    } else {
        x.exp().ln_1p()
    }
}

#[derive(Clone, Debug)]
enum Kernel {
    Edges,
    TwoStars,
    ThreeStars,
    Triangles,
    Mutual,
    CyclicTriples,
    // weights[k] = e^phi (1 - r^k), powers[k] = r^k with r = 1 - e^-phi
    GwDegree { weights: Vec<f64>, powers: Vec<f64> },
    Gwesp { weights: Vec<f64>, powers: Vec<f64> },
}

/// Statistic evaluator for one model and graph order.
#[derive(Clone, Debug)]
pub struct StatEvaluator {
    kernels: Vec<Kernel>,
}

fn gw_tables(phi: f64, n: usize) -> (Vec<f64>, Vec<f64>) {
    let r = 1.0 - (-phi).exp();
    let scale = phi.exp();
    let len = n + 1;
    let powers: Vec<f64> = (0..len).map(|k| r.powi(k as i32)).collect();
    let weights = powers.iter().map(|p| scale * (1.0 - p)).collect();
    (weights, powers)
}

#[inline]
fn choose2(k: u64) -> u64 {
    k * k.saturating_sub(1) / 2
}

#[inline]
fn choose3(k: u64) -> u64 {
    if k < 3 {
        0
    } else {
        k * (k - 1) * (k - 2) / 6
    }
}

impl StatEvaluator {
    fn new(spec: &ModelSpec, n: usize) -> Self {
        let kernels = spec
            .terms
            .iter()
            .map(|t| match *t {
                Term::Edges => Kernel::Edges,
                Term::TwoStars => Kernel::TwoStars,
                Term::ThreeStars => Kernel::ThreeStars,
                Term::Triangles => Kernel::Triangles,
                Term::Mutual => Kernel::Mutual,
                Term::CyclicTriples => Kernel::CyclicTriples,
                Term::GwDegree(phi) => {
                    let (weights, powers) = gw_tables(phi, n);
                    Kernel::GwDegree { weights, powers }
                }
                Term::Gwesp(phi) => {
                    let (weights, powers) = gw_tables(phi, n);
                    Kernel::Gwesp { weights, powers }
                }
            })
            .collect();
        StatEvaluator { kernels }
    }

    pub fn dim(&self) -> usize {
        self.kernels.len()
    }

    /// Full statistic vector; the graph's directedness must match the model.
    pub fn global(&self, g: &Graph) -> StatVector {
        let n = g.n();
        let mut out = Vec::with_capacity(self.kernels.len());
        for k in &self.kernels {
            let v = match k {
                Kernel::Edges => g.edge_count() as f64,
                Kernel::TwoStars => (0..n).map(|i| choose2(g.degree(i) as u64)).sum::<u64>() as f64,
                Kernel::ThreeStars => (0..n).map(|i| choose3(g.degree(i) as u64)).sum::<u64>() as f64,
                Kernel::Triangles => {
                    let mut t = 0u64;
                    for e in g.edges() {
                        t += g.shared_partners(e.i(), e.j()) as u64;
                    }
                    (t / 3) as f64
                }
                Kernel::Mutual => {
                    let mut m = 0u64;
                    for e in g.edges() {
                        if e.i() < e.j() && g.has_edge(e.j(), e.i()) {
                            m += 1;
                        }
                    }
                    m as f64
                }
                Kernel::CyclicTriples => {
                    // each 3-cycle is found once per edge on it
                    let mut c = 0u64;
                    for e in g.edges() {
                        c += and_count(g.out_row(e.j()), g.in_row(e.i())) as u64;
                    }
                    (c / 3) as f64
                }
                Kernel::GwDegree { weights, .. } => (0..n).map(|i| weights[g.degree(i)]).sum(),
                Kernel::Gwesp { weights, .. } => g
                    .edges()
                    .map(|e| weights[g.shared_partners(e.i(), e.j())])
                    .sum(),
            };
            out.push(v);
        }
        StatVector(out)
    }

    /// Writes the change statistic of dyad `(i, j)` into `out`. Indices must
    /// be valid for `g` and directedness must match the model.
    pub fn change_into(&self, g: &Graph, i: usize, j: usize, out: &mut [f64]) {
        let present = g.has_edge(i, j);
        let on = u64::from(present);
        for (k, slot) in self.kernels.iter().zip(out.iter_mut()) {
            *slot = match k {
                Kernel::Edges => 1.0,
                Kernel::TwoStars => {
                    (g.degree(i) as u64 - on + g.degree(j) as u64 - on) as f64
                }
                Kernel::ThreeStars => {
                    (choose2(g.degree(i) as u64 - on) + choose2(g.degree(j) as u64 - on)) as f64
                }
                Kernel::Triangles => g.shared_partners(i, j) as f64,
                Kernel::Mutual => f64::from(u8::from(g.has_edge(j, i))),
                // new cycles i -> j -> k -> i
                Kernel::CyclicTriples => and_count(g.out_row(j), g.in_row(i)) as f64,
                Kernel::GwDegree { powers, .. } => {
                    powers[g.degree(i) - on as usize] + powers[g.degree(j) - on as usize]
                }
                Kernel::Gwesp { weights, powers } => {
                    let on = on as usize;
                    let mut v = weights[g.shared_partners(i, j)];
                    let (ri, rj) = (g.out_row(i), g.out_row(j));
                    for (w, (a, b)) in ri.iter().zip(rj).enumerate() {
                        let mut common = a & b;
                        while common != 0 {
                            let k = w * 64 + common.trailing_zeros() as usize;
                            common &= common - 1;
                            v += powers[g.shared_partners(i, k) - on];
                            v += powers[g.shared_partners(j, k) - on];
                        }
                    }
                    v
                }
            };
        }
    }
}
