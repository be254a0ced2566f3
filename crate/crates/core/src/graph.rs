//! Dense simple graphs with O(1) toggles.
//!
//! Adjacency is stored as one bit row per node (plus a transposed copy for
//! directed graphs), so membership, degree and shared-partner queries are a
//! handful of word operations. The graph also keeps every dyad in a single
//! permutation whose first `edge_count` entries are the present edges; this
//! lets the tie/no-tie sampler draw a uniform edge or a uniform empty dyad in
//! constant time.

use std::collections::VecDeque;

use crate::error::{ErgmError, Result};

/// An ordered node pair `(i, j)` with `i != j`.
///
/// For undirected graphs `(i, j)` and `(j, i)` name the same dyad; use
/// [`Dyad::canonical`] when a unique form is needed.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Dyad {
    i: usize,
    j: usize,
}

impl Dyad {
    pub fn new(i: usize, j: usize) -> Result<Self> {
        if i == j {
            return Err(ErgmError::SelfLoop(i));
        }
        Ok(Dyad { i, j })
    }

    #[inline]
    pub(crate) fn new_unchecked(i: usize, j: usize) -> Self {
        debug_assert_ne!(i, j);
        Dyad { i, j }
    }

    #[inline]
    pub fn i(&self) -> usize {
        self.i
    }

    #[inline]
    pub fn j(&self) -> usize {
        self.j
    }

    /// `(min, max)` form used for undirected graphs.
    #[inline]
    pub fn canonical(self) -> Self {
        if self.i < self.j {
            self
        } else {
            Dyad {
                i: self.j,
                j: self.i,
            }
        }
    }

    pub fn reversed(self) -> Self {
        Dyad {
            i: self.j,
            j: self.i,
        }
    }
}

/// Counts of node pairs by shortest-path length.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Geodesics {
    /// `by_length[l - 1]` is the number of pairs at distance `l`, for
    /// `l = 1..n-1`.
    pub by_length: Vec<usize>,
    /// Pairs with no connecting path.
    pub unreachable: usize,
}

impl Geodesics {
    pub fn total_pairs(&self) -> usize {
        self.by_length.iter().sum::<usize>() + self.unreachable
    }
}

#[derive(Debug)]
pub struct Graph {
    n: usize,
    directed: bool,
    words: usize,
    out_rows: Vec<u64>,
    // transposed adjacency, directed graphs only
    in_rows: Vec<u64>,
    out_deg: Vec<u32>,
    in_deg: Vec<u32>,
    edge_count: usize,
    // all dyad codes (i * n + j); order[..edge_count] are edges
    order: Vec<u32>,
    // slot[code] = position of code in `order`
    slot: Vec<u32>,
}

impl Clone for Graph {
    fn clone(&self) -> Self {
        Graph {
            n: self.n,
            directed: self.directed,
            words: self.words,
            out_rows: self.out_rows.clone(),
            in_rows: self.in_rows.clone(),
            out_deg: self.out_deg.clone(),
            in_deg: self.in_deg.clone(),
            edge_count: self.edge_count,
            order: self.order.clone(),
            slot: self.slot.clone(),
        }
    }

    // The samplers reset a scratch graph to the observed network once per
    // auxiliary draw; reuse the allocations.
    fn clone_from(&mut self, src: &Self) {
        self.n = src.n;
        self.directed = src.directed;
        self.words = src.words;
        self.out_rows.clone_from(&src.out_rows);
        self.in_rows.clone_from(&src.in_rows);
        self.out_deg.clone_from(&src.out_deg);
        self.in_deg.clone_from(&src.in_deg);
        self.edge_count = src.edge_count;
        self.order.clone_from(&src.order);
        self.slot.clone_from(&src.slot);
    }
}

impl PartialEq for Graph {
    fn eq(&self, other: &Self) -> bool {
        self.n == other.n && self.directed == other.directed && self.out_rows == other.out_rows
    }
}

impl Eq for Graph {}

impl Graph {
    pub fn new(n: usize, directed: bool) -> Result<Self> {
        if n == 0 {
            return Err(ErgmError::EmptyGraph);
        }
        if n > u16::MAX as usize {
            return Err(ErgmError::config(format!(
                "graphs are limited to {} nodes",
                u16::MAX
            )));
        }
        let words = n.div_ceil(64);
        let mut order = Vec::new();
        let mut slot = vec![u32::MAX; n * n];
        for i in 0..n {
            let start = if directed { 0 } else { i + 1 };
            for j in start..n {
                if i != j {
                    let code = (i * n + j) as u32;
                    slot[code as usize] = order.len() as u32;
                    order.push(code);
                }
            }
        }
        Ok(Graph {
            n,
            directed,
            words,
            out_rows: vec![0; n * words],
            in_rows: if directed { vec![0; n * words] } else { Vec::new() },
            out_deg: vec![0; n],
            in_deg: if directed { vec![0; n] } else { Vec::new() },
            edge_count: 0,
            order,
            slot,
        })
    }

    pub fn from_edges<I>(n: usize, directed: bool, edges: I) -> Result<Self>
    where
        I: IntoIterator<Item = (usize, usize)>,
    {
        let mut g = Graph::new(n, directed)?;
        for (i, j) in edges {
            let d = g.dyad(i, j)?;
            if !g.has_edge(d.i, d.j) {
                g.flip(d.i, d.j);
            }
        }
        Ok(g)
    }

    pub fn complete(n: usize, directed: bool) -> Result<Self> {
        let mut g = Graph::new(n, directed)?;
        for k in 0..g.dyad_count() {
            let d = g.dyad_at(k);
            if !g.has_edge(d.i, d.j) {
                g.flip(d.i, d.j);
            }
        }
        Ok(g)
    }

    /// Validates indices and builds a dyad for this graph.
    pub fn dyad(&self, i: usize, j: usize) -> Result<Dyad> {
        for index in [i, j] {
            if index >= self.n {
                return Err(ErgmError::NodeOutOfRange { index, n: self.n });
            }
        }
        Dyad::new(i, j)
    }

    #[inline]
    pub fn n(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn is_directed(&self) -> bool {
        self.directed
    }

    #[inline]
    pub fn edge_count(&self) -> usize {
        self.edge_count
    }

    /// Number of dyads: `n(n-1)/2` undirected, `n(n-1)` directed.
    #[inline]
    pub fn dyad_count(&self) -> usize {
        self.order.len()
    }

    pub fn density(&self) -> f64 {
        if self.dyad_count() == 0 {
            0.0
        } else {
            self.edge_count as f64 / self.dyad_count() as f64
        }
    }

    #[inline]
    fn bit(rows: &[u64], words: usize, i: usize, j: usize) -> bool {
        rows[i * words + j / 64] >> (j % 64) & 1 == 1
    }

    #[inline]
    pub fn has_edge(&self, i: usize, j: usize) -> bool {
        Self::bit(&self.out_rows, self.words, i, j)
    }

    /// Flips dyad `(i, j)` and returns whether it is now an edge.
    pub fn toggle(&mut self, d: Dyad) -> Result<bool> {
        let d = self.dyad(d.i, d.j)?;
        Ok(self.flip(d.i, d.j))
    }

    #[inline]
    fn code(&self, i: usize, j: usize) -> usize {
        if self.directed || i < j {
            i * self.n + j
        } else {
            j * self.n + i
        }
    }

    #[inline]
    pub(crate) fn flip(&mut self, i: usize, j: usize) -> bool {
        let w = self.words;
        let (wi, bi) = (j / 64, 1u64 << (j % 64));
        let (wj, bj) = (i / 64, 1u64 << (i % 64));
        self.out_rows[i * w + wi] ^= bi;
        let now = self.out_rows[i * w + wi] & bi != 0;
        if self.directed {
            self.in_rows[j * w + wj] ^= bj;
        } else {
            self.out_rows[j * w + wj] ^= bj;
        }

        let code = self.code(i, j);
        let pos = self.slot[code] as usize;
        if now {
            // move code into the edge block
            let target = self.edge_count;
            self.swap_slots(pos, target);
            self.edge_count += 1;
            self.out_deg[i] += 1;
            if self.directed {
                self.in_deg[j] += 1;
            } else {
                self.out_deg[j] += 1;
            }
        } else {
            let target = self.edge_count - 1;
            self.swap_slots(pos, target);
            self.edge_count -= 1;
            self.out_deg[i] -= 1;
            if self.directed {
                self.in_deg[j] -= 1;
            } else {
                self.out_deg[j] -= 1;
            }
        }
        now
    }

    #[inline]
    fn swap_slots(&mut self, a: usize, b: usize) {
        if a == b {
            return;
        }
        let (ca, cb) = (self.order[a], self.order[b]);
        self.order.swap(a, b);
        self.slot[ca as usize] = b as u32;
        self.slot[cb as usize] = a as u32;
    }

    #[inline]
    fn decode(&self, code: u32) -> Dyad {
        let code = code as usize;
        Dyad::new_unchecked(code / self.n, code % self.n)
    }

    /// The `k`-th dyad of the internal permutation (`k < dyad_count`).
    #[inline]
    pub fn dyad_at(&self, k: usize) -> Dyad {
        self.decode(self.order[k])
    }

    /// The `k`-th present edge (`k < edge_count`), in no particular order.
    #[inline]
    pub fn edge_at(&self, k: usize) -> Dyad {
        debug_assert!(k < self.edge_count);
        self.decode(self.order[k])
    }

    /// The `k`-th empty dyad (`k < dyad_count - edge_count`).
    #[inline]
    pub fn empty_dyad_at(&self, k: usize) -> Dyad {
        debug_assert!(self.edge_count + k < self.order.len());
        self.decode(self.order[self.edge_count + k])
    }

    /// Undirected degree; for directed graphs the total degree.
    #[inline]
    pub fn degree(&self, i: usize) -> usize {
        if self.directed {
            (self.out_deg[i] + self.in_deg[i]) as usize
        } else {
            self.out_deg[i] as usize
        }
    }

    #[inline]
    pub fn out_degree(&self, i: usize) -> usize {
        self.out_deg[i] as usize
    }

    #[inline]
    pub fn in_degree(&self, i: usize) -> usize {
        if self.directed {
            self.in_deg[i] as usize
        } else {
            self.out_deg[i] as usize
        }
    }

    /// Bit row of out-neighbours of `i` (neighbours, if undirected).
    #[inline]
    pub fn out_row(&self, i: usize) -> &[u64] {
        &self.out_rows[i * self.words..(i + 1) * self.words]
    }

    /// Bit row of in-neighbours of `i` (neighbours, if undirected).
    #[inline]
    pub fn in_row(&self, i: usize) -> &[u64] {
        if self.directed {
            &self.in_rows[i * self.words..(i + 1) * self.words]
        } else {
            self.out_row(i)
        }
    }

    pub fn out_neighbors(&self, i: usize) -> impl Iterator<Item = usize> + '_ {
        BitIter::new(self.out_row(i))
    }

    pub fn in_neighbors(&self, i: usize) -> impl Iterator<Item = usize> + '_ {
        BitIter::new(self.in_row(i))
    }

    /// All dyads in row-major canonical order, independent of the graph state.
    pub fn dyads(&self) -> impl Iterator<Item = Dyad> {
        let (n, directed) = (self.n, self.directed);
        (0..n).flat_map(move |i| {
            (0..n)
                .filter(move |&j| j != i && (directed || i < j))
                .map(move |j| Dyad::new_unchecked(i, j))
        })
    }

    /// Present edges in canonical order (`i < j` when undirected).
    pub fn edges(&self) -> impl Iterator<Item = Dyad> + '_ {
        (0..self.n).flat_map(move |i| {
            self.out_neighbors(i)
                .filter(move |&j| self.directed || i < j)
                .map(move |j| Dyad::new_unchecked(i, j))
        })
    }

    /// Number of common neighbours of `i` and `j`. Directed graphs use the
    /// underlying undirected (weak) neighbourhoods.
    pub fn shared_partner_count(&self, d: Dyad) -> Result<usize> {
        let d = self.dyad(d.i, d.j)?;
        Ok(self.shared_partners(d.i, d.j))
    }

    #[inline]
    pub(crate) fn shared_partners(&self, i: usize, j: usize) -> usize {
        if self.directed {
            let (oi, ii, oj, ij) = (self.out_row(i), self.in_row(i), self.out_row(j), self.in_row(j));
            (0..self.words)
                .map(|w| ((oi[w] | ii[w]) & (oj[w] | ij[w])).count_ones() as usize)
                .sum()
        } else {
            and_count(self.out_row(i), self.out_row(j))
        }
    }

    /// `hist[k]` = number of nodes with degree exactly `k`, `k = 0..n-1`.
    pub fn degree_histogram(&self) -> Result<Vec<usize>> {
        if self.directed {
            return Err(ErgmError::RequiresUndirected {
                op: "degree_histogram",
            });
        }
        Ok(histogram(self.n, (0..self.n).map(|i| self.out_deg[i] as usize)))
    }

    pub fn in_degree_histogram(&self) -> Vec<usize> {
        histogram(self.n, (0..self.n).map(|i| self.in_degree(i)))
    }

    pub fn out_degree_histogram(&self) -> Vec<usize> {
        histogram(self.n, (0..self.n).map(|i| self.out_degree(i)))
    }

    /// `hist[k]` = number of edges whose endpoints share exactly `k`
    /// partners, `k = 0..n-2`.
    pub fn esp_histogram(&self) -> Result<Vec<usize>> {
        if self.directed {
            return Err(ErgmError::RequiresUndirected {
                op: "esp_histogram",
            });
        }
        Ok(self.weak_esp_histogram())
    }

    /// Edgewise shared partners on the underlying undirected graph; equals
    /// [`Graph::esp_histogram`] for undirected graphs.
    pub fn weak_esp_histogram(&self) -> Vec<usize> {
        let mut hist = vec![0; self.n.saturating_sub(1)];
        for i in 0..self.n {
            for j in (i + 1)..self.n {
                if self.has_edge(i, j) || (self.directed && self.has_edge(j, i)) {
                    hist[self.shared_partners(i, j)] += 1;
                }
            }
        }
        hist
    }

    /// Shortest-path length distribution over unordered pairs (undirected)
    /// or ordered pairs following edge direction (directed).
    pub fn geodesic_distribution(&self) -> Geodesics {
        let n = self.n;
        let mut by_length = vec![0usize; n.saturating_sub(1)];
        let mut unreachable = 0;
        let mut dist = vec![usize::MAX; n];
        let mut queue = VecDeque::with_capacity(n);
        for s in 0..n {
            dist.iter_mut().for_each(|d| *d = usize::MAX);
            dist[s] = 0;
            queue.clear();
            queue.push_back(s);
            while let Some(u) = queue.pop_front() {
                for v in self.out_neighbors(u) {
                    if dist[v] == usize::MAX {
                        dist[v] = dist[u] + 1;
                        queue.push_back(v);
                    }
                }
            }
            let targets = if self.directed { 0..n } else { (s + 1)..n };
            for t in targets {
                if t == s {
                    continue;
                }
                match dist[t] {
                    usize::MAX => unreachable += 1,
                    l => by_length[l - 1] += 1,
                }
            }
        }
        Geodesics {
            by_length,
            unreachable,
        }
    }

    /// Checks every cached quantity against the bit matrix. Used by tests.
    pub fn check_invariants(&self) -> std::result::Result<(), String> {
        let mut edges = 0;
        for i in 0..self.n {
            if self.has_edge(i, i) {
                return Err(format!("self-loop at {i}"));
            }
            let out = self.out_neighbors(i).count();
            if out != self.out_deg[i] as usize {
                return Err(format!("out-degree cache wrong at {i}"));
            }
            if self.directed {
                let inn = (0..self.n).filter(|&k| self.has_edge(k, i)).count();
                if inn != self.in_deg[i] as usize {
                    return Err(format!("in-degree cache wrong at {i}"));
                }
                for k in 0..self.n {
                    if self.has_edge(k, i) != Self::bit(&self.in_rows, self.words, i, k) {
                        return Err(format!("transpose mismatch at ({k}, {i})"));
                    }
                }
            } else {
                for j in 0..self.n {
                    if self.has_edge(i, j) != self.has_edge(j, i) {
                        return Err(format!("asymmetric at ({i}, {j})"));
                    }
                }
            }
            edges += out;
        }
        if !self.directed {
            edges /= 2;
        }
        if edges != self.edge_count {
            return Err("edge count cache wrong".into());
        }
        for (pos, &code) in self.order.iter().enumerate() {
            let d = self.decode(code);
            if self.slot[code as usize] as usize != pos {
                return Err("slot index inconsistent".into());
            }
            if self.has_edge(d.i, d.j) != (pos < self.edge_count) {
                return Err("edge block inconsistent".into());
            }
        }
        Ok(())
    }
}

fn histogram(n: usize, values: impl Iterator<Item = usize>) -> Vec<usize> {
    let mut hist = vec![0; n];
    for v in values {
        hist[v] += 1;
    }
    hist
}

#[inline]
pub(crate) fn and_count(a: &[u64], b: &[u64]) -> usize {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x & y).count_ones() as usize)
        .sum()
}

/// Iterates set bit positions of a row.
pub(crate) struct BitIter<'a> {
    words: &'a [u64],
    index: usize,
    current: u64,
}

impl<'a> BitIter<'a> {
    pub(crate) fn new(words: &'a [u64]) -> Self {
        BitIter {
            words,
            index: 0,
            current: words.first().copied().unwrap_or(0),
        }
    }
}

impl Iterator for BitIter<'_> {
    type Item = usize;

    #[inline]
    fn next(&mut self) -> Option<usize> {
        loop {
            if self.current != 0 {
                let bit = self.current.trailing_zeros() as usize;
                self.current &= self.current - 1;
                return Some(self.index * 64 + bit);
            }
            self.index += 1;
            if self.index >= self.words.len() {
                return None;
            }
            self.current = self.words[self.index];
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};

    fn triangle() -> Graph {
        Graph::from_edges(3, false, [(0, 1), (1, 2), (0, 2)]).unwrap()
    }

    #[test]
    fn dyads_ignore_graph_state() {
        let mut g = Graph::new(4, false).unwrap();
        let before: Vec<Dyad> = g.dyads().collect();
        assert_eq!(before.len(), g.dyad_count());
        g.toggle(before[4]).unwrap();
        assert_eq!(g.dyads().collect::<Vec<_>>(), before);
        assert_eq!((before[0].i(), before[0].j()), (0, 1));
        let d = Graph::new(3, true).unwrap();
        assert_eq!(d.dyads().count(), 6);
    }

    #[test]
    fn new_graph_sizes() {
        let g = Graph::new(16, false).unwrap();
        assert_eq!((g.edge_count(), g.dyad_count()), (0, 120));
        let g = Graph::new(18, true).unwrap();
        assert_eq!((g.edge_count(), g.dyad_count()), (0, 306));
        let g = Graph::new(1, false).unwrap();
        assert_eq!(g.dyad_count(), 0);
        assert!(matches!(Graph::new(0, false), Err(ErgmError::EmptyGraph)));
    }

    #[test]
    fn toggle_updates_caches() {
        let mut g = Graph::new(3, false).unwrap();
        assert!(g.toggle(Dyad::new(0, 1).unwrap()).unwrap());
        assert_eq!(g.edge_count(), 1);
        assert_eq!((g.degree(0), g.degree(1), g.degree(2)), (1, 1, 0));
        assert!(g.has_edge(1, 0));
        let before = g.clone();
        g.toggle(Dyad::new(1, 2).unwrap()).unwrap();
        g.toggle(Dyad::new(2, 1).unwrap()).unwrap();
        assert_eq!(g, before);
        g.check_invariants().unwrap();
    }

    #[test]
    fn self_loops_and_ranges_rejected() {
        assert!(matches!(Dyad::new(2, 2), Err(ErgmError::SelfLoop(2))));
        let mut g = Graph::new(3, true).unwrap();
        let bad = Dyad::new(0, 5).unwrap();
        assert!(matches!(g.toggle(bad), Err(ErgmError::NodeOutOfRange { index: 5, .. })));
    }

    #[test]
    fn degree_histograms() {
        let g = Graph::from_edges(4, false, [(0, 1)]).unwrap();
        assert_eq!(g.degree_histogram().unwrap(), vec![2, 2, 0, 0]);
        let star = Graph::from_edges(4, false, [(0, 1), (0, 2), (0, 3)]).unwrap();
        assert_eq!(star.degree_histogram().unwrap(), vec![0, 3, 0, 1]);
        let d = Graph::new(3, true).unwrap();
        assert!(d.degree_histogram().is_err());
    }

    #[test]
    fn shared_partners_and_esp() {
        let t = triangle();
        for (i, j) in [(0, 1), (1, 2), (0, 2)] {
            assert_eq!(t.shared_partner_count(Dyad::new(i, j).unwrap()).unwrap(), 1);
        }
        assert_eq!(t.esp_histogram().unwrap(), vec![0, 3]);
        let e = Graph::new(5, false).unwrap();
        assert_eq!(e.shared_partner_count(Dyad::new(3, 4).unwrap()).unwrap(), 0);
        let single = Graph::from_edges(4, false, [(0, 1)]).unwrap();
        assert_eq!(single.esp_histogram().unwrap(), vec![1, 0, 0]);
        assert!(Graph::new(3, true).unwrap().esp_histogram().is_err());
    }

    #[test]
    fn geodesics_small_cases() {
        let path = Graph::from_edges(3, false, [(0, 1), (1, 2)]).unwrap();
        let geo = path.geodesic_distribution();
        assert_eq!(geo.by_length, vec![2, 1]);
        assert_eq!(geo.unreachable, 0);
        let empty = Graph::new(4, false).unwrap().geodesic_distribution();
        assert_eq!(empty.unreachable, 6);
        assert_eq!(empty.total_pairs(), 6);
        let dpath = Graph::from_edges(3, true, [(0, 1), (1, 2)]).unwrap();
        let geo = dpath.geodesic_distribution();
        assert_eq!(geo.by_length, vec![2, 1]);
        assert_eq!(geo.unreachable, 3);
    }

    #[test]
    fn complete_graph() {
        let k = Graph::complete(5, false).unwrap();
        assert_eq!(k.edge_count(), 10);
        assert_eq!(k.degree_histogram().unwrap(), vec![0, 0, 0, 0, 5]);
        let kd = Graph::complete(4, true).unwrap();
        assert_eq!(kd.edge_count(), 12);
        kd.check_invariants().unwrap();
    }

    fn random_graph(rng: &mut impl Rng, n: usize, directed: bool, p: f64) -> Graph {
        let mut g = Graph::new(n, directed).unwrap();
        for k in 0..g.dyad_count() {
            let d = g.dyad_at(k);
            if rng.random_bool(p) && !g.has_edge(d.i(), d.j()) {
                g.flip(d.i(), d.j());
            }
        }
        g
    }

    // independent oracles over a plain adjacency matrix
    fn matrix(g: &Graph) -> Vec<Vec<bool>> {
        (0..g.n()).map(|i| (0..g.n()).map(|j| g.has_edge(i, j)).collect()).collect()
    }

    fn bfs_oracle(a: &[Vec<bool>], directed: bool) -> (Vec<usize>, usize) {
        let n = a.len();
        let mut counts = vec![0; n.saturating_sub(1)];
        let mut unreachable = 0;
        for s in 0..n {
            let mut dist = vec![None; n];
            dist[s] = Some(0usize);
            let mut frontier = vec![s];
            let mut level = 0;
            while !frontier.is_empty() {
                level += 1;
                let mut next = vec![];
                for &u in &frontier {
                    for v in 0..n {
                        if a[u][v] && dist[v].is_none() {
                            dist[v] = Some(level);
                            next.push(v);
                        }
                    }
                }
                frontier = next;
            }
            for t in 0..n {
                if t == s || (!directed && t < s) {
                    continue;
                }
                match dist[t] {
                    Some(l) => counts[l - 1] += 1,
                    None => unreachable += 1,
                }
            }
        }
        (counts, unreachable)
    }

    #[test]
    fn histograms_match_direct_tallies() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(11);
        for trial in 0..60 {
            let n = 2 + trial % 9;
            let g = random_graph(&mut rng, n, false, 0.4);
            let a = matrix(&g);
            let degs: Vec<usize> = a.iter().map(|r| r.iter().filter(|&&b| b).count()).collect();
            let dh = g.degree_histogram().unwrap();
            for (k, &c) in dh.iter().enumerate() {
                assert_eq!(c, degs.iter().filter(|&&d| d == k).count());
            }
            assert_eq!(dh.iter().enumerate().map(|(k, c)| k * c).sum::<usize>(), 2 * g.edge_count());

            let mut esp = vec![0; n - 1];
            for i in 0..n {
                for j in (i + 1)..n {
                    let sp = (0..n).filter(|&k| a[i][k] && a[j][k]).count();
                    assert_eq!(g.shared_partner_count(Dyad::new(i, j).unwrap()).unwrap(), sp);
                    if a[i][j] {
                        esp[sp] += 1;
                    }
                }
            }
            assert_eq!(g.esp_histogram().unwrap(), esp);

            let (counts, unreachable) = bfs_oracle(&a, false);
            let geo = g.geodesic_distribution();
            assert_eq!(geo.by_length, counts);
            assert_eq!(geo.unreachable, unreachable);

            let gd = random_graph(&mut rng, n, true, 0.3);
            let (counts, unreachable) = bfs_oracle(&matrix(&gd), true);
            let geo = gd.geodesic_distribution();
            assert_eq!((&geo.by_length, geo.unreachable), (&counts, unreachable));
            assert_eq!(geo.total_pairs(), n * (n - 1));
        }
    }

    #[test]
    fn edges_iterator_is_canonical() {
        let g = Graph::from_edges(5, false, [(3, 1), (4, 0), (2, 3)]).unwrap();
        let e: Vec<_> = g.edges().map(|d| (d.i(), d.j())).collect();
        assert_eq!(e, vec![(0, 4), (1, 3), (2, 3)]);
    }

    #[test]
    fn wide_graphs_cross_word_boundaries() {
        let mut g = Graph::new(130, false).unwrap();
        g.toggle(Dyad::new(0, 129).unwrap()).unwrap();
        g.toggle(Dyad::new(64, 129).unwrap()).unwrap();
        assert_eq!(g.shared_partner_count(Dyad::new(0, 64).unwrap()).unwrap(), 1);
        assert_eq!(g.out_neighbors(129).collect::<Vec<_>>(), vec![0, 64]);
        g.check_invariants().unwrap();
    }

    proptest! {
        #[test]
        fn caches_survive_random_toggles(
            directed in any::<bool>(),
            toggles in proptest::collection::vec((0usize..8, 0usize..8), 0..200),
        ) {
            let mut g = Graph::new(8, directed).unwrap();
            for (i, j) in toggles {
                if i == j { continue; }
                g.toggle(Dyad::new(i, j).unwrap()).unwrap();
                prop_assert!(g.check_invariants().is_ok());
            }
        }

        #[test]
        fn toggle_is_an_involution(
            directed in any::<bool>(),
            seed in any::<u64>(),
            i in 0usize..7, j in 0usize..7,
        ) {
            prop_assume!(i != j);
            let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
            let g0 = random_graph(&mut rng, 7, directed, 0.5);
            let mut g = g0.clone();
            let d = Dyad::new(i, j).unwrap();
            g.toggle(d).unwrap();
            g.toggle(d).unwrap();
            prop_assert_eq!(g, g0);
        }
    }
}
