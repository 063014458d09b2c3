//! MaxCut problem instances: the linear, 3-regular and complete ensembles,
//! plus exact classical oracles for small graphs.

use std::collections::{HashSet, VecDeque};
use std::fmt;
use std::str::FromStr;

use rand::seq::SliceRandom;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::seed::rng_from_seed;
use crate::{Error, Result};

/// Largest instance [`maxcut_bruteforce`] accepts.
pub const BRUTEFORCE_LIMIT: usize = 30;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum GraphKind {
    Linear,
    Regular3,
    Complete,
}

impl GraphKind {
    pub fn as_str(self) -> &'static str {
        match self {
            GraphKind::Linear => "linear",
            GraphKind::Regular3 => "regular3",
            GraphKind::Complete => "complete",
        }
    }
}

impl fmt::Display for GraphKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for GraphKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "linear" => Ok(GraphKind::Linear),
            "regular3" => Ok(GraphKind::Regular3),
            "complete" => Ok(GraphKind::Complete),
            other => Err(Error::Parameter(format!("unknown graph kind `{other}`"))),
        }
    }
}

/// A weighted edge with `i < j`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(from = "(usize, usize, f64)", into = "(usize, usize, f64)")]
pub struct Edge {
    pub i: usize,
    pub j: usize,
    pub w: f64,
}

impl From<(usize, usize, f64)> for Edge {
    fn from((i, j, w): (usize, usize, f64)) -> Self {
        Edge { i, j, w }
    }
}

impl From<Edge> for (usize, usize, f64) {
    fn from(e: Edge) -> Self {
        (e.i, e.j, e.w)
    }
}

/// A weighted undirected MaxCut instance.
///
/// Serialized as `{"n": .., "kind": .., "edges": [[i, j, w], ..]}`;
/// deserialization re-checks every structural invariant.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawGraph")]
pub struct Graph {
    n: usize,
    kind: GraphKind,
    edges: Vec<Edge>,
}

#[derive(Deserialize)]
struct RawGraph {
    n: usize,
    kind: GraphKind,
    edges: Vec<Edge>,
}

impl TryFrom<RawGraph> for Graph {
    type Error = Error;

    fn try_from(raw: RawGraph) -> Result<Self> {
        Graph::new(raw.n, raw.kind, raw.edges)
    }
}

impl Graph {
    /// Builds a graph and validates it against the invariants of `kind`.
    pub fn new(n: usize, kind: GraphKind, mut edges: Vec<Edge>) -> Result<Self> {
        if n < 2 {
            return Err(Error::InvalidSize(format!("need at least 2 vertices, got {n}")));
        }
        let mut seen = HashSet::with_capacity(edges.len());
        for e in &mut edges {
            if e.i > e.j {
                std::mem::swap(&mut e.i, &mut e.j);
            }
            if e.i == e.j {
                return Err(Error::Parameter(format!("self-loop on vertex {}", e.i)));
            }
            if e.j >= n {
                return Err(Error::Parameter(format!("vertex {} out of range", e.j)));
            }
            if !e.w.is_finite() || e.w < 0.0 {
                return Err(Error::Parameter(format!("invalid weight {}", e.w)));
            }
            if !seen.insert((e.i, e.j)) {
                return Err(Error::Parameter(format!("duplicate edge ({}, {})", e.i, e.j)));
            }
        }
        let g = Graph { n, kind, edges };
        g.check_kind()?;
        Ok(g)
    }

    fn check_kind(&self) -> Result<()> {
        let n = self.n;
        let bad = |msg: String| Err(Error::Parameter(msg));
        match self.kind {
            GraphKind::Linear => {
                if self.edges.len() != n - 1 || self.edges.iter().any(|e| e.j != e.i + 1) {
                    return bad("linear graph must be the path 0-1-..-(n-1)".into());
                }
            }
            GraphKind::Complete => {
                if self.edges.len() != n * (n - 1) / 2 {
                    return bad(format!("complete graph on {n} vertices needs {} edges", n * (n - 1) / 2));
                }
            }
            GraphKind::Regular3 => {
                if n < 4 || n % 2 == 1 {
                    return Err(Error::InvalidSize(format!("3-regular graph needs even n >= 4, got {n}")));
                }
                if self.degrees().iter().any(|&d| d != 3) {
                    return bad("every vertex of a 3-regular graph must have degree 3".into());
                }
                if self.edges.iter().any(|e| e.w != 1.0) {
                    return bad("3-regular graphs carry unit weights".into());
                }
            }
        }
        if self.kind != GraphKind::Regular3 && self.edges.iter().any(|e| e.w > 1.0) {
            return bad("weights must lie in [0, 1]".into());
        }
        Ok(())
    }

    pub fn n_vertices(&self) -> usize {
        self.n
    }

    pub fn kind(&self) -> GraphKind {
        self.kind
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn degrees(&self) -> Vec<usize> {
        let mut deg = vec![0; self.n];
        for e in &self.edges {
            deg[e.i] += 1;
            deg[e.j] += 1;
        }
        deg
    }

    pub fn adjacency(&self) -> Vec<Vec<usize>> {
        let mut adj = vec![Vec::new(); self.n];
        for e in &self.edges {
            adj[e.i].push(e.j);
            adj[e.j].push(e.i);
        }
        adj
    }

    /// `C(s) = sum_{(i,j)} w_ij s_i s_j`.
    pub fn cost(&self, spins: &SpinConfig) -> f64 {
        debug_assert_eq!(spins.len(), self.n);
        self.edges
            .iter()
            .map(|e| e.w * f64::from(spins.0[e.i] * spins.0[e.j]))
            .sum()
    }

    /// Cost of the configuration encoded by basis index `b` (bit 0 -> spin +1).
    pub fn cost_of_bits(&self, b: u64) -> f64 {
        self.edges
            .iter()
            .map(|e| {
                if ((b >> e.i) ^ (b >> e.j)) & 1 == 0 {
                    e.w
                } else {
                    -e.w
                }
            })
            .sum()
    }

    pub fn is_connected(&self) -> bool {
        bfs_distances(&self.adjacency(), 0).iter().all(Option::is_some)
    }
}

/// Spin assignment `s_i = ±1` for every vertex.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct SpinConfig(Vec<i8>);

impl SpinConfig {
    pub fn new(spins: Vec<i8>) -> Result<Self> {
        if spins.iter().any(|&s| s != 1 && s != -1) {
            return Err(Error::Parameter("spins must be +1 or -1".into()));
        }
        Ok(SpinConfig(spins))
    }

    /// Spin `i` is `+1` when bit `i` of `b` is 0.
    pub fn from_bits(b: u64, n: usize) -> Self {
        SpinConfig((0..n).map(|i| 1 - 2 * ((b >> i) & 1) as i8).collect())
    }

    pub fn to_bits(&self) -> u64 {
        self.0
            .iter()
            .enumerate()
            .filter(|(_, &s)| s == -1)
            .fold(0, |acc, (i, _)| acc | 1 << i)
    }

    pub fn flipped(&self) -> Self {
        SpinConfig(self.0.iter().map(|s| -s).collect())
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn spins(&self) -> &[i8] {
        &self.0
    }
}

/// Path graph with i.i.d. uniform weights on its `n - 1` bonds.
pub fn gen_linear(n: usize, seed: u64) -> Result<Graph> {
    if n < 2 {
        return Err(Error::InvalidSize(format!("linear graph needs n >= 2, got {n}")));
    }
    let mut rng = rng_from_seed(seed);
    let edges = (0..n - 1)
        .map(|i| Edge { i, j: i + 1, w: rng.random::<f64>() })
        .collect();
    Graph::new(n, GraphKind::Linear, edges)
}

/// All-to-all graph with i.i.d. uniform weights.
pub fn gen_complete(n: usize, seed: u64) -> Result<Graph> {
    if n < 2 {
        return Err(Error::InvalidSize(format!("complete graph needs n >= 2, got {n}")));
    }
    let mut rng = rng_from_seed(seed);
    let mut edges = Vec::with_capacity(n * (n - 1) / 2);
    for i in 0..n {
        for j in i + 1..n {
            edges.push(Edge { i, j, w: rng.random::<f64>() });
        }
    }
    Graph::new(n, GraphKind::Complete, edges)
}

/// Simple connected 3-regular graph with unit weights.
///
/// Configuration model: three stubs per vertex are shuffled and paired; any
/// pairing with a self-loop or a parallel edge, or whose graph is
/// disconnected, is discarded and redrawn.
pub fn gen_regular3(n: usize, seed: u64) -> Result<Graph> {
    if n < 4 || n % 2 == 1 {
        return Err(Error::InvalidSize(format!("3-regular graph needs even n >= 4, got {n}")));
    }
    let mut rng = rng_from_seed(seed);
    let mut stubs: Vec<usize> = (0..n).flat_map(|v| [v; 3]).collect();
    'sample: loop {
        stubs.shuffle(&mut rng);
        let mut seen = HashSet::with_capacity(3 * n / 2);
        let mut edges = Vec::with_capacity(3 * n / 2);
        for pair in stubs.chunks_exact(2) {
            let (i, j) = (pair[0].min(pair[1]), pair[0].max(pair[1]));
            if i == j || !seen.insert((i, j)) {
                continue 'sample;
            }
            edges.push(Edge { i, j, w: 1.0 });
        }
        edges.sort_by_key(|e| (e.i, e.j));
        let g = Graph::new(n, GraphKind::Regular3, edges)?;
        if g.is_connected() {
            return Ok(g);
        }
    }
}

pub fn generate(kind: GraphKind, n: usize, seed: u64) -> Result<Graph> {
    match kind {
        GraphKind::Linear => gen_linear(n, seed),
        GraphKind::Regular3 => gen_regular3(n, seed),
        GraphKind::Complete => gen_complete(n, seed),
    }
}

fn bfs_distances(adj: &[Vec<usize>], src: usize) -> Vec<Option<usize>> {
    let mut dist = vec![None; adj.len()];
    let mut queue = VecDeque::new();
    dist[src] = Some(0);
    queue.push_back(src);
    while let Some(u) = queue.pop_front() {
        let du = dist[u].unwrap_or_default();
        for &v in &adj[u] {
            if dist[v].is_none() {
                dist[v] = Some(du + 1);
                queue.push_back(v);
            }
        }
    }
    dist
}

/// Mean hop-count distance over all unordered vertex pairs.
pub fn avg_shortest_path(g: &Graph) -> Result<f64> {
    let adj = g.adjacency();
    let n = g.n_vertices();
    let mut total = 0usize;
    for src in 0..n {
        for d in bfs_distances(&adj, src).into_iter().skip(src + 1) {
            total += d.ok_or(Error::Disconnected)?;
        }
    }
    Ok(total as f64 / (n * (n - 1) / 2) as f64)
}

/// Exhaustive minimum of `C(s)` and every configuration attaining it.
///
/// Ties are resolved with an absolute tolerance of `1e-9`.
pub fn maxcut_bruteforce(g: &Graph) -> Result<(f64, Vec<SpinConfig>)> {
    let n = g.n_vertices();
    if n > BRUTEFORCE_LIMIT {
        return Err(Error::TooLarge { n, limit: BRUTEFORCE_LIMIT });
    }
    const TIE: f64 = 1e-9;
    let mut best = f64::INFINITY;
    let mut argmin = Vec::new();
    for b in 0..1u64 << n {
        let c = g.cost_of_bits(b);
        if c < best - TIE {
            best = c;
            argmin.clear();
            argmin.push(b);
        } else if (c - best).abs() <= TIE {
            best = best.min(c);
            argmin.push(b);
        }
    }
    Ok((best, argmin.into_iter().map(|b| SpinConfig::from_bits(b, n)).collect()))
}
