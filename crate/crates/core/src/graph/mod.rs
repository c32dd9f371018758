//! Weighted graphs and the instance families: Laakso and diamond graphs,
//! Hamming cubes, Walsh point sets, random point sets, and cut-metric
//! realizations in `l_1`.

mod dyadic;
mod families;
mod realize;

pub use dyadic::Dyadic;
pub use families::{
    diamond, hypercube_metric, laakso, path_graph, random_pointset, walsh_matrix, walsh_pointset, Distribution,
    LaaksoRefinement, MAX_LEVEL,
};
pub use realize::{l1_realize, ALL_CUTS_MAX_VERTICES, MAX_REALIZE_VERTICES};

use std::cmp::Reverse;
use std::collections::{BinaryHeap, HashMap};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::metric::{FiniteMetricSpace, MAX_METRIC_POINTS};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Edge {
    pub u: usize,
    pub v: usize,
    pub length: Dyadic,
}

/// Undirected graph with positive dyadic edge lengths.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "GraphFile", into = "GraphFile")]
pub struct WeightedGraph {
    n: usize,
    edges: Vec<Edge>,
    labels: Option<Vec<String>>,
}

/// On-disk layout: `{"n": .., "edges": [[u, v, length], ..], "labels": [..]}`.
#[derive(Serialize, Deserialize)]
struct GraphFile {
    n: usize,
    edges: Vec<(usize, usize, f64)>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    labels: Option<Vec<String>>,
}

impl TryFrom<GraphFile> for WeightedGraph {
    type Error = Error;

    fn try_from(f: GraphFile) -> Result<Self> {
        let edges = f
            .edges
            .into_iter()
            .map(|(u, v, l)| Ok(Edge { u, v, length: Dyadic::from_f64(l)? }))
            .collect::<Result<Vec<_>>>()?;
        WeightedGraph::new(f.n, edges, f.labels)
    }
}

impl From<WeightedGraph> for GraphFile {
    fn from(g: WeightedGraph) -> Self {
        GraphFile {
            n: g.n,
            edges: g.edges.iter().map(|e| (e.u, e.v, e.length.to_f64())).collect(),
            labels: g.labels,
        }
    }
}

impl WeightedGraph {
    pub fn new(n: usize, edges: Vec<Edge>, labels: Option<Vec<String>>) -> Result<Self> {
        if let Some(l) = &labels {
            if l.len() != n {
                return Err(Error::ShapeError(format!("{} labels for {n} vertices", l.len())));
            }
        }
        for e in &edges {
            if e.u >= n || e.v >= n {
                return Err(Error::ShapeError(format!("edge ({}, {}) out of range for {n} vertices", e.u, e.v)));
            }
            if e.u == e.v {
                return Err(Error::InvalidParameter(format!("self-loop at vertex {}", e.u)));
            }
        }
        Ok(Self { n, edges, labels })
    }

    pub fn n_vertices(&self) -> usize {
        self.n
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn labels(&self) -> Option<&[String]> {
        self.labels.as_deref()
    }

    pub fn label(&self, v: usize) -> String {
        match &self.labels {
            Some(l) => l[v].clone(),
            None => v.to_string(),
        }
    }

    pub fn label_map(&self) -> HashMap<String, usize> {
        (0..self.n).map(|v| (self.label(v), v)).collect()
    }

    /// Neighbor lists as `(vertex, edge index)`.
    pub fn adjacency(&self) -> Vec<Vec<(usize, usize)>> {
        let mut adj = vec![Vec::new(); self.n];
        for (k, e) in self.edges.iter().enumerate() {
            adj[e.u].push((e.v, k));
            adj[e.v].push((e.u, k));
        }
        adj
    }

    /// First vertex unreachable from vertex 0, if any.
    pub fn unreachable_vertex(&self) -> Option<usize> {
        if self.n == 0 {
            return None;
        }
        let adj = self.adjacency();
        let mut seen = vec![false; self.n];
        let mut stack = vec![0];
        seen[0] = true;
        while let Some(u) = stack.pop() {
            for &(v, _) in &adj[u] {
                if !seen[v] {
                    seen[v] = true;
                    stack.push(v);
                }
            }
        }
        seen.iter().position(|s| !s)
    }
}

/// All-pairs shortest paths, computed exactly in integer units of the
/// finest edge denominator and exported as doubles.
pub fn shortest_path_metric(g: &WeightedGraph) -> Result<FiniteMetricSpace> {
    let n = g.n;
    if n == 0 {
        return Err(Error::ShapeError("graph has no vertices".into()));
    }
    if n > MAX_METRIC_POINTS {
        return Err(Error::ResourceLimit(format!(
            "{n} vertices exceeds the dense-matrix limit {MAX_METRIC_POINTS}"
        )));
    }
    if let Some(v) = g.unreachable_vertex() {
        return Err(Error::DisconnectedGraph(v));
    }
    let common = g.edges.iter().map(|e| e.length.exp()).max().unwrap_or(0);
    let adj: Vec<Vec<(usize, u128)>> = {
        let mut adj = vec![Vec::new(); n];
        for e in &g.edges {
            let w = e
                .length
                .units(common)
                .filter(|&w| w < 1 << 100)
                .ok_or_else(|| Error::InvalidParameter("edge lengths span too many binary orders".into()))?;
            adj[e.u].push((e.v, w));
            adj[e.v].push((e.u, w));
        }
        adj
    };
    let scale = 2f64.powi(-(common as i32));
    let mut dist = vec![0.0; n * n];
    let mut best = vec![u128::MAX; n];
    let mut heap = BinaryHeap::new();
    for s in 0..n {
        best.fill(u128::MAX);
        best[s] = 0;
        heap.push(Reverse((0u128, s)));
        while let Some(Reverse((d, u))) = heap.pop() {
            if d > best[u] {
                continue;
            }
            for &(v, w) in &adj[u] {
                let nd = d + w;
                if nd < best[v] {
                    best[v] = nd;
                    heap.push(Reverse((nd, v)));
                }
            }
        }
        for (t, &b) in best.iter().enumerate() {
            dist[s * n + t] = b as f64 * scale;
        }
    }
    let labels = (0..n).map(|v| g.label(v)).collect();
    FiniteMetricSpace::from_flat(Some(labels), n, dist)
}
