use std::collections::{HashMap, HashSet};

use rand::Rng as _;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use super::{Dyadic, Edge, WeightedGraph};
use crate::error::{Error, Result};
use crate::metric::{FiniteMetricSpace, PointSet, MAX_METRIC_POINTS};
use crate::seed;

/// Largest recursion level for Laakso and diamond graphs.
pub const MAX_LEVEL: u32 = 8;

/// Largest Walsh order.
pub const MAX_WALSH_ORDER: u32 = 12;

fn check_level(level: u32) -> Result<()> {
    if level > MAX_LEVEL {
        Err(Error::ResourceLimit(format!("level {level} exceeds {MAX_LEVEL}")))
    } else {
        Ok(())
    }
}

struct PathEdge {
    start: usize,
    end: usize,
    path: String,
}

/// Repeated edge substitution. `gadget` lists the new vertex names and the
/// child edges, where `"s"`/`"t"` denote the refined edge's endpoints.
fn substitute(level: u32, names: &[&str], children: &[(&str, &str)], exp_per_level: u32) -> WeightedGraph {
    let mut labels = vec!["s".to_string(), "t".to_string()];
    let mut edges = vec![PathEdge { start: 0, end: 1, path: String::new() }];
    for _ in 0..level {
        let mut next = Vec::with_capacity(edges.len() * children.len());
        for e in &edges {
            let mut ids: HashMap<&str, usize> = HashMap::from([("s", e.start), ("t", e.end)]);
            for &name in names {
                ids.insert(name, labels.len());
                labels.push(format!("{}{name}", e.path));
            }
            for (k, (a, b)) in children.iter().enumerate() {
                next.push(PathEdge { start: ids[a], end: ids[b], path: format!("{}{k}", e.path) });
            }
        }
        edges = next;
    }
    let length = Dyadic::unit_fraction(exp_per_level * level);
    let n = labels.len();
    let edges = edges.into_iter().map(|e| Edge { u: e.start, v: e.end, length }).collect();
    WeightedGraph::new(n, edges, Some(labels)).expect("generated graph is well formed")
}

// Copy k of the six quarter-scale copies, oriented from the `s` side.
// a and d are the junctions on the cycle's horizontal axis; b and c the
// top and bottom of the cycle.
const LAAKSO_NEW: [&str; 4] = ["a", "b", "c", "d"];
const LAAKSO_COPIES: [(&str, &str); 6] = [("s", "a"), ("a", "b"), ("b", "d"), ("a", "c"), ("c", "d"), ("d", "t")];

/// Laakso graph `G_level`: edges of length `4^-level`, endpoints `s`, `t` at distance 1.
///
/// Vertex labels are the copy path (one digit 0-5 per level) followed by the
/// gadget vertex name. Vertices of `G_j` are exactly those with label length
/// at most `j` (plus `s`, `t`), and they come first in index order.
pub fn laakso(level: u32) -> Result<WeightedGraph> {
    check_level(level)?;
    Ok(substitute(level, &LAAKSO_NEW, &LAAKSO_COPIES, 2))
}

/// Diamond graph `D_level`: every edge replaced by a quadrilateral `s-a-t`, `s-b-t`.
pub fn diamond(level: u32) -> Result<WeightedGraph> {
    check_level(level)?;
    Ok(substitute(level, &["a", "b"], &[("s", "a"), ("a", "t"), ("s", "b"), ("b", "t")], 1))
}

/// Unit-length path on `n` vertices.
pub fn path_graph(n: usize) -> Result<WeightedGraph> {
    if n == 0 {
        return Err(Error::InvalidParameter("path needs at least one vertex".into()));
    }
    let edges = (1..n).map(|v| Edge { u: v - 1, v, length: Dyadic::one() }).collect();
    WeightedGraph::new(n, edges, None)
}

/// Structural lookups inside a Laakso graph, driven by the copy-path labels.
pub struct LaaksoRefinement {
    ids: HashMap<String, usize>,
    level: u32,
}

impl LaaksoRefinement {
    pub fn new(g: &WeightedGraph, level: u32) -> Result<Self> {
        let ids = g.label_map();
        if !ids.contains_key("s") || !ids.contains_key("t") {
            return Err(Error::ShapeError("graph lacks Laakso endpoint labels".into()));
        }
        Ok(Self { ids, level })
    }

    pub fn level(&self) -> u32 {
        self.level
    }

    pub fn vertex(&self, label: &str) -> Result<usize> {
        self.ids
            .get(label)
            .copied()
            .ok_or_else(|| Error::ShapeError(format!("no vertex labelled '{label}'")))
    }

    /// Gadget vertices `[a, b, c, d]` created when refining the edge with copy path `path`.
    pub fn gadget(&self, path: &str) -> Result<[usize; 4]> {
        let mut out = [0; 4];
        for (slot, name) in out.iter_mut().zip(LAAKSO_NEW) {
            *slot = self.vertex(&format!("{path}{name}"))?;
        }
        Ok(out)
    }

    /// Endpoints of child copy `k` of the edge `(start, end)` with copy path `path`.
    pub fn child(&self, path: &str, start: usize, end: usize, k: usize) -> Result<(usize, usize)> {
        let [a, b, c, d] = self.gadget(path)?;
        let pick = |name: &str| match name {
            "s" => start,
            "t" => end,
            "a" => a,
            "b" => b,
            "c" => c,
            _ => d,
        };
        let (x, y) = LAAKSO_COPIES[k];
        Ok((pick(x), pick(y)))
    }
}

/// Hamming cube `{0,1}^k`; point `x` is labelled by its bit string, most significant bit first.
pub fn hypercube_metric(k: u32) -> Result<FiniteMetricSpace> {
    let n = 1usize
        .checked_shl(k)
        .filter(|&n| n <= MAX_METRIC_POINTS)
        .ok_or_else(|| Error::ResourceLimit(format!("hypercube dimension {k} exceeds the dense-matrix limit")))?;
    let labels = (0..n).map(|x| format!("{x:0width$b}", width = k as usize)).collect();
    FiniteMetricSpace::from_fn(Some(labels), n, |i, j| (i ^ j).count_ones() as f64)
}

/// Sylvester-ordered `2^k x 2^k` Walsh matrix, entry `(i, j) = (-1)^popcount(i & j)`.
pub fn walsh_matrix(k: u32) -> Result<Vec<Vec<f64>>> {
    if k > MAX_WALSH_ORDER {
        return Err(Error::ResourceLimit(format!("Walsh order {k} exceeds {MAX_WALSH_ORDER}")));
    }
    let n = 1usize << k;
    Ok((0..n)
        .map(|i| {
            (0..n)
                .map(|j| if (i & j).count_ones() % 2 == 0 { 1.0 } else { -1.0 })
                .collect()
        })
        .collect())
}

/// The origin, the `2^k` Walsh rows, then the `2^k` standard basis vectors.
pub fn walsh_pointset(k: u32, p: f64) -> Result<PointSet> {
    let w = walsh_matrix(k)?;
    let dim = w.len();
    let mut rows = Vec::with_capacity(2 * dim + 1);
    rows.push(vec![0.0; dim]);
    rows.extend(w);
    rows.extend((0..dim).map(|i| {
        let mut e = vec![0.0; dim];
        e[i] = 1.0;
        e
    }));
    PointSet::new(p, rows)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Distribution {
    Gaussian,
    UnitCube,
}

/// `n` distinct random points in `R^d`; identical rows are redrawn.
pub fn random_pointset(n: usize, d: usize, p: f64, distribution: Distribution, seed: u64) -> Result<PointSet> {
    if n == 0 || d == 0 {
        return Err(Error::InvalidParameter("random point set needs n, d >= 1".into()));
    }
    let mut rng = seed::rng(seed);
    let mut seen = HashSet::new();
    let mut coords = Vec::with_capacity(n * d);
    while seen.len() < n {
        let row: Vec<f64> = (0..d)
            .map(|_| match distribution {
                Distribution::Gaussian => rng.sample::<f64, _>(StandardNormal),
                Distribution::UnitCube => rng.random::<f64>(),
            })
            .collect();
        let key: Vec<u64> = row.iter().map(|x| (x + 0.0).to_bits()).collect();
        if seen.insert(key) {
            coords.extend(row);
        }
    }
    PointSet::from_flat(p, d, coords)
}
