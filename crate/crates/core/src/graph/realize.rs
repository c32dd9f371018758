//! Realization of a graph metric as a nonnegative combination of cut
//! semimetrics, found by linear programming, then written as `l_1` coordinates
//! (one coordinate per cut with positive weight).

use minilp::{ComparisonOp, OptimizationDirection, Problem};

use super::{shortest_path_metric, WeightedGraph};
use crate::error::{Error, Result};
use crate::metric::{distortion_report, FiniteMetricSpace, PointSet};

/// Largest graph accepted by [`l1_realize`].
pub const MAX_REALIZE_VERTICES: usize = 40;

/// Up to this size every cut enters the LP; above it only cuts whose two
/// sides both induce connected subgraphs.
pub const ALL_CUTS_MAX_VERTICES: usize = 12;

const MAX_CONNECTED_SETS: usize = 2_000_000;

// Cut weights below this (relative to the diameter) are dropped.
const WEIGHT_CUTOFF: f64 = 1e-12;

fn neighbor_masks(g: &WeightedGraph) -> Vec<u64> {
    let mut nb = vec![0u64; g.n_vertices()];
    for e in g.edges() {
        nb[e.u] |= 1 << e.v;
        nb[e.v] |= 1 << e.u;
    }
    nb
}

fn is_connected(set: u64, nb: &[u64]) -> bool {
    if set == 0 {
        return false;
    }
    let mut reached = set & set.wrapping_neg();
    loop {
        let mut grown = reached;
        let mut bits = reached;
        while bits != 0 {
            let v = bits.trailing_zeros() as usize;
            bits &= bits - 1;
            grown |= nb[v] & set;
        }
        if grown == reached {
            return reached == set;
        }
        reached = grown;
    }
}

struct ConnectedCuts<'a> {
    nb: &'a [u64],
    all: u64,
    out: Vec<u64>,
    visited: usize,
}

impl ConnectedCuts<'_> {
    // Each connected set containing the root is visited once: vertices tried
    // and rejected at a branch point stay forbidden for the later branches.
    fn extend(&mut self, set: u64, ext: u64, forbidden: u64) -> Result<()> {
        self.visited += 1;
        if self.visited > MAX_CONNECTED_SETS {
            return Err(Error::ResourceLimit(format!(
                "more than {MAX_CONNECTED_SETS} connected vertex sets"
            )));
        }
        if set != self.all && is_connected(self.all & !set, self.nb) {
            self.out.push(set);
        }
        let mut ext = ext;
        let mut forbidden = forbidden;
        while ext != 0 {
            let v = ext.trailing_zeros() as usize;
            let bit = 1u64 << v;
            ext &= !bit;
            let grown = set | bit;
            let next_ext = (ext | self.nb[v]) & !grown & !forbidden;
            self.extend(grown, next_ext, forbidden)?;
            forbidden |= bit;
        }
        Ok(())
    }
}

/// Cuts as vertex masks, each unordered cut listed once.
fn candidate_cuts(g: &WeightedGraph) -> Result<Vec<u64>> {
    let n = g.n_vertices();
    if n <= ALL_CUTS_MAX_VERTICES {
        // vertex n-1 always on the outside
        return Ok((1..1u64 << (n - 1)).collect());
    }
    let nb = neighbor_masks(g);
    let all = if n == 64 { u64::MAX } else { (1u64 << n) - 1 };
    let mut walk = ConnectedCuts { nb: &nb, all, out: Vec::new(), visited: 0 };
    walk.extend(1, nb[0] & !1, 0)?;
    Ok(walk.out)
}

fn separates(cut: u64, i: usize, j: usize) -> bool {
    (cut >> i & 1) != (cut >> j & 1)
}

/// Minimum-distortion cut decomposition of the shortest-path metric of `g`.
///
/// Returns a `p = 1` point set (one coordinate per cut with positive
/// weight) together with its measured distortion against the graph metric.
pub fn l1_realize(g: &WeightedGraph, max_distortion: f64) -> Result<(PointSet, f64)> {
    let n = g.n_vertices();
    if n > MAX_REALIZE_VERTICES {
        return Err(Error::ResourceLimit(format!(
            "cut LP limited to {MAX_REALIZE_VERTICES} vertices, got {n}"
        )));
    }
    let metric = shortest_path_metric(g)?;
    if n == 1 {
        return Ok((PointSet::new(1.0, vec![vec![0.0]])?, 1.0));
    }
    let cuts = candidate_cuts(g)?;
    let scale = metric.diameter();
    let weights = solve_cut_lp(&metric, &cuts, scale)?;

    let used: Vec<(u64, f64)> = cuts
        .iter()
        .zip(&weights)
        .filter(|(_, &w)| w > WEIGHT_CUTOFF)
        .map(|(&c, &w)| (c, w * scale))
        .collect();
    if used.is_empty() {
        return Err(Error::RealizationFailed { best_distortion: f64::INFINITY });
    }
    let rows = (0..n)
        .map(|v| used.iter().map(|&(c, w)| if c >> v & 1 == 1 { w } else { 0.0 }).collect())
        .collect();
    let points = PointSet::new(1.0, rows)?;
    let image = points.distance_matrix()?;
    let distortion = distortion_report(&metric, &image, 1.0)?.distortion;
    if distortion > max_distortion {
        return Err(Error::RealizationFailed { best_distortion: distortion });
    }
    Ok((points, distortion))
}

/// minimize D  s.t.  d(i,j) <= sum_c w_c [c separates i,j] <= D d(i,j), w >= 0.
fn solve_cut_lp(metric: &FiniteMetricSpace, cuts: &[u64], scale: f64) -> Result<Vec<f64>> {
    let mut lp = Problem::new(OptimizationDirection::Minimize);
    let vars: Vec<_> = cuts.iter().map(|_| lp.add_var(0.0, (0.0, f64::INFINITY))).collect();
    let stretch = lp.add_var(1.0, (0.0, f64::INFINITY));
    for (i, j) in metric.pairs() {
        let d = metric.get(i, j) / scale;
        let terms: Vec<_> = cuts
            .iter()
            .zip(&vars)
            .filter(|(&c, _)| separates(c, i, j))
            .map(|(_, &v)| (v, 1.0))
            .collect();
        lp.add_constraint(terms.as_slice(), ComparisonOp::Ge, d);
        let mut upper = terms;
        upper.push((stretch, -d));
        lp.add_constraint(upper.as_slice(), ComparisonOp::Le, 0.0);
    }
    let solution = lp
        .solve()
        .map_err(|_| Error::RealizationFailed { best_distortion: f64::INFINITY })?;
    Ok(vars.iter().map(|&v| solution[v]).collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{diamond, laakso, path_graph};

    #[test]
    fn single_edge() {
        let (ps, dist) = l1_realize(&laakso(0).unwrap(), 1.0 + 1e-9).unwrap();
        assert_eq!(ps.len(), 2);
        assert!((ps.distance(0, 1) - 1.0).abs() < 1e-12);
        assert!((dist - 1.0).abs() < 1e-9);
    }

    #[test]
    fn four_cycle_is_isometric() {
        let (_, dist) = l1_realize(&diamond(1).unwrap(), 1.0 + 1e-6).unwrap();
        assert!((dist - 1.0).abs() < 1e-6);
    }

    #[test]
    fn first_laakso_graph_is_isometric() {
        let (ps, dist) = l1_realize(&laakso(1).unwrap(), 1.0 + 1e-6).unwrap();
        assert!(dist <= 1.0 + 1e-6, "{dist}");
        let m = shortest_path_metric(&laakso(1).unwrap()).unwrap();
        let img = ps.distance_matrix().unwrap();
        for (i, j) in m.pairs() {
            assert!((img.get(i, j) - m.get(i, j)).abs() < 1e-6);
        }
    }

    #[test]
    fn too_tight_a_budget_fails_with_best() {
        match l1_realize(&diamond(1).unwrap(), 0.5) {
            Err(Error::RealizationFailed { best_distortion }) => assert!((best_distortion - 1.0).abs() < 1e-6),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn connected_cuts_of_a_path_are_prefixes() {
        let g = path_graph(14).unwrap();
        let mut cuts = candidate_cuts(&g).unwrap();
        cuts.sort_unstable();
        let expected: Vec<u64> = (1..14).map(|k| (1u64 << k) - 1).collect();
        assert_eq!(cuts, expected);
    }

    #[test]
    fn size_limit() {
        assert!(matches!(l1_realize(&path_graph(41).unwrap(), 2.0), Err(Error::ResourceLimit(_))));
    }
}
