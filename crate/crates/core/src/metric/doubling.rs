//! Doubling constant: the largest, over centers `x` and realized radii
//! `r = d(x, y)`, of the number of radius-`r/2` balls (centered at points of
//! the space) needed to cover the closed ball `B(x, r)`.

use super::FiniteMetricSpace;
use crate::error::{Error, Result};

/// Largest space accepted by [`CoverMode::Exact`].
pub const MAX_EXACT_POINTS: usize = 64;

// Half-ball membership slack, for distances produced by `powf`.
const HALF_BALL_RTOL: f64 = 1e-12;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CoverMode {
    /// Minimum cover by branch and bound.
    Exact,
    /// Greedy set cover; an upper bound on `Exact`.
    Greedy,
}

#[derive(Clone, PartialEq, Eq)]
struct Bits(Vec<u64>);

impl Bits {
    fn empty(n: usize) -> Self {
        Bits(vec![0; n.div_ceil(64)])
    }
    fn set(&mut self, i: usize) {
        self.0[i / 64] |= 1 << (i % 64);
    }
    fn has(&self, i: usize) -> bool {
        self.0[i / 64] >> (i % 64) & 1 == 1
    }
    fn count(&self) -> usize {
        self.0.iter().map(|w| w.count_ones() as usize).sum()
    }
    fn is_empty(&self) -> bool {
        self.0.iter().all(|&w| w == 0)
    }
    fn and_count(&self, other: &Bits) -> usize {
        self.0.iter().zip(&other.0).map(|(a, b)| (a & b).count_ones() as usize).sum()
    }
    fn minus(&self, other: &Bits) -> Bits {
        Bits(self.0.iter().zip(&other.0).map(|(a, b)| a & !b).collect())
    }
    fn subset_of(&self, other: &Bits) -> bool {
        self.0.iter().zip(&other.0).all(|(a, b)| a & !b == 0)
    }
    fn first(&self) -> Option<usize> {
        self.0
            .iter()
            .enumerate()
            .find(|(_, &w)| w != 0)
            .map(|(k, w)| k * 64 + w.trailing_zeros() as usize)
    }
    fn iter(&self) -> impl Iterator<Item = usize> + '_ {
        self.0.iter().enumerate().flat_map(|(k, &w)| {
            (0..64).filter(move |b| w >> b & 1 == 1).map(move |b| k * 64 + b)
        })
    }
}

/// Universe `B(x, r)` and the half-balls restricted to it, with dominated sets removed.
fn cover_instance(m: &FiniteMetricSpace, x: usize, r: f64) -> (Bits, Vec<Bits>) {
    let n = m.len();
    let mut universe = Bits::empty(n);
    for z in 0..n {
        if m.get(x, z) <= r {
            universe.set(z);
        }
    }
    let half = 0.5 * r * (1.0 + HALF_BALL_RTOL);
    let mut sets: Vec<Bits> = Vec::new();
    for c in 0..n {
        let mut s = Bits::empty(n);
        for z in universe.iter() {
            if m.get(c, z) <= half {
                s.set(z);
            }
        }
        if !s.is_empty() {
            sets.push(s);
        }
    }
    sets.sort_by_key(|s| std::cmp::Reverse(s.count()));
    let mut kept: Vec<Bits> = Vec::with_capacity(sets.len());
    for s in sets {
        if !kept.iter().any(|k| s.subset_of(k)) {
            kept.push(s);
        }
    }
    (universe, kept)
}

fn greedy_cover(universe: &Bits, sets: &[Bits]) -> usize {
    let mut left = universe.clone();
    let mut count = 0;
    while !left.is_empty() {
        let best = sets
            .iter()
            .max_by_key(|s| s.and_count(&left))
            .expect("every point lies in its own half-ball");
        left = left.minus(best);
        count += 1;
    }
    count
}

struct BranchAndBound<'a> {
    sets: &'a [Bits],
    max_size: usize,
    best: usize,
}

impl BranchAndBound<'_> {
    fn search(&mut self, left: &Bits, used: usize) {
        if left.is_empty() {
            self.best = self.best.min(used);
            return;
        }
        let lower = used + left.count().div_ceil(self.max_size);
        if lower >= self.best {
            return;
        }
        // branch on the uncovered point with the fewest covering sets
        let mut pick = left.first().unwrap();
        let mut fewest = usize::MAX;
        for z in left.iter() {
            let c = self.sets.iter().filter(|s| s.has(z)).count();
            if c < fewest {
                fewest = c;
                pick = z;
            }
        }
        let mut options: Vec<&Bits> = self.sets.iter().filter(|s| s.has(pick)).collect();
        options.sort_by_key(|s| std::cmp::Reverse(s.and_count(left)));
        for s in options {
            self.search(&left.minus(s), used + 1);
        }
    }
}

fn exact_cover(universe: &Bits, sets: &[Bits], incumbent: usize) -> usize {
    let max_size = sets.iter().map(Bits::count).max().unwrap_or(1).max(1);
    let mut bb = BranchAndBound { sets, max_size, best: incumbent };
    bb.search(universe, 0);
    bb.best
}

/// Doubling constant of `m`; `1` for a single point.
pub fn doubling_constant(m: &FiniteMetricSpace, mode: CoverMode) -> Result<usize> {
    let n = m.len();
    if mode == CoverMode::Exact && n > MAX_EXACT_POINTS {
        return Err(Error::ResourceLimit(format!(
            "exact doubling constant limited to {MAX_EXACT_POINTS} points, got {n}"
        )));
    }
    let mut best = 1;
    for x in 0..n {
        let mut radii: Vec<f64> = (0..n).filter(|&y| y != x).map(|y| m.get(x, y)).collect();
        radii.sort_by(f64::total_cmp);
        radii.dedup();
        for r in radii {
            let (universe, sets) = cover_instance(m, x, r);
            let greedy = greedy_cover(&universe, &sets);
            let value = match mode {
                CoverMode::Greedy => greedy,
                // exact <= greedy, so nothing to gain when greedy cannot beat `best`
                CoverMode::Exact if greedy <= best => continue,
                CoverMode::Exact => exact_cover(&universe, &sets, greedy),
            };
            best = best.max(value);
        }
    }
    Ok(best)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn equilateral(n: usize) -> FiniteMetricSpace {
        FiniteMetricSpace::from_fn(None, n, |_, _| 1.0).unwrap()
    }

    fn line(n: usize) -> FiniteMetricSpace {
        FiniteMetricSpace::from_fn(None, n, |i, j| (j - i) as f64).unwrap()
    }

    /// Smallest cover by trying every subset of centers.
    fn brute_force(m: &FiniteMetricSpace) -> usize {
        let n = m.len();
        let mut best = 1;
        for x in 0..n {
            for y in 0..n {
                if x == y {
                    continue;
                }
                let r = m.get(x, y);
                let ball: Vec<usize> = (0..n).filter(|&z| m.get(x, z) <= r).collect();
                let min = (1u32..1 << n)
                    .filter(|mask| {
                        ball.iter().all(|&z| (0..n).any(|c| mask >> c & 1 == 1 && m.get(c, z) <= r / 2.0))
                    })
                    .map(u32::count_ones)
                    .min()
                    .unwrap();
                best = best.max(min as usize);
            }
        }
        best
    }

    #[test]
    fn two_points() {
        let m = equilateral(2);
        assert_eq!(doubling_constant(&m, CoverMode::Exact).unwrap(), 2);
        assert_eq!(doubling_constant(&m, CoverMode::Greedy).unwrap(), 2);
    }

    #[test]
    fn equilateral_matches_brute_force() {
        for n in 2..=8 {
            let m = equilateral(n);
            assert_eq!(brute_force(&m), n);
            assert_eq!(doubling_constant(&m, CoverMode::Exact).unwrap(), n);
        }
    }

    #[test]
    fn line_matches_brute_force() {
        for n in 2..=9 {
            let m = line(n);
            assert_eq!(doubling_constant(&m, CoverMode::Exact).unwrap(), brute_force(&m), "n={n}");
        }
    }

    #[test]
    fn exact_limit() {
        let m = line(65);
        assert!(matches!(doubling_constant(&m, CoverMode::Exact), Err(Error::ResourceLimit(_))));
        assert!(doubling_constant(&m, CoverMode::Greedy).is_ok());
    }
}
