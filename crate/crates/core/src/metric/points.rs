use std::collections::HashMap;
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use super::FiniteMetricSpace;
use crate::error::{Error, Result};

/// `n` points in `R^d` measured with the `l_p` norm, `p` in `[1, inf]`.
///
/// Serializes as `{"p": <number or "inf">, "coords": [[..], ..]}`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "PointFile", into = "PointFile")]
pub struct PointSet {
    p: f64,
    d: usize,
    coords: Vec<f64>,
}

pub fn lp_norm(v: &[f64], p: f64) -> f64 {
    if p == 1.0 {
        v.iter().map(|x| x.abs()).sum()
    } else if p == 2.0 {
        v.iter().map(|x| x * x).sum::<f64>().sqrt()
    } else if p.is_infinite() {
        v.iter().fold(0.0, |m, x| m.max(x.abs()))
    } else {
        v.iter().map(|x| x.abs().powf(p)).sum::<f64>().powf(1.0 / p)
    }
}

pub fn lp_distance(a: &[f64], b: &[f64], p: f64) -> f64 {
    debug_assert_eq!(a.len(), b.len());
    if p == 1.0 {
        a.iter().zip(b).map(|(x, y)| (x - y).abs()).sum()
    } else if p == 2.0 {
        a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum::<f64>().sqrt()
    } else if p.is_infinite() {
        a.iter().zip(b).fold(0.0, |m, (x, y)| m.max((x - y).abs()))
    } else {
        a.iter()
            .zip(b)
            .map(|(x, y)| (x - y).abs().powf(p))
            .sum::<f64>()
            .powf(1.0 / p)
    }
}

fn check_exponent(p: f64) -> Result<()> {
    if p >= 1.0 && !p.is_nan() {
        Ok(())
    } else {
        Err(Error::InvalidParameter(format!("exponent p = {p} must lie in [1, inf]")))
    }
}

#[derive(Serialize, Deserialize)]
#[serde(untagged)]
enum Exponent {
    Finite(f64),
    Named(String),
}

#[derive(Serialize, Deserialize)]
struct PointFile {
    p: Exponent,
    coords: Vec<Vec<f64>>,
}

impl From<PointSet> for PointFile {
    fn from(ps: PointSet) -> Self {
        let p = if ps.p.is_infinite() { Exponent::Named("inf".into()) } else { Exponent::Finite(ps.p) };
        PointFile { p, coords: ps.rows().map(<[f64]>::to_vec).collect() }
    }
}

impl TryFrom<PointFile> for PointSet {
    type Error = Error;

    fn try_from(f: PointFile) -> Result<Self> {
        let p = match f.p {
            Exponent::Finite(p) => p,
            Exponent::Named(s) => parse_exponent(&s)?,
        };
        PointSet::new(p, f.coords)
    }
}

fn parse_exponent(v: &str) -> Result<f64> {
    match v.trim() {
        "inf" | "infinity" | "Inf" | "∞" => Ok(f64::INFINITY),
        v => v.parse().map_err(|_| Error::Parse(format!("bad exponent '{v}'"))),
    }
}

fn format_exponent(p: f64) -> String {
    if p.is_infinite() {
        "inf".into()
    } else {
        p.to_string()
    }
}

impl PointSet {
    pub fn new(p: f64, rows: Vec<Vec<f64>>) -> Result<Self> {
        let d = rows.first().map_or(0, Vec::len);
        if let Some((i, r)) = rows.iter().enumerate().find(|(_, r)| r.len() != d) {
            return Err(Error::ShapeError(format!("row {i} has {} coordinates, expected {d}", r.len())));
        }
        Self::from_flat(p, d, rows.into_iter().flatten().collect())
    }

    pub fn from_flat(p: f64, d: usize, coords: Vec<f64>) -> Result<Self> {
        check_exponent(p)?;
        if d == 0 || coords.is_empty() || !coords.len().is_multiple_of(d) {
            return Err(Error::ShapeError(format!(
                "{} coordinates do not form rows of dimension {d} (need n, d >= 1)",
                coords.len()
            )));
        }
        if let Some(pos) = coords.iter().position(|x| !x.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "non-finite coordinate at row {}, column {}",
                pos / d,
                pos % d
            )));
        }
        Ok(Self { p, d, coords })
    }

    pub fn p(&self) -> f64 {
        self.p
    }

    pub fn dim(&self) -> usize {
        self.d
    }

    pub fn len(&self) -> usize {
        self.coords.len() / self.d
    }

    pub fn is_empty(&self) -> bool {
        self.coords.is_empty()
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.coords[i * self.d..(i + 1) * self.d]
    }

    pub fn rows(&self) -> impl Iterator<Item = &[f64]> {
        self.coords.chunks_exact(self.d)
    }

    pub fn coords(&self) -> &[f64] {
        &self.coords
    }

    /// Same coordinates, different norm.
    pub fn with_exponent(&self, p: f64) -> Result<Self> {
        check_exponent(p)?;
        Ok(Self { p, ..self.clone() })
    }

    pub fn distance(&self, i: usize, j: usize) -> f64 {
        lp_distance(self.row(i), self.row(j), self.p)
    }

    /// Pairwise distances without the distinctness check; collapsed pairs give zeros.
    pub fn distance_matrix(&self) -> Result<FiniteMetricSpace> {
        FiniteMetricSpace::from_fn(None, self.len(), |i, j| self.distance(i, j))
    }

    /// First pair of identical rows, if any.
    pub fn find_duplicate(&self) -> Option<(usize, usize)> {
        let mut seen: HashMap<Vec<u64>, usize> = HashMap::new();
        for (i, r) in self.rows().enumerate() {
            // +0.0 normalizes -0.0
            let key: Vec<u64> = r.iter().map(|x| (x + 0.0).to_bits()).collect();
            if let Some(&j) = seen.get(&key) {
                return Some((j, i));
            }
            seen.insert(key, i);
        }
        None
    }

    /// CSV with a `p=<value>` header line and one row per point.
    pub fn to_csv(&self) -> String {
        let mut s = format!("p={}\n", format_exponent(self.p));
        for r in self.rows() {
            let line: Vec<String> = r.iter().map(|x| x.to_string()).collect();
            let _ = writeln!(s, "{}", line.join(","));
        }
        s
    }

    pub fn from_csv(text: &str) -> Result<Self> {
        let mut lines = text.lines().map(str::trim).filter(|l| !l.is_empty());
        let header = lines
            .next()
            .ok_or_else(|| Error::Parse("empty point-set file".into()))?;
        let value = header
            .strip_prefix("p=")
            .ok_or_else(|| Error::Parse(format!("expected header 'p=<value>', got '{header}'")))?;
        let p = parse_exponent(value)?;
        let rows = lines
            .enumerate()
            .map(|(i, l)| {
                l.split(',')
                    .map(|t| {
                        t.trim()
                            .parse::<f64>()
                            .map_err(|_| Error::Parse(format!("row {i}: bad number '{t}'")))
                    })
                    .collect::<Result<Vec<f64>>>()
            })
            .collect::<Result<Vec<_>>>()?;
        Self::new(p, rows)
    }
}

/// Pairwise `l_p` distances of distinct points.
pub fn metric_from_points(ps: &PointSet) -> Result<FiniteMetricSpace> {
    if let Some((i, j)) = ps.find_duplicate() {
        return Err(Error::DegenerateInput(format!("points {i} and {j} coincide")));
    }
    ps.distance_matrix()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn basis(p: f64) -> PointSet {
        PointSet::new(p, vec![vec![1.0, 0.0], vec![0.0, 1.0]]).unwrap()
    }

    #[test]
    fn basis_distances() {
        assert_eq!(metric_from_points(&basis(1.0)).unwrap().get(0, 1), 2.0);
        assert_eq!(metric_from_points(&basis(2.0)).unwrap().get(0, 1), 2f64.sqrt());
        assert_eq!(metric_from_points(&basis(f64::INFINITY)).unwrap().get(0, 1), 1.0);
    }

    #[test]
    fn single_point_gives_zero_matrix() {
        let m = metric_from_points(&PointSet::new(2.0, vec![vec![3.0, 4.0]]).unwrap()).unwrap();
        assert_eq!(m.len(), 1);
        assert_eq!(m.get(0, 0), 0.0);
    }

    #[test]
    fn duplicates_name_the_indices() {
        let ps = PointSet::new(1.0, vec![vec![1.0], vec![2.0], vec![1.0]]).unwrap();
        match metric_from_points(&ps) {
            Err(Error::DegenerateInput(msg)) => assert!(msg.contains("0 and 2"), "{msg}"),
            other => panic!("{other:?}"),
        }
        let signed = PointSet::new(1.0, vec![vec![0.0], vec![-0.0]]).unwrap();
        assert!(metric_from_points(&signed).is_err());
    }

    #[test]
    fn rejects_bad_shapes_and_exponents() {
        assert!(PointSet::new(0.5, vec![vec![1.0]]).is_err());
        assert!(PointSet::new(1.0, vec![]).is_err());
        assert!(PointSet::new(1.0, vec![vec![1.0], vec![1.0, 2.0]]).is_err());
        assert!(PointSet::new(1.0, vec![vec![f64::NAN]]).is_err());
    }

    #[test]
    fn csv_round_trip() {
        let ps = PointSet::new(f64::INFINITY, vec![vec![0.1, -2.5], vec![1e-17, 3.0]]).unwrap();
        let text = ps.to_csv();
        assert!(text.starts_with("p=inf\n"));
        assert_eq!(PointSet::from_csv(&text).unwrap(), ps);
        let ps = basis(1.5);
        assert_eq!(PointSet::from_csv(&ps.to_csv()).unwrap(), ps);
        assert!(PointSet::from_csv("1,2\n").is_err());
    }
}
