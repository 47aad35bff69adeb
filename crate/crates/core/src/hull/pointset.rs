use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::simplex::ProbabilityVector;

/// Points closer than this are treated as one point.
pub const DEDUP_TOL: f64 = 1e-9;

/// An immutable, deduplicated set of points in ℝ^d stored row-major.
///
/// `source_index(i)` maps a stored point back to the position of its first
/// occurrence in the input.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "PointSetRepr", into = "PointSetRepr")]
pub struct PointSet {
    coords: Vec<f64>,
    dim: usize,
    source: Vec<usize>,
}

#[derive(Serialize, Deserialize)]
struct PointSetRepr {
    dim: usize,
    points: Vec<Vec<f64>>,
}

impl TryFrom<PointSetRepr> for PointSet {
    type Error = Error;
    fn try_from(r: PointSetRepr) -> Result<Self> {
        let ps = PointSet::from_rows(&r.points)?;
        if !r.points.is_empty() && ps.dim != r.dim {
            return Err(Error::DimensionMismatch {
                expected: r.dim,
                got: ps.dim,
            });
        }
        Ok(ps)
    }
}

impl From<PointSet> for PointSetRepr {
    fn from(ps: PointSet) -> Self {
        PointSetRepr {
            dim: ps.dim,
            points: ps.iter().map(<[f64]>::to_vec).collect(),
        }
    }
}

impl PointSet {
    /// Builds a set from a flat row-major buffer of `dim`-vectors.
    pub fn from_flat(coords: Vec<f64>, dim: usize) -> Result<Self> {
        if dim == 0 {
            return Err(Error::InvalidConfig("point dimension must be positive".into()));
        }
        if coords.len() % dim != 0 {
            return Err(Error::DimensionMismatch {
                expected: dim,
                got: coords.len() % dim,
            });
        }
        if let Some(x) = coords.iter().find(|x| !x.is_finite()) {
            return Err(Error::InvalidConfig(format!("non-finite coordinate {x}")));
        }
        let n = coords.len() / dim;
        let keep = dedup_mask(&coords, dim, n);
        let mut flat = Vec::with_capacity(coords.len());
        let mut source = Vec::new();
        for i in (0..n).filter(|&i| keep[i]) {
            flat.extend_from_slice(&coords[i * dim..(i + 1) * dim]);
            source.push(i);
        }
        Ok(PointSet {
            coords: flat,
            dim,
            source,
        })
    }

    pub fn from_rows<R: AsRef<[f64]>>(rows: &[R]) -> Result<Self> {
        let Some(first) = rows.first() else {
            return Ok(PointSet {
                coords: Vec::new(),
                dim: 0,
                source: Vec::new(),
            });
        };
        let dim = first.as_ref().len();
        let mut flat = Vec::with_capacity(rows.len() * dim);
        for r in rows {
            let r = r.as_ref();
            if r.len() != dim {
                return Err(Error::DimensionMismatch {
                    expected: dim,
                    got: r.len(),
                });
            }
            flat.extend_from_slice(r);
        }
        Self::from_flat(flat, dim)
    }

    pub fn from_probability_vectors(points: &[ProbabilityVector]) -> Result<Self> {
        let rows: Vec<&[f64]> = points.iter().map(ProbabilityVector::as_slice).collect();
        Self::from_rows(&rows)
    }

    /// Number of distinct points.
    pub fn len(&self) -> usize {
        self.source.len()
    }

    pub fn is_empty(&self) -> bool {
        self.source.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn point(&self, i: usize) -> &[f64] {
        &self.coords[i * self.dim..(i + 1) * self.dim]
    }

    pub fn source_index(&self, i: usize) -> usize {
        self.source[i]
    }

    pub fn coords(&self) -> &[f64] {
        &self.coords
    }

    pub fn iter(&self) -> impl Iterator<Item = &[f64]> + '_ {
        self.coords.chunks_exact(self.dim.max(1))
    }

    /// Writes one point per line, comma separated, 17 significant digits.
    pub fn to_csv(&self) -> String {
        let mut out = String::new();
        for p in self.iter() {
            let row: Vec<String> = p.iter().map(|x| format!("{x:.16e}")).collect();
            out.push_str(&row.join(","));
            out.push('\n');
        }
        out
    }

    /// Parses one point per non-empty line; `#` starts a comment line.
    pub fn from_csv(text: &str) -> Result<Self> {
        let rows = parse_csv_rows(text)?;
        Self::from_rows(&rows)
    }
}

pub(crate) fn parse_csv_rows(text: &str) -> Result<Vec<Vec<f64>>> {
    text.lines()
        .enumerate()
        .filter(|(_, l)| !l.trim().is_empty() && !l.trim_start().starts_with('#'))
        .map(|(ln, l)| {
            l.split(',')
                .map(|f| {
                    f.trim().parse::<f64>().map_err(|e| Error::Parse {
                        line: ln + 1,
                        msg: format!("{e}: {f:?}"),
                    })
                })
                .collect()
        })
        .collect()
}

pub(crate) fn dist2(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

fn dedup_mask(coords: &[f64], dim: usize, n: usize) -> Vec<bool> {
    let key = |i: usize| coords[i * dim];
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| key(a).total_cmp(&key(b)).then(a.cmp(&b)));
    let mut pos = vec![0; n];
    for (p, &i) in order.iter().enumerate() {
        pos[i] = p;
    }
    let mut keep = vec![true; n];
    let tol2 = DEDUP_TOL * DEDUP_TOL;
    for i in 0..n {
        if !keep[i] {
            continue;
        }
        let pi = &coords[i * dim..(i + 1) * dim];
        let mut visit = |k: usize| {
            if k > i && keep[k] && dist2(pi, &coords[k * dim..(k + 1) * dim]) < tol2 {
                keep[k] = false;
            }
        };
        for &k in order[pos[i] + 1..]
            .iter()
            .take_while(|&&k| key(k) - key(i) < DEDUP_TOL)
        {
            visit(k);
        }
        for &k in order[..pos[i]]
            .iter()
            .rev()
            .take_while(|&&k| key(i) - key(k) < DEDUP_TOL)
        {
            visit(k);
        }
    }
    keep
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn deduplicates_near_copies() {
        let ps = PointSet::from_rows(&[
            vec![0.5, 0.5],
            vec![1.0, 0.0],
            vec![0.5 + 1e-12, 0.5],
            vec![0.0, 1.0],
            vec![1.0, 0.0],
        ])
        .unwrap();
        assert_eq!(ps.len(), 3);
        assert_eq!(
            (0..3).map(|i| ps.source_index(i)).collect::<Vec<_>>(),
            vec![0, 1, 3]
        );
    }

    #[test]
    fn rejects_ragged_rows() {
        assert!(PointSet::from_rows(&[vec![1.0, 0.0], vec![1.0]]).is_err());
    }

    #[test]
    fn csv_and_json_round_trip() {
        let ps = PointSet::from_rows(&[vec![0.1, 0.9], vec![1.0 / 3.0, 2.0 / 3.0]]).unwrap();
        assert_eq!(PointSet::from_csv(&ps.to_csv()).unwrap(), ps);
        let js = serde_json::to_string(&ps).unwrap();
        assert_eq!(serde_json::from_str::<PointSet>(&js).unwrap(), ps);
    }
}
