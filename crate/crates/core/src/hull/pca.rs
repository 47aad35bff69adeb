//! Principal-component projection via SVD of the centered data.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

use super::pointset::PointSet;

/// Singular values below this fraction of the largest count as zero.
pub const RANK_REL_TOL: f64 = 1e-10;

/// Rows projected onto the leading right singular directions.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PcaProjection {
    /// One projected row per input row, in input order.
    pub rows: Vec<Vec<f64>>,
    /// Column means subtracted before projection.
    pub mean: Vec<f64>,
    /// Principal directions (unit vectors in the input space).
    pub components: Vec<Vec<f64>>,
    /// Share of total variance per retained direction.
    pub explained_variance_ratio: Vec<f64>,
    /// Numerical rank of the centered data.
    pub rank: usize,
}

impl PcaProjection {
    pub fn point_set(&self) -> Result<PointSet> {
        PointSet::from_rows(&self.rows)
    }

    pub fn dim(&self) -> usize {
        self.components.len()
    }

    /// Maps projected coordinates back to the input space.
    pub fn reconstruct(&self, projected: &[f64]) -> Vec<f64> {
        let mut out = self.mean.clone();
        for (c, &z) in self.components.iter().zip(projected) {
            for (o, &v) in out.iter_mut().zip(c) {
                *o += z * v;
            }
        }
        out
    }
}

struct Decomposition {
    mean: Vec<f64>,
    centered: DMatrix<f64>,
    /// (singular value, right singular vector), descending.
    pairs: Vec<(f64, Vec<f64>)>,
    rank: usize,
}

fn decompose(data: &[Vec<f64>]) -> Result<Decomposition> {
    let rows = data.len();
    let cols = data.first().map_or(0, Vec::len);
    if rows == 0 || cols == 0 {
        return Err(Error::Degenerate("empty data matrix".into()));
    }
    if let Some(r) = data.iter().find(|r| r.len() != cols) {
        return Err(Error::DimensionMismatch {
            expected: cols,
            got: r.len(),
        });
    }
    let mut m = DMatrix::from_fn(rows, cols, |i, j| data[i][j]);
    let mean: Vec<f64> = (0..cols).map(|j| m.column(j).mean()).collect();
    for j in 0..cols {
        m.column_mut(j).add_scalar_mut(-mean[j]);
    }
    let svd = m.clone().svd(false, true);
    let v_t = svd
        .v_t
        .ok_or_else(|| Error::Numeric("SVD did not return right singular vectors".into()))?;
    let mut pairs: Vec<(f64, Vec<f64>)> = svd
        .singular_values
        .iter()
        .enumerate()
        .map(|(k, &s)| {
            let mut v: Vec<f64> = v_t.row(k).iter().copied().collect();
            // sign convention: largest-magnitude entry positive
            let lead = v
                .iter()
                .copied()
                .fold(0.0f64, |a, x| if x.abs() > a.abs() { x } else { a });
            if lead < 0.0 {
                v.iter_mut().for_each(|x| *x = -*x);
            }
            (s, v)
        })
        .collect();
    pairs.sort_by(|a, b| b.0.total_cmp(&a.0));
    let top = pairs.first().map_or(0.0, |p| p.0);
    let rank = if top > 0.0 {
        pairs.iter().filter(|p| p.0 > RANK_REL_TOL * top).count()
    } else {
        0
    };
    Ok(Decomposition {
        mean,
        centered: m,
        pairs,
        rank,
    })
}

/// Largest projection dimension usable for `data`: bounded by `rows − 1`,
/// `cols` and the numerical rank of the centered matrix.
pub fn attainable_dim(data: &[Vec<f64>]) -> Result<usize> {
    let rows = data.len();
    let cols = data.first().map_or(0, Vec::len);
    let dec = decompose(data)?;
    Ok(dec.rank.min(rows.saturating_sub(1)).min(cols))
}

/// Projects the rows of `data` onto their top-`d` principal directions.
pub fn pca_project(data: &[Vec<f64>], d: usize) -> Result<PcaProjection> {
    let rows = data.len();
    let cols = data.first().map_or(0, Vec::len);
    if d < 2 || d > rows.saturating_sub(1).min(cols) {
        return Err(Error::InvalidConfig(format!(
            "projection dimension {d} must lie in 2..={} for a {rows}x{cols} matrix",
            rows.saturating_sub(1).min(cols)
        )));
    }
    project_unchecked(data, d)
}

/// Like [`pca_project`] without the `d ≥ 2` floor; used internally when a
/// one-dimensional projection is meaningful.
pub(crate) fn project_unchecked(data: &[Vec<f64>], d: usize) -> Result<PcaProjection> {
    let dec = decompose(data)?;
    if dec.rank < d {
        return Err(Error::RankDeficient {
            rank: dec.rank,
            requested: d,
            attainable: (2..=dec.rank).collect(),
        });
    }
    let total: f64 = dec.pairs.iter().map(|p| p.0 * p.0).sum();
    let components: Vec<Vec<f64>> = dec.pairs[..d].iter().map(|p| p.1.clone()).collect();
    let explained_variance_ratio = dec.pairs[..d].iter().map(|p| p.0 * p.0 / total).collect();
    let rows = (0..dec.centered.nrows())
        .map(|i| {
            let r = dec.centered.row(i);
            components
                .iter()
                .map(|c| r.iter().zip(c).map(|(a, b)| a * b).sum())
                .collect()
        })
        .collect();
    Ok(PcaProjection {
        rows,
        mean: dec.mean,
        components,
        explained_variance_ratio,
        rank: dec.rank,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::seed;
    use rand::Rng;

    fn dist(a: &[f64], b: &[f64]) -> f64 {
        a.iter().zip(b).map(|(x, y)| (x - y).powi(2)).sum::<f64>().sqrt()
    }

    #[test]
    fn centered_full_rank_data_is_isometric() {
        let data = vec![
            vec![1.0, 2.0],
            vec![-1.0, 0.5],
            vec![0.5, -1.5],
            vec![-0.5, -1.0],
        ];
        let p = pca_project(&data, 2).unwrap();
        for i in 0..4 {
            for k in 0..4 {
                let a = dist(&data[i], &data[k]);
                let b = dist(&p.rows[i], &p.rows[k]);
                assert!((a - b).abs() < 1e-9);
            }
        }
        assert!((p.explained_variance_ratio.iter().sum::<f64>() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn rank_three_reconstruction() {
        let mut rng = seed::rng(8);
        let factors: Vec<Vec<f64>> = (0..3)
            .map(|_| (0..7).map(|_| rng.random::<f64>() - 0.5).collect())
            .collect();
        let data: Vec<Vec<f64>> = (0..20)
            .map(|_| {
                let w: Vec<f64> = (0..3).map(|_| rng.random::<f64>()).collect();
                (0..7)
                    .map(|j| 1.0 + (0..3).map(|k| w[k] * factors[k][j]).sum::<f64>())
                    .collect()
            })
            .collect();
        let p = pca_project(&data, 3).unwrap();
        assert_eq!(p.rank, 3);
        for (row, proj) in data.iter().zip(&p.rows) {
            assert!(dist(row, &p.reconstruct(proj)) < 1e-8);
        }
        assert!((p.explained_variance_ratio.iter().sum::<f64>() - 1.0).abs() < 1e-9);
        match pca_project(&data, 4) {
            Err(Error::RankDeficient {
                rank, attainable, ..
            }) => {
                assert_eq!(rank, 3);
                assert_eq!(attainable, vec![2, 3]);
            }
            other => panic!("expected rank error, got {other:?}"),
        }
    }

    #[test]
    fn duplicated_rows_span_same_subspace() {
        let mut rng = seed::rng(2);
        let data: Vec<Vec<f64>> = (0..6)
            .map(|_| (0..4).map(|_| rng.random::<f64>()).collect())
            .collect();
        let doubled: Vec<Vec<f64>> = data.iter().chain(&data).cloned().collect();
        let a = pca_project(&data, 2).unwrap();
        let b = pca_project(&doubled, 2).unwrap();
        // compare orthogonal projectors
        for r in 0..4 {
            for c in 0..4 {
                let pa: f64 = a.components.iter().map(|v| v[r] * v[c]).sum();
                let pb: f64 = b.components.iter().map(|v| v[r] * v[c]).sum();
                assert!((pa - pb).abs() < 1e-9);
            }
        }
    }

    #[test]
    fn dimension_bounds() {
        let data = vec![vec![0.0, 1.0], vec![1.0, 0.0], vec![0.5, 0.5]];
        assert!(pca_project(&data, 1).is_err());
        assert!(pca_project(&data, 3).is_err());
        // collinear rows: rank 1
        assert!(matches!(
            pca_project(&data, 2),
            Err(Error::RankDeficient { rank: 1, .. })
        ));
    }
}
