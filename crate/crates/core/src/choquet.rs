//! Barycentric (Choquet) weights of points inside a simplex frame.
//!
//! When the hull of `M = J` affinely independent vectors in Δ^{J-1} is a
//! simplex, every point of it has exactly one representing probability
//! measure on the vertices. Two independent routes compute it: a direct
//! linear solve and nonnegative least squares.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::hull::{is_extreme, point_to_hull_distance, PointSet, DEFAULT_EXTREME_TOL};
use crate::simplex::ProbabilityVector;

/// Distance beyond which a point is considered outside the frame hull.
pub const MEMBERSHIP_TOL: f64 = 1e-8;
/// Largest condition number accepted by [`choquet_measure`].
pub const MAX_COND: f64 = 1e10;
/// Smallest singular value of the vertex differences for a valid frame.
pub const MIN_SINGULAR: f64 = 1e-9;
/// Negative weights down to this value are clipped silently.
pub const CLIP_TOL: f64 = 1e-10;

/// `M = J` affinely independent, pairwise identifiable vertices in Δ^{J-1}.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<ProbabilityVector>", into = "Vec<ProbabilityVector>")]
pub struct SimplexFrame {
    vertices: Vec<ProbabilityVector>,
    /// Columns are the vertices.
    matrix: DMatrix<f64>,
    cond: f64,
}

impl TryFrom<Vec<ProbabilityVector>> for SimplexFrame {
    type Error = Error;
    fn try_from(v: Vec<ProbabilityVector>) -> Result<Self> {
        make_frame(&v)
    }
}

impl From<SimplexFrame> for Vec<ProbabilityVector> {
    fn from(f: SimplexFrame) -> Self {
        f.vertices
    }
}

impl SimplexFrame {
    pub fn vertices(&self) -> &[ProbabilityVector] {
        &self.vertices
    }

    pub fn len(&self) -> usize {
        self.vertices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vertices.is_empty()
    }

    /// Condition number of the vertex matrix.
    pub fn cond(&self) -> f64 {
        self.cond
    }

    /// The frame whose vertices are the standard basis of ℝ^dim.
    pub fn standard(dim: usize) -> Result<Self> {
        let v = (0..dim)
            .map(|j| ProbabilityVector::vertex(dim, j))
            .collect::<Result<Vec<_>>>()?;
        make_frame(&v)
    }
}

/// A probability measure on the vertices of a frame.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChoquetMeasure {
    pub weights: ProbabilityVector,
}

/// Validates `vertices` as a simplex frame.
pub fn make_frame(vertices: &[ProbabilityVector]) -> Result<SimplexFrame> {
    let m = vertices.len();
    let j = vertices.first().map_or(0, ProbabilityVector::dim);
    if let Some(v) = vertices.iter().find(|v| v.dim() != j) {
        return Err(Error::DimensionMismatch {
            expected: j,
            got: v.dim(),
        });
    }
    if m != j {
        return Err(Error::InvalidFrame(format!(
            "{m} vertices in dimension {j}; a simplex frame needs M = J"
        )));
    }
    let diffs = DMatrix::from_fn(m - 1, j, |r, c| vertices[r + 1][c] - vertices[0][c]);
    let smallest = diffs
        .singular_values()
        .iter()
        .copied()
        .fold(f64::INFINITY, f64::min);
    if !(smallest > MIN_SINGULAR) {
        return Err(Error::InvalidFrame(format!(
            "vertices are affinely dependent (smallest singular value {smallest:e})"
        )));
    }
    let ps = PointSet::from_probability_vectors(vertices)?;
    for k in 0..m {
        if !is_extreme(k, &ps, DEFAULT_EXTREME_TOL)? {
            return Err(Error::InvalidFrame(format!(
                "vertex {k} lies in the hull of the others"
            )));
        }
    }
    let matrix = DMatrix::from_fn(j, m, |r, c| vertices[c][r]);
    let sv = matrix.singular_values();
    let cond = sv.max() / sv.min();
    Ok(SimplexFrame {
        vertices: vertices.to_vec(),
        matrix,
        cond,
    })
}

fn check_point(p: &ProbabilityVector, frame: &SimplexFrame) -> Result<()> {
    if p.dim() != frame.matrix.nrows() {
        return Err(Error::DimensionMismatch {
            expected: frame.matrix.nrows(),
            got: p.dim(),
        });
    }
    if frame.cond > MAX_COND {
        return Err(Error::IllConditioned { cond: frame.cond });
    }
    Ok(())
}

/// Clips small negatives, rejecting genuinely exterior points.
fn finalize(raw: &[f64], p: &ProbabilityVector, frame: &SimplexFrame) -> Result<ChoquetMeasure> {
    if raw.iter().any(|&w| w < -CLIP_TOL) {
        let ps = PointSet::from_probability_vectors(&frame.vertices)?;
        let distance = point_to_hull_distance(p.as_slice(), &ps)?;
        if distance > MEMBERSHIP_TOL {
            return Err(Error::OutsideHull { distance });
        }
    }
    let clipped: Vec<f64> = raw.iter().map(|&w| w.max(0.0)).collect();
    let s: f64 = clipped.iter().sum();
    let weights = if s > 0.0 && (s - 1.0).abs() > 1e-15 {
        clipped.iter().map(|w| w / s).collect()
    } else {
        clipped
    };
    Ok(ChoquetMeasure {
        weights: ProbabilityVector::new(&weights)?,
    })
}

/// Solves `p = Σ_ℓ w_ℓ f_ℓ` by LU factorization of the vertex matrix.
pub fn choquet_measure(p: &ProbabilityVector, frame: &SimplexFrame) -> Result<ChoquetMeasure> {
    check_point(p, frame)?;
    let rhs = DVector::from_column_slice(p.as_slice());
    let w = frame
        .matrix
        .clone()
        .lu()
        .solve(&rhs)
        .ok_or_else(|| Error::Numeric("singular frame matrix".into()))?;
    finalize(w.as_slice(), p, frame)
}

/// Same measure by nonnegative least squares on the augmented system
/// `[F; 1ᵀ] w ≈ [p; 1]`, `w ≥ 0`.
pub fn choquet_measure_nnls(p: &ProbabilityVector, frame: &SimplexFrame) -> Result<ChoquetMeasure> {
    check_point(p, frame)?;
    let (j, m) = frame.matrix.shape();
    let a = DMatrix::from_fn(j + 1, m, |r, c| if r < j { frame.matrix[(r, c)] } else { 1.0 });
    let b = DVector::from_fn(j + 1, |r, _| if r < j { p[r] } else { 1.0 });
    let w = nnls(&a, &b)?;
    let resid = (&a * &w - &b).norm();
    if resid > MEMBERSHIP_TOL {
        let ps = PointSet::from_probability_vectors(&frame.vertices)?;
        let distance = point_to_hull_distance(p.as_slice(), &ps)?;
        if distance > MEMBERSHIP_TOL {
            return Err(Error::OutsideHull { distance });
        }
    }
    finalize(w.as_slice(), p, frame)
}

/// The convex combination `Σ_ℓ w_ℓ f_ℓ`.
pub fn reconstruct(w: &ChoquetMeasure, frame: &SimplexFrame) -> Result<ProbabilityVector> {
    if w.weights.dim() != frame.len() {
        return Err(Error::DimensionMismatch {
            expected: frame.len(),
            got: w.weights.dim(),
        });
    }
    let v = &frame.matrix * DVector::from_column_slice(w.weights.as_slice());
    ProbabilityVector::new(v.as_slice())
}

/// Lawson–Hanson active-set nonnegative least squares.
pub fn nnls(a: &DMatrix<f64>, b: &DVector<f64>) -> Result<DVector<f64>> {
    let n = a.ncols();
    let tol = 1e-14 * a.norm().max(1.0) * b.norm().max(1.0) * n as f64;
    let mut x = DVector::zeros(n);
    let mut passive = vec![false; n];
    let solve_passive = |passive: &[bool]| -> Result<DVector<f64>> {
        let idx: Vec<usize> = (0..n).filter(|&i| passive[i]).collect();
        let sub = a.select_columns(&idx);
        let sol = sub
            .svd(true, true)
            .solve(b, 1e-15)
            .map_err(|e| Error::Numeric(e.to_string()))?;
        let mut s = DVector::zeros(n);
        for (k, &i) in idx.iter().enumerate() {
            s[i] = sol[k];
        }
        Ok(s)
    };
    for _ in 0..3 * n + 10 {
        let grad = a.transpose() * (b - a * &x);
        let Some(j) = (0..n)
            .filter(|&i| !passive[i] && grad[i] > tol)
            .max_by(|&p, &q| grad[p].total_cmp(&grad[q]))
        else {
            return Ok(x);
        };
        passive[j] = true;
        loop {
            let s = solve_passive(&passive)?;
            if (0..n).filter(|&i| passive[i]).all(|i| s[i] > 0.0) {
                x = s;
                break;
            }
            let alpha = (0..n)
                .filter(|&i| passive[i] && s[i] <= 0.0)
                .map(|i| x[i] / (x[i] - s[i]))
                .fold(f64::INFINITY, f64::min);
            x += alpha * (&s - &x);
            for i in 0..n {
                if passive[i] && x[i] <= tol {
                    passive[i] = false;
                    x[i] = 0.0;
                }
            }
            if !passive.iter().any(|&p| p) {
                break;
            }
        }
    }
    Err(Error::Numeric("NNLS did not converge".into()))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pv(v: &[f64]) -> ProbabilityVector {
        ProbabilityVector::new(v).unwrap()
    }

    #[test]
    fn basis_frame() {
        let f = SimplexFrame::standard(3).unwrap();
        let w = choquet_measure(&pv(&[0.2, 0.3, 0.5]), &f).unwrap();
        assert_eq!(w.weights.as_slice(), &[0.2, 0.3, 0.5]);
        let n = choquet_measure_nnls(&pv(&[0.2, 0.3, 0.5]), &f).unwrap();
        for (a, b) in n.weights.as_slice().iter().zip([0.2, 0.3, 0.5]) {
            assert!((a - b).abs() < 1e-12);
        }
        let bary = reconstruct(
            &ChoquetMeasure {
                weights: pv(&[1.0, 1.0, 1.0]),
            },
            &f,
        )
        .unwrap();
        for x in bary.as_slice() {
            assert!((x - 1.0 / 3.0).abs() < 1e-15);
        }
    }

    #[test]
    fn vertex_gets_unit_mass() {
        let f = make_frame(&[
            pv(&[0.7, 0.2, 0.1]),
            pv(&[0.1, 0.8, 0.1]),
            pv(&[0.2, 0.1, 0.7]),
        ])
        .unwrap();
        let w = choquet_measure(&f.vertices()[1].clone(), &f).unwrap();
        assert!((w.weights[1] - 1.0).abs() < 1e-12);
        assert!(w.weights[0] < 1e-12 && w.weights[2] < 1e-12);
    }

    #[test]
    fn frame_errors() {
        let dep = make_frame(&[pv(&[1.0, 0.0, 0.0]), pv(&[0.0, 1.0, 0.0]), pv(&[0.5, 0.5, 0.0])]);
        assert!(matches!(dep, Err(Error::InvalidFrame(m)) if m.contains("affinely dependent")));
        let wrong_m = make_frame(&[pv(&[1.0, 0.0, 0.0]), pv(&[0.0, 1.0, 0.0])]);
        assert!(matches!(wrong_m, Err(Error::InvalidFrame(m)) if m.contains("M = J")));
    }

    #[test]
    fn exterior_point_rejected_with_distance() {
        let f = make_frame(&[
            pv(&[0.6, 0.2, 0.2]),
            pv(&[0.2, 0.6, 0.2]),
            pv(&[0.2, 0.2, 0.6]),
        ])
        .unwrap();
        match choquet_measure(&pv(&[1.0, 0.0, 0.0]), &f) {
            Err(Error::OutsideHull { distance }) => assert!(distance > 0.1),
            other => panic!("expected exterior error, got {other:?}"),
        }
        assert!(matches!(
            choquet_measure_nnls(&pv(&[1.0, 0.0, 0.0]), &f),
            Err(Error::OutsideHull { .. })
        ));
    }

    #[test]
    fn boundary_noise_is_clipped() {
        let f = SimplexFrame::standard(3).unwrap();
        let w = choquet_measure(&pv(&[-1e-13, 0.5, 0.5]), &f).unwrap();
        assert_eq!(w.weights[0], 0.0);
    }

    #[test]
    fn ill_conditioned_frame_rejected() {
        let e = 1e-9;
        let tiny = make_frame(&[
            pv(&[1.0 - e, e, 0.0]),
            pv(&[1.0 - 2.0 * e, e, e]),
            pv(&[1.0 - e, 0.0, e]),
        ]);
        assert!(matches!(tiny, Err(Error::InvalidFrame(_))));
        let mut f = SimplexFrame::standard(3).unwrap();
        f.cond = 1e12;
        assert!(matches!(
            choquet_measure(&pv(&[0.2, 0.3, 0.5]), &f),
            Err(Error::IllConditioned { .. })
        ));
    }

    #[test]
    fn frame_json_round_trip() {
        let f = SimplexFrame::standard(3).unwrap();
        let s = serde_json::to_string(&f).unwrap();
        assert_eq!(s, "[[1.0,0.0,0.0],[0.0,1.0,0.0],[0.0,0.0,1.0]]");
        assert_eq!(serde_json::from_str::<SimplexFrame>(&s).unwrap(), f);
    }
}
