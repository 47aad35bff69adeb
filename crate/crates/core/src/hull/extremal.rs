//! Extreme-point detection by distance to the hull of the other points.
//!
//! A point is extreme when its distance to the convex hull of all other
//! points exceeds `tol`. Computing that distance for every point against
//! the full set is quadratic, so [`extremal_set`] first screens points
//! against a growing working set of candidates (Clarkson's scheme): a point
//! within `tol` of the working set's hull is certainly not extreme, and a
//! point outside it exposes a new candidate through the separating
//! direction. Each surviving candidate is then tested exactly against the
//! full set, so the result matches the per-point definition.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exec::Execution;

use super::nearest::{min_norm_point, Members};
use super::pointset::PointSet;

/// Default extremality tolerance.
pub const DEFAULT_EXTREME_TOL: f64 = 1e-7;

/// Sorted indices (into the [`PointSet`]) of the extreme points.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ExtremalSet {
    pub indices: Vec<usize>,
    pub f0: usize,
}

fn require_two(ps: &PointSet) -> Result<()> {
    if ps.len() < 2 {
        return Err(Error::Degenerate(format!(
            "{} distinct point(s); at least 2 are required",
            ps.len()
        )));
    }
    Ok(())
}

/// Distance from point `i` to the hull of the other points.
pub fn distance_to_others(i: usize, ps: &PointSet) -> Result<f64> {
    require_two(ps)?;
    if i >= ps.len() {
        return Err(Error::IndexOutOfRange {
            index: i,
            len: ps.len(),
        });
    }
    let near = min_norm_point(
        ps.coords(),
        ps.dim(),
        Members::Range {
            n: ps.len(),
            exclude: Some(i),
        },
        ps.point(i),
        0.0,
        None,
    );
    Ok(near.dist2.sqrt())
}

/// True iff point `i` lies farther than `tol` from the hull of the others.
pub fn is_extreme(i: usize, ps: &PointSet, tol: f64) -> Result<bool> {
    require_two(ps)?;
    if i >= ps.len() {
        return Err(Error::IndexOutOfRange {
            index: i,
            len: ps.len(),
        });
    }
    let near = min_norm_point(
        ps.coords(),
        ps.dim(),
        Members::Range {
            n: ps.len(),
            exclude: Some(i),
        },
        ps.point(i),
        tol,
        None,
    );
    Ok(near.dist2 > tol * tol)
}

/// All extreme points of `ps`.
pub fn extremal_set(ps: &PointSet, tol: f64) -> Result<ExtremalSet> {
    extremal_set_with(ps, tol, Execution::default())
}

/// [`extremal_set`] with an explicit execution mode for the final
/// per-candidate checks.
pub fn extremal_set_with(ps: &PointSet, tol: f64, exec: Execution) -> Result<ExtremalSet> {
    require_two(ps)?;
    let candidates = screen_candidates(ps, tol);
    let verdicts = exec.map(candidates.len(), |k| verify(ps, &candidates, k, tol));
    let mut indices: Vec<usize> = candidates
        .iter()
        .zip(verdicts)
        .filter_map(|(&i, keep)| keep.then_some(i))
        .collect();
    indices.sort_unstable();
    Ok(ExtremalSet {
        f0: indices.len(),
        indices,
    })
}

fn argmax_dir(ps: &PointSet, dir: &[f64]) -> usize {
    let mut best = (f64::NEG_INFINITY, 0);
    for (i, p) in ps.iter().enumerate() {
        let v: f64 = p.iter().zip(dir).map(|(a, b)| a * b).sum();
        if v > best.0 {
            best = (v, i);
        }
    }
    best.1
}

/// Returns a superset of the extreme points; every point left out is within
/// `tol` of the hull of points other than itself.
fn screen_candidates(ps: &PointSet, tol: f64) -> Vec<usize> {
    let d = ps.dim();
    let mut in_set = vec![false; ps.len()];
    let mut set = Vec::new();
    fn add(i: usize, set: &mut Vec<usize>, in_set: &mut [bool]) {
        if !in_set[i] {
            in_set[i] = true;
            set.push(i);
        }
    }
    let mut axis = vec![0.0; d];
    for k in 0..d {
        for sign in [1.0, -1.0] {
            axis.iter_mut().for_each(|a| *a = 0.0);
            axis[k] = sign;
            add(argmax_dir(ps, &axis), &mut set, &mut in_set);
        }
    }
    let inscribed = Inscribed::new(ps, &set);
    let mut x = vec![0.0; d];
    for i in 0..ps.len() {
        if !in_set[i] && inscribed.as_ref().is_some_and(|t| t.within(ps.point(i), tol)) {
            continue;
        }
        loop {
            if set.contains(&i) {
                break;
            }
            let p = ps.point(i);
            let near = min_norm_point(ps.coords(), d, Members::List(&set), p, tol, None);
            if near.dist2 <= tol * tol {
                break;
            }
            x.iter_mut().for_each(|v| *v = 0.0);
            for (&c, &w) in near.corral.iter().zip(&near.weights) {
                for (xv, &pc) in x.iter_mut().zip(ps.point(c)) {
                    *xv += w * pc;
                }
            }
            let dir: Vec<f64> = p.iter().zip(&x).map(|(a, b)| a - b).collect();
            let q = argmax_dir(ps, &dir);
            let pv: f64 = p.iter().zip(&dir).map(|(a, b)| a * b).sum();
            let qv: f64 = ps.point(q).iter().zip(&dir).map(|(a, b)| a * b).sum();
            if q == i || pv >= qv || set.contains(&q) {
                add(i, &mut set, &mut in_set);
            } else {
                add(q, &mut set, &mut in_set);
            }
        }
    }
    set
}

/// A simplex spanned by some of the current candidates; points with
/// positive barycentric coordinates in it, and close to its span, are not
/// extreme.
struct Inscribed {
    origin: Vec<f64>,
    /// Orthonormal basis of the simplex's affine span (rows).
    basis: Vec<Vec<f64>>,
    /// Maps basis coordinates to barycentric coordinates (minus the first).
    to_bary: nalgebra::DMatrix<f64>,
}

impl Inscribed {
    fn new(ps: &PointSet, set: &[usize]) -> Option<Self> {
        let origin = ps.point(*set.first()?).to_vec();
        let mut basis: Vec<Vec<f64>> = Vec::new();
        let mut edges: Vec<Vec<f64>> = Vec::new();
        for &i in &set[1..] {
            let e: Vec<f64> = ps.point(i).iter().zip(&origin).map(|(a, b)| a - b).collect();
            let mut r = e.clone();
            for b in &basis {
                let c: f64 = r.iter().zip(b).map(|(x, y)| x * y).sum();
                r.iter_mut().zip(b).for_each(|(x, y)| *x -= c * y);
            }
            let norm = r.iter().map(|x| x * x).sum::<f64>().sqrt();
            let scale = e.iter().map(|x| x * x).sum::<f64>().sqrt();
            if norm > 1e-9 * scale.max(f64::MIN_POSITIVE) {
                basis.push(r.iter().map(|x| x / norm).collect());
                edges.push(e);
            }
        }
        let k = basis.len();
        if k == 0 {
            return None;
        }
        let coords = nalgebra::DMatrix::from_fn(k, k, |a, b| {
            basis[a].iter().zip(&edges[b]).map(|(x, y)| x * y).sum()
        });
        Some(Inscribed {
            origin,
            basis,
            to_bary: coords.try_inverse()?,
        })
    }

    /// True when `p` is within `tol` of a point strictly inside the simplex.
    fn within(&self, p: &[f64], tol: f64) -> bool {
        let k = self.basis.len();
        let mut z = [0.0; 32];
        if k > z.len() {
            return false;
        }
        let mut rel2 = 0.0;
        for (t, (a, o)) in p.iter().zip(&self.origin).enumerate() {
            let r = a - o;
            rel2 += r * r;
            for (zv, b) in z.iter_mut().zip(&self.basis) {
                *zv += b[t] * r;
            }
        }
        let in_span2: f64 = z[..k].iter().map(|v| v * v).sum();
        if rel2 - in_span2 > tol * tol {
            return false;
        }
        let mut total = 0.0;
        for a in 0..k {
            let l: f64 = (0..k).map(|b| self.to_bary[(a, b)] * z[b]).sum();
            if !(l > 0.0) {
                return false;
            }
            total += l;
        }
        total < 1.0
    }
}

fn verify(ps: &PointSet, candidates: &[usize], k: usize, tol: f64) -> bool {
    let q = candidates[k];
    let others: Vec<usize> = candidates.iter().copied().filter(|&c| c != q).collect();
    let target = ps.point(q);
    let warm = min_norm_point(ps.coords(), ps.dim(), Members::List(&others), target, tol, None);
    if warm.dist2 <= tol * tol {
        return false;
    }
    let full = min_norm_point(
        ps.coords(),
        ps.dim(),
        Members::Range {
            n: ps.len(),
            exclude: Some(q),
        },
        target,
        tol,
        Some((&warm.corral, &warm.weights)),
    );
    full.dist2 > tol * tol
}
