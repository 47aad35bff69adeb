//! Nearest point of a finite point set's convex hull.
//!
//! The default solver is Wolfe's minimum-norm-point method: Frank–Wolfe
//! vertex selection combined with an exact affine minimization over the
//! current active set ("corral"), which terminates finitely. A plain
//! away-step Frank–Wolfe solver is kept as an independent second route.

use crate::error::{Error, Result};

use super::pointset::{dist2, PointSet};

/// Optimality slack on the Frank–Wolfe gap, relative to the squared scale.
const GAP_REL: f64 = 1e-13;
/// Affine weights at or below this are considered non-positive.
const WEIGHT_EPS: f64 = 1e-12;
const MAX_MAJOR: usize = 100_000;

/// Frank–Wolfe duality-gap tolerance for the away-step solver.
pub const FW_GAP_TOL: f64 = 1e-10;
/// Iteration cap for the away-step solver.
pub const FW_MAX_ITERS: usize = 100_000;

/// Which algorithm projects onto a hull.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum HullSolver {
    #[default]
    MinNormPoint,
    AwayStepFrankWolfe,
}

/// The candidate points a solve ranges over.
#[derive(Clone, Copy)]
pub(crate) enum Members<'a> {
    /// Indices `0..n`, optionally skipping one.
    Range { n: usize, exclude: Option<usize> },
    List(&'a [usize]),
}

impl Members<'_> {
    fn for_each(&self, mut f: impl FnMut(usize)) {
        match *self {
            Members::Range { n, exclude } => {
                for i in 0..n {
                    if Some(i) != exclude {
                        f(i)
                    }
                }
            }
            Members::List(l) => l.iter().copied().for_each(f),
        }
    }

    fn is_empty(&self) -> bool {
        match *self {
            Members::Range { n, exclude } => n == 0 || (n == 1 && exclude == Some(0)),
            Members::List(l) => l.is_empty(),
        }
    }
}

/// Result of a projection: squared distance and the convex weights of the
/// nearest point on the points that carry mass.
#[derive(Debug, Clone)]
pub(crate) struct Nearest {
    pub dist2: f64,
    pub corral: Vec<usize>,
    pub weights: Vec<f64>,
}

/// Outcome of projecting a point onto a hull.
#[derive(Debug, Clone, PartialEq)]
pub struct HullProjection {
    pub distance: f64,
    /// Nearest point of the hull.
    pub nearest: Vec<f64>,
    /// `(point index, weight)` pairs representing `nearest`.
    pub weights: Vec<(usize, f64)>,
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

struct Translated<'a> {
    coords: &'a [f64],
    dim: usize,
    target: &'a [f64],
}

impl Translated<'_> {
    fn pt(&self, i: usize) -> &[f64] {
        &self.coords[i * self.dim..(i + 1) * self.dim]
    }

    /// ⟨x, v_i − t⟩ given ⟨x, t⟩.
    fn inner(&self, x: &[f64], xt: f64, i: usize) -> f64 {
        dot(x, self.pt(i)) - xt
    }

    fn combine(&self, corral: &[usize], w: &[f64], x: &mut [f64]) {
        x.iter_mut().for_each(|v| *v = 0.0);
        for (&i, &wi) in corral.iter().zip(w) {
            for ((xv, &p), &t) in x.iter_mut().zip(self.pt(i)).zip(self.target) {
                *xv += wi * (p - t);
            }
        }
    }

    fn gram(&self, a: usize, b: usize) -> f64 {
        self.pt(a)
            .iter()
            .zip(self.pt(b))
            .zip(self.target)
            .map(|((p, q), t)| (p - t) * (q - t))
            .sum()
    }
}

/// Solves `(G + 11ᵀ) v = 1` and returns `v / Σv`, the affine minimizer
/// weights of the corral. `None` when the system is numerically singular.
fn affine_minimizer(tr: &Translated<'_>, corral: &[usize]) -> Option<Vec<f64>> {
    let k = corral.len();
    let mut a = vec![0.0; k * (k + 1)];
    let mut scale = 0.0f64;
    for r in 0..k {
        for c in 0..k {
            let g = tr.gram(corral[r], corral[c]) + 1.0;
            a[r * (k + 1) + c] = g;
            scale = scale.max(g.abs());
        }
        a[r * (k + 1) + k] = 1.0;
    }
    let v = gauss_solve(&mut a, k, scale * 1e-14)?;
    let s: f64 = v.iter().sum();
    if !(s.is_finite() && s.abs() > 0.0) {
        return None;
    }
    Some(v.into_iter().map(|x| x / s).collect())
}

/// In-place Gaussian elimination with partial pivoting on a `k × (k+1)`
/// augmented matrix.
fn gauss_solve(a: &mut [f64], k: usize, pivot_tol: f64) -> Option<Vec<f64>> {
    let w = k + 1;
    for col in 0..k {
        let piv = (col..k).max_by(|&r, &s| a[r * w + col].abs().total_cmp(&a[s * w + col].abs()))?;
        if a[piv * w + col].abs() <= pivot_tol {
            return None;
        }
        if piv != col {
            for c in 0..w {
                a.swap(piv * w + c, col * w + c);
            }
        }
        let p = a[col * w + col];
        for r in col + 1..k {
            let f = a[r * w + col] / p;
            if f != 0.0 {
                for c in col..w {
                    a[r * w + c] -= f * a[col * w + c];
                }
            }
        }
    }
    let mut x = vec![0.0; k];
    for r in (0..k).rev() {
        let s: f64 = (r + 1..k).map(|c| a[r * w + c] * x[c]).sum();
        x[r] = (a[r * w + k] - s) / a[r * w + r];
    }
    Some(x)
}

/// Wolfe's minimum-norm-point algorithm on `{v_i − target : i ∈ members}`.
///
/// Stops early once the distance is certified to be at most `stop_below`.
/// `warm` seeds the corral with convex weights over member indices.
pub(crate) fn min_norm_point(
    coords: &[f64],
    dim: usize,
    members: Members<'_>,
    target: &[f64],
    stop_below: f64,
    warm: Option<(&[usize], &[f64])>,
) -> Nearest {
    debug_assert!(!members.is_empty());
    let tr = Translated {
        coords,
        dim,
        target,
    };
    let (mut corral, mut lam): (Vec<usize>, Vec<f64>) = match warm {
        Some((c, w)) if !c.is_empty() => c
            .iter()
            .zip(w)
            .filter(|(_, &w)| w > 0.0)
            .map(|(&i, &w)| (i, w))
            .unzip(),
        _ => {
            let mut best = (f64::INFINITY, usize::MAX);
            members.for_each(|i| {
                let d = dist2(tr.pt(i), target);
                if d < best.0 {
                    best = (d, i);
                }
            });
            (vec![best.1], vec![1.0])
        }
    };
    let s: f64 = lam.iter().sum();
    lam.iter_mut().for_each(|w| *w /= s);

    let mut x = vec![0.0; dim];
    tr.combine(&corral, &lam, &mut x);
    let mut scale = corral
        .iter()
        .map(|&i| tr.gram(i, i))
        .fold(0.0f64, f64::max)
        .max(f64::MIN_POSITIVE);
    let stop2 = stop_below * stop_below;

    for _ in 0..MAX_MAJOR {
        let xx = dot(&x, &x);
        if xx <= stop2 || xx <= 1e-30 * scale {
            break;
        }
        let xt = dot(&x, target);
        let mut best = (f64::INFINITY, usize::MAX);
        members.for_each(|i| {
            let v = tr.inner(&x, xt, i);
            if v < best.0 {
                best = (v, i);
            }
        });
        let j = best.1;
        scale = scale.max(tr.gram(j, j));
        if xx - best.0 <= GAP_REL * scale || corral.contains(&j) {
            break;
        }
        corral.push(j);
        lam.push(0.0);

        let prev = xx;
        loop {
            let Some(mu) = affine_minimizer(&tr, &corral) else {
                // numerically dependent corral: drop the newcomer and stop
                corral.pop();
                lam.pop();
                return finish(&tr, corral, lam);
            };
            if mu.iter().all(|&m| m > WEIGHT_EPS) {
                lam = mu;
                break;
            }
            let mut step: Option<(f64, usize)> = None;
            for (k, (&l, &m)) in lam.iter().zip(&mu).enumerate() {
                if m <= WEIGHT_EPS && l - m > 0.0 {
                    let t = l / (l - m);
                    if step.is_none_or(|(best, _)| t < best) {
                        step = Some((t, k));
                    }
                }
            }
            let theta = step.map_or(1.0, |(t, _)| t.min(1.0));
            for (l, &m) in lam.iter_mut().zip(&mu) {
                *l += theta * (m - *l);
            }
            if let Some((_, k)) = step {
                lam[k] = 0.0;
            }
            let mut k = 0;
            while k < corral.len() {
                if lam[k] <= WEIGHT_EPS {
                    corral.swap_remove(k);
                    lam.swap_remove(k);
                } else {
                    k += 1;
                }
            }
            let s: f64 = lam.iter().sum();
            lam.iter_mut().for_each(|w| *w /= s);
            if corral.len() <= 1 {
                break;
            }
        }
        tr.combine(&corral, &lam, &mut x);
        if dot(&x, &x) >= prev {
            break;
        }
    }
    finish(&tr, corral, lam)
}

fn finish(tr: &Translated<'_>, corral: Vec<usize>, weights: Vec<f64>) -> Nearest {
    let mut x = vec![0.0; tr.dim];
    tr.combine(&corral, &weights, &mut x);
    Nearest {
        dist2: dot(&x, &x),
        corral,
        weights,
    }
}

/// Away-step Frank–Wolfe on the weight simplex of `members`.
pub(crate) fn away_step_frank_wolfe(
    coords: &[f64],
    dim: usize,
    members: Members<'_>,
    target: &[f64],
    gap_tol: f64,
    max_iters: usize,
) -> Nearest {
    let mut ids = Vec::new();
    members.for_each(|i| ids.push(i));
    let pt = |i: usize| &coords[i * dim..(i + 1) * dim];
    let start = (0..ids.len())
        .min_by(|&a, &b| dist2(pt(ids[a]), target).total_cmp(&dist2(pt(ids[b]), target)))
        .expect("non-empty member set");
    let mut lam = vec![0.0; ids.len()];
    lam[start] = 1.0;
    let mut x = pt(ids[start]).to_vec();
    let mut grad = vec![0.0; dim];
    for _ in 0..max_iters {
        for ((g, &xv), &t) in grad.iter_mut().zip(&x).zip(target) {
            *g = xv - t;
        }
        let gx = dot(&grad, &x);
        let scores: Vec<f64> = ids.iter().map(|&i| dot(&grad, pt(i))).collect();
        let fw = (0..ids.len())
            .min_by(|&a, &b| scores[a].total_cmp(&scores[b]))
            .unwrap();
        let away = (0..ids.len())
            .filter(|&k| lam[k] > 0.0)
            .max_by(|&a, &b| scores[a].total_cmp(&scores[b]))
            .unwrap();
        let gap_fw = gx - scores[fw];
        if gap_fw <= gap_tol {
            break;
        }
        let gap_away = scores[away] - gx;
        let (dir, gmax, toward): (Vec<f64>, f64, bool) = if gap_fw >= gap_away {
            (pt(ids[fw]).iter().zip(&x).map(|(s, x)| s - x).collect(), 1.0, true)
        } else {
            let la = lam[away];
            (
                x.iter().zip(pt(ids[away])).map(|(x, a)| x - a).collect(),
                if la < 1.0 { la / (1.0 - la) } else { f64::INFINITY },
                false,
            )
        };
        let dd = dot(&dir, &dir);
        if dd <= 0.0 {
            break;
        }
        let step = (-dot(&grad, &dir) / dd).clamp(0.0, gmax);
        if toward {
            lam.iter_mut().for_each(|l| *l *= 1.0 - step);
            lam[fw] += step;
        } else {
            lam.iter_mut().for_each(|l| *l *= 1.0 + step);
            lam[away] -= step;
            if step == gmax {
                lam[away] = 0.0;
            }
        }
        for (xv, d) in x.iter_mut().zip(&dir) {
            *xv += step * d;
        }
    }
    let (corral, weights): (Vec<usize>, Vec<f64>) = ids
        .iter()
        .zip(&lam)
        .filter(|(_, &l)| l > 0.0)
        .map(|(&i, &l)| (i, l))
        .unzip();
    Nearest {
        dist2: dist2(&x, target),
        corral,
        weights,
    }
}

/// Projects `p` onto `Conv(ps)`.
pub fn project_onto_hull(p: &[f64], ps: &PointSet, solver: HullSolver) -> Result<HullProjection> {
    if ps.is_empty() {
        return Err(Error::Degenerate("empty point set".into()));
    }
    if p.len() != ps.dim() {
        return Err(Error::DimensionMismatch {
            expected: ps.dim(),
            got: p.len(),
        });
    }
    let members = Members::Range {
        n: ps.len(),
        exclude: None,
    };
    let near = match solver {
        HullSolver::MinNormPoint => min_norm_point(ps.coords(), ps.dim(), members, p, 0.0, None),
        HullSolver::AwayStepFrankWolfe => {
            away_step_frank_wolfe(ps.coords(), ps.dim(), members, p, FW_GAP_TOL, FW_MAX_ITERS)
        }
    };
    let mut nearest = vec![0.0; ps.dim()];
    for (&i, &w) in near.corral.iter().zip(&near.weights) {
        for (n, &c) in nearest.iter_mut().zip(ps.point(i)) {
            *n += w * c;
        }
    }
    Ok(HullProjection {
        distance: near.dist2.max(0.0).sqrt(),
        nearest,
        weights: near.corral.into_iter().zip(near.weights).collect(),
    })
}

/// Euclidean distance from `p` to `Conv(ps)`.
pub fn point_to_hull_distance(p: &[f64], ps: &PointSet) -> Result<f64> {
    project_onto_hull(p, ps, HullSolver::MinNormPoint).map(|h| h.distance)
}

/// Distance from `p` to `Conv(ps)` with an explicit solver.
pub fn point_to_hull_distance_with(p: &[f64], ps: &PointSet, solver: HullSolver) -> Result<f64> {
    project_onto_hull(p, ps, solver).map(|h| h.distance)
}
