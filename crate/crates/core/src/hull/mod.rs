//! Hull geometry: extremality, distances, flag counts and projections.

mod extremal;
mod nearest;
mod pca;
mod pointset;
mod towers;

pub use extremal::{
    distance_to_others, extremal_set, extremal_set_with, is_extreme, ExtremalSet,
    DEFAULT_EXTREME_TOL,
};
pub use nearest::{
    point_to_hull_distance, point_to_hull_distance_with, project_onto_hull, HullProjection,
    HullSolver, FW_GAP_TOL, FW_MAX_ITERS,
};
pub use pca::{attainable_dim, pca_project, PcaProjection, RANK_REL_TOL};
pub use pointset::{PointSet, DEDUP_TOL};
pub use towers::{c_constant, count_towers, TowerCount, MAX_TOWER_J};

use crate::error::{Error, Result};

/// Largest distance from a point of `from` to `Conv(to)`.
pub fn directed_hausdorff(from: &PointSet, to: &PointSet) -> Result<f64> {
    if from.is_empty() || to.is_empty() {
        return Err(Error::Degenerate("empty point set".into()));
    }
    if from.dim() != to.dim() {
        return Err(Error::DimensionMismatch {
            expected: from.dim(),
            got: to.dim(),
        });
    }
    from.iter()
        .map(|p| point_to_hull_distance(p, to))
        .try_fold(0.0f64, |acc, d| d.map(|d| acc.max(d)))
}

/// Hausdorff distance between `Conv(a)` and `Conv(b)`.
///
/// The distance to a convex set is a convex function, so its maximum over
/// a hull is attained at the generating points.
pub fn hausdorff(a: &PointSet, b: &PointSet) -> Result<f64> {
    Ok(directed_hausdorff(a, b)?.max(directed_hausdorff(b, a)?))
}
