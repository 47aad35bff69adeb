//! Monte Carlo experiments on random hulls in the simplex.

mod clt;
mod definetti;
mod gamma;
mod growth;
mod hull_limit;

pub use clt::{clt_experiment, ks_distance_normal, normal_cdf, standardize, CltReport};
pub use definetti::{definetti_bound, ExchangeabilityBound};
pub use gamma::{gamma_experiment, GammaRow, GammaSequence};
pub use growth::{
    fit_growth, growth_experiment, ExperimentConfig, GrowthCurve, GrowthFit, GrowthRow,
    DEFAULT_N_GRID,
};
pub use hull_limit::{hull_limit_experiment, HullLimitPoint};

/// Formats a float with 17 significant digits.
pub(crate) fn fmt17(x: f64) -> String {
    format!("{x:.16e}")
}
