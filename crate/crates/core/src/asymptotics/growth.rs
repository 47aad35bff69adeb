use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exec::Execution;
use crate::hull::{c_constant, extremal_set_with, PointSet, DEFAULT_EXTREME_TOL, MAX_TOWER_J};
use crate::seed;
use crate::simplex::SamplerSpec;

use super::fmt17;

/// Log-spaced default grid: 10², 10^2.5, 10³, 10^3.5, 10⁴.
pub const DEFAULT_N_GRID: [usize; 5] = [100, 316, 1000, 3162, 10_000];

fn default_tol() -> f64 {
    DEFAULT_EXTREME_TOL
}

/// A replicated growth experiment.
///
/// Replicate `r` at sample size `n` draws from the stream derived from
/// `(seed, n, r)`; the sampler's own seed is not used.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    #[serde(rename = "J")]
    pub j: usize,
    pub n_grid: Vec<usize>,
    pub reps: usize,
    pub sampler: SamplerSpec,
    pub seed: u64,
    #[serde(default = "default_tol")]
    pub tol: f64,
    #[serde(skip)]
    pub exec: Execution,
}

impl ExperimentConfig {
    pub fn uniform(j: usize, n_grid: Vec<usize>, reps: usize, seed: u64) -> Result<Self> {
        let cfg = ExperimentConfig {
            j,
            n_grid,
            reps,
            sampler: SamplerSpec::uniform(j, seed)?,
            seed,
            tol: DEFAULT_EXTREME_TOL,
            exec: Execution::default(),
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if self.sampler.dim() != self.j {
            return Err(Error::InvalidConfig(format!(
                "sampler dimension {} differs from J = {}",
                self.sampler.dim(),
                self.j
            )));
        }
        if self.reps == 0 {
            return Err(Error::InvalidConfig("reps must be at least 1".into()));
        }
        if self.n_grid.is_empty() {
            return Err(Error::InvalidConfig("empty n grid".into()));
        }
        if self.n_grid.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::InvalidConfig("n grid must be strictly increasing".into()));
        }
        if self.n_grid[0] < self.j + 1 {
            return Err(Error::InvalidConfig(format!(
                "smallest n = {} is below J + 1 = {}",
                self.n_grid[0],
                self.j + 1
            )));
        }
        if !(self.tol >= 0.0 && self.tol.is_finite()) {
            return Err(Error::InvalidConfig(format!("invalid tolerance {}", self.tol)));
        }
        Ok(())
    }
}

/// Summary of F₀ at one sample size.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GrowthRow {
    pub n: usize,
    pub mean_f0: f64,
    /// Unbiased sample variance (0 for a single replicate).
    pub var_f0: f64,
    pub reps: usize,
    /// Standard error of `mean_f0`.
    pub se: f64,
    /// Per-replicate extreme-point counts, in replicate order.
    pub f0: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GrowthCurve {
    #[serde(rename = "J")]
    pub j: usize,
    pub rows: Vec<GrowthRow>,
}

impl GrowthRow {
    pub(crate) fn from_counts(n: usize, f0: Vec<usize>) -> Self {
        let reps = f0.len();
        let mean = f0.iter().sum::<usize>() as f64 / reps as f64;
        let var = if reps > 1 {
            f0.iter().map(|&x| (x as f64 - mean).powi(2)).sum::<f64>() / (reps - 1) as f64
        } else {
            0.0
        };
        GrowthRow {
            n,
            mean_f0: mean,
            var_f0: var,
            reps,
            se: (var / reps as f64).sqrt(),
            f0,
        }
    }
}

impl GrowthCurve {
    /// CSV with one row per sample size. The last column is the leading-order
    /// prediction `c(J)·(ln n)^{J-1}` when `c(J)` is available.
    pub fn to_csv(&self) -> String {
        let c = if self.j <= MAX_TOWER_J {
            c_constant(self.j).ok()
        } else {
            None
        };
        let mut out = String::from("n,mean_f0,var_f0,reps,se,leading_order\n");
        for r in &self.rows {
            let lead = c.map_or(String::new(), |c| {
                fmt17(c * (r.n as f64).ln().powi(self.j as i32 - 1))
            });
            out.push_str(&format!(
                "{},{},{},{},{},{}\n",
                r.n,
                fmt17(r.mean_f0),
                fmt17(r.var_f0),
                r.reps,
                fmt17(r.se),
                lead
            ));
        }
        out
    }
}

/// Number of extreme points of one sampled cloud.
pub(crate) fn replicate_f0(
    sampler: &SamplerSpec,
    n: usize,
    stream_seed: u64,
    tol: f64,
) -> Result<usize> {
    let mut rng = seed::rng(stream_seed);
    let ps = PointSet::from_flat(sampler.draw_flat(&mut rng, n), sampler.dim())?;
    Ok(extremal_set_with(&ps, tol, Execution::Sequential)?.f0)
}

/// Estimates mean and variance of F₀(K_n) for every n in the grid.
pub fn growth_experiment(cfg: &ExperimentConfig) -> Result<GrowthCurve> {
    cfg.validate()?;
    let reps = cfg.reps;
    let counts = cfg.exec.try_map(cfg.n_grid.len() * reps, |k| {
        let n = cfg.n_grid[k / reps];
        let r = (k % reps) as u64;
        replicate_f0(&cfg.sampler, n, seed::derive(cfg.seed, &[n as u64, r]), cfg.tol)
    })?;
    let rows = cfg
        .n_grid
        .iter()
        .zip(counts.chunks_exact(reps))
        .map(|(&n, c)| GrowthRow::from_counts(n, c.to_vec()))
        .collect();
    Ok(GrowthCurve { j: cfg.j, rows })
}

/// Least-squares fit of `ln E[F₀] = ln c + p · ln ln n`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GrowthFit {
    pub c_hat: f64,
    pub p_hat: f64,
    pub r_squared: f64,
    /// Residuals of the log-scale fit, one per grid point used.
    pub residuals: Vec<f64>,
    /// Exponent J − 1 (ambient-dimension reading of the growth law).
    pub p_ambient: f64,
    /// Exponent J − 2 (intrinsic-dimension reading).
    pub p_intrinsic: f64,
    /// c(J), when the tower count is available.
    pub c_theory: Option<f64>,
}

/// Fits `mean_f0 ≈ c (ln n)^p` over grid points with n ≥ 10.
pub fn fit_growth(curve: &GrowthCurve) -> Result<GrowthFit> {
    let pts: Vec<(f64, f64)> = curve
        .rows
        .iter()
        .filter(|r| r.n >= 10)
        .map(|r| ((r.n as f64).ln().ln(), r.mean_f0))
        .collect();
    if pts.len() < 3 {
        return Err(Error::InvalidConfig(format!(
            "{} grid points with n >= 10; at least 3 are needed",
            pts.len()
        )));
    }
    if let Some(&(_, m)) = pts.iter().find(|p| !(p.1 > 0.0)) {
        return Err(Error::InvalidConfig(format!("non-positive mean {m}")));
    }
    let k = pts.len() as f64;
    let xs: Vec<f64> = pts.iter().map(|p| p.0).collect();
    let ys: Vec<f64> = pts.iter().map(|p| p.1.ln()).collect();
    let mx = xs.iter().sum::<f64>() / k;
    let my = ys.iter().sum::<f64>() / k;
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let p = sxy / sxx;
    let a = my - p * mx;
    let residuals: Vec<f64> = xs.iter().zip(&ys).map(|(x, y)| y - a - p * x).collect();
    let ssr: f64 = residuals.iter().map(|r| r * r).sum();
    let sst: f64 = ys.iter().map(|y| (y - my).powi(2)).sum();
    let r_squared = if sst > 0.0 {
        (1.0 - ssr / sst).clamp(0.0, 1.0)
    } else {
        1.0
    };
    Ok(GrowthFit {
        c_hat: a.exp(),
        p_hat: p,
        r_squared,
        residuals,
        p_ambient: curve.j as f64 - 1.0,
        p_intrinsic: curve.j as f64 - 2.0,
        c_theory: if curve.j <= MAX_TOWER_J {
            c_constant(curve.j).ok()
        } else {
            None
        },
    })
}
