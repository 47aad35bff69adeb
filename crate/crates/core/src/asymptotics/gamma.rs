use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exec::Execution;
use crate::seed;
use crate::simplex::SamplerSpec;

use super::fmt17;
use super::growth::{growth_experiment, ExperimentConfig};
use crate::hull::DEFAULT_EXTREME_TOL;

/// Ratio of mean extreme-point counts under a generic law and the uniform law.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GammaRow {
    pub n: usize,
    pub mean_uniform: f64,
    pub se_uniform: f64,
    pub mean_generic: f64,
    pub se_generic: f64,
    pub gamma: f64,
    /// Delta-method standard error of `gamma` (independent samples).
    pub se_gamma: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GammaSequence {
    #[serde(rename = "J")]
    pub j: usize,
    pub rows: Vec<GammaRow>,
}

impl GammaSequence {
    pub fn to_csv(&self) -> String {
        let mut out =
            String::from("n,mean_uniform,se_uniform,mean_generic,se_generic,gamma,se_gamma\n");
        for r in &self.rows {
            out.push_str(&format!(
                "{},{},{},{},{},{},{}\n",
                r.n,
                fmt17(r.mean_uniform),
                fmt17(r.se_uniform),
                fmt17(r.mean_generic),
                fmt17(r.se_generic),
                fmt17(r.gamma),
                fmt17(r.se_gamma)
            ));
        }
        out
    }
}

/// Runs paired growth experiments, uniform (M(n)) against `generic`
/// (T(n)), on independent streams and reports `γ_n = Ê[T(n)] / Ê[M(n)]`.
pub fn gamma_experiment(
    j: usize,
    n_grid: &[usize],
    reps: usize,
    generic: &SamplerSpec,
    seed: u64,
    exec: Execution,
) -> Result<GammaSequence> {
    if generic.dim() != j {
        return Err(Error::InvalidConfig(format!(
            "generic sampler has dimension {}, J = {j}",
            generic.dim()
        )));
    }
    let base = |sampler: SamplerSpec, s: u64| ExperimentConfig {
        j,
        n_grid: n_grid.to_vec(),
        reps,
        sampler,
        seed: s,
        tol: DEFAULT_EXTREME_TOL,
        exec,
    };
    let uni = growth_experiment(&base(SamplerSpec::uniform(j, seed)?, seed::derive(seed, &[0])))?;
    let gen = growth_experiment(&base(generic.clone(), seed::derive(seed, &[1])))?;
    let rows = uni
        .rows
        .iter()
        .zip(&gen.rows)
        .map(|(m, t)| {
            let g = t.mean_f0 / m.mean_f0;
            let se = ((t.se / m.mean_f0).powi(2)
                + (t.mean_f0 * m.se / (m.mean_f0 * m.mean_f0)).powi(2))
            .sqrt();
            GammaRow {
                n: m.n,
                mean_uniform: m.mean_f0,
                se_uniform: m.se,
                mean_generic: t.mean_f0,
                se_generic: t.se,
                gamma: g,
                se_gamma: se,
            }
        })
        .collect();
    Ok(GammaSequence { j, rows })
}
