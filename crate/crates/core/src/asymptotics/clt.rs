use serde::{Deserialize, Serialize};
use libm::erfc;

use crate::error::{Error, Result};
use crate::exec::Execution;
use crate::seed;
use crate::simplex::SamplerSpec;

use super::fmt17;
use super::growth::replicate_f0;
use crate::hull::DEFAULT_EXTREME_TOL;

/// Standard normal CDF.
pub fn normal_cdf(x: f64) -> f64 {
    0.5 * erfc(-x / std::f64::consts::SQRT_2)
}

/// Centers by the sample mean and scales by the sample standard deviation
/// (n − 1 denominator).
pub fn standardize(xs: &[f64]) -> Result<Vec<f64>> {
    if xs.len() < 2 {
        return Err(Error::DegenerateVariance(format!(
            "{} observation(s)",
            xs.len()
        )));
    }
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
    if !(var > 0.0) {
        return Err(Error::DegenerateVariance("zero sample variance".into()));
    }
    let sd = var.sqrt();
    Ok(xs.iter().map(|x| (x - mean) / sd).collect())
}

/// One-sample Kolmogorov distance between the empirical CDF of `xs` and Φ.
///
/// Ties are handled by comparing Φ against both one-sided limits of the
/// empirical CDF at each order statistic.
pub fn ks_distance_normal(xs: &[f64]) -> f64 {
    let mut s = xs.to_vec();
    s.sort_by(f64::total_cmp);
    let n = s.len() as f64;
    s.iter()
        .enumerate()
        .map(|(i, &x)| {
            let f = normal_cdf(x);
            ((i + 1) as f64 / n - f).max(f - i as f64 / n)
        })
        .fold(0.0, f64::max)
}

/// Normal-approximation diagnostic for F₀(K_n).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CltReport {
    #[serde(rename = "J")]
    pub j: usize,
    pub n: usize,
    pub reps: usize,
    pub mean_f0: f64,
    pub sd_f0: f64,
    pub ks_stat: f64,
    pub f0: Vec<usize>,
    pub standardized: Vec<f64>,
}

impl CltReport {
    /// One row per replicate.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("replicate,f0,standardized\n");
        for (r, (f, z)) in self.f0.iter().zip(&self.standardized).enumerate() {
            out.push_str(&format!("{r},{f},{}\n", fmt17(*z)));
        }
        out
    }
}

/// Draws `reps` uniform clouds of size `n` in Δ^{J-1}, standardizes their
/// extreme-point counts and measures the Kolmogorov distance to Φ.
pub fn clt_experiment(
    j: usize,
    n: usize,
    reps: usize,
    seed: u64,
    exec: Execution,
) -> Result<CltReport> {
    if reps < 100 {
        return Err(Error::InvalidConfig(format!(
            "reps = {reps}; at least 100 are required"
        )));
    }
    if j == 2 {
        return Err(Error::DegenerateVariance(
            "J = 2: every segment hull has exactly 2 extreme points".into(),
        ));
    }
    if n < j + 1 {
        return Err(Error::InvalidConfig(format!("n = {n} is below J + 1")));
    }
    let sampler = SamplerSpec::uniform(j, seed)?;
    let f0 = exec.try_map(reps, |r| {
        replicate_f0(
            &sampler,
            n,
            seed::derive(seed, &[n as u64, r as u64]),
            DEFAULT_EXTREME_TOL,
        )
    })?;
    let xs: Vec<f64> = f0.iter().map(|&x| x as f64).collect();
    let standardized = standardize(&xs)?;
    let mean = xs.iter().sum::<f64>() / reps as f64;
    let sd = (xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (reps - 1) as f64).sqrt();
    Ok(CltReport {
        j,
        n,
        reps,
        mean_f0: mean,
        sd_f0: sd,
        ks_stat: ks_distance_normal(&standardized),
        f0,
        standardized,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand_distr::{Distribution, StandardNormal};

    #[test]
    fn cdf_reference_values() {
        assert_eq!(normal_cdf(0.0), 0.5);
        let d = normal_cdf(1.0) - 0.841_344_746_068_542_9;
        assert!(d.abs() < 1e-15, "{d:e}");
        assert!((normal_cdf(-1.959_963_984_540_054) - 0.025).abs() < 1e-15);
    }

    #[test]
    fn ks_on_normal_draws_is_small() {
        let mut rng = seed::rng(21);
        let xs: Vec<f64> = (0..10_000).map(|_| StandardNormal.sample(&mut rng)).collect();
        assert!(ks_distance_normal(&xs) <= 0.02);
    }

    #[test]
    fn ks_single_point_at_zero() {
        assert_eq!(ks_distance_normal(&[0.0]), 0.5);
    }

    #[test]
    fn standardized_moments() {
        let z = standardize(&[1.0, 4.0, 4.0, 9.0, 2.0]).unwrap();
        let m = z.iter().sum::<f64>() / 5.0;
        let v = z.iter().map(|x| (x - m).powi(2)).sum::<f64>() / 4.0;
        assert!(m.abs() < 1e-12 && (v - 1.0).abs() < 1e-12);
        assert!(standardize(&[3.0, 3.0]).is_err());
    }

    #[test]
    fn segment_rejected() {
        assert!(matches!(
            clt_experiment(2, 1000, 200, 1, Execution::Sequential),
            Err(Error::DegenerateVariance(_))
        ));
        assert!(clt_experiment(3, 1000, 50, 1, Execution::Sequential).is_err());
    }
}
