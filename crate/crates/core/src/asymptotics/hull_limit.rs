use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::hull::{hausdorff, PointSet};
use crate::seed;
use crate::simplex::SamplerSpec;

use super::fmt17;

/// Hausdorff distance between the hull of the first `n` draws and Δ^{J-1}.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HullLimitPoint {
    pub n: usize,
    pub distance: f64,
}

impl HullLimitPoint {
    pub fn to_csv(points: &[HullLimitPoint]) -> String {
        let mut out = String::from("n,hausdorff\n");
        for p in points {
            out.push_str(&format!("{},{}\n", p.n, fmt17(p.distance)));
        }
        out
    }
}

/// Tracks `d_H(K_n, Δ^{J-1})` along nested prefixes of one uniform stream.
pub fn hull_limit_experiment(j: usize, n_grid: &[usize], seed: u64) -> Result<Vec<HullLimitPoint>> {
    if n_grid.is_empty() || n_grid.windows(2).any(|w| w[0] >= w[1]) || n_grid[0] == 0 {
        return Err(Error::InvalidConfig(
            "n grid must be non-empty, positive and strictly increasing".into(),
        ));
    }
    let sampler = SamplerSpec::uniform(j, seed)?;
    let n_max = *n_grid.last().expect("non-empty");
    let draws = sampler.draw_flat(&mut seed::rng(seed), n_max);
    let simplex = PointSet::from_flat(
        (0..j)
            .flat_map(|a| (0..j).map(move |b| if a == b { 1.0 } else { 0.0 }))
            .collect(),
        j,
    )?;
    n_grid
        .iter()
        .map(|&n| {
            let kn = PointSet::from_flat(draws[..n * j].to_vec(), j)?;
            Ok(HullLimitPoint {
                n,
                distance: hausdorff(&kn, &simplex)?,
            })
        })
        .collect()
}
