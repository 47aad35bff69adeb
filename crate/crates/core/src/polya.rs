//! Pólya tree posterior over the vertices of a simplex frame.
//!
//! The tree lives on the canonical dyadic partition of [0, 1]. Atom `k` of
//! `M` is embedded in the k-th leftmost cell at depth `⌈log₂ M⌉`, so the
//! posterior restricted to the embedded cells is a finite Pólya urn on the
//! atoms. Split parameters depend only on the level:
//! `α_l = max(l · 2^{2lα}, 8)` for a Hölder exponent `α ∈ (0, 1]`.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::choquet::ChoquetMeasure;
use crate::error::{Error, Result};
use crate::seed;
use crate::simplex::ProbabilityVector;

/// Floor on every split parameter.
pub const ALPHA_FLOOR: f64 = 8.0;
pub const MAX_DEPTH: usize = 30;

/// Level-indexed Beta split parameters.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PolyaTreeParams {
    /// Hölder exponent.
    pub alpha: f64,
    pub depth: usize,
    /// `level_params[l - 1]` is `α_ε` for every ε of length `l`.
    pub level_params: Vec<f64>,
}

impl PolyaTreeParams {
    /// Parameter of node ε, given as its bit string (true = right).
    pub fn node_param(&self, eps: &[bool]) -> Option<f64> {
        (!eps.is_empty())
            .then(|| self.level_params.get(eps.len() - 1).copied())
            .flatten()
    }

    pub fn level_param(&self, level: usize) -> Option<f64> {
        level.checked_sub(1).and_then(|l| self.level_params.get(l).copied())
    }
}

/// Builds `α_ε = max(a_{#ε}, 8)` with `a_l = l · 2^{2lα}`.
pub fn build_params(alpha: f64, depth: usize) -> Result<PolyaTreeParams> {
    if !(alpha > 0.0 && alpha <= 1.0) {
        return Err(Error::InvalidConfig(format!(
            "Hölder exponent {alpha} outside (0, 1]"
        )));
    }
    if !(1..=MAX_DEPTH).contains(&depth) {
        return Err(Error::InvalidConfig(format!(
            "depth {depth} outside 1..={MAX_DEPTH}"
        )));
    }
    let level_params = (1..=depth)
        .map(|l| {
            let a = l as f64 * (2.0 * l as f64 * alpha).exp2();
            a.max(ALPHA_FLOOR)
        })
        .collect();
    Ok(PolyaTreeParams {
        alpha,
        depth,
        level_params,
    })
}

/// Injective placement of `M` atoms in the leftmost dyadic cells.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct AtomEmbedding {
    pub atoms: usize,
    /// `⌈log₂ M⌉`.
    pub depth: usize,
}

impl AtomEmbedding {
    pub fn new(atoms: usize) -> Result<Self> {
        if atoms < 2 {
            return Err(Error::InvalidConfig(format!(
                "{atoms} atom(s); at least 2 are required"
            )));
        }
        let depth = (usize::BITS - (atoms - 1).leading_zeros()) as usize;
        if depth > MAX_DEPTH {
            return Err(Error::InvalidConfig(format!("{atoms} atoms exceed the maximum depth")));
        }
        Ok(AtomEmbedding { atoms, depth })
    }

    /// Dyadic cell (index at `depth`) of atom `k`.
    pub fn cell(&self, k: usize) -> Result<usize> {
        if k >= self.atoms {
            return Err(Error::UnknownAtom(k));
        }
        Ok(k)
    }

    /// `[lo, hi)` subinterval of [0, 1] for atom `k`.
    pub fn interval(&self, k: usize) -> Result<(f64, f64)> {
        let c = self.cell(k)? as f64;
        let w = (-(self.depth as f64)).exp2();
        Ok((c * w, (c + 1.0) * w))
    }
}

/// Conjugate posterior state: routed counts at every internal node down to
/// the embedding depth, stored level by level.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PolyaTreePosterior {
    pub params: PolyaTreeParams,
    pub embedding: AtomEmbedding,
    /// `(left, right)` counts; node `(l, i)` sits at `2^l − 1 + i`.
    pub counts: Vec<(u64, u64)>,
    /// Total observations.
    pub k: u64,
}

impl PolyaTreePosterior {
    /// The prior: all counts zero.
    pub fn prior(params: PolyaTreeParams, embedding: AtomEmbedding) -> Result<Self> {
        if params.depth < embedding.depth {
            return Err(Error::InvalidConfig(format!(
                "tree depth {} is below the embedding depth {}",
                params.depth, embedding.depth
            )));
        }
        Ok(PolyaTreePosterior {
            params,
            embedding,
            counts: vec![(0, 0); (1 << embedding.depth) - 1],
            k: 0,
        })
    }

    fn node(level: usize, pos: usize) -> usize {
        (1 << level) - 1 + pos
    }

    fn observe(&mut self, cell: usize) {
        let d = self.embedding.depth;
        for level in 0..d {
            let node = Self::node(level, cell >> (d - level));
            if (cell >> (d - level - 1)) & 1 == 0 {
                self.counts[node].0 += 1;
            } else {
                self.counts[node].1 += 1;
            }
        }
        self.k += 1;
    }

    /// Count addition; the result does not depend on how data were split.
    pub fn merge(&self, other: &Self) -> Result<Self> {
        if self.params != other.params || self.embedding != other.embedding {
            return Err(Error::InvalidConfig("posteriors over different trees".into()));
        }
        let mut out = self.clone();
        for (a, b) in out.counts.iter_mut().zip(&other.counts) {
            a.0 += b.0;
            a.1 += b.1;
        }
        out.k += other.k;
        Ok(out)
    }

    /// Posterior-mean masses of the `2^level` cells at `level`.
    pub fn cell_masses(&self, level: usize) -> Result<Vec<f64>> {
        if level > self.embedding.depth {
            return Err(Error::InvalidConfig(format!(
                "level {level} below the instantiated depth {}",
                self.embedding.depth
            )));
        }
        let mut masses = vec![1.0];
        for l in 0..level {
            let a = self.params.level_params[l];
            masses = masses
                .iter()
                .enumerate()
                .flat_map(|(pos, &m)| {
                    let (left, right) = self.counts[Self::node(l, pos)];
                    let tot = 2.0 * a + (left + right) as f64;
                    [m * (a + left as f64) / tot, m * (a + right as f64) / tot]
                })
                .collect();
        }
        Ok(masses)
    }
}

/// Routes every observed atom down its cell's root path.
pub fn posterior_update(
    post: &PolyaTreePosterior,
    atoms: &[usize],
    emb: &AtomEmbedding,
) -> Result<PolyaTreePosterior> {
    if *emb != post.embedding {
        return Err(Error::InvalidConfig("embedding differs from the posterior's".into()));
    }
    let cells = atoms
        .iter()
        .map(|&a| emb.cell(a))
        .collect::<Result<Vec<_>>>()?;
    let mut out = post.clone();
    cells.into_iter().for_each(|c| out.observe(c));
    Ok(out)
}

/// Posterior-mean atom weights, renormalized over the embedded cells.
pub fn weight_estimate(post: &PolyaTreePosterior, emb: &AtomEmbedding) -> Result<ChoquetMeasure> {
    if *emb != post.embedding {
        return Err(Error::InvalidConfig("embedding differs from the posterior's".into()));
    }
    let masses = post.cell_masses(emb.depth)?;
    let mut w: Vec<f64> = masses[..emb.atoms].to_vec();
    if emb.atoms < masses.len() {
        let s: f64 = w.iter().sum();
        w.iter_mut().for_each(|x| *x /= s);
    }
    Ok(ChoquetMeasure {
        weights: ProbabilityVector::new(&w)?,
    })
}

/// Minimax sup-norm rate `(ln k / k)^{α / (2α + 1)}`.
pub fn minimax_rate(k: u64, alpha: f64) -> Result<f64> {
    if k < 2 {
        return Err(Error::InvalidConfig(format!("k = {k}; at least 2 is required")));
    }
    if !(alpha > 0.0 && alpha <= 1.0) {
        return Err(Error::InvalidConfig(format!("alpha {alpha} outside (0, 1]")));
    }
    let k = k as f64;
    Ok((k.ln() / k).powf(alpha / (2.0 * alpha + 1.0)))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TracePoint {
    pub k: u64,
    /// `max_ℓ |ŵ_ℓ − w_ℓ|`.
    pub sup_error: f64,
    pub rate: f64,
    pub ratio: f64,
}

impl TracePoint {
    pub fn to_csv(points: &[TracePoint]) -> String {
        let mut out = String::from("k,sup_error,minimax_rate,ratio\n");
        for p in points {
            out.push_str(&format!(
                "{},{:.16e},{:.16e},{:.16e}\n",
                p.k, p.sup_error, p.rate, p.ratio
            ));
        }
        out
    }
}

/// Draws atoms iid from `truth` along one stream and records the sup-norm
/// error of the posterior-mean weights after the first `k` draws, for each
/// `k` in the (increasing) grid.
pub fn convergence_trace(
    truth: &ChoquetMeasure,
    k_grid: &[u64],
    params: &PolyaTreeParams,
    emb: &AtomEmbedding,
    seed: u64,
) -> Result<Vec<TracePoint>> {
    if truth.weights.dim() != emb.atoms {
        return Err(Error::DimensionMismatch {
            expected: emb.atoms,
            got: truth.weights.dim(),
        });
    }
    if k_grid.windows(2).any(|w| w[0] >= w[1]) || k_grid.first().is_some_and(|&k| k < 2) {
        return Err(Error::InvalidConfig(
            "k grid must be strictly increasing with k >= 2".into(),
        ));
    }
    let mut rng = seed::rng(seed);
    let cdf: Vec<f64> = truth
        .weights
        .as_slice()
        .iter()
        .scan(0.0, |acc, &w| {
            *acc += w;
            Some(*acc)
        })
        .collect();
    let mut post = PolyaTreePosterior::prior(params.clone(), *emb)?;
    let mut out = Vec::with_capacity(k_grid.len());
    for &k in k_grid {
        while post.k < k {
            let u: f64 = rng.random::<f64>() * cdf[cdf.len() - 1];
            let atom = cdf.iter().position(|&c| u < c).unwrap_or(cdf.len() - 1);
            post.observe(emb.cell(atom)?);
        }
        let est = weight_estimate(&post, emb)?;
        let sup_error = est
            .weights
            .as_slice()
            .iter()
            .zip(truth.weights.as_slice())
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max);
        let rate = minimax_rate(k, params.alpha)?;
        out.push(TracePoint {
            k,
            sup_error,
            rate,
            ratio: sup_error / rate,
        });
    }
    Ok(out)
}
