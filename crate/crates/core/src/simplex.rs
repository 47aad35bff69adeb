//! Probability vectors on the unit simplex and reproducible samplers.

use rand::distr::weighted::WeightedIndex;
use rand::Rng;
use rand_distr::{Distribution, Exp1, Gamma};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::seed;

/// Sum-to-one tolerance; vectors outside it are re-normalized.
pub const SUM_TOL: f64 = 1e-9;
/// Negative coordinates down to this value are treated as rounding noise.
pub const NEG_TOL: f64 = 1e-12;

/// Normalizes nonnegative weights of any length ≥ 1.
pub(crate) fn normalize_weights(raw: &[f64]) -> Result<Vec<f64>> {
    if raw.is_empty() {
        return Err(Error::InvalidVector("empty vector".into()));
    }
    let mut out = Vec::with_capacity(raw.len());
    for (i, &x) in raw.iter().enumerate() {
        if !x.is_finite() {
            return Err(Error::InvalidVector(format!("coordinate {i} is not finite")));
        }
        if x < -NEG_TOL {
            return Err(Error::InvalidVector(format!(
                "negative coordinate {x} at index {i}"
            )));
        }
        out.push(x.max(0.0));
    }
    let sum: f64 = out.iter().sum();
    if sum <= 0.0 {
        return Err(Error::InvalidVector("all-zero vector".into()));
    }
    if (sum - 1.0).abs() > SUM_TOL {
        out.iter_mut().for_each(|x| *x /= sum);
    }
    Ok(out)
}

/// A point of the unit simplex Δ^{J-1}, J ≥ 2.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<f64>", into = "Vec<f64>")]
pub struct ProbabilityVector(Vec<f64>);

impl ProbabilityVector {
    /// Validates and (if needed) re-normalizes `raw`.
    pub fn new(raw: &[f64]) -> Result<Self> {
        if raw.len() < 2 {
            return Err(Error::InvalidVector(format!(
                "dimension {} is below 2",
                raw.len()
            )));
        }
        normalize_weights(raw).map(ProbabilityVector)
    }

    /// The j-th standard basis vector of ℝ^dim.
    pub fn vertex(dim: usize, j: usize) -> Result<Self> {
        if j >= dim {
            return Err(Error::IndexOutOfRange { index: j, len: dim });
        }
        let mut v = vec![0.0; dim];
        v[j] = 1.0;
        Self::new(&v)
    }

    /// The barycenter (1/dim, …, 1/dim).
    pub fn barycenter(dim: usize) -> Result<Self> {
        Self::new(&vec![1.0 / dim as f64; dim])
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn into_vec(self) -> Vec<f64> {
        self.0
    }

    /// Total-variation distance ½‖p − q‖₁.
    pub fn total_variation(&self, other: &Self) -> f64 {
        0.5 * self
            .0
            .iter()
            .zip(&other.0)
            .map(|(a, b)| (a - b).abs())
            .sum::<f64>()
    }
}

impl std::ops::Index<usize> for ProbabilityVector {
    type Output = f64;
    fn index(&self, i: usize) -> &f64 {
        &self.0[i]
    }
}

impl TryFrom<Vec<f64>> for ProbabilityVector {
    type Error = Error;
    fn try_from(v: Vec<f64>) -> Result<Self> {
        Self::new(&v)
    }
}

impl From<ProbabilityVector> for Vec<f64> {
    fn from(p: ProbabilityVector) -> Self {
        p.0
    }
}

/// Validates a raw vector as a point of the simplex.
pub fn validate(raw: &[f64]) -> Result<ProbabilityVector> {
    ProbabilityVector::new(raw)
}

/// The law a sampler draws from.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum SamplerKind {
    /// Uniform on Δ^{J-1}.
    Uniform,
    /// Dirichlet(α) on Δ^{J-1}.
    Dirichlet { alpha: Vec<f64> },
    /// A finite mixture of point masses on simplex atoms.
    PointMassMixture {
        atoms: Vec<Vec<f64>>,
        weights: Vec<f64>,
    },
}

#[derive(Deserialize)]
struct RawSamplerSpec {
    #[serde(flatten)]
    kind: SamplerKind,
    #[serde(rename = "J")]
    dim: usize,
    #[serde(default)]
    seed: u64,
}

/// A validated sampler: law, dimension and seed.
///
/// Serializes as e.g. `{"kind":"uniform","J":3,"seed":42}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawSamplerSpec")]
pub struct SamplerSpec {
    #[serde(flatten)]
    kind: SamplerKind,
    #[serde(rename = "J")]
    dim: usize,
    seed: u64,
}

impl TryFrom<RawSamplerSpec> for SamplerSpec {
    type Error = Error;
    fn try_from(raw: RawSamplerSpec) -> Result<Self> {
        SamplerSpec::new(raw.kind, raw.dim, raw.seed)
    }
}

impl SamplerSpec {
    pub fn new(kind: SamplerKind, dim: usize, seed: u64) -> Result<Self> {
        if dim < 2 {
            return Err(Error::InvalidSampler(format!("J = {dim} must be at least 2")));
        }
        let kind = match kind {
            SamplerKind::Uniform => SamplerKind::Uniform,
            SamplerKind::Dirichlet { alpha } => {
                if alpha.len() != dim {
                    return Err(Error::InvalidSampler(format!(
                        "alpha has {} entries, J = {dim}",
                        alpha.len()
                    )));
                }
                if let Some(a) = alpha.iter().find(|a| !(a.is_finite() && **a > 0.0)) {
                    return Err(Error::InvalidSampler(format!(
                        "dirichlet alpha must be strictly positive, got {a}"
                    )));
                }
                SamplerKind::Dirichlet { alpha }
            }
            SamplerKind::PointMassMixture { atoms, weights } => {
                if atoms.is_empty() || atoms.len() != weights.len() {
                    return Err(Error::InvalidSampler(format!(
                        "{} atoms with {} weights",
                        atoms.len(),
                        weights.len()
                    )));
                }
                let weights = normalize_weights(&weights)
                    .map_err(|e| Error::InvalidSampler(format!("weights: {e}")))?;
                let atoms = atoms
                    .iter()
                    .map(|a| {
                        if a.len() != dim {
                            return Err(Error::InvalidSampler(format!(
                                "atom of dimension {} in J = {dim}",
                                a.len()
                            )));
                        }
                        ProbabilityVector::new(a)
                            .map(ProbabilityVector::into_vec)
                            .map_err(|e| Error::InvalidSampler(format!("atom: {e}")))
                    })
                    .collect::<Result<Vec<_>>>()?;
                SamplerKind::PointMassMixture { atoms, weights }
            }
        };
        Ok(SamplerSpec { kind, dim, seed })
    }

    pub fn uniform(dim: usize, seed: u64) -> Result<Self> {
        Self::new(SamplerKind::Uniform, dim, seed)
    }

    pub fn dirichlet(alpha: Vec<f64>, seed: u64) -> Result<Self> {
        let dim = alpha.len();
        Self::new(SamplerKind::Dirichlet { alpha }, dim, seed)
    }

    pub fn kind(&self) -> &SamplerKind {
        &self.kind
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    /// Same law, different seed.
    pub fn with_seed(&self, seed: u64) -> Self {
        SamplerSpec {
            seed,
            ..self.clone()
        }
    }

    /// Draws one point into `out` (length J).
    pub fn draw_into<R: Rng + ?Sized>(&self, rng: &mut R, out: &mut [f64]) {
        debug_assert_eq!(out.len(), self.dim);
        match &self.kind {
            SamplerKind::Uniform => loop {
                for x in out.iter_mut() {
                    *x = Exp1.sample(rng);
                }
                if normalize_in_place(out) {
                    break;
                }
            },
            SamplerKind::Dirichlet { alpha } => loop {
                for (x, &a) in out.iter_mut().zip(alpha) {
                    // alpha > 0 was checked at construction
                    *x = Gamma::new(a, 1.0).expect("positive shape").sample(rng);
                }
                if normalize_in_place(out) {
                    break;
                }
            },
            SamplerKind::PointMassMixture { atoms, weights } => {
                let idx = WeightedIndex::new(weights).expect("validated weights");
                out.copy_from_slice(&atoms[idx.sample(rng)]);
            }
        }
    }

    /// Draws `n` points from `rng` as a flat row-major buffer.
    pub fn draw_flat<R: Rng + ?Sized>(&self, rng: &mut R, n: usize) -> Vec<f64> {
        let mut buf = vec![0.0; n * self.dim];
        for row in buf.chunks_exact_mut(self.dim) {
            self.draw_into(rng, row);
        }
        buf
    }
}

fn normalize_in_place(v: &mut [f64]) -> bool {
    let s: f64 = v.iter().sum();
    if !(s > 0.0 && s.is_finite()) {
        return false;
    }
    v.iter_mut().for_each(|x| *x /= s);
    true
}

/// Draws `n` points from `spec` using the spec's own seed.
pub fn sample(spec: &SamplerSpec, n: usize) -> Result<Vec<ProbabilityVector>> {
    if n == 0 {
        return Err(Error::InvalidConfig("sample size must be at least 1".into()));
    }
    let mut rng = seed::rng(spec.seed);
    let buf = spec.draw_flat(&mut rng, n);
    Ok(buf
        .chunks_exact(spec.dim)
        .map(|c| ProbabilityVector(c.to_vec()))
        .collect())
}
