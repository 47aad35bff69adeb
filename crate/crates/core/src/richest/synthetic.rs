//! Corpora drawn from a known admixture.

use rand::Rng;
use rand_distr::{Binomial, Distribution, Exp1};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::seed;

use super::docword::DocTermMatrix;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SyntheticConfig {
    /// Number of true components.
    pub m_star: usize,
    #[serde(rename = "J")]
    pub dim: usize,
    pub n_docs: usize,
    pub doc_len: u64,
    /// 0 gives unstructured components, 1 gives disjoint supports.
    pub separation: f64,
    /// Symmetric Dirichlet concentration of the mixing weights.
    #[serde(default = "default_mix_alpha")]
    pub mix_alpha: f64,
    pub seed: u64,
}

fn default_mix_alpha() -> f64 {
    1.0
}

impl SyntheticConfig {
    pub fn new(m_star: usize, dim: usize, n_docs: usize, doc_len: u64, separation: f64, seed: u64) -> Self {
        SyntheticConfig {
            m_star,
            dim,
            n_docs,
            doc_len,
            separation,
            mix_alpha: 1.0,
            seed,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.m_star == 0 || self.m_star > self.dim {
            return Err(Error::InvalidConfig(format!(
                "need 1 <= M* <= J, got M* = {} and J = {}",
                self.m_star, self.dim
            )));
        }
        if !(0.0..=1.0).contains(&self.separation) {
            return Err(Error::InvalidConfig(format!(
                "separation {} outside [0, 1]",
                self.separation
            )));
        }
        if !(self.mix_alpha > 0.0 && self.mix_alpha.is_finite()) {
            return Err(Error::InvalidConfig(format!(
                "mixing concentration {} must be positive",
                self.mix_alpha
            )));
        }
        if self.n_docs == 0 || self.doc_len == 0 {
            return Err(Error::InvalidConfig("documents must be non-empty".into()));
        }
        Ok(())
    }
}

/// A corpus together with the admixture that generated it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SyntheticCorpus {
    pub config: SyntheticConfig,
    pub matrix: DocTermMatrix,
    /// n×M* mixing weights.
    pub phi: Vec<Vec<f64>>,
    /// M*×J components.
    pub f: Vec<Vec<f64>>,
}

impl SyntheticCorpus {
    pub fn doc_distribution(&self, i: usize) -> Vec<f64> {
        let mut out = vec![0.0; self.config.dim];
        for (&w, row) in self.phi[i].iter().zip(&self.f) {
            for (o, &v) in out.iter_mut().zip(row) {
                *o += w * v;
            }
        }
        out
    }
}

fn dirichlet<R: Rng>(rng: &mut R, alpha: f64, k: usize) -> Vec<f64> {
    let gamma = rand_distr::Gamma::new(alpha, 1.0).expect("positive shape");
    loop {
        let g: Vec<f64> = (0..k)
            .map(|_| if alpha == 1.0 { Exp1.sample(rng) } else { gamma.sample(rng) })
            .collect();
        let s: f64 = g.iter().sum();
        if s > 0.0 {
            return g.into_iter().map(|v| v / s).collect();
        }
    }
}

/// Multinomial draw by sequential binomial splitting.
pub(crate) fn multinomial<R: Rng>(rng: &mut R, n: u64, p: &[f64]) -> Vec<u64> {
    let mut out = vec![0; p.len()];
    let mut left = n;
    let mut mass = 1.0;
    for (o, &pj) in out.iter_mut().zip(p) {
        if left == 0 {
            break;
        }
        let q = if mass > 0.0 { (pj / mass).clamp(0.0, 1.0) } else { 1.0 };
        let c = Binomial::new(left, q).expect("probability in [0, 1]").sample(rng);
        *o = c;
        left -= c;
        mass -= pj;
    }
    if let Some(last) = out.last_mut() {
        *last += left;
    }
    out
}

/// Anchor term of component `k`: anchors are spread evenly over the terms.
pub fn anchor(k: usize, m: usize, j: usize) -> usize {
    k * j / m
}

/// Draws `f*_m = (1 − s) g_m + s e_{a_m}` with `g_m` uniform on Δ^{J-1} and
/// `a_m` the m-th anchor term, mixing
/// weights `φ*_i ~ Dirichlet(mix_alpha)`, and documents
/// `x_i ~ Mult(doc_len, φ*_i F*)`.
pub fn synthetic_corpus(cfg: &SyntheticConfig) -> Result<SyntheticCorpus> {
    cfg.validate()?;
    let (m, j) = (cfg.m_star, cfg.dim);
    let mut rng = seed::child_rng(cfg.seed, &[0]);
    let f: Vec<Vec<f64>> = (0..m)
        .map(|k| {
            let mut row: Vec<f64> = dirichlet(&mut rng, 1.0, j)
                .into_iter()
                .map(|v| (1.0 - cfg.separation) * v)
                .collect();
            row[anchor(k, m, j)] += cfg.separation;
            row
        })
        .collect();
    let mut rng = seed::child_rng(cfg.seed, &[1]);
    let mut phi = Vec::with_capacity(cfg.n_docs);
    let mut rows = Vec::with_capacity(cfg.n_docs);
    for _ in 0..cfg.n_docs {
        let w = dirichlet(&mut rng, cfg.mix_alpha, m);
        let mut pi = vec![0.0; j];
        for (&wk, row) in w.iter().zip(&f) {
            for (p, &v) in pi.iter_mut().zip(row) {
                *p += wk * v;
            }
        }
        rows.push(multinomial(&mut rng, cfg.doc_len, &pi));
        phi.push(w);
    }
    Ok(SyntheticCorpus {
        config: cfg.clone(),
        matrix: DocTermMatrix::from_dense(&rows)?,
        phi,
        f,
    })
}
