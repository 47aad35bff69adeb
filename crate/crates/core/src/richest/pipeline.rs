//! Fit, project, count extreme components, refit.

use serde::{Deserialize, Serialize};

use crate::choquet::{choquet_measure, make_frame, ChoquetMeasure};
use crate::error::{Error, Result};
use crate::exec::Execution;
use crate::hull::{attainable_dim, extremal_set_with, pca_project, point_to_hull_distance, PointSet, DEFAULT_EXTREME_TOL};
use crate::seed;
use crate::simplex::ProbabilityVector;

use super::docword::DocTermMatrix;
use super::em::{em_fit, AdmixtureModel, EmOptions};

pub const DEFAULT_PCA_DIM: usize = 5;
pub const DEFAULT_MAX_ROUNDS: usize = 2;
/// Read-off and re-solved Choquet weights must agree this closely.
pub const READOFF_TOL: f64 = 1e-6;
/// Default resolution (Euclidean, in the projected space) below which a
/// fitted component is not counted as extreme.
pub const DEFAULT_RESOLUTION: f64 = 0.05;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct PipelineOptions {
    pub pca_dim: usize,
    pub max_rounds: usize,
    /// Extremality resolution in the projected space.
    pub extreme_tol: f64,
    pub em: EmOptions,
}

impl Default for PipelineOptions {
    fn default() -> Self {
        PipelineOptions {
            pca_dim: DEFAULT_PCA_DIM,
            max_rounds: DEFAULT_MAX_ROUNDS,
            extreme_tol: DEFAULT_RESOLUTION,
            em: EmOptions::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RoundSummary {
    pub round: usize,
    pub components: usize,
    pub loglik: f64,
    pub iterations: usize,
    pub converged: bool,
    pub restart: usize,
    pub max_loglik_drop: f64,
    /// Dimension actually used for the projection (0 when the count ran in
    /// the full space).
    pub pca_dim: usize,
    pub explained_variance_ratio: Vec<f64>,
    /// Extreme components, as row indices of this round's F.
    pub extremal: Vec<usize>,
    pub m: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PipelineReport {
    pub initial_components: usize,
    pub rounds: Vec<RoundSummary>,
    pub final_model: AdmixtureModel,
    pub final_m: usize,
    /// Full-space extremality of each final component.
    pub identifiable: Vec<bool>,
    /// Original term id of each column of F (terms that never occur are
    /// dropped before fitting).
    pub term_ids: Vec<usize>,
    /// Per-document Choquet weights when the final components form a
    /// simplex frame in the term space.
    pub choquet: Option<Vec<ChoquetMeasure>>,
    pub notes: Vec<String>,
}

impl PipelineReport {
    /// M per round, in order.
    pub fn m_sequence(&self) -> Vec<usize> {
        self.rounds.iter().map(|r| r.m).collect()
    }

    pub fn rounds_csv(&self) -> String {
        let mut out = String::from("round,components,loglik,iterations,converged,pca_dim,m\n");
        for r in &self.rounds {
            out.push_str(&format!(
                "{},{},{:.16e},{},{},{},{}\n",
                r.round, r.components, r.loglik, r.iterations, r.converged, r.pca_dim, r.m
            ));
        }
        out
    }
}

/// Counts the extreme rows of `f`: in the top `pca_dim` principal
/// directions when that many are attainable, else in the largest attainable
/// dimension ≥ 2, else in the full space.
fn count_extrema(
    f: &[Vec<f64>],
    pca_dim: usize,
    tol: f64,
    exec: Execution,
    notes: &mut Vec<String>,
    round: usize,
) -> Result<(usize, Vec<f64>, Vec<usize>)> {
    let attainable = if f.len() >= 2 { attainable_dim(f)? } else { 0 };
    let (used, ratios, ps) = if attainable >= 2 {
        let d = pca_dim.min(attainable);
        if d < pca_dim {
            notes.push(format!(
                "round {round}: projection dimension reduced from {pca_dim} to {d} (attainable rank)"
            ));
        }
        let proj = pca_project(f, d)?;
        (d, proj.explained_variance_ratio.clone(), proj.point_set()?)
    } else {
        notes.push(format!(
            "round {round}: components span fewer than 2 dimensions; counted in the full space"
        ));
        (0, Vec::new(), PointSet::from_rows(f)?)
    };
    let extremal = peel(&ps, tol, exec)?
        .into_iter()
        .map(|i| ps.source_index(i))
        .collect();
    Ok((used, ratios, extremal))
}

/// Repeatedly removes the point closest to the hull of the remaining ones
/// while that distance is at most `tol` (ties to the lowest index). With a
/// tiny `tol` this is the ordinary extremal set; at a statistical resolution
/// it keeps one representative of each cluster of near-duplicate components.
pub fn peel(ps: &PointSet, tol: f64, exec: Execution) -> Result<Vec<usize>> {
    if ps.len() < 2 {
        return Ok((0..ps.len()).collect());
    }
    let mut kept = extremal_set_with(ps, DEFAULT_EXTREME_TOL.min(tol), exec)?.indices;
    while kept.len() > 1 {
        let dists = exec.try_map(kept.len(), |a| {
            let others: Vec<&[f64]> = kept
                .iter()
                .enumerate()
                .filter(|&(b, _)| b != a)
                .map(|(_, &i)| ps.point(i))
                .collect();
            point_to_hull_distance(ps.point(kept[a]), &PointSet::from_rows(&others)?)
        })?;
        let (a, &d) = dists
            .iter()
            .enumerate()
            .reduce(|x, y| if y.1 < x.1 { y } else { x })
            .expect("non-empty");
        if d > tol {
            break;
        }
        kept.remove(a);
    }
    Ok(kept)
}

/// Runs the two-stage procedure from `l0` components.
pub fn two_stage(x: &DocTermMatrix, l0: usize, opts: &PipelineOptions) -> Result<PipelineReport> {
    if l0 < 2 {
        return Err(Error::InvalidConfig(format!("L0 = {l0}; at least 2 is required")));
    }
    if opts.pca_dim < 2 {
        return Err(Error::InvalidConfig(format!(
            "pca dimension {}; at least 2 is required",
            opts.pca_dim
        )));
    }
    if opts.max_rounds == 0 {
        return Err(Error::InvalidConfig("at least one round is required".into()));
    }
    let (compact, term_ids) = x.compact_terms();
    let mut notes = Vec::new();
    if compact.n_terms() < x.n_terms() {
        notes.push(format!(
            "dropped {} terms that never occur",
            x.n_terms() - compact.n_terms()
        ));
    }
    let x = compact;
    let mut rounds = Vec::new();
    let mut l = l0;
    let mut model;
    loop {
        let round = rounds.len() + 1;
        let em = EmOptions {
            seed: seed::derive(opts.em.seed, &[round as u64]),
            ..opts.em
        };
        model = em_fit(&x, l, &em)?;
        let (used, ratios, extremal) =
            count_extrema(&model.f, opts.pca_dim, opts.extreme_tol, opts.em.exec, &mut notes, round)?;
        let m = extremal.len();
        rounds.push(RoundSummary {
            round,
            components: l,
            loglik: model.loglik,
            iterations: model.iterations,
            converged: model.converged,
            restart: model.restart,
            max_loglik_drop: model.max_loglik_drop,
            pca_dim: used,
            explained_variance_ratio: ratios,
            extremal,
            m,
        });
        if m >= l || round >= opts.max_rounds {
            break;
        }
        l = m;
    }
    let final_m = rounds.last().map_or(l, |r| r.m);
    let identifiable = if model.components() >= 2 {
        identifiability_check(&model.f, DEFAULT_EXTREME_TOL)?
    } else {
        vec![true]
    };
    let choquet = match choquet_from_fit(&model) {
        Ok(c) => {
            notes.push("document Choquet weights read off from the final fit, with π̂_i = φ̂_i F̂".into());
            Some(c)
        }
        Err(Error::NonSimplexRegime { components, dim }) => {
            notes.push(format!(
                "no Choquet read-off: {components} components in {dim} terms"
            ));
            None
        }
        Err(e) => return Err(e),
    };
    Ok(PipelineReport {
        initial_components: l0,
        rounds,
        final_model: model,
        final_m,
        identifiable,
        term_ids,
        choquet,
        notes,
    })
}

/// Whether each row of `f` lies outside the hull of the other rows, in the
/// full term space.
pub fn identifiability_check(f: &[Vec<f64>], tol: f64) -> Result<Vec<bool>> {
    if f.len() < 2 {
        return Err(Error::Degenerate(format!(
            "{} component(s); at least 2 are required",
            f.len()
        )));
    }
    (0..f.len())
        .map(|i| {
            let others: Vec<&[f64]> = f
                .iter()
                .enumerate()
                .filter(|&(k, _)| k != i)
                .map(|(_, r)| r.as_slice())
                .collect();
            let ps = PointSet::from_rows(&others)?;
            Ok(point_to_hull_distance(&f[i], &ps)? > tol)
        })
        .collect()
}

/// Per-document Choquet weights over the fitted components, read off from
/// Φ̂ and checked against a direct solve at `π̂_i = φ̂_i F̂`.
pub fn choquet_from_fit(model: &AdmixtureModel) -> Result<Vec<ChoquetMeasure>> {
    let (l, j) = (model.components(), model.n_terms());
    if l != j || l < 2 {
        return Err(Error::NonSimplexRegime {
            components: l,
            dim: j,
        });
    }
    let vertices = model
        .f
        .iter()
        .map(|r| ProbabilityVector::new(r))
        .collect::<Result<Vec<_>>>()?;
    let frame = make_frame(&vertices)?;
    (0..model.phi.len())
        .map(|i| {
            let read = ProbabilityVector::new(&model.phi[i])?;
            let pi = ProbabilityVector::new(&model.doc_distribution(i))?;
            let solved = choquet_measure(&pi, &frame)?;
            let gap = read
                .as_slice()
                .iter()
                .zip(solved.weights.as_slice())
                .map(|(a, b)| (a - b).abs())
                .fold(0.0, f64::max);
            if gap > READOFF_TOL {
                return Err(Error::Numeric(format!(
                    "document {i}: read-off and solved Choquet weights differ by {gap:e}"
                )));
            }
            Ok(ChoquetMeasure { weights: read })
        })
        .collect()
}
