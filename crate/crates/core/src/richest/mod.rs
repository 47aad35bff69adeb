//! The richest cheap model: admixture EM on document-term counts, extreme
//! component counting in a PCA projection, and refitting with the
//! identifiable components only.

mod docword;
mod em;
mod pipeline;
mod synthetic;

pub use docword::{load_docword, DocTermMatrix};
pub use em::{
    em_fit, em_fit_from, loglik, AdmixtureModel, EmOptions, DEFAULT_MAX_ITERS, DEFAULT_REL_TOL,
    DEFAULT_RESTARTS, MONOTONE_SLACK, SMOOTHING,
};
pub use pipeline::{
    choquet_from_fit, identifiability_check, two_stage, PipelineOptions, PipelineReport,
    peel, RoundSummary, DEFAULT_MAX_ROUNDS, DEFAULT_PCA_DIM, DEFAULT_RESOLUTION, READOFF_TOL,
};
pub use synthetic::{synthetic_corpus, SyntheticConfig, SyntheticCorpus};
