//! Geometry of finite admixture models on the probability simplex.
//!
//! The crate covers five related tools:
//!
//! * [`simplex`]: probability vectors and seeded samplers on Δ^{J-1};
//! * [`hull`]: extreme points, hull distances, flag counts and PCA;
//! * [`asymptotics`]: Monte Carlo studies of how the number of extreme
//!   points of random hulls grows, its normal approximation, and related
//!   diagnostics;
//! * [`choquet`] and [`polya`]: recovery of mixing weights over the
//!   vertices of a simplex frame, directly and through a Pólya tree
//!   posterior;
//! * [`richest`]: admixture EM on document-term counts and the two-stage
//!   procedure that refits with only the identifiable components.
//!
//! Data-parallel loops run on rayon when the `parallel` feature (default)
//! is enabled; results are identical for any thread count.

pub mod asymptotics;
pub mod choquet;
pub mod error;
pub mod exec;
pub mod hull;
pub mod polya;
pub mod richest;
pub mod seed;
pub mod simplex;

pub use error::{Error, Result};
pub use exec::Execution;
pub use simplex::{ProbabilityVector, SamplerKind, SamplerSpec};
