//! Bayesian n-gram language modeling with Pitman-Yor process priors.
//!
//! The toolkit provides three model families over a shared corpus layer:
//!
//! - a hierarchical Pitman-Yor n-gram model trained by collapsed Gibbs
//!   sampling over Chinese-restaurant seating arrangements, with
//!   slice-sampled hyperparameters;
//! - a compound-aware extension whose word distributions back off into a
//!   context-conditioned head model and a head-conditioned modifier bigram
//!   model, driven by a precomputed segmentation dictionary;
//! - an interpolated modified Kneser-Ney baseline.
//!
//! Evaluation computes perplexity with per-token records, subset breakdowns
//! by training hit-length and compound status, and per-event probability
//! margins between two models. All sampling is driven by an injected seeded
//! generator, and every artifact (model files, reports, manifests) is
//! byte-reproducible given the same inputs and seed.

pub mod corpus;
pub mod crp;
pub mod error;
pub mod eval;
pub mod hpylm;
pub mod hpylmc;
pub mod io;
pub mod math;
pub mod mkn;
pub mod model;
pub mod segmentation;
pub mod slice;

pub use corpus::{Corpus, NgramEvents, Vocabulary, WordId};
pub use error::{Error, Result};
pub use model::{LanguageModel, Model};

/// The deterministic generator used throughout: all stochastic operations
/// take it explicitly so runs are reproducible from a seed.
pub type Rng = rand_chacha::ChaCha8Rng;

pub fn seeded_rng(seed: u64) -> Rng {
    use rand::SeedableRng;
    Rng::seed_from_u64(seed)
}
