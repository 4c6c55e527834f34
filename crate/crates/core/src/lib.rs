//! Non-personalised news recommendation through multi-winner voting.
//!
//! The pipeline turns raw reading events into a complete user × article
//! score matrix, treats that matrix as an election, and audits every
//! resulting committee on two axes:
//!
//! | Stage | Module |
//! |-------|--------|
//! | parse events and article bodies | [`ingest`] |
//! | active time → per-user scores in `[1, 10]` | [`scoring`] |
//! | complete the sparse matrix | [`factorization`] |
//! | ballots and κ-winner committees | [`elections`] |
//! | left/right seed words by PMI, article labels | [`lexicon`] |
//! | satisfaction, reference bias ρ, committee bias | [`metrics`] |
//! | seeded synthetic data with planted structure | [`synth`] |
//!
//! ```
//! use newsfair_core::metrics::bias;
//!
//! // ten left and ten right seed hits on a platform that reads left 1.423×
//! let b = bias(10, 10, 1.423).unwrap();
//! assert!((b - 0.17457).abs() < 1e-5);
//! ```

pub mod assignment;
pub mod elections;
mod error;
pub mod factorization;
pub mod ingest;
pub mod lexicon;
pub mod metrics;
pub mod scoring;
pub mod synth;

pub use elections::{BallotProfile, Committee, Rule};
pub use error::{Error, ErrorKind, Result};
pub use factorization::{FactorizationConfig, FactorizationResult};
pub use ingest::{ArticleDoc, EventFormat, IngestStats, InteractionEvent, InteractionLog};
pub use lexicon::{ArticleLabel, Leaning, LexiconParams, SeedLexicon, SeedWord};
pub use metrics::FairnessReport;
pub use scoring::ScoreMatrix;
pub use synth::{SynthConfig, SynthData};
