//! Seeded inputs shared by the benchmarks.

use newsfair_core::synth::{self, impartial_culture};
use newsfair_core::{BallotProfile, ScoreMatrix, SynthConfig, SynthData};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Synthetic platform data at the given size.
pub fn platform(n_users: usize, n_articles: usize) -> SynthData {
    synth::generate(&SynthConfig {
        n_users,
        n_articles,
        ..SynthConfig::default()
    })
    .expect("valid synthetic config")
}

/// The sparse score matrix of [`platform`].
pub fn observed_scores(n_users: usize, n_articles: usize) -> ScoreMatrix {
    let data = platform(n_users, n_articles);
    let raw = newsfair_core::scoring::raw_scores(&data.log).expect("non-empty log");
    newsfair_core::scoring::rescale_per_user(&raw).expect("non-empty scores")
}

pub fn random_profile(candidates: usize, voters: usize, seed: u64) -> BallotProfile {
    impartial_culture(candidates, voters, &mut ChaCha8Rng::seed_from_u64(seed))
}
