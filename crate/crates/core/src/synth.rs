//! Seeded synthetic platforms with planted ideological structure.
//!
//! Articles are filler text plus side-specific marker words. Each marker
//! token comes from the article's own side with probability
//! `(1 + polarization) / 2`. Users also get a side, and their reading time
//! on own-side articles has its mean scaled by `1 + 3·polarization`.
//! Alongside the platform corpus, two "press" corpora (one per side) are
//! generated for lexicon training.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Exp};
use serde::{Deserialize, Serialize};

use crate::elections::BallotProfile;
use crate::error::{Error, Result};
use crate::ingest::{ArticleDoc, InteractionEvent, InteractionLog};
use crate::lexicon::{ArticleLabel, Leaning, SeedLexicon, SeedWord};

const FILLER_SYLLABLES: [&str; 12] = [
    "ba", "de", "fi", "go", "ku", "ma", "no", "pu", "sa", "te", "vi", "zo",
];
const FILLER_VOCAB: usize = 200;
const FILLER_PER_ARTICLE: usize = 60;
const MARKERS_PER_ARTICLE: usize = 8;
const VIEW_PROBABILITY: f64 = 0.3;
const REVISIT_PROBABILITY: f64 = 0.1;
const MEAN_ACTIVE_TIME: f64 = 40.0;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SynthConfig {
    pub n_users: usize,
    pub n_articles: usize,
    /// Share of articles (and of users) on the left.
    pub left_fraction: f64,
    /// 0 gives no side signal in text or reading time, 1 gives pure sides.
    pub polarization: f64,
    /// Marker words per side.
    pub seed_vocab_size: usize,
    /// Documents per side in each training press corpus.
    pub press_docs: usize,
    pub rng_seed: u64,
}

impl Default for SynthConfig {
    fn default() -> Self {
        Self {
            n_users: 200,
            n_articles: 50,
            left_fraction: 0.5,
            polarization: 0.8,
            seed_vocab_size: 25,
            press_docs: 40,
            rng_seed: 0,
        }
    }
}

impl SynthConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |msg: &str| Err(Error::InvalidConfig(format!("synth: {msg}")));
        if self.n_users == 0 || self.n_articles == 0 {
            return bad("n_users and n_articles must be positive");
        }
        if !(0.0..=1.0).contains(&self.left_fraction) {
            return bad("left_fraction must lie in [0, 1]");
        }
        if !(0.0..=1.0).contains(&self.polarization) {
            return bad("polarization must lie in [0, 1]");
        }
        if self.seed_vocab_size == 0 || self.press_docs == 0 {
            return bad("seed_vocab_size and press_docs must be positive");
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SynthData {
    pub log: InteractionLog,
    pub corpus: Vec<ArticleDoc>,
    /// True side of every platform article, with planted marker counts.
    pub labels: Vec<ArticleLabel>,
    pub left_press: Vec<ArticleDoc>,
    pub right_press: Vec<ArticleDoc>,
    pub left_markers: Vec<String>,
    pub right_markers: Vec<String>,
}

impl SynthData {
    /// The planted markers as a lexicon (unit PMI placeholders).
    pub fn planted_lexicon(&self) -> SeedLexicon {
        let seeds = |words: &[String]| {
            words
                .iter()
                .map(|w| SeedWord {
                    word: w.clone(),
                    pmi: 1.0,
                })
                .collect()
        };
        SeedLexicon::new(seeds(&self.left_markers), seeds(&self.right_markers))
            .expect("planted vocabularies are disjoint")
    }
}

fn letters(mut i: usize) -> String {
    let mut s = Vec::new();
    for _ in 0..2 {
        s.push(b'a' + (i % 26) as u8);
        i /= 26;
    }
    while i > 0 {
        s.push(b'a' + (i % 26) as u8);
        i /= 26;
    }
    s.reverse();
    String::from_utf8(s).unwrap()
}

fn filler_word(mut i: usize) -> String {
    let mut w = String::new();
    for _ in 0..3 {
        w.push_str(FILLER_SYLLABLES[i % FILLER_SYLLABLES.len()]);
        i /= FILLER_SYLLABLES.len();
    }
    w
}

struct Vocab {
    filler: Vec<String>,
    left: Vec<String>,
    right: Vec<String>,
}

impl Vocab {
    fn new(markers: usize) -> Self {
        Self {
            filler: (0..FILLER_VOCAB).map(filler_word).collect(),
            left: (0..markers)
                .map(|i| format!("left{}", letters(i)))
                .collect(),
            right: (0..markers)
                .map(|i| format!("right{}", letters(i)))
                .collect(),
        }
    }

    /// A body for an article on `side`; returns the text and its planted
    /// (left, right) marker counts.
    fn body(&self, side: Leaning, polarization: f64, rng: &mut ChaCha8Rng) -> (String, u64, u64) {
        let own = (1.0 + polarization) / 2.0;
        let mut tokens: Vec<&str> = (0..FILLER_PER_ARTICLE)
            .map(|_| self.filler[rng.random_range(0..self.filler.len())].as_str())
            .collect();
        let (mut left_hits, mut right_hits) = (0, 0);
        for _ in 0..MARKERS_PER_ARTICLE {
            let from_left = (side == Leaning::Left) == rng.random_bool(own);
            let pool = if from_left {
                left_hits += 1;
                &self.left
            } else {
                right_hits += 1;
                &self.right
            };
            tokens.push(&pool[rng.random_range(0..pool.len())]);
        }
        tokens.shuffle(rng);
        (tokens.join(" "), left_hits, right_hits)
    }
}

/// Sides for `n` items: `round(n · left_fraction)` left, shuffled.
fn sides(n: usize, left_fraction: f64, rng: &mut ChaCha8Rng) -> Vec<Leaning> {
    let n_left = (n as f64 * left_fraction).round() as usize;
    let mut out: Vec<Leaning> = (0..n)
        .map(|i| {
            if i < n_left {
                Leaning::Left
            } else {
                Leaning::Right
            }
        })
        .collect();
    out.shuffle(rng);
    out
}

fn draw_time(mean: f64, rng: &mut ChaCha8Rng) -> f64 {
    let t: f64 = Exp::new(1.0 / mean).expect("positive rate").sample(rng);
    t.ceil().max(1.0)
}

pub fn generate(cfg: &SynthConfig) -> Result<SynthData> {
    cfg.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.rng_seed);
    let vocab = Vocab::new(cfg.seed_vocab_size);

    let article_sides = sides(cfg.n_articles, cfg.left_fraction, &mut rng);
    let mut corpus = Vec::with_capacity(cfg.n_articles);
    let mut labels = Vec::with_capacity(cfg.n_articles);
    for (i, &side) in article_sides.iter().enumerate() {
        let id = format!("a{i:04}");
        let (body, left_hits, right_hits) = vocab.body(side, cfg.polarization, &mut rng);
        corpus.push(ArticleDoc {
            id: id.clone(),
            body,
            source: None,
        });
        labels.push(ArticleLabel {
            article_id: id,
            label: side,
            left_hits,
            right_hits,
        });
    }

    let press = |side: Leaning, prefix: &str, source: &str, rng: &mut ChaCha8Rng| {
        (0..cfg.press_docs)
            .map(|i| ArticleDoc {
                id: format!("{prefix}{i:04}"),
                body: vocab.body(side, cfg.polarization, rng).0,
                source: Some(source.to_string()),
            })
            .collect::<Vec<_>>()
    };
    let left_press = press(Leaning::Left, "lp", "left-press", &mut rng);
    let right_press = press(Leaning::Right, "rp", "right-press", &mut rng);

    let user_sides = sides(cfg.n_users, cfg.left_fraction, &mut rng);
    let own_mean = MEAN_ACTIVE_TIME * (1.0 + 3.0 * cfg.polarization);
    let mut events = Vec::new();
    let mut viewed = vec![false; cfg.n_articles];
    for (u, &user_side) in user_sides.iter().enumerate() {
        let user = format!("u{u:04}");
        let start = events.len();
        let mut read = |a: usize, rng: &mut ChaCha8Rng, events: &mut Vec<InteractionEvent>| {
            let mean = if article_sides[a] == user_side {
                own_mean
            } else {
                MEAN_ACTIVE_TIME
            };
            events.push(InteractionEvent {
                user_id: user.clone(),
                article_id: corpus[a].id.clone(),
                active_time: draw_time(mean, rng),
            });
            if rng.random_bool(REVISIT_PROBABILITY) {
                events.push(InteractionEvent {
                    user_id: user.clone(),
                    article_id: corpus[a].id.clone(),
                    active_time: draw_time(mean, rng),
                });
            }
            viewed[a] = true;
        };
        for a in 0..cfg.n_articles {
            if rng.random_bool(VIEW_PROBABILITY) {
                read(a, &mut rng, &mut events);
            }
        }
        if events.len() == start {
            let a = rng.random_range(0..cfg.n_articles);
            read(a, &mut rng, &mut events);
        }
    }
    for a in 0..cfg.n_articles {
        if !viewed[a] {
            let u = rng.random_range(0..cfg.n_users);
            events.push(InteractionEvent {
                user_id: format!("u{u:04}"),
                article_id: corpus[a].id.clone(),
                active_time: draw_time(MEAN_ACTIVE_TIME, &mut rng),
            });
        }
    }

    Ok(SynthData {
        log: InteractionLog::new(events)?,
        corpus,
        labels,
        left_press,
        right_press,
        left_markers: vocab.left,
        right_markers: vocab.right,
    })
}

/// Impartial culture: every voter ranks candidates `c00, c01, …` uniformly
/// at random.
pub fn impartial_culture(candidates: usize, voters: usize, rng: &mut impl Rng) -> BallotProfile {
    let ids = (0..candidates).map(|c| format!("c{c:02}")).collect();
    let names = (0..voters).map(|v| format!("v{v:02}")).collect();
    let rankings = (0..voters)
        .map(|_| {
            let mut r: Vec<usize> = (0..candidates).collect();
            r.shuffle(rng);
            r
        })
        .collect();
    BallotProfile::new(ids, names, rankings).expect("non-empty impartial culture profile")
}
