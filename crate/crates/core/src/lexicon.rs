//! Left/right seed words by class PMI, and majority-vote article labels.
//!
//! Both training corpora are tokenized into one pooled stream. For a word
//! `w` and side `s`, `PMI(w, s) = log2(P(w, s) / (P(w) P(s)))` with all
//! probabilities taken as token frequencies. A word becomes a seed only on
//! the side where its PMI is positive and higher.

use std::collections::{BTreeMap, HashSet};
use std::fmt;
use std::io::{Read, Write};
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::ingest::ArticleDoc;

/// Lowercased runs of letters, at least two characters long.
pub fn tokenize(text: &str) -> impl Iterator<Item = String> + '_ {
    text.split(|c: char| !c.is_alphabetic())
        .filter(|t| t.chars().nth(1).is_some())
        .map(str::to_lowercase)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct LexiconParams {
    /// Seeds kept per side.
    pub top_n: usize,
    /// Words seen fewer times across both corpora are ignored.
    pub min_count: u64,
}

impl Default for LexiconParams {
    fn default() -> Self {
        Self {
            top_n: 25,
            min_count: 3,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SeedWord {
    pub word: String,
    pub pmi: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SeedLexicon {
    pub left: Vec<SeedWord>,
    pub right: Vec<SeedWord>,
    #[serde(skip)]
    pub top_n: usize,
    /// Set when a side had fewer than `top_n` eligible words.
    #[serde(skip)]
    pub truncated: bool,
}

impl SeedLexicon {
    /// A lexicon from known seed lists, e.g. planted marker words.
    pub fn new(left: Vec<SeedWord>, right: Vec<SeedWord>) -> Result<Self> {
        let lex = Self {
            top_n: left.len().max(right.len()),
            left,
            right,
            truncated: false,
        };
        lex.validate()?;
        Ok(lex)
    }

    fn validate(&self) -> Result<()> {
        let left: HashSet<&str> = self.left.iter().map(|s| s.word.as_str()).collect();
        if let Some(both) = self.right.iter().find(|s| left.contains(s.word.as_str())) {
            return Err(Error::InvalidConfig(format!(
                "seed `{}` is on both sides",
                both.word
            )));
        }
        if let Some(bad) = self
            .left
            .iter()
            .chain(&self.right)
            .find(|s| !(s.pmi.is_finite() && s.pmi > 0.0))
        {
            return Err(Error::InvalidConfig(format!(
                "seed `{}` has non-positive PMI {}",
                bad.word, bad.pmi
            )));
        }
        Ok(())
    }

    pub fn is_empty(&self) -> bool {
        self.left.is_empty() && self.right.is_empty()
    }

    pub fn write_json<W: Write>(&self, mut writer: W) -> Result<()> {
        serde_json::to_writer_pretty(&mut writer, self)?;
        writer.write_all(b"\n")?;
        Ok(())
    }

    pub fn read_json<R: Read>(reader: R) -> Result<Self> {
        let mut lex: SeedLexicon = serde_json::from_reader(reader)?;
        lex.top_n = lex.left.len().max(lex.right.len());
        lex.validate()?;
        Ok(lex)
    }

    fn matcher(&self) -> SeedMatcher<'_> {
        SeedMatcher {
            left: self.left.iter().map(|s| s.word.as_str()).collect(),
            right: self.right.iter().map(|s| s.word.as_str()).collect(),
        }
    }
}

struct SeedMatcher<'a> {
    left: HashSet<&'a str>,
    right: HashSet<&'a str>,
}

impl SeedMatcher<'_> {
    fn hits(&self, body: &str) -> (u64, u64) {
        tokenize(body).fold((0, 0), |(l, r), tok| {
            (
                l + self.left.contains(tok.as_str()) as u64,
                r + self.right.contains(tok.as_str()) as u64,
            )
        })
    }
}

pub fn build_lexicon(
    left: &[ArticleDoc],
    right: &[ArticleDoc],
    params: &LexiconParams,
) -> Result<SeedLexicon> {
    if left.is_empty() {
        return Err(Error::Empty("left training corpus"));
    }
    if right.is_empty() {
        return Err(Error::Empty("right training corpus"));
    }
    if params.top_n == 0 {
        return Err(Error::InvalidConfig(
            "lexicon top_n must be at least 1".into(),
        ));
    }

    // word -> (left count, right count); BTreeMap keeps iteration stable
    let mut counts: BTreeMap<String, (u64, u64)> = BTreeMap::new();
    let (mut n_left, mut n_right) = (0u64, 0u64);
    for doc in left {
        for tok in tokenize(&doc.body) {
            counts.entry(tok).or_default().0 += 1;
            n_left += 1;
        }
    }
    for doc in right {
        for tok in tokenize(&doc.body) {
            counts.entry(tok).or_default().1 += 1;
            n_right += 1;
        }
    }
    if n_left == 0 {
        return Err(Error::Empty("tokens in left training corpus"));
    }
    if n_right == 0 {
        return Err(Error::Empty("tokens in right training corpus"));
    }
    let total = (n_left + n_right) as f64;
    let pmi = |joint: u64, word: u64, side: u64| -> f64 {
        if joint == 0 {
            f64::NEG_INFINITY
        } else {
            (joint as f64 * total / (word as f64 * side as f64)).log2()
        }
    };

    // (seed, occurrences on its side)
    let (mut left_seeds, mut right_seeds) = (Vec::new(), Vec::new());
    for (word, &(l, r)) in &counts {
        if l + r < params.min_count {
            continue;
        }
        let (pmi_left, pmi_right) = (pmi(l, l + r, n_left), pmi(r, l + r, n_right));
        if pmi_left > 0.0 && pmi_left > pmi_right {
            left_seeds.push((
                SeedWord {
                    word: word.clone(),
                    pmi: pmi_left,
                },
                l,
            ));
        } else if pmi_right > 0.0 && pmi_right > pmi_left {
            right_seeds.push((
                SeedWord {
                    word: word.clone(),
                    pmi: pmi_right,
                },
                r,
            ));
        }
    }
    // every word exclusive to one side shares the maximal PMI; among equal
    // PMI the more frequent word wins, then the smaller word
    let rank = |mut seeds: Vec<(SeedWord, u64)>| -> Vec<SeedWord> {
        seeds.sort_by(|(a, ca), (b, cb)| {
            b.pmi
                .total_cmp(&a.pmi)
                .then(cb.cmp(ca))
                .then_with(|| a.word.cmp(&b.word))
        });
        seeds.truncate(params.top_n);
        seeds.into_iter().map(|(s, _)| s).collect()
    };
    let (left_seeds, right_seeds) = (rank(left_seeds), rank(right_seeds));

    let truncated = left_seeds.len() < params.top_n || right_seeds.len() < params.top_n;
    if truncated {
        log::warn!(
            "only {} left and {} right words eligible for {} seeds per side",
            left_seeds.len(),
            right_seeds.len(),
            params.top_n
        );
    }
    Ok(SeedLexicon {
        left: left_seeds,
        right: right_seeds,
        top_n: params.top_n,
        truncated,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Leaning {
    Left,
    Right,
    Neutral,
}

impl Leaning {
    pub fn as_str(self) -> &'static str {
        match self {
            Leaning::Left => "left",
            Leaning::Right => "right",
            Leaning::Neutral => "neutral",
        }
    }

    pub fn from_hits(left: u64, right: u64) -> Self {
        match left.cmp(&right) {
            std::cmp::Ordering::Greater => Leaning::Left,
            std::cmp::Ordering::Less => Leaning::Right,
            std::cmp::Ordering::Equal => Leaning::Neutral,
        }
    }
}

impl fmt::Display for Leaning {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Leaning {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "left" => Ok(Leaning::Left),
            "right" => Ok(Leaning::Right),
            "neutral" => Ok(Leaning::Neutral),
            _ => Err(Error::Unknown {
                what: "label",
                id: s.to_string(),
            }),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ArticleLabel {
    pub article_id: String,
    pub label: Leaning,
    pub left_hits: u64,
    pub right_hits: u64,
}

pub fn label_article(doc: &ArticleDoc, lex: &SeedLexicon) -> Result<ArticleLabel> {
    Ok(label_all(std::slice::from_ref(doc), lex)?.remove(0))
}

pub fn label_all(docs: &[ArticleDoc], lex: &SeedLexicon) -> Result<Vec<ArticleLabel>> {
    if lex.is_empty() {
        return Err(Error::Empty("seed lexicon"));
    }
    let matcher = lex.matcher();
    Ok(docs
        .iter()
        .map(|doc| {
            let (left_hits, right_hits) = matcher.hits(&doc.body);
            ArticleLabel {
                article_id: doc.id.clone(),
                label: Leaning::from_hits(left_hits, right_hits),
                left_hits,
                right_hits,
            }
        })
        .collect())
}

/// Total left and right seed occurrences over a set of articles.
pub fn count_seed_hits<'a, I>(docs: I, lex: &SeedLexicon) -> (u64, u64)
where
    I: IntoIterator<Item = &'a ArticleDoc>,
{
    let matcher = lex.matcher();
    docs.into_iter().fold((0, 0), |(l, r), doc| {
        let (dl, dr) = matcher.hits(&doc.body);
        (l + dl, r + dr)
    })
}

const LABEL_HEADER: [&str; 4] = ["article_id", "label", "left_hits", "right_hits"];

pub fn write_labels<W: Write>(labels: &[ArticleLabel], writer: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    w.write_record(LABEL_HEADER)?;
    for l in labels {
        w.write_record([
            l.article_id.as_str(),
            l.label.as_str(),
            &l.left_hits.to_string(),
            &l.right_hits.to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_labels<R: Read>(reader: R) -> Result<Vec<ArticleLabel>> {
    let mut rdr = csv::Reader::from_reader(reader);
    if rdr.headers()?.iter().ne(LABEL_HEADER.iter().copied()) {
        return Err(Error::Malformed {
            line: 1,
            message: format!("expected header `{}`", LABEL_HEADER.join(",")),
        });
    }
    let mut out = Vec::new();
    for record in rdr.records() {
        let record = record?;
        let line = record.position().map(|p| p.line() as usize).unwrap_or(0);
        let number = |i: usize| {
            record[i].parse::<u64>().map_err(|_| Error::Malformed {
                line,
                message: format!("`{}` is not a count", &record[i]),
            })
        };
        out.push(ArticleLabel {
            article_id: record[0].to_string(),
            label: record[1].parse()?,
            left_hits: number(2)?,
            right_hits: number(3)?,
        });
    }
    Ok(out)
}
