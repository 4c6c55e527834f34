//! Active time to per-user affinity scores.
//!
//! `Score(u, a) = ActTime(u, a) / Σ_u' ActTime(u', a) · N_a`, then each
//! user's scores are mapped affinely onto `[1, 10]` so fast and slow readers
//! share a scale.

use std::cmp::Ordering;
use std::collections::{BTreeMap, BTreeSet};
use std::io::{Read, Write};

use serde::Serialize;

use crate::error::{Error, Result};
use crate::ingest::InteractionLog;

pub const SCORE_MIN: f64 = 1.0;
pub const SCORE_MAX: f64 = 10.0;
/// Score given to every entry of a user whose raw scores are all equal.
pub const DEGENERATE_SCORE: f64 = 5.5;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ArticleStats {
    pub article_id: String,
    pub total_time: f64,
    /// Distinct users with at least one event (`N_a`).
    pub viewer_count: usize,
}

/// Summed active time per (user, article) pair.
pub fn active_time(log: &InteractionLog) -> BTreeMap<(String, String), f64> {
    let mut totals = BTreeMap::new();
    for ev in log.events() {
        *totals
            .entry((ev.user_id.clone(), ev.article_id.clone()))
            .or_insert(0.0) += ev.active_time;
    }
    totals
}

pub fn article_stats(log: &InteractionLog) -> Vec<ArticleStats> {
    let mut per_article: BTreeMap<&str, (f64, BTreeSet<&str>)> = BTreeMap::new();
    for ev in log.events() {
        let entry = per_article.entry(&ev.article_id).or_default();
        entry.0 += ev.active_time;
        entry.1.insert(&ev.user_id);
    }
    per_article
        .into_iter()
        .map(|(id, (total, viewers))| ArticleStats {
            article_id: id.to_string(),
            total_time: total,
            viewer_count: viewers.len(),
        })
        .collect()
}

/// Unscaled scores; for each article they sum to its viewer count.
pub fn raw_scores(log: &InteractionLog) -> Result<BTreeMap<(String, String), f64>> {
    if log.is_empty() {
        return Err(Error::Empty("interaction log"));
    }
    let totals = active_time(log);
    let stats: BTreeMap<String, ArticleStats> = article_stats(log)
        .into_iter()
        .map(|s| (s.article_id.clone(), s))
        .collect();
    Ok(totals
        .into_iter()
        .map(|((user, article), time)| {
            let s = &stats[&article];
            let score = time / s.total_time * s.viewer_count as f64;
            ((user, article), score)
        })
        .collect())
}

/// Maps each user's raw scores affinely so their minimum lands on 1 and
/// their maximum on 10.
pub fn rescale_per_user(raw: &BTreeMap<(String, String), f64>) -> Result<ScoreMatrix> {
    if raw.is_empty() {
        return Err(Error::Empty("raw scores"));
    }
    let mut ranges: BTreeMap<&str, (f64, f64)> = BTreeMap::new();
    for ((user, _), &score) in raw {
        let r = ranges
            .entry(user)
            .or_insert((f64::INFINITY, f64::NEG_INFINITY));
        r.0 = r.0.min(score);
        r.1 = r.1.max(score);
    }
    let triplets = raw.iter().map(|((user, article), &score)| {
        let (lo, hi) = ranges[user.as_str()];
        let scaled = if hi > lo {
            let t = (score - lo) / (hi - lo);
            SCORE_MIN + (SCORE_MAX - SCORE_MIN) * t
        } else {
            DEGENERATE_SCORE
        };
        (user.clone(), article.clone(), scaled)
    });
    ScoreMatrix::from_observed(triplets)
}

/// Ranks articles by descending score; equal scores go to the smaller index,
/// which is the smaller id because article lists are kept sorted.
pub fn preference_order(row: &[f64]) -> Vec<usize> {
    let mut order: Vec<usize> = (0..row.len()).collect();
    order.sort_by(|&a, &b| match row[b].total_cmp(&row[a]) {
        Ordering::Equal => a.cmp(&b),
        o => o,
    });
    order
}

/// Users × articles scores: the sparse observed `V` plus, once filled in,
/// the dense merged `V*`.
///
/// Users and articles are kept in ascending id order, so index order and id
/// order coincide everywhere downstream.
#[derive(Debug, Clone, PartialEq)]
pub struct ScoreMatrix {
    users: Vec<String>,
    articles: Vec<String>,
    observed: BTreeMap<(usize, usize), f64>,
    completed: Option<Vec<f64>>,
}

impl ScoreMatrix {
    /// Builds an observed-only matrix from `(user, article, score)` triplets.
    pub fn from_observed<I>(triplets: I) -> Result<Self>
    where
        I: IntoIterator<Item = (String, String, f64)>,
    {
        let triplets: Vec<_> = triplets.into_iter().collect();
        if triplets.is_empty() {
            return Err(Error::Empty("score triplets"));
        }
        let users: Vec<String> = triplets
            .iter()
            .map(|t| t.0.clone())
            .collect::<BTreeSet<_>>()
            .into_iter()
            .collect();
        let articles: Vec<String> = triplets
            .iter()
            .map(|t| t.1.clone())
            .collect::<BTreeSet<_>>()
            .into_iter()
            .collect();
        let mut observed = BTreeMap::new();
        for (user, article, score) in triplets {
            if !score.is_finite() {
                return Err(Error::InvalidConfig(format!(
                    "score for ({user}, {article}) is not finite"
                )));
            }
            let key = (
                users.binary_search(&user).unwrap(),
                articles.binary_search(&article).unwrap(),
            );
            if observed.insert(key, score).is_some() {
                return Err(Error::InvalidConfig(format!(
                    "duplicate score for ({user}, {article})"
                )));
            }
        }
        Ok(Self {
            users,
            articles,
            observed,
            completed: None,
        })
    }

    /// A fully known matrix, e.g. a previously written `V*`. Every cell
    /// counts as observed.
    pub fn from_dense(users: Vec<String>, articles: Vec<String>, values: Vec<f64>) -> Result<Self> {
        check_sorted_unique(&users, "user")?;
        check_sorted_unique(&articles, "article")?;
        if users.is_empty() || articles.is_empty() {
            return Err(Error::Empty("dense score matrix"));
        }
        if values.len() != users.len() * articles.len() {
            return Err(Error::InvalidConfig(format!(
                "expected {} values for a {}×{} matrix, got {}",
                users.len() * articles.len(),
                users.len(),
                articles.len(),
                values.len()
            )));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidConfig(
                "dense matrix has non-finite values".into(),
            ));
        }
        let m = articles.len();
        let observed = values
            .iter()
            .enumerate()
            .map(|(i, &v)| ((i / m, i % m), v))
            .collect();
        Ok(Self {
            users,
            articles,
            observed,
            completed: Some(values),
        })
    }

    pub fn users(&self) -> &[String] {
        &self.users
    }

    pub fn articles(&self) -> &[String] {
        &self.articles
    }

    pub fn n_users(&self) -> usize {
        self.users.len()
    }

    pub fn n_articles(&self) -> usize {
        self.articles.len()
    }

    pub fn user_index(&self, id: &str) -> Option<usize> {
        self.users.binary_search_by(|u| u.as_str().cmp(id)).ok()
    }

    pub fn article_index(&self, id: &str) -> Option<usize> {
        self.articles.binary_search_by(|a| a.as_str().cmp(id)).ok()
    }

    /// Observed entries keyed by (user index, article index), user-major.
    pub fn observed(&self) -> &BTreeMap<(usize, usize), f64> {
        &self.observed
    }

    pub fn observed_score(&self, user: usize, article: usize) -> Option<f64> {
        self.observed.get(&(user, article)).copied()
    }

    pub fn is_completed(&self) -> bool {
        self.completed.is_some()
    }

    pub fn completed(&self) -> Option<&[f64]> {
        self.completed.as_deref()
    }

    pub fn completed_row(&self, user: usize) -> Option<&[f64]> {
        let m = self.articles.len();
        self.completed
            .as_deref()
            .map(|values| &values[user * m..(user + 1) * m])
    }

    /// Article indices ordered by this user's completed scores.
    pub fn preference_order(&self, user: usize) -> Result<Vec<usize>> {
        let row = self.completed_row(user).ok_or(Error::NotCompleted)?;
        Ok(preference_order(row))
    }

    pub(crate) fn with_completed(&self, values: Vec<f64>) -> Self {
        debug_assert_eq!(values.len(), self.users.len() * self.articles.len());
        Self {
            completed: Some(values),
            ..self.clone()
        }
    }

    /// Writes observed entries as `user_id,article_id,score`.
    pub fn write_observed<W: Write>(&self, writer: W) -> Result<()> {
        let cells = self.observed.iter().map(|(&(u, a), &v)| (u, a, v));
        write_triplets(writer, &self.users, &self.articles, cells)
    }

    /// Writes every cell of `V*` as `user_id,article_id,score`.
    pub fn write_completed<W: Write>(&self, writer: W) -> Result<()> {
        let values = self.completed.as_deref().ok_or(Error::NotCompleted)?;
        let m = self.articles.len();
        let cells = values.iter().enumerate().map(|(i, &v)| (i / m, i % m, v));
        write_triplets(writer, &self.users, &self.articles, cells)
    }

    pub fn read_observed<R: Read>(reader: R) -> Result<Self> {
        Self::from_observed(read_triplets(reader)?)
    }

    /// Reads a matrix written by [`ScoreMatrix::write_completed`].
    pub fn read_completed<R: Read>(reader: R) -> Result<Self> {
        let sparse = Self::from_observed(read_triplets(reader)?)?;
        let (n, m) = (sparse.n_users(), sparse.n_articles());
        if sparse.observed.len() != n * m {
            return Err(Error::InvalidConfig(format!(
                "completed matrix has {} of {} cells",
                sparse.observed.len(),
                n * m
            )));
        }
        let values = sparse.observed.values().copied().collect();
        Self::from_dense(sparse.users, sparse.articles, values)
    }
}

fn check_sorted_unique(ids: &[String], what: &'static str) -> Result<()> {
    match ids.windows(2).find(|w| w[0] >= w[1]) {
        Some(w) => Err(Error::InvalidConfig(format!(
            "{what} ids must be unique and ascending (`{}` before `{}`)",
            w[0], w[1]
        ))),
        None => Ok(()),
    }
}

const TRIPLET_HEADER: [&str; 3] = ["user_id", "article_id", "score"];

fn write_triplets<W, I>(writer: W, users: &[String], articles: &[String], cells: I) -> Result<()>
where
    W: Write,
    I: Iterator<Item = (usize, usize, f64)>,
{
    let mut w = csv::Writer::from_writer(writer);
    w.write_record(TRIPLET_HEADER)?;
    for (u, a, v) in cells {
        w.write_record([users[u].as_str(), articles[a].as_str(), &v.to_string()])?;
    }
    w.flush()?;
    Ok(())
}

fn read_triplets<R: Read>(reader: R) -> Result<Vec<(String, String, f64)>> {
    let mut rdr = csv::Reader::from_reader(reader);
    let header = rdr.headers()?.clone();
    if header.iter().ne(TRIPLET_HEADER.iter().copied()) {
        return Err(Error::Malformed {
            line: 1,
            message: format!("expected header `{}`", TRIPLET_HEADER.join(",")),
        });
    }
    let mut out = Vec::new();
    for record in rdr.records() {
        let record = record?;
        let line = record.position().map(|p| p.line() as usize).unwrap_or(0);
        let score: f64 = record[2].parse().map_err(|_| Error::Malformed {
            line,
            message: format!("score `{}` is not a number", &record[2]),
        })?;
        out.push((record[0].to_string(), record[1].to_string(), score));
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ingest::InteractionEvent;
    use proptest::prelude::*;

    fn log(events: &[(&str, &str, f64)]) -> InteractionLog {
        InteractionLog::new(
            events
                .iter()
                .map(|&(u, a, t)| InteractionEvent {
                    user_id: u.into(),
                    article_id: a.into(),
                    active_time: t,
                })
                .collect(),
        )
        .unwrap()
    }

    fn key(u: &str, a: &str) -> (String, String) {
        (u.to_string(), a.to_string())
    }

    #[test]
    fn sole_viewer_scores_one() {
        let raw = raw_scores(&log(&[("u1", "a", 10.0)])).unwrap();
        assert_eq!(raw[&key("u1", "a")], 1.0);
    }

    #[test]
    fn two_viewers() {
        let raw = raw_scores(&log(&[("u1", "a", 30.0), ("u2", "a", 10.0)])).unwrap();
        assert_eq!(raw[&key("u1", "a")], 1.5);
        assert_eq!(raw[&key("u2", "a")], 0.5);
    }

    #[test]
    fn repeated_events_are_summed() {
        let raw = raw_scores(&log(&[
            ("u1", "a", 10.0),
            ("u1", "a", 20.0),
            ("u2", "a", 10.0),
        ]))
        .unwrap();
        assert_eq!(raw[&key("u1", "a")], 1.5);
        let stats = article_stats(&log(&[("u1", "a", 10.0), ("u1", "a", 20.0)]));
        assert_eq!(stats[0].viewer_count, 1);
        assert_eq!(stats[0].total_time, 30.0);
    }

    #[test]
    fn empty_log_rejected() {
        assert!(matches!(
            raw_scores(&InteractionLog::default()),
            Err(Error::Empty(_))
        ));
    }

    #[test]
    fn rescale_endpoints() {
        let raw = BTreeMap::from([(key("u", "a"), 0.5), (key("u", "b"), 1.5)]);
        let m = rescale_per_user(&raw).unwrap();
        assert_eq!(m.observed_score(0, 0), Some(1.0));
        assert_eq!(m.observed_score(0, 1), Some(10.0));
    }

    #[test]
    fn rescale_midpoint() {
        let raw = BTreeMap::from([
            (key("u", "a"), 0.5),
            (key("u", "b"), 1.0),
            (key("u", "c"), 1.5),
        ]);
        let m = rescale_per_user(&raw).unwrap();
        let row: Vec<f64> = (0..3).map(|a| m.observed_score(0, a).unwrap()).collect();
        assert_eq!(row, vec![1.0, 5.5, 10.0]);
    }

    #[test]
    fn rescale_degenerate_user() {
        let raw = BTreeMap::from([(key("u", "a"), 2.7)]);
        assert_eq!(
            rescale_per_user(&raw).unwrap().observed_score(0, 0),
            Some(5.5)
        );
        let flat = BTreeMap::from([(key("v", "a"), 0.3), (key("v", "b"), 0.3)]);
        let m = rescale_per_user(&flat).unwrap();
        assert_eq!(m.observed_score(0, 1), Some(5.5));
    }

    #[test]
    fn scaling_one_reader_of_shared_articles_reorders_them() {
        // u1's own time sits in each denominator, so scaling u1 alone moves
        // the shared article and the sole-read one by different factors
        let base = [("u1", "a", 10.0), ("u1", "b", 10.0), ("u2", "a", 30.0)];
        let scaled = [("u1", "a", 40.0), ("u1", "b", 40.0), ("u2", "a", 30.0)];
        let row = |events: &[(&str, &str, f64)]| {
            let m = rescale_per_user(&raw_scores(&log(events)).unwrap()).unwrap();
            (
                m.observed_score(0, 0).unwrap(),
                m.observed_score(0, 1).unwrap(),
            )
        };
        // a: 10/40·2 = 0.5 < b: 1, then a: 40/70·2 ≈ 1.14 > b: 1
        assert_eq!(row(&base), (1.0, 10.0));
        assert_eq!(row(&scaled), (10.0, 1.0));
    }

    #[test]
    fn preference_order_breaks_ties_by_id() {
        assert_eq!(preference_order(&[10.0, 1.0]), vec![0, 1]);
        assert_eq!(preference_order(&[5.0, 5.0, 9.0]), vec![2, 0, 1]);
    }

    #[test]
    fn dense_requires_sorted_ids() {
        let err = ScoreMatrix::from_dense(
            vec!["b".into(), "a".into()],
            vec!["x".into()],
            vec![1.0, 2.0],
        );
        assert!(err.is_err());
    }

    #[test]
    fn completed_csv_round_trip() {
        let m = ScoreMatrix::from_dense(
            vec!["u1".into(), "u2".into()],
            vec!["a".into(), "b".into()],
            vec![1.0, 9.75, 3.333333333333333, 10.0],
        )
        .unwrap();
        let mut buf = Vec::new();
        m.write_completed(&mut buf).unwrap();
        assert!(buf.starts_with(b"user_id,article_id,score\n"));
        assert_eq!(ScoreMatrix::read_completed(&buf[..]).unwrap(), m);
    }

    #[test]
    fn partial_completed_file_rejected() {
        let text = "user_id,article_id,score\nu,a,1\nv,b,2\n";
        assert!(ScoreMatrix::read_completed(text.as_bytes()).is_err());
    }

    fn arb_log() -> impl Strategy<Value = Vec<(u8, u8, f64)>> {
        proptest::collection::vec((0u8..6, 0u8..8, 0.5f64..600.0), 1..40)
    }

    fn to_log(events: &[(u8, u8, f64)]) -> InteractionLog {
        InteractionLog::new(
            events
                .iter()
                .map(|&(u, a, t)| InteractionEvent {
                    user_id: format!("u{u}"),
                    article_id: format!("a{a}"),
                    active_time: t,
                })
                .collect(),
        )
        .unwrap()
    }

    proptest! {
        #[test]
        fn column_sums_equal_viewer_count(events in arb_log()) {
            let log = to_log(&events);
            let raw = raw_scores(&log).unwrap();
            for stat in article_stats(&log) {
                // independent recount of distinct viewers
                let viewers: BTreeSet<_> = events
                    .iter()
                    .filter(|e| format!("a{}", e.1) == stat.article_id)
                    .map(|e| e.0)
                    .collect();
                let sum: f64 = raw
                    .iter()
                    .filter(|((_, a), _)| *a == stat.article_id)
                    .map(|(_, v)| v)
                    .sum();
                prop_assert_eq!(stat.viewer_count, viewers.len());
                prop_assert!((sum - viewers.len() as f64).abs() < 1e-9);
            }
        }

        #[test]
        fn rescaled_scores_in_range_and_monotone(events in arb_log()) {
            let raw = raw_scores(&to_log(&events)).unwrap();
            let m = rescale_per_user(&raw).unwrap();
            prop_assert_eq!(m.observed().len(), raw.len());
            for (u, user) in m.users().iter().enumerate() {
                let cells: Vec<(f64, f64)> = raw
                    .iter()
                    .filter(|((uu, _), _)| uu == user)
                    .map(|((_, a), &r)| (r, m.observed_score(u, m.article_index(a).unwrap()).unwrap()))
                    .collect();
                let distinct: BTreeSet<u64> = cells.iter().map(|c| c.0.to_bits()).collect();
                for &(r1, s1) in &cells {
                    prop_assert!((SCORE_MIN..=SCORE_MAX).contains(&s1));
                    for &(r2, s2) in &cells {
                        if r1 < r2 {
                            prop_assert!(s1 <= s2);
                        }
                    }
                }
                if distinct.len() >= 2 {
                    prop_assert!(cells.iter().any(|c| c.1 == SCORE_MIN));
                    prop_assert!(cells.iter().any(|c| c.1 == SCORE_MAX));
                }
            }
        }

        #[test]
        fn rescaling_ignores_user_scale(
            scores in proptest::collection::vec(0.01f64..50.0, 1..10),
            c in 0.01f64..100.0,
        ) {
            let raw: BTreeMap<_, _> = scores
                .iter()
                .enumerate()
                .map(|(i, &s)| (key("u", &format!("a{i:02}")), s))
                .collect();
            let scaled: BTreeMap<_, _> = raw.iter().map(|(k, &v)| (k.clone(), v * c)).collect();
            let a = rescale_per_user(&raw).unwrap();
            let b = rescale_per_user(&scaled).unwrap();
            for (k, v) in a.observed() {
                prop_assert!((v - b.observed()[k]).abs() < 1e-9);
            }
        }

        #[test]
        fn uniform_time_scale_invariance(events in arb_log(), c in 0.1f64..10.0) {
            let scaled: Vec<_> = events.iter().map(|&(u, a, t)| (u, a, t * c)).collect();
            let a = rescale_per_user(&raw_scores(&to_log(&events)).unwrap()).unwrap();
            let b = rescale_per_user(&raw_scores(&to_log(&scaled)).unwrap()).unwrap();
            for (k, v) in a.observed() {
                prop_assert!((v - b.observed()[k]).abs() < 1e-9);
            }
        }
    }
}
