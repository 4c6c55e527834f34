//! User satisfaction and ideological bias of a recommended committee.

use std::collections::{BTreeMap, HashMap, HashSet};
use std::fmt::Write as _;
use std::io::{Read, Write};

use serde::{Deserialize, Serialize};

use crate::elections::{Committee, Rule};
use crate::error::{Error, Result};
use crate::ingest::{ArticleDoc, InteractionLog};
use crate::lexicon::{count_seed_hits, ArticleLabel, Leaning, SeedLexicon};
use crate::scoring::ScoreMatrix;

/// Mean over users of `|W ∩ Top-κ_u| / κ`, where `Top-κ_u` follows the
/// same ordering as ballot construction.
pub fn satisfaction(committee: &Committee, scores: &ScoreMatrix, kappa: usize) -> Result<f64> {
    if committee.winners.len() != kappa {
        return Err(Error::KappaMismatch {
            kappa,
            actual: committee.winners.len(),
        });
    }
    if kappa == 0 {
        return Err(Error::InvalidConfig("kappa must be at least 1".into()));
    }
    if kappa > scores.n_articles() {
        return Err(Error::KappaTooLarge {
            kappa,
            available: scores.n_articles(),
            what: "articles",
        });
    }
    if !scores.is_completed() {
        return Err(Error::NotCompleted);
    }
    let winners: HashSet<usize> = committee
        .winners
        .iter()
        .map(|w| {
            scores.article_index(w).ok_or_else(|| Error::Unknown {
                what: "article",
                id: w.clone(),
            })
        })
        .collect::<Result<_>>()?;

    let mut total = 0.0;
    for u in 0..scores.n_users() {
        let order = scores.preference_order(u)?;
        let overlap = order[..kappa]
            .iter()
            .filter(|a| winners.contains(a))
            .count();
        total += overlap as f64 / kappa as f64;
    }
    Ok(total / scores.n_users() as f64)
}

/// ρ: reading time on left-labelled articles over reading time on
/// right-labelled ones. Neutral and unlabelled articles are ignored.
pub fn reference_bias(log: &InteractionLog, labels: &[ArticleLabel]) -> Result<f64> {
    let by_article: HashMap<&str, Leaning> = labels
        .iter()
        .map(|l| (l.article_id.as_str(), l.label))
        .collect();
    let (mut left, mut right) = (0.0, 0.0);
    for ev in log.events() {
        match by_article.get(ev.article_id.as_str()) {
            Some(Leaning::Left) => left += ev.active_time,
            Some(Leaning::Right) => right += ev.active_time,
            _ => {}
        }
    }
    if right <= 0.0 {
        return Err(Error::UndefinedReferenceBias(
            "no reading time on right-labelled articles",
        ));
    }
    if left <= 0.0 {
        return Err(Error::UndefinedReferenceBias(
            "no reading time on left-labelled articles",
        ));
    }
    Ok(left / right)
}

/// `(−left + ρ·right) / (left + ρ·right)`, in `[−1, 1]`; negative leans left.
pub fn bias(left_count: u64, right_count: u64, rho: f64) -> Result<f64> {
    if !(rho.is_finite() && rho > 0.0) {
        return Err(Error::InvalidConfig(format!(
            "reference bias {rho} must be positive"
        )));
    }
    if left_count == 0 && right_count == 0 {
        return Err(Error::NoIdeologicalEvidence);
    }
    let (left, right) = (left_count as f64, rho * right_count as f64);
    Ok((right - left) / (left + right))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FairnessReport {
    pub rule: Rule,
    pub kappa: usize,
    pub satisfaction: f64,
    pub bias: f64,
    pub rho: f64,
    pub left_count: u64,
    pub right_count: u64,
}

/// Scores a committee on both axes. Bias counts seed words in the winning
/// articles' bodies.
pub fn evaluate(
    committee: &Committee,
    scores: &ScoreMatrix,
    corpus: &[ArticleDoc],
    lexicon: &SeedLexicon,
    rho: f64,
) -> Result<FairnessReport> {
    let kappa = committee.kappa;
    let satisfaction = satisfaction(committee, scores, kappa)?;
    let bodies: BTreeMap<&str, &ArticleDoc> = corpus.iter().map(|d| (d.id.as_str(), d)).collect();
    let winners = committee
        .winners
        .iter()
        .map(|w| {
            bodies
                .get(w.as_str())
                .copied()
                .ok_or_else(|| Error::Unknown {
                    what: "article body for winner",
                    id: w.clone(),
                })
        })
        .collect::<Result<Vec<_>>>()?;
    let (left_count, right_count) = count_seed_hits(winners, lexicon);
    Ok(FairnessReport {
        rule: committee.rule,
        kappa,
        satisfaction,
        bias: bias(left_count, right_count, rho)?,
        rho,
        left_count,
        right_count,
    })
}

pub fn write_report_csv<W: Write>(rows: &[FairnessReport], writer: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    for row in rows {
        w.serialize(row)?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_report_csv<R: Read>(reader: R) -> Result<Vec<FairnessReport>> {
    csv::Reader::from_reader(reader)
        .deserialize()
        .map(|r| r.map_err(Error::from))
        .collect()
}

/// The results table: one row per rule, three decimals.
pub fn render_markdown(rows: &[FairnessReport]) -> String {
    let mut out = String::from("| Election Method | Satisfaction | Bias |\n|---|---:|---:|\n");
    for row in rows {
        let _ = writeln!(
            out,
            "| {} | {:.3} | {:.3} |",
            row.rule.label(),
            row.satisfaction,
            row.bias
        );
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ingest::InteractionEvent;
    use crate::lexicon::SeedWord;
    use proptest::prelude::*;

    fn committee(winners: &[&str]) -> Committee {
        Committee {
            rule: Rule::Sntv,
            kappa: winners.len(),
            winners: winners.iter().map(|w| w.to_string()).collect(),
            assignment: None,
        }
    }

    fn matrix(users: usize, articles: &[&str], values: Vec<f64>) -> ScoreMatrix {
        ScoreMatrix::from_dense(
            (0..users).map(|u| format!("u{u}")).collect(),
            articles.iter().map(|a| a.to_string()).collect(),
            values,
        )
        .unwrap()
    }

    #[test]
    fn worked_example() {
        // u0 top-2 {a, b}; u1 top-2 {a, c}
        let m = matrix(2, &["a", "b", "c"], vec![9.0, 8.0, 1.0, 9.0, 1.0, 8.0]);
        assert_eq!(satisfaction(&committee(&["a", "b"]), &m, 2).unwrap(), 0.75);
    }

    #[test]
    fn full_committee_satisfies_everyone() {
        let m = matrix(2, &["a", "b"], vec![1.0, 2.0, 3.0, 4.0]);
        assert_eq!(satisfaction(&committee(&["b", "a"]), &m, 2).unwrap(), 1.0);
    }

    #[test]
    fn satisfaction_errors() {
        let m = matrix(1, &["a", "b"], vec![1.0, 2.0]);
        assert!(matches!(
            satisfaction(&committee(&["a"]), &m, 2),
            Err(Error::KappaMismatch { .. })
        ));
        assert!(matches!(
            satisfaction(&committee(&["zz"]), &m, 1),
            Err(Error::Unknown { .. })
        ));
        let sparse = ScoreMatrix::from_observed([("u".to_string(), "a".to_string(), 1.0)]).unwrap();
        assert!(matches!(
            satisfaction(&committee(&["a"]), &sparse, 1),
            Err(Error::NotCompleted)
        ));
    }

    fn events(pairs: &[(&str, f64)]) -> InteractionLog {
        InteractionLog::new(
            pairs
                .iter()
                .map(|&(a, t)| InteractionEvent {
                    user_id: "u".into(),
                    article_id: a.into(),
                    active_time: t,
                })
                .collect(),
        )
        .unwrap()
    }

    fn label(id: &str, label: Leaning) -> ArticleLabel {
        ArticleLabel {
            article_id: id.into(),
            label,
            left_hits: 0,
            right_hits: 0,
        }
    }

    #[test]
    fn rho_cases() {
        let labels = [
            label("l", Leaning::Left),
            label("r", Leaning::Right),
            label("n", Leaning::Neutral),
        ];
        assert_eq!(
            reference_bias(&events(&[("l", 50.0), ("r", 50.0), ("n", 9.0)]), &labels).unwrap(),
            1.0
        );
        let rho =
            reference_bias(&events(&[("l", 100.0), ("l", 42.3), ("r", 100.0)]), &labels).unwrap();
        assert!((rho - 1.423).abs() < 1e-12);
        assert!(matches!(
            reference_bias(&events(&[("l", 10.0), ("n", 3.0)]), &labels),
            Err(Error::UndefinedReferenceBias(_))
        ));
    }

    #[test]
    fn bias_values() {
        assert_eq!(bias(1423, 1000, 1.423).unwrap(), 0.0);
        assert_eq!(bias(7, 0, 1.423).unwrap(), -1.0);
        assert_eq!(bias(0, 3, 1.423).unwrap(), 1.0);
        let b = bias(10, 10, 1.423).unwrap();
        assert!((b - 4.23 / 24.23).abs() < 1e-15);
        assert!((b - 0.17457).abs() < 1e-5);
        assert!(matches!(bias(0, 0, 1.0), Err(Error::NoIdeologicalEvidence)));
        assert!(bias(1, 1, 0.0).is_err());
    }

    #[test]
    fn evaluate_counts_winner_bodies() {
        let m = matrix(1, &["a", "b", "c"], vec![3.0, 2.0, 1.0]);
        let corpus = vec![
            ArticleDoc {
                id: "a".into(),
                body: "rød rød".into(),
                source: None,
            },
            ArticleDoc {
                id: "b".into(),
                body: "høyre".into(),
                source: None,
            },
            ArticleDoc {
                id: "c".into(),
                body: "høyre høyre høyre".into(),
                source: None,
            },
        ];
        let seed = |w: &str| SeedWord {
            word: w.into(),
            pmi: 1.0,
        };
        let lex = SeedLexicon::new(vec![seed("rød")], vec![seed("høyre")]).unwrap();
        let r = evaluate(&committee(&["a", "b"]), &m, &corpus, &lex, 2.0).unwrap();
        assert_eq!((r.left_count, r.right_count), (2, 1));
        assert_eq!(r.bias, 0.0);
        assert_eq!(r.satisfaction, 1.0);
        assert!(evaluate(&committee(&["a", "zz"]), &m, &corpus, &lex, 2.0).is_err());
    }

    #[test]
    fn markdown_table() {
        let row = |rule, satisfaction, bias| FairnessReport {
            rule,
            kappa: 10,
            satisfaction,
            bias,
            rho: 1.423,
            left_count: 1,
            right_count: 1,
        };
        let md = render_markdown(&[
            row(Rule::Sntv, 0.8781, -0.1149),
            row(Rule::KBorda, 0.8, 0.033),
        ]);
        assert_eq!(
            md,
            "| Election Method | Satisfaction | Bias |\n|---|---:|---:|\n\
             | SNTV | 0.878 | -0.115 |\n| k-Borda | 0.800 | 0.033 |\n"
        );
        let mut buf = Vec::new();
        let rows = vec![row(Rule::Stv, 0.894, -0.117)];
        write_report_csv(&rows, &mut buf).unwrap();
        assert!(
            buf.starts_with(b"rule,kappa,satisfaction,bias,rho,left_count,right_count\nstv,10,")
        );
        assert_eq!(read_report_csv(&buf[..]).unwrap(), rows);
    }

    proptest! {
        #[test]
        fn bias_monotone_and_bounded(l in 0u64..500, r in 0u64..500, rho in 0.1f64..10.0) {
            prop_assume!(l + r > 0);
            let b = bias(l, r, rho).unwrap();
            prop_assert!((-1.0..=1.0).contains(&b));
            // strict away from the ±1 endpoints, where one count is zero
            if r > 0 {
                prop_assert!(bias(l + 1, r, rho).unwrap() < b);
            }
            if l > 0 {
                prop_assert!(bias(l, r + 1, rho).unwrap() > b);
            }
            for c in [2u64, 5, 10] {
                prop_assert!((bias(c * l, c * r, rho).unwrap() - b).abs() <= 1e-12);
            }
        }

        #[test]
        fn swapping_in_a_top_pick_never_hurts(
            values in proptest::collection::vec(1.0f64..10.0, 18),
            kappa in 1usize..4,
            start in proptest::sample::subsequence((0..6).collect::<Vec<usize>>(), 3),
            pick in 0usize..3,
        ) {
            let all = ["a", "b", "c", "d", "e", "f"];
            let m = matrix(3, &all, values);
            let tops: Vec<Vec<usize>> = (0..3)
                .map(|u| m.preference_order(u).unwrap()[..kappa].to_vec())
                .collect();
            let mut w: Vec<usize> = start[..kappa].to_vec();
            let named = |w: &[usize]| committee(&w.iter().map(|&i| all[i]).collect::<Vec<_>>());
            let base = satisfaction(&named(&w), &m, kappa).unwrap();
            // a winner nobody has in their top-κ, replaced by one of pick's top-κ
            let out = w.iter().position(|x| tops.iter().all(|t| !t.contains(x)));
            let incoming = tops[pick].iter().find(|t| !w.contains(t));
            if let (Some(out), Some(&incoming)) = (out, incoming) {
                w[out] = incoming;
                prop_assert!(satisfaction(&named(&w), &m, kappa).unwrap() >= base);
            }
        }

        #[test]
        fn perfect_satisfaction_iff_shared_top(
            values in proptest::collection::vec(1.0f64..10.0, 8),
            kappa in 1usize..4,
        ) {
            let m = matrix(2, &["a", "b", "c", "d"], values);
            let all = ["a", "b", "c", "d"];
            let tops: Vec<HashSet<usize>> = (0..2)
                .map(|u| m.preference_order(u).unwrap()[..kappa].iter().copied().collect())
                .collect();
            let w: Vec<&str> = tops[0].iter().map(|&i| all[i]).collect();
            let s = satisfaction(&committee(&w), &m, kappa).unwrap();
            prop_assert_eq!(s == 1.0, tops[0] == tops[1]);
        }
    }
}
