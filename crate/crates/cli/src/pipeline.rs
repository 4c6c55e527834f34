//! Stages as file-to-file steps inside one run directory.
//!
//! Each stage reads the artifacts of earlier stages from disk and writes its
//! own, so `run` and a sequence of single-stage invocations produce the same
//! bytes.

use std::fs::{self, File};
use std::io::{BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::thread;

use log::{info, warn};
use newsfair_core::elections::{self, BallotProfile, Committee};
use newsfair_core::ingest::{self, EventFormat, InteractionLog};
use newsfair_core::lexicon::{self, SeedLexicon};
use newsfair_core::metrics::{self, FairnessReport};
use newsfair_core::{factorization, scoring, synth, Rule, ScoreMatrix};
use serde::Serialize;

use crate::config::PipelineConfig;
use crate::error::{Failure, Stage, StageError};

pub const SYNTH_DIR: &str = "synth";
pub const SYNTH_EVENTS: &str = "synth/interactions.jsonl";
pub const SYNTH_CORPUS: &str = "synth/articles.jsonl";
pub const SYNTH_LEFT: &str = "synth/left_press.jsonl";
pub const SYNTH_RIGHT: &str = "synth/right_press.jsonl";
pub const SYNTH_TRUTH: &str = "synth/truth_labels.csv";

pub const CONFIG: &str = "config.toml";
pub const INTERACTIONS: &str = "interactions.jsonl";
pub const ARTICLES: &str = "articles.jsonl";
pub const INGEST_STATS: &str = "ingest.json";
pub const SCORES: &str = "scores.csv";
pub const COMPLETED: &str = "completed.csv";
pub const USER_FACTORS: &str = "user_factors.csv";
pub const ITEM_FACTORS: &str = "item_factors.csv";
pub const FACTORIZATION: &str = "factorization.json";
pub const COMMITTEES: &str = "committees";
pub const LEXICON: &str = "lexicon.json";
pub const LABELS: &str = "labels.csv";
pub const EVALUATION: &str = "evaluation.csv";
pub const REPORT_MD: &str = "report.md";
pub const REPORT_CSV: &str = "report.csv";

type StageResult<T = ()> = Result<T, StageError>;

#[derive(Debug, Serialize)]
struct IngestSummary {
    kept: usize,
    dropped_zero_time: usize,
    /// Events on articles with no body in the corpus.
    dropped_no_body: usize,
    users: usize,
    articles: usize,
}

/// A resolved configuration bound to its run directory.
#[derive(Debug, Clone)]
pub struct Workspace {
    cfg: PipelineConfig,
    dir: PathBuf,
}

impl Workspace {
    /// Creates the run directory if needed and records the resolved config.
    pub fn open(cfg: PipelineConfig) -> StageResult<Self> {
        let dir = cfg.run_dir();
        let ws = Self { cfg, dir };
        let config_path = ws.path(CONFIG);
        fs::create_dir_all(&ws.dir).map_err(|e| io(Stage::Config, &ws.dir, e))?;
        fs::write(&config_path, ws.cfg.to_toml())
            .map_err(|e| io(Stage::Config, &config_path, e))?;
        Ok(ws)
    }

    pub fn dir(&self) -> &Path {
        &self.dir
    }

    pub fn config(&self) -> &PipelineConfig {
        &self.cfg
    }

    pub fn path(&self, artifact: &str) -> PathBuf {
        self.dir.join(artifact)
    }

    pub fn committee_path(&self, rule: Rule) -> PathBuf {
        self.dir
            .join(COMMITTEES)
            .join(format!("{}.json", rule.id()))
    }

    /// The configured rules, or `only` when it is non-empty.
    fn rules<'a>(&'a self, only: &'a [Rule]) -> &'a [Rule] {
        if only.is_empty() {
            &self.cfg.rules
        } else {
            only
        }
    }

    /// Every stage in order, generating data first when an input is missing.
    pub fn run(&self, only: &[Rule]) -> StageResult<Vec<FairnessReport>> {
        if self.cfg.needs_synth() {
            self.synth()?;
        }
        self.ingest()?;
        self.score()?;
        self.factorize()?;
        self.elect(only)?;
        self.lexicon()?;
        self.label()?;
        self.evaluate(only)?;
        self.report(only)
    }

    pub fn synth(&self) -> StageResult {
        let stage = Stage::Synth;
        let data = synth::generate(&self.cfg.synth).map_err(|e| StageError::new(stage, e))?;
        let dir = self.path(SYNTH_DIR);
        fs::create_dir_all(&dir).map_err(|e| io(stage, &dir, e))?;
        self.write(stage, SYNTH_EVENTS, |w| ingest::write_events(&data.log, w))?;
        self.write(stage, SYNTH_CORPUS, |w| {
            ingest::write_corpus(&data.corpus, w)
        })?;
        self.write(stage, SYNTH_LEFT, |w| {
            ingest::write_corpus(&data.left_press, w)
        })?;
        self.write(stage, SYNTH_RIGHT, |w| {
            ingest::write_corpus(&data.right_press, w)
        })?;
        self.write(stage, SYNTH_TRUTH, |w| {
            lexicon::write_labels(&data.labels, w)
        })?;
        info!(
            "synth: {} events, {} articles, {}+{} press documents",
            data.log.len(),
            data.corpus.len(),
            data.left_press.len(),
            data.right_press.len()
        );
        Ok(())
    }

    /// Validates the inputs and keeps the events whose article has a body.
    pub fn ingest(&self) -> StageResult {
        let stage = Stage::Ingest;
        let events_path = self.input(stage, self.cfg.paths.events.as_deref(), SYNTH_EVENTS)?;
        let corpus_path = self.input(stage, self.cfg.paths.corpus.as_deref(), SYNTH_CORPUS)?;
        let format = EventFormat::from_path(&events_path);
        let (log, stats) = read_file(stage, &events_path, |r| ingest::parse_events(r, format))?;
        let corpus = read_file(stage, &corpus_path, ingest::parse_corpus)?;

        let with_body: std::collections::HashSet<&str> =
            corpus.iter().map(|d| d.id.as_str()).collect();
        let kept: Vec<_> = log
            .events()
            .iter()
            .filter(|e| with_body.contains(e.article_id.as_str()))
            .cloned()
            .collect();
        let dropped_no_body = log.len() - kept.len();
        if dropped_no_body > 0 {
            warn!("ingest: dropped {dropped_no_body} events on articles without a body");
        }
        let log = InteractionLog::new(kept).map_err(|e| StageError::new(stage, e))?;
        // the platform corpus, restricted to articles somebody read
        let articles: Vec<_> = corpus
            .into_iter()
            .filter(|d| log.articles().contains(&d.id))
            .collect();

        let summary = IngestSummary {
            kept: log.len(),
            dropped_zero_time: stats.dropped_zero_time,
            dropped_no_body,
            users: log.users().len(),
            articles: log.articles().len(),
        };
        self.write(stage, INTERACTIONS, |w| ingest::write_events(&log, w))?;
        self.write(stage, ARTICLES, |w| ingest::write_corpus(&articles, w))?;
        self.write_json(stage, INGEST_STATS, &summary)?;
        info!(
            "ingest: kept {} events ({} users, {} articles), dropped {} zero-time",
            summary.kept, summary.users, summary.articles, summary.dropped_zero_time
        );
        Ok(())
    }

    pub fn score(&self) -> StageResult {
        let stage = Stage::Score;
        let log = self.read_log(stage)?;
        let v = scoring::raw_scores(&log)
            .and_then(|raw| scoring::rescale_per_user(&raw))
            .map_err(|e| StageError::new(stage, e))?;
        self.write(stage, SCORES, |w| v.write_observed(w))?;
        info!(
            "score: {} observed cells in a {}×{} matrix",
            v.observed().len(),
            v.n_users(),
            v.n_articles()
        );
        Ok(())
    }

    pub fn factorize(&self) -> StageResult {
        let stage = Stage::Factorize;
        let v = self.read_artifact(stage, SCORES, Stage::Score, ScoreMatrix::read_observed)?;
        let fit = factorization::factorize(&v, &self.cfg.factorization)
            .map_err(|e| StageError::new(stage, e))?;
        if !fit.converged {
            warn!("factorize: no convergence within {} epochs", fit.epochs_run);
        }
        let full = factorization::merge(&v, &fit).map_err(|e| StageError::new(stage, e))?;
        self.write_json(stage, FACTORIZATION, &fit)?;
        self.write(stage, USER_FACTORS, |w| {
            fit.write_user_factors(v.users(), w)
        })?;
        self.write(stage, ITEM_FACTORS, |w| {
            fit.write_item_factors(v.articles(), w)
        })?;
        self.write(stage, COMPLETED, |w| full.write_completed(w))?;
        info!(
            "factorize: cost {:.3} -> {:.3} after {} epochs",
            fit.initial_cost, fit.final_cost, fit.epochs_run
        );
        Ok(())
    }

    /// Runs the rules concurrently over one shared profile. Committees that
    /// succeed are written even if another rule fails.
    pub fn elect(&self, only: &[Rule]) -> StageResult<Vec<Committee>> {
        let stage = Stage::Elect;
        let scores = self.read_completed(stage)?;
        let profile = BallotProfile::from_scores(&scores).map_err(|e| StageError::new(stage, e))?;
        let kappa = self.cfg.kappa;
        let rules = self.rules(only);
        let outcomes: Vec<_> = thread::scope(|s| {
            let handles: Vec<_> = rules
                .iter()
                .map(|&rule| {
                    let profile = &profile;
                    s.spawn(move || elections::elect(profile, rule, kappa))
                })
                .collect();
            handles
                .into_iter()
                .map(|h| h.join().expect("election thread panicked"))
                .collect()
        });

        let dir = self.path(COMMITTEES);
        fs::create_dir_all(&dir).map_err(|e| io(stage, &dir, e))?;
        let mut committees = Vec::new();
        let mut first_error = None;
        for (rule, outcome) in rules.iter().zip(outcomes) {
            match outcome {
                Ok(c) => {
                    let path = self.committee_path(*rule);
                    write_path(stage, &path, |w| c.write_json(w))?;
                    info!("elect: {} -> {}", rule.label(), c.winners.join(" "));
                    committees.push(c);
                }
                Err(e) => {
                    warn!("elect: {} failed: {e}", rule.label());
                    first_error.get_or_insert(StageError::new(stage, e));
                }
            }
        }
        match first_error {
            Some(e) => Err(e),
            None => Ok(committees),
        }
    }

    pub fn lexicon(&self) -> StageResult<SeedLexicon> {
        let stage = Stage::Lexicon;
        let left_path = self.input(stage, self.cfg.paths.left_corpus.as_deref(), SYNTH_LEFT)?;
        let right_path = self.input(stage, self.cfg.paths.right_corpus.as_deref(), SYNTH_RIGHT)?;
        let left = read_file(stage, &left_path, ingest::parse_corpus)?;
        let right = read_file(stage, &right_path, ingest::parse_corpus)?;
        let lex = lexicon::build_lexicon(&left, &right, &self.cfg.lexicon)
            .map_err(|e| StageError::new(stage, e))?;
        if lex.truncated {
            warn!(
                "lexicon: fewer than {} seeds on a side ({} left, {} right)",
                lex.top_n,
                lex.left.len(),
                lex.right.len()
            );
        }
        self.write(stage, LEXICON, |w| lex.write_json(w))?;
        info!(
            "lexicon: {} left and {} right seeds",
            lex.left.len(),
            lex.right.len()
        );
        Ok(lex)
    }

    pub fn label(&self) -> StageResult {
        let stage = Stage::Label;
        let lex = self.read_artifact(stage, LEXICON, Stage::Lexicon, SeedLexicon::read_json)?;
        let articles = self.read_artifact(stage, ARTICLES, Stage::Ingest, ingest::parse_corpus)?;
        let labels = lexicon::label_all(&articles, &lex).map_err(|e| StageError::new(stage, e))?;
        self.write(stage, LABELS, |w| lexicon::write_labels(&labels, w))?;
        let count = |side| labels.iter().filter(|l| l.label == side).count();
        info!(
            "label: {} left, {} right, {} neutral",
            count(lexicon::Leaning::Left),
            count(lexicon::Leaning::Right),
            count(lexicon::Leaning::Neutral)
        );
        Ok(())
    }

    pub fn evaluate(&self, only: &[Rule]) -> StageResult<Vec<FairnessReport>> {
        let stage = Stage::Evaluate;
        let scores = self.read_completed(stage)?;
        let log = self.read_log(stage)?;
        let articles = self.read_artifact(stage, ARTICLES, Stage::Ingest, ingest::parse_corpus)?;
        let lex = self.read_artifact(stage, LEXICON, Stage::Lexicon, SeedLexicon::read_json)?;
        let labels = self.read_artifact(stage, LABELS, Stage::Label, lexicon::read_labels)?;
        let rho = metrics::reference_bias(&log, &labels).map_err(|e| StageError::new(stage, e))?;
        info!("evaluate: reference bias rho = {rho:.4}");

        let mut rows = Vec::new();
        for &rule in self.rules(only) {
            let path = self.committee_path(rule);
            let committee = read_required(stage, &path, Stage::Elect, Committee::read_json)?;
            let row =
                metrics::evaluate(&committee, &scores, &articles, &lex, rho).map_err(|source| {
                    StageError::new(
                        stage,
                        Failure::Data {
                            context: rule.id().to_string(),
                            source,
                        },
                    )
                })?;
            rows.push(row);
        }
        self.write(stage, EVALUATION, |w| metrics::write_report_csv(&rows, w))?;
        Ok(rows)
    }

    /// The results table in Markdown and CSV.
    pub fn report(&self, only: &[Rule]) -> StageResult<Vec<FairnessReport>> {
        let stage = Stage::Report;
        let mut rows =
            self.read_artifact(stage, EVALUATION, Stage::Evaluate, metrics::read_report_csv)?;
        if !only.is_empty() {
            rows.retain(|r| only.contains(&r.rule));
            for &rule in only {
                if !rows.iter().any(|r| r.rule == rule) {
                    return Err(StageError::new(
                        stage,
                        Failure::Config(format!(
                            "{EVALUATION} has no row for `{rule}`; run `evaluate --rule {rule}` first"
                        )),
                    ));
                }
            }
        }
        let table = metrics::render_markdown(&rows);
        let path = self.path(REPORT_MD);
        fs::write(&path, &table).map_err(|e| io(stage, &path, e))?;
        self.write(stage, REPORT_CSV, |w| write_table_csv(&rows, w))?;
        Ok(rows)
    }

    fn input(
        &self,
        stage: Stage,
        configured: Option<&Path>,
        synthetic: &str,
    ) -> StageResult<PathBuf> {
        match configured {
            Some(p) => {
                if p.is_file() {
                    Ok(p.to_path_buf())
                } else {
                    Err(StageError::new(
                        stage,
                        Failure::Config(format!("input {} not found", p.display())),
                    ))
                }
            }
            None => {
                let p = self.path(synthetic);
                if p.is_file() {
                    Ok(p)
                } else {
                    Err(StageError::new(
                        stage,
                        Failure::MissingArtifact {
                            path: p,
                            prior: Stage::Synth,
                        },
                    ))
                }
            }
        }
    }

    fn read_log(&self, stage: Stage) -> StageResult<InteractionLog> {
        self.read_artifact(stage, INTERACTIONS, Stage::Ingest, |r| {
            ingest::parse_events(r, EventFormat::JsonLines).map(|(log, _)| log)
        })
    }

    fn read_completed(&self, stage: Stage) -> StageResult<ScoreMatrix> {
        self.read_artifact(
            stage,
            COMPLETED,
            Stage::Factorize,
            ScoreMatrix::read_completed,
        )
    }

    fn read_artifact<T>(
        &self,
        stage: Stage,
        artifact: &str,
        prior: Stage,
        parse: impl FnOnce(BufReader<File>) -> newsfair_core::Result<T>,
    ) -> StageResult<T> {
        read_required(stage, &self.path(artifact), prior, parse)
    }

    fn write(
        &self,
        stage: Stage,
        artifact: &str,
        emit: impl FnOnce(&mut BufWriter<File>) -> newsfair_core::Result<()>,
    ) -> StageResult {
        write_path(stage, &self.path(artifact), emit)
    }

    fn write_json<T: Serialize>(&self, stage: Stage, artifact: &str, value: &T) -> StageResult {
        self.write(stage, artifact, |w| {
            serde_json::to_writer_pretty(&mut *w, value)?;
            w.write_all(b"\n")?;
            Ok(())
        })
    }
}

fn io(stage: Stage, path: &Path, source: std::io::Error) -> StageError {
    StageError::new(
        stage,
        Failure::Io {
            path: path.to_path_buf(),
            source,
        },
    )
}

fn read_file<T>(
    stage: Stage,
    path: &Path,
    parse: impl FnOnce(BufReader<File>) -> newsfair_core::Result<T>,
) -> StageResult<T> {
    let file = File::open(path).map_err(|e| io(stage, path, e))?;
    parse(BufReader::new(file)).map_err(|source| {
        StageError::new(
            stage,
            Failure::Data {
                context: path.display().to_string(),
                source,
            },
        )
    })
}

fn read_required<T>(
    stage: Stage,
    path: &Path,
    prior: Stage,
    parse: impl FnOnce(BufReader<File>) -> newsfair_core::Result<T>,
) -> StageResult<T> {
    if !path.is_file() {
        return Err(StageError::new(
            stage,
            Failure::MissingArtifact {
                path: path.to_path_buf(),
                prior,
            },
        ));
    }
    read_file(stage, path, parse)
}

fn write_path(
    stage: Stage,
    path: &Path,
    emit: impl FnOnce(&mut BufWriter<File>) -> newsfair_core::Result<()>,
) -> StageResult {
    let file = File::create(path).map_err(|e| io(stage, path, e))?;
    let mut w = BufWriter::new(file);
    emit(&mut w).map_err(|e| StageError::new(stage, e))?;
    w.flush().map_err(|e| io(stage, path, e))
}

fn write_table_csv<W: Write>(rows: &[FairnessReport], w: &mut W) -> newsfair_core::Result<()> {
    writeln!(w, "election_method,satisfaction,bias")?;
    for r in rows {
        writeln!(w, "{},{},{}", r.rule.label(), r.satisfaction, r.bias)?;
    }
    Ok(())
}
