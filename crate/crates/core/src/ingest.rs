//! Reading events and article bodies.
//!
//! Events arrive either as json-lines in the Adressa shape
//! (`{"userId", "documentId", "activeTime"}`, extra fields ignored) or as a
//! strict three column CSV with header `user_id,article_id,active_time`.
//! Events with zero active time are dropped here; repeated events for the
//! same pair are kept and summed when scoring.

use std::collections::{BTreeSet, HashMap};
use std::io::{BufRead, BufReader, Read, Write};
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

const CSV_HEADER: [&str; 3] = ["user_id", "article_id", "active_time"];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InteractionEvent {
    #[serde(rename = "userId")]
    pub user_id: String,
    #[serde(rename = "documentId")]
    pub article_id: String,
    /// Seconds spent on the article during this event.
    #[serde(rename = "activeTime")]
    pub active_time: f64,
}

/// A validated multiset of reading events.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct InteractionLog {
    events: Vec<InteractionEvent>,
    users: BTreeSet<String>,
    articles: BTreeSet<String>,
}

impl InteractionLog {
    /// Builds a log from events that already passed ingest filtering.
    ///
    /// Every event needs non-empty ids and a finite, strictly positive
    /// active time.
    pub fn new(events: Vec<InteractionEvent>) -> Result<Self> {
        let mut users = BTreeSet::new();
        let mut articles = BTreeSet::new();
        for (i, ev) in events.iter().enumerate() {
            if ev.user_id.is_empty() || ev.article_id.is_empty() {
                return Err(Error::Malformed {
                    line: i + 1,
                    message: "empty user or article id".into(),
                });
            }
            if !(ev.active_time.is_finite() && ev.active_time > 0.0) {
                return Err(Error::Malformed {
                    line: i + 1,
                    message: format!("active time {} is not positive", ev.active_time),
                });
            }
            users.insert(ev.user_id.clone());
            articles.insert(ev.article_id.clone());
        }
        Ok(Self {
            events,
            users,
            articles,
        })
    }

    pub fn events(&self) -> &[InteractionEvent] {
        &self.events
    }

    pub fn users(&self) -> &BTreeSet<String> {
        &self.users
    }

    pub fn articles(&self) -> &BTreeSet<String> {
        &self.articles
    }

    pub fn len(&self) -> usize {
        self.events.len()
    }

    pub fn is_empty(&self) -> bool {
        self.events.is_empty()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct IngestStats {
    pub kept: usize,
    pub dropped_zero_time: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EventFormat {
    JsonLines,
    Csv,
}

impl FromStr for EventFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "jsonl" | "json-lines" | "jsonlines" | "ndjson" => Ok(EventFormat::JsonLines),
            "csv" => Ok(EventFormat::Csv),
            _ => Err(Error::Unknown {
                what: "event format",
                id: s.to_string(),
            }),
        }
    }
}

impl EventFormat {
    /// Guesses the format from a file extension, defaulting to json-lines.
    pub fn from_path(path: &std::path::Path) -> Self {
        match path.extension().and_then(|e| e.to_str()) {
            Some(ext) if ext.eq_ignore_ascii_case("csv") => EventFormat::Csv,
            _ => EventFormat::JsonLines,
        }
    }
}

pub fn parse_events<R: Read>(
    reader: R,
    format: EventFormat,
) -> Result<(InteractionLog, IngestStats)> {
    let raw = match format {
        EventFormat::JsonLines => read_event_lines(reader)?,
        EventFormat::Csv => read_event_csv(reader)?,
    };

    let mut stats = IngestStats::default();
    let mut events = Vec::with_capacity(raw.len());
    for (line, ev) in raw {
        if ev.user_id.is_empty() || ev.article_id.is_empty() {
            return Err(Error::Malformed {
                line,
                message: "empty user or article id".into(),
            });
        }
        if !ev.active_time.is_finite() {
            return Err(Error::Malformed {
                line,
                message: format!("active time {} is not a finite number", ev.active_time),
            });
        }
        if ev.active_time < 0.0 {
            return Err(Error::NegativeActiveTime {
                line,
                value: ev.active_time,
            });
        }
        if ev.active_time == 0.0 {
            stats.dropped_zero_time += 1;
            continue;
        }
        events.push(ev);
    }
    stats.kept = events.len();
    log::debug!(
        "ingested {} events, dropped {} with zero active time",
        stats.kept,
        stats.dropped_zero_time
    );
    Ok((InteractionLog::new(events)?, stats))
}

fn read_event_lines<R: Read>(reader: R) -> Result<Vec<(usize, InteractionEvent)>> {
    let mut out = Vec::new();
    for (idx, line) in BufReader::new(reader).lines().enumerate() {
        let line_no = idx + 1;
        let line = line.map_err(|e| Error::Malformed {
            line: line_no,
            message: e.to_string(),
        })?;
        if line.trim().is_empty() {
            continue;
        }
        let ev: InteractionEvent = serde_json::from_str(&line).map_err(|e| Error::Malformed {
            line: line_no,
            message: e.to_string(),
        })?;
        out.push((line_no, ev));
    }
    Ok(out)
}

fn read_event_csv<R: Read>(reader: R) -> Result<Vec<(usize, InteractionEvent)>> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(false)
        .trim(csv::Trim::None)
        .from_reader(reader);
    let mut out = Vec::new();
    let mut seen_header = false;
    for record in rdr.records() {
        let record = record.map_err(|e| {
            let line = e.position().map(|p| p.line() as usize).unwrap_or(0);
            Error::Malformed {
                line,
                message: e.to_string(),
            }
        })?;
        let line = record.position().map(|p| p.line() as usize).unwrap_or(0);
        if !seen_header {
            if record.iter().ne(CSV_HEADER.iter().copied()) {
                return Err(Error::Malformed {
                    line,
                    message: format!("expected header `{}`", CSV_HEADER.join(",")),
                });
            }
            seen_header = true;
            continue;
        }
        let active_time: f64 = record[2].parse().map_err(|_| Error::Malformed {
            line,
            message: format!("active time `{}` is not a number", &record[2]),
        })?;
        out.push((
            line,
            InteractionEvent {
                user_id: record[0].to_string(),
                article_id: record[1].to_string(),
                active_time,
            },
        ));
    }
    if !seen_header {
        return Err(Error::Malformed {
            line: 1,
            message: format!("missing header `{}`", CSV_HEADER.join(",")),
        });
    }
    Ok(out)
}

pub fn write_events<W: Write>(log: &InteractionLog, mut writer: W) -> Result<()> {
    for ev in log.events() {
        serde_json::to_writer(&mut writer, ev)?;
        writer.write_all(b"\n")?;
    }
    Ok(())
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ArticleDoc {
    #[serde(rename = "documentId")]
    pub id: String,
    pub body: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub source: Option<String>,
}

/// Parses a json-lines corpus, keeping input order.
pub fn parse_corpus<R: Read>(reader: R) -> Result<Vec<ArticleDoc>> {
    let mut docs = Vec::new();
    let mut first_line: HashMap<String, usize> = HashMap::new();
    for (idx, line) in BufReader::new(reader).lines().enumerate() {
        let line_no = idx + 1;
        let line = line.map_err(|e| Error::Malformed {
            line: line_no,
            message: e.to_string(),
        })?;
        if line.trim().is_empty() {
            continue;
        }
        let doc: ArticleDoc = serde_json::from_str(&line).map_err(|e| Error::Malformed {
            line: line_no,
            message: e.to_string(),
        })?;
        if doc.id.is_empty() {
            return Err(Error::Malformed {
                line: line_no,
                message: "empty documentId".into(),
            });
        }
        if doc.body.trim().is_empty() {
            return Err(Error::EmptyBody { id: doc.id });
        }
        if let Some(&first) = first_line.get(&doc.id) {
            return Err(Error::DuplicateArticle {
                id: doc.id,
                first,
                second: line_no,
            });
        }
        first_line.insert(doc.id.clone(), line_no);
        docs.push(doc);
    }
    Ok(docs)
}

pub fn write_corpus<W: Write>(docs: &[ArticleDoc], mut writer: W) -> Result<()> {
    for doc in docs {
        serde_json::to_writer(&mut writer, doc)?;
        writer.write_all(b"\n")?;
    }
    Ok(())
}
