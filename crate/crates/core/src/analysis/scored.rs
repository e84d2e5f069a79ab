use std::collections::HashMap;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::corpus::{Gender, Outcome, QuestionRecord};
use crate::error::{Error, Result};
use crate::ngram_lm::PerplexityRecord;
use crate::typicality::Typicality;

/// One row of `scored.csv`: a question's perplexity with every label the
/// experiments group or pair on.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScoredQuestion {
    pub question_id: String,
    pub player_id: String,
    pub gender: Gender,
    pub season: i32,
    pub outcome: Outcome,
    pub rank: Option<u32>,
    pub perplexity: f64,
    pub n_scored_tokens: usize,
    pub atypicality: Option<f64>,
    pub typicality: Option<Typicality>,
}

impl ScoredQuestion {
    pub fn new(record: &QuestionRecord, pp: &PerplexityRecord) -> Self {
        ScoredQuestion {
            question_id: record.question_id.clone(),
            player_id: record.player_id.clone(),
            gender: record.gender,
            season: record.season,
            outcome: record.outcome,
            rank: record.rank,
            perplexity: pp.perplexity,
            n_scored_tokens: pp.n_scored_tokens,
            atypicality: None,
            typicality: None,
        }
    }
}

/// Row of `typicality.csv`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TypicalityRow {
    pub question_id: String,
    /// Mean IDF of the question's content stems; empty when it has none.
    #[serde(rename = "sc")]
    pub score: Option<f64>,
    pub label: Typicality,
}

pub fn write_csv<T: Serialize>(path: &Path, rows: &[T]) -> Result<()> {
    let mut w = csv::Writer::from_path(path).map_err(|e| csv_err(path, e))?;
    for r in rows {
        w.serialize(r).map_err(|e| csv_err(path, e))?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}

pub fn read_csv<T: for<'de> Deserialize<'de>>(path: &Path) -> Result<Vec<T>> {
    let mut r = csv::Reader::from_path(path).map_err(|e| csv_err(path, e))?;
    r.deserialize()
        .enumerate()
        .map(|(i, row)| row.map_err(|e| Error::parse(path, i + 2, e.to_string())))
        .collect()
}

fn csv_err(path: &Path, e: csv::Error) -> Error {
    match e.into_kind() {
        csv::ErrorKind::Io(io) => Error::io(path, io),
        other => Error::parse(path, 0, format!("{other:?}")),
    }
}

pub fn read_scored(path: &Path) -> Result<Vec<ScoredQuestion>> {
    read_csv(path)
}

/// Copy typicality labels onto scored rows by question id.
pub fn attach_typicality(scored: &mut [ScoredQuestion], rows: &[TypicalityRow]) {
    let by_id: HashMap<&str, &TypicalityRow> = rows.iter().map(|r| (r.question_id.as_str(), r)).collect();
    for q in scored {
        if let Some(r) = by_id.get(q.question_id.as_str()) {
            q.atypicality = r.score;
            q.typicality = Some(r.label);
        }
    }
}
