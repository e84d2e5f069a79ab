use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use chrono::NaiveDate;
use serde::{Deserialize, Serialize};

use super::ingest::Gender;
use super::merge::{Interview, Outcome};
use super::text::{Question, Token};
use crate::error::{Error, Result};

/// A question flattened together with its interview's labels. This is the
/// line format of `questions.jsonl`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QuestionRecord {
    pub question_id: String,
    pub interview_id: String,
    pub player_id: String,
    pub gender: Gender,
    pub date: NaiveDate,
    pub season: i32,
    pub outcome: Outcome,
    pub rank: Option<u32>,
    pub snippet_index: usize,
    pub position_in_snippet: usize,
    pub text: String,
    pub tokens: Vec<Token>,
}

impl QuestionRecord {
    pub fn from_interviews(interviews: &[Interview]) -> Vec<QuestionRecord> {
        interviews
            .iter()
            .flat_map(|iv| {
                iv.questions.iter().map(move |q| QuestionRecord {
                    question_id: q.question_id.clone(),
                    interview_id: iv.transcript_id.clone(),
                    player_id: iv.player_id.clone(),
                    gender: iv.gender,
                    date: iv.interview_date,
                    season: iv.season,
                    outcome: iv.outcome,
                    rank: iv.rank_at_interview,
                    snippet_index: q.snippet_index,
                    position_in_snippet: q.position_in_snippet,
                    text: q.raw_text.clone(),
                    tokens: q.tokens.clone(),
                })
            })
            .collect()
    }

    pub fn question(&self) -> Question {
        Question {
            question_id: self.question_id.clone(),
            raw_text: self.text.clone(),
            tokens: self.tokens.clone(),
            snippet_index: self.snippet_index,
            position_in_snippet: self.position_in_snippet,
        }
    }
}

pub fn write_questions(path: &Path, records: &[QuestionRecord]) -> Result<()> {
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    let mut w = BufWriter::new(file);
    for r in records {
        let line = serde_json::to_string(r).expect("question record serializes");
        writeln!(w, "{line}").map_err(|e| Error::io(path, e))?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}

pub fn read_questions(path: &Path) -> Result<Vec<QuestionRecord>> {
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    let mut out = Vec::new();
    for (i, line) in BufReader::new(file).lines().enumerate() {
        let line = line.map_err(|e| Error::io(path, e))?;
        if line.trim().is_empty() {
            continue;
        }
        out.push(serde_json::from_str(&line).map_err(|e| Error::parse(path, i + 1, e.to_string()))?);
    }
    Ok(out)
}
