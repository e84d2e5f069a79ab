//! Readers for the on-disk inputs: transcript JSONL, match CSV, commentary text.

use std::collections::HashMap;
use std::fs::File;
use std::io::{BufRead, BufReader};
use std::path::Path;

use chrono::NaiveDate;
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Gender {
    Male,
    Female,
}

impl Gender {
    pub const ALL: [Gender; 2] = [Gender::Male, Gender::Female];

    pub fn as_str(self) -> &'static str {
        match self {
            Gender::Male => "male",
            Gender::Female => "female",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "male" | "m" => Some(Gender::Male),
            "female" | "f" => Some(Gender::Female),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Tour {
    #[serde(rename = "ATP")]
    Atp,
    #[serde(rename = "WTA")]
    Wta,
}

impl Tour {
    pub fn gender(self) -> Gender {
        match self {
            Tour::Atp => Gender::Male,
            Tour::Wta => Gender::Female,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CommentaryDoc {
    pub id: String,
    pub text: String,
    pub gender_tag: Option<Gender>,
    pub match_date: Option<NaiveDate>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TranscriptRecord {
    #[serde(rename = "id")]
    pub transcript_id: String,
    #[serde(rename = "player")]
    pub player_name: String,
    #[serde(rename = "date")]
    pub interview_date: NaiveDate,
    pub snippets: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MatchRecord {
    #[serde(rename = "date")]
    pub match_date: NaiveDate,
    #[serde(rename = "winner")]
    pub winner_name: String,
    #[serde(rename = "loser")]
    pub loser_name: String,
    pub winner_rank: Option<u32>,
    pub loser_rank: Option<u32>,
    pub tour: Tour,
}

impl MatchRecord {
    pub fn validate(&self) -> Result<()> {
        if super::canonical_name(&self.winner_name) == super::canonical_name(&self.loser_name) {
            return Err(Error::InvalidRecord(format!(
                "{}: winner and loser are both {}",
                self.match_date, self.winner_name
            )));
        }
        if self.winner_rank == Some(0) || self.loser_rank == Some(0) {
            return Err(Error::InvalidRecord(format!(
                "{}: rank must be >= 1",
                self.match_date
            )));
        }
        Ok(())
    }
}

fn open(path: &Path) -> Result<BufReader<File>> {
    File::open(path)
        .map(BufReader::new)
        .map_err(|e| Error::io(path, e))
}

/// One transcript per line; blank lines are ignored.
pub fn read_transcripts(path: &Path) -> Result<Vec<TranscriptRecord>> {
    let mut out = Vec::new();
    for (i, line) in open(path)?.lines().enumerate() {
        let line = line.map_err(|e| Error::io(path, e))?;
        if line.trim().is_empty() {
            continue;
        }
        let rec: TranscriptRecord =
            serde_json::from_str(&line).map_err(|e| Error::parse(path, i + 1, e.to_string()))?;
        if rec.snippets.is_empty() {
            return Err(Error::parse(path, i + 1, "transcript has no snippets"));
        }
        out.push(rec);
    }
    Ok(out)
}

pub fn read_matches(path: &Path) -> Result<Vec<MatchRecord>> {
    let mut rdr = csv::Reader::from_reader(open(path)?);
    let mut out = Vec::new();
    for (i, row) in rdr.deserialize::<MatchRecord>().enumerate() {
        let line = i + 2;
        let rec = row.map_err(|e| Error::parse(path, line, e.to_string()))?;
        rec.validate()
            .map_err(|e| Error::parse(path, line, e.to_string()))?;
        out.push(rec);
    }
    Ok(out)
}

/// Commentary text, one document per non-blank line. Ids are 1-based line
/// numbers. The optional sidecar CSV has header `id,gender`.
pub fn read_commentary(path: &Path, gender_tags: Option<&Path>) -> Result<Vec<CommentaryDoc>> {
    let tags = match gender_tags {
        Some(p) => read_gender_tags(p)?,
        None => HashMap::new(),
    };
    let mut out = Vec::new();
    for (i, line) in open(path)?.lines().enumerate() {
        let line = line.map_err(|e| Error::io(path, e))?;
        if line.trim().is_empty() {
            continue;
        }
        let id = (i + 1).to_string();
        let gender_tag = tags.get(&id).copied();
        out.push(CommentaryDoc {
            id,
            text: line,
            gender_tag,
            match_date: None,
        });
    }
    Ok(out)
}

fn read_gender_tags(path: &Path) -> Result<HashMap<String, Gender>> {
    #[derive(Deserialize)]
    struct Row {
        id: String,
        gender: String,
    }
    let mut rdr = csv::Reader::from_reader(open(path)?);
    let mut out = HashMap::new();
    for (i, row) in rdr.deserialize::<Row>().enumerate() {
        let row = row.map_err(|e| Error::parse(path, i + 2, e.to_string()))?;
        let g = Gender::parse(&row.gender)
            .ok_or_else(|| Error::parse(path, i + 2, format!("unknown gender {:?}", row.gender)))?;
        out.insert(row.id, g);
    }
    Ok(out)
}

/// Subsample to equal per-gender document counts (the size of the smaller
/// side). Untagged documents are dropped. Output keeps input order.
pub fn balance_by_gender(docs: &[CommentaryDoc], seed: u64) -> Vec<CommentaryDoc> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let idx_for = |g: Gender| -> Vec<usize> {
        docs.iter()
            .enumerate()
            .filter(|(_, d)| d.gender_tag == Some(g))
            .map(|(i, _)| i)
            .collect()
    };
    let mut male = idx_for(Gender::Male);
    let mut female = idx_for(Gender::Female);
    let n = male.len().min(female.len());
    male.shuffle(&mut rng);
    female.shuffle(&mut rng);
    let mut keep: Vec<usize> = male[..n].iter().chain(&female[..n]).copied().collect();
    keep.sort_unstable();
    keep.into_iter().map(|i| docs[i].clone()).collect()
}
