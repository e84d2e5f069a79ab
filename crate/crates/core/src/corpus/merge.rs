use std::collections::{BTreeMap, BTreeSet, HashMap};

use chrono::{Datelike, NaiveDate};
use serde::{Deserialize, Serialize};

use super::ingest::{Gender, MatchRecord, TranscriptRecord};
use super::names::canonical_name;
use super::text::{split_questions, Question, TextProcessor};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Outcome {
    Won,
    Lost,
}

impl Outcome {
    pub fn as_str(self) -> &'static str {
        match self {
            Outcome::Won => "won",
            Outcome::Lost => "lost",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Interview {
    pub transcript_id: String,
    pub player_id: String,
    pub gender: Gender,
    pub interview_date: NaiveDate,
    pub outcome: Outcome,
    pub rank_at_interview: Option<u32>,
    pub season: i32,
    pub n_snippets: usize,
    pub questions: Vec<Question>,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct MergeReport {
    pub merged: usize,
    pub unmatched_transcripts: usize,
    /// Duplicate (date, player) match keys that no transcript referred to.
    pub ambiguous: usize,
    pub merged_snippets: usize,
    pub questions: usize,
}

#[derive(Debug, Clone)]
pub struct MergeOutput {
    pub interviews: Vec<Interview>,
    pub report: MergeReport,
}

#[derive(Clone, Copy)]
struct Side {
    outcome: Outcome,
    rank: Option<u32>,
    gender: Gender,
}

/// Join transcripts to match rows on (date, canonical player name).
///
/// A transcript whose key hits more than one match row is an error; so is a
/// player seen under both tours.
pub fn merge_transcripts(
    transcripts: &[TranscriptRecord],
    matches: &[MatchRecord],
    text: &TextProcessor,
) -> Result<MergeOutput> {
    let mut index: BTreeMap<(NaiveDate, String), Vec<Side>> = BTreeMap::new();
    for m in matches {
        let gender = m.tour.gender();
        index
            .entry((m.match_date, canonical_name(&m.winner_name)))
            .or_default()
            .push(Side {
                outcome: Outcome::Won,
                rank: m.winner_rank,
                gender,
            });
        index
            .entry((m.match_date, canonical_name(&m.loser_name)))
            .or_default()
            .push(Side {
                outcome: Outcome::Lost,
                rank: m.loser_rank,
                gender,
            });
    }

    let mut report = MergeReport::default();
    let mut interviews = Vec::new();
    let mut offenders = BTreeSet::new();
    let mut hit_ambiguous = BTreeSet::new();
    for t in transcripts {
        let player_id = canonical_name(&t.player_name);
        let key = (t.interview_date, player_id);
        let Some(sides) = index.get(&key) else {
            report.unmatched_transcripts += 1;
            continue;
        };
        if sides.len() > 1 {
            offenders.insert(format!("{} {} (transcript {})", key.0, key.1, t.transcript_id));
            hit_ambiguous.insert(key);
            continue;
        }
        let side = sides[0];
        let questions: Vec<Question> = t
            .snippets
            .iter()
            .enumerate()
            .flat_map(|(i, s)| text.extract_questions(s, &t.transcript_id, i))
            .collect();
        report.merged += 1;
        report.merged_snippets += t.snippets.len();
        report.questions += questions.len();
        interviews.push(Interview {
            transcript_id: t.transcript_id.clone(),
            player_id: key.1,
            gender: side.gender,
            interview_date: t.interview_date,
            outcome: side.outcome,
            rank_at_interview: side.rank,
            season: t.interview_date.year(),
            n_snippets: t.snippets.len(),
            questions,
        });
    }
    if !offenders.is_empty() {
        return Err(Error::AmbiguousMatch(offenders.into_iter().collect()));
    }
    report.ambiguous = index
        .iter()
        .filter(|(k, v)| v.len() > 1 && !hit_ambiguous.contains(*k))
        .count();

    let mut genders: HashMap<&str, Gender> = HashMap::new();
    for iv in &interviews {
        if let Some(g) = genders.insert(&iv.player_id, iv.gender) {
            if g != iv.gender {
                return Err(Error::GenderConflict {
                    player: iv.player_id.clone(),
                });
            }
        }
    }
    Ok(MergeOutput { interviews, report })
}

/// Number of `?`-terminated sentences across the snippets of merged transcripts.
pub fn count_question_segments<'a>(snippets: impl IntoIterator<Item = &'a str>) -> usize {
    snippets.into_iter().map(|s| split_questions(s).len()).sum()
}
