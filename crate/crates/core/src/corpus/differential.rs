use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use super::ingest::Gender;
use super::lexicon::WordList;
use super::merge::Interview;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WordSkew {
    pub word: String,
    pub male_pct: f64,
    pub female_pct: f64,
    pub diff: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WordUsageDifferential {
    /// Sorted by `diff` descending.
    pub male_skew: Vec<WordSkew>,
    /// Sorted by `diff` ascending (most female-skewed first).
    pub female_skew: Vec<WordSkew>,
}

/// Fraction of players per gender who were ever asked a question containing
/// each word. Counting is per player, so repeated questions do not matter.
///
/// Returns `None` when one of the genders has no players.
pub fn word_usage_differential(
    interviews: &[Interview],
    exclusion: &WordList,
) -> Option<WordUsageDifferential> {
    let mut players: BTreeMap<Gender, BTreeSet<&str>> = BTreeMap::new();
    let mut users: BTreeMap<&str, [BTreeSet<&str>; 2]> = BTreeMap::new();
    for iv in interviews {
        players.entry(iv.gender).or_default().insert(&iv.player_id);
        let g = iv.gender as usize;
        for q in &iv.questions {
            for t in &q.tokens {
                if t.is_entity_mask || !t.is_word() || exclusion.contains(&t.normalized) {
                    continue;
                }
                users.entry(&t.normalized).or_default()[g].insert(&iv.player_id);
            }
        }
    }
    let n_male = players.get(&Gender::Male).map_or(0, BTreeSet::len);
    let n_female = players.get(&Gender::Female).map_or(0, BTreeSet::len);
    if n_male == 0 || n_female == 0 {
        return None;
    }
    let rows: Vec<WordSkew> = users
        .into_iter()
        .map(|(word, sets)| {
            let male_pct = sets[Gender::Male as usize].len() as f64 / n_male as f64;
            let female_pct = sets[Gender::Female as usize].len() as f64 / n_female as f64;
            WordSkew {
                word: word.to_string(),
                male_pct,
                female_pct,
                diff: male_pct - female_pct,
            }
        })
        .collect();
    // words are already in lexical order, so a stable sort breaks ties by word
    let mut male_skew = rows.clone();
    male_skew.sort_by(|a, b| b.diff.total_cmp(&a.diff));
    let mut female_skew = rows;
    female_skew.sort_by(|a, b| a.diff.total_cmp(&b.diff));
    Some(WordUsageDifferential {
        male_skew,
        female_skew,
    })
}
