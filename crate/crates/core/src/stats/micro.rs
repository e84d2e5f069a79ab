use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::Sample;
use crate::corpus::Gender;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MicroAverage {
    pub male: Sample,
    pub female: Sample,
    /// Player ids in the same order as the sample values.
    pub male_players: Vec<String>,
    pub female_players: Vec<String>,
    /// Players with fewer than `min_questions` questions.
    pub excluded_players: usize,
}

/// One mean perplexity per player with at least `min_questions` questions.
///
/// Players are emitted in id order and each player's values are summed in
/// sorted order, so the output does not depend on input order.
pub fn micro_average_by_player<'a>(
    records: impl IntoIterator<Item = (&'a str, Gender, f64)>,
    min_questions: usize,
) -> MicroAverage {
    let mut by_player: BTreeMap<&str, (Gender, Vec<f64>)> = BTreeMap::new();
    for (player, gender, pp) in records {
        by_player.entry(player).or_insert((gender, Vec::new())).1.push(pp);
    }
    let mut out = MicroAverage {
        male: Sample::new("male", Vec::new()),
        female: Sample::new("female", Vec::new()),
        male_players: Vec::new(),
        female_players: Vec::new(),
        excluded_players: 0,
    };
    for (player, (gender, mut values)) in by_player {
        if values.len() < min_questions.max(1) {
            out.excluded_players += 1;
            continue;
        }
        values.sort_by(f64::total_cmp);
        let m = values.iter().sum::<f64>() / values.len() as f64;
        let (sample, ids) = match gender {
            Gender::Male => (&mut out.male, &mut out.male_players),
            Gender::Female => (&mut out.female, &mut out.female_players),
        };
        sample.values.push(m);
        ids.push(player.to_string());
    }
    out
}
