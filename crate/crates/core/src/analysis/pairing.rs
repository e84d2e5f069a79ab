//! Within-player pairing for the paired (Wilcoxon) experiments.

use std::collections::BTreeMap;

use rand::seq::index::sample;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::scored::ScoredQuestion;
use super::RankGroup;
use crate::corpus::{Gender, Outcome};
use crate::error::{Error, Result};
use crate::stats::PairedSample;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PairAudit {
    pub gender: Gender,
    pub player_id: String,
    pub unit: String,
    pub question_a: String,
    pub question_b: String,
    pub perplexity_a: f64,
    pub perplexity_b: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Pairing {
    pub samples: BTreeMap<Gender, PairedSample>,
    pub audit: Vec<PairAudit>,
    /// Pairing units (player or player-season) that contributed pairs.
    pub units: BTreeMap<Gender, usize>,
}

type Sides<'a> = (Vec<&'a ScoredQuestion>, Vec<&'a ScoredQuestion>);

/// Pair side-a and side-b questions inside each unit. `min(n_a, n_b)` pairs
/// are formed: the smaller side in question-id order, matched with a seeded
/// sample without replacement from the larger side.
fn pair_units<K: Ord + std::fmt::Display>(
    units: BTreeMap<(Gender, String, K), Sides<'_>>,
    seed: u64,
    key_desc: &str,
) -> Result<Pairing> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut samples: BTreeMap<Gender, PairedSample> = Gender::ALL
        .into_iter()
        .map(|g| (g, PairedSample::new(format!("{key_desc} ({})", g.as_str()), Vec::new())))
        .collect();
    let mut audit = Vec::new();
    let mut counts: BTreeMap<Gender, usize> = BTreeMap::new();
    for ((gender, player, key), (mut a, mut b)) in units {
        let k = a.len().min(b.len());
        if k == 0 {
            continue;
        }
        a.sort_by(|x, y| x.question_id.cmp(&y.question_id));
        b.sort_by(|x, y| x.question_id.cmp(&y.question_id));
        let (a, b) = if a.len() > k {
            (sample(&mut rng, a.len(), k).into_iter().map(|i| a[i]).collect(), b)
        } else if b.len() > k {
            let picked = sample(&mut rng, b.len(), k).into_iter().map(|i| b[i]).collect();
            (a, picked)
        } else {
            (a, b)
        };
        *counts.entry(gender).or_default() += 1;
        let s = samples.get_mut(&gender).expect("both genders present");
        for (qa, qb) in a.iter().zip(&b) {
            s.pairs.push((qa.perplexity, qb.perplexity));
            audit.push(PairAudit {
                gender,
                player_id: player.clone(),
                unit: key.to_string(),
                question_a: qa.question_id.clone(),
                question_b: qb.question_id.clone(),
                perplexity_a: qa.perplexity,
                perplexity_b: qb.perplexity,
            });
        }
    }
    for g in Gender::ALL {
        if samples[&g].pairs.is_empty() {
            return Err(Error::NoQualifying(format!(
                "no {} players with questions on both sides for {key_desc}",
                g.as_str()
            )));
        }
    }
    Ok(Pairing {
        samples,
        audit,
        units: counts,
    })
}

/// Pair each player's top-10 questions (side a) with questions asked while
/// ranked outside the top 10 (side b). Questions without a rank are ignored.
pub fn pair_by_rank_group(questions: &[ScoredQuestion], top_cut: u32, seed: u64) -> Result<Pairing> {
    let mut units: BTreeMap<(Gender, String, &'static str), Sides<'_>> = BTreeMap::new();
    for q in questions {
        let Some(group) = RankGroup::of(q.rank, top_cut) else {
            continue;
        };
        let e = units.entry((q.gender, q.player_id.clone(), "all")).or_default();
        match group {
            RankGroup::Top10 => e.0.push(q),
            RankGroup::Rest => e.1.push(q),
        }
    }
    pair_units(units, seed, "player, top10 vs rest")
}

/// Pair each player's questions after wins (side a) with questions after
/// losses (side b) in the same season.
pub fn pair_by_outcome(questions: &[ScoredQuestion], seed: u64) -> Result<Pairing> {
    let mut units: BTreeMap<(Gender, String, i32), Sides<'_>> = BTreeMap::new();
    for q in questions {
        let e = units.entry((q.gender, q.player_id.clone(), q.season)).or_default();
        match q.outcome {
            Outcome::Won => e.0.push(q),
            Outcome::Lost => e.1.push(q),
        }
    }
    pair_units(units, seed, "player and season, won vs lost")
}
