use std::collections::BTreeMap;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::pairing::{pair_by_outcome, pair_by_rank_group, PairAudit, Pairing};
use super::scored::ScoredQuestion;
use super::{AnalysisConfig, ExperimentSpec, Grouping, PairingScheme, RankGroup, Unit};
use crate::corpus::{Gender, Outcome};
use crate::error::{Error, Result};
use crate::stats::{
    bootstrap_mean_ci, bootstrap_mean_diff_ci, gap_of_gaps_permutation_test, mann_whitney_u,
    micro_average_by_player, summarize, wilcoxon_signed_rank, ConfidenceInterval, Sample, Summary,
    TestResult,
};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Cell {
    pub condition: String,
    pub gender: Gender,
    pub unit: Unit,
    pub summary: Summary,
    /// Bootstrap interval for the cell mean.
    pub ci: Option<ConfidenceInterval>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SeedSweep {
    pub seeds: Vec<u64>,
    pub p_values: Vec<f64>,
    pub median_p: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Comparison {
    /// What is compared, e.g. `male_vs_female`, `top10_vs_rest`, `gap_of_gaps`.
    pub name: String,
    pub condition: String,
    pub test: TestResult,
    /// Bootstrap interval for mean(a) - mean(b).
    pub mean_diff_ci: Option<ConfidenceInterval>,
    pub seed_sweep: Option<SeedSweep>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentResult {
    pub spec: ExperimentSpec,
    pub cells: Vec<Cell>,
    pub comparisons: Vec<Comparison>,
    /// Questions or players left out, by reason.
    pub excluded: BTreeMap<String, usize>,
    #[serde(skip)]
    pub pairs: Vec<PairAudit>,
}

pub fn run_experiment(
    spec: &ExperimentSpec,
    questions: &[ScoredQuestion],
    cfg: &AnalysisConfig,
) -> Result<ExperimentResult> {
    spec.validate()?;
    if spec.pairing == PairingScheme::None {
        run_group_comparison(spec, questions, cfg)
    } else {
        run_paired_comparison(spec, questions, cfg)
    }
}

fn conditions(grouping: Grouping) -> &'static [&'static str] {
    match grouping {
        Grouping::Gender => &["all"],
        Grouping::GenderTypicality => &["typical", "atypical"],
        Grouping::GenderRankGroup => &["top10", "rest"],
        Grouping::GenderOutcome => &["won", "lost"],
    }
}

/// Condition label of a question; `Ok(None)` means the question is left out.
fn condition_of(grouping: Grouping, q: &ScoredQuestion, top_cut: u32) -> Result<Option<&'static str>> {
    Ok(match grouping {
        Grouping::Gender => Some("all"),
        Grouping::GenderTypicality => {
            let t = q.typicality.ok_or_else(|| {
                Error::InvalidRecord(format!("question {} has no typicality label", q.question_id))
            })?;
            Some(t.as_str())
        }
        Grouping::GenderRankGroup => RankGroup::of(q.rank, top_cut).map(RankGroup::as_str),
        Grouping::GenderOutcome => Some(match q.outcome {
            Outcome::Won => "won",
            Outcome::Lost => "lost",
        }),
    })
}

fn make_cell(
    condition: &str,
    gender: Gender,
    unit: Unit,
    values: &[f64],
    cfg: &AnalysisConfig,
    rng: &mut ChaCha8Rng,
    cell_name: impl FnOnce() -> String,
) -> Result<Cell> {
    let summary = summarize(values).ok_or_else(|| Error::EmptyCell(cell_name()))?;
    let ci = (cfg.bootstrap_resamples > 0).then(|| bootstrap_mean_ci(values, cfg.bootstrap_resamples, cfg.ci_level, rng));
    Ok(Cell {
        condition: condition.to_string(),
        gender,
        unit,
        summary,
        ci,
    })
}

/// Mann-Whitney comparison of male against female perplexities within each
/// condition of the grouping, plus a gap-of-gaps permutation test for the
/// typicality grouping.
pub fn run_group_comparison(
    spec: &ExperimentSpec,
    questions: &[ScoredQuestion],
    cfg: &AnalysisConfig,
) -> Result<ExperimentResult> {
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let conds = conditions(spec.grouping);
    let mut excluded = BTreeMap::new();

    // values[condition][gender]
    let mut values: Vec<[Vec<f64>; 2]> = vec![[Vec::new(), Vec::new()]; conds.len()];
    match spec.unit {
        Unit::Question => {
            let mut missing = 0;
            for q in questions {
                match condition_of(spec.grouping, q, cfg.top_rank_cut)? {
                    Some(c) => {
                        let ci = conds.iter().position(|x| *x == c).expect("known condition");
                        values[ci][q.gender as usize].push(q.perplexity);
                    }
                    None => missing += 1,
                }
            }
            if missing > 0 {
                excluded.insert("missing_rank".to_string(), missing);
            }
        }
        Unit::PlayerMicroAverage => {
            let micro = micro_average_by_player(
                questions.iter().map(|q| (q.player_id.as_str(), q.gender, q.perplexity)),
                cfg.min_questions,
            );
            excluded.insert("players_below_min_questions".to_string(), micro.excluded_players);
            values[0] = [micro.male.values, micro.female.values];
        }
    }

    let mut cells = Vec::new();
    for (ci, cond) in conds.iter().enumerate() {
        for g in Gender::ALL {
            let v = &values[ci][g as usize];
            cells.push(make_cell(cond, g, spec.unit, v, cfg, &mut rng, || {
                format!("{}/{}/{}", spec.name, cond, g.as_str())
            })?);
        }
    }

    let mut comparisons = Vec::new();
    for (ci, cond) in conds.iter().enumerate() {
        let [male, female] = &values[ci];
        let test = mann_whitney_u(
            &Sample::new("male", male.clone()),
            &Sample::new("female", female.clone()),
            cfg.sidedness,
        )?;
        let mean_diff_ci = (cfg.bootstrap_resamples > 0)
            .then(|| bootstrap_mean_diff_ci(male, female, cfg.bootstrap_resamples, cfg.ci_level, &mut rng));
        comparisons.push(Comparison {
            name: "male_vs_female".into(),
            condition: cond.to_string(),
            test,
            mean_diff_ci,
            seed_sweep: None,
        });
    }

    if spec.grouping == Grouping::GenderTypicality && cfg.permutations > 0 {
        let m = Gender::Male as usize;
        let f = Gender::Female as usize;
        let test = gap_of_gaps_permutation_test(
            [
                [&values[0][m], &values[1][m]],
                [&values[0][f], &values[1][f]],
            ],
            cfg.permutations,
            cfg.sidedness,
            &mut rng,
        )?;
        comparisons.push(Comparison {
            name: "gap_of_gaps".into(),
            condition: "atypical_minus_typical".into(),
            test,
            mean_diff_ci: None,
            seed_sweep: None,
        });
    }

    Ok(ExperimentResult {
        spec: spec.clone(),
        cells,
        comparisons,
        excluded,
        pairs: Vec::new(),
    })
}

fn pair(spec: &ExperimentSpec, questions: &[ScoredQuestion], cfg: &AnalysisConfig, seed: u64) -> Result<Pairing> {
    match spec.pairing {
        PairingScheme::RankGroupWithinPlayer => pair_by_rank_group(questions, cfg.top_rank_cut, seed),
        PairingScheme::OutcomeWithinPlayerSeason => pair_by_outcome(questions, seed),
        PairingScheme::None => unreachable!("validated"),
    }
}

fn median(mut v: Vec<f64>) -> f64 {
    v.sort_by(f64::total_cmp);
    let n = v.len();
    if n % 2 == 1 {
        v[n / 2]
    } else {
        (v[n / 2 - 1] + v[n / 2]) / 2.0
    }
}

/// Wilcoxon signed-rank test per gender on within-player pairs.
pub fn run_paired_comparison(
    spec: &ExperimentSpec,
    questions: &[ScoredQuestion],
    cfg: &AnalysisConfig,
) -> Result<ExperimentResult> {
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let pairing = pair(spec, questions, cfg, spec.seed)?;
    let (side_a, side_b, name) = match spec.pairing {
        PairingScheme::RankGroupWithinPlayer => ("top10", "rest", "top10_vs_rest"),
        _ => ("won", "lost", "won_vs_lost"),
    };
    let sweep_seeds: Vec<u64> = (0..cfg.seed_sweep as u64).map(|i| spec.seed.wrapping_add(i)).collect();
    let mut sweep_p: BTreeMap<Gender, Vec<f64>> = BTreeMap::new();
    for &s in &sweep_seeds {
        let p = pair(spec, questions, cfg, s)?;
        for g in Gender::ALL {
            let r = wilcoxon_signed_rank(&p.samples[&g], cfg.sidedness)?;
            sweep_p.entry(g).or_default().push(r.p_value);
        }
    }

    let mut cells = Vec::new();
    let mut comparisons = Vec::new();
    let mut excluded = BTreeMap::new();
    if spec.pairing == PairingScheme::RankGroupWithinPlayer {
        let missing = questions.iter().filter(|q| q.rank.is_none()).count();
        if missing > 0 {
            excluded.insert("missing_rank".to_string(), missing);
        }
    }
    for g in Gender::ALL {
        let sample = &pairing.samples[&g];
        let a: Vec<f64> = sample.pairs.iter().map(|p| p.0).collect();
        let b: Vec<f64> = sample.pairs.iter().map(|p| p.1).collect();
        for (cond, v) in [(side_a, &a), (side_b, &b)] {
            cells.push(make_cell(cond, g, Unit::Question, v, cfg, &mut rng, || {
                format!("{}/{}/{}", spec.name, cond, g.as_str())
            })?);
        }
        let test = wilcoxon_signed_rank(sample, cfg.sidedness)?;
        let mean_diff_ci = (cfg.bootstrap_resamples > 0).then(|| {
            let diffs: Vec<f64> = sample.pairs.iter().map(|(x, y)| x - y).collect();
            bootstrap_mean_ci(&diffs, cfg.bootstrap_resamples, cfg.ci_level, &mut rng)
        });
        let seed_sweep = sweep_p.remove(&g).map(|p_values| SeedSweep {
            seeds: sweep_seeds.clone(),
            median_p: median(p_values.clone()),
            p_values,
        });
        comparisons.push(Comparison {
            name: name.to_string(),
            condition: g.as_str().to_string(),
            test,
            mean_diff_ci,
            seed_sweep,
        });
        excluded.insert(format!("pairing_units_{}", g.as_str()), pairing.units.get(&g).copied().unwrap_or(0));
    }
    Ok(ExperimentResult {
        spec: spec.clone(),
        cells,
        comparisons,
        excluded,
        pairs: pairing.audit,
    })
}

/// Rank group per question, with unranked questions put in `Rest` and
/// flagged. Rank experiments leave flagged questions out.
pub fn split_by_ranking(questions: &[ScoredQuestion], top_cut: u32) -> (Vec<(RankGroup, bool)>, usize) {
    let labels: Vec<(RankGroup, bool)> = questions
        .iter()
        .map(|q| match RankGroup::of(q.rank, top_cut) {
            Some(g) => (g, false),
            None => (RankGroup::Rest, true),
        })
        .collect();
    let missing = labels.iter().filter(|(_, f)| *f).count();
    (labels, missing)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::analysis::Experiment;
    use crate::typicality::Typicality;

    fn sq(id: usize, gender: Gender, pp: f64) -> ScoredQuestion {
        ScoredQuestion {
            question_id: format!("q{id:04}"),
            player_id: format!("p{}", id % 7),
            gender,
            season: 2010 + ((id / 2) % 3) as i32,
            outcome: if (id / 2).is_multiple_of(2) { Outcome::Won } else { Outcome::Lost },
            rank: if id.is_multiple_of(5) { None } else { Some((id % 20) as u32 + 1) },
            perplexity: pp,
            n_scored_tokens: 5,
            atypicality: None,
            typicality: Some(if id.is_multiple_of(3) { Typicality::Atypical } else { Typicality::Typical }),
        }
    }

    fn data() -> Vec<ScoredQuestion> {
        (0..400)
            .map(|i| {
                let g = if i % 2 == 0 { Gender::Male } else { Gender::Female };
                let base = if g == Gender::Male { 50.0 } else { 80.0 };
                sq(i, g, base + ((i * 7919) % 101) as f64)
            })
            .map(|mut q| {
                // separate players by gender
                q.player_id = format!("{}-{}", q.gender.as_str(), q.player_id);
                q
            })
            .collect()
    }

    fn cfg() -> AnalysisConfig {
        AnalysisConfig {
            bootstrap_resamples: 200,
            permutations: 200,
            seed_sweep: 3,
            ..AnalysisConfig::default()
        }
    }

    #[test]
    fn typicality_has_four_cells_three_tests() {
        let spec = &Experiment::Typicality.specs(5)[0];
        let r = run_experiment(spec, &data(), &cfg()).unwrap();
        assert_eq!(r.cells.len(), 4);
        assert_eq!(r.comparisons.len(), 3);
        assert_eq!(r.comparisons[2].name, "gap_of_gaps");
    }

    #[test]
    fn every_question_in_exactly_one_cell() {
        let d = data();
        for spec in Experiment::All.specs(1).iter().filter(|s| s.pairing == PairingScheme::None && s.unit == Unit::Question) {
            let r = run_experiment(spec, &d, &cfg()).unwrap();
            let n: usize = r.cells.iter().map(|c| c.summary.n).sum();
            let missing = r.excluded.get("missing_rank").copied().unwrap_or(0);
            assert_eq!(n + missing, d.len(), "{}", spec.name);
        }
    }

    #[test]
    fn male_lower_detected() {
        let spec = &Experiment::Gender.specs(5)[0];
        let r = run_experiment(spec, &data(), &cfg()).unwrap();
        let t = &r.comparisons[0].test;
        assert!(t.mean_a < t.mean_b);
        assert!(t.p_value < 1e-6);
    }

    #[test]
    fn empty_cell_is_an_error() {
        let d: Vec<_> = data().into_iter().filter(|q| q.gender == Gender::Male).collect();
        let spec = &Experiment::Gender.specs(5)[0];
        match run_experiment(spec, &d, &cfg()) {
            Err(Error::EmptyCell(c)) => assert_eq!(c, "gender/all/female"),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn paired_runs_have_seed_sweep() {
        let spec = &Experiment::Outcome.specs(5)[1];
        let r = run_experiment(spec, &data(), &cfg()).unwrap();
        assert_eq!(r.comparisons.len(), 2);
        let sweep = r.comparisons[0].seed_sweep.as_ref().unwrap();
        assert_eq!(sweep.p_values.len(), 3);
        assert!(!r.pairs.is_empty());
    }

    #[test]
    fn ranking_split_flags_missing() {
        let d = data();
        let (labels, missing) = split_by_ranking(&d, 10);
        assert_eq!(missing, d.iter().filter(|q| q.rank.is_none()).count());
        assert!(labels.iter().filter(|(_, f)| *f).all(|(g, _)| *g == RankGroup::Rest));
    }

    #[test]
    fn relabeling_genders_keeps_two_sided_p() {
        let d = data();
        let swapped: Vec<_> = d
            .iter()
            .cloned()
            .map(|mut q| {
                q.gender = match q.gender {
                    Gender::Male => Gender::Female,
                    Gender::Female => Gender::Male,
                };
                q
            })
            .collect();
        let spec = &Experiment::Rank.specs(5)[0];
        let a = run_experiment(spec, &d, &cfg()).unwrap();
        let b = run_experiment(spec, &swapped, &cfg()).unwrap();
        for (x, y) in a.comparisons.iter().zip(&b.comparisons) {
            assert_eq!(x.test.p_value, y.test.p_value);
            assert_eq!(x.test.mean_a, y.test.mean_b);
        }
    }
}
