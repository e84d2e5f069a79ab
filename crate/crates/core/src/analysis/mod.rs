//! Experiment drivers: grouped comparisons, within-player pairing and report
//! assembly.

mod grouping;
mod pairing;
mod report;
mod scored;

use serde::{Deserialize, Serialize};

pub use grouping::{
    run_experiment, run_group_comparison, run_paired_comparison, split_by_ranking, Cell, Comparison, ExperimentResult,
    SeedSweep,
};
pub use pairing::{pair_by_outcome, pair_by_rank_group, PairAudit, Pairing};
pub use report::{build_report, config_hash, AnalysisReport, CellRow, DroppedCounts, PairRow, ReportFiles, TestRow};
pub(crate) use report::hex;
pub use scored::{attach_typicality, read_csv, read_scored, write_csv, ScoredQuestion, TypicalityRow};

use crate::error::{Error, Result};
use crate::stats::Sidedness;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum RankGroup {
    Top10,
    Rest,
}

impl RankGroup {
    /// `None` when the rank is unknown; such questions are left out of rank experiments.
    pub fn of(rank: Option<u32>, top_cut: u32) -> Option<Self> {
        rank.map(|r| if r <= top_cut { RankGroup::Top10 } else { RankGroup::Rest })
    }

    pub fn as_str(self) -> &'static str {
        match self {
            RankGroup::Top10 => "top10",
            RankGroup::Rest => "rest",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Grouping {
    Gender,
    GenderTypicality,
    GenderRankGroup,
    GenderOutcome,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PairingScheme {
    None,
    RankGroupWithinPlayer,
    OutcomeWithinPlayerSeason,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Unit {
    Question,
    PlayerMicroAverage,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ExperimentSpec {
    pub name: String,
    pub grouping: Grouping,
    pub pairing: PairingScheme,
    pub unit: Unit,
    pub seed: u64,
}

impl ExperimentSpec {
    pub fn validate(&self) -> Result<()> {
        if self.pairing != PairingScheme::None && self.unit != Unit::Question {
            return Err(Error::Config(format!(
                "{}: paired experiments run on questions, not player averages",
                self.name
            )));
        }
        let expected = match self.pairing {
            PairingScheme::None => None,
            PairingScheme::RankGroupWithinPlayer => Some(Grouping::GenderRankGroup),
            PairingScheme::OutcomeWithinPlayerSeason => Some(Grouping::GenderOutcome),
        };
        if expected.is_some_and(|g| g != self.grouping) {
            return Err(Error::Config(format!(
                "{}: pairing {:?} does not fit grouping {:?}",
                self.name, self.pairing, self.grouping
            )));
        }
        if self.unit == Unit::PlayerMicroAverage && self.grouping != Grouping::Gender {
            return Err(Error::Config(format!(
                "{}: player micro-averages are only compared by gender",
                self.name
            )));
        }
        Ok(())
    }
}

/// Named experiment families accepted by `analyze --experiment`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Experiment {
    Gender,
    Typicality,
    Rank,
    Outcome,
    All,
}

impl Experiment {
    pub fn as_str(self) -> &'static str {
        match self {
            Experiment::Gender => "gender",
            Experiment::Typicality => "typicality",
            Experiment::Rank => "rank",
            Experiment::Outcome => "outcome",
            Experiment::All => "all",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "gender" => Some(Experiment::Gender),
            "typicality" => Some(Experiment::Typicality),
            "rank" => Some(Experiment::Rank),
            "outcome" => Some(Experiment::Outcome),
            "all" => Some(Experiment::All),
            _ => None,
        }
    }

    pub fn specs(self, seed: u64) -> Vec<ExperimentSpec> {
        let spec = |name: &str, grouping, pairing, unit| ExperimentSpec {
            name: name.to_string(),
            grouping,
            pairing,
            unit,
            seed,
        };
        use Grouping as G;
        use PairingScheme as P;
        match self {
            Experiment::Gender => vec![
                spec("gender", G::Gender, P::None, Unit::Question),
                spec("gender_player_average", G::Gender, P::None, Unit::PlayerMicroAverage),
            ],
            Experiment::Typicality => vec![spec("typicality", G::GenderTypicality, P::None, Unit::Question)],
            Experiment::Rank => vec![
                spec("rank", G::GenderRankGroup, P::None, Unit::Question),
                spec("rank_paired", G::GenderRankGroup, P::RankGroupWithinPlayer, Unit::Question),
            ],
            Experiment::Outcome => vec![
                spec("outcome", G::GenderOutcome, P::None, Unit::Question),
                spec("outcome_paired", G::GenderOutcome, P::OutcomeWithinPlayerSeason, Unit::Question),
            ],
            Experiment::All => [
                Experiment::Gender,
                Experiment::Typicality,
                Experiment::Rank,
                Experiment::Outcome,
            ]
            .into_iter()
            .flat_map(|e| e.specs(seed))
            .collect(),
        }
    }
}

/// Settings shared by every experiment.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct AnalysisConfig {
    pub sidedness: Sidedness,
    pub min_questions: usize,
    pub top_rank_cut: u32,
    pub bootstrap_resamples: usize,
    pub permutations: usize,
    pub ci_level: f64,
    /// Extra pairing seeds run for the robustness summary of paired tests.
    pub seed_sweep: usize,
}

impl Default for AnalysisConfig {
    fn default() -> Self {
        AnalysisConfig {
            sidedness: Sidedness::TwoSided,
            min_questions: 10,
            top_rank_cut: 10,
            bootstrap_resamples: 10_000,
            permutations: 10_000,
            ci_level: 0.95,
            seed_sweep: 20,
        }
    }
}

impl AnalysisConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.ci_level > 0.0 && self.ci_level < 1.0) {
            return Err(Error::Config(format!("ci_level must lie in (0, 1), got {}", self.ci_level)));
        }
        if self.top_rank_cut == 0 {
            return Err(Error::Config("top_rank_cut must be at least 1".into()));
        }
        if self.min_questions == 0 {
            return Err(Error::Config("min_questions must be at least 1".into()));
        }
        Ok(())
    }
}
