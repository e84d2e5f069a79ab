//! Rank tests, resampling and descriptive summaries.

mod mann_whitney;
mod micro;
mod rank;
mod resample;
mod summary;
mod wilcoxon;

use serde::{Deserialize, Serialize};

pub use mann_whitney::{mann_whitney_u, mann_whitney_u_with, MwuMethod};
pub use micro::{micro_average_by_player, MicroAverage};
pub use rank::{midranks, tie_sizes};
pub use resample::{
    bootstrap_mean_ci, bootstrap_mean_diff_ci, gap_of_gaps_permutation_test, ConfidenceInterval,
};
pub use summary::{summarize, Summary};
pub use wilcoxon::{wilcoxon_signed_rank, wilcoxon_signed_rank_with, WilcoxonMethod, ZeroHandling};

use crate::error::{Error, Result};

/// Largest combined sample size for which Mann-Whitney uses exact enumeration by default.
pub const MWU_EXACT_MAX: usize = 12;
/// Largest number of non-zero differences for which Wilcoxon is exact by default.
pub const WILCOXON_EXACT_MAX: usize = 20;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Sample {
    pub label: String,
    pub values: Vec<f64>,
}

impl Sample {
    pub fn new(label: impl Into<String>, values: Vec<f64>) -> Self {
        Sample {
            label: label.into(),
            values,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.values.is_empty() {
            return Err(Error::Degenerate(format!("sample {} is empty", self.label)));
        }
        if self.values.iter().any(|v| !v.is_finite()) {
            return Err(Error::Degenerate(format!(
                "sample {} has non-finite values",
                self.label
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PairedSample {
    pub pairs: Vec<(f64, f64)>,
    pub pairing_key: String,
}

impl PairedSample {
    pub fn new(pairing_key: impl Into<String>, pairs: Vec<(f64, f64)>) -> Self {
        PairedSample {
            pairs,
            pairing_key: pairing_key.into(),
        }
    }

    pub fn swapped(&self) -> Self {
        PairedSample {
            pairs: self.pairs.iter().map(|&(a, b)| (b, a)).collect(),
            pairing_key: self.pairing_key.clone(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Sidedness {
    #[default]
    TwoSided,
    /// The first sample tends to be smaller.
    Less,
    /// The first sample tends to be larger.
    Greater,
}

impl Sidedness {
    pub fn as_str(self) -> &'static str {
        match self {
            Sidedness::TwoSided => "two_sided",
            Sidedness::Less => "less",
            Sidedness::Greater => "greater",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "two_sided" | "two-sided" => Some(Sidedness::TwoSided),
            "less" => Some(Sidedness::Less),
            "greater" => Some(Sidedness::Greater),
            _ => None,
        }
    }

    /// Combine one-sided tail probabilities P(T <= t) and P(T >= t).
    pub(crate) fn p_from_tails(self, lower: f64, upper: f64) -> f64 {
        let p = match self {
            Sidedness::Less => lower,
            Sidedness::Greater => upper,
            Sidedness::TwoSided => 2.0 * lower.min(upper),
        };
        p.clamp(0.0, 1.0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TestMethod {
    MannWhitneyU,
    WilcoxonSignedRank,
    MannWhitneyExact,
    WilcoxonExact,
    /// Permutation test on the difference between two group gaps.
    PermutationInteraction,
}

impl TestMethod {
    pub fn as_str(self) -> &'static str {
        match self {
            TestMethod::MannWhitneyU => "mann_whitney_u",
            TestMethod::WilcoxonSignedRank => "wilcoxon_signed_rank",
            TestMethod::MannWhitneyExact => "mann_whitney_exact",
            TestMethod::WilcoxonExact => "wilcoxon_exact",
            TestMethod::PermutationInteraction => "permutation_interaction",
        }
    }
}

/// Outcome of a two-sample or paired comparison.
///
/// For paired tests `n1` is the number of pairs and `n2` the number of
/// non-zero differences that entered the ranking.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TestResult {
    pub method: TestMethod,
    pub statistic: f64,
    pub p_value: f64,
    pub sidedness: Sidedness,
    pub n1: usize,
    pub n2: usize,
    pub mean_a: f64,
    pub mean_b: f64,
    pub median_a: f64,
    pub median_b: f64,
}

fn std_normal() -> statrs::distribution::Normal {
    statrs::distribution::Normal::standard()
}

/// P(Z <= z) and P(Z >= z) for a standard normal.
pub(crate) fn normal_tails(z: f64) -> (f64, f64) {
    use statrs::distribution::ContinuousCDF;
    let n = std_normal();
    (n.cdf(z), n.sf(z))
}
