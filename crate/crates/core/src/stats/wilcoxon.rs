use super::rank::{doubled_ranks, subset_sum_counts};
use super::summary::{mean, median};
use super::{normal_tails, PairedSample, Sidedness, TestMethod, TestResult, WILCOXON_EXACT_MAX};
use crate::error::{Error, Result};

const EXACT_LIMIT: usize = 50;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum WilcoxonMethod {
    /// Exact when at most 20 differences are non-zero.
    #[default]
    Auto,
    Exact,
    Asymptotic,
}

/// Treatment of zero differences.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ZeroHandling {
    /// Discard zeros before ranking.
    #[default]
    Drop,
    /// Rank zeros with the rest, then leave their ranks out of both sums.
    Pratt,
}

/// Wilcoxon signed-rank test on `d = a - b`. The statistic is W+, the sum
/// of midranks of |d| over positive differences.
pub fn wilcoxon_signed_rank(paired: &PairedSample, sidedness: Sidedness) -> Result<TestResult> {
    wilcoxon_signed_rank_with(paired, sidedness, WilcoxonMethod::Auto, ZeroHandling::Drop)
}

pub fn wilcoxon_signed_rank_with(
    paired: &PairedSample,
    sidedness: Sidedness,
    method: WilcoxonMethod,
    zeros: ZeroHandling,
) -> Result<TestResult> {
    if paired.pairs.is_empty() {
        return Err(Error::Degenerate(format!("no pairs for {}", paired.pairing_key)));
    }
    if paired.pairs.iter().any(|(a, b)| !a.is_finite() || !b.is_finite()) {
        return Err(Error::Degenerate(format!(
            "non-finite values in pairs for {}",
            paired.pairing_key
        )));
    }
    let diffs: Vec<f64> = paired.pairs.iter().map(|(a, b)| a - b).collect();
    let ranked: Vec<f64> = match zeros {
        ZeroHandling::Drop => diffs.iter().copied().filter(|d| *d != 0.0).collect(),
        ZeroHandling::Pratt => diffs.clone(),
    };
    let m = diffs.iter().filter(|d| **d != 0.0).count();
    if m == 0 {
        return Err(Error::Degenerate(format!(
            "all differences are zero for {}",
            paired.pairing_key
        )));
    }
    let abs: Vec<f64> = ranked.iter().map(|d| d.abs()).collect();
    let twice = doubled_ranks(&abs);
    // (doubled rank, positive) for non-zero differences only
    let signed: Vec<(u64, bool)> = ranked
        .iter()
        .zip(&twice)
        .filter(|(d, _)| **d != 0.0)
        .map(|(d, r)| (*r, *d > 0.0))
        .collect();
    let w_plus_twice: u64 = signed.iter().filter(|(_, pos)| *pos).map(|(r, _)| r).sum();
    let w_plus = w_plus_twice as f64 / 2.0;

    let exact = match method {
        WilcoxonMethod::Auto => m <= WILCOXON_EXACT_MAX,
        WilcoxonMethod::Exact => {
            if m > EXACT_LIMIT {
                return Err(Error::Degenerate(format!(
                    "exact Wilcoxon limited to {EXACT_LIMIT} differences, got {m}"
                )));
            }
            true
        }
        WilcoxonMethod::Asymptotic => false,
    };

    let p = if exact {
        let weights: Vec<u64> = signed.iter().map(|(r, _)| *r).collect();
        let table = subset_sum_counts(&weights, m);
        let total_sum = weights.iter().sum::<u64>() as usize;
        // distribution of the doubled W+ over all 2^m sign patterns
        let dist: Vec<f64> = (0..=total_sum)
            .map(|s| table.iter().map(|row| row[s]).sum())
            .collect();
        let total: f64 = dist.iter().sum();
        let obs = w_plus_twice as usize;
        let lower = dist[..=obs].iter().sum::<f64>() / total;
        let upper = dist[obs..].iter().sum::<f64>() / total;
        sidedness.p_from_tails(lower, upper)
    } else {
        // general midrank moments; reduce to the usual tie-corrected formulas
        let ranks: Vec<f64> = signed.iter().map(|(r, _)| *r as f64 / 2.0).collect();
        let mu = ranks.iter().sum::<f64>() / 2.0;
        let sd = (ranks.iter().map(|r| r * r).sum::<f64>() / 4.0).sqrt();
        let p = match sidedness {
            Sidedness::Less => normal_tails((w_plus - mu + 0.5) / sd).0,
            Sidedness::Greater => normal_tails((w_plus - mu - 0.5) / sd).1,
            Sidedness::TwoSided => 2.0 * normal_tails(((w_plus - mu).abs() - 0.5) / sd).1,
        };
        p.clamp(0.0, 1.0)
    };

    let a: Vec<f64> = paired.pairs.iter().map(|p| p.0).collect();
    let b: Vec<f64> = paired.pairs.iter().map(|p| p.1).collect();
    Ok(TestResult {
        method: if exact {
            TestMethod::WilcoxonExact
        } else {
            TestMethod::WilcoxonSignedRank
        },
        statistic: w_plus,
        p_value: p,
        sidedness,
        n1: paired.pairs.len(),
        n2: m,
        mean_a: mean(&a),
        mean_b: mean(&b),
        median_a: median(&a),
        median_b: median(&b),
    })
}
