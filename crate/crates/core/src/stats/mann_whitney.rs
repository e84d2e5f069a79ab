use super::rank::{doubled_ranks, midranks, subset_sum_counts, tie_sizes};
use super::summary::{mean, median};
use super::{normal_tails, Sample, Sidedness, TestMethod, TestResult, MWU_EXACT_MAX};
use crate::error::{Error, Result};

/// Hard limit for explicitly requested exact enumeration.
const EXACT_LIMIT: usize = 50;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum MwuMethod {
    /// Exact when n_a + n_b <= 12, normal approximation otherwise.
    #[default]
    Auto,
    Exact,
    Asymptotic,
}

/// Mann-Whitney U test of `a` against `b`. The statistic is
/// `U_a = R_a - n_a (n_a + 1) / 2` with midranks for ties.
pub fn mann_whitney_u(a: &Sample, b: &Sample, sidedness: Sidedness) -> Result<TestResult> {
    mann_whitney_u_with(a, b, sidedness, MwuMethod::Auto)
}

pub fn mann_whitney_u_with(
    a: &Sample,
    b: &Sample,
    sidedness: Sidedness,
    method: MwuMethod,
) -> Result<TestResult> {
    a.validate()?;
    b.validate()?;
    let na = a.values.len();
    let nb = b.values.len();
    let n = na + b.values.len();
    let pooled: Vec<f64> = a.values.iter().chain(&b.values).copied().collect();
    if pooled.iter().all(|&v| v == pooled[0]) {
        return Err(Error::Degenerate(format!(
            "all values identical in {} and {}",
            a.label, b.label
        )));
    }
    let exact = match method {
        MwuMethod::Auto => n <= MWU_EXACT_MAX,
        MwuMethod::Exact => {
            if n > EXACT_LIMIT {
                return Err(Error::Degenerate(format!(
                    "exact Mann-Whitney limited to {EXACT_LIMIT} observations, got {n}"
                )));
            }
            true
        }
        MwuMethod::Asymptotic => false,
    };

    let (u, p) = if exact {
        let twice = doubled_ranks(&pooled);
        let observed: u64 = twice[..na].iter().sum();
        let table = subset_sum_counts(&twice, na);
        let counts = &table[na];
        let total: f64 = counts.iter().sum();
        let obs = observed as usize;
        let lower: f64 = counts[..=obs].iter().sum::<f64>() / total;
        let upper: f64 = counts[obs..].iter().sum::<f64>() / total;
        let u = (observed as f64 - (na * (na + 1)) as f64) / 2.0;
        (u, sidedness.p_from_tails(lower, upper))
    } else {
        let ranks = midranks(&pooled);
        let ra: f64 = ranks[..na].iter().sum();
        let u = ra - (na * (na + 1)) as f64 / 2.0;
        let (naf, nbf, nf) = (na as f64, nb as f64, n as f64);
        let ties: f64 = tie_sizes(&pooled)
            .into_iter()
            .map(|t| {
                let t = t as f64;
                t * t * t - t
            })
            .sum();
        let var = naf * nbf / 12.0 * ((nf + 1.0) - ties / (nf * (nf - 1.0)));
        let sd = var.sqrt();
        let mu = naf * nbf / 2.0;
        let p = match sidedness {
            Sidedness::Less => normal_tails((u - mu + 0.5) / sd).0,
            Sidedness::Greater => normal_tails((u - mu - 0.5) / sd).1,
            Sidedness::TwoSided => 2.0 * normal_tails(((u - mu).abs() - 0.5) / sd).1,
        };
        (u, p.clamp(0.0, 1.0))
    };

    Ok(TestResult {
        method: if exact {
            TestMethod::MannWhitneyExact
        } else {
            TestMethod::MannWhitneyU
        },
        statistic: u,
        p_value: p,
        sidedness,
        n1: na,
        n2: nb,
        mean_a: mean(&a.values),
        mean_b: mean(&b.values),
        median_a: median(&a.values),
        median_b: median(&b.values),
    })
}
