use rand::Rng;
use serde::{Deserialize, Serialize};

use super::summary::{mean, median};
use super::{Sidedness, TestMethod, TestResult};
use crate::error::{Error, Result};

/// Percentile bootstrap interval.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConfidenceInterval {
    pub estimate: f64,
    pub low: f64,
    pub high: f64,
    pub level: f64,
    pub resamples: usize,
}

fn resample_mean<R: Rng + ?Sized>(values: &[f64], rng: &mut R) -> f64 {
    let n = values.len();
    let mut s = 0.0;
    for _ in 0..n {
        s += values[rng.gen_range(0..n)];
    }
    s / n as f64
}

/// Linear interpolation between order statistics (the common "type 7" rule).
fn quantile(sorted: &[f64], q: f64) -> f64 {
    let h = (sorted.len() - 1) as f64 * q;
    let lo = h.floor() as usize;
    let hi = h.ceil() as usize;
    sorted[lo] + (h - lo as f64) * (sorted[hi] - sorted[lo])
}

fn interval(estimate: f64, mut reps: Vec<f64>, level: f64) -> ConfidenceInterval {
    let resamples = reps.len();
    if reps.is_empty() {
        return ConfidenceInterval {
            estimate,
            low: f64::NAN,
            high: f64::NAN,
            level,
            resamples,
        };
    }
    reps.sort_by(f64::total_cmp);
    let alpha = (1.0 - level) / 2.0;
    ConfidenceInterval {
        estimate,
        low: quantile(&reps, alpha),
        high: quantile(&reps, 1.0 - alpha),
        level,
        resamples,
    }
}

/// Bootstrap interval for the mean of one sample.
pub fn bootstrap_mean_ci<R: Rng + ?Sized>(
    values: &[f64],
    resamples: usize,
    level: f64,
    rng: &mut R,
) -> ConfidenceInterval {
    if values.is_empty() {
        return interval(f64::NAN, Vec::new(), level);
    }
    let reps = (0..resamples).map(|_| resample_mean(values, rng)).collect();
    interval(mean(values), reps, level)
}

/// Bootstrap interval for `mean(a) - mean(b)`, resampling each side independently.
pub fn bootstrap_mean_diff_ci<R: Rng + ?Sized>(
    a: &[f64],
    b: &[f64],
    resamples: usize,
    level: f64,
    rng: &mut R,
) -> ConfidenceInterval {
    if a.is_empty() || b.is_empty() {
        return interval(f64::NAN, Vec::new(), level);
    }
    let reps = (0..resamples)
        .map(|_| resample_mean(a, rng) - resample_mean(b, rng))
        .collect();
    interval(mean(a) - mean(b), reps, level)
}

/// Permutation test for a difference between two gaps.
///
/// `cells[g][c]` holds the values of group `g` under condition `c`. The
/// statistic is `(mean[1][1] - mean[0][1]) - (mean[1][0] - mean[0][0])`, the
/// gap between groups under condition 1 minus the gap under condition 0.
/// Condition labels are shuffled within each group, which keeps each group's
/// values intact while breaking any group-by-condition interaction. The
/// p-value uses the `(1 + hits) / (1 + permutations)` convention.
pub fn gap_of_gaps_permutation_test<R: Rng + ?Sized>(
    cells: [[&[f64]; 2]; 2],
    permutations: usize,
    sidedness: Sidedness,
    rng: &mut R,
) -> Result<TestResult> {
    if cells.iter().flatten().any(|c| c.is_empty()) {
        return Err(Error::Degenerate("gap-of-gaps test needs four non-empty cells".into()));
    }
    let stat = |m: [[f64; 2]; 2]| (m[1][1] - m[0][1]) - (m[1][0] - m[0][0]);
    let observed = stat(cells.map(|g| g.map(mean)));

    let mut pooled: [Vec<f64>; 2] = [0, 1].map(|g| [cells[g][0], cells[g][1]].concat());
    let sizes = [0, 1].map(|g| cells[g][0].len());
    let (mut ge, mut le, mut abs_ge) = (0usize, 0usize, 0usize);
    let tol = 1e-12 * observed.abs().max(1.0);
    for _ in 0..permutations {
        let mut m = [[0.0; 2]; 2];
        for g in 0..2 {
            let v = &mut pooled[g];
            // partial Fisher-Yates: the first `sizes[g]` slots form condition 0
            let k = sizes[g];
            for i in 0..k {
                let j = rng.gen_range(i..v.len());
                v.swap(i, j);
            }
            m[g][0] = mean(&v[..k]);
            m[g][1] = mean(&v[k..]);
        }
        let t = stat(m);
        if t >= observed - tol {
            ge += 1;
        }
        if t <= observed + tol {
            le += 1;
        }
        if t.abs() >= observed.abs() - tol {
            abs_ge += 1;
        }
    }
    let denom = (permutations + 1) as f64;
    let p = match sidedness {
        Sidedness::Greater => (ge + 1) as f64 / denom,
        Sidedness::Less => (le + 1) as f64 / denom,
        Sidedness::TwoSided => (abs_ge + 1) as f64 / denom,
    };
    Ok(TestResult {
        method: TestMethod::PermutationInteraction,
        statistic: observed,
        p_value: p.min(1.0),
        sidedness,
        n1: cells[0][0].len() + cells[0][1].len(),
        n2: cells[1][0].len() + cells[1][1].len(),
        // gaps under condition 0 and condition 1
        mean_a: mean(cells[1][0]) - mean(cells[0][0]),
        mean_b: mean(cells[1][1]) - mean(cells[0][1]),
        median_a: median(cells[1][0]) - median(cells[0][0]),
        median_b: median(cells[1][1]) - median(cells[0][1]),
    })
}
