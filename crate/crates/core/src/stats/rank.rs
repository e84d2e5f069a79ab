/// Average ranks (1-based) with ties sharing the mean of their positions.
pub fn midranks(values: &[f64]) -> Vec<f64> {
    let mut order: Vec<usize> = (0..values.len()).collect();
    order.sort_by(|&a, &b| values[a].total_cmp(&values[b]));
    let mut ranks = vec![0.0; values.len()];
    let mut i = 0;
    while i < order.len() {
        let mut j = i + 1;
        while j < order.len() && values[order[j]] == values[order[i]] {
            j += 1;
        }
        // positions i+1 ..= j share rank (i + 1 + j) / 2
        let r = (i + 1 + j) as f64 / 2.0;
        for &k in &order[i..j] {
            ranks[k] = r;
        }
        i = j;
    }
    ranks
}

/// Sizes of the groups of tied values (groups of size one included).
pub fn tie_sizes(values: &[f64]) -> Vec<usize> {
    let mut sorted = values.to_vec();
    sorted.sort_by(f64::total_cmp);
    let mut out = Vec::new();
    let mut i = 0;
    while i < sorted.len() {
        let mut j = i + 1;
        while j < sorted.len() && sorted[j] == sorted[i] {
            j += 1;
        }
        out.push(j - i);
        i = j;
    }
    out
}

/// Midranks doubled, which are always integers.
pub(crate) fn doubled_ranks(values: &[f64]) -> Vec<u64> {
    midranks(values).iter().map(|r| (2.0 * r).round() as u64).collect()
}

/// Number of subsets of each size k <= max_k for every achievable sum of
/// `weights`: `table[k][s]`.
pub(crate) fn subset_sum_counts(weights: &[u64], max_k: usize) -> Vec<Vec<f64>> {
    let total: u64 = weights.iter().sum();
    let mut table = vec![vec![0.0f64; total as usize + 1]; max_k + 1];
    table[0][0] = 1.0;
    for (seen, &w) in weights.iter().enumerate() {
        let w = w as usize;
        for k in (1..=max_k.min(seen + 1)).rev() {
            let (lower, upper) = table.split_at_mut(k);
            let prev = &lower[k - 1];
            let cur = &mut upper[0];
            for s in (w..cur.len()).rev() {
                cur[s] += prev[s - w];
            }
        }
    }
    table
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ranks_with_ties() {
        assert_eq!(midranks(&[1., 2., 2., 4., 5.]), [1., 2.5, 2.5, 4., 5.]);
        assert_eq!(midranks(&[3., 1., 3., 3.]), [3., 1., 3., 3.]);
        assert_eq!(tie_sizes(&[3., 1., 3., 3.]), [1, 3]);
        assert_eq!(doubled_ranks(&[1., 2., 2.]), [2, 5, 5]);
    }

    #[test]
    fn subset_counts() {
        // weights 1,2,3: subsets of size 2 have sums 3,4,5
        let t = subset_sum_counts(&[1, 2, 3], 3);
        assert_eq!(t[2][3..=5], [1.0, 1.0, 1.0]);
        assert_eq!(t[3][6], 1.0);
        assert_eq!(t[1].iter().sum::<f64>(), 3.0);
    }
}
