//! Brute-force reference implementations shared by the integration tests.
//! Nothing here calls into the library's estimators.

#![allow(dead_code)]

use std::collections::{BTreeMap, BTreeSet};
use std::path::PathBuf;

pub fn fixture(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures").join(name)
}

pub const RESERVED: [&str; 4] = ["<s>", "</s>", "<unk>", "<NOUN>"];

/// Modified Kneser-Ney bigram probabilities computed straight from the
/// definition, keyed by strings.
pub struct KnOracle {
    pub vocab: Vec<String>,
    unigram: BTreeMap<String, f64>,
    bigram: BTreeMap<(String, String), u64>,
    history: BTreeMap<String, u64>,
    d_bigram: [f64; 3],
}

fn discounts(n: [u64; 4], fallback: f64) -> [f64; 3] {
    let n: Vec<f64> = n.iter().map(|&x| x as f64).collect();
    let mut out = [fallback; 3];
    if n[0] == 0.0 {
        return out;
    }
    let y = n[0] / (n[0] + 2.0 * n[1]);
    for k in 1..=3usize {
        let nk = n[k - 1];
        if nk == 0.0 {
            continue;
        }
        let d = k as f64 - (k as f64 + 1.0) * y * n[k] / nk;
        if d > 0.0 {
            out[k - 1] = d.min(k as f64);
        }
    }
    out
}

fn d_of(d: &[f64; 3], c: u64) -> f64 {
    match c {
        0 => 0.0,
        1 => d[0],
        2 => d[1],
        _ => d[2],
    }
}

impl KnOracle {
    pub fn new(corpus: &[Vec<String>], fallback: f64) -> Self {
        let mut words: BTreeSet<String> = corpus.iter().flatten().cloned().collect();
        for r in RESERVED {
            words.remove(r);
        }
        let vocab: Vec<String> = RESERVED.iter().map(|s| s.to_string()).chain(words).collect();

        let mut bigram: BTreeMap<(String, String), u64> = BTreeMap::new();
        for s in corpus.iter().filter(|s| !s.is_empty()) {
            let mut padded = vec!["<s>".to_string()];
            padded.extend(s.iter().cloned());
            padded.push("</s>".to_string());
            for w in padded.windows(2) {
                *bigram.entry((w[0].clone(), w[1].clone())).or_default() += 1;
            }
        }
        let mut history: BTreeMap<String, u64> = BTreeMap::new();
        let mut left: BTreeMap<String, BTreeSet<String>> = BTreeMap::new();
        for ((u, w), c) in &bigram {
            *history.entry(u.clone()).or_default() += c;
            left.entry(w.clone()).or_default().insert(u.clone());
        }

        let predicted: Vec<&String> = vocab.iter().filter(|w| *w != "<s>").collect();
        let cont = |w: &str| left.get(w).map_or(0, |s| s.len() as u64);

        let mut n_uni = [0u64; 4];
        for w in &predicted {
            let c = cont(w);
            if (1..=4).contains(&c) {
                n_uni[c as usize - 1] += 1;
            }
        }
        let mut n_bi = [0u64; 4];
        for &c in bigram.values() {
            if (1..=4).contains(&c) {
                n_bi[c as usize - 1] += 1;
            }
        }
        let d_uni = discounts(n_uni, fallback);
        let d_bigram = discounts(n_bi, fallback);

        let total: u64 = predicted.iter().map(|w| cont(w)).sum();
        let size = predicted.len() as f64;
        let mut unigram = BTreeMap::new();
        for w in &predicted {
            let p = if total == 0 {
                1.0 / size
            } else {
                let t = total as f64;
                let mass: f64 = predicted.iter().map(|v| d_of(&d_uni, cont(v))).sum();
                let c = cont(w);
                (c as f64 - d_of(&d_uni, c)).max(0.0) / t + mass / t / size
            };
            unigram.insert(w.to_string(), p);
        }
        KnOracle {
            vocab,
            unigram,
            bigram,
            history,
            d_bigram,
        }
    }

    /// P(w | u) for in-vocabulary u and predictable w.
    pub fn prob(&self, u: &str, w: &str) -> f64 {
        let pw = self.unigram[w];
        let h = match self.history.get(u) {
            Some(&h) => h as f64,
            None => return pw,
        };
        let mut mass = 0.0;
        let mut c_uw = 0;
        for ((a, b), &c) in &self.bigram {
            if a == u {
                mass += d_of(&self.d_bigram, c);
                if b == w {
                    c_uw = c;
                }
            }
        }
        (c_uw as f64 - d_of(&self.d_bigram, c_uw)).max(0.0) / h + mass / h * pw
    }

    pub fn predicted(&self) -> impl Iterator<Item = &str> {
        self.vocab.iter().map(String::as_str).filter(|w| *w != "<s>")
    }
}

/// Midrank of every value, computed by counting.
pub fn midranks(values: &[f64]) -> Vec<f64> {
    values
        .iter()
        .map(|&x| {
            let less = values.iter().filter(|&&y| y < x).count() as f64;
            let equal = values.iter().filter(|&&y| y == x).count() as f64;
            less + (equal + 1.0) / 2.0
        })
        .collect()
}

/// Exact Mann-Whitney tail probabilities (P(U <= u), P(U >= u)) by listing
/// every way to assign n_a of the pooled observations to the first sample.
pub fn mwu_tails(a: &[f64], b: &[f64]) -> (f64, f64) {
    let pooled: Vec<f64> = a.iter().chain(b).copied().collect();
    // doubled midranks are integers, so comparisons are exact
    let r2: Vec<i64> = midranks(&pooled).iter().map(|r| (2.0 * r) as i64).collect();
    let n = pooled.len();
    let na = a.len();
    let observed: i64 = r2[..na].iter().sum();
    let (mut le, mut ge, mut total) = (0u64, 0u64, 0u64);
    for mask in 0u32..(1 << n) {
        if mask.count_ones() as usize != na {
            continue;
        }
        let s: i64 = (0..n).filter(|i| mask & (1 << i) != 0).map(|i| r2[i]).sum();
        total += 1;
        if s <= observed {
            le += 1;
        }
        if s >= observed {
            ge += 1;
        }
    }
    (le as f64 / total as f64, ge as f64 / total as f64)
}

/// Exact signed-rank tail probabilities of W+ over all 2^m sign patterns of
/// the non-zero differences.
pub fn wilcoxon_tails(diffs: &[f64]) -> (f64, f64) {
    let d: Vec<f64> = diffs.iter().copied().filter(|x| *x != 0.0).collect();
    let abs: Vec<f64> = d.iter().map(|x| x.abs()).collect();
    let r2: Vec<i64> = midranks(&abs).iter().map(|r| (2.0 * r) as i64).collect();
    let m = d.len();
    let observed: i64 = (0..m).filter(|&i| d[i] > 0.0).map(|i| r2[i]).sum();
    let (mut le, mut ge) = (0u64, 0u64);
    for mask in 0u32..(1 << m) {
        let s: i64 = (0..m).filter(|i| mask & (1 << i) != 0).map(|i| r2[i]).sum();
        if s <= observed {
            le += 1;
        }
        if s >= observed {
            ge += 1;
        }
    }
    let total = (1u64 << m) as f64;
    (le as f64 / total, ge as f64 / total)
}

/// Two-sided p from two tails, capped at 1.
pub fn two_sided(tails: (f64, f64)) -> f64 {
    (2.0 * tails.0.min(tails.1)).min(1.0)
}
