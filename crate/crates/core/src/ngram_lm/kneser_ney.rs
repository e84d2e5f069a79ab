//! Interpolated bigram model with modified Kneser-Ney discounts.
//!
//! The bigram order uses raw counts; the unigram order uses continuation
//! counts and is itself interpolated with a uniform distribution over every
//! predictable word, so `<unk>` and unseen reserved tokens keep non-zero mass.

use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use super::counts::BigramCounts;
use super::vocab::Vocabulary;

/// Discount used when a counts-of-counts bin is empty or the closed-form
/// estimate is not positive.
pub const FALLBACK_DISCOUNT: f64 = 0.5;

/// Discounts for counts 1, 2 and 3+.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Discounts {
    pub d1: f64,
    pub d2: f64,
    pub d3: f64,
}

impl Discounts {
    /// Closed-form estimate from counts-of-counts n1..n4:
    /// `Y = n1 / (n1 + 2 n2)`, `D_k = k - (k + 1) Y n_{k+1} / n_k`.
    pub fn from_counts_of_counts(n: [u64; 4], fallback: f64) -> Self {
        let [n1, n2, n3, n4] = n.map(|x| x as f64);
        let y = if n1 > 0.0 { n1 / (n1 + 2.0 * n2) } else { f64::NAN };
        let estimate = |k: f64, nk: f64, next: f64| {
            if nk == 0.0 || y.is_nan() {
                return fallback;
            }
            let d = k - (k + 1.0) * y * next / nk;
            if d.is_finite() && d > 0.0 {
                d.min(k)
            } else {
                fallback
            }
        };
        Discounts {
            d1: estimate(1.0, n1, n2),
            d2: estimate(2.0, n2, n3),
            d3: estimate(3.0, n3, n4),
        }
    }

    pub fn for_count(&self, c: u64) -> f64 {
        match c {
            0 => 0.0,
            1 => self.d1,
            2 => self.d2,
            _ => self.d3,
        }
    }
}

/// A trained bigram model. Probabilities are stored as natural logs, ARPA
/// style: full interpolated values for observed bigrams, plus a unigram
/// distribution and a per-context backoff weight for everything else.
#[derive(Debug, Clone, PartialEq)]
pub struct KneserNeyModel {
    pub(crate) vocab: Vocabulary,
    /// [unigram order, bigram order]
    pub(crate) discounts: [Discounts; 2],
    /// ln P(w); `-inf` for `<s>`, which is never predicted.
    pub(crate) unigram_ln: Vec<f64>,
    /// ln gamma(u); zero for contexts never seen as a history.
    pub(crate) backoff_ln: Vec<f64>,
    pub(crate) bigram_ln: HashMap<(u32, u32), f64>,
}

impl KneserNeyModel {
    pub fn vocab(&self) -> &Vocabulary {
        &self.vocab
    }

    pub fn discounts(&self) -> [Discounts; 2] {
        self.discounts
    }

    /// ln P(w | u) by id.
    pub fn ln_prob_ids(&self, u: u32, w: u32) -> f64 {
        match self.bigram_ln.get(&(u, w)) {
            Some(&p) => p,
            None => self.backoff_ln[u as usize] + self.unigram_ln[w as usize],
        }
    }

    /// P(w | u) with unseen words resolved to `<unk>`.
    pub fn prob(&self, context: &str, word: &str) -> f64 {
        let u = self.vocab.id(context).unwrap_or(Vocabulary::UNK_ID);
        self.ln_prob_ids(u, self.vocab.lookup(word)).exp()
    }

    /// Interpolation weight gamma(u) given to the unigram distribution.
    pub fn backoff(&self, context: &str) -> f64 {
        let u = self.vocab.id(context).unwrap_or(Vocabulary::UNK_ID);
        self.backoff_ln[u as usize].exp()
    }

    pub fn unigram_prob(&self, word: &str) -> f64 {
        self.unigram_ln[self.vocab.lookup(word) as usize].exp()
    }

    pub fn n_bigrams(&self) -> usize {
        self.bigram_ln.len()
    }

    /// Every transition gets probability 1 / (number of predictable words).
    pub fn uniform<'a>(words: impl IntoIterator<Item = &'a str>) -> Self {
        let vocab = Vocabulary::from_words(words);
        let v = (vocab.len() - 1) as f64;
        let mut unigram_ln = vec![-v.ln(); vocab.len()];
        unigram_ln[Vocabulary::BOS_ID as usize] = f64::NEG_INFINITY;
        let fallback = Discounts {
            d1: FALLBACK_DISCOUNT,
            d2: FALLBACK_DISCOUNT,
            d3: FALLBACK_DISCOUNT,
        };
        KneserNeyModel {
            backoff_ln: vec![0.0; vocab.len()],
            vocab,
            discounts: [fallback; 2],
            unigram_ln,
            bigram_ln: HashMap::new(),
        }
    }
}

/// Estimate the interpolated modified Kneser-Ney bigram model.
pub fn estimate_kn(counts: &BigramCounts) -> KneserNeyModel {
    estimate_kn_with_fallback(counts, FALLBACK_DISCOUNT)
}

pub fn estimate_kn_with_fallback(counts: &BigramCounts, fallback: f64) -> KneserNeyModel {
    let vocab = counts.vocab.clone();
    let n = vocab.len();
    let uni_d = Discounts::from_counts_of_counts(counts.counts_of_counts[0], fallback);
    let bi_d = Discounts::from_counts_of_counts(counts.counts_of_counts[1], fallback);

    // unigram order: discounted continuation counts, interpolated with uniform
    let predicted = (n - 1) as f64;
    let total: u64 = vocab
        .predicted_ids()
        .map(|w| counts.continuation[w as usize])
        .sum();
    let mut unigram = vec![0.0f64; n];
    if total == 0 {
        for w in vocab.predicted_ids() {
            unigram[w as usize] = 1.0 / predicted;
        }
    } else {
        let total = total as f64;
        let discount_mass: f64 = vocab
            .predicted_ids()
            .map(|w| uni_d.for_count(counts.continuation[w as usize]))
            .sum();
        let gamma0 = discount_mass / total;
        for w in vocab.predicted_ids() {
            let a = counts.continuation[w as usize];
            let kept = (a as f64 - uni_d.for_count(a)).max(0.0) / total;
            unigram[w as usize] = kept + gamma0 / predicted;
        }
    }

    // bigram order: gamma(u) from the discount mass removed from u's followers
    let mut discount_mass = vec![0.0f64; n];
    for (&(u, _), &c) in &counts.bigram {
        discount_mass[u as usize] += bi_d.for_count(c);
    }
    let gamma: Vec<f64> = (0..n)
        .map(|u| {
            let h = counts.history[u];
            if h == 0 {
                1.0
            } else {
                discount_mass[u] / h as f64
            }
        })
        .collect();

    let bigram_ln = counts
        .bigram
        .iter()
        .map(|(&(u, w), &c)| {
            let h = counts.history[u as usize] as f64;
            let p = (c as f64 - bi_d.for_count(c)).max(0.0) / h + gamma[u as usize] * unigram[w as usize];
            ((u, w), p.ln())
        })
        .collect();

    let mut unigram_ln: Vec<f64> = unigram.iter().map(|p| p.ln()).collect();
    unigram_ln[Vocabulary::BOS_ID as usize] = f64::NEG_INFINITY;
    KneserNeyModel {
        vocab,
        discounts: [uni_d, bi_d],
        unigram_ln,
        backoff_ln: gamma.iter().map(|g| g.ln()).collect(),
        bigram_ln,
    }
}
