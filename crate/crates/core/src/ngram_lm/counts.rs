use std::collections::BTreeMap;

use super::vocab::Vocabulary;

/// Exact bigram statistics of a padded corpus.
#[derive(Debug, Clone, PartialEq)]
pub struct BigramCounts {
    pub vocab: Vocabulary,
    /// c(w): occurrences of each id, padding included.
    pub unigram: Vec<u64>,
    /// c(u, w)
    pub bigram: BTreeMap<(u32, u32), u64>,
    /// c(u) as a history: sum over w of c(u, w).
    pub history: Vec<u64>,
    /// N1+(., w): distinct left contexts of w.
    pub continuation: Vec<u64>,
    /// N1+(u, .): distinct followers of u.
    pub followers: Vec<u64>,
    /// n1..n4 for the unigram order (over continuation counts of predicted
    /// words) and the bigram order (over raw bigram counts).
    pub counts_of_counts: [[u64; 4]; 2],
    /// Empty input sequences that were skipped.
    pub skipped_empty: usize,
}

impl BigramCounts {
    pub fn get(&self, u: u32, w: u32) -> u64 {
        self.bigram.get(&(u, w)).copied().unwrap_or(0)
    }
}

/// Pad each sequence as `<s> w1 .. wN </s>` and count.
pub fn count_ngrams<S: AsRef<str>>(corpus: &[Vec<S>]) -> BigramCounts {
    let vocab = Vocabulary::from_words(corpus.iter().flatten().map(AsRef::as_ref));
    let n = vocab.len();
    let mut unigram = vec![0u64; n];
    let mut bigram: BTreeMap<(u32, u32), u64> = BTreeMap::new();
    let mut skipped_empty = 0;
    for seq in corpus {
        if seq.is_empty() {
            skipped_empty += 1;
            continue;
        }
        let ids = std::iter::once(Vocabulary::BOS_ID)
            .chain(seq.iter().map(|w| vocab.lookup(w.as_ref())))
            .chain(std::iter::once(Vocabulary::EOS_ID));
        let mut prev = None;
        for id in ids {
            unigram[id as usize] += 1;
            if let Some(u) = prev {
                *bigram.entry((u, id)).or_default() += 1;
            }
            prev = Some(id);
        }
    }
    if skipped_empty > 0 {
        log::warn!("skipped {skipped_empty} empty sequences");
    }

    let mut history = vec![0u64; n];
    let mut continuation = vec![0u64; n];
    let mut followers = vec![0u64; n];
    let mut counts_of_counts = [[0u64; 4]; 2];
    for (&(u, w), &c) in &bigram {
        history[u as usize] += c;
        continuation[w as usize] += 1;
        followers[u as usize] += 1;
        if (1..=4).contains(&c) {
            counts_of_counts[1][c as usize - 1] += 1;
        }
    }
    for id in vocab.predicted_ids() {
        let a = continuation[id as usize];
        if (1..=4).contains(&a) {
            counts_of_counts[0][a as usize - 1] += 1;
        }
    }
    BigramCounts {
        vocab,
        unigram,
        bigram,
        history,
        continuation,
        followers,
        counts_of_counts,
        skipped_empty,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn seqs(lines: &[&str]) -> Vec<Vec<String>> {
        lines
            .iter()
            .map(|l| l.split_whitespace().map(str::to_string).collect())
            .collect()
    }

    #[test]
    fn single_sequence() {
        let c = count_ngrams(&seqs(&["a b"]));
        let id = |w| c.vocab.id(w).unwrap();
        assert_eq!(c.unigram[id("a") as usize], 1);
        assert_eq!(c.unigram[id("b") as usize], 1);
        assert_eq!(c.get(Vocabulary::BOS_ID, id("a")), 1);
        assert_eq!(c.get(id("a"), id("b")), 1);
        assert_eq!(c.get(id("b"), Vocabulary::EOS_ID), 1);
        assert_eq!(c.bigram.len(), 3);
    }

    #[test]
    fn repeated_sequence() {
        let c = count_ngrams(&seqs(&["a b", "a b"]));
        let id = |w| c.vocab.id(w).unwrap();
        assert_eq!(c.get(id("a"), id("b")), 2);
        // all three bigram types occur twice
        assert_eq!(c.counts_of_counts[1], [0, 3, 0, 0]);
    }

    #[test]
    fn continuation_counts() {
        let c = count_ngrams(&seqs(&["a b a c"]));
        let id = |w| c.vocab.id(w).unwrap();
        assert_eq!(c.continuation[id("b") as usize], 1);
        assert_eq!(c.followers[id("a") as usize], 2);
        // a follows <s> and b
        assert_eq!(c.continuation[id("a") as usize], 2);
    }

    #[test]
    fn empty_sequences_are_skipped() {
        let c = count_ngrams(&seqs(&["", "a"]));
        assert_eq!(c.skipped_empty, 1);
        assert_eq!(c.unigram[Vocabulary::BOS_ID as usize], 1);
    }

    #[test]
    fn history_matches_unigram_for_words() {
        let c = count_ngrams(&seqs(&["a b a c", "c c b", "a"]));
        for w in ["a", "b", "c"] {
            let id = c.vocab.id(w).unwrap() as usize;
            assert_eq!(c.history[id], c.unigram[id]);
        }
        assert_eq!(c.history[Vocabulary::BOS_ID as usize], 3);
        assert_eq!(c.history[Vocabulary::EOS_ID as usize], 0);
    }
}
