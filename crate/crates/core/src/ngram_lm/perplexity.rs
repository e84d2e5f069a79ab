use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::kneser_ney::KneserNeyModel;
use super::vocab::Vocabulary;
use crate::corpus::Question;
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PerplexityRecord {
    pub question_id: String,
    pub perplexity: f64,
    /// Scored transitions, including the one into `</s>`.
    pub n_scored_tokens: usize,
}

impl KneserNeyModel {
    /// Perplexity of a token sequence padded with `<s>` and `</s>`:
    /// `exp(-(1/N) * sum ln P(w_i | w_{i-1}))` over the N transitions.
    ///
    /// Returns `None` for an empty sequence.
    pub fn sequence_perplexity<S: AsRef<str>>(&self, tokens: &[S]) -> Option<(f64, usize)> {
        if tokens.is_empty() {
            return None;
        }
        let ids = tokens
            .iter()
            .map(|t| self.vocab.lookup(t.as_ref()))
            .chain(std::iter::once(Vocabulary::EOS_ID));
        // running mean keeps a constant log-probability exact
        let mut mean = 0.0f64;
        let mut prev = Vocabulary::BOS_ID;
        let mut n = 0usize;
        for id in ids {
            n += 1;
            let lp = self.ln_prob_ids(prev, id);
            mean += (lp - mean) / n as f64;
            prev = id;
        }
        Some(((-mean).exp(), n))
    }

    pub fn perplexity(&self, question: &Question) -> Result<PerplexityRecord> {
        let tokens: Vec<&str> = question.normalized().collect();
        let (perplexity, n) = self
            .sequence_perplexity(&tokens)
            .ok_or_else(|| Error::UnscorableQuestion(question.question_id.clone()))?;
        Ok(PerplexityRecord {
            question_id: question.question_id.clone(),
            perplexity,
            n_scored_tokens: n,
        })
    }

    /// Score a batch on `threads` workers (0 = the current rayon pool).
    /// Output order follows input order and does not depend on the worker
    /// count.
    pub fn score_batch(&self, questions: &[Question], threads: usize) -> Result<Vec<PerplexityRecord>> {
        match threads {
            1 => return questions.iter().map(|q| self.perplexity(q)).collect(),
            0 => return questions.par_iter().map(|q| self.perplexity(q)).collect(),
            _ => {}
        }
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build()
            .map_err(|e| Error::Config(format!("thread pool: {e}")))?;
        pool.install(|| questions.par_iter().map(|q| self.perplexity(q)).collect())
    }
}
