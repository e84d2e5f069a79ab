//! Bigram language model with interpolated modified Kneser-Ney smoothing,
//! and perplexity scoring against it.

mod counts;
mod format;
mod kneser_ney;
mod perplexity;
mod vocab;

pub use counts::{count_ngrams, BigramCounts};
pub use format::{deserialize_model, serialize_model, write_arpa, FormatError, FORMAT_VERSION, MAGIC};
pub use kneser_ney::{estimate_kn, estimate_kn_with_fallback, Discounts, KneserNeyModel, FALLBACK_DISCOUNT};
pub use perplexity::PerplexityRecord;
pub use vocab::{Vocabulary, BOS, EOS, UNK};

use crate::corpus::{CommentaryDoc, TextProcessor};

/// Mask, tokenize and count commentary documents, then estimate the model.
pub fn train_on_commentary(docs: &[CommentaryDoc], text: &TextProcessor) -> KneserNeyModel {
    let corpus: Vec<Vec<String>> = docs.iter().map(|d| text.lm_tokens(&d.text)).collect();
    estimate_kn(&count_ngrams(&corpus))
}
