//! Binary model file and the plain-text ARPA-style dump.
//!
//! Binary layout, little endian:
//!
//! ```text
//! magic      8 bytes  "QBLMKN2\0"
//! version    u32
//! vocab      u32 count, then per word: u32 byte length + UTF-8 bytes
//! discounts  6 x f64  (unigram d1 d2 d3, bigram d1 d2 d3)
//! unigram    count x f64  ln P(w)
//! backoff    count x f64  ln gamma(u)
//! bigrams    u64 count, then per entry: u32 context, u32 word, f64 ln P(w|u)
//! ```
//!
//! Bigram entries are written in (context, word) order so the output is
//! deterministic.

use std::collections::HashMap;
use std::fmt::Write as _;

use thiserror::Error;

use super::kneser_ney::{Discounts, KneserNeyModel};
use super::vocab::Vocabulary;

pub const MAGIC: &[u8; 8] = b"QBLMKN2\0";
pub const FORMAT_VERSION: u32 = 1;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum FormatError {
    #[error("not a model file (bad magic bytes)")]
    BadMagic,
    #[error("unsupported model format version {0} (expected {FORMAT_VERSION})")]
    UnsupportedVersion(u32),
    #[error("truncated model file")]
    Truncated,
    #[error("corrupt model file: {0}")]
    Corrupt(String),
}

pub fn serialize_model(model: &KneserNeyModel) -> Vec<u8> {
    let mut out = Vec::new();
    out.extend_from_slice(MAGIC);
    out.extend_from_slice(&FORMAT_VERSION.to_le_bytes());
    let words = model.vocab.words();
    out.extend_from_slice(&(words.len() as u32).to_le_bytes());
    for w in words {
        out.extend_from_slice(&(w.len() as u32).to_le_bytes());
        out.extend_from_slice(w.as_bytes());
    }
    for d in model.discounts {
        for x in [d.d1, d.d2, d.d3] {
            out.extend_from_slice(&x.to_le_bytes());
        }
    }
    for x in model.unigram_ln.iter().chain(&model.backoff_ln) {
        out.extend_from_slice(&x.to_le_bytes());
    }
    let mut bigrams: Vec<_> = model.bigram_ln.iter().collect();
    bigrams.sort_unstable_by_key(|(k, _)| **k);
    out.extend_from_slice(&(bigrams.len() as u64).to_le_bytes());
    for (&(u, w), p) in bigrams {
        out.extend_from_slice(&u.to_le_bytes());
        out.extend_from_slice(&w.to_le_bytes());
        out.extend_from_slice(&p.to_le_bytes());
    }
    out
}

struct Reader<'a> {
    buf: &'a [u8],
}

impl<'a> Reader<'a> {
    fn take(&mut self, n: usize) -> Result<&'a [u8], FormatError> {
        if self.buf.len() < n {
            return Err(FormatError::Truncated);
        }
        let (head, tail) = self.buf.split_at(n);
        self.buf = tail;
        Ok(head)
    }

    fn u32(&mut self) -> Result<u32, FormatError> {
        Ok(u32::from_le_bytes(self.take(4)?.try_into().unwrap()))
    }

    fn u64(&mut self) -> Result<u64, FormatError> {
        Ok(u64::from_le_bytes(self.take(8)?.try_into().unwrap()))
    }

    fn f64(&mut self) -> Result<f64, FormatError> {
        Ok(f64::from_le_bytes(self.take(8)?.try_into().unwrap()))
    }
}

pub fn deserialize_model(bytes: &[u8]) -> Result<KneserNeyModel, FormatError> {
    let mut r = Reader { buf: bytes };
    if bytes.len() < MAGIC.len() {
        return Err(if MAGIC.starts_with(bytes) {
            FormatError::Truncated
        } else {
            FormatError::BadMagic
        });
    }
    if r.take(MAGIC.len())? != MAGIC {
        return Err(FormatError::BadMagic);
    }
    let version = r.u32()?;
    if version != FORMAT_VERSION {
        return Err(FormatError::UnsupportedVersion(version));
    }
    let n = r.u32()? as usize;
    let mut words = Vec::with_capacity(n.min(1 << 20));
    for _ in 0..n {
        let len = r.u32()? as usize;
        let s = std::str::from_utf8(r.take(len)?)
            .map_err(|_| FormatError::Corrupt("vocabulary entry is not UTF-8".into()))?;
        words.push(s.to_string());
    }
    let vocab = Vocabulary::from_ordered(words)
        .ok_or_else(|| FormatError::Corrupt("bad vocabulary block".into()))?;
    let mut discounts = [Discounts {
        d1: 0.0,
        d2: 0.0,
        d3: 0.0,
    }; 2];
    for d in &mut discounts {
        d.d1 = r.f64()?;
        d.d2 = r.f64()?;
        d.d3 = r.f64()?;
    }
    let unigram_ln = (0..n).map(|_| r.f64()).collect::<Result<Vec<_>, _>>()?;
    let backoff_ln = (0..n).map(|_| r.f64()).collect::<Result<Vec<_>, _>>()?;
    let m = r.u64()? as usize;
    let mut bigram_ln = HashMap::with_capacity(m.min(1 << 24));
    for _ in 0..m {
        let u = r.u32()?;
        let w = r.u32()?;
        let p = r.f64()?;
        if u as usize >= n || w as usize >= n {
            return Err(FormatError::Corrupt(format!("bigram id out of range ({u}, {w})")));
        }
        bigram_ln.insert((u, w), p);
    }
    if !r.buf.is_empty() {
        return Err(FormatError::Corrupt(format!("{} trailing bytes", r.buf.len())));
    }
    Ok(KneserNeyModel {
        vocab,
        discounts,
        unigram_ln,
        backoff_ln,
        bigram_ln,
    })
}

/// ARPA-style text dump with log10 values, entries sorted by word. `<s>`
/// gets the conventional -99 unigram log-probability; backoff weights are
/// listed only for words seen as a context.
pub fn write_arpa(model: &KneserNeyModel) -> String {
    let vocab = &model.vocab;
    let log10 = |ln: f64| if ln == f64::NEG_INFINITY { -99.0 } else { ln / std::f64::consts::LN_10 };
    let mut unigrams: Vec<u32> = (0..vocab.len() as u32).collect();
    unigrams.sort_by(|a, b| vocab.word(*a).cmp(vocab.word(*b)));
    let mut bigrams: Vec<(&(u32, u32), &f64)> = model.bigram_ln.iter().collect();
    bigrams.sort_by(|(a, _), (b, _)| {
        (vocab.word(a.0), vocab.word(a.1)).cmp(&(vocab.word(b.0), vocab.word(b.1)))
    });
    let has_context: Vec<bool> = {
        let mut v = vec![false; vocab.len()];
        for &(u, _) in model.bigram_ln.keys() {
            v[u as usize] = true;
        }
        v
    };

    let mut s = String::new();
    s.push_str("\\data\\\n");
    let _ = writeln!(s, "ngram 1={}", vocab.len());
    let _ = writeln!(s, "ngram 2={}\n", bigrams.len());
    s.push_str("\\1-grams:\n");
    for id in unigrams {
        let p = log10(model.unigram_ln[id as usize]);
        if has_context[id as usize] {
            let _ = writeln!(s, "{p:.7}\t{}\t{:.7}", vocab.word(id), log10(model.backoff_ln[id as usize]));
        } else {
            let _ = writeln!(s, "{p:.7}\t{}", vocab.word(id));
        }
    }
    s.push_str("\n\\2-grams:\n");
    for (&(u, w), &p) in bigrams {
        let _ = writeln!(s, "{:.7}\t{} {}", log10(p), vocab.word(u), vocab.word(w));
    }
    s.push_str("\n\\end\\\n");
    s
}
