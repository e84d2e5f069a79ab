use std::collections::{BTreeSet, HashMap};

use crate::corpus::MASK_TOKEN;

pub const BOS: &str = "<s>";
pub const EOS: &str = "</s>";
pub const UNK: &str = "<unk>";

/// Dense word ids. The first four ids are reserved for `<s>`, `</s>`,
/// `<unk>` and the entity mask; the rest follow in lexical order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Vocabulary {
    words: Vec<String>,
    ids: HashMap<String, u32>,
}

impl Vocabulary {
    pub const BOS_ID: u32 = 0;
    pub const EOS_ID: u32 = 1;
    pub const UNK_ID: u32 = 2;
    pub const MASK_ID: u32 = 3;

    pub fn reserved() -> [&'static str; 4] {
        [BOS, EOS, UNK, MASK_TOKEN]
    }

    /// Build from arbitrary words; reserved tokens are always included.
    pub fn from_words<'a>(words: impl IntoIterator<Item = &'a str>) -> Self {
        let reserved = Self::reserved();
        let rest: BTreeSet<&str> = words
            .into_iter()
            .filter(|w| !reserved.contains(w))
            .collect();
        let all = reserved.into_iter().chain(rest).map(str::to_string).collect();
        Self::from_ordered(all).expect("reserved prefix present")
    }

    /// Rebuild from an id-ordered list, e.g. when loading a model file.
    pub fn from_ordered(words: Vec<String>) -> Option<Self> {
        if words.len() < 4 || words[..4].iter().zip(Self::reserved()).any(|(a, b)| a != b) {
            return None;
        }
        let ids: HashMap<String, u32> = words
            .iter()
            .enumerate()
            .map(|(i, w)| (w.clone(), i as u32))
            .collect();
        if ids.len() != words.len() {
            return None;
        }
        Some(Vocabulary { words, ids })
    }

    pub fn len(&self) -> usize {
        self.words.len()
    }

    pub fn is_empty(&self) -> bool {
        self.words.is_empty()
    }

    pub fn id(&self, word: &str) -> Option<u32> {
        self.ids.get(word).copied()
    }

    /// Id used when scoring: unseen words and stray `<s>` map to `<unk>`.
    pub fn lookup(&self, word: &str) -> u32 {
        match self.ids.get(word) {
            Some(&id) if id != Self::BOS_ID => id,
            _ => Self::UNK_ID,
        }
    }

    pub fn word(&self, id: u32) -> &str {
        &self.words[id as usize]
    }

    pub fn words(&self) -> &[String] {
        &self.words
    }

    /// Ids that can be predicted (everything except `<s>`).
    pub fn predicted_ids(&self) -> impl Iterator<Item = u32> {
        1..self.words.len() as u32
    }
}
