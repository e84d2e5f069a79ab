//! Question extraction, entity masking and tokenization.

use serde::{Deserialize, Serialize};

use super::lexicon::WordList;
use super::porter;

/// Placeholder substituted for names, tournaments and other capitalized phrases.
pub const MASK_TOKEN: &str = "<NOUN>";

const ABBREVIATIONS: &[&str] = &[
    "mr", "mrs", "ms", "dr", "st", "vs", "jr", "sr", "mt", "no", "etc", "approx", "e.g", "i.e",
    "u.s", "u.k", "v",
];

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Token {
    pub surface: String,
    pub normalized: String,
    pub stem: String,
    pub is_stop: bool,
    pub is_entity_mask: bool,
}

impl Token {
    /// True for word tokens (including the mask); false for punctuation and clitics.
    pub fn is_word(&self) -> bool {
        self.is_entity_mask
            || self
                .normalized
                .chars()
                .next()
                .is_some_and(char::is_alphanumeric)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Question {
    pub question_id: String,
    pub raw_text: String,
    pub tokens: Vec<Token>,
    pub snippet_index: usize,
    pub position_in_snippet: usize,
}

impl Question {
    pub fn normalized(&self) -> impl Iterator<Item = &str> {
        self.tokens.iter().map(|t| t.normalized.as_str())
    }
}

/// Split a snippet into sentences and keep the ones terminated by `?`.
///
/// Sentences end at a run of `.`, `!` or `?` followed by whitespace or the end
/// of the text; a lone `.` after a known abbreviation does not end a sentence.
/// The returned strings are trimmed and end with `?`.
pub fn split_questions(snippet: &str) -> Vec<String> {
    let mut out = Vec::new();
    let chars: Vec<(usize, char)> = snippet.char_indices().collect();
    let mut seg_start = 0usize;
    let mut i = 0;
    while i < chars.len() {
        let (pos, c) = chars[i];
        if !matches!(c, '.' | '!' | '?') {
            i += 1;
            continue;
        }
        let run_start = i;
        while i < chars.len() && matches!(chars[i].1, '.' | '!' | '?') {
            i += 1;
        }
        let run_end = chars.get(i).map_or(snippet.len(), |&(p, _)| p);
        let at_boundary = chars.get(i).is_none_or(|&(_, n)| n.is_whitespace());
        if !at_boundary {
            continue;
        }
        if i - run_start == 1 && c == '.' && follows_abbreviation(&snippet[seg_start..pos]) {
            continue;
        }
        let run = &snippet[pos..run_end];
        if let Some(q) = run.rfind('?') {
            let text = snippet[seg_start..pos + q + 1].trim();
            if text.len() > 1 {
                out.push(text.to_string());
            }
        }
        seg_start = run_end;
    }
    out
}

fn follows_abbreviation(before: &str) -> bool {
    let word = before
        .rsplit(|c: char| c.is_whitespace() || c == '(' || c == '"')
        .next()
        .unwrap_or("")
        .to_lowercase();
    ABBREVIATIONS.contains(&word.as_str())
        || (word.chars().count() == 1 && word.chars().all(char::is_alphabetic) && word != "i")
}

#[derive(Debug)]
struct Word {
    start: usize,
    end: usize,
    sentence_initial: bool,
}

/// Replace capitalized words and maximal runs of them with [`MASK_TOKEN`].
///
/// A capitalized word at the start of a sentence is only masked when its
/// lowercase form is not in `dictionary`. The pronoun "I" is never masked.
/// Existing mask tokens are left untouched, so masking is idempotent.
pub fn mask_entities(text: &str, dictionary: &WordList) -> String {
    let words = scan_words(text);
    let mut out = String::with_capacity(text.len());
    let mut cursor = 0;
    let mut i = 0;
    while i < words.len() {
        let w = &words[i];
        if !should_mask(&text[w.start..w.end], w.sentence_initial, dictionary) {
            i += 1;
            continue;
        }
        // extend across whitespace-separated capitalized words
        let mut j = i;
        while j + 1 < words.len() {
            let next = &words[j + 1];
            let gap = &text[words[j].end..next.start];
            if gap.is_empty()
                || !gap.chars().all(char::is_whitespace)
                || !is_capitalized(&text[next.start..next.end])
                || &text[next.start..next.end] == "I"
            {
                break;
            }
            j += 1;
        }
        out.push_str(&text[cursor..w.start]);
        out.push_str(MASK_TOKEN);
        cursor = words[j].end;
        i = j + 1;
    }
    out.push_str(&text[cursor..]);
    out
}

fn is_capitalized(word: &str) -> bool {
    word.chars().next().is_some_and(char::is_uppercase)
}

fn should_mask(word: &str, sentence_initial: bool, dictionary: &WordList) -> bool {
    if !is_capitalized(word) || word == "I" {
        return false;
    }
    if sentence_initial {
        let lower = word.to_lowercase();
        return !dictionary.contains(&lower);
    }
    true
}

fn is_word_char(c: char) -> bool {
    c.is_alphanumeric()
}

/// Alphanumeric runs with internal hyphens. Existing mask tokens are skipped.
fn scan_words(text: &str) -> Vec<Word> {
    let mut words = Vec::new();
    let chars: Vec<(usize, char)> = text.char_indices().collect();
    let mut sentence_start = true;
    let mut i = 0;
    while i < chars.len() {
        let (pos, c) = chars[i];
        if text[pos..].starts_with(MASK_TOKEN) {
            sentence_start = false;
            i += MASK_TOKEN.chars().count();
            continue;
        }
        if is_word_char(c) {
            let start = pos;
            while i < chars.len() {
                let ch = chars[i].1;
                let hyphen_inside = ch == '-'
                    && chars.get(i + 1).is_some_and(|&(_, n)| is_word_char(n))
                    && i > 0
                    && is_word_char(chars[i - 1].1);
                if is_word_char(ch) || hyphen_inside {
                    i += 1;
                } else {
                    break;
                }
            }
            let end = chars.get(i).map_or(text.len(), |&(p, _)| p);
            words.push(Word {
                start,
                end,
                sentence_initial: sentence_start,
            });
            sentence_start = false;
            continue;
        }
        if matches!(c, '.' | '!' | '?') {
            sentence_start = true;
        }
        i += 1;
    }
    words
}

/// Split text into tokens: mask tokens, words (with internal hyphens and
/// apostrophes), apostrophe clitics such as `'s`, and single punctuation marks.
pub fn tokenize(text: &str, stopwords: &WordList) -> Vec<Token> {
    let mut tokens = Vec::new();
    let chars: Vec<(usize, char)> = text.char_indices().collect();
    let is_apos = |c: char| c == '\'' || c == '\u{2019}';
    let mut i = 0;
    while i < chars.len() {
        let (pos, c) = chars[i];
        if c.is_whitespace() {
            i += 1;
            continue;
        }
        if text[pos..].starts_with(MASK_TOKEN) {
            tokens.push(Token {
                surface: MASK_TOKEN.to_string(),
                normalized: MASK_TOKEN.to_string(),
                stem: MASK_TOKEN.to_string(),
                is_stop: false,
                is_entity_mask: true,
            });
            i += MASK_TOKEN.chars().count();
            continue;
        }
        let start = i;
        if is_word_char(c) {
            while i < chars.len() {
                let ch = chars[i].1;
                let joiner = (ch == '-' || is_apos(ch))
                    && chars.get(i + 1).is_some_and(|&(_, n)| is_word_char(n));
                if is_word_char(ch) || (joiner && i > start) {
                    i += 1;
                } else {
                    break;
                }
            }
        } else if is_apos(c) && chars.get(i + 1).is_some_and(|&(_, n)| n.is_alphabetic()) {
            i += 1;
            while i < chars.len() && chars[i].1.is_alphabetic() {
                i += 1;
            }
        } else {
            i += 1;
        }
        let end = chars.get(i).map_or(text.len(), |&(p, _)| p);
        tokens.push(make_token(&text[pos..end], stopwords));
    }
    tokens
}

fn make_token(surface: &str, stopwords: &WordList) -> Token {
    let normalized: String = surface.replace('\u{2019}', "'").to_lowercase();
    let is_word = normalized.chars().next().is_some_and(char::is_alphanumeric);
    let stem = if is_word {
        porter::stem(&normalized)
    } else {
        normalized.clone()
    };
    let is_stop = stopwords.contains(&normalized) || stopwords.contains(normalized.trim_start_matches('\''));
    Token {
        surface: surface.to_string(),
        normalized,
        stem,
        is_stop,
        is_entity_mask: false,
    }
}

/// Dictionary and stop list bundled together: turns raw text into tokens.
#[derive(Debug, Clone)]
pub struct TextProcessor {
    pub dictionary: WordList,
    pub stopwords: WordList,
}

impl Default for TextProcessor {
    fn default() -> Self {
        TextProcessor {
            dictionary: WordList::default_dictionary(),
            stopwords: WordList::default_stopwords(),
        }
    }
}

impl TextProcessor {
    pub fn new(dictionary: WordList, stopwords: WordList) -> Self {
        TextProcessor {
            dictionary,
            stopwords,
        }
    }

    /// Mask then tokenize.
    pub fn tokens(&self, text: &str) -> Vec<Token> {
        tokenize(&mask_entities(text, &self.dictionary), &self.stopwords)
    }

    /// Lowercased token strings of masked text, the form fed to the language model.
    pub fn lm_tokens(&self, text: &str) -> Vec<String> {
        self.tokens(text).into_iter().map(|t| t.normalized).collect()
    }

    /// Questions found in one snippet. Ids are `{prefix}-{snippet_index}-{position}`.
    pub fn extract_questions(&self, snippet: &str, prefix: &str, snippet_index: usize) -> Vec<Question> {
        split_questions(snippet)
            .into_iter()
            .enumerate()
            .filter_map(|(pos, raw)| {
                let tokens = self.tokens(&raw);
                if tokens.is_empty() {
                    return None;
                }
                Some(Question {
                    question_id: format!("{prefix}-{snippet_index}-{pos}"),
                    raw_text: raw,
                    tokens,
                    snippet_index,
                    position_in_snippet: pos,
                })
            })
            .collect()
    }
}
