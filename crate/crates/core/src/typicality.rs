//! Atypicality score: mean IDF of a question's unique content stems, with
//! every question treated as one document. Questions scoring above the
//! corpus mean are atypical.

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use crate::corpus::{Question, WordList};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Typicality {
    Typical,
    Atypical,
}

impl Typicality {
    pub fn as_str(self) -> &'static str {
        match self {
            Typicality::Typical => "typical",
            Typicality::Atypical => "atypical",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "typical" => Some(Typicality::Typical),
            "atypical" => Some(Typicality::Atypical),
            _ => None,
        }
    }
}

/// IDF assigned to stems not seen when the model was fitted.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum UnseenStem {
    /// Treat as occurring in one document: ln(|D|).
    #[default]
    MaxRare,
    /// Leave out of the score.
    Ignore,
}

#[derive(Debug, Clone)]
pub struct AtypicalityModel {
    idf: BTreeMap<String, f64>,
    n_docs: usize,
    mean_cutoff: f64,
    stopwords: WordList,
    unseen: UnseenStem,
}

/// Unique stems of tokens that are words, not stop words and not entity masks.
pub fn content_stems<'q>(question: &'q Question, stopwords: &WordList) -> BTreeSet<&'q str> {
    question
        .tokens
        .iter()
        .filter(|t| t.is_word() && !t.is_entity_mask && !stopwords.contains(&t.normalized))
        .map(|t| t.stem.as_str())
        .collect()
}

pub fn fit_idf(questions: &[Question], stopwords: &WordList) -> AtypicalityModel {
    let mut df: BTreeMap<&str, usize> = BTreeMap::new();
    for q in questions {
        for stem in content_stems(q, stopwords) {
            *df.entry(stem).or_default() += 1;
        }
    }
    let n_docs = questions.len();
    let idf = df
        .into_iter()
        .map(|(s, d)| (s.to_string(), (n_docs as f64 / d as f64).ln()))
        .collect();
    let mut model = AtypicalityModel {
        idf,
        n_docs,
        mean_cutoff: 0.0,
        stopwords: stopwords.clone(),
        unseen: UnseenStem::default(),
    };
    let scores: Vec<f64> = questions.iter().filter_map(|q| model.score(q)).collect();
    if !scores.is_empty() {
        model.mean_cutoff = scores.iter().sum::<f64>() / scores.len() as f64;
    }
    model
}

impl AtypicalityModel {
    pub fn with_unseen(mut self, policy: UnseenStem) -> Self {
        self.unseen = policy;
        self
    }

    pub fn idf(&self, stem: &str) -> Option<f64> {
        self.idf.get(stem).copied()
    }

    pub fn idf_table(&self) -> &BTreeMap<String, f64> {
        &self.idf
    }

    pub fn n_docs(&self) -> usize {
        self.n_docs
    }

    pub fn mean_cutoff(&self) -> f64 {
        self.mean_cutoff
    }

    /// Mean IDF over the question's unique content stems; `None` when it has none.
    pub fn score(&self, question: &Question) -> Option<f64> {
        let idfs: Vec<f64> = content_stems(question, &self.stopwords)
            .into_iter()
            .filter_map(|s| match (self.idf.get(s), self.unseen) {
                (Some(&v), _) => Some(v),
                (None, UnseenStem::MaxRare) => Some((self.n_docs.max(1) as f64).ln()),
                (None, UnseenStem::Ignore) => None,
            })
            .collect();
        if idfs.is_empty() {
            return None;
        }
        Some(idfs.iter().sum::<f64>() / idfs.len() as f64)
    }

    /// Strictly above the cutoff is atypical; unscored questions are typical.
    pub fn classify_score(&self, score: Option<f64>) -> Typicality {
        match score {
            Some(s) if s > self.mean_cutoff => Typicality::Atypical,
            _ => Typicality::Typical,
        }
    }

    pub fn classify(&self, question: &Question) -> Typicality {
        self.classify_score(self.score(question))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::TextProcessor;

    fn questions(texts: &[&str]) -> Vec<Question> {
        let p = TextProcessor::default();
        texts
            .iter()
            .enumerate()
            .flat_map(|(i, t)| p.extract_questions(t, "q", i))
            .collect()
    }

    #[test]
    fn idf_definitions() {
        let stop = WordList::default_stopwords();
        let qs = questions(&["Serve well?", "Serve long?", "Serve wide?", "Serve fast?"]);
        let m = fit_idf(&qs, &stop);
        assert_eq!(m.idf("serv"), Some(0.0));
        assert_eq!(m.idf("wide"), Some(4f64.ln()));
        assert_eq!(m.n_docs(), 4);
    }

    #[test]
    fn unique_stem_mean() {
        let stop = WordList::default_stopwords();
        let qs = questions(&["Serve well?", "Serve long?", "Serve wide?", "Serve fast?"]);
        let m = fit_idf(&qs, &stop);
        let q = &questions(&["Serve wide, serve serving wide?"])[0];
        assert_eq!(m.score(q), Some(4f64.ln() / 2.0));
        let zero = &questions(&["Serve?"])[0];
        assert_eq!(m.score(zero), Some(0.0));
    }

    #[test]
    fn stop_words_and_names_are_unscored_and_typical() {
        let stop = WordList::default_stopwords();
        let qs = questions(&["Serve well?", "Is it Federer?"]);
        let m = fit_idf(&qs, &stop);
        assert_eq!(m.score(&qs[1]), None);
        assert_eq!(m.classify(&qs[1]), Typicality::Typical);
    }

    #[test]
    fn cutoff_is_strict() {
        let stop = WordList::default_stopwords();
        let qs = questions(&["Serve well?", "Serve long?"]);
        let m = fit_idf(&qs, &stop);
        // both score ln(2)/2, the mean itself
        assert_eq!(m.mean_cutoff(), 2f64.ln() / 2.0);
        assert!(qs.iter().all(|q| m.classify(q) == Typicality::Typical));
    }

    #[test]
    fn unseen_policies() {
        let stop = WordList::default_stopwords();
        let qs = questions(&["Serve well?", "Serve long?", "Serve wide?", "Serve fast?"]);
        let m = fit_idf(&qs, &stop);
        let q = &questions(&["Haircut?"])[0];
        assert_eq!(m.score(q), Some(4f64.ln()));
        let m = m.with_unseen(UnseenStem::Ignore);
        assert_eq!(m.score(q), None);
    }
}
