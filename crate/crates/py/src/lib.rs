//! Python bindings: text processing, the commentary model, typicality
//! scoring, rank tests and the full pipeline.

use std::path::PathBuf;

use pyo3::exceptions::{PyRuntimeError, PyValueError};
use pyo3::prelude::*;
use pyo3::types::{PyBytes, PyDict};

use qbias::corpus::{self, Question, TextProcessor};
use qbias::ngram_lm::{self, KneserNeyModel};
use qbias::stats::{self, PairedSample, Sample, Sidedness, TestResult};
use qbias::typicality;

fn to_py(e: qbias::Error) -> PyErr {
    match e.kind() {
        qbias::ErrorKind::Data => PyValueError::new_err(e.to_string()),
        _ => PyRuntimeError::new_err(e.to_string()),
    }
}

fn sidedness(s: &str) -> PyResult<Sidedness> {
    Sidedness::parse(s).ok_or_else(|| PyValueError::new_err(format!("unknown sidedness {s:?}")))
}

fn question(text: &TextProcessor, raw: &str) -> Question {
    Question {
        question_id: String::new(),
        raw_text: raw.to_string(),
        tokens: text.tokens(raw),
        snippet_index: 0,
        position_in_snippet: 0,
    }
}

/// Normalized tokens of `text` after entity masking.
#[pyfunction]
fn tokenize(text: &str) -> Vec<String> {
    TextProcessor::default().lm_tokens(text)
}

/// Replace names and other capitalized phrases with `<NOUN>`.
#[pyfunction]
fn mask_entities(text: &str) -> String {
    corpus::mask_entities(text, &TextProcessor::default().dictionary)
}

#[pyfunction]
fn split_questions(snippet: &str) -> Vec<String> {
    corpus::split_questions(snippet)
}

#[pyfunction]
fn stem(word: &str) -> String {
    corpus::porter::stem(word)
}

/// Bigram model with interpolated modified Kneser-Ney smoothing.
#[pyclass(name = "LanguageModel", frozen)]
struct PyLanguageModel {
    inner: KneserNeyModel,
}

#[pymethods]
impl PyLanguageModel {
    /// Train on raw commentary lines (masked and tokenized first).
    #[staticmethod]
    fn train(lines: Vec<String>) -> PyResult<Self> {
        let text = TextProcessor::default();
        let corpus: Vec<Vec<String>> = lines.iter().map(|l| text.lm_tokens(l)).collect();
        if corpus.iter().all(Vec::is_empty) {
            return Err(PyValueError::new_err("corpus has no tokens"));
        }
        Ok(PyLanguageModel {
            inner: ngram_lm::estimate_kn(&ngram_lm::count_ngrams(&corpus)),
        })
    }

    #[staticmethod]
    fn from_bytes(data: &[u8]) -> PyResult<Self> {
        ngram_lm::deserialize_model(data)
            .map(|inner| PyLanguageModel { inner })
            .map_err(|e| PyValueError::new_err(e.to_string()))
    }

    fn to_bytes<'py>(&self, py: Python<'py>) -> Bound<'py, PyBytes> {
        PyBytes::new(py, &ngram_lm::serialize_model(&self.inner))
    }

    fn to_arpa(&self) -> String {
        ngram_lm::write_arpa(&self.inner)
    }

    /// P(word | context) over normalized tokens.
    fn prob(&self, context: &str, word: &str) -> f64 {
        self.inner.prob(context, word)
    }

    /// Perplexity of a raw question.
    fn perplexity(&self, text: &str) -> PyResult<f64> {
        let q = question(&TextProcessor::default(), text);
        self.inner.perplexity(&q).map(|r| r.perplexity).map_err(to_py)
    }

    #[getter]
    fn vocab_size(&self) -> usize {
        self.inner.vocab().len()
    }
}

/// Mean-IDF typicality model fitted on a set of questions.
#[pyclass(name = "AtypicalityModel", frozen)]
struct PyAtypicalityModel {
    inner: typicality::AtypicalityModel,
    text: TextProcessor,
}

#[pymethods]
impl PyAtypicalityModel {
    #[staticmethod]
    fn fit(questions: Vec<String>) -> Self {
        let text = TextProcessor::default();
        let qs: Vec<Question> = questions.iter().map(|q| question(&text, q)).collect();
        PyAtypicalityModel {
            inner: typicality::fit_idf(&qs, &text.stopwords),
            text,
        }
    }

    /// Mean IDF of the question's content stems, or None.
    fn score(&self, text: &str) -> Option<f64> {
        self.inner.score(&question(&self.text, text))
    }

    fn classify(&self, text: &str) -> &'static str {
        self.inner.classify(&question(&self.text, text)).as_str()
    }

    fn idf(&self, stem: &str) -> Option<f64> {
        self.inner.idf(stem)
    }

    #[getter]
    fn mean_cutoff(&self) -> f64 {
        self.inner.mean_cutoff()
    }
}

fn result_dict<'py>(py: Python<'py>, r: &TestResult) -> PyResult<Bound<'py, PyDict>> {
    let d = PyDict::new(py);
    d.set_item("method", r.method.as_str())?;
    d.set_item("statistic", r.statistic)?;
    d.set_item("p_value", r.p_value)?;
    d.set_item("sidedness", r.sidedness.as_str())?;
    d.set_item("n1", r.n1)?;
    d.set_item("n2", r.n2)?;
    d.set_item("mean_a", r.mean_a)?;
    d.set_item("mean_b", r.mean_b)?;
    d.set_item("median_a", r.median_a)?;
    d.set_item("median_b", r.median_b)?;
    Ok(d)
}

#[pyfunction]
#[pyo3(signature = (a, b, sidedness = "two_sided"))]
fn mann_whitney_u<'py>(py: Python<'py>, a: Vec<f64>, b: Vec<f64>, sidedness: &str) -> PyResult<Bound<'py, PyDict>> {
    let r = stats::mann_whitney_u(&Sample::new("a", a), &Sample::new("b", b), self::sidedness(sidedness)?)
        .map_err(to_py)?;
    result_dict(py, &r)
}

/// Signed-rank test on `a[i] - b[i]`.
#[pyfunction]
#[pyo3(signature = (a, b, sidedness = "two_sided"))]
fn wilcoxon_signed_rank<'py>(
    py: Python<'py>,
    a: Vec<f64>,
    b: Vec<f64>,
    sidedness: &str,
) -> PyResult<Bound<'py, PyDict>> {
    if a.len() != b.len() {
        return Err(PyValueError::new_err("a and b must have equal length"));
    }
    let pairs = PairedSample::new("pairs", a.into_iter().zip(b).collect());
    let r = stats::wilcoxon_signed_rank(&pairs, self::sidedness(sidedness)?).map_err(to_py)?;
    result_dict(py, &r)
}

/// Run the full pipeline from a TOML config; returns the run manifest as JSON.
#[pyfunction]
fn run_pipeline(config: PathBuf) -> PyResult<String> {
    let cfg = qbias::pipeline::Config::from_path(&config).map_err(to_py)?;
    let m = qbias::pipeline::run_pipeline(&cfg).map_err(to_py)?;
    serde_json::to_string(&m).map_err(|e| PyRuntimeError::new_err(e.to_string()))
}

#[pymodule]
#[pyo3(name = "qbias")]
fn qbias_module(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_function(wrap_pyfunction!(tokenize, m)?)?;
    m.add_function(wrap_pyfunction!(mask_entities, m)?)?;
    m.add_function(wrap_pyfunction!(split_questions, m)?)?;
    m.add_function(wrap_pyfunction!(stem, m)?)?;
    m.add_function(wrap_pyfunction!(mann_whitney_u, m)?)?;
    m.add_function(wrap_pyfunction!(wilcoxon_signed_rank, m)?)?;
    m.add_function(wrap_pyfunction!(run_pipeline, m)?)?;
    m.add_class::<PyLanguageModel>()?;
    m.add_class::<PyAtypicalityModel>()?;
    Ok(())
}
