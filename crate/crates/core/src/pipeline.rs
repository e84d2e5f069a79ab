//! End-to-end run: ingest, train, score, typicality, analyze.
//!
//! The stage functions work on in-memory data and are reused by the
//! single-stage CLI commands; [`run_pipeline`] adds file IO and the run
//! manifest.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use log::{info, warn};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::analysis::{
    self, build_report, AnalysisConfig, AnalysisReport, DroppedCounts, Experiment, ScoredQuestion, TypicalityRow,
};
use crate::corpus::{
    balance_by_gender, merge_transcripts, read_commentary, read_matches, read_transcripts, write_questions,
    CommentaryDoc, MatchRecord, MergeReport, QuestionRecord, TextProcessor, TranscriptRecord, WordList,
};
use crate::error::{Error, Result};
use crate::ngram_lm::{count_ngrams, estimate_kn_with_fallback, serialize_model, write_arpa, KneserNeyModel};
use crate::typicality::{fit_idf, AtypicalityModel};

pub const TOOL_VERSION: &str = env!("CARGO_PKG_VERSION");

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Paths {
    pub transcripts: PathBuf,
    pub matches: PathBuf,
    pub commentary: PathBuf,
    /// CSV `id,gender` tagging commentary lines; when given, training data is
    /// balanced by gender.
    #[serde(default)]
    pub commentary_genders: Option<PathBuf>,
    #[serde(default)]
    pub stopwords: Option<PathBuf>,
    #[serde(default)]
    pub dictionary: Option<PathBuf>,
    pub output_dir: PathBuf,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct LmSettings {
    /// Only 2 is supported.
    pub order: u32,
    pub fallback_discount: f64,
}

impl Default for LmSettings {
    fn default() -> Self {
        LmSettings {
            order: 2,
            fallback_discount: crate::ngram_lm::FALLBACK_DISCOUNT,
        }
    }
}

/// Pipeline configuration, read from TOML.
///
/// ```toml
/// seed = 42
/// experiment = "all"
///
/// [paths]
/// transcripts = "transcripts.jsonl"
/// matches = "matches.csv"
/// commentary = "commentary.txt"
/// output_dir = "out"
///
/// [analysis]
/// sidedness = "two_sided"
/// min_questions = 10
/// ```
///
/// Relative paths are resolved against the directory of the config file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Config {
    pub seed: Option<u64>,
    #[serde(default)]
    pub threads: usize,
    #[serde(default = "default_experiment")]
    pub experiment: Experiment,
    pub paths: Paths,
    #[serde(default)]
    pub lm: LmSettings,
    #[serde(default)]
    pub analysis: AnalysisConfig,
}

fn default_experiment() -> Experiment {
    Experiment::All
}

impl Config {
    pub fn from_toml(text: &str, base_dir: &Path) -> Result<Self> {
        let mut cfg: Config = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        cfg.resolve(base_dir);
        Ok(cfg)
    }

    pub fn from_path(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
        let base = path.parent().unwrap_or(Path::new("."));
        Config::from_toml(&text, base)
    }

    fn resolve(&mut self, base: &Path) {
        let fix = |p: &mut PathBuf| {
            if p.is_relative() {
                *p = base.join(&*p);
            }
        };
        let p = &mut self.paths;
        fix(&mut p.transcripts);
        fix(&mut p.matches);
        fix(&mut p.commentary);
        fix(&mut p.output_dir);
        for x in [&mut p.commentary_genders, &mut p.stopwords, &mut p.dictionary].into_iter().flatten() {
            fix(x);
        }
    }

    pub fn seed(&self) -> Result<u64> {
        self.seed
            .ok_or_else(|| Error::Config("seed is required".into()))
    }

    pub fn validate(&self) -> Result<()> {
        self.seed()?;
        if self.lm.order != 2 {
            return Err(Error::Config(format!("lm order must be 2, got {}", self.lm.order)));
        }
        let d = self.lm.fallback_discount;
        if !(d > 0.0 && d <= 1.0) {
            return Err(Error::Config(format!("fallback_discount must lie in (0, 1], got {d}")));
        }
        self.analysis.validate()?;
        for (name, path) in self.input_paths() {
            if !path.is_file() {
                return Err(Error::Config(format!("{name} not found: {}", path.display())));
            }
        }
        Ok(())
    }

    /// Named input files, in a fixed order.
    pub fn input_paths(&self) -> Vec<(&'static str, &Path)> {
        let p = &self.paths;
        let mut v: Vec<(&'static str, &Path)> = vec![
            ("transcripts", &p.transcripts),
            ("matches", &p.matches),
            ("commentary", &p.commentary),
        ];
        if let Some(x) = &p.commentary_genders {
            v.push(("commentary_genders", x));
        }
        if let Some(x) = &p.stopwords {
            v.push(("stopwords", x));
        }
        if let Some(x) = &p.dictionary {
            v.push(("dictionary", x));
        }
        v
    }

    pub fn settings(&self) -> Result<Settings> {
        Ok(Settings {
            seed: self.seed()?,
            threads: self.threads,
            fallback_discount: self.lm.fallback_discount,
            experiment: self.experiment,
            analysis: self.analysis.clone(),
        })
    }

    pub fn text_processor(&self) -> Result<TextProcessor> {
        let dictionary = match &self.paths.dictionary {
            Some(p) => WordList::from_path(p)?,
            None => WordList::default_dictionary(),
        };
        let stopwords = match &self.paths.stopwords {
            Some(p) => WordList::from_path(p)?,
            None => WordList::default_stopwords(),
        };
        Ok(TextProcessor::new(dictionary, stopwords))
    }
}

/// Everything the stages need besides the data.
#[derive(Debug, Clone, PartialEq)]
pub struct Settings {
    pub seed: u64,
    pub threads: usize,
    pub fallback_discount: f64,
    pub experiment: Experiment,
    pub analysis: AnalysisConfig,
}

impl Settings {
    pub fn new(seed: u64) -> Self {
        Settings {
            seed,
            threads: 0,
            fallback_discount: crate::ngram_lm::FALLBACK_DISCOUNT,
            experiment: Experiment::All,
            analysis: AnalysisConfig::default(),
        }
    }
}

pub fn ingest(
    transcripts: &[TranscriptRecord],
    matches: &[MatchRecord],
    text: &TextProcessor,
) -> Result<(Vec<QuestionRecord>, MergeReport)> {
    for m in matches {
        m.validate()?;
    }
    let merged = merge_transcripts(transcripts, matches, text)?;
    if merged.report.unmatched_transcripts > 0 {
        warn!("{} transcripts matched no match row", merged.report.unmatched_transcripts);
    }
    Ok((QuestionRecord::from_interviews(&merged.interviews), merged.report))
}

/// Train the bigram model. With `balance_seed`, commentary is first
/// subsampled to equal per-gender document counts.
pub fn train(
    commentary: &[CommentaryDoc],
    text: &TextProcessor,
    fallback_discount: f64,
    balance_seed: Option<u64>,
) -> Result<KneserNeyModel> {
    let balanced;
    let docs = match balance_seed {
        Some(seed) => {
            balanced = balance_by_gender(commentary, seed);
            &balanced[..]
        }
        None => commentary,
    };
    let corpus: Vec<Vec<String>> = docs.iter().map(|d| text.lm_tokens(&d.text)).collect();
    let counts = count_ngrams(&corpus);
    if counts.skipped_empty > 0 {
        warn!("{} commentary documents had no tokens", counts.skipped_empty);
    }
    if counts.skipped_empty == corpus.len() {
        return Err(Error::InvalidRecord("commentary has no tokens".into()));
    }
    Ok(estimate_kn_with_fallback(&counts, fallback_discount))
}

/// Perplexity of every scorable question. Questions without tokens are
/// dropped and counted.
pub fn score(
    model: &KneserNeyModel,
    records: &[QuestionRecord],
    threads: usize,
) -> Result<(Vec<ScoredQuestion>, usize)> {
    let (ok, empty): (Vec<&QuestionRecord>, Vec<&QuestionRecord>) =
        records.iter().partition(|r| !r.tokens.is_empty());
    if !empty.is_empty() {
        warn!("{} questions have no tokens and are not scored", empty.len());
    }
    let questions: Vec<_> = ok.iter().map(|r| r.question()).collect();
    let pps = model.score_batch(&questions, threads)?;
    let scored = ok.iter().zip(&pps).map(|(r, pp)| ScoredQuestion::new(r, pp)).collect();
    Ok((scored, empty.len()))
}

pub fn typicality(records: &[QuestionRecord], stopwords: &WordList) -> (AtypicalityModel, Vec<TypicalityRow>) {
    let questions: Vec<_> = records.iter().map(QuestionRecord::question).collect();
    let model = fit_idf(&questions, stopwords);
    let rows = questions
        .iter()
        .map(|q| {
            let score = model.score(q);
            TypicalityRow {
                question_id: q.question_id.clone(),
                score,
                label: model.classify_score(score),
            }
        })
        .collect();
    (model, rows)
}

/// Run the experiments of `settings.experiment` and assemble the report.
pub fn analyze(
    scored: &[ScoredQuestion],
    settings: &Settings,
    merge_report: Option<MergeReport>,
    unscorable: usize,
) -> Result<AnalysisReport> {
    let specs = settings.experiment.specs(settings.seed);
    let results = specs
        .par_iter()
        .map(|s| analysis::run_experiment(s, scored, &settings.analysis).map_err(|e| e.in_stage(s.name.clone())))
        .collect::<Result<Vec<_>>>()?;
    let dropped = DroppedCounts {
        unscorable_questions: unscorable,
        missing_rank: scored.iter().filter(|q| q.rank.is_none()).count(),
    };
    build_report(results, &settings.analysis, settings.seed, merge_report, dropped)
}

/// In-memory products of a full run.
#[derive(Debug, Clone)]
pub struct Artifacts {
    pub records: Vec<QuestionRecord>,
    pub merge_report: MergeReport,
    pub model: KneserNeyModel,
    pub scored: Vec<ScoredQuestion>,
    pub typicality: Vec<TypicalityRow>,
    pub report: AnalysisReport,
}

/// Input data for [`run_stages`].
#[derive(Debug, Clone)]
pub struct Inputs {
    pub transcripts: Vec<TranscriptRecord>,
    pub matches: Vec<MatchRecord>,
    pub commentary: Vec<CommentaryDoc>,
    pub balance_commentary: bool,
}

pub fn run_stages(inputs: &Inputs, text: &TextProcessor, settings: &Settings) -> Result<Artifacts> {
    let (records, merge_report) =
        ingest(&inputs.transcripts, &inputs.matches, text).map_err(|e| e.in_stage("ingest"))?;
    let balance = inputs.balance_commentary.then_some(settings.seed);
    let model = train(&inputs.commentary, text, settings.fallback_discount, balance).map_err(|e| e.in_stage("train"))?;
    let (mut scored, unscorable) = score(&model, &records, settings.threads).map_err(|e| e.in_stage("score"))?;
    let (_, typ) = typicality(&records, &text.stopwords);
    analysis::attach_typicality(&mut scored, &typ);
    let report =
        analyze(&scored, settings, Some(merge_report.clone()), unscorable).map_err(|e| e.in_stage("analyze"))?;
    Ok(Artifacts {
        records,
        merge_report,
        model,
        scored,
        typicality: typ,
        report,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InputChecksum {
    pub name: String,
    pub path: String,
    pub sha256: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum RunStatus {
    Ok,
    Failed,
}

/// Contents of `run_manifest.json`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub tool_version: String,
    pub status: RunStatus,
    pub seed: u64,
    pub config_hash: String,
    pub inputs: Vec<InputChecksum>,
    pub outputs: Vec<String>,
    pub failed_stage: Option<String>,
    pub error: Option<String>,
}

// threads and output_dir do not change any output
fn result_hash(cfg: &Config) -> String {
    let mut c = cfg.clone();
    c.threads = 0;
    c.paths.output_dir = PathBuf::new();
    analysis::config_hash(&c)
}

pub fn sha256_file(path: &Path) -> Result<String> {
    let bytes = std::fs::read(path).map_err(|e| Error::io(path, e))?;
    Ok(analysis::hex(&Sha256::digest(bytes)))
}

fn write_file(path: &Path, bytes: impl AsRef<[u8]>) -> Result<()> {
    std::fs::write(path, bytes).map_err(|e| Error::io(path, e))
}

fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut s = serde_json::to_string_pretty(value).expect("serializable");
    s.push('\n');
    write_file(path, s)
}

/// Run every stage from the files named in `cfg`, writing all artifacts and
/// `run_manifest.json` to the output directory. On failure the manifest is
/// still written, with status `failed` and the failing stage.
pub fn run_pipeline(cfg: &Config) -> Result<RunManifest> {
    cfg.validate()?;
    let settings = cfg.settings()?;
    let out = &cfg.paths.output_dir;
    std::fs::create_dir_all(out).map_err(|e| Error::io(out, e))?;

    let inputs = cfg
        .input_paths()
        .into_iter()
        .map(|(name, path)| {
            Ok(InputChecksum {
                name: name.to_string(),
                path: path.display().to_string(),
                sha256: sha256_file(path)?,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let mut manifest = RunManifest {
        tool_version: TOOL_VERSION.to_string(),
        status: RunStatus::Ok,
        seed: settings.seed,
        config_hash: result_hash(cfg),
        inputs,
        outputs: Vec::new(),
        failed_stage: None,
        error: None,
    };
    let manifest_path = out.join("run_manifest.json");
    // mark the run as failed until every stage is done
    let mut pending = manifest.clone();
    pending.status = RunStatus::Failed;
    pending.error = Some("run did not complete".into());
    write_json(&manifest_path, &pending)?;

    match write_all_stages(cfg, &settings, out, &mut manifest.outputs) {
        Ok(()) => {
            write_json(&manifest_path, &manifest)?;
            Ok(manifest)
        }
        Err(e) => {
            manifest.status = RunStatus::Failed;
            manifest.failed_stage = e.stage().map(str::to_string);
            manifest.error = Some(e.to_string());
            write_json(&manifest_path, &manifest)?;
            Err(e)
        }
    }
}

fn write_all_stages(cfg: &Config, settings: &Settings, out: &Path, outputs: &mut Vec<String>) -> Result<()> {
    let text = cfg.text_processor().map_err(|e| e.in_stage("ingest"))?;
    let mut done = |name: &str| outputs.push(name.to_string());

    let (records, merge_report) = (|| -> Result<(Vec<QuestionRecord>, MergeReport)> {
        let transcripts = read_transcripts(&cfg.paths.transcripts)?;
        let matches = read_matches(&cfg.paths.matches)?;
        let (records, report) = ingest(&transcripts, &matches, &text)?;
        write_questions(&out.join("questions.jsonl"), &records)?;
        write_json(&out.join("merge_report.json"), &report)?;
        info!("ingest: {} interviews, {} questions", report.merged, records.len());
        Ok((records, report))
    })()
    .map_err(|e| e.in_stage("ingest"))?;
    done("questions.jsonl");
    done("merge_report.json");

    let model = (|| -> Result<KneserNeyModel> {
        let docs = read_commentary(&cfg.paths.commentary, cfg.paths.commentary_genders.as_deref())?;
        let balance = cfg.paths.commentary_genders.is_some().then_some(settings.seed);
        let model = train(&docs, &text, settings.fallback_discount, balance)?;
        write_file(&out.join("model.bin"), serialize_model(&model))?;
        write_file(&out.join("model.arpa"), write_arpa(&model))?;
        info!("train: vocabulary {}, {} bigrams", model.vocab().len(), model.n_bigrams());
        Ok(model)
    })()
    .map_err(|e| e.in_stage("train"))?;
    done("model.bin");
    done("model.arpa");

    let (mut scored, unscorable) = score(&model, &records, settings.threads).map_err(|e| e.in_stage("score"))?;

    let (_, typ) = typicality(&records, &text.stopwords);
    analysis::write_csv(&out.join("typicality.csv"), &typ).map_err(|e| e.in_stage("typicality"))?;
    done("typicality.csv");
    analysis::attach_typicality(&mut scored, &typ);
    analysis::write_csv(&out.join("scored.csv"), &scored).map_err(|e| e.in_stage("score"))?;
    done("scored.csv");

    let report = analyze(&scored, settings, Some(merge_report), unscorable).map_err(|e| e.in_stage("analyze"))?;
    report.write(out).map_err(|e| e.in_stage("analyze"))?;
    for f in ["report.json", "cells.csv", "tests.csv", "pairs_audit.csv"] {
        done(f);
    }
    Ok(())
}

/// Per-stage output file names, for callers that check a run directory.
pub fn expected_outputs() -> BTreeMap<&'static str, &'static [&'static str]> {
    BTreeMap::from([
        ("ingest", &["questions.jsonl", "merge_report.json"][..]),
        ("train", &["model.bin", "model.arpa"][..]),
        ("score", &["scored.csv"][..]),
        ("typicality", &["typicality.csv"][..]),
        ("analyze", &["report.json", "cells.csv", "tests.csv", "pairs_audit.csv"][..]),
    ])
}
