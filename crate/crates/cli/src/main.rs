use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use log::{info, warn};
use serde_json::json;

use qbias::analysis::{self, AnalysisConfig, Experiment, TypicalityRow};
use qbias::corpus::{
    read_commentary, read_matches, read_questions, read_transcripts, write_questions, MergeReport, TextProcessor,
    WordList,
};
use qbias::ngram_lm::{deserialize_model, serialize_model, write_arpa};
use qbias::pipeline::{self, Config, Settings};
use qbias::stats::Sidedness;
use qbias::synth::{self, SynthConfig};
use qbias::{Error, ErrorKind, Result};

/// Game-relatedness of post-match interview questions.
#[derive(Parser, Debug)]
#[command(name = "qbias", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Merge transcripts with match rows and extract questions.
    Ingest(IngestArgs),
    /// Train the bigram commentary model.
    TrainLm(TrainArgs),
    /// Score questions by perplexity under a trained model.
    Score(ScoreArgs),
    /// Label questions typical or atypical by mean IDF.
    Typicality(TypicalityArgs),
    /// Run group and paired comparisons on scored questions.
    Analyze(AnalyzeArgs),
    /// Run every stage from a config file.
    Pipeline(PipelineArgs),
    /// Generate synthetic inputs with a planted gap.
    Synth(SynthArgs),
}

#[derive(Args, Debug)]
struct LexiconArgs {
    /// Dictionary used to decide whether a sentence-initial capitalized word is a name.
    #[arg(long)]
    dictionary: Option<PathBuf>,
    /// Stop-word list, one word per line.
    #[arg(long)]
    stopwords: Option<PathBuf>,
}

impl LexiconArgs {
    fn processor(&self) -> Result<TextProcessor> {
        let dictionary = match &self.dictionary {
            Some(p) => WordList::from_path(p)?,
            None => WordList::default_dictionary(),
        };
        let stopwords = match &self.stopwords {
            Some(p) => WordList::from_path(p)?,
            None => WordList::default_stopwords(),
        };
        Ok(TextProcessor::new(dictionary, stopwords))
    }
}

#[derive(Args, Debug)]
struct IngestArgs {
    /// Transcripts, JSON lines.
    #[arg(long)]
    transcripts: PathBuf,
    /// Match results CSV.
    #[arg(long)]
    matches: PathBuf,
    #[command(flatten)]
    lexicon: LexiconArgs,
    /// Output directory for questions.jsonl and merge_report.json.
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args, Debug)]
struct TrainArgs {
    /// Commentary, one document per line.
    #[arg(long)]
    corpus: PathBuf,
    /// CSV `id,gender` of commentary lines; balances training data by gender.
    #[arg(long, requires = "seed")]
    genders: Option<PathBuf>,
    /// Seed for gender balancing.
    #[arg(long)]
    seed: Option<u64>,
    /// Discount used when counts-of-counts give no usable estimate.
    #[arg(long, default_value_t = qbias::ngram_lm::FALLBACK_DISCOUNT)]
    fallback_discount: f64,
    #[command(flatten)]
    lexicon: LexiconArgs,
    /// Binary model output.
    #[arg(long)]
    out: PathBuf,
    /// Also write a sorted plain-text dump.
    #[arg(long)]
    arpa: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct ScoreArgs {
    #[arg(long)]
    model: PathBuf,
    /// questions.jsonl from `ingest`.
    #[arg(long)]
    questions: PathBuf,
    /// Scored CSV output.
    #[arg(long)]
    out: PathBuf,
    /// Worker threads; 0 uses all cores.
    #[arg(long, default_value_t = 0)]
    threads: usize,
}

#[derive(Args, Debug)]
struct TypicalityArgs {
    #[arg(long)]
    questions: PathBuf,
    /// Stop-word list; the bundled list when absent.
    #[arg(long)]
    stopwords: Option<PathBuf>,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args, Debug)]
struct AnalyzeArgs {
    /// Scored CSV from `score`.
    #[arg(long)]
    scored: PathBuf,
    /// Typicality CSV; needed by the typicality experiment unless the scored CSV has labels.
    #[arg(long)]
    typicality: Option<PathBuf>,
    /// Merge report to include in the output.
    #[arg(long)]
    merge_report: Option<PathBuf>,
    #[arg(long, value_parser = parse_experiment, default_value = "all")]
    experiment: Experiment,
    #[arg(long)]
    seed: u64,
    #[arg(long)]
    out: PathBuf,
    #[command(flatten)]
    analysis: AnalysisFlags,
}

#[derive(Args, Debug, Default)]
struct AnalysisFlags {
    /// two_sided, less or greater.
    #[arg(long, value_parser = parse_sidedness)]
    sidedness: Option<Sidedness>,
    /// Minimum questions per player for player averages.
    #[arg(long)]
    min_questions: Option<usize>,
    /// Ranks at or below this are in the top group.
    #[arg(long)]
    top_rank_cut: Option<u32>,
    /// Bootstrap resamples for intervals; 0 disables them.
    #[arg(long)]
    bootstrap_resamples: Option<usize>,
    /// Permutations for the gap-of-gaps test; 0 disables it.
    #[arg(long)]
    permutations: Option<usize>,
    /// Pairing seeds in the robustness sweep of paired tests.
    #[arg(long)]
    seed_sweep: Option<usize>,
}

impl AnalysisFlags {
    fn apply(&self, cfg: &mut AnalysisConfig) {
        if let Some(v) = self.sidedness {
            cfg.sidedness = v;
        }
        if let Some(v) = self.min_questions {
            cfg.min_questions = v;
        }
        if let Some(v) = self.top_rank_cut {
            cfg.top_rank_cut = v;
        }
        if let Some(v) = self.bootstrap_resamples {
            cfg.bootstrap_resamples = v;
        }
        if let Some(v) = self.permutations {
            cfg.permutations = v;
        }
        if let Some(v) = self.seed_sweep {
            cfg.seed_sweep = v;
        }
    }
}

#[derive(Args, Debug)]
struct PipelineArgs {
    /// TOML config.
    #[arg(long)]
    config: PathBuf,
    /// Overrides the config seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Overrides the config output directory.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Overrides the config thread count.
    #[arg(long)]
    threads: Option<usize>,
    #[arg(long, value_parser = parse_experiment)]
    experiment: Option<Experiment>,
    #[command(flatten)]
    analysis: AnalysisFlags,
}

#[derive(Args, Debug)]
struct SynthArgs {
    /// TOML file with synth settings; flags override it.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
    /// Share of female questions drawn from the distractor source.
    #[arg(long)]
    gap: Option<f64>,
    /// Share of male questions drawn from the distractor source.
    #[arg(long)]
    male_mix: Option<f64>,
    /// Questions per gender.
    #[arg(long)]
    n_per_group: Option<usize>,
    #[arg(long)]
    commentary_lines: Option<usize>,
    #[arg(long)]
    players: Option<usize>,
    #[arg(long)]
    out: PathBuf,
}

fn parse_experiment(s: &str) -> std::result::Result<Experiment, String> {
    Experiment::parse(s).ok_or_else(|| format!("unknown experiment {s:?}; use gender, typicality, rank, outcome or all"))
}

fn parse_sidedness(s: &str) -> std::result::Result<Sidedness, String> {
    Sidedness::parse(s).ok_or_else(|| format!("unknown sidedness {s:?}; use two_sided, less or greater"))
}

fn write_json<T: serde::Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut s = serde_json::to_string_pretty(value).expect("serializable");
    s.push('\n');
    std::fs::write(path, s).map_err(|e| Error::io(path, e))
}

fn create_dir(dir: &Path) -> Result<()> {
    std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))
}

fn ingest(a: IngestArgs) -> Result<()> {
    let text = a.lexicon.processor()?;
    let transcripts = read_transcripts(&a.transcripts)?;
    let matches = read_matches(&a.matches)?;
    let (records, report) = pipeline::ingest(&transcripts, &matches, &text)?;
    create_dir(&a.out)?;
    write_questions(&a.out.join("questions.jsonl"), &records)?;
    write_json(&a.out.join("merge_report.json"), &report)?;
    info!("{} interviews merged, {} questions", report.merged, records.len());
    Ok(())
}

fn train_lm(a: TrainArgs) -> Result<()> {
    if !(a.fallback_discount > 0.0 && a.fallback_discount <= 1.0) {
        return Err(Error::Config(format!(
            "fallback discount must lie in (0, 1], got {}",
            a.fallback_discount
        )));
    }
    let text = a.lexicon.processor()?;
    let docs = read_commentary(&a.corpus, a.genders.as_deref())?;
    let balance = a.genders.is_some().then_some(a.seed).flatten();
    let model = pipeline::train(&docs, &text, a.fallback_discount, balance)?;
    std::fs::write(&a.out, serialize_model(&model)).map_err(|e| Error::io(&a.out, e))?;
    if let Some(p) = &a.arpa {
        std::fs::write(p, write_arpa(&model)).map_err(|e| Error::io(p, e))?;
    }
    info!("vocabulary {}, {} bigrams", model.vocab().len(), model.n_bigrams());
    Ok(())
}

fn score(a: ScoreArgs) -> Result<()> {
    let bytes = std::fs::read(&a.model).map_err(|e| Error::io(&a.model, e))?;
    let model = deserialize_model(&bytes)?;
    let records = read_questions(&a.questions)?;
    let (scored, unscorable) = pipeline::score(&model, &records, a.threads)?;
    if unscorable > 0 {
        warn!("{unscorable} unscorable questions left out");
    }
    analysis::write_csv(&a.out, &scored)
}

fn typicality(a: TypicalityArgs) -> Result<()> {
    let stopwords = match &a.stopwords {
        Some(p) => WordList::from_path(p)?,
        None => WordList::default_stopwords(),
    };
    let records = read_questions(&a.questions)?;
    let (model, rows) = pipeline::typicality(&records, &stopwords);
    info!("{} questions, mean cutoff {}", model.n_docs(), model.mean_cutoff());
    analysis::write_csv(&a.out, &rows)
}

fn analyze(a: AnalyzeArgs) -> Result<()> {
    let mut scored = analysis::read_scored(&a.scored)?;
    if let Some(p) = &a.typicality {
        let rows: Vec<TypicalityRow> = analysis::read_csv(p)?;
        analysis::attach_typicality(&mut scored, &rows);
    }
    let merge: Option<MergeReport> = match &a.merge_report {
        Some(p) => {
            let text = std::fs::read_to_string(p).map_err(|e| Error::io(p, e))?;
            Some(serde_json::from_str(&text).map_err(|e| Error::parse(p, e.line(), e.to_string()))?)
        }
        None => None,
    };
    let mut settings = Settings::new(a.seed);
    settings.experiment = a.experiment;
    a.analysis.apply(&mut settings.analysis);
    settings.analysis.validate()?;
    let report = pipeline::analyze(&scored, &settings, merge, 0)?;
    report.write(&a.out)?;
    Ok(())
}

fn run_pipeline(a: PipelineArgs) -> Result<()> {
    let mut cfg = Config::from_path(&a.config)?;
    if let Some(s) = a.seed {
        cfg.seed = Some(s);
    }
    if let Some(o) = a.out {
        cfg.paths.output_dir = o;
    }
    if let Some(t) = a.threads {
        cfg.threads = t;
    }
    if let Some(e) = a.experiment {
        cfg.experiment = e;
    }
    a.analysis.apply(&mut cfg.analysis);
    let manifest = pipeline::run_pipeline(&cfg)?;
    info!("wrote {} files to {}", manifest.outputs.len(), cfg.paths.output_dir.display());
    Ok(())
}

fn run_synth(a: SynthArgs) -> Result<()> {
    let mut cfg = match &a.config {
        Some(p) => SynthConfig::from_path(p)?,
        None => SynthConfig::default(),
    };
    match (a.seed, &a.config) {
        (Some(s), _) => cfg.seed = s,
        (None, None) => return Err(Error::Config("synth needs --seed or a config with a seed".into())),
        _ => {}
    }
    if let Some(v) = a.gap {
        cfg.gap = v;
    }
    if let Some(v) = a.male_mix {
        cfg.male_mix = v;
    }
    if let Some(v) = a.n_per_group {
        cfg.n_per_group = v;
    }
    if let Some(v) = a.commentary_lines {
        cfg.commentary_lines = v;
    }
    if let Some(v) = a.players {
        cfg.players_per_gender = v;
    }
    let corpus = synth::generate(&cfg)?;
    synth::write_corpus(&corpus, &cfg, &a.out)?;
    Ok(())
}

fn exit_code(kind: ErrorKind) -> u8 {
    match kind {
        ErrorKind::Config => 2,
        ErrorKind::Data => 3,
        ErrorKind::Degenerate => 4,
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Ingest(a) => ingest(a),
        Command::TrainLm(a) => train_lm(a),
        Command::Score(a) => score(a),
        Command::Typicality(a) => typicality(a),
        Command::Analyze(a) => analyze(a),
        Command::Pipeline(a) => run_pipeline(a),
        Command::Synth(a) => run_synth(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            let kind = e.kind();
            let err = json!({
                "error": {
                    "kind": format!("{kind:?}").to_lowercase(),
                    "stage": e.stage(),
                    "message": e.to_string(),
                }
            });
            eprintln!("{err}");
            ExitCode::from(exit_code(kind))
        }
    }
}
