use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use super::grouping::ExperimentResult;
use super::scored::write_csv;
use super::{AnalysisConfig, Unit};
use crate::corpus::{Gender, MergeReport};
use crate::error::{Error, Result};
use crate::stats::{Sidedness, TestMethod};

/// Questions lost before analysis.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct DroppedCounts {
    /// Questions with no scorable token.
    pub unscorable_questions: usize,
    /// Questions without a rank at interview time (left out of rank experiments).
    pub missing_rank: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AnalysisReport {
    pub tool_version: String,
    pub seed: u64,
    pub sidedness: Sidedness,
    pub config_hash: String,
    pub config: AnalysisConfig,
    pub merge_report: Option<MergeReport>,
    pub dropped: DroppedCounts,
    pub experiments: Vec<ExperimentResult>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ReportFiles {
    pub report_json: PathBuf,
    pub cells_csv: PathBuf,
    pub tests_csv: PathBuf,
    pub pairs_audit_csv: PathBuf,
}

/// Long-format row of `cells.csv`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CellRow {
    pub experiment: String,
    pub condition: String,
    pub gender: Gender,
    pub unit: Unit,
    pub n: usize,
    pub mean_pp: f64,
    pub median_pp: f64,
    pub sd_pp: Option<f64>,
    pub ci_low: Option<f64>,
    pub ci_high: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TestRow {
    pub experiment: String,
    pub comparison: String,
    pub condition: String,
    pub method: TestMethod,
    pub sidedness: Sidedness,
    pub statistic: f64,
    pub p_value: f64,
    pub n1: usize,
    pub n2: usize,
    pub mean_a: f64,
    pub mean_b: f64,
    pub diff_ci_low: Option<f64>,
    pub diff_ci_high: Option<f64>,
    pub seed: u64,
    pub sweep_median_p: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PairRow {
    pub experiment: String,
    pub gender: Gender,
    pub player_id: String,
    pub unit: String,
    pub question_a: String,
    pub question_b: String,
    pub perplexity_a: f64,
    pub perplexity_b: f64,
}

/// Hex SHA-256 of the JSON form of `value`.
pub fn config_hash<T: Serialize>(value: &T) -> String {
    let bytes = serde_json::to_vec(value).expect("config serializes");
    hex(&Sha256::digest(bytes))
}

pub(crate) fn hex(bytes: &[u8]) -> String {
    bytes.iter().map(|b| format!("{b:02x}")).collect()
}

pub fn build_report(
    experiments: Vec<ExperimentResult>,
    config: &AnalysisConfig,
    seed: u64,
    merge_report: Option<MergeReport>,
    dropped: DroppedCounts,
) -> Result<AnalysisReport> {
    if experiments.is_empty() {
        return Err(Error::Config("no experiment was run".into()));
    }
    Ok(AnalysisReport {
        tool_version: env!("CARGO_PKG_VERSION").to_string(),
        seed,
        sidedness: config.sidedness,
        config_hash: config_hash(&(config, seed)),
        config: config.clone(),
        merge_report,
        dropped,
        experiments,
    })
}

impl AnalysisReport {
    pub fn cell_rows(&self) -> Vec<CellRow> {
        self.experiments
            .iter()
            .flat_map(|e| {
                e.cells.iter().map(move |c| CellRow {
                    experiment: e.spec.name.clone(),
                    condition: c.condition.clone(),
                    gender: c.gender,
                    unit: c.unit,
                    n: c.summary.n,
                    mean_pp: c.summary.mean,
                    median_pp: c.summary.median,
                    sd_pp: c.summary.sd,
                    ci_low: c.ci.as_ref().map(|ci| ci.low),
                    ci_high: c.ci.as_ref().map(|ci| ci.high),
                })
            })
            .collect()
    }

    pub fn test_rows(&self) -> Vec<TestRow> {
        self.experiments
            .iter()
            .flat_map(|e| {
                e.comparisons.iter().map(move |c| TestRow {
                    experiment: e.spec.name.clone(),
                    comparison: c.name.clone(),
                    condition: c.condition.clone(),
                    method: c.test.method,
                    sidedness: c.test.sidedness,
                    statistic: c.test.statistic,
                    p_value: c.test.p_value,
                    n1: c.test.n1,
                    n2: c.test.n2,
                    mean_a: c.test.mean_a,
                    mean_b: c.test.mean_b,
                    diff_ci_low: c.mean_diff_ci.as_ref().map(|ci| ci.low),
                    diff_ci_high: c.mean_diff_ci.as_ref().map(|ci| ci.high),
                    seed: e.spec.seed,
                    sweep_median_p: c.seed_sweep.as_ref().map(|s| s.median_p),
                })
            })
            .collect()
    }

    pub fn pair_rows(&self) -> Vec<PairRow> {
        self.experiments
            .iter()
            .flat_map(|e| {
                e.pairs.iter().map(move |p| PairRow {
                    experiment: e.spec.name.clone(),
                    gender: p.gender,
                    player_id: p.player_id.clone(),
                    unit: p.unit.clone(),
                    question_a: p.question_a.clone(),
                    question_b: p.question_b.clone(),
                    perplexity_a: p.perplexity_a,
                    perplexity_b: p.perplexity_b,
                })
            })
            .collect()
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("report serializes");
        s.push('\n');
        s
    }

    /// Write `report.json`, `cells.csv`, `tests.csv` and `pairs_audit.csv` into `dir`.
    pub fn write(&self, dir: &Path) -> Result<ReportFiles> {
        std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
        let files = ReportFiles {
            report_json: dir.join("report.json"),
            cells_csv: dir.join("cells.csv"),
            tests_csv: dir.join("tests.csv"),
            pairs_audit_csv: dir.join("pairs_audit.csv"),
        };
        std::fs::write(&files.report_json, self.to_json()).map_err(|e| Error::io(&files.report_json, e))?;
        write_csv(&files.cells_csv, &self.cell_rows())?;
        write_csv(&files.tests_csv, &self.test_rows())?;
        write_header_or_rows(&files.pairs_audit_csv, &self.pair_rows())?;
        Ok(files)
    }
}

// csv::Writer only emits a header with the first record; keep the header for
// runs without paired experiments.
fn write_header_or_rows(path: &Path, rows: &[PairRow]) -> Result<()> {
    if rows.is_empty() {
        let header = "experiment,gender,player_id,unit,question_a,question_b,perplexity_a,perplexity_b\n";
        return std::fs::write(path, header).map_err(|e| Error::io(path, e));
    }
    write_csv(path, rows)
}
