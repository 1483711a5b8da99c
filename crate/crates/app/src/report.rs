//! Experiment reports: aggregation, chi-square, JSON/CSV/text output.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use sdea_core::corpus::Prompt;
use sdea_core::reranker::{EnhancedResult, RankedCandidate};
use sdea_core::stats::{chi_square_with, ChiSquareOptions, ContingencyTable};
use sdea_core::{ChiSquareResult, SdLevel};
use serde::{Deserialize, Serialize};

use crate::config::OutputSection;
use crate::experiment::{ExperimentError, NotFoundPolicy, RunFailure};

pub const VANILLA: &str = "vanilla";
pub const SDEA: &str = "sdea";

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ResponseRecord {
    pub text: String,
    pub level: SdLevel,
    pub index: usize,
}

impl From<&RankedCandidate> for ResponseRecord {
    fn from(c: &RankedCandidate) -> Self {
        Self {
            text: c.candidate.text.clone(),
            level: c.level,
            index: c.candidate.index,
        }
    }
}

/// Outcome for a single prompt.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PromptRecord {
    pub conv_id: String,
    pub turn: u8,
    pub prompt: String,
    pub vanilla: ResponseRecord,
    pub enhanced: Option<ResponseRecord>,
    pub candidates: usize,
}

impl PromptRecord {
    pub fn new(prompt: &Prompt, result: &EnhancedResult) -> Self {
        Self {
            conv_id: prompt.conv_id.clone(),
            turn: prompt.turn,
            prompt: prompt.text.clone(),
            vanilla: (&result.vanilla).into(),
            enhanced: result.enhanced.as_ref().map(Into::into),
            candidates: result.candidates.len(),
        }
    }

    /// Level counted for the SDEA system under `policy`, if counted at all.
    pub fn sdea_level(&self, policy: NotFoundPolicy) -> Option<SdLevel> {
        match (&self.enhanced, policy) {
            (Some(e), _) => Some(e.level),
            (None, NotFoundPolicy::Fallback) => Some(self.vanilla.level),
            (None, NotFoundPolicy::Exclude) => None,
        }
    }
}

/// Per-level counts, serialized as `{"G": .., "M": .., "H": ..}`.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct LevelCounts {
    #[serde(rename = "G")]
    pub general: u64,
    #[serde(rename = "M")]
    pub medium: u64,
    #[serde(rename = "H")]
    pub high: u64,
}

impl LevelCounts {
    pub fn add(&mut self, level: SdLevel) {
        match level {
            SdLevel::General => self.general += 1,
            SdLevel::Medium => self.medium += 1,
            SdLevel::High => self.high += 1,
        }
    }

    pub fn get(&self, level: SdLevel) -> u64 {
        self.as_array()[level.index()]
    }

    pub fn as_array(&self) -> [u64; 3] {
        [self.general, self.medium, self.high]
    }

    pub fn total(&self) -> u64 {
        self.as_array().iter().sum()
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SystemCounts {
    pub system: String,
    pub counts: LevelCounts,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "status", rename_all = "snake_case")]
pub enum Statistics {
    Ok(ChiSquareResult),
    Degenerate { reason: String },
}

impl Statistics {
    pub fn compute(systems: &[SystemCounts], yates: bool) -> Self {
        let table = ContingencyTable::from_level_counts(
            systems.iter().map(|s| (s.system.clone(), s.counts.as_array())),
        );
        match table.and_then(|t| chi_square_with(&t, ChiSquareOptions { yates })) {
            Ok(result) => Statistics::Ok(result),
            Err(e) => Statistics::Degenerate {
                reason: e.to_string(),
            },
        }
    }

    pub fn result(&self) -> Option<&ChiSquareResult> {
        match self {
            Statistics::Ok(r) => Some(r),
            Statistics::Degenerate { .. } => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentReport {
    pub dataset: String,
    pub prompt_count: usize,
    pub target: SdLevel,
    pub not_found: usize,
    pub not_found_policy: NotFoundPolicy,
    pub systems: Vec<SystemCounts>,
    pub yates: bool,
    pub statistics: Statistics,
    pub lexicon_version: String,
    pub config: serde_json::Value,
    pub records: Vec<PromptRecord>,
}

impl ExperimentReport {
    pub fn build(
        dataset: String,
        target: SdLevel,
        policy: NotFoundPolicy,
        yates: bool,
        lexicon_version: String,
        config: serde_json::Value,
        records: Vec<PromptRecord>,
    ) -> Self {
        let mut vanilla = LevelCounts::default();
        let mut sdea = LevelCounts::default();
        let mut not_found = 0;
        for record in &records {
            vanilla.add(record.vanilla.level);
            if record.enhanced.is_none() {
                not_found += 1;
            }
            if let Some(level) = record.sdea_level(policy) {
                sdea.add(level);
            }
        }
        let systems = vec![
            SystemCounts {
                system: VANILLA.into(),
                counts: vanilla,
            },
            SystemCounts {
                system: SDEA.into(),
                counts: sdea,
            },
        ];
        let statistics = Statistics::compute(&systems, yates);
        Self {
            dataset,
            prompt_count: records.len(),
            target,
            not_found,
            not_found_policy: policy,
            systems,
            yates,
            statistics,
            lexicon_version,
            config,
            records,
        }
    }

    pub fn counts(&self, system: &str) -> Option<&LevelCounts> {
        self.systems
            .iter()
            .find(|s| s.system == system)
            .map(|s| &s.counts)
    }

    /// Share of `system`'s counted responses at `level`.
    pub fn proportion(&self, system: &str, level: SdLevel) -> Option<f64> {
        let c = self.counts(system)?;
        (c.total() > 0).then(|| c.get(level) as f64 / c.total() as f64)
    }

    /// Chi-square recomputed from the embedded counts.
    pub fn recompute_statistics(&self) -> Statistics {
        Statistics::compute(&self.systems, self.yates)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }

    pub fn records_json(&self) -> String {
        serde_json::to_string(&self.records).expect("records serialize")
    }

    pub fn to_csv(&self) -> Result<String, csv::Error> {
        records_csv(&self.records)
    }

    /// Human-readable summary table.
    pub fn render_table(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(
            out,
            "dataset: {}  prompts: {}  target: {}  lexicon: {}",
            self.dataset, self.prompt_count, self.target, self.lexicon_version
        );
        let _ = writeln!(out, "{:<10}{:>8}{:>8}{:>8}{:>8}", "system", "G", "M", "H", "total");
        for s in &self.systems {
            let c = s.counts;
            let _ = writeln!(
                out,
                "{:<10}{:>8}{:>8}{:>8}{:>8}",
                s.system,
                c.general,
                c.medium,
                c.high,
                c.total()
            );
        }
        let policy = match self.not_found_policy {
            NotFoundPolicy::Fallback => "vanilla level counted for sdea",
            NotFoundPolicy::Exclude => "excluded from sdea",
        };
        let _ = writeln!(out, "not found: {} ({policy})", self.not_found);
        match &self.statistics {
            Statistics::Ok(r) => {
                let _ = writeln!(
                    out,
                    "chi-square = {:.4}, dof = {}, {}",
                    r.statistic,
                    r.dof,
                    format_p(r.p_value)
                );
            }
            Statistics::Degenerate { reason } => {
                let _ = writeln!(out, "chi-square: not computed ({reason})");
            }
        }
        out
    }

    /// Writes whichever outputs are configured.
    pub fn persist(&self, output: &OutputSection) -> Result<(), ExperimentError> {
        let write = |path: &Path, content: &str| {
            write_file(path, content).map_err(|source| ExperimentError::Io {
                path: path.display().to_string(),
                source,
            })
        };
        if let Some(path) = &output.report {
            write(path, &self.to_json())?;
        }
        if let Some(path) = &output.table {
            write(path, &self.render_table())?;
        }
        if let Some(path) = &output.csv {
            let csv = self.to_csv().map_err(|e| ExperimentError::Io {
                path: path.display().to_string(),
                source: std::io::Error::other(e),
            })?;
            write(path, &csv)?;
        }
        Ok(())
    }
}

/// "p < 0.001" below the display threshold, four decimals otherwise.
pub fn format_p(p: f64) -> String {
    if p < 0.001 {
        "p < 0.001".to_string()
    } else {
        format!("p = {p:.4}")
    }
}

pub fn records_csv(records: &[PromptRecord]) -> Result<String, csv::Error> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record([
        "conv_id",
        "turn",
        "prompt",
        "vanilla_text",
        "vanilla_level",
        "enhanced_text",
        "enhanced_level",
        "enhanced_index",
        "candidates",
        "not_found",
    ])?;
    for r in records {
        let (text, level, index) = match &r.enhanced {
            Some(e) => (e.text.as_str(), e.level.as_str(), e.index.to_string()),
            None => ("", "", String::new()),
        };
        w.write_record([
            r.conv_id.as_str(),
            &r.turn.to_string(),
            &r.prompt,
            &r.vanilla.text,
            r.vanilla.level.as_str(),
            text,
            level,
            &index,
            &r.candidates.to_string(),
            if r.enhanced.is_none() { "true" } else { "false" },
        ])?;
    }
    let bytes = w.into_inner().map_err(|e| e.into_error())?;
    Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
}

pub fn checkpoint_path(report: &Path) -> PathBuf {
    let mut name = report
        .file_name()
        .map(|n| n.to_os_string())
        .unwrap_or_else(|| "report".into());
    name.push(".partial.json");
    report.with_file_name(name)
}

#[derive(Serialize)]
struct Checkpoint<'a> {
    failed_index: usize,
    error: String,
    completed: &'a [PromptRecord],
}

pub fn write_checkpoint(path: &Path, failure: &RunFailure) -> std::io::Result<()> {
    let body = Checkpoint {
        failed_index: failure.index,
        error: failure.error.to_string(),
        completed: &failure.completed,
    };
    write_file(path, &serde_json::to_string_pretty(&body).expect("checkpoint serializes"))
}

fn write_file(path: &Path, content: &str) -> std::io::Result<()> {
    if let Some(parent) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
        std::fs::create_dir_all(parent)?;
    }
    std::fs::write(path, content)
}
