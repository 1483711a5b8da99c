use std::collections::HashSet;

use serde::{Deserialize, Serialize};

use super::StatsError;
use crate::classifier::SdLevel;

/// System × category count matrix.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ContingencyTable {
    row_labels: Vec<String>,
    col_labels: Vec<String>,
    counts: Vec<Vec<u64>>,
}

impl ContingencyTable {
    /// Validates shape: at least 2×2, labels match the matrix, and every row
    /// has a positive total. Zero-total columns are allowed here and dropped
    /// by the test itself.
    pub fn new(
        row_labels: Vec<String>,
        col_labels: Vec<String>,
        counts: Vec<Vec<u64>>,
    ) -> Result<Self, StatsError> {
        let invalid = |msg: String| Err(StatsError::InvalidTable(msg));
        if row_labels.len() < 2 || col_labels.len() < 2 {
            return invalid(format!(
                "need at least 2 rows and 2 columns, got {}x{}",
                row_labels.len(),
                col_labels.len()
            ));
        }
        if counts.len() != row_labels.len() {
            return invalid(format!(
                "{} row labels for {} rows",
                row_labels.len(),
                counts.len()
            ));
        }
        if let Some((i, row)) = counts
            .iter()
            .enumerate()
            .find(|(_, r)| r.len() != col_labels.len())
        {
            return invalid(format!(
                "row {i} has {} cells, expected {}",
                row.len(),
                col_labels.len()
            ));
        }
        if let Some(i) = counts.iter().position(|r| r.iter().sum::<u64>() == 0) {
            return invalid(format!("row {:?} has a zero total", row_labels[i]));
        }
        Ok(Self {
            row_labels,
            col_labels,
            counts,
        })
    }

    /// Table with one row per system and the G, M, H columns.
    pub fn from_level_counts<S: Into<String>>(
        rows: impl IntoIterator<Item = (S, [u64; 3])>,
    ) -> Result<Self, StatsError> {
        let (labels, counts): (Vec<String>, Vec<Vec<u64>>) = rows
            .into_iter()
            .map(|(label, c)| (label.into(), c.to_vec()))
            .unzip();
        Self::new(labels, level_labels(), counts)
    }

    pub fn row_labels(&self) -> &[String] {
        &self.row_labels
    }

    pub fn col_labels(&self) -> &[String] {
        &self.col_labels
    }

    pub fn counts(&self) -> &[Vec<u64>] {
        &self.counts
    }

    pub fn row_totals(&self) -> Vec<u64> {
        self.counts.iter().map(|r| r.iter().sum()).collect()
    }

    pub fn col_totals(&self) -> Vec<u64> {
        (0..self.col_labels.len())
            .map(|j| self.counts.iter().map(|r| r[j]).sum())
            .collect()
    }

    pub fn grand_total(&self) -> u64 {
        self.row_totals().iter().sum()
    }
}

fn level_labels() -> Vec<String> {
    SdLevel::ALL.iter().map(|l| l.as_str().to_string()).collect()
}

/// Counts how often each level occurs per system. Columns are always G, M, H;
/// rows keep the input order.
pub fn tabulate<S, L>(
    observations: impl IntoIterator<Item = (S, L)>,
) -> Result<ContingencyTable, StatsError>
where
    S: Into<String>,
    L: AsRef<[SdLevel]>,
{
    let mut seen = HashSet::new();
    let mut rows = Vec::new();
    for (name, levels) in observations {
        let name = name.into();
        let levels = levels.as_ref();
        if levels.is_empty() {
            return Err(StatsError::EmptySystem(name));
        }
        if !seen.insert(name.clone()) {
            return Err(StatsError::DuplicateSystem(name));
        }
        let mut counts = [0u64; 3];
        for level in levels {
            counts[level.index()] += 1;
        }
        rows.push((name, counts));
    }
    if rows.len() < 2 {
        return Err(StatsError::TooFewSystems(rows.len()));
    }
    ContingencyTable::from_level_counts(rows)
}
