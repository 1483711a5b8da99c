use num_traits::Float;
use serde::{Deserialize, Serialize};

use super::{lit, regularized_upper_gamma, ContingencyTable, StatsError};

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ChiSquareOptions {
    /// Yates continuity correction, applied only when dof = 1.
    pub yates: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChiSquareResult<T> {
    pub statistic: T,
    pub dof: usize,
    pub p_value: T,
    /// Labels of the columns that entered the test.
    pub retained_columns: Vec<String>,
}

/// Pearson's chi-square test of independence without continuity correction.
pub fn chi_square<T: Float>(table: &ContingencyTable) -> Result<ChiSquareResult<T>, StatsError> {
    chi_square_with(table, ChiSquareOptions::default())
}

/// Columns with a zero total are dropped first; the test fails with
/// [`StatsError::Degenerate`] when fewer than two remain.
pub fn chi_square_with<T: Float>(
    table: &ContingencyTable,
    options: ChiSquareOptions,
) -> Result<ChiSquareResult<T>, StatsError> {
    let col_totals = table.col_totals();
    let keep: Vec<usize> = (0..col_totals.len())
        .filter(|&j| col_totals[j] > 0)
        .collect();
    if keep.len() < 2 {
        return Err(StatsError::Degenerate {
            retained: keep.len(),
        });
    }
    let rows = table.counts().len();
    let dof = (rows - 1) * (keep.len() - 1);

    let to_t = |v: u64| T::from(v).expect("count representable");
    let grand = to_t(table.grand_total());
    let correction = if options.yates && dof == 1 {
        lit::<T>(0.5)
    } else {
        T::zero()
    };

    let mut statistic = T::zero();
    for (row, row_total) in table.counts().iter().zip(table.row_totals()) {
        for &j in &keep {
            let expected = to_t(row_total) * to_t(col_totals[j]) / grand;
            let diff = ((to_t(row[j]) - expected).abs() - correction).max(T::zero());
            statistic = statistic + diff * diff / expected;
        }
    }

    let two = lit::<T>(2.0);
    let p_value = regularized_upper_gamma(lit::<T>(dof as f64) / two, statistic / two)?;
    Ok(ChiSquareResult {
        statistic,
        dof,
        p_value,
        retained_columns: keep
            .iter()
            .map(|&j| table.col_labels()[j].clone())
            .collect(),
    })
}
