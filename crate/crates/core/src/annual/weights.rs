use chrono::NaiveDate;
use serde::{Deserialize, Serialize};

use super::AnnualError;

/// Day counts used for month weights.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum YearLength {
    /// Common year of 365 days.
    #[default]
    Common,
    /// Actual day counts of each sample's year.
    Actual,
}

pub fn days_in_month(year: i32, month: u32) -> u32 {
    let first = NaiveDate::from_ymd_opt(year, month, 1).expect("valid month");
    let next = if month == 12 {
        NaiveDate::from_ymd_opt(year + 1, 1, 1)
    } else {
        NaiveDate::from_ymd_opt(year, month + 1, 1)
    }
    .expect("valid month");
    (next - first).num_days() as u32
}

fn is_leap(year: i32) -> bool {
    days_in_month(year, 2) == 29
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Weights {
    pub values: Vec<f64>,
    /// Months (1–12) without any sample; they contribute nothing.
    pub missing_months: Vec<u32>,
}

/// Weight of each sample so that every month counts with its share of the
/// year, split evenly among that month's samples.
pub fn sample_weights(tags: &[(i32, u32)], year_length: YearLength) -> Result<Weights, AnnualError> {
    let mut counts = [0usize; 12];
    for &(_, m) in tags {
        if !(1..=12).contains(&m) {
            return Err(AnnualError::InvalidInput(format!("month tag {m}")));
        }
        counts[m as usize - 1] += 1;
    }
    let missing_months: Vec<u32> = (1..=12).filter(|m| counts[*m as usize - 1] == 0).collect();
    if !missing_months.is_empty() {
        log::warn!("months without samples: {missing_months:?}");
    }
    let values = tags
        .iter()
        .map(|&(y, m)| {
            let (days, year) = match year_length {
                YearLength::Common => (if m == 2 { 28 } else { days_in_month(2001, m) }, 365),
                YearLength::Actual => (days_in_month(y, m), if is_leap(y) { 366 } else { 365 }),
            };
            days as f64 / year as f64 / counts[m as usize - 1] as f64
        })
        .collect();
    Ok(Weights {
        values,
        missing_months,
    })
}

/// Weighted annual mean.
pub fn annual_mean(values: &[f64], weights: &[f64]) -> Result<f64, AnnualError> {
    if values.len() != weights.len() {
        return Err(AnnualError::LengthMismatch {
            values: values.len(),
            weights: weights.len(),
        });
    }
    Ok(values.iter().zip(weights).map(|(v, w)| v * w).sum())
}
