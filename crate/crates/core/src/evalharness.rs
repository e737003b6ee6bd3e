//! Scoring predicted change points against ground truth: tolerance
//! matching, F1 at a prediction budget, F1 averaged over budgets, and
//! timing error.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lad::{top_change_points, PredictionCount};
use crate::scalar::Scalar;

/// One-to-one matching of predictions to truths within `tol`, greedy by
/// distance with ties to the earlier truth (then earlier prediction).
/// Returns `(prediction index, truth index)` pairs.
pub fn match_predictions(pred: &[i64], truth: &[i64], tol: u32) -> Vec<(usize, usize)> {
    let tol = i64::from(tol);
    let mut candidates: Vec<(i64, usize, usize)> = Vec::new();
    for (i, &p) in pred.iter().enumerate() {
        for (j, &g) in truth.iter().enumerate() {
            let d = (p - g).abs();
            if d <= tol {
                candidates.push((d, j, i));
            }
        }
    }
    candidates.sort_unstable_by_key(|&(d, j, i)| (d, truth[j], j, pred[i], i));
    let mut used_pred = vec![false; pred.len()];
    let mut used_truth = vec![false; truth.len()];
    let mut out = Vec::new();
    for (_, j, i) in candidates {
        if !used_pred[i] && !used_truth[j] {
            used_pred[i] = true;
            used_truth[j] = true;
            out.push((i, j));
        }
    }
    out
}

pub fn f1_score(pred: &[i64], truth: &[i64], tol: u32) -> Result<f64> {
    if truth.is_empty() {
        return Err(Error::Domain("F1 needs at least one true change point".into()));
    }
    let matches = match_predictions(pred, truth, tol).len() as f64;
    if matches == 0.0 {
        return Ok(0.0);
    }
    let precision = matches / pred.len() as f64;
    let recall = matches / truth.len() as f64;
    Ok(2.0 * precision * recall / (precision + recall))
}

/// Times of the top-ranked change scores.
pub fn predicted_times<S: Scalar>(z_hat: &[S], times: &[i64], how_many: PredictionCount) -> Result<Vec<i64>> {
    if z_hat.len() != times.len() {
        return Err(Error::DimensionMismatch {
            expected: times.len(),
            found: z_hat.len(),
        });
    }
    Ok(top_change_points(z_hat, how_many)?.into_iter().map(|i| times[i]).collect())
}

pub fn f1_at_fraction<S: Scalar>(
    z_hat: &[S],
    times: &[i64],
    truth: &[i64],
    how_many: PredictionCount,
    tol: u32,
) -> Result<f64> {
    f1_score(&predicted_times(z_hat, times, how_many)?, truth, tol)
}

/// 3%, 4%, …, 15%.
pub fn default_fraction_grid() -> Vec<f64> {
    (3..=15).map(|p| f64::from(p) / 100.0).collect()
}

pub fn average_f1_range<S: Scalar>(
    z_hat: &[S],
    times: &[i64],
    truth: &[i64],
    grid: &[f64],
    tol: u32,
) -> Result<f64> {
    if grid.is_empty() {
        return Err(Error::Domain("empty fraction grid".into()));
    }
    let mut sum = 0.0;
    for &f in grid {
        sum += f1_at_fraction(z_hat, times, truth, PredictionCount::Fraction(f), tol)?;
    }
    Ok(sum / grid.len() as f64)
}

/// Mean distance from each true change to its nearest prediction.
pub fn timing_error(pred: &[i64], truth: &[i64]) -> Result<f64> {
    if pred.is_empty() || truth.is_empty() {
        return Err(Error::Domain("timing error needs predictions and truths".into()));
    }
    let total: i64 = truth
        .iter()
        .map(|g| pred.iter().map(|p| (p - g).abs()).min().unwrap_or(0))
        .sum();
    Ok(total as f64 / truth.len() as f64)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalConfig {
    /// Budget of the headline F1 and the timing error.
    pub fraction: f64,
    /// Fixed-count alternative to `fraction`.
    pub count: usize,
    pub grid: Vec<f64>,
    pub tol: u32,
}

impl Default for EvalConfig {
    fn default() -> Self {
        Self {
            fraction: 0.03,
            count: 4,
            grid: default_fraction_grid(),
            tol: 2,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DatasetScores {
    pub f1_at_fraction: f64,
    pub avg_f1: f64,
    pub timing_error: f64,
    pub f1_at_count: f64,
    pub timing_error_at_count: f64,
}

/// Score one dataset. With no predictions the timing error falls back to
/// the series length as a worst case.
pub fn evaluate_dataset<S: Scalar>(
    z_hat: &[S],
    times: &[i64],
    truth: &[i64],
    config: &EvalConfig,
) -> Result<DatasetScores> {
    let worst = times.len() as f64;
    let timing = |pred: &[i64]| if pred.is_empty() { Ok(worst) } else { timing_error(pred, truth) };
    let by_fraction = predicted_times(z_hat, times, PredictionCount::Fraction(config.fraction))?;
    let by_count = predicted_times(z_hat, times, PredictionCount::Count(config.count))?;
    Ok(DatasetScores {
        f1_at_fraction: f1_score(&by_fraction, truth, config.tol)?,
        avg_f1: average_f1_range(z_hat, times, truth, &config.grid, config.tol)?,
        timing_error: timing(&by_fraction)?,
        f1_at_count: f1_score(&by_count, truth, config.tol)?,
        timing_error_at_count: timing(&by_count)?,
    })
}

/// Means over datasets of one method.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MethodSummary {
    pub method: String,
    pub datasets: usize,
    pub mean: DatasetScores,
}

pub fn summarize(method: &str, scores: &[DatasetScores]) -> Result<MethodSummary> {
    if scores.is_empty() {
        return Err(Error::Domain(format!("no evaluated datasets for method {method}")));
    }
    let n = scores.len() as f64;
    let mean = |f: fn(&DatasetScores) -> f64| scores.iter().map(f).sum::<f64>() / n;
    Ok(MethodSummary {
        method: method.to_string(),
        datasets: scores.len(),
        mean: DatasetScores {
            f1_at_fraction: mean(|s| s.f1_at_fraction),
            avg_f1: mean(|s| s.avg_f1),
            timing_error: mean(|s| s.timing_error),
            f1_at_count: mean(|s| s.f1_at_count),
            timing_error_at_count: mean(|s| s.timing_error_at_count),
        },
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn matching_examples() {
        assert_eq!(match_predictions(&[30], &[29], 2).len(), 1);
        assert_eq!(match_predictions(&[29, 31], &[30], 2).len(), 1);
        assert!(match_predictions(&[27], &[30], 2).is_empty());
        // nearest first: 31 takes 30 even though 29 comes first
        assert_eq!(match_predictions(&[28, 31], &[30], 2), vec![(1, 0)]);
        // equal distance: the earlier truth wins
        assert_eq!(match_predictions(&[31], &[30, 32], 2), vec![(0, 0)]);
    }

    #[test]
    fn f1_examples() {
        let truth = [30, 60, 90, 120];
        assert_eq!(f1_score(&truth, &truth, 2).unwrap(), 1.0);
        let half = f1_score(&[30, 60, 5, 140], &truth, 2).unwrap();
        // P = R = 2/4 → F1 = 2·¼/1
        assert!((half - 0.5).abs() < 1e-15);
        assert_eq!(f1_score(&[1, 2], &truth, 2).unwrap(), 0.0);
        assert!(f1_score(&[1], &[], 2).is_err());
    }

    #[test]
    fn timing_examples() {
        assert_eq!(timing_error(&[30, 60], &[30, 60]).unwrap(), 0.0);
        // 60 is nearest to 32 (28 away), not to 100
        assert_eq!(timing_error(&[32, 100], &[30, 60]).unwrap(), 15.0);
        assert_eq!(timing_error(&[32, 100], &[30, 80]).unwrap(), 11.0);
        assert_eq!(timing_error(&[30, 999], &[30]).unwrap(), 0.0);
        assert!(timing_error(&[], &[30]).is_err());
    }

    fn perfect_scores() -> (Vec<f64>, Vec<i64>) {
        let mut z = vec![0.0; 150];
        for (rank, t) in [30usize, 60, 90, 120].into_iter().enumerate() {
            z[t] = 1.0 - 0.1 * rank as f64;
        }
        (z, (0..150).collect())
    }

    #[test]
    fn average_over_grid() {
        let (z, times) = perfect_scores();
        let truth = [30, 60, 90, 120];
        // budgets ⌈p·1.5⌉ for p = 3..15 → 5,6,8,9,11,12,14,15,17,18,20,21,23
        let expected: f64 = [5, 6, 8, 9, 11, 12, 14, 15, 17, 18, 20, 21, 23]
            .iter()
            .map(|&k| {
                let p = 4.0 / k as f64;
                2.0 * p / (p + 1.0)
            })
            .sum::<f64>()
            / 13.0;
        let avg = average_f1_range(&z, &times, &truth, &default_fraction_grid(), 2).unwrap();
        assert!((avg - expected).abs() < 1e-12 && avg < 1.0);

        let single = average_f1_range(&z, &times, &truth, &[0.03], 2).unwrap();
        let direct = f1_at_fraction(&z, &times, &truth, PredictionCount::Fraction(0.03), 2).unwrap();
        assert_eq!(single, direct);

        let zero = vec![0.0; 150];
        assert_eq!(average_f1_range(&zero, &times, &truth, &default_fraction_grid(), 2).unwrap(), 0.0);
    }

    #[test]
    fn dataset_and_summary() {
        let (z, times) = perfect_scores();
        let truth = [30, 60, 90, 120];
        let s = evaluate_dataset(&z, &times, &truth, &EvalConfig::default()).unwrap();
        assert_eq!(s.f1_at_count, 1.0);
        assert!((s.f1_at_fraction - 2.0 * 0.8 / 1.8).abs() < 1e-12);
        assert_eq!(s.timing_error, 0.0);
        let summary = summarize("cb-gadget", &[s]).unwrap();
        assert_eq!(summary.mean, s);
        assert!(summarize("x", &[]).is_err());
    }
}
