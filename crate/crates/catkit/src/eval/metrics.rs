//! Metric implementations: accuracy, label ranking average precision,
//! label-weighted F1, ensembling, confusion matrices, split reports, and
//! per-seed medians.

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::eval::{LabelPartition, ScoreMatrix};

/// Fraction of instances whose prediction equals the (singleton) gold label.
pub fn accuracy(predictions: &[usize], golds: &[BTreeSet<usize>]) -> Result<f64> {
    if predictions.len() != golds.len() {
        return Err(Error::InvalidInput(format!(
            "{} predictions for {} gold sets",
            predictions.len(),
            golds.len()
        )));
    }
    if golds.is_empty() {
        return Ok(0.0);
    }
    let mut correct = 0usize;
    for (prediction, gold) in predictions.iter().zip(golds) {
        if gold.len() != 1 {
            return Err(Error::InvalidInput(
                "accuracy requires singleton gold labels; use lrap or weighted_f1".into(),
            ));
        }
        if gold.contains(prediction) {
            correct += 1;
        }
    }
    Ok(correct as f64 / predictions.len() as f64)
}

/// Label ranking average precision.
///
/// For every instance and every gold label y, the fraction of labels scoring
/// at least f_y that are themselves gold, averaged over gold labels and then
/// over instances. Ties count through the >= comparisons on both sides.
/// Reaches 1 exactly when every gold label outranks every non-gold label.
pub fn lrap(scores: &ScoreMatrix, golds: &[BTreeSet<usize>]) -> Result<f64> {
    if scores.rows() != golds.len() {
        return Err(Error::InvalidInput(format!(
            "score matrix has {} rows for {} gold sets",
            scores.rows(),
            golds.len()
        )));
    }
    if golds.is_empty() {
        return Ok(0.0);
    }
    let mut total = 0.0;
    let mut sorted_desc: Vec<f64> = Vec::with_capacity(scores.cols());
    let mut gold_sorted: Vec<f64> = Vec::with_capacity(scores.cols());
    for (i, gold) in golds.iter().enumerate() {
        if gold.is_empty() {
            return Err(Error::InvalidInput(format!(
                "instance {i} has an empty gold set"
            )));
        }
        let row = scores.row(i);
        if gold.iter().any(|&y| y >= row.len()) {
            return Err(Error::InvalidInput(format!(
                "instance {i} has a gold label outside the score matrix"
            )));
        }
        // Counting |{j : f_j >= f_y}| via descending sort + partition point.
        sorted_desc.clear();
        sorted_desc.extend_from_slice(row);
        sorted_desc.sort_unstable_by(|a, b| b.total_cmp(a));
        gold_sorted.clear();
        gold_sorted.extend(gold.iter().map(|&y| row[y]));
        gold_sorted.sort_unstable_by(|a, b| b.total_cmp(a));

        let mut instance_sum = 0.0;
        for &y in gold {
            let threshold = row[y];
            let all_geq = sorted_desc.partition_point(|&v| v >= threshold);
            let gold_geq = gold_sorted.partition_point(|&v| v >= threshold);
            instance_sum += gold_geq as f64 / all_geq as f64;
        }
        total += instance_sum / gold.len() as f64;
    }
    Ok(total / golds.len() as f64)
}

/// Thresholded prediction sets for multi-label F1: labels scoring above
/// `tau`, falling back to the argmax label when nothing clears the bar.
pub fn threshold_predictions(scores: &ScoreMatrix, tau: f64) -> Vec<BTreeSet<usize>> {
    (0..scores.rows())
        .map(|i| {
            let row = scores.row(i);
            let mut set: BTreeSet<usize> = row
                .iter()
                .enumerate()
                .filter(|(_, &v)| v > tau)
                .map(|(j, _)| j)
                .collect();
            if set.is_empty() {
                set.insert(crate::eval::argmax_lowest(row));
            }
            set
        })
        .collect()
}

/// Label-wise weighted F1: per-label F1 over instances, averaged with
/// weights proportional to each label's gold support. Zero-support labels
/// are excluded from the average.
pub fn weighted_f1(
    predicted: &[BTreeSet<usize>],
    golds: &[BTreeSet<usize>],
    label_count: usize,
) -> Result<f64> {
    if predicted.len() != golds.len() {
        return Err(Error::InvalidInput(format!(
            "{} prediction sets for {} gold sets",
            predicted.len(),
            golds.len()
        )));
    }
    let mut tp = vec![0u64; label_count];
    let mut fp = vec![0u64; label_count];
    let mut fn_ = vec![0u64; label_count];
    for (pred, gold) in predicted.iter().zip(golds) {
        for &label in pred {
            if label >= label_count {
                return Err(Error::InvalidInput(format!(
                    "predicted label {label} outside 0..{label_count}"
                )));
            }
            if gold.contains(&label) {
                tp[label] += 1;
            } else {
                fp[label] += 1;
            }
        }
        for &label in gold {
            if label >= label_count {
                return Err(Error::InvalidInput(format!(
                    "gold label {label} outside 0..{label_count}"
                )));
            }
            if !pred.contains(&label) {
                fn_[label] += 1;
            }
        }
    }
    let mut weighted_sum = 0.0;
    let mut support_total = 0u64;
    for label in 0..label_count {
        let support = tp[label] + fn_[label];
        if support == 0 {
            continue;
        }
        let precision_den = tp[label] + fp[label];
        let precision = if precision_den == 0 {
            0.0
        } else {
            tp[label] as f64 / precision_den as f64
        };
        let recall = tp[label] as f64 / support as f64;
        let f1 = if precision + recall == 0.0 {
            0.0
        } else {
            2.0 * precision * recall / (precision + recall)
        };
        weighted_sum += support as f64 * f1;
        support_total += support;
    }
    if support_total == 0 {
        return Ok(0.0);
    }
    Ok(weighted_sum / support_total as f64)
}

/// Entrywise arithmetic mean of score matrices, summed left to right in the
/// order given.
pub fn ensemble_scores(matrices: &[ScoreMatrix]) -> Result<ScoreMatrix> {
    let first = matrices
        .first()
        .ok_or_else(|| Error::InvalidInput("cannot ensemble zero matrices".into()))?;
    let (rows, cols) = (first.rows(), first.cols());
    for m in matrices {
        if m.rows() != rows || m.cols() != cols {
            return Err(Error::InvalidInput(format!(
                "shape mismatch: {}x{} vs {rows}x{cols}",
                m.rows(),
                m.cols()
            )));
        }
    }
    let k = matrices.len() as f64;
    let mut data = vec![0.0; rows * cols];
    for m in matrices {
        for i in 0..rows {
            let row = m.row(i);
            let out = &mut data[i * cols..(i + 1) * cols];
            for (acc, &v) in out.iter_mut().zip(row) {
                *acc += v;
            }
        }
    }
    for v in &mut data {
        *v /= k;
    }
    ScoreMatrix::new(rows, cols, data)
}

/// Gold-by-predicted count matrix for single-label tasks; entry (g, p)
/// counts instances with gold g predicted p.
pub fn confusion_matrix(
    predictions: &[usize],
    golds: &[BTreeSet<usize>],
    label_count: usize,
) -> Result<Vec<u64>> {
    if predictions.len() != golds.len() {
        return Err(Error::InvalidInput(format!(
            "{} predictions for {} gold sets",
            predictions.len(),
            golds.len()
        )));
    }
    let mut counts = vec![0u64; label_count * label_count];
    for (&prediction, gold) in predictions.iter().zip(golds) {
        if gold.len() != 1 {
            return Err(Error::InvalidInput(
                "confusion matrix requires singleton gold labels".into(),
            ));
        }
        let g = *gold.first().unwrap();
        if g >= label_count || prediction >= label_count {
            return Err(Error::InvalidInput("label outside matrix bounds".into()));
        }
        counts[g * label_count + prediction] += 1;
    }
    Ok(counts)
}

/// Per-side accuracies of a seen/unseen label split. The classifier still
/// ranks the full label set; instances are grouped by which side their gold
/// label is on. A side with no instances reports `None`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SplitReport {
    pub seen: Option<f64>,
    pub unseen: Option<f64>,
    pub seen_instances: usize,
    pub unseen_instances: usize,
}

pub fn split_report(
    scores: &ScoreMatrix,
    golds: &[BTreeSet<usize>],
    partition: &LabelPartition,
) -> Result<SplitReport> {
    partition.validate(scores.cols())?;
    // Predictions rank the full label set with no additive bias toward
    // unseen labels; a boost, if ever wanted, would adjust the unseen
    // columns here before the argmax.
    let predictions = scores.argmax_predictions();
    let mut seen_correct = 0usize;
    let mut seen_total = 0usize;
    let mut unseen_correct = 0usize;
    let mut unseen_total = 0usize;
    for (i, gold) in golds.iter().enumerate() {
        if gold.len() != 1 {
            return Err(Error::InvalidInput(
                "split reports require singleton gold labels".into(),
            ));
        }
        let g = *gold.first().unwrap();
        let correct = predictions[i] == g;
        if partition.seen.contains(&g) {
            seen_total += 1;
            seen_correct += correct as usize;
        } else if partition.unseen.contains(&g) {
            unseen_total += 1;
            unseen_correct += correct as usize;
        } else {
            return Err(Error::InvalidInput(format!(
                "gold label {g} belongs to neither side of the partition"
            )));
        }
    }
    let ratio = |num: usize, den: usize| {
        if den == 0 {
            None
        } else {
            Some(num as f64 / den as f64)
        }
    };
    Ok(SplitReport {
        seen: ratio(seen_correct, seen_total),
        unseen: ratio(unseen_correct, unseen_total),
        seen_instances: seen_total,
        unseen_instances: unseen_total,
    })
}

/// Median and population standard deviation of per-seed metric values.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MedianReport {
    pub median: f64,
    pub stddev: f64,
}

pub fn median_report(values: &[f64]) -> Result<MedianReport> {
    if values.is_empty() {
        return Err(Error::InvalidInput("median of zero values".into()));
    }
    let mut sorted = values.to_vec();
    sorted.sort_unstable_by(f64::total_cmp);
    let n = sorted.len();
    let median = if n % 2 == 1 {
        sorted[n / 2]
    } else {
        (sorted[n / 2 - 1] + sorted[n / 2]) / 2.0
    };
    let mean = sorted.iter().sum::<f64>() / n as f64;
    let variance = sorted.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / n as f64;
    Ok(MedianReport {
        median,
        stddev: variance.sqrt(),
    })
}
