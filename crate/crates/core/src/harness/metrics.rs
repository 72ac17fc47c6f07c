//! Confusion matrix and derived metrics. Spam is the positive class
//! everywhere.

use serde::{Deserialize, Serialize};

use crate::corpus::Label;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConfusionMatrix {
    pub tp: u64,
    pub tn: u64,
    pub fp: u64,
    #[serde(rename = "fn")]
    pub fn_: u64,
}

impl ConfusionMatrix {
    pub fn new(tp: u64, tn: u64, fp: u64, fn_: u64) -> Self {
        ConfusionMatrix { tp, tn, fp, fn_ }
    }

    pub fn total(&self) -> u64 {
        self.tp + self.tn + self.fp + self.fn_
    }
}

/// Accuracy, precision, recall and F1 as ratios in [0, 1]. A 0/0 ratio is
/// defined as 0 and flagged in `degenerate`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MetricsBundle {
    pub accuracy: f64,
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
    pub degenerate: bool,
}

/// Count prediction outcomes against ground truth, spam positive.
pub fn compute_confusion(predictions: &[Label], truth: &[Label]) -> Result<ConfusionMatrix> {
    if predictions.len() != truth.len() {
        return Err(Error::Validation(format!(
            "got {} predictions for {} labels",
            predictions.len(),
            truth.len()
        )));
    }
    let mut cm = ConfusionMatrix::default();
    for (&pred, &actual) in predictions.iter().zip(truth) {
        match (pred, actual) {
            (Label::Spam, Label::Spam) => cm.tp += 1,
            (Label::Ham, Label::Ham) => cm.tn += 1,
            (Label::Spam, Label::Ham) => cm.fp += 1,
            (Label::Ham, Label::Spam) => cm.fn_ += 1,
        }
    }
    Ok(cm)
}

pub fn compute_metrics(cm: &ConfusionMatrix) -> Result<MetricsBundle> {
    let total = cm.total();
    if total == 0 {
        return Err(Error::Validation(
            "cannot compute metrics for an empty evaluation".into(),
        ));
    }
    let mut degenerate = false;
    let mut ratio = |num: u64, denom: u64| -> f64 {
        if denom == 0 {
            degenerate = true;
            0.0
        } else {
            num as f64 / denom as f64
        }
    };
    let accuracy = (cm.tp + cm.tn) as f64 / total as f64;
    let precision = ratio(cm.tp, cm.tp + cm.fp);
    let recall = ratio(cm.tp, cm.tp + cm.fn_);
    let f1 = if precision + recall == 0.0 {
        degenerate = true;
        0.0
    } else {
        2.0 * precision * recall / (precision + recall)
    };
    Ok(MetricsBundle {
        accuracy,
        precision,
        recall,
        f1,
        degenerate,
    })
}
