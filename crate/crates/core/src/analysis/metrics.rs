//! Classification metrics from confusion counts.

use serde::{Deserialize, Serialize};

use super::AnalysisError;

/// Per-class precision/recall/F1. `zero_division` marks classes whose
/// precision or recall had a zero denominator and was reported as 0.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassMetrics {
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
    pub support: usize,
    pub zero_division: bool,
}

/// Full evaluation report: per-class metrics, unweighted macro averages,
/// and the confusion matrix (`confusion[true][predicted]`).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvaluationReport {
    pub class_names: Vec<String>,
    pub per_class: Vec<ClassMetrics>,
    pub macro_precision: f64,
    pub macro_recall: f64,
    pub macro_f1: f64,
    pub accuracy: f64,
    pub confusion: Vec<Vec<usize>>,
    pub n_instances: usize,
}

/// Standard precision/recall/F1 from a square confusion matrix. Classes
/// with a zero denominator get metric 0 and a `zero_division` flag.
pub fn precision_recall_f1(
    confusion: &[Vec<usize>],
    class_names: &[String],
) -> Result<EvaluationReport, AnalysisError> {
    let k = confusion.len();
    if k == 0 || class_names.len() != k || confusion.iter().any(|row| row.len() != k) {
        return Err(AnalysisError::BadConfusion(format!(
            "need a square matrix with {} names, got {} rows",
            class_names.len(),
            k
        )));
    }
    let mut per_class = Vec::with_capacity(k);
    let mut correct = 0usize;
    let mut total = 0usize;
    for c in 0..k {
        let tp = confusion[c][c];
        let row_sum: usize = confusion[c].iter().sum();
        let col_sum: usize = (0..k).map(|r| confusion[r][c]).sum();
        correct += tp;
        total += row_sum;
        let mut zero_division = false;
        let precision = if col_sum == 0 {
            zero_division = true;
            0.0
        } else {
            tp as f64 / col_sum as f64
        };
        let recall = if row_sum == 0 {
            zero_division = true;
            0.0
        } else {
            tp as f64 / row_sum as f64
        };
        let f1 = if precision + recall == 0.0 {
            0.0
        } else {
            2.0 * precision * recall / (precision + recall)
        };
        per_class.push(ClassMetrics {
            precision,
            recall,
            f1,
            support: row_sum,
            zero_division,
        });
    }
    if total == 0 {
        return Err(AnalysisError::BadConfusion("empty confusion matrix".into()));
    }
    let kf = k as f64;
    Ok(EvaluationReport {
        class_names: class_names.to_vec(),
        macro_precision: per_class.iter().map(|m| m.precision).sum::<f64>() / kf,
        macro_recall: per_class.iter().map(|m| m.recall).sum::<f64>() / kf,
        macro_f1: per_class.iter().map(|m| m.f1).sum::<f64>() / kf,
        accuracy: correct as f64 / total as f64,
        per_class,
        confusion: confusion.to_vec(),
        n_instances: total,
    })
}

/// CSV rendering with one row per class plus a macro row.
pub fn report_to_csv(report: &EvaluationReport) -> String {
    let mut out = String::from("class,precision,recall,f1,support\n");
    for (name, m) in report.class_names.iter().zip(&report.per_class) {
        out.push_str(&format!(
            "{},{:.4},{:.4},{:.4},{}\n",
            name, m.precision, m.recall, m.f1, m.support
        ));
    }
    out.push_str(&format!(
        "macro,{:.4},{:.4},{:.4},{}\n",
        report.macro_precision, report.macro_recall, report.macro_f1, report.n_instances
    ));
    out
}
