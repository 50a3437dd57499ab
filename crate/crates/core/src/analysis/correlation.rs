//! Point-biserial correlation between binary labels and feature values.

use super::AnalysisError;
use crate::baselines::FeatureExtractor;
use crate::corpus::{Label, LabeledInstance};

/// Point-biserial correlation coefficient:
/// r = ((M1 - M0) / s_n) * sqrt(p * q), with s_n the population standard
/// deviation of all values, M1/M0 the group means, and p/q the group
/// proportions. Equals the Pearson correlation with labels coded 0/1.
pub fn point_biserial(labels: &[bool], values: &[f64]) -> Result<f64, AnalysisError> {
    if labels.len() != values.len() || labels.is_empty() {
        return Err(AnalysisError::BadInput(format!(
            "need matching non-empty labels/values, got {}/{}",
            labels.len(),
            values.len()
        )));
    }
    if values.iter().any(|v| !v.is_finite()) {
        return Err(AnalysisError::BadInput("non-finite feature value".into()));
    }
    let n = labels.len() as f64;
    let n1 = labels.iter().filter(|&&l| l).count() as f64;
    let n0 = n - n1;
    if n1 == 0.0 || n0 == 0.0 {
        return Err(AnalysisError::UndefinedCorrelation(
        "labels contain a single class".into(),
        ));
    }
    let mean = values.iter().sum::<f64>() / n;
    let var = values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / n;
    if var == 0.0 {
        return Err(AnalysisError::UndefinedCorrelation(
            "values are constant".into(),
        ));
    }
    let sd = var.sqrt();
    let m1 = labels
        .iter()
        .zip(values)
        .filter(|(l, _)| **l)
        .map(|(_, v)| v)
        .sum::<f64>()
        / n1;
    let m0 = labels
        .iter()
        .zip(values)
        .filter(|(l, _)| !**l)
        .map(|(_, v)| v)
        .sum::<f64>()
        / n0;
    let p = n1 / n;
    let q = n0 / n;
    Ok(((m1 - m0) / sd) * (p * q).sqrt())
}

/// Features ranked by correlation magnitude. Columns with an undefined
/// correlation (constant values) are listed in `omitted`.
#[derive(Debug, Clone)]
pub struct CorrelationReport {
    pub features: Vec<(String, f64)>,
    pub omitted: Vec<String>,
}

/// Correlates every feature column the extractor produces against the
/// binary citation-need label, sorted by |r| descending.
pub fn correlate_features(
    instances: &[LabeledInstance],
    extractor: &FeatureExtractor,
) -> Result<CorrelationReport, AnalysisError> {
    if instances.is_empty() {
        return Err(AnalysisError::BadInput("no instances".into()));
    }
    let labels: Vec<bool> = instances
        .iter()
        .map(|i| i.label == Label::Positive)
        .collect();
    let names = extractor.names();
    let matrix: Vec<Vec<f64>> = instances
        .iter()
        .map(|i| extractor.extract(&i.statement).values)
        .collect();
    let mut features = Vec::new();
    let mut omitted = Vec::new();
    for (col, name) in names.iter().enumerate() {
        let column: Vec<f64> = matrix.iter().map(|row| row[col]).collect();
        match point_biserial(&labels, &column) {
            Ok(r) => features.push((name.clone(), r)),
            Err(AnalysisError::UndefinedCorrelation(_)) => omitted.push(name.clone()),
            Err(e) => return Err(e),
        }
    }
    features.sort_by(|a, b| {
        b.1.abs()
            .partial_cmp(&a.1.abs())
            .unwrap_or(std::cmp::Ordering::Equal)
            .then_with(|| a.0.cmp(&b.0))
    });
    Ok(CorrelationReport { features, omitted })
}

pub fn correlation_to_csv(report: &CorrelationReport) -> String {
    let mut out = String::from("feature,r_pb\n");
    for (name, r) in &report.features {
        out.push_str(&format!("{name},{r:.6}\n"));
    }
    for name in &report.omitted {
        out.push_str(&format!("{name},omitted (constant)\n"));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::rng::SplitMix64;

    // Independent Pearson implementation used as the oracle.
    fn pearson(x: &[f64], y: &[f64]) -> f64 {
        let n = x.len() as f64;
        let mx = x.iter().sum::<f64>() / n;
        let my = y.iter().sum::<f64>() / n;
        let cov = x
            .iter()
            .zip(y)
            .map(|(a, b)| (a - mx) * (b - my))
            .sum::<f64>();
        let vx = x.iter().map(|a| (a - mx) * (a - mx)).sum::<f64>();
        let vy = y.iter().map(|b| (b - my) * (b - my)).sum::<f64>();
        cov / (vx.sqrt() * vy.sqrt())
    }

    #[test]
    fn worked_example() {
        let labels = [true, true, false, false];
        let values = [1.0, 0.0, 0.0, 0.0];
        let r = point_biserial(&labels, &values).unwrap();
        assert!((r - 0.5774).abs() < 1e-4, "r = {r}");
        let coded: Vec<f64> = labels.iter().map(|&l| if l { 1.0 } else { 0.0 }).collect();
        assert!((r - pearson(&coded, &values)).abs() < 1e-12);
    }

    #[test]
    fn equal_group_means_give_zero() {
        let labels = [true, false, true, false];
        let values = [2.0, 2.0, 4.0, 4.0];
        let r = point_biserial(&labels, &values).unwrap();
        assert!(r.abs() < 1e-12);
    }

    #[test]
    fn matches_pearson_on_random_inputs() {
        let mut rng = SplitMix64::new(17);
        for _ in 0..200 {
            let n = 4 + rng.below(40);
            let mut labels: Vec<bool> = (0..n).map(|_| rng.below(2) == 1).collect();
            labels[0] = true;
            labels[1] = false;
            let values: Vec<f64> = (0..n).map(|_| rng.uniform(-50.0, 50.0)).collect();
            let r = point_biserial(&labels, &values).unwrap();
            let coded: Vec<f64> = labels.iter().map(|&l| if l { 1.0 } else { 0.0 }).collect();
            let expected = pearson(&coded, &values);
            assert!((r - expected).abs() < 1e-12);
            assert!((-1.0..=1.0).contains(&r));
        }
    }

    #[test]
    fn affine_transform_scales_sign_only() {
        let mut rng = SplitMix64::new(23);
        let labels: Vec<bool> = (0..30).map(|i| i % 2 == 0).collect();
        let values: Vec<f64> = (0..30).map(|_| rng.uniform(-5.0, 5.0)).collect();
        let r = point_biserial(&labels, &values).unwrap();
        for (a, b) in [(2.5, 1.0), (-3.0, 4.0), (0.1, -7.0)] {
            let transformed: Vec<f64> = values.iter().map(|v| a * v + b).collect();
            let rt = point_biserial(&labels, &transformed).unwrap();
            assert!((rt - a.signum() * r).abs() < 1e-10, "a={a} b={b}");
        }
    }

    #[test]
    fn degenerate_inputs_error() {
        assert!(matches!(
            point_biserial(&[true, true], &[1.0, 2.0]),
            Err(AnalysisError::UndefinedCorrelation(_))
        ));
        assert!(matches!(
            point_biserial(&[true, false], &[3.0, 3.0]),
            Err(AnalysisError::UndefinedCorrelation(_))
        ));
        assert!(point_biserial(&[], &[]).is_err());
    }
}
