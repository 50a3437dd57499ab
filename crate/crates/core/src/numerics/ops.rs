//! Elementwise activations, masked softmax, and cross-entropy.

use super::{NumericsError, Tensor};

pub fn sigmoid_scalar(x: f64) -> f64 {
    if x >= 0.0 {
        1.0 / (1.0 + (-x).exp())
    } else {
        let e = x.exp();
        e / (1.0 + e)
    }
}

/// Elementwise logistic sigmoid. Rejects non-finite input.
pub fn sigmoid(x: &Tensor) -> Result<Tensor, NumericsError> {
    x.validate_finite("sigmoid input")?;
    let data = x.data().iter().map(|&v| sigmoid_scalar(v)).collect();
    Tensor::from_vec(x.shape(), data)
}

/// Elementwise hyperbolic tangent. Rejects non-finite input.
pub fn tanh(x: &Tensor) -> Result<Tensor, NumericsError> {
    x.validate_finite("tanh input")?;
    let data = x.data().iter().map(|&v| v.tanh()).collect();
    Tensor::from_vec(x.shape(), data)
}

pub(crate) fn sigmoid_slice(x: &mut [f64]) {
    x.iter_mut().for_each(|v| *v = sigmoid_scalar(*v));
}

pub(crate) fn tanh_slice(x: &mut [f64]) {
    x.iter_mut().for_each(|v| *v = v.tanh());
}

/// Numerically stable softmax with an optional validity mask.
///
/// Masked-out entries (mask `false`) are exactly 0 in the output; the rest
/// are shifted by the running maximum before exponentiation and normalized
/// to sum to 1. Errors if every entry is masked or the input is non-finite.
pub fn softmax(x: &[f64], mask: Option<&[bool]>) -> Result<Vec<f64>, NumericsError> {
    if let Some(m) = mask {
        if m.len() != x.len() {
            return Err(NumericsError::ShapeMismatch(format!(
                "softmax mask length {} does not match input length {}",
                m.len(),
                x.len()
            )));
        }
    }
    if x.iter().any(|v| !v.is_finite()) {
        return Err(NumericsError::NonFinite {
            context: "softmax input".to_string(),
        });
    }
    let keep = |i: usize| mask.map_or(true, |m| m[i]);
    let mut max = f64::NEG_INFINITY;
    for (i, &v) in x.iter().enumerate() {
        if keep(i) && v > max {
            max = v;
        }
    }
    if max == f64::NEG_INFINITY {
        return Err(NumericsError::AllMasked);
    }
    let mut out = vec![0.0; x.len()];
    let mut sum = 0.0;
    for (i, &v) in x.iter().enumerate() {
        if keep(i) {
            let e = (v - max).exp();
            out[i] = e;
            sum += e;
        }
    }
    for v in out.iter_mut() {
        *v /= sum;
    }
    Ok(out)
}

/// Floor applied to predicted probabilities inside the log.
pub const PROB_FLOOR: f64 = 1e-12;

/// Negative log-likelihood of `target` under the probability vector `pred`,
/// together with the gradient of the loss with respect to `pred`.
///
/// `pred` must be normalized (sum within 1e-6 of 1). The loss is clamped via
/// [`PROB_FLOOR`] so a zero probability yields a large finite loss.
pub fn cross_entropy(pred: &[f64], target: usize) -> Result<(f64, Vec<f64>), NumericsError> {
    if pred.is_empty() || target >= pred.len() {
        return Err(NumericsError::InvalidArgument(format!(
            "cross_entropy target {} out of range for {} classes",
            target,
            pred.len()
        )));
    }
    if pred.iter().any(|v| !v.is_finite()) {
        return Err(NumericsError::NonFinite {
            context: "cross_entropy prediction".to_string(),
        });
    }
    let sum: f64 = pred.iter().sum();
    if (sum - 1.0).abs() > 1e-6 {
        return Err(NumericsError::Unnormalized { sum });
    }
    let p = pred[target].max(PROB_FLOOR);
    let loss = -p.ln();
    let mut grad = vec![0.0; pred.len()];
    grad[target] = -1.0 / p;
    Ok((loss, grad))
}

/// Binary cross-entropy on a sigmoid probability, with the gradient taken
/// with respect to the pre-sigmoid logit (`p - t`).
pub fn binary_cross_entropy_from_prob(p: f64, positive: bool) -> Result<(f64, f64), NumericsError> {
    if !p.is_finite() || !(0.0..=1.0).contains(&p) {
        return Err(NumericsError::InvalidArgument(format!(
            "probability out of range: {p}"
        )));
    }
    let t = if positive { 1.0 } else { 0.0 };
    let loss = if positive {
        -p.max(PROB_FLOOR).ln()
    } else {
        -(1.0 - p).max(PROB_FLOOR).ln()
    };
    Ok((loss, p - t))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::rng::SplitMix64;

    #[test]
    fn sigmoid_at_zero() {
        let t = Tensor::vector(vec![0.0]).unwrap();
        assert_eq!(sigmoid(&t).unwrap().data()[0], 0.5);
    }

    #[test]
    fn tanh_at_zero() {
        let t = Tensor::vector(vec![0.0]).unwrap();
        assert_eq!(tanh(&t).unwrap().data()[0], 0.0);
    }

    #[test]
    fn sigmoid_symmetry() {
        let mut rng = SplitMix64::new(5);
        for _ in 0..200 {
            let x = rng.uniform(-30.0, 30.0);
            let s = sigmoid_scalar(x) + sigmoid_scalar(-x);
            assert!((s - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn sigmoid_rejects_nan() {
        let t = Tensor::zeros(&[1]);
        let mut bad = t.clone();
        bad.data_mut()[0] = f64::INFINITY;
        assert!(sigmoid(&bad).is_err());
    }

    #[test]
    fn softmax_uniform_cases() {
        let out = softmax(&[0.0, 0.0], None).unwrap();
        assert_eq!(out, vec![0.5, 0.5]);
        for c in [-40.0, 0.0, 17.5] {
            let out = softmax(&[c, c, c], None).unwrap();
            for v in out {
                assert!((v - 1.0 / 3.0).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn softmax_mask_forces_support() {
        let out = softmax(&[5.0, 9.0], Some(&[true, false])).unwrap();
        assert_eq!(out, vec![1.0, 0.0]);
    }

    #[test]
    fn softmax_all_masked_errors() {
        assert!(matches!(
            softmax(&[1.0, 2.0], Some(&[false, false])),
            Err(NumericsError::AllMasked)
        ));
    }

    #[test]
    fn softmax_sums_to_one_and_shift_invariant() {
        let mut rng = SplitMix64::new(41);
        for _ in 0..300 {
            let n = 1 + rng.below(12);
            let x: Vec<f64> = (0..n).map(|_| rng.uniform(-50.0, 50.0)).collect();
            let out = softmax(&x, None).unwrap();
            let sum: f64 = out.iter().sum();
            assert!((sum - 1.0).abs() <= 1e-12, "sum was {sum}");
            let shift = rng.uniform(-20.0, 20.0);
            let shifted: Vec<f64> = x.iter().map(|v| v + shift).collect();
            let out2 = softmax(&shifted, None).unwrap();
            for (a, b) in out.iter().zip(&out2) {
                assert!((a - b).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn cross_entropy_known_values() {
        let (loss, _) = cross_entropy(&[1.0, 0.0], 0).unwrap();
        assert!(loss.abs() < 1e-12);
        let (loss, _) = cross_entropy(&[0.5, 0.5], 0).unwrap();
        assert!((loss - std::f64::consts::LN_2).abs() < 1e-12);
    }

    #[test]
    fn cross_entropy_rejects_unnormalized() {
        assert!(matches!(
            cross_entropy(&[0.9, 0.9], 0),
            Err(NumericsError::Unnormalized { .. })
        ));
    }

    // Central-difference check of the analytic gradient of -log pred[target].
    #[test]
    fn cross_entropy_gradient_matches_finite_difference() {
        let pred = vec![0.2, 0.3, 0.5];
        let target = 1;
        let (_, grad) = cross_entropy(&pred, target).unwrap();
        let h = 1e-7;
        for i in 0..pred.len() {
            // Perturb one coordinate; skip renormalization and compare against
            // the raw functional form, which is what the gradient describes.
            let mut up = pred.clone();
            up[i] += h;
            let lp = -up[target].max(PROB_FLOOR).ln();
            let mut down = pred.clone();
            down[i] -= h;
            let lm = -down[target].max(PROB_FLOOR).ln();
            let numeric = (lp - lm) / (2.0 * h);
            let rel = (grad[i] - numeric).abs() / grad[i].abs().max(numeric.abs()).max(1.0);
            assert!(rel <= 1e-6, "coordinate {i}: {} vs {numeric}", grad[i]);
        }
    }

    #[test]
    fn binary_cross_entropy_gradient_form() {
        let (loss, g) = binary_cross_entropy_from_prob(0.5, true).unwrap();
        assert!((loss - std::f64::consts::LN_2).abs() < 1e-12);
        assert!((g - (-0.5)).abs() < 1e-12);
        let (_, g) = binary_cross_entropy_from_prob(0.25, false).unwrap();
        assert!((g - 0.25).abs() < 1e-12);
    }
}
