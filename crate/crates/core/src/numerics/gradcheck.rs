//! Finite-difference verification of analytic gradients.
//!
//! Every backward pass in this crate is hand-derived; this harness is the
//! independent check. It perturbs each parameter coordinate by +/- h,
//! recomputes the loss, and compares the central difference against the
//! gradient the backward pass produced.

use super::{NumericsError, Parameters};

#[derive(Debug, Clone)]
pub struct GradCheckReport {
    pub coords_checked: usize,
    pub max_rel_err: f64,
    pub worst_slot: Option<String>,
    pub worst_coord: usize,
    pub tol: f64,
    pub pass: bool,
}

/// Checks analytic gradients against central finite differences.
///
/// `loss_and_grad` must be deterministic: it recomputes the loss for the
/// current parameter values and leaves the full analytic gradient in the
/// slots. Relative error per coordinate is |a - n| / max(|a|, |n|, 1e-6),
/// which behaves like absolute error where both gradients vanish.
pub fn grad_check<M, F>(
    model: &mut M,
    mut loss_and_grad: F,
    h: f64,
    tol: f64,
) -> Result<GradCheckReport, NumericsError>
where
    M: Parameters,
    F: FnMut(&mut M) -> Result<f64, NumericsError>,
{
    let base_loss = loss_and_grad(model)?;
    if !base_loss.is_finite() {
        return Err(NumericsError::NonFinite {
            context: "grad_check loss".to_string(),
        });
    }
    let analytic: Vec<(String, Vec<f64>)> = model
        .param_slots()
        .iter()
        .map(|s| (s.name.clone(), s.grad.data().to_vec()))
        .collect();

    let mut report = GradCheckReport {
        coords_checked: 0,
        max_rel_err: 0.0,
        worst_slot: None,
        worst_coord: 0,
        tol,
        pass: true,
    };

    let n_slots = analytic.len();
    for slot_idx in 0..n_slots {
        let n_coords = analytic[slot_idx].1.len();
        for coord in 0..n_coords {
            let original = model.param_slots()[slot_idx].value.data()[coord];

            model.param_slots_mut()[slot_idx].value.data_mut()[coord] = original + h;
            let loss_plus = loss_and_grad(model)?;
            model.param_slots_mut()[slot_idx].value.data_mut()[coord] = original - h;
            let loss_minus = loss_and_grad(model)?;
            model.param_slots_mut()[slot_idx].value.data_mut()[coord] = original;

            let numeric = (loss_plus - loss_minus) / (2.0 * h);
            let a = analytic[slot_idx].1[coord];
            let denom = a.abs().max(numeric.abs()).max(1e-6);
            let rel = (a - numeric).abs() / denom;
            report.coords_checked += 1;
            if rel > report.max_rel_err {
                report.max_rel_err = rel;
                report.worst_slot = Some(analytic[slot_idx].0.clone());
                report.worst_coord = coord;
            }
        }
    }
    // Leave the analytic gradients for the unperturbed values in place.
    loss_and_grad(model)?;
    report.pass = report.max_rel_err <= tol;
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::{ParamSlot, Tensor};

    struct Quadratic {
        x: ParamSlot,
    }

    impl Parameters for Quadratic {
        fn param_slots(&self) -> Vec<&ParamSlot> {
            vec![&self.x]
        }
        fn param_slots_mut(&mut self) -> Vec<&mut ParamSlot> {
            vec![&mut self.x]
        }
    }

    #[test]
    fn quadratic_gradient_verified() {
        let mut model = Quadratic {
            x: ParamSlot::new("x", Tensor::vector(vec![3.0]).unwrap()),
        };
        let report = grad_check(
            &mut model,
            |m| {
                let x = m.x.value.data()[0];
                m.x.grad.data_mut()[0] = 2.0 * x;
                Ok(x * x)
            },
            1e-5,
            1e-7,
        )
        .unwrap();
        assert!(report.pass, "max rel err {}", report.max_rel_err);
        // The central difference itself should be ~6 at x=3.
        assert!((model.x.grad.data()[0] - 6.0).abs() < 1e-9);
    }

    #[test]
    fn constant_function_has_zero_gradients() {
        let mut model = Quadratic {
            x: ParamSlot::new("x", Tensor::vector(vec![1.5]).unwrap()),
        };
        let report = grad_check(
            &mut model,
            |m| {
                m.x.grad.data_mut()[0] = 0.0;
                Ok(7.0)
            },
            1e-5,
            1e-8,
        )
        .unwrap();
        assert!(report.pass);
        assert_eq!(report.max_rel_err, 0.0);
    }

    #[test]
    fn wrong_gradient_is_caught() {
        let mut model = Quadratic {
            x: ParamSlot::new("x", Tensor::vector(vec![2.0]).unwrap()),
        };
        let report = grad_check(
            &mut model,
            |m| {
                let x = m.x.value.data()[0];
                m.x.grad.data_mut()[0] = 3.0 * x; // deliberately wrong
                Ok(x * x)
            },
            1e-5,
            1e-4,
        )
        .unwrap();
        assert!(!report.pass);
    }

    #[test]
    fn nonfinite_loss_is_an_error() {
        let mut model = Quadratic {
            x: ParamSlot::new("x", Tensor::vector(vec![0.0]).unwrap()),
        };
        let err = grad_check(&mut model, |_| Ok(f64::NAN), 1e-5, 1e-4);
        assert!(err.is_err());
    }
}
