//! Deterministic numeric kernel: dense f64 tensors, activations, losses,
//! Adam, seeded RNG, and finite-difference gradient verification.
//!
//! There is no autodiff graph here. Layers derive their gradients by hand
//! and [`grad_check`] is the safety net that keeps them honest.

mod adam;
mod gradcheck;
mod ops;
mod param;
pub mod rng;
mod tensor;

use thiserror::Error;

pub use adam::{adam_step, AdamConfig, AdamState};
pub use gradcheck::{grad_check, GradCheckReport};
pub use ops::{
    binary_cross_entropy_from_prob, cross_entropy, sigmoid, sigmoid_scalar, softmax, tanh,
    PROB_FLOOR,
};
pub(crate) use ops::{sigmoid_slice, tanh_slice};
pub use param::{ParamSlot, Parameters};
pub use tensor::{identity, Tensor};

#[derive(Debug, Error)]
pub enum NumericsError {
    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),
    #[error("non-finite value in {context}")]
    NonFinite { context: String },
    #[error("softmax input is fully masked")]
    AllMasked,
    #[error("probability vector is not normalized (sum = {sum})")]
    Unnormalized { sum: f64 },
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
}
