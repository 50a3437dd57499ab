use super::Tensor;

/// A named parameter tensor paired with its gradient accumulator.
///
/// The gradient always has the same shape as the value and is zeroed at the
/// start of every batch by the training loops.
#[derive(Debug, Clone)]
pub struct ParamSlot {
    pub name: String,
    pub value: Tensor,
    pub grad: Tensor,
}

impl ParamSlot {
    pub fn new(name: impl Into<String>, value: Tensor) -> ParamSlot {
        let grad = Tensor::zeros(value.shape());
        ParamSlot {
            name: name.into(),
            value,
            grad,
        }
    }

    pub fn zero_grad(&mut self) {
        self.grad.fill(0.0);
    }
}

/// Anything that exposes its trainable parameters as a flat, stably ordered
/// slot list. The order must be identical across calls; the optimizer and
/// the gradient checker key their state by position.
pub trait Parameters {
    fn param_slots(&self) -> Vec<&ParamSlot>;
    fn param_slots_mut(&mut self) -> Vec<&mut ParamSlot>;

    fn zero_grads(&mut self) {
        for slot in self.param_slots_mut() {
            slot.zero_grad();
        }
    }

    fn param_count(&self) -> usize {
        self.param_slots().iter().map(|s| s.value.len()).sum()
    }
}
