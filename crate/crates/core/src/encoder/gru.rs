//! GRU cell and sequence runner with hand-derived backward passes.
//!
//! The cell computes, for input x_t and previous state h_{t-1}:
//!
//! ```text
//! z_t = sigmoid(W_z x_t + U_z h_{t-1} + b_z)            (update gate)
//! r_t = sigmoid(W_r x_t + U_r h_{t-1} + b_r)            (reset gate)
//! h~_t = tanh(W_h x_t + r_t * (U_h h_{t-1} + b_h))      (candidate)
//! h_t = (1 - z_t) * h_{t-1} + z_t * h~_t
//! ```
//!
//! Note the reset gate multiplies the bias as well as the recurrent term in
//! the candidate. Masked steps copy h_{t-1} through unchanged, so a padded
//! suffix never affects the states.

use super::EncoderError;
use crate::numerics::rng::SplitMix64;
use crate::numerics::{sigmoid_slice, tanh_slice, ParamSlot, Tensor};

/// The nine GRU parameter tensors. `w_*` are hidden x input, `u_*` are
/// hidden x hidden, `b_*` are hidden.
#[derive(Debug, Clone)]
pub struct GruParams {
    pub w_update: ParamSlot,
    pub u_update: ParamSlot,
    pub b_update: ParamSlot,
    pub w_reset: ParamSlot,
    pub u_reset: ParamSlot,
    pub b_reset: ParamSlot,
    pub w_cand: ParamSlot,
    pub u_cand: ParamSlot,
    pub b_cand: ParamSlot,
    input_dim: usize,
    hidden_dim: usize,
}

/// Uniform Glorot init: +/- sqrt(6 / (fan_in + fan_out)).
pub(crate) fn glorot(shape: &[usize], fan_in: usize, fan_out: usize, rng: &mut SplitMix64) -> Tensor {
    let bound = (6.0 / (fan_in + fan_out) as f64).sqrt();
    let data = (0..shape.iter().product::<usize>())
        .map(|_| rng.uniform(-bound, bound))
        .collect();
    Tensor::from_vec(shape, data).expect("finite init")
}

impl GruParams {
    pub fn init(prefix: &str, input_dim: usize, hidden_dim: usize, rng: &mut SplitMix64) -> GruParams {
        let w = |rng: &mut SplitMix64| glorot(&[hidden_dim, input_dim], input_dim, hidden_dim, rng);
        let u = |rng: &mut SplitMix64| glorot(&[hidden_dim, hidden_dim], hidden_dim, hidden_dim, rng);
        let b = || Tensor::zeros(&[hidden_dim]);
        GruParams {
            w_update: ParamSlot::new(format!("{prefix}.w_update"), w(rng)),
            u_update: ParamSlot::new(format!("{prefix}.u_update"), u(rng)),
            b_update: ParamSlot::new(format!("{prefix}.b_update"), b()),
            w_reset: ParamSlot::new(format!("{prefix}.w_reset"), w(rng)),
            u_reset: ParamSlot::new(format!("{prefix}.u_reset"), u(rng)),
            b_reset: ParamSlot::new(format!("{prefix}.b_reset"), b()),
            w_cand: ParamSlot::new(format!("{prefix}.w_cand"), w(rng)),
            u_cand: ParamSlot::new(format!("{prefix}.u_cand"), u(rng)),
            b_cand: ParamSlot::new(format!("{prefix}.b_cand"), b()),
            input_dim,
            hidden_dim,
        }
    }

    pub fn zeros(prefix: &str, input_dim: usize, hidden_dim: usize) -> GruParams {
        let mut rng = SplitMix64::new(0);
        let mut p = GruParams::init(prefix, input_dim, hidden_dim, &mut rng);
        for slot in p.slots_mut() {
            slot.value.fill(0.0);
        }
        p
    }

    pub fn input_dim(&self) -> usize {
        self.input_dim
    }

    pub fn hidden_dim(&self) -> usize {
        self.hidden_dim
    }

    pub fn slots(&self) -> Vec<&ParamSlot> {
        vec![
            &self.w_update,
            &self.u_update,
            &self.b_update,
            &self.w_reset,
            &self.u_reset,
            &self.b_reset,
            &self.w_cand,
            &self.u_cand,
            &self.b_cand,
        ]
    }

    pub fn slots_mut(&mut self) -> Vec<&mut ParamSlot> {
        vec![
            &mut self.w_update,
            &mut self.u_update,
            &mut self.b_update,
            &mut self.w_reset,
            &mut self.u_reset,
            &mut self.b_reset,
            &mut self.w_cand,
            &mut self.u_cand,
            &mut self.b_cand,
        ]
    }
}

/// Everything the backward pass needs from one forward step.
#[derive(Debug, Clone)]
pub struct GruStepCache {
    pub input: Vec<f64>,
    pub h_prev: Vec<f64>,
    pub update: Vec<f64>,
    pub reset: Vec<f64>,
    /// U_h h_{t-1} + b_h before the reset gate multiplies it.
    pub cand_recur: Vec<f64>,
    pub candidate: Vec<f64>,
    pub h: Vec<f64>,
    pub masked: bool,
}

fn check_dims(p: &GruParams, input: &[f64], h_prev: &[f64]) -> Result<(), EncoderError> {
    if input.len() != p.input_dim || h_prev.len() != p.hidden_dim {
        return Err(EncoderError::DimMismatch(format!(
            "gru expects input {} / hidden {}, got {} / {}",
            p.input_dim,
            p.hidden_dim,
            input.len(),
            h_prev.len()
        )));
    }
    Ok(())
}

pub(crate) fn gru_cell_forward(
    input: &[f64],
    h_prev: &[f64],
    p: &GruParams,
) -> Result<GruStepCache, EncoderError> {
    check_dims(p, input, h_prev)?;
    if input.iter().chain(h_prev).any(|v| !v.is_finite()) {
        return Err(EncoderError::NonFiniteInput("gru step"));
    }
    let h_dim = p.hidden_dim;

    let mut update = p.w_update.value.matvec(input);
    let uh = p.u_update.value.matvec(h_prev);
    for i in 0..h_dim {
        update[i] += uh[i] + p.b_update.value.data()[i];
    }
    sigmoid_slice(&mut update);

    let mut reset = p.w_reset.value.matvec(input);
    let rh = p.u_reset.value.matvec(h_prev);
    for i in 0..h_dim {
        reset[i] += rh[i] + p.b_reset.value.data()[i];
    }
    sigmoid_slice(&mut reset);

    let mut cand_recur = p.u_cand.value.matvec(h_prev);
    for i in 0..h_dim {
        cand_recur[i] += p.b_cand.value.data()[i];
    }
    let mut candidate = p.w_cand.value.matvec(input);
    for i in 0..h_dim {
        candidate[i] += reset[i] * cand_recur[i];
    }
    tanh_slice(&mut candidate);

    let mut h = vec![0.0; h_dim];
    for i in 0..h_dim {
        h[i] = (1.0 - update[i]) * h_prev[i] + update[i] * candidate[i];
    }

    Ok(GruStepCache {
        input: input.to_vec(),
        h_prev: h_prev.to_vec(),
        update,
        reset,
        cand_recur,
        candidate,
        h,
        masked: false,
    })
}

/// One GRU step: h_t from (x_t, h_{t-1}).
pub fn gru_cell_step(input: &[f64], h_prev: &[f64], p: &GruParams) -> Result<Vec<f64>, EncoderError> {
    Ok(gru_cell_forward(input, h_prev, p)?.h)
}

/// Backward through one cell step. `dh` is the loss gradient at h_t;
/// gradients are accumulated into `p`, `dh_prev`, and `dinput`.
pub(crate) fn gru_cell_backward(
    p: &mut GruParams,
    cache: &GruStepCache,
    dh: &[f64],
    dh_prev: &mut [f64],
    dinput: &mut [f64],
) {
    let h_dim = p.hidden_dim;
    debug_assert!(!cache.masked);

    let mut d_update = vec![0.0; h_dim];
    let mut d_cand = vec![0.0; h_dim];
    for i in 0..h_dim {
        d_update[i] = dh[i] * (cache.candidate[i] - cache.h_prev[i]);
        d_cand[i] = dh[i] * cache.update[i];
        dh_prev[i] += dh[i] * (1.0 - cache.update[i]);
    }

    // Candidate: h~ = tanh(W_h x + r * q), q = U_h h_prev + b_h.
    let mut d_cand_pre = vec![0.0; h_dim];
    let mut d_reset = vec![0.0; h_dim];
    let mut d_q = vec![0.0; h_dim];
    for i in 0..h_dim {
        d_cand_pre[i] = d_cand[i] * (1.0 - cache.candidate[i] * cache.candidate[i]);
        d_reset[i] = d_cand_pre[i] * cache.cand_recur[i];
        d_q[i] = d_cand_pre[i] * cache.reset[i];
    }
    p.w_cand.grad.add_outer(&d_cand_pre, &cache.input);
    p.u_cand.grad.add_outer(&d_q, &cache.h_prev);
    for i in 0..h_dim {
        p.b_cand.grad.data_mut()[i] += d_q[i];
    }
    let back_q = p.u_cand.value.matvec_transposed(&d_q);
    let back_cand_x = p.w_cand.value.matvec_transposed(&d_cand_pre);
    for i in 0..h_dim {
        dh_prev[i] += back_q[i];
    }
    for (di, b) in dinput.iter_mut().zip(&back_cand_x) {
        *di += b;
    }

    // Update gate pre-activation.
    let mut d_update_pre = vec![0.0; h_dim];
    for i in 0..h_dim {
        d_update_pre[i] = d_update[i] * cache.update[i] * (1.0 - cache.update[i]);
    }
    p.w_update.grad.add_outer(&d_update_pre, &cache.input);
    p.u_update.grad.add_outer(&d_update_pre, &cache.h_prev);
    for i in 0..h_dim {
        p.b_update.grad.data_mut()[i] += d_update_pre[i];
    }
    let back_u = p.u_update.value.matvec_transposed(&d_update_pre);
    let back_ux = p.w_update.value.matvec_transposed(&d_update_pre);
    for i in 0..h_dim {
        dh_prev[i] += back_u[i];
    }
    for (di, b) in dinput.iter_mut().zip(&back_ux) {
        *di += b;
    }

    // Reset gate pre-activation.
    let mut d_reset_pre = vec![0.0; h_dim];
    for i in 0..h_dim {
        d_reset_pre[i] = d_reset[i] * cache.reset[i] * (1.0 - cache.reset[i]);
    }
    p.w_reset.grad.add_outer(&d_reset_pre, &cache.input);
    p.u_reset.grad.add_outer(&d_reset_pre, &cache.h_prev);
    for i in 0..h_dim {
        p.b_reset.grad.data_mut()[i] += d_reset_pre[i];
    }
    let back_r = p.u_reset.value.matvec_transposed(&d_reset_pre);
    let back_rx = p.w_reset.value.matvec_transposed(&d_reset_pre);
    for i in 0..h_dim {
        dh_prev[i] += back_r[i];
    }
    for (di, b) in dinput.iter_mut().zip(&back_rx) {
        *di += b;
    }
}

/// Direction a sequence is consumed in. `Reverse` feeds the sequence
/// backwards and re-reverses the output so states stay in input order.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RunDirection {
    Forward,
    Reverse,
}

#[derive(Debug, Clone)]
pub struct GruRunCache {
    /// Step caches in processing order.
    pub steps: Vec<GruStepCache>,
    pub direction: RunDirection,
    /// Hidden states in input order, `[n x hidden]`.
    pub states: Tensor,
}

/// Maps processing-order step `t` to the input-order position.
fn input_position(t: usize, n: usize, direction: RunDirection) -> usize {
    match direction {
        RunDirection::Forward => t,
        RunDirection::Reverse => n - 1 - t,
    }
}

pub(crate) fn run_gru_cached(
    seq: &Tensor,
    mask: &[bool],
    p: &GruParams,
    direction: RunDirection,
) -> Result<GruRunCache, EncoderError> {
    if seq.shape().len() != 2 || seq.cols() != p.input_dim {
        return Err(EncoderError::DimMismatch(format!(
            "sequence shape {:?} does not feed a gru with input dim {}",
            seq.shape(),
            p.input_dim
        )));
    }
    if mask.len() != seq.rows() {
        return Err(EncoderError::DimMismatch(format!(
            "mask length {} does not match sequence length {}",
            mask.len(),
            seq.rows()
        )));
    }
    let n = seq.rows();
    let h_dim = p.hidden_dim;
    let mut states = Tensor::zeros(&[n, h_dim]);
    let mut steps = Vec::with_capacity(n);
    let mut h = vec![0.0; h_dim];
    for t in 0..n {
        let pos = input_position(t, n, direction);
        if mask[pos] {
            let cache = gru_cell_forward(seq.row(pos), &h, p)?;
            h = cache.h.clone();
            steps.push(cache);
        } else {
            steps.push(GruStepCache {
                input: Vec::new(),
                h_prev: Vec::new(),
                update: Vec::new(),
                reset: Vec::new(),
                cand_recur: Vec::new(),
                candidate: Vec::new(),
                h: h.clone(),
                masked: true,
            });
        }
        states.row_mut(pos).copy_from_slice(&h);
    }
    Ok(GruRunCache {
        steps,
        direction,
        states,
    })
}

/// Runs a GRU over a masked sequence. States come back in input order;
/// masked positions repeat the previous state (zero before any real step).
pub fn run_gru(
    seq: &Tensor,
    mask: &[bool],
    p: &GruParams,
    direction: RunDirection,
) -> Result<Tensor, EncoderError> {
    Ok(run_gru_cached(seq, mask, p, direction)?.states)
}

/// Backward through a full run. `dstates` holds per-position gradients in
/// input order; input gradients are accumulated into `dinputs` (also input
/// order).
pub(crate) fn run_gru_backward(
    p: &mut GruParams,
    cache: &GruRunCache,
    dstates: &Tensor,
    dinputs: &mut Tensor,
) {
    let n = cache.steps.len();
    if n == 0 {
        return;
    }
    let h_dim = p.hidden_dim;
    let mut carry = vec![0.0; h_dim];
    for t in (0..n).rev() {
        let pos = input_position(t, n, cache.direction);
        let mut dh = carry.clone();
        for (d, g) in dh.iter_mut().zip(dstates.row(pos)) {
            *d += g;
        }
        let step = &cache.steps[t];
        if step.masked {
            carry = dh;
        } else {
            let mut dh_prev = vec![0.0; h_dim];
            let mut dinput = vec![0.0; p.input_dim];
            gru_cell_backward(p, step, &dh, &mut dh_prev, &mut dinput);
            for (dst, src) in dinputs.row_mut(pos).iter_mut().zip(&dinput) {
                *dst += src;
            }
            carry = dh_prev;
        }
    }
}

/// Per-position concatenation of a forward and a reverse run:
/// `[fwd_t ; bwd_t]`, shape `[n x 2*hidden]`.
pub fn bidirectional_encode(
    seq: &Tensor,
    mask: &[bool],
    p_fwd: &GruParams,
    p_bwd: &GruParams,
) -> Result<Tensor, EncoderError> {
    let (fwd, bwd) = bidirectional_encode_cached(seq, mask, p_fwd, p_bwd)?;
    Ok(concat_states(&fwd.states, &bwd.states))
}

pub(crate) fn bidirectional_encode_cached(
    seq: &Tensor,
    mask: &[bool],
    p_fwd: &GruParams,
    p_bwd: &GruParams,
) -> Result<(GruRunCache, GruRunCache), EncoderError> {
    if p_fwd.hidden_dim != p_bwd.hidden_dim {
        return Err(EncoderError::DimMismatch(format!(
            "direction hidden dims disagree: {} vs {}",
            p_fwd.hidden_dim, p_bwd.hidden_dim
        )));
    }
    let fwd = run_gru_cached(seq, mask, p_fwd, RunDirection::Forward)?;
    let bwd = run_gru_cached(seq, mask, p_bwd, RunDirection::Reverse)?;
    Ok((fwd, bwd))
}

pub(crate) fn concat_states(fwd: &Tensor, bwd: &Tensor) -> Tensor {
    let n = fwd.rows();
    let h = fwd.cols();
    let mut out = Tensor::zeros(&[n, 2 * h]);
    for t in 0..n {
        out.row_mut(t)[..h].copy_from_slice(fwd.row(t));
        out.row_mut(t)[h..].copy_from_slice(bwd.row(t));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn scalar_params(w: f64, u: f64, b: f64) -> GruParams {
        let mut p = GruParams::zeros("g", 1, 1);
        for slot in [&mut p.w_update, &mut p.w_reset, &mut p.w_cand] {
            slot.value.data_mut()[0] = w;
        }
        for slot in [&mut p.u_update, &mut p.u_reset, &mut p.u_cand] {
            slot.value.data_mut()[0] = u;
        }
        for slot in [&mut p.b_update, &mut p.b_reset, &mut p.b_cand] {
            slot.value.data_mut()[0] = b;
        }
        p
    }

    #[test]
    fn zero_params_halve_previous_state() {
        let p = GruParams::zeros("g", 2, 2);
        let h = gru_cell_step(&[3.0, -1.0], &[1.0, 1.0], &p).unwrap();
        assert_eq!(h, vec![0.5, 0.5]);
        let h0 = gru_cell_step(&[9.0, 9.0], &[0.0, 0.0], &p).unwrap();
        assert_eq!(h0, vec![0.0, 0.0]);
    }

    // Independent scalar transcription of the cell equations.
    fn scalar_oracle(x: f64, h_prev: f64, w: f64, u: f64, b: f64) -> f64 {
        let sig = |v: f64| 1.0 / (1.0 + (-v).exp());
        let z = sig(w * x + u * h_prev + b);
        let r = sig(w * x + u * h_prev + b);
        let h_tilde = (w * x + r * (u * h_prev + b)).tanh();
        (1.0 - z) * h_prev + z * h_tilde
    }

    #[test]
    fn unit_params_match_hand_computation() {
        let p = scalar_params(1.0, 1.0, 0.0);
        let h = gru_cell_step(&[1.0], &[0.0], &p).unwrap();
        // z = r = sigmoid(1), candidate = tanh(1), h = sigmoid(1) * tanh(1).
        let sig1 = 1.0 / (1.0 + (-1.0f64).exp());
        let expected = sig1 * 1.0f64.tanh();
        assert!((h[0] - expected).abs() < 1e-12);
        assert!((h[0] - 0.5568).abs() < 1e-4);
        assert!((h[0] - scalar_oracle(1.0, 0.0, 1.0, 1.0, 0.0)).abs() < 1e-15);
    }

    #[test]
    fn randomized_scalar_cases_match_oracle() {
        let mut rng = SplitMix64::new(2024);
        for _ in 0..20 {
            let (w, u, b) = (
                rng.uniform(-2.0, 2.0),
                rng.uniform(-2.0, 2.0),
                rng.uniform(-1.0, 1.0),
            );
            let (x, h_prev) = (rng.uniform(-3.0, 3.0), rng.uniform(-1.0, 1.0));
            let p = scalar_params(w, u, b);
            let h = gru_cell_step(&[x], &[h_prev], &p).unwrap();
            let expected = scalar_oracle(x, h_prev, w, u, b);
            assert!(
                (h[0] - expected).abs() <= 1e-10,
                "w={w} u={u} b={b} x={x} h={h_prev}"
            );
        }
    }

    #[test]
    fn state_interpolates_between_prev_and_candidate() {
        let mut rng = SplitMix64::new(7);
        let p = GruParams::init("g", 3, 4, &mut rng);
        for _ in 0..50 {
            let x: Vec<f64> = (0..3).map(|_| rng.uniform(-2.0, 2.0)).collect();
            let h_prev: Vec<f64> = (0..4).map(|_| rng.uniform(-1.0, 1.0)).collect();
            let cache = gru_cell_forward(&x, &h_prev, &p).unwrap();
            for i in 0..4 {
                let lo = h_prev[i].min(cache.candidate[i]);
                let hi = h_prev[i].max(cache.candidate[i]);
                assert!(cache.h[i] >= lo - 1e-12 && cache.h[i] <= hi + 1e-12);
            }
        }
    }

    #[test]
    fn shape_mismatch_is_an_error() {
        let p = GruParams::zeros("g", 2, 2);
        assert!(gru_cell_step(&[1.0], &[0.0, 0.0], &p).is_err());
        assert!(gru_cell_step(&[1.0, 2.0], &[0.0], &p).is_err());
    }

    #[test]
    fn run_matches_manual_cell_composition() {
        let mut rng = SplitMix64::new(5);
        let p = GruParams::init("g", 1, 1, &mut rng);
        let seq = Tensor::from_vec(&[2, 1], vec![0.4, -1.2]).unwrap();
        let states = run_gru(&seq, &[true, true], &p, RunDirection::Forward).unwrap();
        let h1 = gru_cell_step(&[0.4], &[0.0], &p).unwrap();
        let h2 = gru_cell_step(&[-1.2], &h1, &p).unwrap();
        assert!((states.at(0, 0) - h1[0]).abs() < 1e-15);
        assert!((states.at(1, 0) - h2[0]).abs() < 1e-15);
    }

    #[test]
    fn masked_and_zero_runs() {
        let p = GruParams::zeros("g", 1, 2);
        let seq = Tensor::from_vec(&[3, 1], vec![1.0, 2.0, 3.0]).unwrap();
        let states = run_gru(&seq, &[false, false, false], &p, RunDirection::Forward).unwrap();
        assert!(states.data().iter().all(|&v| v == 0.0));
        let mut rng = SplitMix64::new(6);
        let p = GruParams::init("g", 1, 2, &mut rng);
        let states = run_gru(&seq, &[false, false, false], &p, RunDirection::Forward).unwrap();
        assert!(states.data().iter().all(|&v| v == 0.0));
    }

    #[test]
    fn masked_suffix_equals_truncated_run() {
        let mut rng = SplitMix64::new(8);
        let p = GruParams::init("g", 2, 3, &mut rng);
        let full = Tensor::from_vec(&[4, 2], vec![0.1, 0.2, -0.3, 0.5, 9.0, 9.0, 9.0, 9.0]).unwrap();
        let trunc = Tensor::from_vec(&[2, 2], vec![0.1, 0.2, -0.3, 0.5]).unwrap();
        for dir in [RunDirection::Forward, RunDirection::Reverse] {
            let a = run_gru(&full, &[true, true, false, false], &p, dir).unwrap();
            let b = run_gru(&trunc, &[true, true], &p, dir).unwrap();
            for t in 0..2 {
                for i in 0..3 {
                    assert!((a.at(t, i) - b.at(t, i)).abs() < 1e-15, "dir {dir:?}");
                }
            }
        }
    }

    #[test]
    fn bidirectional_concatenates_both_runs() {
        let mut rng = SplitMix64::new(9);
        let pf = GruParams::init("f", 2, 2, &mut rng);
        let pb = GruParams::init("b", 2, 2, &mut rng);
        let seq = Tensor::from_vec(&[3, 2], vec![0.1, 0.0, 0.4, -0.2, 0.0, 0.3]).unwrap();
        let mask = [true, true, true];
        let enc = bidirectional_encode(&seq, &mask, &pf, &pb).unwrap();
        let f = run_gru(&seq, &mask, &pf, RunDirection::Forward).unwrap();
        let b = run_gru(&seq, &mask, &pb, RunDirection::Reverse).unwrap();
        for t in 0..3 {
            assert_eq!(&enc.row(t)[..2], f.row(t));
            assert_eq!(&enc.row(t)[2..], b.row(t));
        }
    }

    #[test]
    fn palindrome_with_shared_params_is_symmetric() {
        let mut rng = SplitMix64::new(10);
        let p = GruParams::init("g", 1, 2, &mut rng);
        let seq = Tensor::from_vec(&[3, 1], vec![0.7, -0.1, 0.7]).unwrap();
        let mask = [true, true, true];
        let f = run_gru(&seq, &mask, &p, RunDirection::Forward).unwrap();
        let b = run_gru(&seq, &mask, &p, RunDirection::Reverse).unwrap();
        for t in 0..3 {
            for i in 0..2 {
                assert!((f.at(t, i) - b.at(2 - t, i)).abs() < 1e-15);
            }
        }
    }

    #[test]
    fn bidirectional_rejects_mismatched_hidden_dims() {
        let pf = GruParams::zeros("f", 2, 2);
        let pb = GruParams::zeros("b", 2, 3);
        let seq = Tensor::zeros(&[2, 2]);
        assert!(bidirectional_encode(&seq, &[true, true], &pf, &pb).is_err());
    }
}
