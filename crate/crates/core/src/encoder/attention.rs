//! Additive global attention over a sequence of hidden states.
//!
//! Scores are e_t = score . tanh(proj * h_t); the weights are a masked
//! softmax over the scores and the context vector is the weight-averaged
//! state: c = sum_t alpha_t h_t.

use super::EncoderError;
use crate::numerics::rng::SplitMix64;
use crate::numerics::{softmax, ParamSlot, Tensor};

use super::gru::glorot;

/// Projection (`d_a x h_enc`) and score vector (`d_a`) of the additive
/// attention mechanism. By default d_a equals the encoded state width.
#[derive(Debug, Clone)]
pub struct AttentionParams {
    pub proj: ParamSlot,
    pub score: ParamSlot,
    attn_dim: usize,
    state_dim: usize,
}

impl AttentionParams {
    pub fn init(prefix: &str, state_dim: usize, rng: &mut SplitMix64) -> AttentionParams {
        let attn_dim = state_dim;
        AttentionParams {
            proj: ParamSlot::new(
                format!("{prefix}.proj"),
                glorot(&[attn_dim, state_dim], state_dim, attn_dim, rng),
            ),
            score: ParamSlot::new(
                format!("{prefix}.score"),
                glorot(&[attn_dim], attn_dim, 1, rng),
            ),
            attn_dim,
            state_dim,
        }
    }

    pub fn state_dim(&self) -> usize {
        self.state_dim
    }

    pub fn attn_dim(&self) -> usize {
        self.attn_dim
    }

    pub fn slots(&self) -> Vec<&ParamSlot> {
        vec![&self.proj, &self.score]
    }

    pub fn slots_mut(&mut self) -> Vec<&mut ParamSlot> {
        vec![&mut self.proj, &mut self.score]
    }
}

#[derive(Debug, Clone)]
pub struct AttentionCache {
    /// tanh(proj * h_t) per position (empty for masked positions).
    pub projected: Vec<Vec<f64>>,
    pub weights: Vec<f64>,
    pub context: Vec<f64>,
}

pub(crate) fn global_attention_cached(
    states: &Tensor,
    mask: &[bool],
    params: &AttentionParams,
) -> Result<AttentionCache, EncoderError> {
    if states.shape().len() != 2 || states.cols() != params.state_dim {
        return Err(EncoderError::DimMismatch(format!(
            "attention expects states [n x {}], got {:?}",
            params.state_dim,
            states.shape()
        )));
    }
    if mask.len() != states.rows() {
        return Err(EncoderError::DimMismatch(format!(
            "attention mask length {} vs {} states",
            mask.len(),
            states.rows()
        )));
    }
    states.validate_finite("attention states")?;
    let n = states.rows();
    let mut projected = vec![Vec::new(); n];
    let mut scores = vec![0.0; n];
    for t in 0..n {
        if !mask[t] {
            continue;
        }
        let mut u = params.proj.value.matvec(states.row(t));
        u.iter_mut().for_each(|v| *v = v.tanh());
        scores[t] = params
            .score
            .value
            .data()
            .iter()
            .zip(&u)
            .map(|(s, v)| s * v)
            .sum();
        projected[t] = u;
    }
    let weights = softmax(&scores, Some(mask))?;
    let mut context = vec![0.0; params.state_dim];
    for t in 0..n {
        if weights[t] == 0.0 {
            continue;
        }
        for (c, s) in context.iter_mut().zip(states.row(t)) {
            *c += weights[t] * s;
        }
    }
    Ok(AttentionCache {
        projected,
        weights,
        context,
    })
}

/// Attention weights and context vector for a masked state sequence.
/// Weights are non-negative, sum to 1, and are exactly 0 at masked
/// positions. Errors if every position is masked.
pub fn global_attention(
    states: &Tensor,
    mask: &[bool],
    params: &AttentionParams,
) -> Result<(Vec<f64>, Vec<f64>), EncoderError> {
    let cache = global_attention_cached(states, mask, params)?;
    Ok((cache.weights, cache.context))
}

/// Backward through attention given the loss gradient at the context
/// vector. State gradients accumulate into `dstates`.
pub(crate) fn global_attention_backward(
    params: &mut AttentionParams,
    states: &Tensor,
    mask: &[bool],
    cache: &AttentionCache,
    dcontext: &[f64],
    dstates: &mut Tensor,
) {
    let n = states.rows();
    // c = sum alpha_t h_t.
    let mut d_alpha = vec![0.0; n];
    for t in 0..n {
        if !mask[t] {
            continue;
        }
        d_alpha[t] = dcontext
            .iter()
            .zip(states.row(t))
            .map(|(d, s)| d * s)
            .sum();
        for (dst, d) in dstates.row_mut(t).iter_mut().zip(dcontext) {
            *dst += cache.weights[t] * d;
        }
    }
    // Softmax backward: de_t = alpha_t (d_alpha_t - sum_j alpha_j d_alpha_j).
    let dot: f64 = cache
        .weights
        .iter()
        .zip(&d_alpha)
        .map(|(w, d)| w * d)
        .sum();
    for t in 0..n {
        if !mask[t] || cache.weights[t] == 0.0 {
            continue;
        }
        let d_score_t = cache.weights[t] * (d_alpha[t] - dot);
        if d_score_t == 0.0 {
            continue;
        }
        let u = &cache.projected[t];
        // e_t = score . u_t.
        for (g, ui) in params.score.grad.data_mut().iter_mut().zip(u) {
            *g += d_score_t * ui;
        }
        let mut d_pre: Vec<f64> = params
            .score
            .value
            .data()
            .iter()
            .zip(u)
            .map(|(s, ui)| d_score_t * s * (1.0 - ui * ui))
            .collect();
        params.proj.grad.add_outer(&d_pre, states.row(t));
        let back = params.proj.value.matvec_transposed(&d_pre);
        for (dst, b) in dstates.row_mut(t).iter_mut().zip(&back) {
            *dst += b;
        }
        d_pre.clear();
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn identical_states_get_uniform_weights() {
        let mut rng = SplitMix64::new(1);
        let params = AttentionParams::init("a", 3, &mut rng);
        let states =
            Tensor::from_vec(&[3, 3], vec![0.2, -0.1, 0.4, 0.2, -0.1, 0.4, 0.2, -0.1, 0.4])
                .unwrap();
        let (weights, context) = global_attention(&states, &[true, true, true], &params).unwrap();
        for w in &weights {
            assert!((w - 1.0 / 3.0).abs() < 1e-12);
        }
        for (c, s) in context.iter().zip(states.row(0)) {
            assert!((c - s).abs() < 1e-12);
        }
    }

    #[test]
    fn single_unmasked_state_takes_all_weight() {
        let mut rng = SplitMix64::new(2);
        let params = AttentionParams::init("a", 2, &mut rng);
        let states = Tensor::from_vec(&[3, 2], vec![9.0, 9.0, 1.0, -1.0, 9.0, 9.0]).unwrap();
        let (weights, context) =
            global_attention(&states, &[false, true, false], &params).unwrap();
        assert_eq!(weights, vec![0.0, 1.0, 0.0]);
        assert_eq!(context, vec![1.0, -1.0]);
    }

    // Straight-line recomputation of scores, softmax, and context for three
    // distinct states with small fixed parameters.
    #[test]
    fn three_states_match_direct_formula() {
        let mut params = AttentionParams::init("a", 2, &mut SplitMix64::new(0));
        params
            .proj
            .value
            .data_mut()
            .copy_from_slice(&[0.5, -0.25, 0.1, 0.3]);
        params.score.value.data_mut().copy_from_slice(&[1.0, -2.0]);
        let states = Tensor::from_vec(&[3, 2], vec![0.3, 0.7, -0.4, 0.1, 0.9, -0.2]).unwrap();
        let (weights, context) = global_attention(&states, &[true, true, true], &params).unwrap();

        let mut scores = [0.0f64; 3];
        for t in 0..3 {
            let h = states.row(t);
            let u0 = (0.5 * h[0] - 0.25 * h[1]).tanh();
            let u1 = (0.1 * h[0] + 0.3 * h[1]).tanh();
            scores[t] = 1.0 * u0 - 2.0 * u1;
        }
        let m = scores.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        let exps: Vec<f64> = scores.iter().map(|s| (s - m).exp()).collect();
        let z: f64 = exps.iter().sum();
        for t in 0..3 {
            assert!((weights[t] - exps[t] / z).abs() < 1e-14);
        }
        for i in 0..2 {
            let expected: f64 = (0..3).map(|t| weights[t] * states.at(t, i)).sum();
            assert!((context[i] - expected).abs() < 1e-14);
        }
    }

    #[test]
    fn all_masked_is_an_error() {
        let params = AttentionParams::init("a", 2, &mut SplitMix64::new(3));
        let states = Tensor::zeros(&[2, 2]);
        assert!(global_attention(&states, &[false, false], &params).is_err());
    }

    #[test]
    fn weights_are_permutation_equivariant() {
        let mut rng = SplitMix64::new(4);
        let params = AttentionParams::init("a", 3, &mut rng);
        let data: Vec<f64> = (0..12).map(|_| rng.uniform(-1.0, 1.0)).collect();
        let states = Tensor::from_vec(&[4, 3], data.clone()).unwrap();
        let mask = [true, true, true, true];
        let (weights, _) = global_attention(&states, &mask, &params).unwrap();
        // Rotate the states by one position.
        let mut rotated = Vec::new();
        for t in 0..4 {
            rotated.extend_from_slice(states.row((t + 1) % 4));
        }
        let rotated = Tensor::from_vec(&[4, 3], rotated).unwrap();
        let (rweights, _) = global_attention(&rotated, &mask, &params).unwrap();
        for t in 0..4 {
            assert!((rweights[t] - weights[(t + 1) % 4]).abs() < 1e-12);
        }
    }
}
