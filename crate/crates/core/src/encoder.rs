//! Exposure-sequence encoder: multiresolution decomposition, component
//! dropping, per-component temporal aggregation and the interest gate.
//!
//! For each kept component `c` of the decomposition of `E^u` the encoder
//! computes `Agg(e^q, c)` (time average, or attention with the target item as
//! query), then rescales it with `σ(W_Gᵀ [s, v^u] + b_G) ⊙ s`. The outputs are
//! concatenated in configuration order, so the interest vector has
//! `d · |kept|` entries.

use std::fmt;
use std::str::FromStr;

use rand::Rng;

use crate::error::{GamaError, Result};
use crate::linalg::{add_assign, dot, sigmoid, softmax_in_place, Matrix};
use crate::wavelet::{
    decompose, decompose_adjoint, make_base, BaseName, BoundaryMode, Component, Decomposition, SignalMatrix,
    WaveletBase,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub enum Aggregator {
    Avg,
    #[default]
    Att,
}

impl Aggregator {
    pub fn as_str(self) -> &'static str {
        match self {
            Aggregator::Avg => "avg",
            Aggregator::Att => "att",
        }
    }
}

impl fmt::Display for Aggregator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Aggregator {
    type Err = GamaError;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "avg" => Ok(Aggregator::Avg),
            "att" => Ok(Aggregator::Att),
            other => Err(GamaError::Config(format!(
                "unknown aggregator `{other}` (expected avg or att)"
            ))),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct EncoderConfig {
    pub level: usize,
    pub base: BaseName,
    /// Components fed to the aggregator, in output order.
    pub kept: Vec<Component>,
    pub aggregator: Aggregator,
    pub use_gate: bool,
    pub boundary: BoundaryMode,
    /// One attention matrix for all components (`true`) or one per kept component.
    pub shared_attention: bool,
}

impl Default for EncoderConfig {
    fn default() -> Self {
        Self {
            level: 3,
            base: BaseName::Db3,
            kept: Self::default_kept(3),
            aggregator: Aggregator::Att,
            use_gate: true,
            boundary: BoundaryMode::Periodic,
            shared_attention: true,
        }
    }
}

impl EncoderConfig {
    /// Every detail band except the coarsest, then the approximation: `d1..d(J-1), aJ`.
    pub fn default_kept(level: usize) -> Vec<Component> {
        let mut kept: Vec<Component> = (1..level).map(Component::Detail).collect();
        kept.push(Component::Approx(level));
        kept
    }

    /// Components of the level-J decomposition that are discarded.
    pub fn dropped(&self) -> Vec<Component> {
        Component::all(self.level)
            .into_iter()
            .filter(|c| !self.kept.contains(c))
            .collect()
    }

    pub fn validate(&self) -> Result<()> {
        if self.level == 0 {
            return Err(GamaError::Config("decomposition level must be at least 1".into()));
        }
        if self.kept.is_empty() {
            return Err(GamaError::Config("at least one component must be kept".into()));
        }
        let all = Component::all(self.level);
        for (i, c) in self.kept.iter().enumerate() {
            if !all.contains(c) {
                return Err(GamaError::Config(format!(
                    "component {c} does not exist in a level-{} decomposition",
                    self.level
                )));
            }
            if self.kept[..i].contains(c) {
                return Err(GamaError::Config(format!("component {c} listed twice")));
            }
        }
        Ok(())
    }

    /// Length of the interest vector for embedding width `dim`.
    pub fn output_len(&self, dim: usize) -> usize {
        dim * self.kept.len()
    }

    pub fn attention_count(&self) -> usize {
        if self.shared_attention {
            1
        } else {
            self.kept.len()
        }
    }

    fn attention_index(&self, component_slot: usize) -> usize {
        if self.shared_attention {
            0
        } else {
            component_slot
        }
    }
}

/// Bilinear attention scoring `e^q · W · s_t`.
#[derive(Debug, Clone, PartialEq)]
pub struct AttentionParams {
    /// `d × d`.
    pub weight: Matrix,
}

impl AttentionParams {
    pub fn zeros(dim: usize) -> Self {
        Self {
            weight: Matrix::zeros(dim, dim),
        }
    }
}

/// Interest gate `σ(W_Gᵀ [s, v] + b_G) ⊙ s`.
#[derive(Debug, Clone, PartialEq)]
pub struct GateParams {
    /// `2d × d`.
    pub weight: Matrix,
    pub bias: Vec<f64>,
}

impl GateParams {
    pub fn zeros(dim: usize) -> Self {
        Self {
            weight: Matrix::zeros(2 * dim, dim),
            bias: vec![0.0; dim],
        }
    }

    pub fn dim(&self) -> usize {
        self.bias.len()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct EncoderParams {
    pub attention: Vec<AttentionParams>,
    /// One gate per kept component.
    pub gates: Vec<GateParams>,
}

impl EncoderParams {
    pub fn zeros(config: &EncoderConfig, dim: usize) -> Self {
        Self {
            attention: (0..config.attention_count())
                .map(|_| AttentionParams::zeros(dim))
                .collect(),
            gates: config.kept.iter().map(|_| GateParams::zeros(dim)).collect(),
        }
    }

    /// `W`, `W_G` ~ uniform(−1/√d, 1/√d), `b_G = 0`.
    pub fn init<R: Rng + ?Sized>(config: &EncoderConfig, dim: usize, rng: &mut R) -> Self {
        let bound = 1.0 / (dim as f64).sqrt();
        Self {
            attention: (0..config.attention_count())
                .map(|_| AttentionParams {
                    weight: Matrix::uniform(dim, dim, bound, rng),
                })
                .collect(),
            gates: config
                .kept
                .iter()
                .map(|_| GateParams {
                    weight: Matrix::uniform(2 * dim, dim, bound, rng),
                    bias: vec![0.0; dim],
                })
                .collect(),
        }
    }

    fn check(&self, config: &EncoderConfig, dim: usize) -> Result<()> {
        if self.attention.len() != config.attention_count() || self.gates.len() != config.kept.len() {
            return Err(GamaError::Shape(format!(
                "encoder parameters hold {} attention / {} gate blocks, config needs {} / {}",
                self.attention.len(),
                self.gates.len(),
                config.attention_count(),
                config.kept.len()
            )));
        }
        for a in &self.attention {
            if a.weight.rows() != dim || a.weight.cols() != dim {
                return Err(GamaError::Shape(format!("attention matrix must be {dim}x{dim}")));
            }
        }
        for g in &self.gates {
            check_gate(g, dim)?;
        }
        Ok(())
    }
}

fn check_gate(g: &GateParams, dim: usize) -> Result<()> {
    if g.weight.rows() != 2 * dim || g.weight.cols() != dim || g.bias.len() != dim {
        return Err(GamaError::Shape(format!(
            "gate parameters are {}x{} + {}, expected {}x{dim} + {dim}",
            g.weight.rows(),
            g.weight.cols(),
            g.bias.len(),
            2 * dim
        )));
    }
    Ok(())
}

/// The concatenated interest vector `w^u`.
#[derive(Debug, Clone, PartialEq)]
pub struct InterestVector {
    pub values: Vec<f64>,
    pub dim: usize,
    pub components: Vec<Component>,
}

impl InterestVector {
    /// Slice belonging to the `slot`-th kept component.
    pub fn slice(&self, slot: usize) -> &[f64] {
        &self.values[slot * self.dim..(slot + 1) * self.dim]
    }

    pub fn component(&self, c: Component) -> Option<&[f64]> {
        self.components.iter().position(|&k| k == c).map(|i| self.slice(i))
    }
}

/// Per-channel mean over the time axis.
pub fn aggregate_avg(component: &SignalMatrix) -> Vec<f64> {
    let t = component.steps() as f64;
    component.rows().map(|r| r.iter().sum::<f64>() / t).collect()
}

/// Softmax weights `α_t ∝ exp(e^q · W · s_t)`.
pub fn attention_weights(query: &[f64], s: &SignalMatrix, params: &AttentionParams) -> Vec<f64> {
    let r = params.weight.transpose_mul_vec(query);
    attention_weights_projected(&r, s)
}

fn attention_weights_projected(r: &[f64], s: &SignalMatrix) -> Vec<f64> {
    let mut logits = vec![0.0; s.steps()];
    for (c, row) in s.rows().enumerate() {
        let rc = r[c];
        for (l, &v) in logits.iter_mut().zip(row) {
            *l += rc * v;
        }
    }
    softmax_in_place(&mut logits);
    logits
}

fn weighted_columns(s: &SignalMatrix, alpha: &[f64]) -> Vec<f64> {
    s.rows().map(|row| dot(row, alpha)).collect()
}

/// Target-query attention pooling over the columns of `s`.
pub fn aggregate_att(query: &[f64], s: &SignalMatrix, params: &AttentionParams) -> Vec<f64> {
    let alpha = attention_weights(query, s, params);
    weighted_columns(s, &alpha)
}

/// Applies the interest gate to the aggregated component `s` given behavior interest `v`.
pub fn gate(s: &[f64], v: &[f64], params: &GateParams) -> Result<Vec<f64>> {
    let dim = s.len();
    check_gate(params, dim)?;
    if v.len() != dim {
        return Err(GamaError::Shape(format!(
            "behavior interest has length {}, expected {dim}",
            v.len()
        )));
    }
    Ok(gate_sigma(s, v, params).iter().zip(s).map(|(g, x)| g * x).collect())
}

fn gate_sigma(s: &[f64], v: &[f64], params: &GateParams) -> Vec<f64> {
    let dim = s.len();
    let mut z = params.bias.clone();
    for (i, &u) in s.iter().chain(v).enumerate() {
        if u == 0.0 {
            continue;
        }
        for (zj, w) in z.iter_mut().zip(params.weight.row(i)) {
            *zj += w * u;
        }
    }
    debug_assert_eq!(z.len(), dim);
    z.iter_mut().for_each(|x| *x = sigmoid(*x));
    z
}

/// Reverse pass of attention pooling.
///
/// `alpha` and `projected` (`Wᵀ q`) come from the forward pass; `grad_out`
/// is the gradient on the pooled vector. Accumulates into the three outputs.
#[allow(clippy::too_many_arguments)]
pub(crate) fn attention_backward(
    query: &[f64],
    s: &SignalMatrix,
    alpha: &[f64],
    projected: &[f64],
    grad_out: &[f64],
    params: &AttentionParams,
    grad_params: &mut AttentionParams,
    grad_query: &mut [f64],
    grad_s: &mut SignalMatrix,
) {
    let dim = s.channels();
    // ∂α_t = g · s_t, then through the softmax to the logits
    let mut g_logit = vec![0.0; s.steps()];
    for (c, row) in s.rows().enumerate() {
        let g = grad_out[c];
        for (gl, &v) in g_logit.iter_mut().zip(row) {
            *gl += g * v;
        }
    }
    let mean = dot(alpha, &g_logit);
    for (gl, &a) in g_logit.iter_mut().zip(alpha) {
        *gl = a * (*gl - mean);
    }
    let mut g_r = vec![0.0; dim];
    for c in 0..dim {
        g_r[c] = dot(s.row(c), &g_logit);
        let (g, rc) = (grad_out[c], projected[c]);
        for ((x, &a), &gl) in grad_s.row_mut(c).iter_mut().zip(alpha).zip(&g_logit) {
            *x += a * g + gl * rc;
        }
    }
    grad_params.weight.add_outer(query, &g_r, 1.0);
    add_assign(grad_query, &params.weight.mul_vec(&g_r));
}

#[allow(clippy::too_many_arguments)]
fn gate_backward(
    s: &[f64],
    v: &[f64],
    sigma: &[f64],
    grad_out: &[f64],
    params: &GateParams,
    grad_params: &mut GateParams,
    grad_s: &mut [f64],
    grad_v: &mut [f64],
) {
    let dim = s.len();
    let dz: Vec<f64> = (0..dim)
        .map(|j| grad_out[j] * s[j] * sigma[j] * (1.0 - sigma[j]))
        .collect();
    for j in 0..dim {
        grad_s[j] += grad_out[j] * sigma[j];
    }
    add_assign(&mut grad_params.bias, &dz);
    let inputs: Vec<f64> = s.iter().chain(v).copied().collect();
    grad_params.weight.add_outer(&inputs, &dz, 1.0);
    let du = params.weight.mul_vec(&dz);
    add_assign(grad_s, &du[..dim]);
    add_assign(grad_v, &du[dim..]);
}

/// Gradients of `⟨upstream, gate(s, v)⟩` as `(params, ∂s, ∂v)`.
pub fn gate_gradients(
    s: &[f64],
    v: &[f64],
    params: &GateParams,
    upstream: &[f64],
) -> Result<(GateParams, Vec<f64>, Vec<f64>)> {
    let dim = s.len();
    check_gate(params, dim)?;
    if v.len() != dim || upstream.len() != dim {
        return Err(GamaError::Shape(format!(
            "gate inputs must all have length {dim}, got v {} and upstream {}",
            v.len(),
            upstream.len()
        )));
    }
    let sigma = gate_sigma(s, v, params);
    let mut grad_params = GateParams::zeros(dim);
    let (mut gs, mut gv) = (vec![0.0; dim], vec![0.0; dim]);
    gate_backward(s, v, &sigma, upstream, params, &mut grad_params, &mut gs, &mut gv);
    Ok((grad_params, gs, gv))
}

/// Gradients of `⟨upstream, aggregate_att(query, s)⟩` as `(params, ∂query, ∂s)`.
pub fn aggregate_att_gradients(
    query: &[f64],
    s: &SignalMatrix,
    params: &AttentionParams,
    upstream: &[f64],
) -> Result<(AttentionParams, Vec<f64>, SignalMatrix)> {
    let dim = s.channels();
    if query.len() != dim || upstream.len() != dim || params.weight.rows() != dim || params.weight.cols() != dim {
        return Err(GamaError::Shape(format!(
            "attention inputs must match the component's {dim} channels"
        )));
    }
    let (_, alpha, r) = attention_forward(query, s, params);
    let mut grad_params = AttentionParams::zeros(dim);
    let mut grad_query = vec![0.0; dim];
    let mut grad_s = SignalMatrix::zeros(dim, s.steps());
    attention_backward(
        query,
        s,
        &alpha,
        &r,
        upstream,
        params,
        &mut grad_params,
        &mut grad_query,
        &mut grad_s,
    );
    Ok((grad_params, grad_query, grad_s))
}

/// Attention pooling returning `(output, alpha, Wᵀ q)` for a later backward pass.
pub(crate) fn attention_forward(
    query: &[f64],
    s: &SignalMatrix,
    params: &AttentionParams,
) -> (Vec<f64>, Vec<f64>, Vec<f64>) {
    let r = params.weight.transpose_mul_vec(query);
    let alpha = attention_weights_projected(&r, s);
    (weighted_columns(s, &alpha), alpha, r)
}

/// Intermediate values kept for the backward pass.
#[derive(Debug, Clone)]
pub struct EncodeCache {
    decomposition: Decomposition,
    slots: Vec<SlotCache>,
}

#[derive(Debug, Clone)]
struct SlotCache {
    aggregated: Vec<f64>,
    /// Attention weights and the projected query `Wᵀ e^q`, when attention is used.
    attention: Option<(Vec<f64>, Vec<f64>)>,
    sigma: Option<Vec<f64>>,
}

/// Gradients of a scalar objective with respect to the encoder's inputs and parameters.
#[derive(Debug, Clone, PartialEq)]
pub struct EncoderGrads {
    pub params: EncoderParams,
    pub signal: SignalMatrix,
    pub query: Vec<f64>,
    pub behavior: Vec<f64>,
}

/// An encoder bound to a validated configuration.
#[derive(Debug, Clone)]
pub struct GamaEncoder {
    config: EncoderConfig,
    base: WaveletBase,
}

impl GamaEncoder {
    pub fn new(config: EncoderConfig) -> Result<Self> {
        config.validate()?;
        let base = make_base(config.base);
        Ok(Self { config, base })
    }

    pub fn config(&self) -> &EncoderConfig {
        &self.config
    }

    pub fn base(&self) -> &WaveletBase {
        &self.base
    }

    fn check_inputs(
        &self,
        signal: &SignalMatrix,
        query: &[f64],
        behavior: &[f64],
        params: &EncoderParams,
    ) -> Result<usize> {
        let dim = signal.channels();
        if query.len() != dim || behavior.len() != dim {
            return Err(GamaError::Shape(format!(
                "query/behavior vectors have lengths {}/{}, signal has {dim} channels",
                query.len(),
                behavior.len()
            )));
        }
        params.check(&self.config, dim)?;
        Ok(dim)
    }

    pub fn encode(
        &self,
        signal: &SignalMatrix,
        query: &[f64],
        behavior: &[f64],
        params: &EncoderParams,
    ) -> Result<InterestVector> {
        self.forward(signal, query, behavior, params).map(|(w, _)| w)
    }

    pub fn forward(
        &self,
        signal: &SignalMatrix,
        query: &[f64],
        behavior: &[f64],
        params: &EncoderParams,
    ) -> Result<(InterestVector, EncodeCache)> {
        let dim = self.check_inputs(signal, query, behavior, params)?;
        let cfg = &self.config;
        let decomposition = decompose(signal, &self.base, cfg.level, cfg.boundary)?;
        let mut values = Vec::with_capacity(cfg.output_len(dim));
        let mut slots = Vec::with_capacity(cfg.kept.len());
        for (slot, &comp) in cfg.kept.iter().enumerate() {
            let s = decomposition.component(comp).expect("validated component exists");
            let (aggregated, attention) = match cfg.aggregator {
                Aggregator::Avg => (aggregate_avg(s), None),
                Aggregator::Att => {
                    let (out, alpha, r) = attention_forward(query, s, &params.attention[cfg.attention_index(slot)]);
                    (out, Some((alpha, r)))
                }
            };
            let sigma = if cfg.use_gate {
                let sig = gate_sigma(&aggregated, behavior, &params.gates[slot]);
                values.extend(sig.iter().zip(&aggregated).map(|(g, x)| g * x));
                Some(sig)
            } else {
                values.extend_from_slice(&aggregated);
                None
            };
            slots.push(SlotCache {
                aggregated,
                attention,
                sigma,
            });
        }
        Ok((
            InterestVector {
                values,
                dim,
                components: cfg.kept.clone(),
            },
            EncodeCache { decomposition, slots },
        ))
    }

    /// Reverse pass: `upstream` is `∂L/∂w^u`.
    pub fn backward(
        &self,
        cache: &EncodeCache,
        query: &[f64],
        behavior: &[f64],
        params: &EncoderParams,
        upstream: &[f64],
    ) -> Result<EncoderGrads> {
        let cfg = &self.config;
        let dim = query.len();
        if upstream.len() != cfg.output_len(dim) {
            return Err(GamaError::Shape(format!(
                "upstream gradient has length {}, expected {}",
                upstream.len(),
                cfg.output_len(dim)
            )));
        }
        let dec = &cache.decomposition;
        let mut grads = EncoderParams::zeros(cfg, dim);
        let mut grad_query = vec![0.0; dim];
        let mut grad_behavior = vec![0.0; dim];
        let mut grad_dec = Decomposition {
            level: dec.level,
            approx: SignalMatrix::zeros(dim, dec.approx.steps()),
            details: dec
                .details
                .iter()
                .map(|d| SignalMatrix::zeros(dim, d.steps()))
                .collect(),
            base: dec.base,
            boundary: dec.boundary,
            steps: dec.steps,
        };

        for (slot, &comp) in cfg.kept.iter().enumerate() {
            let g_out = &upstream[slot * dim..(slot + 1) * dim];
            let sc = &cache.slots[slot];

            let mut g_agg = vec![0.0; dim];
            match &sc.sigma {
                Some(sigma) => gate_backward(
                    &sc.aggregated,
                    behavior,
                    sigma,
                    g_out,
                    &params.gates[slot],
                    &mut grads.gates[slot],
                    &mut g_agg,
                    &mut grad_behavior,
                ),
                None => g_agg.copy_from_slice(g_out),
            }

            let s = dec.component(comp).expect("validated component exists");
            let gs = grad_dec.component_mut(comp).expect("validated component exists");
            let steps = s.steps();
            match &sc.attention {
                None => {
                    let inv = 1.0 / steps as f64;
                    for (c, &g) in g_agg.iter().enumerate() {
                        gs.row_mut(c).iter_mut().for_each(|x| *x += g * inv);
                    }
                }
                Some((alpha, r)) => {
                    let ai = cfg.attention_index(slot);
                    attention_backward(
                        query,
                        s,
                        alpha,
                        r,
                        &g_agg,
                        &params.attention[ai],
                        &mut grads.attention[ai],
                        &mut grad_query,
                        gs,
                    );
                }
            }
        }

        let signal = decompose_adjoint(&grad_dec, &self.base)?;
        Ok(EncoderGrads {
            params: grads,
            signal,
            query: grad_query,
            behavior: grad_behavior,
        })
    }

    pub fn gradients(
        &self,
        signal: &SignalMatrix,
        query: &[f64],
        behavior: &[f64],
        params: &EncoderParams,
        upstream: &[f64],
    ) -> Result<EncoderGrads> {
        let (_, cache) = self.forward(signal, query, behavior, params)?;
        self.backward(&cache, query, behavior, params, upstream)
    }
}

/// Encodes one exposure signal; see [`GamaEncoder::encode`].
pub fn encode(
    signal: &SignalMatrix,
    query: &[f64],
    behavior: &[f64],
    config: &EncoderConfig,
    params: &EncoderParams,
) -> Result<InterestVector> {
    GamaEncoder::new(config.clone())?.encode(signal, query, behavior, params)
}

/// Exact gradients of `⟨upstream, encode(...)⟩`.
pub fn encode_gradients(
    signal: &SignalMatrix,
    query: &[f64],
    behavior: &[f64],
    config: &EncoderConfig,
    params: &EncoderParams,
    upstream: &[f64],
) -> Result<EncoderGrads> {
    GamaEncoder::new(config.clone())?.gradients(signal, query, behavior, params, upstream)
}
