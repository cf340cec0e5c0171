//! Embedding-and-MLP click-through-rate model.
//!
//! Inputs to the MLP are the target item and category embeddings, the
//! behavior interest `v^u` (target-query attention over clicked items) and,
//! when an exposure branch is configured, the exposure interest `w^u`.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::data::{Sample, Vocab};
use crate::encoder::{
    attention_backward, attention_forward, AttentionParams, EncodeCache, EncoderConfig, EncoderParams, GamaEncoder,
};
use crate::error::{GamaError, Result};
use crate::linalg::{add_assign, sigmoid, Matrix};
use crate::wavelet::SignalMatrix;

/// Probability clamp used by the loss.
pub const PROB_CLAMP: f64 = 1e-12;

/// How the exposure sequence enters the model.
#[derive(Debug, Clone, PartialEq)]
pub enum ExposureBranch {
    /// Backbone only.
    None,
    /// Mean of the exposure embeddings.
    AvgPool,
    Gama(EncoderConfig),
}

impl ExposureBranch {
    pub fn kind(&self) -> &'static str {
        match self {
            ExposureBranch::None => "none",
            ExposureBranch::AvgPool => "avgpool",
            ExposureBranch::Gama(_) => "gama",
        }
    }

    pub fn output_len(&self, dim: usize) -> usize {
        match self {
            ExposureBranch::None => 0,
            ExposureBranch::AvgPool => dim,
            ExposureBranch::Gama(cfg) => cfg.output_len(dim),
        }
    }
}

impl fmt::Display for ExposureBranch {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ExposureBranch::Gama(c) => write!(f, "gama-{}{}", c.aggregator, if c.use_gate { "" } else { "-nogate" }),
            other => f.write_str(other.kind()),
        }
    }
}

/// How a history shorter than the exposure window fills the remaining steps.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ExposurePadding {
    /// Repeat the history periodically, ending on the most recent exposure.
    #[default]
    Tile,
    /// Zero columns on the left.
    Zero,
}

impl ExposurePadding {
    pub fn as_str(self) -> &'static str {
        match self {
            ExposurePadding::Tile => "tile",
            ExposurePadding::Zero => "zero",
        }
    }

    /// For each of the `n` window steps, the index into a history of length `len`.
    pub fn positions(self, n: usize, len: usize) -> Vec<Option<usize>> {
        let offset = n.saturating_sub(len);
        (0..n)
            .map(|p| match (p.checked_sub(offset), self) {
                (Some(i), _) => Some(i),
                (None, _) if len == 0 => None,
                (None, ExposurePadding::Tile) => Some((p + len - offset % len) % len),
                (None, ExposurePadding::Zero) => None,
            })
            .collect()
    }
}

impl fmt::Display for ExposurePadding {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for ExposurePadding {
    type Err = GamaError;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "tile" => Ok(ExposurePadding::Tile),
            "zero" => Ok(ExposurePadding::Zero),
            other => Err(GamaError::Config(format!("unknown exposure padding `{other}`"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ModelConfig {
    /// Embedding width `d`.
    pub dim: usize,
    pub vocab: Vocab,
    /// Exposure window `N`.
    pub exposure_len: usize,
    pub padding: ExposurePadding,
    /// MLP layer widths, ending in 1.
    pub mlp_widths: Vec<usize>,
    pub branch: ExposureBranch,
    pub seed: u64,
}

impl Default for ModelConfig {
    fn default() -> Self {
        Self {
            dim: 16,
            vocab: Vocab::default(),
            exposure_len: 128,
            padding: ExposurePadding::Tile,
            mlp_widths: vec![64, 32, 1],
            branch: ExposureBranch::Gama(EncoderConfig::default()),
            seed: 1,
        }
    }
}

impl ModelConfig {
    pub fn validate(&self) -> Result<()> {
        if self.dim == 0 {
            return Err(GamaError::Config("embedding width must be positive".into()));
        }
        if self.vocab.items == 0 || self.vocab.categories == 0 {
            return Err(GamaError::Config("vocabulary sizes must be positive".into()));
        }
        if self.mlp_widths.last() != Some(&1) || self.mlp_widths.contains(&0) {
            return Err(GamaError::Config(format!(
                "MLP widths {:?} must be positive and end in 1",
                self.mlp_widths
            )));
        }
        if let ExposureBranch::Gama(enc) = &self.branch {
            enc.validate()?;
            if enc.level >= usize::BITS as usize || self.exposure_len >> enc.level == 0 {
                return Err(GamaError::Config(format!(
                    "exposure length {} is shorter than 2^{} required by the decomposition level",
                    self.exposure_len, enc.level
                )));
            }
        } else if self.exposure_len == 0 {
            return Err(GamaError::Config("exposure length must be positive".into()));
        }
        Ok(())
    }

    pub fn mlp_input_len(&self) -> usize {
        3 * self.dim + self.branch.output_len(self.dim)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DenseLayer {
    /// `inputs × outputs`.
    pub weight: Matrix,
    pub bias: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ModelParams {
    pub item_embeddings: Matrix,
    pub category_embeddings: Matrix,
    pub behavior_attention: AttentionParams,
    /// Empty unless the exposure branch is Gama.
    pub encoder: EncoderParams,
    pub mlp: Vec<DenseLayer>,
}

impl ModelParams {
    pub fn zeros(config: &ModelConfig) -> Self {
        let d = config.dim;
        let mut widths = vec![config.mlp_input_len()];
        widths.extend(&config.mlp_widths);
        Self {
            item_embeddings: Matrix::zeros(config.vocab.items, d),
            category_embeddings: Matrix::zeros(config.vocab.categories, d),
            behavior_attention: AttentionParams::zeros(d),
            encoder: match &config.branch {
                ExposureBranch::Gama(enc) => EncoderParams::zeros(enc, d),
                _ => EncoderParams {
                    attention: vec![],
                    gates: vec![],
                },
            },
            mlp: widths
                .windows(2)
                .map(|w| DenseLayer {
                    weight: Matrix::zeros(w[0], w[1]),
                    bias: vec![0.0; w[1]],
                })
                .collect(),
        }
    }

    /// Seeded initialization: embeddings ~ U(±1/√d), attention and gates per
    /// the encoder rule, MLP weights ~ U(±1/√fan_in), biases zero.
    pub fn init(config: &ModelConfig) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
        let d = config.dim;
        let bound = 1.0 / (d as f64).sqrt();
        let mut p = Self::zeros(config);
        p.item_embeddings = Matrix::uniform(config.vocab.items, d, bound, &mut rng);
        p.category_embeddings = Matrix::uniform(config.vocab.categories, d, bound, &mut rng);
        p.behavior_attention.weight = Matrix::uniform(d, d, bound, &mut rng);
        if let ExposureBranch::Gama(enc) = &config.branch {
            p.encoder = EncoderParams::init(enc, d, &mut rng);
        }
        for layer in &mut p.mlp {
            let fan_in = layer.weight.rows();
            layer.weight = Matrix::uniform(fan_in, layer.weight.cols(), 1.0 / (fan_in as f64).sqrt(), &mut rng);
        }
        p
    }

    /// Named views of every tensor as `(name, rows, cols, values)`, in checkpoint order.
    pub fn tensors(&self) -> Vec<(String, usize, usize, &[f64])> {
        let mut out = vec![
            (
                "item_embeddings".to_owned(),
                self.item_embeddings.rows(),
                self.item_embeddings.cols(),
                self.item_embeddings.data(),
            ),
            (
                "category_embeddings".to_owned(),
                self.category_embeddings.rows(),
                self.category_embeddings.cols(),
                self.category_embeddings.data(),
            ),
            (
                "behavior_attention".to_owned(),
                self.behavior_attention.weight.rows(),
                self.behavior_attention.weight.cols(),
                self.behavior_attention.weight.data(),
            ),
        ];
        for (i, a) in self.encoder.attention.iter().enumerate() {
            out.push((
                format!("encoder.attention.{i}"),
                a.weight.rows(),
                a.weight.cols(),
                a.weight.data(),
            ));
        }
        for (i, g) in self.encoder.gates.iter().enumerate() {
            out.push((
                format!("encoder.gate.{i}.weight"),
                g.weight.rows(),
                g.weight.cols(),
                g.weight.data(),
            ));
            out.push((format!("encoder.gate.{i}.bias"), 1, g.bias.len(), &g.bias));
        }
        for (i, l) in self.mlp.iter().enumerate() {
            out.push((
                format!("mlp.{i}.weight"),
                l.weight.rows(),
                l.weight.cols(),
                l.weight.data(),
            ));
            out.push((format!("mlp.{i}.bias"), 1, l.bias.len(), &l.bias));
        }
        out
    }

    /// Mutable views in the same order as [`ModelParams::tensors`].
    pub fn tensors_mut(&mut self) -> Vec<&mut [f64]> {
        let mut out: Vec<&mut [f64]> = vec![
            self.item_embeddings.data_mut(),
            self.category_embeddings.data_mut(),
            self.behavior_attention.weight.data_mut(),
        ];
        for a in &mut self.encoder.attention {
            out.push(a.weight.data_mut());
        }
        for g in &mut self.encoder.gates {
            out.push(g.weight.data_mut());
            out.push(&mut g.bias);
        }
        for l in &mut self.mlp {
            out.push(l.weight.data_mut());
            out.push(&mut l.bias);
        }
        out
    }

    /// Parameters other than the two embedding tables, in checkpoint order.
    fn dense_mut(&mut self) -> Vec<&mut [f64]> {
        self.tensors_mut().into_iter().skip(2).collect()
    }

    pub fn is_finite(&self) -> bool {
        self.tensors()
            .iter()
            .all(|(_, _, _, v)| v.iter().all(|x| x.is_finite()))
    }
}

/// Gradients of the mean loss; embedding gradients are kept per touched row.
#[derive(Debug, Clone, PartialEq)]
pub struct ModelGrads {
    pub item_embeddings: BTreeMap<u32, Vec<f64>>,
    pub category_embeddings: BTreeMap<u32, Vec<f64>>,
    /// Same layout as the model parameters; its embedding tables are left empty.
    pub dense: ModelParams,
}

impl ModelGrads {
    fn zeros(config: &ModelConfig) -> Self {
        let mut dense = ModelParams::zeros(&ModelConfig {
            vocab: Vocab {
                items: 0,
                categories: 0,
            },
            ..config.clone()
        });
        dense.item_embeddings = Matrix::zeros(0, config.dim);
        dense.category_embeddings = Matrix::zeros(0, config.dim);
        Self {
            item_embeddings: BTreeMap::new(),
            category_embeddings: BTreeMap::new(),
            dense,
        }
    }

    /// Gradient tensors laid out exactly like [`ModelParams::tensors`].
    pub fn to_dense(&self, config: &ModelConfig) -> Vec<Vec<f64>> {
        let d = config.dim;
        let scatter = |rows: usize, map: &BTreeMap<u32, Vec<f64>>| {
            let mut v = vec![0.0; rows * d];
            for (&r, g) in map {
                v[r as usize * d..(r as usize + 1) * d].copy_from_slice(g);
            }
            v
        };
        let mut out = vec![
            scatter(config.vocab.items, &self.item_embeddings),
            scatter(config.vocab.categories, &self.category_embeddings),
        ];
        out.extend(self.dense.tensors().into_iter().skip(2).map(|(_, _, _, v)| v.to_vec()));
        out
    }

    fn dense_slices(&mut self) -> Vec<&mut [f64]> {
        self.dense.dense_mut()
    }
}

fn add_row(map: &mut BTreeMap<u32, Vec<f64>>, row: u32, g: &[f64]) {
    match map.get_mut(&row) {
        Some(acc) => add_assign(acc, g),
        None => {
            map.insert(row, g.to_vec());
        }
    }
}

struct ForwardCache {
    query: Vec<f64>,
    behaviors: Option<(SignalMatrix, Vec<f64>, Vec<f64>)>,
    behavior_interest: Vec<f64>,
    exposure: ExposureCache,
    /// Activations per layer, starting with the MLP input.
    activations: Vec<Vec<f64>>,
    logit: f64,
}

enum ExposureCache {
    None,
    AvgPool,
    Gama(Box<EncodeCache>),
}

/// A CTR model: configuration, parameters and a prepared encoder.
#[derive(Debug, Clone)]
pub struct CtrModel {
    pub config: ModelConfig,
    pub params: ModelParams,
    encoder: Option<GamaEncoder>,
}

impl CtrModel {
    pub fn new(config: ModelConfig) -> Result<Self> {
        let params = ModelParams::init(&config);
        Self::with_params(config, params)
    }

    pub fn with_params(config: ModelConfig, params: ModelParams) -> Result<Self> {
        config.validate()?;
        let expected = ModelParams::zeros(&config);
        let shapes = |p: &ModelParams| {
            p.tensors()
                .into_iter()
                .map(|(n, r, c, _)| (n, r, c))
                .collect::<Vec<_>>()
        };
        if shapes(&params) != shapes(&expected) {
            return Err(GamaError::Shape(
                "parameters do not match the model configuration".into(),
            ));
        }
        let encoder = match &config.branch {
            ExposureBranch::Gama(enc) => Some(GamaEncoder::new(enc.clone())?),
            _ => None,
        };
        Ok(Self {
            config,
            params,
            encoder,
        })
    }

    fn item_row(&self, id: u32) -> &[f64] {
        self.params.item_embeddings.row(id as usize % self.config.vocab.items)
    }

    fn category_row(&self, id: u32) -> &[f64] {
        self.params
            .category_embeddings
            .row(id as usize % self.config.vocab.categories)
    }

    /// Target-item query `e^q` = item embedding + category embedding.
    pub fn query(&self, sample: &Sample) -> Vec<f64> {
        let mut q = self.item_row(sample.target_item).to_vec();
        add_assign(&mut q, self.category_row(sample.target_category));
        q
    }

    fn behavior_matrix(&self, sample: &Sample) -> Option<SignalMatrix> {
        if sample.behavior_seq.is_empty() {
            return None;
        }
        let cols: Vec<Vec<f64>> = sample
            .behavior_seq
            .iter()
            .map(|&(i, c)| {
                let mut v = self.item_row(i).to_vec();
                add_assign(&mut v, self.category_row(c));
                v
            })
            .collect();
        let refs: Vec<&[f64]> = cols.iter().map(Vec::as_slice).collect();
        Some(SignalMatrix::from_columns(self.config.dim, &refs).expect("embedding rows are finite"))
    }

    /// Behavior interest `v^u`; zero for a user without clicks.
    pub fn behavior_interest(&self, sample: &Sample) -> Vec<f64> {
        match self.behavior_matrix(sample) {
            None => vec![0.0; self.config.dim],
            Some(b) => attention_forward(&self.query(sample), &b, &self.params.behavior_attention).0,
        }
    }

    /// The most recent `N` exposures as a `d × N` signal, padded per the configuration.
    pub fn exposure_signal(&self, sample: &Sample) -> SignalMatrix {
        let n = self.config.exposure_len;
        let d = self.config.dim;
        let seq = &sample.exposure_seq[sample.exposure_seq.len().saturating_sub(n)..];
        let columns: Vec<Vec<f64>> = seq
            .iter()
            .map(|&(item, cat)| {
                let mut v = self.item_row(item).to_vec();
                add_assign(&mut v, self.category_row(cat));
                v
            })
            .collect();
        let mut m = SignalMatrix::zeros(d, n);
        for (p, i) in self.config.padding.positions(n, seq.len()).into_iter().enumerate() {
            if let Some(i) = i {
                for (c, &v) in columns[i].iter().enumerate() {
                    m.set(c, p, v);
                }
            }
        }
        m
    }

    fn exposure_mean(&self, sample: &Sample) -> (Vec<f64>, usize) {
        let n = self.config.exposure_len;
        let seq = &sample.exposure_seq[sample.exposure_seq.len().saturating_sub(n)..];
        let mut mean = vec![0.0; self.config.dim];
        for &(item, cat) in seq {
            add_assign(&mut mean, self.item_row(item));
            add_assign(&mut mean, self.category_row(cat));
        }
        if !seq.is_empty() {
            let inv = 1.0 / seq.len() as f64;
            mean.iter_mut().for_each(|x| *x *= inv);
        }
        (mean, seq.len())
    }

    /// Exposure interest `w^u` (empty without an exposure branch).
    pub fn exposure_interest(&self, sample: &Sample) -> Result<Vec<f64>> {
        let v = self.behavior_interest(sample);
        self.exposure_interest_with(sample, &self.query(sample), &v)
            .map(|(w, _)| w)
    }

    fn exposure_interest_with(
        &self,
        sample: &Sample,
        query: &[f64],
        behavior: &[f64],
    ) -> Result<(Vec<f64>, ExposureCache)> {
        Ok(match &self.config.branch {
            ExposureBranch::None => (vec![], ExposureCache::None),
            ExposureBranch::AvgPool => (self.exposure_mean(sample).0, ExposureCache::AvgPool),
            ExposureBranch::Gama(_) => {
                let enc = self.encoder.as_ref().expect("gama branch has an encoder");
                let signal = self.exposure_signal(sample);
                let (w, cache) = enc.forward(&signal, query, behavior, &self.params.encoder)?;
                (w.values, ExposureCache::Gama(Box::new(cache)))
            }
        })
    }

    fn forward_cached(&self, sample: &Sample) -> Result<ForwardCache> {
        let query = self.query(sample);
        let behaviors = self.behavior_matrix(sample).map(|b| {
            let (out, alpha, r) = attention_forward(&query, &b, &self.params.behavior_attention);
            (b, out, (alpha, r))
        });
        let behavior_interest = behaviors
            .as_ref()
            .map_or_else(|| vec![0.0; self.config.dim], |(_, v, _)| v.clone());
        let (w, exposure) = self.exposure_interest_with(sample, &query, &behavior_interest)?;

        let mut x = Vec::with_capacity(self.config.mlp_input_len());
        x.extend_from_slice(self.item_row(sample.target_item));
        x.extend_from_slice(self.category_row(sample.target_category));
        x.extend_from_slice(&behavior_interest);
        x.extend_from_slice(&w);

        let mut activations = vec![x];
        let last = self.params.mlp.len() - 1;
        for (i, layer) in self.params.mlp.iter().enumerate() {
            let mut h = layer.weight.transpose_mul_vec(activations.last().expect("non-empty"));
            add_assign(&mut h, &layer.bias);
            if i < last {
                h.iter_mut().for_each(|v| *v = v.max(0.0));
            }
            activations.push(h);
        }
        let logit = activations.last().expect("non-empty")[0];
        Ok(ForwardCache {
            query,
            behaviors: behaviors.map(|(b, _, (alpha, r))| (b, alpha, r)),
            behavior_interest,
            exposure,
            activations,
            logit,
        })
    }

    /// Pre-sigmoid score.
    pub fn logit(&self, sample: &Sample) -> Result<f64> {
        self.forward_cached(sample).map(|c| c.logit)
    }

    /// Click probability.
    pub fn forward(&self, sample: &Sample) -> Result<f64> {
        self.logit(sample).map(sigmoid)
    }

    pub fn predict(&self, samples: &[Sample]) -> Result<Vec<f64>> {
        samples.iter().map(|s| self.forward(s)).collect()
    }

    /// Mean binary cross-entropy and its exact gradients.
    pub fn loss_and_gradients(&self, batch: &[&Sample]) -> Result<(f64, ModelGrads)> {
        if batch.is_empty() {
            return Err(GamaError::EmptyDataset);
        }
        let scale = 1.0 / batch.len() as f64;
        let mut grads = ModelGrads::zeros(&self.config);
        let mut loss = 0.0;
        for sample in batch {
            let cache = self.forward_cached(sample)?;
            let p_raw = sigmoid(cache.logit);
            let p = p_raw.clamp(PROB_CLAMP, 1.0 - PROB_CLAMP);
            loss -= if sample.label { p.ln() } else { (1.0 - p).ln() };
            let g_logit = if p == p_raw {
                (p_raw - if sample.label { 1.0 } else { 0.0 }) * scale
            } else {
                0.0
            };
            self.backward(sample, &cache, g_logit, &mut grads)?;
        }
        Ok((loss * scale, grads))
    }

    pub fn loss(&self, batch: &[&Sample]) -> Result<f64> {
        if batch.is_empty() {
            return Err(GamaError::EmptyDataset);
        }
        let mut loss = 0.0;
        for sample in batch {
            let p = self.forward(sample)?.clamp(PROB_CLAMP, 1.0 - PROB_CLAMP);
            loss -= if sample.label { p.ln() } else { (1.0 - p).ln() };
        }
        Ok(loss / batch.len() as f64)
    }

    fn backward(&self, sample: &Sample, cache: &ForwardCache, g_logit: f64, grads: &mut ModelGrads) -> Result<()> {
        if g_logit == 0.0 {
            return Ok(());
        }
        let d = self.config.dim;
        let mut g = vec![g_logit];
        for (i, layer) in self.params.mlp.iter().enumerate().rev() {
            let input = &cache.activations[i];
            let gl = &mut grads.dense.mlp[i];
            gl.weight.add_outer(input, &g, 1.0);
            add_assign(&mut gl.bias, &g);
            let mut g_in = layer.weight.mul_vec(&g);
            if i > 0 {
                // ReLU of the previous layer
                for (gi, &a) in g_in.iter_mut().zip(input) {
                    if a <= 0.0 {
                        *gi = 0.0;
                    }
                }
            }
            g = g_in;
        }

        let (g_item, rest) = g.split_at(d);
        let (g_cat, rest) = rest.split_at(d);
        let (g_v, g_w) = rest.split_at(d);
        let mut g_query = vec![0.0; d];
        let mut g_behavior = g_v.to_vec();

        match &cache.exposure {
            ExposureCache::None => {}
            ExposureCache::AvgPool => {
                let n = self.config.exposure_len;
                let seq = &sample.exposure_seq[sample.exposure_seq.len().saturating_sub(n)..];
                let inv = 1.0 / seq.len().max(1) as f64;
                let row: Vec<f64> = g_w.iter().map(|x| x * inv).collect();
                for &(item, cat) in seq {
                    add_row(&mut grads.item_embeddings, self.item_index(item), &row);
                    add_row(&mut grads.category_embeddings, self.category_index(cat), &row);
                }
            }
            ExposureCache::Gama(enc_cache) => {
                let enc = self.encoder.as_ref().expect("gama branch has an encoder");
                let eg = enc.backward(
                    enc_cache,
                    &cache.query,
                    &cache.behavior_interest,
                    &self.params.encoder,
                    g_w,
                )?;
                for (acc, a) in grads.dense.encoder.attention.iter_mut().zip(&eg.params.attention) {
                    add_assign(acc.weight.data_mut(), a.weight.data());
                }
                for (acc, gp) in grads.dense.encoder.gates.iter_mut().zip(&eg.params.gates) {
                    add_assign(acc.weight.data_mut(), gp.weight.data());
                    add_assign(&mut acc.bias, &gp.bias);
                }
                add_assign(&mut g_query, &eg.query);
                add_assign(&mut g_behavior, &eg.behavior);
                let n = self.config.exposure_len;
                let seq = &sample.exposure_seq[sample.exposure_seq.len().saturating_sub(n)..];
                let mut per_entry = vec![vec![0.0; d]; seq.len()];
                for (p, i) in self.config.padding.positions(n, seq.len()).into_iter().enumerate() {
                    if let Some(i) = i {
                        for (c, acc) in per_entry[i].iter_mut().enumerate() {
                            *acc += eg.signal.get(c, p);
                        }
                    }
                }
                for (&(item, cat), col) in seq.iter().zip(&per_entry) {
                    add_row(&mut grads.item_embeddings, self.item_index(item), col);
                    add_row(&mut grads.category_embeddings, self.category_index(cat), col);
                }
            }
        }

        if let Some((b, alpha, r)) = &cache.behaviors {
            let mut g_b = SignalMatrix::zeros(d, b.steps());
            attention_backward(
                &cache.query,
                b,
                alpha,
                r,
                &g_behavior,
                &self.params.behavior_attention,
                &mut grads.dense.behavior_attention,
                &mut g_query,
                &mut g_b,
            );
            for (t, &(item, cat)) in sample.behavior_seq.iter().enumerate() {
                let col = g_b.column(t);
                add_row(&mut grads.item_embeddings, self.item_index(item), &col);
                add_row(&mut grads.category_embeddings, self.category_index(cat), &col);
            }
        }

        let mut gi = g_item.to_vec();
        add_assign(&mut gi, &g_query);
        let mut gc = g_cat.to_vec();
        add_assign(&mut gc, &g_query);
        add_row(&mut grads.item_embeddings, self.item_index(sample.target_item), &gi);
        add_row(
            &mut grads.category_embeddings,
            self.category_index(sample.target_category),
            &gc,
        );
        Ok(())
    }

    fn item_index(&self, id: u32) -> u32 {
        (id as usize % self.config.vocab.items) as u32
    }

    fn category_index(&self, id: u32) -> u32 {
        (id as usize % self.config.vocab.categories) as u32
    }

    pub(crate) fn dense_params_mut(&mut self) -> Vec<&mut [f64]> {
        self.params.dense_mut()
    }
}

pub(crate) fn dense_grad_slices(grads: &mut ModelGrads) -> Vec<&mut [f64]> {
    grads.dense_slices()
}
