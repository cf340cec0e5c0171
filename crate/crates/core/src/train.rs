//! Mini-batch training and evaluation.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::data::{Dataset, Sample};
use crate::error::{GamaError, Result};
use crate::linalg::Matrix;
use crate::metrics::{EvalReport, Split};
use crate::model::{dense_grad_slices, CtrModel, ModelConfig, ModelGrads};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum OptimizerKind {
    #[default]
    Adam,
    Sgd,
}

impl OptimizerKind {
    pub fn as_str(self) -> &'static str {
        match self {
            OptimizerKind::Adam => "adam",
            OptimizerKind::Sgd => "sgd",
        }
    }
}

impl fmt::Display for OptimizerKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for OptimizerKind {
    type Err = GamaError;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "adam" => Ok(OptimizerKind::Adam),
            "sgd" => Ok(OptimizerKind::Sgd),
            other => Err(GamaError::Config(format!("unknown optimizer `{other}`"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrainConfig {
    pub epochs: usize,
    pub batch_size: usize,
    pub learning_rate: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub epsilon: f64,
    pub optimizer: OptimizerKind,
    /// Seeds the per-epoch shuffle.
    pub seed: u64,
    /// Stop after this many optimizer steps, if set.
    pub max_steps: Option<usize>,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self {
            epochs: 1,
            batch_size: 256,
            learning_rate: 1e-3,
            beta1: 0.9,
            beta2: 0.999,
            epsilon: 1e-8,
            optimizer: OptimizerKind::Adam,
            seed: 1,
            max_steps: None,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        if self.epochs == 0 || self.batch_size == 0 {
            return Err(GamaError::Config("epochs and batch size must be positive".into()));
        }
        if !self.learning_rate.is_finite() || self.learning_rate < 0.0 {
            return Err(GamaError::Config(format!(
                "learning rate must be a finite non-negative number, got {}",
                self.learning_rate
            )));
        }
        if !(0.0..1.0).contains(&self.beta1)
            || !(0.0..1.0).contains(&self.beta2)
            || self.epsilon.is_nan()
            || self.epsilon <= 0.0
        {
            return Err(GamaError::Config(
                "Adam betas must lie in [0, 1) and epsilon be positive".into(),
            ));
        }
        Ok(())
    }
}

/// Adam with lazy (touched-row) updates for the embedding tables.
struct Optimizer {
    cfg: TrainConfig,
    step: i32,
    dense_m: Vec<Vec<f64>>,
    dense_v: Vec<Vec<f64>>,
    item_m: Matrix,
    item_v: Matrix,
    cat_m: Matrix,
    cat_v: Matrix,
}

impl Optimizer {
    fn new(cfg: &TrainConfig, model: &mut CtrModel) -> Self {
        let dense_m: Vec<Vec<f64>> = model.dense_params_mut().iter().map(|s| vec![0.0; s.len()]).collect();
        let (items, cats, d) = (
            model.config.vocab.items,
            model.config.vocab.categories,
            model.config.dim,
        );
        let adam = cfg.optimizer == OptimizerKind::Adam;
        let table = |rows| Matrix::zeros(if adam { rows } else { 0 }, d);
        Self {
            cfg: cfg.clone(),
            step: 0,
            dense_v: dense_m.clone(),
            dense_m,
            item_m: table(items),
            item_v: table(items),
            cat_m: table(cats),
            cat_v: table(cats),
        }
    }

    fn apply(&mut self, model: &mut CtrModel, grads: &mut ModelGrads) {
        self.step += 1;
        let c = self.cfg.clone();
        let lr = c.learning_rate;
        match c.optimizer {
            OptimizerKind::Sgd => {
                for (p, g) in model.dense_params_mut().into_iter().zip(dense_grad_slices(grads)) {
                    for (x, gx) in p.iter_mut().zip(g.iter()) {
                        *x -= lr * gx;
                    }
                }
                for (&row, g) in &grads.item_embeddings {
                    for (x, gx) in model.params.item_embeddings.row_mut(row as usize).iter_mut().zip(g) {
                        *x -= lr * gx;
                    }
                }
                for (&row, g) in &grads.category_embeddings {
                    for (x, gx) in model.params.category_embeddings.row_mut(row as usize).iter_mut().zip(g) {
                        *x -= lr * gx;
                    }
                }
            }
            OptimizerKind::Adam => {
                let bc1 = 1.0 - c.beta1.powi(self.step);
                let bc2 = 1.0 - c.beta2.powi(self.step);
                let update = |x: &mut f64, g: f64, m: &mut f64, v: &mut f64| {
                    *m = c.beta1 * *m + (1.0 - c.beta1) * g;
                    *v = c.beta2 * *v + (1.0 - c.beta2) * g * g;
                    *x -= lr * (*m / bc1) / ((*v / bc2).sqrt() + c.epsilon);
                };
                for ((p, g), (m, v)) in model
                    .dense_params_mut()
                    .into_iter()
                    .zip(dense_grad_slices(grads))
                    .zip(self.dense_m.iter_mut().zip(self.dense_v.iter_mut()))
                {
                    for i in 0..p.len() {
                        update(&mut p[i], g[i], &mut m[i], &mut v[i]);
                    }
                }
                let rows = |table: &mut Matrix, m: &mut Matrix, v: &mut Matrix, grads: &BTreeMap<u32, Vec<f64>>| {
                    for (&row, g) in grads {
                        let r = row as usize;
                        let (p, mr, vr) = (table.row_mut(r), m.row_mut(r), v.row_mut(r));
                        for i in 0..g.len() {
                            update(&mut p[i], g[i], &mut mr[i], &mut vr[i]);
                        }
                    }
                };
                rows(
                    &mut model.params.item_embeddings,
                    &mut self.item_m,
                    &mut self.item_v,
                    &grads.item_embeddings,
                );
                rows(
                    &mut model.params.category_embeddings,
                    &mut self.cat_m,
                    &mut self.cat_v,
                    &grads.category_embeddings,
                );
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct EpochMetrics {
    pub epoch: usize,
    pub steps: usize,
    pub train_loss: f64,
    pub eval_auc: Option<f64>,
}

#[derive(Debug, Clone)]
pub struct TrainOutcome {
    pub model: CtrModel,
    pub epochs: Vec<EpochMetrics>,
}

/// Trains a freshly initialized model. Deterministic given both seeds.
pub fn train(
    dataset: &Dataset,
    model_config: &ModelConfig,
    cfg: &TrainConfig,
    eval: Option<&Dataset>,
) -> Result<TrainOutcome> {
    let model = CtrModel::new(model_config.clone())?;
    train_model(model, dataset, cfg, eval)
}

/// Continues training `model` in place.
pub fn train_model(
    mut model: CtrModel,
    dataset: &Dataset,
    cfg: &TrainConfig,
    eval: Option<&Dataset>,
) -> Result<TrainOutcome> {
    cfg.validate()?;
    if dataset.is_empty() {
        return Err(GamaError::EmptyDataset);
    }
    let mut opt = Optimizer::new(cfg, &mut model);
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut order: Vec<usize> = (0..dataset.len()).collect();
    let mut epochs = Vec::with_capacity(cfg.epochs);
    let mut total_steps = 0;
    'outer: for epoch in 0..cfg.epochs {
        order.shuffle(&mut rng);
        let mut loss_sum = 0.0;
        let mut steps = 0;
        for chunk in order.chunks(cfg.batch_size) {
            if cfg.max_steps.is_some_and(|m| total_steps >= m) {
                break;
            }
            let batch: Vec<&Sample> = chunk.iter().map(|&i| &dataset.samples[i]).collect();
            let (loss, mut grads) = model.loss_and_gradients(&batch)?;
            opt.apply(&mut model, &mut grads);
            loss_sum += loss;
            steps += 1;
            total_steps += 1;
        }
        let eval_auc = match eval {
            Some(ds) if !ds.is_empty() => Some(evaluate(&model, ds, Split::All, None)?.auc),
            _ => None,
        };
        epochs.push(EpochMetrics {
            epoch: epoch + 1,
            steps,
            train_loss: if steps > 0 { loss_sum / steps as f64 } else { f64::NAN },
            eval_auc,
        });
        if cfg.max_steps.is_some_and(|m| total_steps >= m) {
            break 'outer;
        }
    }
    Ok(TrainOutcome { model, epochs })
}

pub fn scores(model: &CtrModel, dataset: &Dataset) -> Result<Vec<(f64, bool)>> {
    dataset
        .samples
        .iter()
        .map(|s| model.forward(s).map(|p| (p, s.label)))
        .collect()
}

pub fn evaluate(model: &CtrModel, dataset: &Dataset, split: Split, base_auc: Option<f64>) -> Result<EvalReport> {
    EvalReport::new(split, &scores(model, dataset)?, base_auc)
}
