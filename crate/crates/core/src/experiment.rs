//! The synthetic denoising experiment: one log, three exposure branches.
//!
//! A seeded synthetic log is split by time, then the no-exposure backbone,
//! the average-pool exposure branch and the wavelet encoder are trained with
//! the same backbone, budget and seed, and scored on the full and cold test
//! splits.

use crate::data::{
    build_samples, cold_filter, split_time_for_fraction, synth_generate, Dataset, SampleConfig, SynthConfig, Vocab,
};
use crate::encoder::EncoderConfig;
use crate::error::Result;
use crate::metrics::Split;
use crate::model::{ExposureBranch, ModelConfig};
use crate::train::{evaluate, train, TrainConfig};

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub synth: SynthConfig,
    /// Fraction of each user's timeline used for training.
    pub split_fraction: f64,
    /// Seconds.
    pub attribution_window: i64,
    pub model: ModelConfig,
    pub train: TrainConfig,
}

impl ExperimentConfig {
    /// The configuration behind the denoising acceptance check, for one seed.
    pub fn denoising(seed: u64) -> Self {
        let synth = SynthConfig {
            n_users: 5000,
            seed,
            ..SynthConfig::default()
        };
        Self {
            model: ModelConfig {
                vocab: Vocab::default(),
                exposure_len: synth.exposure_len,
                seed,
                ..ModelConfig::default()
            },
            synth,
            split_fraction: 0.5,
            attribution_window: 1200,
            train: TrainConfig {
                epochs: 100,
                batch_size: 128,
                learning_rate: 3e-3,
                seed,
                max_steps: Some(8000),
                ..TrainConfig::default()
            },
        }
    }

    pub fn sample_config(&self) -> SampleConfig {
        SampleConfig {
            split_time: split_time_for_fraction(&self.synth, self.split_fraction),
            exposure_len: self.model.exposure_len,
            behavior_len: self.synth.behavior_len,
            attribution_window: self.attribution_window,
            vocab: self.model.vocab,
        }
    }
}

/// Train, test and cold-test sets built from one synthetic log.
#[derive(Debug, Clone, PartialEq)]
pub struct Splits {
    pub train: Dataset,
    pub test: Dataset,
    pub cold: Dataset,
}

pub fn prepare(config: &ExperimentConfig) -> Result<Splits> {
    let log = synth_generate(&config.synth)?;
    let (train, test) = build_samples(&log, &config.sample_config());
    let cold = cold_filter(&test);
    Ok(Splits { train, test, cold })
}

#[derive(Debug, Clone, PartialEq)]
pub struct BranchResult {
    pub branch: ExposureBranch,
    pub auc_all: f64,
    pub auc_cold: f64,
}

pub fn run_branch(config: &ExperimentConfig, splits: &Splits, branch: ExposureBranch) -> Result<BranchResult> {
    let model_config = ModelConfig {
        branch: branch.clone(),
        ..config.model.clone()
    };
    let model = train(&splits.train, &model_config, &config.train, None)?.model;
    Ok(BranchResult {
        branch,
        auc_all: evaluate(&model, &splits.test, Split::All, None)?.auc,
        auc_cold: evaluate(&model, &splits.cold, Split::Cold, None)?.auc,
    })
}

/// Results for the backbone, the average-pool branch and `encoder`, in that order.
pub fn run_denoising(config: &ExperimentConfig, encoder: &EncoderConfig) -> Result<[BranchResult; 3]> {
    let splits = prepare(config)?;
    Ok([
        run_branch(config, &splits, ExposureBranch::None)?,
        run_branch(config, &splits, ExposureBranch::AvgPool)?,
        run_branch(config, &splits, ExposureBranch::Gama(encoder.clone()))?,
    ])
}
