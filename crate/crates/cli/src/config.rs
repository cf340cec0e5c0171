//! Flat `key = value` run configuration. Flags override file values; every
//! key goes through [`RunConfig::set`], so both paths share one validator.

use std::fmt::Display;
use std::path::Path;
use std::str::FromStr;

use gama::bench::{BenchConfig, EncoderKind};
use gama::data::SynthConfig;
use gama::experiment::ExperimentConfig;
use gama::train::OptimizerKind;
use gama::wavelet::{BaseName, BoundaryMode, Component};
use gama::{Aggregator, EncoderConfig, ExposureBranch, ExposurePadding};

use crate::error::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BranchKind {
    None,
    AvgPool,
    Gama,
}

impl BranchKind {
    fn as_str(self) -> &'static str {
        match self {
            BranchKind::None => "none",
            BranchKind::AvgPool => "avgpool",
            BranchKind::Gama => "gama",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub seed: u64,
    pub experiment: ExperimentConfig,
    pub branch: BranchKind,
    pub encoder: EncoderConfig,
    /// Set when `keep` was given explicitly; otherwise derived from the level.
    pub keep: Option<Vec<Component>>,
    pub split_time: Option<i64>,
    pub bench: BenchConfig,
    pub sweep_bases: Vec<BaseName>,
    pub sweep_levels: Vec<usize>,
}

impl Default for RunConfig {
    fn default() -> Self {
        let seed = 1;
        Self {
            seed,
            experiment: ExperimentConfig::denoising(seed),
            branch: BranchKind::Gama,
            encoder: EncoderConfig::default(),
            keep: None,
            split_time: None,
            bench: BenchConfig::default(),
            sweep_bases: BaseName::ALL.to_vec(),
            sweep_levels: (1..=5).collect(),
        }
    }
}

fn parse<T: FromStr>(key: &str, value: &str) -> Result<T, CliError> {
    value
        .parse()
        .map_err(|_| CliError::Config(format!("`{key}`: cannot parse `{value}`")))
}

fn positive<T: FromStr + PartialOrd + Default + Display>(key: &str, value: &str) -> Result<T, CliError> {
    let v: T = parse(key, value)?;
    if v > T::default() {
        Ok(v)
    } else {
        Err(CliError::Config(format!("`{key}` must be positive, got {v}")))
    }
}

fn probability(key: &str, value: &str) -> Result<f64, CliError> {
    let p: f64 = parse(key, value)?;
    if (0.0..=1.0).contains(&p) {
        Ok(p)
    } else {
        Err(CliError::Config(format!("`{key}` must lie in [0, 1], got {p}")))
    }
}

fn list<T>(key: &str, value: &str, item: impl Fn(&str, &str) -> Result<T, CliError>) -> Result<Vec<T>, CliError> {
    let items: Vec<T> = value
        .split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(|s| item(key, s))
        .collect::<Result<_, _>>()?;
    if items.is_empty() {
        return Err(CliError::Config(format!("`{key}` must not be empty")));
    }
    Ok(items)
}

fn switch(key: &str, value: &str) -> Result<bool, CliError> {
    match value {
        "on" | "true" => Ok(true),
        "off" | "false" => Ok(false),
        _ => Err(CliError::Config(format!("`{key}` must be on or off, got `{value}`"))),
    }
}

fn join<T: Display>(items: &[T]) -> String {
    items.iter().map(T::to_string).collect::<Vec<_>>().join(",")
}

fn bench_encoder(key: &str, value: &str) -> Result<EncoderKind, CliError> {
    EncoderKind::ALL
        .into_iter()
        .find(|k| k.as_str() == value)
        .ok_or_else(|| CliError::Config(format!("`{key}`: unknown encoder `{value}`")))
}

impl RunConfig {
    pub fn from_file(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Config(format!("cannot read config {}: {e}", path.display())))?;
        let mut config = Self::default();
        config.apply_text(&text)?;
        Ok(config)
    }

    pub fn apply_text(&mut self, text: &str) -> Result<(), CliError> {
        for (n, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (k, v) = line
                .split_once('=')
                .ok_or_else(|| CliError::Config(format!("line {}: expected `key = value`", n + 1)))?;
            self.set(k.trim(), v.trim())?;
        }
        Ok(())
    }

    /// Applies one `key = value` setting.
    pub fn set(&mut self, key: &str, value: &str) -> Result<(), CliError> {
        let e = &mut self.experiment;
        let s = &mut e.synth;
        match key {
            "seed" => {
                self.seed = parse(key, value)?;
                s.seed = self.seed;
                e.model.seed = self.seed;
                e.train.seed = self.seed;
                self.bench.seed = self.seed;
            }
            "n_users" => s.n_users = positive(key, value)?,
            "n_items" => s.n_items = positive(key, value)?,
            "n_categories" => s.n_categories = positive(key, value)?,
            "exposure_len" => {
                s.exposure_len = positive(key, value)?;
                e.model.exposure_len = s.exposure_len;
            }
            "behavior_len" => s.behavior_len = positive(key, value)?,
            "noise_rate" => s.noise_rate = probability(key, value)?,
            "interest_period" => s.interest_period = positive(key, value)?,
            "interests_per_user" => s.interests_per_user = positive(key, value)?,
            "click_prob_interest" => s.click_prob_interest = probability(key, value)?,
            "click_prob_noise" => s.click_prob_noise = probability(key, value)?,
            "light_user_rate" => s.light_user_rate = probability(key, value)?,
            "light_click_prob" => s.light_click_prob = probability(key, value)?,
            "split_fraction" => {
                let f = probability(key, value)?;
                if f == 0.0 || f == 1.0 {
                    return Err(CliError::Config(
                        "`split_fraction` must lie strictly between 0 and 1".into(),
                    ));
                }
                e.split_fraction = f;
            }
            "split_time" => self.split_time = Some(parse(key, value)?),
            "attribution_window" => e.attribution_window = positive(key, value)?,
            "vocab_items" => e.model.vocab.items = positive(key, value)?,
            "vocab_categories" => e.model.vocab.categories = positive(key, value)?,
            "dim" => e.model.dim = positive(key, value)?,
            "mlp_widths" => {
                let w = list(key, value, positive::<usize>)?;
                if w.last() != Some(&1) {
                    return Err(CliError::Config("`mlp_widths` must end with 1".into()));
                }
                e.model.mlp_widths = w;
            }
            "padding" => e.model.padding = parse::<ExposurePadding>(key, value)?,
            "branch" => {
                self.branch = [BranchKind::None, BranchKind::AvgPool, BranchKind::Gama]
                    .into_iter()
                    .find(|b| b.as_str() == value)
                    .ok_or_else(|| {
                        CliError::Config(format!("`branch` must be none, avgpool or gama, got `{value}`"))
                    })?;
            }
            "base" => {
                self.encoder.base = parse(key, value)?;
                self.bench.base = self.encoder.base;
            }
            "level" => {
                self.encoder.level = positive(key, value)?;
                self.bench.level = self.encoder.level;
            }
            "keep" => self.keep = Some(list(key, value, parse::<Component>)?),
            "aggregator" => self.encoder.aggregator = parse::<Aggregator>(key, value)?,
            "gate" => self.encoder.use_gate = switch(key, value)?,
            "boundary" => self.encoder.boundary = parse::<BoundaryMode>(key, value)?,
            "shared_attention" => self.encoder.shared_attention = switch(key, value)?,
            "epochs" => e.train.epochs = positive(key, value)?,
            "batch_size" => e.train.batch_size = positive(key, value)?,
            "learning_rate" => e.train.learning_rate = positive(key, value)?,
            "max_steps" => {
                let n: usize = parse(key, value)?;
                e.train.max_steps = (n > 0).then_some(n);
            }
            "optimizer" => e.train.optimizer = parse::<OptimizerKind>(key, value)?,
            "bench_lengths" => self.bench.lengths = list(key, value, positive::<usize>)?,
            "bench_dim" => self.bench.dim = positive(key, value)?,
            "bench_reps" => self.bench.repetitions = positive(key, value)?,
            "bench_warmup" => self.bench.warmup = parse(key, value)?,
            "bench_encoders" => self.bench.encoders = list(key, value, bench_encoder)?,
            "sweep_bases" => self.sweep_bases = list(key, value, parse::<BaseName>)?,
            "sweep_levels" => self.sweep_levels = list(key, value, positive::<usize>)?,
            _ => return Err(CliError::Config(format!("unknown config key `{key}`"))),
        }
        Ok(())
    }

    /// Encoder settings with `keep` resolved for the configured level.
    pub fn encoder_config(&self) -> EncoderConfig {
        self.encoder_at(self.encoder.base, self.encoder.level)
    }

    /// Encoder settings at another base and level. An explicit `keep` only
    /// applies at the configured level.
    pub fn encoder_at(&self, base: BaseName, level: usize) -> EncoderConfig {
        let kept = match &self.keep {
            Some(k) if level == self.encoder.level => k.clone(),
            _ => EncoderConfig::default_kept(level),
        };
        EncoderConfig {
            base,
            level,
            kept,
            ..self.encoder.clone()
        }
    }

    pub fn branch(&self) -> ExposureBranch {
        match self.branch {
            BranchKind::None => ExposureBranch::None,
            BranchKind::AvgPool => ExposureBranch::AvgPool,
            BranchKind::Gama => ExposureBranch::Gama(self.encoder_config()),
        }
    }

    pub fn synth(&self) -> &SynthConfig {
        &self.experiment.synth
    }

    /// Every key with its resolved value, in [`RunConfig::set`] order.
    pub fn lines(&self) -> Vec<(&'static str, String)> {
        let e = &self.experiment;
        let s = &e.synth;
        let enc = self.encoder_config();
        vec![
            ("seed", self.seed.to_string()),
            ("n_users", s.n_users.to_string()),
            ("n_items", s.n_items.to_string()),
            ("n_categories", s.n_categories.to_string()),
            ("exposure_len", s.exposure_len.to_string()),
            ("behavior_len", s.behavior_len.to_string()),
            ("noise_rate", s.noise_rate.to_string()),
            ("interest_period", s.interest_period.to_string()),
            ("interests_per_user", s.interests_per_user.to_string()),
            ("click_prob_interest", s.click_prob_interest.to_string()),
            ("click_prob_noise", s.click_prob_noise.to_string()),
            ("light_user_rate", s.light_user_rate.to_string()),
            ("light_click_prob", s.light_click_prob.to_string()),
            ("split_fraction", e.split_fraction.to_string()),
            (
                "split_time",
                self.split_time.map_or_else(|| "auto".to_owned(), |t| t.to_string()),
            ),
            ("attribution_window", e.attribution_window.to_string()),
            ("vocab_items", e.model.vocab.items.to_string()),
            ("vocab_categories", e.model.vocab.categories.to_string()),
            ("dim", e.model.dim.to_string()),
            ("mlp_widths", join(&e.model.mlp_widths)),
            ("padding", e.model.padding.to_string()),
            ("branch", self.branch.as_str().to_owned()),
            ("base", enc.base.to_string()),
            ("level", enc.level.to_string()),
            ("keep", join(&enc.kept)),
            ("aggregator", enc.aggregator.to_string()),
            ("gate", if enc.use_gate { "on" } else { "off" }.to_owned()),
            ("boundary", enc.boundary.to_string()),
            (
                "shared_attention",
                if enc.shared_attention { "on" } else { "off" }.to_owned(),
            ),
            ("epochs", e.train.epochs.to_string()),
            ("batch_size", e.train.batch_size.to_string()),
            ("learning_rate", e.train.learning_rate.to_string()),
            ("max_steps", e.train.max_steps.unwrap_or(0).to_string()),
            ("optimizer", e.train.optimizer.to_string()),
            ("bench_lengths", join(&self.bench.lengths)),
            ("bench_dim", self.bench.dim.to_string()),
            ("bench_reps", self.bench.repetitions.to_string()),
            ("bench_warmup", self.bench.warmup.to_string()),
            ("bench_encoders", join(&self.bench.encoders)),
            ("sweep_bases", join(&self.sweep_bases)),
            ("sweep_levels", join(&self.sweep_levels)),
        ]
    }

    /// The resolved configuration as `# key = value` comment lines.
    pub fn header(&self) -> String {
        self.lines().iter().map(|(k, v)| format!("# {k} = {v}\n")).collect()
    }
}
