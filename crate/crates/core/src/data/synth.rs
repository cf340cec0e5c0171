//! Synthetic exposure/click logs with planted multi-scale interest.
//!
//! Every user owns a few favorite categories. The preferred category steps to
//! the next favorite every `interest_period` exposures. Each exposure is drawn
//! from the preferred category with probability `1 − ρ`; otherwise it is an
//! isolated exposure drawn uniformly from items unrelated to any favorite.
//! On-interest exposures are clicked often, isolated ones almost never. A
//! fraction of users are light clickers, which produces cold impressions.

use rand::seq::index::sample as sample_indices;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::log::{Event, InteractionLog, LogRow};
use crate::error::{GamaError, Result};

/// Simulated log span: five days, split four/one by default.
pub const SPAN_SECONDS: i64 = 5 * 86_400;

#[derive(Debug, Clone, PartialEq)]
pub struct SynthConfig {
    pub n_users: usize,
    pub n_items: usize,
    pub n_categories: usize,
    /// Exposures per user.
    pub exposure_len: usize,
    /// Behavior window used when samples are built from this log.
    pub behavior_len: usize,
    /// Probability ρ that an exposure is isolated noise.
    pub noise_rate: f64,
    /// Exposures per interest phase.
    pub interest_period: usize,
    pub seed: u64,
    /// Favorite categories per user.
    pub interests_per_user: usize,
    pub click_prob_interest: f64,
    pub click_prob_noise: f64,
    /// Fraction of users who rarely click.
    pub light_user_rate: f64,
    /// On-interest click probability for light users.
    pub light_click_prob: f64,
}

impl Default for SynthConfig {
    fn default() -> Self {
        Self {
            n_users: 1000,
            n_items: 120,
            n_categories: 12,
            exposure_len: 128,
            behavior_len: 32,
            noise_rate: 0.3,
            interest_period: 16,
            seed: 7,
            interests_per_user: 3,
            click_prob_interest: 0.07,
            click_prob_noise: 0.0,
            light_user_rate: 0.5,
            light_click_prob: 0.02,
        }
    }
}

impl SynthConfig {
    pub fn validate(&self) -> Result<()> {
        let prob = |name: &str, p: f64| {
            if (0.0..=1.0).contains(&p) {
                Ok(())
            } else {
                Err(GamaError::Config(format!("{name} must lie in [0, 1], got {p}")))
            }
        };
        prob("noise_rate", self.noise_rate)?;
        prob("click_prob_interest", self.click_prob_interest)?;
        prob("click_prob_noise", self.click_prob_noise)?;
        prob("light_user_rate", self.light_user_rate)?;
        prob("light_click_prob", self.light_click_prob)?;
        for (name, v) in [
            ("n_users", self.n_users),
            ("n_items", self.n_items),
            ("exposure_len", self.exposure_len),
            ("interest_period", self.interest_period),
            ("interests_per_user", self.interests_per_user),
        ] {
            if v == 0 {
                return Err(GamaError::Config(format!("{name} must be positive")));
            }
        }
        if self.n_categories <= self.interests_per_user {
            return Err(GamaError::Config(format!(
                "n_categories ({}) must exceed interests_per_user ({}) so isolated exposures exist",
                self.n_categories, self.interests_per_user
            )));
        }
        if self.n_items < self.n_categories {
            return Err(GamaError::Config("every category needs at least one item".into()));
        }
        Ok(())
    }

    /// Category of item `i`.
    pub fn category_of(&self, item: usize) -> usize {
        item % self.n_categories
    }
}

/// Ground truth recorded while generating.
#[derive(Debug, Clone, PartialEq)]
pub struct UserTruth {
    pub user_id: String,
    pub favorites: Vec<usize>,
    pub light: bool,
    /// Preferred category at each exposure.
    pub preferred: Vec<usize>,
    /// Category of each exposure.
    pub exposed: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SynthOutput {
    pub log: InteractionLog,
    pub truth: Vec<UserTruth>,
}

pub fn synth_generate(config: &SynthConfig) -> Result<InteractionLog> {
    synth_generate_with_truth(config).map(|o| o.log)
}

pub fn synth_generate_with_truth(config: &SynthConfig) -> Result<SynthOutput> {
    config.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let n = config.exposure_len;
    let step = (SPAN_SECONDS / n as i64).max(2);
    let items_per_cat = config.n_items / config.n_categories;

    let mut rows = Vec::with_capacity(config.n_users * n * 2);
    let mut truth = Vec::with_capacity(config.n_users);
    for u in 0..config.n_users {
        let user_id = format!("u{u}");
        let favorites: Vec<usize> = sample_indices(&mut rng, config.n_categories, config.interests_per_user).into_vec();
        let light = rng.gen_bool(config.light_user_rate);
        let phase_offset = rng.gen_range(0..config.interests_per_user);
        let p_click = if light {
            config.light_click_prob
        } else {
            config.click_prob_interest
        };
        let mut preferred = Vec::with_capacity(n);
        let mut exposed = Vec::with_capacity(n);
        for k in 0..n {
            let phase = (k / config.interest_period + phase_offset) % config.interests_per_user;
            let pref = favorites[phase];
            let noise = rng.gen_bool(config.noise_rate);
            let category = if noise {
                loop {
                    let c = rng.gen_range(0..config.n_categories);
                    if !favorites.contains(&c) {
                        break c;
                    }
                }
            } else {
                pref
            };
            let item = category + config.n_categories * rng.gen_range(0..items_per_cat);
            let ts = k as i64 * step + rng.gen_range(0..step / 2);
            let row = |event, timestamp| LogRow {
                user_id: user_id.clone(),
                item_id: format!("i{item}"),
                category_id: format!("c{category}"),
                brand_id: format!("b{}", item % 97),
                event,
                timestamp,
            };
            rows.push(row(Event::Exposure, ts));
            let p = if noise { config.click_prob_noise } else { p_click };
            if rng.gen_bool(p) {
                rows.push(row(Event::Click, ts + 1 + rng.gen_range(0..step / 4)));
            }
            preferred.push(pref);
            exposed.push(category);
        }
        truth.push(UserTruth {
            user_id,
            favorites,
            light,
            preferred,
            exposed,
        });
    }
    Ok(SynthOutput {
        log: InteractionLog { rows },
        truth,
    })
}

/// Timestamp separating the first `fraction` of every user's timeline from the rest.
pub fn split_time_for_fraction(config: &SynthConfig, fraction: f64) -> i64 {
    let step = (SPAN_SECONDS / config.exposure_len as i64).max(2);
    let k = (config.exposure_len as f64 * fraction).round() as i64;
    k * step
}
