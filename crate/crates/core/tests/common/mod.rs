#![allow(dead_code)]

pub mod checks;
pub mod metrics;
pub mod wavelet;

use gama::data::{Sample, Vocab};
use gama::SignalMatrix;
use rand::Rng;
use rand_chacha::ChaCha8Rng;

/// Relative error with an absolute floor so that two near-zero values agree.
pub fn rel_err(analytic: f64, numeric: f64) -> f64 {
    (analytic - numeric).abs() / analytic.abs().max(numeric.abs()).max(1e-6)
}

pub fn random_vec(rng: &mut ChaCha8Rng, n: usize) -> Vec<f64> {
    (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect()
}

pub fn random_signal(rng: &mut ChaCha8Rng, d: usize, n: usize) -> SignalMatrix {
    SignalMatrix::new(d, n, random_vec(rng, d * n)).unwrap()
}

pub fn random_sample(rng: &mut ChaCha8Rng, vocab: Vocab, max_behaviors: usize, max_exposures: usize) -> Sample {
    let pair = |rng: &mut ChaCha8Rng| {
        (
            rng.gen_range(0..vocab.items as u32),
            rng.gen_range(0..vocab.categories as u32),
        )
    };
    let nb = rng.gen_range(0..=max_behaviors);
    let ne = rng.gen_range(0..=max_exposures);
    let behavior_seq = (0..nb).map(|_| pair(rng)).collect();
    let exposure_seq = (0..ne).map(|_| pair(rng)).collect();
    let (target_item, target_category) = pair(rng);
    Sample {
        user_id: "u".into(),
        behavior_seq,
        exposure_seq,
        target_item,
        target_category,
        label: rng.gen_bool(0.5),
        timestamp: 0,
        history_end: None,
    }
}
