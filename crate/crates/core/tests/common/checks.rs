//! Finite-difference checks shared by the gradient suite and the acceptance run.

use gama::data::{Sample, Vocab};
use gama::encoder::{Aggregator, EncoderConfig, EncoderParams, GateParams};
use gama::linalg::Matrix;
use gama::{
    aggregate_att, aggregate_att_gradients, encode, encode_gradients, gate, gate_gradients, model::ExposurePadding,
    AttentionParams, BaseName, Component, CtrModel, ExposureBranch, ModelConfig, SignalMatrix,
};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{random_sample, random_signal, random_vec, rel_err};

const STEP: f64 = 1e-5;

/// Largest relative error between `analytic` and central differences of `f`
/// over the listed coordinates of `x`.
pub fn fd_max_rel_err(x: &[f64], analytic: &[f64], coords: &[usize], h: f64, f: impl Fn(&[f64]) -> f64) -> f64 {
    assert_eq!(x.len(), analytic.len());
    let mut probe = x.to_vec();
    let mut worst: f64 = 0.0;
    for &i in coords {
        probe[i] = x[i] + h;
        let up = f(&probe);
        probe[i] = x[i] - h;
        let down = f(&probe);
        probe[i] = x[i];
        worst = worst.max(rel_err(analytic[i], (up - down) / (2.0 * h)));
    }
    worst
}

/// Outcome of a check on a piecewise-smooth objective.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KinkedCheck {
    pub max_rel_err: f64,
    pub probed: usize,
    /// Coordinates whose stencil straddles a ReLU kink and were left out.
    pub kinks: usize,
}

/// Like [`fd_max_rel_err`] but skips coordinates where the two one-sided
/// slopes disagree by more than 5%, which only happens across a kink.
pub fn fd_check_kinked(
    x: &[f64],
    analytic: &[f64],
    coords: &[usize],
    h: f64,
    f: impl Fn(&[f64]) -> f64,
) -> KinkedCheck {
    let base = f(x);
    let mut probe = x.to_vec();
    let mut out = KinkedCheck {
        max_rel_err: 0.0,
        probed: 0,
        kinks: 0,
    };
    for &i in coords {
        probe[i] = x[i] + h;
        let up = f(&probe);
        probe[i] = x[i] - h;
        let down = f(&probe);
        probe[i] = x[i];
        let (right, left) = ((up - base) / h, (base - down) / h);
        if (right - left).abs() > 0.05 * right.abs().max(left.abs()).max(1e-6) {
            out.kinks += 1;
            continue;
        }
        out.probed += 1;
        out.max_rel_err = out.max_rel_err.max(rel_err(analytic[i], (up - down) / (2.0 * h)));
    }
    out
}

fn all_or_subset(rng: &mut ChaCha8Rng, len: usize, max: usize) -> Vec<usize> {
    let mut idx: Vec<usize> = (0..len).collect();
    if len > max {
        idx.shuffle(rng);
        idx.truncate(max);
    }
    idx
}

fn random_gate(rng: &mut ChaCha8Rng, d: usize) -> GateParams {
    GateParams {
        weight: Matrix::uniform(2 * d, d, 1.0, rng),
        bias: random_vec(rng, d),
    }
}

pub fn gate_case(seed: u64) -> f64 {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let d = rng.gen_range(1..=16);
    let params = random_gate(&mut rng, d);
    let (s, v, u) = (
        random_vec(&mut rng, d),
        random_vec(&mut rng, d),
        random_vec(&mut rng, d),
    );
    let (gp, gs, gv) = gate_gradients(&s, &v, &params, &u).unwrap();

    let pack = |p: &GateParams, s: &[f64], v: &[f64]| -> Vec<f64> { [p.weight.data(), &p.bias, s, v].concat() };
    let x = pack(&params, &s, &v);
    let analytic = pack(&gp, &gs, &gv);
    let nw = 2 * d * d;
    let f = |x: &[f64]| {
        let p = GateParams {
            weight: Matrix::from_vec(2 * d, d, x[..nw].to_vec()).unwrap(),
            bias: x[nw..nw + d].to_vec(),
        };
        let out = gate(&x[nw + d..nw + 2 * d], &x[nw + 2 * d..], &p).unwrap();
        gama::linalg::dot(&u, &out)
    };
    let coords: Vec<usize> = (0..x.len()).collect();
    fd_max_rel_err(&x, &analytic, &coords, STEP, f)
}

pub fn attention_case(seed: u64) -> f64 {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let d = rng.gen_range(1..=8);
    let t = rng.gen_range(1..=40);
    let params = AttentionParams {
        weight: Matrix::uniform(d, d, 1.0, &mut rng),
    };
    let s = random_signal(&mut rng, d, t);
    let (q, u) = (random_vec(&mut rng, d), random_vec(&mut rng, d));
    let (gp, gq, gs) = aggregate_att_gradients(&q, &s, &params, &u).unwrap();

    let x = [params.weight.data(), &q, s.values()].concat();
    let analytic = [gp.weight.data(), &gq, gs.values()].concat();
    let f = |x: &[f64]| {
        let p = AttentionParams {
            weight: Matrix::from_vec(d, d, x[..d * d].to_vec()).unwrap(),
        };
        let s = SignalMatrix::new(d, t, x[d * d + d..].to_vec()).unwrap();
        gama::linalg::dot(&u, &aggregate_att(&x[d * d..d * d + d], &s, &p))
    };
    let coords: Vec<usize> = (0..x.len()).collect();
    fd_max_rel_err(&x, &analytic, &coords, STEP, f)
}

/// A random but valid encoder configuration for level `j`.
pub fn random_encoder_config(rng: &mut ChaCha8Rng, j: usize) -> EncoderConfig {
    let mut kept: Vec<Component> = Component::all(j).into_iter().filter(|_| rng.gen_bool(0.6)).collect();
    if kept.is_empty() {
        kept.push(Component::Approx(j));
    }
    EncoderConfig {
        level: j,
        base: *BaseName::ALL.choose(rng).unwrap(),
        kept,
        aggregator: if rng.gen_bool(0.7) {
            Aggregator::Att
        } else {
            Aggregator::Avg
        },
        use_gate: rng.gen_bool(0.7),
        shared_attention: rng.gen_bool(0.5),
        ..EncoderConfig::default()
    }
}

fn pack_encoder(p: &EncoderParams) -> Vec<f64> {
    let mut out = Vec::new();
    for a in &p.attention {
        out.extend_from_slice(a.weight.data());
    }
    for g in &p.gates {
        out.extend_from_slice(g.weight.data());
        out.extend_from_slice(&g.bias);
    }
    out
}

fn unpack_encoder(template: &EncoderParams, x: &[f64]) -> EncoderParams {
    let mut p = template.clone();
    let mut at = 0;
    let mut take = |dst: &mut [f64]| {
        dst.copy_from_slice(&x[at..at + dst.len()]);
        at += dst.len();
    };
    for a in &mut p.attention {
        take(a.weight.data_mut());
    }
    for g in &mut p.gates {
        take(g.weight.data_mut());
        take(&mut g.bias);
    }
    p
}

/// FD check of `encode_gradients` on `d × n` inputs; large cases probe a random
/// subset of coordinates.
pub fn encode_case(seed: u64, d: usize, n: usize) -> f64 {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let j = rng.gen_range(1..=3.min(n.trailing_zeros() as usize));
    let config = random_encoder_config(&mut rng, j);
    let mut params = EncoderParams::init(&config, d, &mut rng);
    for g in &mut params.gates {
        g.bias = random_vec(&mut rng, d);
    }
    let signal = random_signal(&mut rng, d, n);
    let (q, v) = (random_vec(&mut rng, d), random_vec(&mut rng, d));
    let u = random_vec(&mut rng, config.output_len(d));
    let g = encode_gradients(&signal, &q, &v, &config, &params, &u).unwrap();

    let np = pack_encoder(&params).len();
    let x = [pack_encoder(&params), signal.values().to_vec(), q.clone(), v.clone()].concat();
    let analytic = [pack_encoder(&g.params), g.signal.values().to_vec(), g.query, g.behavior].concat();
    let f = |x: &[f64]| {
        let p = unpack_encoder(&params, &x[..np]);
        let s = SignalMatrix::new(d, n, x[np..np + d * n].to_vec()).unwrap();
        let q = &x[np + d * n..np + d * n + d];
        let v = &x[np + d * n + d..];
        let w = encode(&s, q, v, &config, &p).unwrap();
        gama::linalg::dot(&u, &w.values)
    };
    let coords = all_or_subset(&mut rng, x.len(), 400);
    fd_max_rel_err(&x, &analytic, &coords, STEP, f)
}

pub fn model_config(seed: u64, branch: ExposureBranch) -> ModelConfig {
    ModelConfig {
        dim: 4,
        vocab: Vocab {
            items: 12,
            categories: 5,
        },
        exposure_len: 16,
        padding: if seed.is_multiple_of(2) {
            ExposurePadding::Tile
        } else {
            ExposurePadding::Zero
        },
        mlp_widths: vec![8, 4, 1],
        branch,
        seed,
    }
}

/// FD check of the full model's mean loss on a 2-sample batch, every parameter.
pub fn model_case(seed: u64) -> KinkedCheck {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let branch = match seed % 3 {
        0 => ExposureBranch::None,
        1 => ExposureBranch::AvgPool,
        _ => {
            let j = rng.gen_range(1..=3);
            ExposureBranch::Gama(random_encoder_config(&mut rng, j))
        }
    };
    let config = model_config(seed, branch);
    let model = CtrModel::new(config.clone()).unwrap();
    let samples: Vec<Sample> = (0..2).map(|_| random_sample(&mut rng, config.vocab, 5, 20)).collect();
    let batch: Vec<&Sample> = samples.iter().collect();
    let (_, grads) = model.loss_and_gradients(&batch).unwrap();

    let x: Vec<f64> = model
        .params
        .tensors()
        .iter()
        .flat_map(|t| t.3.iter().copied())
        .collect();
    let analytic: Vec<f64> = grads.to_dense(&config).concat();
    let f = |x: &[f64]| {
        let mut m = model.clone();
        let mut at = 0;
        for t in m.params.tensors_mut() {
            t.copy_from_slice(&x[at..at + t.len()]);
            at += t.len();
        }
        m.loss(&batch).unwrap()
    };
    let coords: Vec<usize> = (0..x.len()).collect();
    fd_check_kinked(&x, &analytic, &coords, STEP, f)
}

/// Largest change in `encode` output after adding a signal that lives only in
/// the dropped components.
pub fn denoising_invariance_err(seed: u64) -> f64 {
    use gama::wavelet::{decompose, reconstruct, BoundaryMode};
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let j = rng.gen_range(1..=4);
    let mut config = random_encoder_config(&mut rng, j);
    config.boundary = BoundaryMode::Periodic;
    if config.dropped().is_empty() {
        // keeping all J+1 components leaves nothing to perturb
        let i = rng.gen_range(0..config.kept.len());
        config.kept.remove(i);
    }
    let d = rng.gen_range(1..=8);
    let n = (1 << j) * rng.gen_range(1..=16);
    let params = EncoderParams::init(&config, d, &mut rng);
    let base = gama::make_base(config.base);
    let signal = random_signal(&mut rng, d, n);
    let (q, v) = (random_vec(&mut rng, d), random_vec(&mut rng, d));

    let mut noise = decompose(&signal, &base, j, BoundaryMode::Periodic).unwrap();
    for c in Component::all(j) {
        let slot = noise.component_mut(c).unwrap();
        let steps = slot.steps();
        *slot = if config.kept.contains(&c) {
            SignalMatrix::zeros(d, steps)
        } else {
            let scale = rng.gen_range(0.1..10.0);
            let mut s = random_signal(&mut rng, d, steps);
            s.values_mut().iter_mut().for_each(|x| *x *= scale);
            s
        };
    }
    let perturbation = reconstruct(&noise, &base).unwrap();
    let noisy = signal.linear_combination(1.0, &perturbation, 1.0).unwrap();
    let clean = encode(&signal, &q, &v, &config, &params).unwrap();
    let dirty = encode(&noisy, &q, &v, &config, &params).unwrap();
    clean
        .values
        .iter()
        .zip(&dirty.values)
        .map(|(a, b)| (a - b).abs())
        .fold(0.0, f64::max)
}

/// Counts coordinates where the gate output grows in magnitude or flips sign.
pub fn gate_shrinkage_violations(cases: usize, seed: u64) -> usize {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut bad = 0;
    for _ in 0..cases {
        let d = rng.gen_range(1..=16);
        let params = random_gate(&mut rng, d);
        let s: Vec<f64> = (0..d).map(|_| rng.gen_range(-5.0..5.0)).collect();
        let v: Vec<f64> = (0..d).map(|_| rng.gen_range(-5.0..5.0)).collect();
        let out = gate(&s, &v, &params).unwrap();
        bad += out
            .iter()
            .zip(&s)
            .filter(|(o, x)| o.abs() > x.abs() || **o * **x < 0.0)
            .count();
    }
    bad
}

/// Whether AUC is unchanged, bit for bit, under `x → 2x + 1` and `x → σ(x)`.
pub fn auc_monotone_invariant(seed: u64) -> bool {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = rng.gen_range(2..300);
    let mut scores: Vec<(f64, bool)> = (0..n)
        .map(|_| {
            let coarse = rng.gen_range(-4.0..4.0f64).round() / 2.0;
            let jitter = if rng.gen_bool(0.5) {
                rng.gen_range(0.0..1e-3)
            } else {
                0.0
            };
            (coarse + jitter, rng.gen_bool(0.4))
        })
        .collect();
    scores[0].1 = true;
    scores[1].1 = false;
    let base = gama::auc(&scores).unwrap();
    let affine: Vec<(f64, bool)> = scores.iter().map(|&(s, l)| (2.0 * s + 1.0, l)).collect();
    let squashed: Vec<(f64, bool)> = scores.iter().map(|&(s, l)| (gama::linalg::sigmoid(s), l)).collect();
    gama::auc(&affine).unwrap() == base && gama::auc(&squashed).unwrap() == base
}
