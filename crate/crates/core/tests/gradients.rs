mod common;

use common::checks::{attention_case, encode_case, gate_case, model_case};

const TOL: f64 = 1e-4;

#[test]
fn gate_matches_finite_differences() {
    for seed in 0..100 {
        let err = gate_case(seed);
        assert!(err < TOL, "seed {seed}: rel err {err:e}");
    }
}

#[test]
fn attention_matches_finite_differences() {
    for seed in 0..100 {
        let err = attention_case(seed);
        assert!(err < TOL, "seed {seed}: rel err {err:e}");
    }
}

#[test]
fn encode_matches_finite_differences() {
    let shapes = [(4, 16), (4, 128), (16, 16), (16, 128)];
    for seed in 0..100u64 {
        let (d, n) = shapes[seed as usize % shapes.len()];
        let err = encode_case(seed, d, n);
        assert!(err < TOL, "seed {seed} d={d} N={n}: rel err {err:e}");
    }
}

#[test]
fn full_model_matches_finite_differences() {
    let (mut probed, mut kinks) = (0, 0);
    for seed in 0..100 {
        let c = model_case(seed);
        assert!(c.max_rel_err < TOL, "seed {seed}: rel err {:e}", c.max_rel_err);
        probed += c.probed;
        kinks += c.kinks;
    }
    assert!(kinks * 200 < probed, "{kinks} kinked coordinates out of {probed}");
}
