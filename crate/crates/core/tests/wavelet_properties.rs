mod common;

use common::random_signal;
use common::wavelet::{oracle_err, parseval_err, reconstruction_err, ORACLE_LENGTHS, PR_LENGTHS};
use gama::wavelet::{
    analyze_step, analyze_step_adjoint, decompose, decompose_adjoint, make_base, reconstruct, BaseName, BoundaryMode,
    Decomposition, SignalMatrix,
};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn dot(a: &SignalMatrix, b: &SignalMatrix) -> f64 {
    a.values().iter().zip(b.values()).map(|(x, y)| x * y).sum()
}

fn dec_dot(a: &Decomposition, b: &Decomposition) -> f64 {
    dot(&a.approx, &b.approx) + a.details.iter().zip(&b.details).map(|(x, y)| dot(x, y)).sum::<f64>()
}

fn base_strategy() -> impl Strategy<Value = BaseName> {
    prop::sample::select(BaseName::ALL.to_vec())
}

fn boundary_strategy() -> impl Strategy<Value = BoundaryMode> {
    prop_oneof![Just(BoundaryMode::Periodic), Just(BoundaryMode::Zero)]
}

#[test]
fn perfect_reconstruction_every_base() {
    for name in BaseName::ALL {
        for n in PR_LENGTHS {
            for seed in 0..3 {
                let err = reconstruction_err(name, n, seed);
                assert!(err < 1e-10, "{name} N={n}: {err:e}");
            }
        }
    }
}

#[test]
fn parseval_every_base() {
    for name in BaseName::ALL {
        for n in PR_LENGTHS {
            let err = parseval_err(name, n, 11);
            assert!(err < 1e-9, "{name} N={n}: {err:e}");
        }
    }
}

#[test]
fn fast_step_matches_matrix_oracle() {
    for name in BaseName::ALL {
        for n in ORACLE_LENGTHS {
            for boundary in [BoundaryMode::Periodic, BoundaryMode::Zero] {
                let err = oracle_err(name, n, boundary, 5);
                assert!(err < 1e-12, "{name} N={n} {boundary}: {err:e}");
            }
        }
    }
}

#[test]
fn multilevel_reconstruction() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for name in BaseName::ALL {
        let base = make_base(name);
        let x = random_signal(&mut rng, 4, 256);
        for level in 1..=5 {
            let dec = decompose(&x, &base, level, BoundaryMode::Periodic).unwrap();
            let energy = dec.approx.squared_norm() + dec.details.iter().map(|d| d.squared_norm()).sum::<f64>();
            assert!((energy - x.squared_norm()).abs() < 1e-9);
            assert!(reconstruct(&dec, &base).unwrap().max_abs_diff(&x) < 1e-10);
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn analysis_is_linear(
        name in base_strategy(),
        boundary in boundary_strategy(),
        n in 1usize..40,
        seed in any::<u64>(),
        alpha in -3.0f64..3.0,
        beta in -3.0f64..3.0,
    ) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let base = make_base(name);
        let x = random_signal(&mut rng, 2, n);
        let y = random_signal(&mut rng, 2, n);
        let (ax, dx) = analyze_step(&x, &base, boundary);
        let (ay, dy) = analyze_step(&y, &base, boundary);
        let (az, dz) = analyze_step(&x.linear_combination(alpha, &y, beta).unwrap(), &base, boundary);
        prop_assert!(az.max_abs_diff(&ax.linear_combination(alpha, &ay, beta).unwrap()) < 1e-12);
        prop_assert!(dz.max_abs_diff(&dx.linear_combination(alpha, &dy, beta).unwrap()) < 1e-12);
    }

    #[test]
    fn channels_are_independent(
        name in base_strategy(),
        boundary in boundary_strategy(),
        n in 2usize..40,
        seed in any::<u64>(),
    ) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let base = make_base(name);
        let x = random_signal(&mut rng, 3, n);
        let (a, d) = analyze_step(&x, &base, boundary);
        for c in 0..3 {
            let single = SignalMatrix::new(1, n, x.row(c).to_vec()).unwrap();
            let (sa, sd) = analyze_step(&single, &base, boundary);
            prop_assert_eq!(sa.row(0), a.row(c));
            prop_assert_eq!(sd.row(0), d.row(c));
        }
    }

    #[test]
    fn matches_oracle_any_length(
        name in base_strategy(),
        boundary in boundary_strategy(),
        n in 1usize..48,
        seed in any::<u64>(),
    ) {
        prop_assert!(oracle_err(name, n, boundary, seed) < 1e-12);
    }

    #[test]
    fn reconstruction_any_even_length(name in base_strategy(), half in 1usize..64, seed in any::<u64>()) {
        prop_assert!(reconstruction_err(name, 2 * half, seed) < 1e-10);
    }

    #[test]
    fn adjoint_is_transpose(
        name in base_strategy(),
        boundary in boundary_strategy(),
        n in 1usize..40,
        seed in any::<u64>(),
    ) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let base = make_base(name);
        let x = random_signal(&mut rng, 2, n);
        let (a, d) = analyze_step(&x, &base, boundary);
        let ga = random_signal(&mut rng, 2, a.steps());
        let gd = random_signal(&mut rng, 2, d.steps());
        let back = analyze_step_adjoint(&ga, &gd, n, &base, boundary).unwrap();
        let lhs = dot(&a, &ga) + dot(&d, &gd);
        prop_assert!((lhs - dot(&x, &back)).abs() < 1e-10);
    }

    #[test]
    fn multilevel_adjoint_is_transpose(
        name in base_strategy(),
        boundary in boundary_strategy(),
        n in 8usize..80,
        level in 1usize..=3,
        seed in any::<u64>(),
    ) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let base = make_base(name);
        let x = random_signal(&mut rng, 2, n);
        let dec = decompose(&x, &base, level, boundary).unwrap();
        let mut g = dec.clone();
        g.approx = random_signal(&mut rng, 2, dec.approx.steps());
        for d in &mut g.details {
            *d = random_signal(&mut rng, 2, d.steps());
        }
        let back = decompose_adjoint(&g, &base).unwrap();
        prop_assert!((dec_dot(&dec, &g) - dot(&x, &back)).abs() < 1e-10);
    }
}

#[test]
fn too_deep_decomposition_is_rejected() {
    let base = make_base(BaseName::Haar);
    let x = SignalMatrix::zeros(1, 8);
    assert!(decompose(&x, &base, 3, BoundaryMode::Periodic).is_ok());
    assert!(decompose(&x, &base, 4, BoundaryMode::Periodic).is_err());
    assert!(decompose(&x, &base, 0, BoundaryMode::Periodic).is_err());
}
