//! Reconstruction, energy and oracle checks for the filter bank.

use gama::wavelet::{analyze_step, make_base, naive_dwt_matrix, synthesize_step, BaseName, BoundaryMode};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::random_signal;

pub const PR_LENGTHS: [usize; 4] = [8, 16, 64, 1024];
pub const ORACLE_LENGTHS: [usize; 3] = [8, 10, 16];

/// `max |synthesize(analyze(x)) - x|` on a random 3-channel signal.
pub fn reconstruction_err(name: BaseName, n: usize, seed: u64) -> f64 {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let base = make_base(name);
    let x = random_signal(&mut rng, 3, n);
    let (a, d) = analyze_step(&x, &base, BoundaryMode::Periodic);
    synthesize_step(&a, &d, &base, BoundaryMode::Periodic)
        .unwrap()
        .max_abs_diff(&x)
}

/// `| ‖x‖² − ‖a‖² − ‖d‖² |` for one periodic analysis step.
pub fn parseval_err(name: BaseName, n: usize, seed: u64) -> f64 {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let x = random_signal(&mut rng, 3, n);
    let (a, d) = analyze_step(&x, &make_base(name), BoundaryMode::Periodic);
    (x.squared_norm() - a.squared_norm() - d.squared_norm()).abs()
}

/// Largest deviation between the fast step and the explicit matrix product.
pub fn oracle_err(name: BaseName, n: usize, boundary: BoundaryMode, seed: u64) -> f64 {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let base = make_base(name);
    let x = random_signal(&mut rng, 2, n);
    let (a, d) = analyze_step(&x, &base, boundary);
    let (na, nd) = naive_dwt_matrix(&x, &base, boundary);
    a.max_abs_diff(&na).max(d.max_abs_diff(&nd))
}
