//! Pyramidal analysis and synthesis over multichannel signals.
//!
//! One analysis step computes, per channel,
//! `a[k] = Σ_p H[p] x[p + 2k]` and `d[k] = Σ_p G[p] x[p + 2k]` with `p ∈ [0, L)`.
//! Odd-length inputs are first padded by one step (a wrapped copy of `x[0]`
//! for periodic boundaries, a zero otherwise) so both outputs have width
//! `ceil(N / 2)`. Indices past the padded length wrap (periodic) or read as
//! zero (zero boundary).

use std::fmt;
use std::str::FromStr;

use super::filters::{BaseName, WaveletBase};
use super::signal::SignalMatrix;
use crate::error::{GamaError, Result};

/// How samples past the end of a signal are resolved.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub enum BoundaryMode {
    #[default]
    Periodic,
    Zero,
}

impl BoundaryMode {
    pub fn as_str(self) -> &'static str {
        match self {
            BoundaryMode::Periodic => "periodic",
            BoundaryMode::Zero => "zero",
        }
    }
}

impl fmt::Display for BoundaryMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for BoundaryMode {
    type Err = GamaError;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "periodic" => Ok(BoundaryMode::Periodic),
            "zero" => Ok(BoundaryMode::Zero),
            other => Err(GamaError::Config(format!(
                "unknown boundary mode `{other}` (expected periodic or zero)"
            ))),
        }
    }
}

/// A named component of a level-J decomposition: a detail band `d^n` or the final approximation `a^J`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Component {
    Detail(usize),
    Approx(usize),
}

impl Component {
    /// All components of a level-`level` decomposition, `d1..dJ` then `aJ`.
    pub fn all(level: usize) -> Vec<Component> {
        (1..=level)
            .map(Component::Detail)
            .chain(std::iter::once(Component::Approx(level)))
            .collect()
    }
}

impl fmt::Display for Component {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Component::Detail(n) => write!(f, "d{n}"),
            Component::Approx(n) => write!(f, "a{n}"),
        }
    }
}

impl FromStr for Component {
    type Err = GamaError;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        let bad = || GamaError::Config(format!("bad component name `{s}` (expected d<n> or a<n>)"));
        let (kind, num) = s.split_at(s.chars().next().map_or(0, char::len_utf8));
        let n: usize = num.parse().map_err(|_| bad())?;
        if n == 0 {
            return Err(bad());
        }
        match kind {
            "d" | "D" => Ok(Component::Detail(n)),
            "a" | "A" => Ok(Component::Approx(n)),
            _ => Err(bad()),
        }
    }
}

/// Multiresolution components `{a^J, d^1..d^J}` of a signal.
#[derive(Debug, Clone, PartialEq)]
pub struct Decomposition {
    pub level: usize,
    pub approx: SignalMatrix,
    /// `details[n - 1]` is `d^n`.
    pub details: Vec<SignalMatrix>,
    pub base: BaseName,
    pub boundary: BoundaryMode,
    /// Width of the analyzed signal.
    pub steps: usize,
}

impl Decomposition {
    pub fn component(&self, c: Component) -> Option<&SignalMatrix> {
        match c {
            Component::Detail(n) if n >= 1 && n <= self.level => Some(&self.details[n - 1]),
            Component::Approx(n) if n == self.level => Some(&self.approx),
            _ => None,
        }
    }

    pub fn component_mut(&mut self, c: Component) -> Option<&mut SignalMatrix> {
        match c {
            Component::Detail(n) if n >= 1 && n <= self.level => Some(&mut self.details[n - 1]),
            Component::Approx(n) if n == self.level => Some(&mut self.approx),
            _ => None,
        }
    }

    pub fn components(&self) -> impl Iterator<Item = (Component, &SignalMatrix)> {
        self.details
            .iter()
            .enumerate()
            .map(|(i, d)| (Component::Detail(i + 1), d))
            .chain(std::iter::once((Component::Approx(self.level), &self.approx)))
    }
}

/// Widths `[N, ceil(N/2), ceil(N/4), ...]` for levels `0..=level`.
pub fn level_widths(steps: usize, level: usize) -> Vec<usize> {
    let mut widths = Vec::with_capacity(level + 1);
    let mut w = steps;
    widths.push(w);
    for _ in 0..level {
        w = w.div_ceil(2);
        widths.push(w);
    }
    widths
}

/// Copies `row` into `buf`, padded to even length and extended by `extra`
/// samples according to the boundary mode. Returns the padded (even) length.
fn extend_row(row: &[f64], extra: usize, boundary: BoundaryMode, buf: &mut Vec<f64>) -> usize {
    let n = row.len();
    let padded = n + n % 2;
    buf.clear();
    buf.extend_from_slice(row);
    if padded > n {
        buf.push(match boundary {
            BoundaryMode::Periodic => row[0],
            BoundaryMode::Zero => 0.0,
        });
    }
    match boundary {
        BoundaryMode::Periodic => {
            for i in 0..extra {
                let v = buf[i % padded];
                buf.push(v);
            }
        }
        BoundaryMode::Zero => buf.resize(padded + extra, 0.0),
    }
    padded
}

/// One level of analysis: returns `(approx, detail)`, each of width `ceil(N/2)`.
pub fn analyze_step(x: &SignalMatrix, base: &WaveletBase, boundary: BoundaryMode) -> (SignalMatrix, SignalMatrix) {
    let (h, g) = (base.lowpass(), base.highpass());
    let taps = h.len();
    let half = x.steps().div_ceil(2);
    let mut approx = SignalMatrix::zeros(x.channels(), half);
    let mut detail = SignalMatrix::zeros(x.channels(), half);
    let mut buf = Vec::with_capacity(x.steps() + taps + 1);
    for c in 0..x.channels() {
        extend_row(x.row(c), taps, boundary, &mut buf);
        let d_row = detail.row_mut(c);
        for ((a, d), window) in approx
            .row_mut(c)
            .iter_mut()
            .zip(d_row)
            .zip(buf.windows(taps).step_by(2))
        {
            let (mut sa, mut sd) = (0.0, 0.0);
            for ((&v, &fh), &fg) in window.iter().zip(h).zip(g) {
                sa += v * fh;
                sd += v * fg;
            }
            *a = sa;
            *d = sd;
        }
    }
    (approx, detail)
}

/// Transpose of [`analyze_step`] for an input of width `steps`.
///
/// Maps gradients on `(approx, detail)` back onto the input. For periodic
/// boundaries and even `steps` this is also the exact inverse transform.
pub fn analyze_step_adjoint(
    grad_approx: &SignalMatrix,
    grad_detail: &SignalMatrix,
    steps: usize,
    base: &WaveletBase,
    boundary: BoundaryMode,
) -> Result<SignalMatrix> {
    if grad_approx.channels() != grad_detail.channels() || grad_approx.steps() != grad_detail.steps() {
        return Err(GamaError::Shape(format!(
            "approx is {}x{} but detail is {}x{}",
            grad_approx.channels(),
            grad_approx.steps(),
            grad_detail.channels(),
            grad_detail.steps()
        )));
    }
    let half = grad_approx.steps();
    if steps.div_ceil(2) != half {
        return Err(GamaError::Shape(format!(
            "coefficients of width {half} cannot come from a signal of width {steps}"
        )));
    }
    let (h, g) = (base.lowpass(), base.highpass());
    let taps = h.len();
    let padded = steps + steps % 2;
    let mut out = SignalMatrix::zeros(grad_approx.channels(), steps);
    let mut ext = vec![0.0; padded + taps];
    let mut folded = vec![0.0; padded];
    for c in 0..grad_approx.channels() {
        ext.iter_mut().for_each(|v| *v = 0.0);
        for (k, (&ga, &gd)) in grad_approx.row(c).iter().zip(grad_detail.row(c)).enumerate() {
            for ((x, &fh), &fg) in ext[2 * k..2 * k + taps].iter_mut().zip(h).zip(g) {
                *x += fh * ga + fg * gd;
            }
        }
        folded.copy_from_slice(&ext[..padded]);
        if boundary == BoundaryMode::Periodic {
            for (i, v) in ext[padded..].iter().enumerate() {
                folded[i % padded] += v;
            }
        }
        let row = out.row_mut(c);
        row.copy_from_slice(&folded[..steps]);
        if padded > steps && boundary == BoundaryMode::Periodic {
            row[0] += folded[steps];
        }
    }
    Ok(out)
}

/// Inverse of one analysis step: rebuilds a signal of width `2 * width(approx)`.
pub fn synthesize_step(
    approx: &SignalMatrix,
    detail: &SignalMatrix,
    base: &WaveletBase,
    boundary: BoundaryMode,
) -> Result<SignalMatrix> {
    analyze_step_adjoint(approx, detail, 2 * approx.steps(), base, boundary)
}

fn check_level(steps: usize, level: usize) -> Result<()> {
    if level == 0 || level >= usize::BITS as usize || steps >> level == 0 {
        return Err(GamaError::LevelTooDeep { level, steps });
    }
    Ok(())
}

/// `level` chained analysis steps on successive approximations.
///
/// Requires `1 <= level` and `N >= 2^level`.
pub fn decompose(x: &SignalMatrix, base: &WaveletBase, level: usize, boundary: BoundaryMode) -> Result<Decomposition> {
    check_level(x.steps(), level)?;
    let mut details = Vec::with_capacity(level);
    let (mut approx, d) = analyze_step(x, base, boundary);
    details.push(d);
    for _ in 1..level {
        let (a, d) = analyze_step(&approx, base, boundary);
        details.push(d);
        approx = a;
    }
    Ok(Decomposition {
        level,
        approx,
        details,
        base: base.name(),
        boundary,
        steps: x.steps(),
    })
}

/// Transpose of [`decompose`]: accumulates gradients on every component back onto the input signal.
pub fn decompose_adjoint(grads: &Decomposition, base: &WaveletBase) -> Result<SignalMatrix> {
    let widths = level_widths(grads.steps, grads.level);
    let mut g = grads.approx.clone();
    for n in (1..=grads.level).rev() {
        g = analyze_step_adjoint(&g, &grads.details[n - 1], widths[n - 1], base, grads.boundary)?;
    }
    Ok(g)
}

/// Rebuilds a signal from all of its components (periodic boundary, widths divisible by `2^J`).
pub fn reconstruct(dec: &Decomposition, base: &WaveletBase) -> Result<SignalMatrix> {
    decompose_adjoint(dec, base)
}

/// Brute-force analysis: materializes the `ceil(N/2) × N` analysis matrices and multiplies.
///
/// Only intended as a test oracle for small `N`.
pub fn naive_dwt_matrix(x: &SignalMatrix, base: &WaveletBase, boundary: BoundaryMode) -> (SignalMatrix, SignalMatrix) {
    let n = x.steps();
    let padded = n + n % 2;
    let half = padded / 2;
    let build = |filter: &[f64]| {
        let mut m = vec![vec![0.0; n]; half];
        for (k, row) in m.iter_mut().enumerate() {
            for (p, &f) in filter.iter().enumerate() {
                let idx = p + 2 * k;
                let col = match boundary {
                    BoundaryMode::Periodic => {
                        let j = idx % padded;
                        Some(if j == n { 0 } else { j })
                    }
                    BoundaryMode::Zero => (idx < n).then_some(idx),
                };
                if let Some(col) = col {
                    row[col] += f;
                }
            }
        }
        m
    };
    let apply = |m: &[Vec<f64>]| {
        let mut out = SignalMatrix::zeros(x.channels(), half);
        for c in 0..x.channels() {
            let xr = x.row(c);
            for (k, mrow) in m.iter().enumerate() {
                let mut acc = 0.0;
                for j in 0..n {
                    acc += mrow[j] * xr[j];
                }
                out.set(c, k, acc);
            }
        }
        out
    };
    let lo = build(base.lowpass());
    let hi = build(base.highpass());
    (apply(&lo), apply(&hi))
}
