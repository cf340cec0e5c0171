//! Python bindings: wavelet decomposition, band-dropping reconstruction,
//! the encoder with seeded parameters, AUC and RelaImpr.

use std::collections::BTreeMap;

use gama::wavelet::{decompose as decompose_signal, make_base, reconstruct, BoundaryMode, Component, SignalMatrix};
use gama::{encode as encode_signal, EncoderConfig, EncoderParams, GamaError};
use pyo3::exceptions::PyValueError;
use pyo3::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

type Rows = Vec<Vec<f64>>;

fn py_err(e: GamaError) -> PyErr {
    PyValueError::new_err(e.to_string())
}

fn parse<T: std::str::FromStr<Err = GamaError>>(s: &str) -> Result<T, GamaError> {
    s.parse()
}

fn rows(m: &SignalMatrix) -> Rows {
    m.rows().map(<[f64]>::to_vec).collect()
}

pub fn decompose_rows(
    signal: &[Vec<f64>],
    base: &str,
    level: usize,
    boundary: &str,
) -> Result<BTreeMap<String, Rows>, GamaError> {
    let x = SignalMatrix::from_rows(signal)?;
    let dec = decompose_signal(&x, &make_base(parse(base)?), level, parse(boundary)?)?;
    Ok(dec.components().map(|(c, m)| (c.to_string(), rows(m))).collect())
}

pub fn denoise_rows(signal: &[Vec<f64>], base: &str, level: usize, drop: &[String]) -> Result<Rows, GamaError> {
    let x = SignalMatrix::from_rows(signal)?;
    let wb = make_base(parse(base)?);
    let mut dec = decompose_signal(&x, &wb, level, BoundaryMode::Periodic)?;
    for name in drop {
        let c: Component = parse(name)?;
        let m = dec
            .component_mut(c)
            .ok_or_else(|| GamaError::Config(format!("component {c} does not exist at level {level}")))?;
        m.values_mut().fill(0.0);
    }
    Ok(rows(&reconstruct(&dec, &wb)?))
}

#[allow(clippy::too_many_arguments)]
pub fn encode_rows(
    signal: &[Vec<f64>],
    query: &[f64],
    behavior: &[f64],
    base: &str,
    level: usize,
    keep: Option<Vec<String>>,
    aggregator: &str,
    gate: bool,
    seed: u64,
) -> Result<Vec<f64>, GamaError> {
    let x = SignalMatrix::from_rows(signal)?;
    let kept = match keep {
        Some(k) => k.iter().map(|s| parse(s)).collect::<Result<_, _>>()?,
        None => EncoderConfig::default_kept(level),
    };
    let config = EncoderConfig {
        base: parse(base)?,
        level,
        kept,
        aggregator: parse(aggregator)?,
        use_gate: gate,
        ..EncoderConfig::default()
    };
    config.validate()?;
    let params = EncoderParams::init(&config, x.channels(), &mut ChaCha8Rng::seed_from_u64(seed));
    Ok(encode_signal(&x, query, behavior, &config, &params)?.values)
}

/// Wavelet components of a channels × steps signal, keyed `d1 … dJ, aJ`.
#[pyfunction]
#[pyo3(signature = (signal, base = "db3", level = 3, boundary = "periodic"))]
fn decompose(signal: Rows, base: &str, level: usize, boundary: &str) -> PyResult<BTreeMap<String, Rows>> {
    decompose_rows(&signal, base, level, boundary).map_err(py_err)
}

/// Reconstruction with the listed components zeroed (periodic boundary).
#[pyfunction]
#[pyo3(signature = (signal, base = "db3", level = 3, drop = vec!["d3".to_owned()]))]
fn denoise(signal: Rows, base: &str, level: usize, drop: Vec<String>) -> PyResult<Rows> {
    denoise_rows(&signal, base, level, &drop).map_err(py_err)
}

/// Interest vector from an encoder with seeded random parameters.
#[pyfunction]
#[pyo3(signature = (signal, query, behavior, base = "db3", level = 3, keep = None, aggregator = "att", gate = true, seed = 0))]
#[allow(clippy::too_many_arguments)]
fn encode(
    signal: Rows,
    query: Vec<f64>,
    behavior: Vec<f64>,
    base: &str,
    level: usize,
    keep: Option<Vec<String>>,
    aggregator: &str,
    gate: bool,
    seed: u64,
) -> PyResult<Vec<f64>> {
    encode_rows(&signal, &query, &behavior, base, level, keep, aggregator, gate, seed).map_err(py_err)
}

#[pyfunction]
fn auc(scores: Vec<f64>, labels: Vec<bool>) -> PyResult<f64> {
    if scores.len() != labels.len() {
        return Err(PyValueError::new_err("scores and labels differ in length"));
    }
    let pairs: Vec<(f64, bool)> = scores.into_iter().zip(labels).collect();
    gama::auc(&pairs).map_err(py_err)
}

#[pyfunction]
fn relaimpr(auc_model: f64, auc_base: f64) -> PyResult<f64> {
    gama::relaimpr(auc_model, auc_base).map_err(py_err)
}

#[pymodule]
fn gama_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_function(wrap_pyfunction!(decompose, m)?)?;
    m.add_function(wrap_pyfunction!(denoise, m)?)?;
    m.add_function(wrap_pyfunction!(encode, m)?)?;
    m.add_function(wrap_pyfunction!(auc, m)?)?;
    m.add_function(wrap_pyfunction!(relaimpr, m)?)?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn signal() -> Rows {
        (0..2)
            .map(|r| (0..16).map(|t| ((r * 5 + t * 3) % 7) as f64).collect())
            .collect()
    }

    #[test]
    fn decompose_names_every_band() {
        let d = decompose_rows(&signal(), "haar", 2, "periodic").unwrap();
        assert_eq!(d.keys().cloned().collect::<Vec<_>>(), ["a2", "d1", "d2"]);
        assert_eq!(d["a2"][0].len(), 4);
        assert!(decompose_rows(&signal(), "db9", 2, "periodic").is_err());
    }

    #[test]
    fn dropping_nothing_reconstructs() {
        let x = signal();
        let back = denoise_rows(&x, "coif1", 3, &[]).unwrap();
        for (a, b) in back.iter().flatten().zip(x.iter().flatten()) {
            assert!((a - b).abs() < 1e-10);
        }
        assert!(denoise_rows(&x, "coif1", 3, &["d4".into()]).is_err());
    }

    #[test]
    fn encode_is_seeded() {
        let x = signal();
        let q = [0.1, -0.2];
        let a = encode_rows(&x, &q, &q, "db3", 3, None, "att", true, 4).unwrap();
        assert_eq!(a.len(), 2 * 3);
        assert_eq!(a, encode_rows(&x, &q, &q, "db3", 3, None, "att", true, 4).unwrap());
    }
}
