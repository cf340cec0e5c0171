//! On-disk layout of a decomposition: `d1.csv … dJ.csv`, `aJ.csv` (one row per
//! channel) and `meta.json` recording base, level, boundary and shape.

use std::fs;
use std::path::Path;

use super::filters::BaseName;
use super::signal::SignalMatrix;
use super::transform::{BoundaryMode, Decomposition};
use crate::error::{GamaError, Result};

pub const META_FILE: &str = "meta.json";

/// Writes a rectangular numeric CSV, one row per channel.
pub fn write_matrix_csv(path: &Path, m: &SignalMatrix) -> Result<()> {
    let mut out = String::new();
    for row in m.rows() {
        let line: Vec<String> = row.iter().map(|v| format!("{v:e}")).collect();
        out.push_str(&line.join(","));
        out.push('\n');
    }
    fs::write(path, out)?;
    Ok(())
}

/// Parses a rectangular numeric CSV (no header), one row per channel.
pub fn read_matrix_csv(path: &Path) -> Result<SignalMatrix> {
    let text = fs::read_to_string(path)?;
    parse_matrix_csv(&text).map_err(|e| GamaError::Parse(format!("{}: {e}", path.display())))
}

pub fn parse_matrix_csv(text: &str) -> std::result::Result<SignalMatrix, String> {
    let mut rows = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        let row = line
            .split(',')
            .map(|f| f.trim().parse::<f64>())
            .collect::<std::result::Result<Vec<f64>, _>>()
            .map_err(|e| format!("line {}: {e}", i + 1))?;
        rows.push(row);
    }
    if rows.is_empty() {
        return Err("no data rows".into());
    }
    SignalMatrix::from_rows(&rows).map_err(|e| e.to_string())
}

pub fn write_dump(dir: &Path, dec: &Decomposition) -> Result<()> {
    fs::create_dir_all(dir)?;
    for (n, d) in dec.details.iter().enumerate() {
        write_matrix_csv(&dir.join(format!("d{}.csv", n + 1)), d)?;
    }
    write_matrix_csv(&dir.join(format!("a{}.csv", dec.level)), &dec.approx)?;
    let meta = format!(
        "{{\n  \"base\": \"{}\",\n  \"level\": {},\n  \"boundary\": \"{}\",\n  \"channels\": {},\n  \"steps\": {}\n}}\n",
        dec.base,
        dec.level,
        dec.boundary,
        dec.approx.channels(),
        dec.steps
    );
    fs::write(dir.join(META_FILE), meta)?;
    Ok(())
}

pub fn read_dump(dir: &Path) -> Result<Decomposition> {
    let meta_text = fs::read_to_string(dir.join(META_FILE))?;
    let meta: serde_json::Value =
        serde_json::from_str(&meta_text).map_err(|e| GamaError::Parse(format!("{META_FILE}: {e}")))?;
    let field = |k: &str| {
        meta.get(k)
            .ok_or_else(|| GamaError::Parse(format!("{META_FILE}: missing `{k}`")))
    };
    let as_str = |k: &str| -> Result<String> {
        field(k)?
            .as_str()
            .map(str::to_owned)
            .ok_or_else(|| GamaError::Parse(format!("{META_FILE}: `{k}` is not a string")))
    };
    let as_usize = |k: &str| -> Result<usize> {
        field(k)?
            .as_u64()
            .map(|v| v as usize)
            .ok_or_else(|| GamaError::Parse(format!("{META_FILE}: `{k}` is not an integer")))
    };
    let base: BaseName = as_str("base")?.parse()?;
    let boundary: BoundaryMode = as_str("boundary")?.parse()?;
    let level = as_usize("level")?;
    let steps = as_usize("steps")?;
    let details = (1..=level)
        .map(|n| read_matrix_csv(&dir.join(format!("d{n}.csv"))))
        .collect::<Result<Vec<_>>>()?;
    let approx = read_matrix_csv(&dir.join(format!("a{level}.csv")))?;
    Ok(Decomposition {
        level,
        approx,
        details,
        base,
        boundary,
        steps,
    })
}
