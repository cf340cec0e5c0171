//! Binary model checkpoints.
//!
//! Layout (little-endian):
//!
//! ```text
//! "GAMA"  u32 version  u32 tensor_count
//! per tensor: u32 name_len, name bytes, u64 rows, u64 cols
//! per tensor, in manifest order: rows*cols f64 values
//! trailing UTF-8 text: the model configuration as `key=value` lines
//! ```

use std::collections::BTreeMap;
use std::fs;
use std::path::Path;

use crate::data::Vocab;
use crate::encoder::{Aggregator, EncoderConfig};
use crate::error::{GamaError, Result};
use crate::model::{CtrModel, ExposureBranch, ModelConfig, ModelParams};
use crate::wavelet::Component;

pub const MAGIC: &[u8; 4] = b"GAMA";
pub const FORMAT_VERSION: u32 = 1;

/// `key=value` lines describing a model configuration.
pub fn config_lines(config: &ModelConfig) -> Vec<(String, String)> {
    let mut kv = vec![
        ("dim".to_owned(), config.dim.to_string()),
        ("vocab_items".to_owned(), config.vocab.items.to_string()),
        ("vocab_categories".to_owned(), config.vocab.categories.to_string()),
        ("exposure_len".to_owned(), config.exposure_len.to_string()),
        ("padding".to_owned(), config.padding.to_string()),
        ("mlp_widths".to_owned(), join(&config.mlp_widths)),
        ("seed".to_owned(), config.seed.to_string()),
        ("branch".to_owned(), config.branch.kind().to_owned()),
    ];
    if let ExposureBranch::Gama(enc) = &config.branch {
        kv.extend([
            ("level".to_owned(), enc.level.to_string()),
            ("base".to_owned(), enc.base.to_string()),
            ("keep".to_owned(), join(&enc.kept)),
            ("aggregator".to_owned(), enc.aggregator.to_string()),
            ("gate".to_owned(), if enc.use_gate { "on" } else { "off" }.to_owned()),
            ("boundary".to_owned(), enc.boundary.to_string()),
            ("shared_attention".to_owned(), enc.shared_attention.to_string()),
        ]);
    }
    kv
}

fn join<T: ToString>(items: &[T]) -> String {
    items.iter().map(T::to_string).collect::<Vec<_>>().join(",")
}

pub fn parse_config_lines(text: &str) -> Result<ModelConfig> {
    let mut kv = BTreeMap::new();
    for line in text.lines().map(str::trim).filter(|l| !l.is_empty()) {
        let (k, v) = line
            .split_once('=')
            .ok_or_else(|| GamaError::Checkpoint(format!("bad config line `{line}`")))?;
        kv.insert(k.trim().to_owned(), v.trim().to_owned());
    }
    let get = |k: &str| {
        kv.get(k)
            .map(String::as_str)
            .ok_or_else(|| GamaError::Checkpoint(format!("config key `{k}` missing")))
    };
    let num = |k: &str| -> Result<usize> {
        get(k)?
            .parse()
            .map_err(|_| GamaError::Checkpoint(format!("config key `{k}` is not an integer")))
    };
    let branch = match get("branch")? {
        "none" => ExposureBranch::None,
        "avgpool" => ExposureBranch::AvgPool,
        "gama" => ExposureBranch::Gama(EncoderConfig {
            level: num("level")?,
            base: get("base")?.parse()?,
            kept: get("keep")?
                .split(',')
                .map(str::parse::<Component>)
                .collect::<Result<_>>()?,
            aggregator: get("aggregator")?.parse::<Aggregator>()?,
            use_gate: get("gate")? == "on",
            boundary: get("boundary")?.parse()?,
            shared_attention: get("shared_attention")? == "true",
        }),
        other => return Err(GamaError::Checkpoint(format!("unknown branch `{other}`"))),
    };
    Ok(ModelConfig {
        dim: num("dim")?,
        vocab: Vocab {
            items: num("vocab_items")?,
            categories: num("vocab_categories")?,
        },
        exposure_len: num("exposure_len")?,
        padding: get("padding")?.parse()?,
        mlp_widths: get("mlp_widths")?
            .split(',')
            .map(|s| s.trim().parse::<usize>())
            .collect::<std::result::Result<_, _>>()
            .map_err(|_| GamaError::Checkpoint("bad mlp_widths".into()))?,
        branch,
        seed: get("seed")?
            .parse()
            .map_err(|_| GamaError::Checkpoint("bad seed".into()))?,
    })
}

pub fn encode_checkpoint(model: &CtrModel) -> Vec<u8> {
    let tensors = model.params.tensors();
    let mut out = Vec::new();
    out.extend_from_slice(MAGIC);
    out.extend_from_slice(&FORMAT_VERSION.to_le_bytes());
    out.extend_from_slice(&(tensors.len() as u32).to_le_bytes());
    for (name, rows, cols, _) in &tensors {
        out.extend_from_slice(&(name.len() as u32).to_le_bytes());
        out.extend_from_slice(name.as_bytes());
        out.extend_from_slice(&(*rows as u64).to_le_bytes());
        out.extend_from_slice(&(*cols as u64).to_le_bytes());
    }
    for (_, _, _, values) in &tensors {
        for v in *values {
            out.extend_from_slice(&v.to_le_bytes());
        }
    }
    for (k, v) in config_lines(&model.config) {
        out.extend_from_slice(format!("{k}={v}\n").as_bytes());
    }
    out
}

struct Reader<'a> {
    buf: &'a [u8],
    pos: usize,
}

impl<'a> Reader<'a> {
    fn take(&mut self, n: usize) -> Result<&'a [u8]> {
        let end = self
            .pos
            .checked_add(n)
            .filter(|&e| e <= self.buf.len())
            .ok_or_else(|| GamaError::Checkpoint("unexpected end of file".into()))?;
        let s = &self.buf[self.pos..end];
        self.pos = end;
        Ok(s)
    }

    fn u32(&mut self) -> Result<u32> {
        Ok(u32::from_le_bytes(self.take(4)?.try_into().expect("4 bytes")))
    }

    fn u64(&mut self) -> Result<u64> {
        Ok(u64::from_le_bytes(self.take(8)?.try_into().expect("8 bytes")))
    }
}

pub fn decode_checkpoint(bytes: &[u8]) -> Result<CtrModel> {
    let mut r = Reader { buf: bytes, pos: 0 };
    if r.take(4)? != MAGIC {
        return Err(GamaError::Checkpoint("bad magic".into()));
    }
    let version = r.u32()?;
    if version != FORMAT_VERSION {
        return Err(GamaError::Checkpoint(format!("unsupported format version {version}")));
    }
    let count = r.u32()? as usize;
    let mut manifest = Vec::with_capacity(count.min(1024));
    for _ in 0..count {
        let len = r.u32()? as usize;
        let name = std::str::from_utf8(r.take(len)?)
            .map_err(|_| GamaError::Checkpoint("tensor name is not UTF-8".into()))?
            .to_owned();
        let rows = r.u64()? as usize;
        let cols = r.u64()? as usize;
        manifest.push((name, rows, cols));
    }
    let mut data = Vec::with_capacity(count.min(1024));
    for (_, rows, cols) in &manifest {
        let n = rows
            .checked_mul(*cols)
            .and_then(|n| n.checked_mul(8))
            .ok_or_else(|| GamaError::Checkpoint("tensor too large".into()))?;
        let raw = r.take(n)?;
        data.push(
            raw.chunks_exact(8)
                .map(|c| f64::from_le_bytes(c.try_into().expect("8 bytes")))
                .collect::<Vec<f64>>(),
        );
    }
    let text = std::str::from_utf8(&bytes[r.pos..])
        .map_err(|_| GamaError::Checkpoint("config trailer is not UTF-8".into()))?;
    let config = parse_config_lines(text)?;
    config.validate()?;

    let mut params = ModelParams::zeros(&config);
    let expected: Vec<(String, usize, usize)> = params.tensors().into_iter().map(|(n, r, c, _)| (n, r, c)).collect();
    if expected != manifest {
        return Err(GamaError::Checkpoint(
            "tensor manifest does not match the stored configuration".into(),
        ));
    }
    for (dst, src) in params.tensors_mut().into_iter().zip(data) {
        dst.copy_from_slice(&src);
    }
    CtrModel::with_params(config, params)
}

pub fn save(path: &Path, model: &CtrModel) -> Result<()> {
    fs::write(path, encode_checkpoint(model))?;
    Ok(())
}

pub fn load(path: &Path) -> Result<CtrModel> {
    decode_checkpoint(&fs::read(path)?)
}
