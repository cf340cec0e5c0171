//! Latency harness comparing the wavelet encoder against average pooling and a
//! quadratic self-attention baseline across sequence lengths.

use std::fmt;
use std::hint::black_box;
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::encoder::{aggregate_avg, Aggregator, EncoderConfig, EncoderParams, GamaEncoder};
use crate::error::{GamaError, Result};
use crate::linalg::{dot, softmax_in_place, Matrix};
use crate::wavelet::{BaseName, SignalMatrix};

/// Projections of the naive self-attention baseline.
#[derive(Debug, Clone, PartialEq)]
pub struct SelfAttnParams {
    /// `d × d`.
    pub query: Matrix,
    /// `d × d`.
    pub key: Matrix,
}

impl SelfAttnParams {
    pub fn zeros(dim: usize) -> Self {
        Self {
            query: Matrix::zeros(dim, dim),
            key: Matrix::zeros(dim, dim),
        }
    }
}

/// Full `N × N` attention with logits `e_iᵀ Q K e_j`, followed by a time mean.
pub fn self_attn_naive(signal: &SignalMatrix, params: &SelfAttnParams) -> Vec<f64> {
    let n = signal.steps();
    let d = signal.channels();
    let columns: Vec<Vec<f64>> = (0..n).map(|t| signal.column(t)).collect();
    let queries: Vec<Vec<f64>> = columns.iter().map(|e| params.query.transpose_mul_vec(e)).collect();
    let keys: Vec<Vec<f64>> = columns.iter().map(|e| params.key.mul_vec(e)).collect();
    let mut out = vec![0.0; d];
    let mut weights = vec![0.0; n];
    for q in &queries {
        for (w, k) in weights.iter_mut().zip(&keys) {
            *w = dot(q, k);
        }
        softmax_in_place(&mut weights);
        for (&w, e) in weights.iter().zip(&columns) {
            for (o, &x) in out.iter_mut().zip(e) {
                *o += w * x;
            }
        }
    }
    let inv = 1.0 / n as f64;
    out.iter_mut().for_each(|x| *x *= inv);
    out
}

/// Nearest-rank percentile of an ascending slice: the element at `ceil(p·n) − 1`.
pub fn percentile_nearest_rank(sorted: &[f64], p: f64) -> f64 {
    assert!(!sorted.is_empty(), "percentile of an empty sample");
    let rank = (p * sorted.len() as f64).ceil() as usize;
    sorted[rank.clamp(1, sorted.len()) - 1]
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum EncoderKind {
    GamaAvg,
    GamaAtt,
    AvgPool,
    SelfAttnNaive,
}

impl EncoderKind {
    pub const ALL: [EncoderKind; 4] = [
        EncoderKind::GamaAvg,
        EncoderKind::GamaAtt,
        EncoderKind::AvgPool,
        EncoderKind::SelfAttnNaive,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            EncoderKind::GamaAvg => "gama_avg",
            EncoderKind::GamaAtt => "gama_att",
            EncoderKind::AvgPool => "avg_pool",
            EncoderKind::SelfAttnNaive => "self_attn_naive",
        }
    }
}

impl fmt::Display for EncoderKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BenchConfig {
    pub lengths: Vec<usize>,
    pub dim: usize,
    pub repetitions: usize,
    pub warmup: usize,
    pub level: usize,
    pub base: BaseName,
    pub seed: u64,
    pub encoders: Vec<EncoderKind>,
}

impl Default for BenchConfig {
    fn default() -> Self {
        Self {
            lengths: vec![256, 512, 1024, 2048],
            dim: 16,
            repetitions: 100,
            warmup: 10,
            level: 3,
            base: BaseName::Db3,
            seed: 1,
            encoders: EncoderKind::ALL.to_vec(),
        }
    }
}

impl BenchConfig {
    pub fn validate(&self) -> Result<()> {
        if self.repetitions < 100 {
            return Err(GamaError::Config(format!(
                "repetitions must be at least 100, got {}",
                self.repetitions
            )));
        }
        if self.warmup < 10 {
            return Err(GamaError::Config(format!(
                "warmup must be at least 10, got {}",
                self.warmup
            )));
        }
        if self.dim == 0 || self.lengths.is_empty() || self.encoders.is_empty() {
            return Err(GamaError::Config("dim, lengths and encoders must be non-empty".into()));
        }
        if let Some(&n) = self.lengths.iter().find(|&&n| self.level >= 64 || n >> self.level == 0) {
            return Err(GamaError::Config(format!(
                "length {n} is shorter than 2^{} required by the decomposition level",
                self.level
            )));
        }
        Ok(())
    }
}

/// Timing summary for one `(encoder, N)` cell, in microseconds.
#[derive(Debug, Clone, PartialEq)]
pub struct BenchCell {
    pub encoder: EncoderKind,
    pub length: usize,
    pub median_us: f64,
    pub tp99_us: f64,
    pub mean_us: f64,
    pub reps: usize,
}

impl BenchCell {
    pub fn from_samples(encoder: EncoderKind, length: usize, mut samples_us: Vec<f64>) -> Self {
        samples_us.sort_by(f64::total_cmp);
        let reps = samples_us.len();
        Self {
            encoder,
            length,
            median_us: percentile_nearest_rank(&samples_us, 0.5),
            tp99_us: percentile_nearest_rank(&samples_us, 0.99),
            mean_us: samples_us.iter().sum::<f64>() / reps as f64,
            reps,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScalingRatio {
    pub encoder: EncoderKind,
    pub from: usize,
    pub to: usize,
    /// Median latency at `to` over median latency at `from`.
    pub ratio: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BenchReport {
    pub config: BenchConfig,
    pub cells: Vec<BenchCell>,
}

impl BenchReport {
    pub fn cell(&self, encoder: EncoderKind, length: usize) -> Option<&BenchCell> {
        self.cells.iter().find(|c| c.encoder == encoder && c.length == length)
    }

    /// `T(2N)/T(N)` for each doubling present in the configured lengths.
    pub fn scaling_ratios(&self) -> Vec<ScalingRatio> {
        let mut out = Vec::new();
        for &encoder in &self.config.encoders {
            for &n in &self.config.lengths {
                if let (Some(a), Some(b)) = (self.cell(encoder, n), self.cell(encoder, 2 * n)) {
                    out.push(ScalingRatio {
                        encoder,
                        from: n,
                        to: 2 * n,
                        ratio: b.median_us / a.median_us,
                    });
                }
            }
        }
        out
    }

    pub fn to_csv(&self) -> String {
        let mut s = String::from("encoder,N,median_us,tp99_us,mean_us,reps\n");
        for c in &self.cells {
            s.push_str(&format!(
                "{},{},{:.3},{:.3},{:.3},{}\n",
                c.encoder, c.length, c.median_us, c.tp99_us, c.mean_us, c.reps
            ));
        }
        s
    }

    /// Long format for plotting TP99 latency against sequence length.
    pub fn to_plot_csv(&self) -> String {
        let mut s = String::from("series,sequence_length,metric,latency_us\n");
        for c in &self.cells {
            for (metric, v) in [("tp99", c.tp99_us), ("median", c.median_us), ("mean", c.mean_us)] {
                s.push_str(&format!("{},{},{},{:.3}\n", c.encoder, c.length, metric, v));
            }
        }
        s
    }

    pub fn ratios_csv(&self) -> String {
        let mut s = String::from("encoder,from_N,to_N,median_ratio\n");
        for r in self.scaling_ratios() {
            s.push_str(&format!("{},{},{},{:.4}\n", r.encoder, r.from, r.to, r.ratio));
        }
        s
    }
}

/// Times `f` for `warmup + reps` calls and returns the last `reps` durations in µs.
pub fn time_calls<T>(warmup: usize, reps: usize, mut f: impl FnMut() -> T) -> Vec<f64> {
    for _ in 0..warmup {
        black_box(f());
    }
    (0..reps)
        .map(|_| {
            let start = Instant::now();
            black_box(f());
            start.elapsed().as_secs_f64() * 1e6
        })
        .collect()
}

/// Runs every configured encoder on identical random inputs for each length.
pub fn run_bench(config: &BenchConfig) -> Result<BenchReport> {
    config.validate()?;
    let d = config.dim;
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let enc_cfg = |aggregator| EncoderConfig {
        level: config.level,
        base: config.base,
        kept: crate::wavelet::Component::all(config.level)
            .into_iter()
            .filter(|c| *c != crate::wavelet::Component::Detail(config.level))
            .collect(),
        aggregator,
        ..EncoderConfig::default()
    };
    let gama_avg = GamaEncoder::new(enc_cfg(Aggregator::Avg))?;
    let gama_att = GamaEncoder::new(enc_cfg(Aggregator::Att))?;
    let params = EncoderParams::init(gama_att.config(), d, &mut rng);
    let bound = 1.0 / (d as f64).sqrt();
    let attn = SelfAttnParams {
        query: Matrix::uniform(d, d, bound, &mut rng),
        key: Matrix::uniform(d, d, bound, &mut rng),
    };
    let query: Vec<f64> = (0..d).map(|_| rng.gen_range(-1.0..1.0)).collect();
    let behavior: Vec<f64> = (0..d).map(|_| rng.gen_range(-1.0..1.0)).collect();

    let mut cells = Vec::new();
    for &n in &config.lengths {
        let values = (0..d * n).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let signal = SignalMatrix::new(d, n, values)?;
        for &kind in &config.encoders {
            let samples = match kind {
                EncoderKind::GamaAvg => time_calls(config.warmup, config.repetitions, || {
                    gama_avg.encode(&signal, &query, &behavior, &params)
                }),
                EncoderKind::GamaAtt => time_calls(config.warmup, config.repetitions, || {
                    gama_att.encode(&signal, &query, &behavior, &params)
                }),
                EncoderKind::AvgPool => time_calls(config.warmup, config.repetitions, || aggregate_avg(&signal)),
                EncoderKind::SelfAttnNaive => {
                    time_calls(config.warmup, config.repetitions, || self_attn_naive(&signal, &attn))
                }
            };
            cells.push(BenchCell::from_samples(kind, n, samples));
        }
    }
    Ok(BenchReport {
        config: config.clone(),
        cells,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn nearest_rank_definition() {
        let v: Vec<f64> = (1..=100).map(f64::from).collect();
        assert_eq!(percentile_nearest_rank(&v, 0.99), 99.0);
        assert_eq!(percentile_nearest_rank(&v, 0.5), 50.0);
        assert_eq!(percentile_nearest_rank(&[3.0], 0.99), 3.0);
        assert_eq!(percentile_nearest_rank(&[1.0, 2.0], 0.0), 1.0);
    }

    #[test]
    fn self_attention_small_cases() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let one = SignalMatrix::new(3, 1, vec![1.0, -2.0, 0.5]).unwrap();
        let p = SelfAttnParams {
            query: Matrix::uniform(3, 3, 1.0, &mut rng),
            key: Matrix::uniform(3, 3, 1.0, &mut rng),
        };
        let out = self_attn_naive(&one, &p);
        for (a, b) in out.iter().zip([1.0, -2.0, 0.5]) {
            assert!((a - b).abs() < 1e-15);
        }
        let s = SignalMatrix::new(2, 3, vec![1.0, 2.0, 3.0, 0.0, -3.0, 6.0]).unwrap();
        let out = self_attn_naive(&s, &SelfAttnParams::zeros(2));
        assert!((out[0] - 2.0).abs() < 1e-14 && (out[1] - 1.0).abs() < 1e-14);
    }

    #[test]
    fn stub_encoder_percentiles_are_sane() {
        let samples = time_calls(10, 100, || 1 + 1);
        let cell = BenchCell::from_samples(EncoderKind::AvgPool, 1, samples);
        assert_eq!(cell.reps, 100);
        assert!(cell.tp99_us >= cell.median_us && cell.median_us >= 0.0);
        // a stub has no real work; allow a small absolute floor for timer granularity
        assert!(cell.tp99_us <= 5.0 * cell.median_us + 1.0);
    }

    #[test]
    fn config_validation() {
        let ok = BenchConfig::default();
        ok.validate().unwrap();
        assert!(BenchConfig {
            repetitions: 99,
            ..ok.clone()
        }
        .validate()
        .is_err());
        assert!(BenchConfig {
            warmup: 9,
            ..ok.clone()
        }
        .validate()
        .is_err());
        assert!(BenchConfig { lengths: vec![4], ..ok }.validate().is_err());
    }

    #[test]
    fn report_shapes() {
        let cfg = BenchConfig {
            lengths: vec![16, 32],
            dim: 4,
            encoders: vec![EncoderKind::GamaAtt, EncoderKind::AvgPool],
            ..BenchConfig::default()
        };
        let r = run_bench(&cfg).unwrap();
        assert_eq!(r.cells.len(), 4);
        assert_eq!(r.scaling_ratios().len(), 2);
        assert_eq!(r.to_csv().lines().count(), 5);
        assert!(r.to_csv().starts_with("encoder,N,median_us,tp99_us,mean_us,reps\n"));
        assert_eq!(r.to_plot_csv().lines().count(), 13);
    }
}
