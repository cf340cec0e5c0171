//! Gating-adapted wavelet multiresolution analysis for exposure sequences.
//!
//! The crate decomposes an embedded exposure sequence into multiresolution
//! components, drops the noisiest band, aggregates the rest over time and
//! reweights each aggregate with a behavior-conditioned gate. A small
//! embedding-and-MLP click-through-rate model hosts the encoder, together
//! with data tooling, metrics and a latency harness.

pub mod bench;
pub mod checkpoint;
pub mod data;
pub mod encoder;
pub mod error;
pub mod experiment;
pub mod linalg;
pub mod metrics;
pub mod model;
pub mod train;
pub mod wavelet;

pub use encoder::{
    aggregate_att, aggregate_att_gradients, aggregate_avg, encode, encode_gradients, gate, gate_gradients, Aggregator,
    AttentionParams, EncoderConfig, EncoderGrads, EncoderParams, GamaEncoder, GateParams, InterestVector,
};
pub use error::{GamaError, Result};
pub use metrics::{auc, relaimpr, EvalReport, Split};
pub use model::{CtrModel, ExposureBranch, ExposurePadding, ModelConfig, ModelGrads, ModelParams};
pub use train::{evaluate, train, TrainConfig, TrainOutcome};
pub use wavelet::{
    analyze_step, decompose, make_base, naive_dwt_matrix, synthesize_step, BaseName, BoundaryMode, Component,
    Decomposition, SignalMatrix, WaveletBase,
};
