//! Interaction logs, labeled samples and the synthetic log generator.

mod log;
mod samples;
mod synth;

pub use log::{load_csv, write_csv, Event, InteractionLog, LoadReport, LogRow, CSV_HEADER};
pub use samples::{
    build_samples, cold_filter, cold_partition, Dataset, Sample, SampleConfig, Vocab, DEFAULT_ATTRIBUTION_WINDOW,
    DEFAULT_VOCAB,
};
pub use synth::{
    split_time_for_fraction, synth_generate, synth_generate_with_truth, SynthConfig, SynthOutput, UserTruth,
    SPAN_SECONDS,
};
