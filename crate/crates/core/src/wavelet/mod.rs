//! Orthonormal wavelet filter banks and the pyramidal multiresolution algorithm.

mod dump;
mod filters;
mod signal;
mod transform;

pub use dump::{parse_matrix_csv, read_dump, read_matrix_csv, write_dump, write_matrix_csv, META_FILE};
pub use filters::{check_invariants, make_base, qmf_highpass, BaseName, WaveletBase, FILTER_TOLERANCE};
pub use signal::SignalMatrix;
pub use transform::{
    analyze_step, analyze_step_adjoint, decompose, decompose_adjoint, level_widths, naive_dwt_matrix, reconstruct,
    synthesize_step, BoundaryMode, Component, Decomposition,
};
