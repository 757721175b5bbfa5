//! Exact evaluation by exhaustive summation over loop groups and error
//! configurations.
//!
//! Every quantity is assembled from integer histograms over the total loop
//! length `E = Σ_s |g⁽ˢ⁾| + |Π_s g⁽ˢ⁾|` of the `(n-1)`-flavor loop model, so a
//! single enumeration serves every error rate and results are independent of
//! how the enumeration is chunked.

mod duality;
mod enumerate;
mod loops;

pub use duality::{
    error_config_partition, error_config_partition_with, moment_via_error_configs, verify_duality,
    verify_duality_with, DualityReport, ErrorConfigSpec, MAX_ERROR_CONFIG_TERMS,
};
pub use enumerate::{split_range, ChunkRunner, Histogram, Sequential, SignedHistogram, TupleSpace};
pub use loops::{
    coherent_info_via_defects, defect_free_energies, moment_via_loops, negativity_via_pinning,
    negativity_via_signs, partition_function, relative_entropy_via_loops, DefectTable, ExactEngine,
    PartitionSpec, Pinning, Sector, StateKind, MAX_SIGN_TERMS, MAX_TUPLE_BITS,
};
