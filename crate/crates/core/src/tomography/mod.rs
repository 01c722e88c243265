//! Count handling, maximum-likelihood reconstruction and Monte-Carlo errors.

pub mod counts;
pub mod measurement;
pub mod mle;
pub mod montecarlo;
pub mod oracle;

pub use counts::{
    combine_by_basis, combine_complementary, pauli_expectation_from_counts, read_counts, read_counts_csv,
    witness_from_counts, write_counts, write_counts_csv, CountFile, CountTable, WitnessFromCounts,
};
pub use measurement::{
    all_label_settings, basis_settings, expected_counts, simulate_counts, witness_settings, AnalyzerLabel, Basis,
    MeasurementSetting, Outcome,
};
pub use mle::{mle_reconstruct, MeasurementModel, Reconstruction, ReconstructionConfig};
pub use montecarlo::{monte_carlo_errors, monte_carlo_multi, Histogram, McConfig, McResult, McSummary, Statistic};
pub use oracle::independent_mle_oracle;
