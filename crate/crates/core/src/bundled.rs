//! Measurement records shipped with the crate (see `data/README.md`).

use crate::error::Result;
use crate::states::SourceModel;
use crate::tomography::counts::{read_counts_csv, CountTable};

pub const WITNESS_COUNTS_CSV: &str = include_str!("../data/witness_counts_p049.csv");
pub const UNLOCKING_COUNTS_CSV: &str = include_str!("../data/unlocking_counts.csv");
pub const SOURCE_CHARACTERIZATION_CSV: &str = include_str!("../data/source_characterization.csv");
pub const SOURCES_JSON: &str = include_str!("../data/sources.json");

/// Noise level at which the witness counts were taken.
pub const WITNESS_DATA_P: f64 = 0.49;

/// All-Z, all-X and all-Y four-qubit tables at p = 0.49.
pub fn witness_counts() -> Result<Vec<CountTable>> {
    read_counts_csv(WITNESS_COUNTS_CSV.as_bytes())
}

/// Two-qubit tomography of parties B and D after a |φ⁻⟩ herald on A and C.
pub fn unlocking_counts() -> Result<Vec<CountTable>> {
    read_counts_csv(UNLOCKING_COUNTS_CSV.as_bytes())
}

#[derive(serde::Deserialize)]
struct SourcesFile {
    sources: [SourceModel; 2],
}

/// Colored-noise models fitted to the measured fidelity and tangle of the
/// two pair sources.
pub fn measured_sources() -> Result<[SourceModel; 2]> {
    let file: SourcesFile = serde_json::from_str(SOURCES_JSON)?;
    Ok(file.sources)
}
