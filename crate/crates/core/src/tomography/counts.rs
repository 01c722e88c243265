//! Coincidence count tables, their CSV/JSON formats, and direct estimators.

use std::collections::BTreeMap;
use std::fs;
use std::io::{Read, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

use super::measurement::{Basis, MeasurementSetting, Outcome};

/// Counts recorded for one analyzer setting, keyed by outcome.
///
/// Counts are stored as `f64` so that noise-free expected counts can pass
/// through the same pipeline as measured integers.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CountTable {
    pub setting: MeasurementSetting,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub duration_s: Option<f64>,
    pub counts: BTreeMap<Outcome, f64>,
}

impl CountTable {
    pub fn new(setting: MeasurementSetting, counts: BTreeMap<Outcome, f64>) -> Result<Self> {
        let table = Self {
            setting,
            duration_s: None,
            counts,
        };
        table.validate()?;
        Ok(table)
    }

    pub fn validate(&self) -> Result<()> {
        for (o, &c) in &self.counts {
            if !self.setting.admits(o) {
                return Err(Error::Parse(format!(
                    "outcome {o} does not belong to setting {}",
                    self.setting
                )));
            }
            if !(c.is_finite() && c >= 0.0) {
                return Err(Error::Parse(format!("count {c} for outcome {o} is invalid")));
            }
        }
        Ok(())
    }

    pub fn n_qubits(&self) -> usize {
        self.setting.n_qubits()
    }

    pub fn count(&self, outcome: &Outcome) -> f64 {
        self.counts.get(outcome).copied().unwrap_or(0.0)
    }

    pub fn total(&self) -> f64 {
        self.counts.values().sum()
    }

    /// Every outcome of the setting's bases is present.
    pub fn is_complete(&self) -> bool {
        self.setting.outcomes().iter().all(|o| self.counts.contains_key(o))
    }

    pub fn map_counts(&self, mut f: impl FnMut(f64) -> f64) -> Self {
        Self {
            setting: self.setting.clone(),
            duration_s: self.duration_s,
            counts: self.counts.iter().map(|(o, &c)| (o.clone(), f(c))).collect(),
        }
    }
}

/// Sums two tables taken with complementary port assignments of the same bases.
///
/// Outcomes are keyed by the detected analyzer state, not by the PBS port, so
/// swapping which state is transmitted needs no relabeling beyond matching
/// outcome keys. The result carries `table_a`'s setting.
pub fn combine_complementary(table_a: &CountTable, table_b: &CountTable) -> Result<CountTable> {
    if table_a.setting.bases() != table_b.setting.bases() {
        return Err(Error::InvalidInput(format!(
            "settings {} and {} do not measure the same bases",
            table_a.setting, table_b.setting
        )));
    }
    let mut counts = table_a.counts.clone();
    for (o, &c) in &table_b.counts {
        *counts.entry(o.clone()).or_insert(0.0) += c;
    }
    Ok(CountTable {
        setting: table_a.setting.clone(),
        duration_s: match (table_a.duration_s, table_b.duration_s) {
            (Some(a), Some(b)) => Some(a + b),
            _ => None,
        },
        counts,
    })
}

/// Folds all tables sharing a basis string into one table per basis, keyed
/// by the canonical (H/P/R) setting, in first-appearance order.
pub fn combine_by_basis(tables: &[CountTable]) -> Result<Vec<CountTable>> {
    let mut order: Vec<MeasurementSetting> = Vec::new();
    let mut merged: BTreeMap<MeasurementSetting, CountTable> = BTreeMap::new();
    for t in tables {
        let key = t.setting.canonical();
        match merged.remove(&key) {
            Some(acc) => {
                merged.insert(key, combine_complementary(&acc, t)?);
            }
            None => {
                order.push(key.clone());
                let mut first = t.clone();
                first.setting = key.clone();
                merged.insert(key, first);
            }
        }
    }
    Ok(order
        .into_iter()
        .map(|k| merged.remove(&k).expect("inserted above"))
        .collect())
}

/// Parity-weighted estimate of the Pauli string measured by `table`, with
/// its Poisson-propagated standard error.
pub fn pauli_expectation_from_counts(table: &CountTable) -> Result<(f64, f64)> {
    if !table.is_complete() {
        return Err(Error::InvalidInput(format!(
            "table for {} does not cover all {} outcomes",
            table.setting,
            1usize << table.n_qubits()
        )));
    }
    let total = table.total();
    if total <= 0.0 {
        return Err(Error::NoCounts);
    }
    let value = table.counts.iter().map(|(o, c)| o.parity() * c).sum::<f64>() / total;
    // ∂E/∂c_o = (s_o − E)/N, Var c_o = c_o
    let var = table
        .counts
        .iter()
        .map(|(o, c)| (o.parity() - value).powi(2) * c)
        .sum::<f64>()
        / (total * total);
    Ok((value, var.sqrt()))
}

/// Directly measured witness estimates for the three correlated Pauli bases.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WitnessFromCounts {
    pub zzzz: (f64, f64),
    pub xxxx: (f64, f64),
    pub yyyy: (f64, f64),
    pub value: f64,
    pub sigma: f64,
}

/// `1 − ⟨Z⊗n⟩ − ⟨X⊗n⟩ − ⟨Y⊗n⟩` with errors added in quadrature.
pub fn witness_from_counts(z_table: &CountTable, x_table: &CountTable, y_table: &CountTable) -> Result<WitnessFromCounts> {
    let check = |t: &CountTable, basis: Basis| -> Result<(f64, f64)> {
        if t.setting.bases().iter().any(|&b| b != basis) {
            return Err(Error::InvalidInput(format!(
                "setting {} is not the all-{basis:?} setting",
                t.setting
            )));
        }
        pauli_expectation_from_counts(t)
    };
    let zzzz = check(z_table, Basis::Z)?;
    let xxxx = check(x_table, Basis::X)?;
    let yyyy = check(y_table, Basis::Y)?;
    if z_table.n_qubits() != x_table.n_qubits() || z_table.n_qubits() != y_table.n_qubits() {
        return Err(Error::InvalidInput("witness tables differ in qubit count".into()));
    }
    Ok(WitnessFromCounts {
        zzzz,
        xxxx,
        yyyy,
        value: 1.0 - zzzz.0 - xxxx.0 - yyyy.0,
        sigma: (zzzz.1.powi(2) + xxxx.1.powi(2) + yyyy.1.powi(2)).sqrt(),
    })
}

/// Finds the all-Z, all-X and all-Y tables (after folding complementary
/// settings) and evaluates the witness, if all three are present.
pub fn witness_from_table_set(tables: &[CountTable]) -> Result<Option<WitnessFromCounts>> {
    let merged = combine_by_basis(tables)?;
    let find = |b: Basis| {
        merged
            .iter()
            .find(|t| t.n_qubits() == 4 && t.setting.bases().iter().all(|&x| x == b))
    };
    match (find(Basis::Z), find(Basis::X), find(Basis::Y)) {
        (Some(z), Some(x), Some(y)) => witness_from_counts(z, x, y).map(Some),
        _ => Ok(None),
    }
}

/// JSON mirror of the CSV format, with optional run metadata.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct CountFile {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub duration_s: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub loops: Option<u32>,
    pub tables: Vec<CountTable>,
}

#[derive(Debug, Deserialize)]
struct CsvRow {
    setting: String,
    outcome: String,
    count: f64,
}

/// Parses `setting,outcome,count` rows, grouping by setting in order of appearance.
pub fn read_counts_csv<R: Read>(reader: R) -> Result<Vec<CountTable>> {
    let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(reader);
    let headers = rdr.headers()?.clone();
    if headers.iter().collect::<Vec<_>>() != ["setting", "outcome", "count"] {
        return Err(Error::Parse(format!(
            "expected header setting,outcome,count, found {}",
            headers.iter().collect::<Vec<_>>().join(",")
        )));
    }
    let mut order: Vec<MeasurementSetting> = Vec::new();
    let mut tables: BTreeMap<MeasurementSetting, BTreeMap<Outcome, f64>> = BTreeMap::new();
    for row in rdr.deserialize() {
        let row: CsvRow = row?;
        let setting: MeasurementSetting = row.setting.parse()?;
        let outcome: Outcome = row.outcome.parse()?;
        let entry = tables.entry(setting.clone()).or_insert_with(|| {
            order.push(setting.clone());
            BTreeMap::new()
        });
        if entry.insert(outcome.clone(), row.count).is_some() {
            return Err(Error::Parse(format!(
                "duplicate row for setting {setting}, outcome {outcome}"
            )));
        }
    }
    order
        .into_iter()
        .map(|s| {
            let counts = tables.remove(&s).expect("recorded above");
            CountTable::new(s, counts)
        })
        .collect()
}

pub fn write_counts_csv<W: Write>(writer: W, tables: &[CountTable]) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    w.write_record(["setting", "outcome", "count"])?;
    for t in tables {
        let setting = t.setting.to_string();
        for (o, c) in &t.counts {
            // `Display` prints integral counts without a trailing `.0`
            w.write_record([setting.as_str(), &o.to_string(), &c.to_string()])?;
        }
    }
    w.flush()?;
    Ok(())
}

pub fn read_counts_json(text: &str) -> Result<CountFile> {
    let file: CountFile = serde_json::from_str(text)?;
    for t in &file.tables {
        t.validate()?;
    }
    Ok(file)
}

/// Loads a `.csv` or `.json` count file.
pub fn read_counts(path: &Path) -> Result<Vec<CountTable>> {
    match path.extension().and_then(|e| e.to_str()) {
        Some("json") => Ok(read_counts_json(&fs::read_to_string(path)?)?.tables),
        _ => read_counts_csv(fs::File::open(path)?),
    }
}

pub fn write_counts(path: &Path, tables: &[CountTable]) -> Result<()> {
    match path.extension().and_then(|e| e.to_str()) {
        Some("json") => {
            let file = CountFile {
                tables: tables.to_vec(),
                ..Default::default()
            };
            fs::write(path, serde_json::to_string_pretty(&file)?)?;
            Ok(())
        }
        _ => write_counts_csv(fs::File::create(path)?, tables),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn table(setting: &str, counts: &[(&str, f64)]) -> CountTable {
        CountTable::new(
            setting.parse().unwrap(),
            counts.iter().map(|(o, c)| (o.parse().unwrap(), *c)).collect(),
        )
        .unwrap()
    }

    #[test]
    fn pauli_estimate_edge_cases() {
        let flat = table("HH", &[("HH", 10.0), ("HV", 10.0), ("VH", 10.0), ("VV", 10.0)]);
        assert_abs_diff_eq!(pauli_expectation_from_counts(&flat).unwrap().0, 0.0, epsilon = 1e-15);
        let even = table("PP", &[("PP", 7.0), ("PM", 0.0), ("MP", 0.0), ("MM", 3.0)]);
        let (v, s) = pauli_expectation_from_counts(&even).unwrap();
        assert_abs_diff_eq!(v, 1.0, epsilon = 1e-15);
        assert_abs_diff_eq!(s, 0.0, epsilon = 1e-15);
        let empty = table("HH", &[("HH", 0.0), ("HV", 0.0), ("VH", 0.0), ("VV", 0.0)]);
        assert!(matches!(pauli_expectation_from_counts(&empty), Err(Error::NoCounts)));
        let partial = table("HH", &[("HH", 1.0)]);
        assert!(pauli_expectation_from_counts(&partial).is_err());
    }

    #[test]
    fn outcome_must_match_setting_bases() {
        let bad = CountTable::new(
            "HH".parse().unwrap(),
            [("HP".parse().unwrap(), 1.0)].into_iter().collect(),
        );
        assert!(bad.is_err());
        let negative = CountTable::new(
            "H".parse().unwrap(),
            [("H".parse().unwrap(), -1.0)].into_iter().collect(),
        );
        assert!(negative.is_err());
    }

    #[test]
    fn combining_complementary_tables() {
        let a = table("H", &[("H", 5.0), ("V", 2.0)]);
        let zeros = table("V", &[("H", 0.0), ("V", 0.0)]);
        assert_eq!(combine_complementary(&a, &zeros).unwrap(), a);
        let doubled = combine_complementary(&a, &a).unwrap();
        assert_abs_diff_eq!(doubled.count(&"H".parse().unwrap()), 10.0);
        assert_abs_diff_eq!(doubled.count(&"V".parse().unwrap()), 4.0);
        let other_basis = table("P", &[("P", 1.0), ("M", 1.0)]);
        assert!(combine_complementary(&a, &other_basis).is_err());
    }

    #[test]
    fn combine_by_basis_groups_and_canonicalizes() {
        let tables = vec![
            table("V", &[("H", 1.0), ("V", 2.0)]),
            table("P", &[("P", 3.0), ("M", 4.0)]),
            table("H", &[("H", 5.0), ("V", 6.0)]),
        ];
        let merged = combine_by_basis(&tables).unwrap();
        assert_eq!(merged.len(), 2);
        assert_eq!(merged[0].setting.to_string(), "H");
        assert_abs_diff_eq!(merged[0].total(), 14.0);
    }

    #[test]
    fn csv_round_trip_and_errors() {
        let tables = vec![
            table("HP", &[("HP", 1.0), ("HM", 2.0), ("VP", 3.0), ("VM", 4.0)]),
            table("RR", &[("RR", 5.0), ("RL", 6.0), ("LR", 7.0), ("LL", 8.0)]),
        ];
        let mut buf = Vec::new();
        write_counts_csv(&mut buf, &tables).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert!(text.starts_with("setting,outcome,count\n"));
        assert!(text.contains("HP,HM,2\n"));
        assert_eq!(read_counts_csv(text.as_bytes()).unwrap(), tables);

        let dup = "setting,outcome,count\nH,H,1\nH,H,2\n";
        assert!(read_counts_csv(dup.as_bytes()).is_err());
        let header = "a,b,c\nH,H,1\n";
        assert!(read_counts_csv(header.as_bytes()).is_err());
        let plus_minus = "setting,outcome,count\n+,-,3\n";
        let t = read_counts_csv(plus_minus.as_bytes()).unwrap();
        assert_eq!(t[0].setting.to_string(), "P");
    }

    #[test]
    fn json_mirror_reads_metadata() {
        let text = r#"{"duration_s": 60, "loops": 10,
            "tables": [{"setting": "HH", "counts": {"HH": 4, "VV": 5}}]}"#;
        let file = read_counts_json(text).unwrap();
        assert_eq!(file.loops, Some(10));
        assert_abs_diff_eq!(file.tables[0].total(), 9.0);
        let bad = r#"{"tables": [{"setting": "HH", "counts": {"PP": 4}}]}"#;
        assert!(read_counts_json(bad).is_err());
    }
}
