//! Polarization analyzers and the measurement settings built from them.

use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;
use rand::Rng;
use rand_distr::{Distribution, Poisson};
use serde::{Deserialize, Serialize};

use crate::density::DensityMatrix;
use crate::error::{Error, Result};
use crate::linalg::{ComplexMatrix, ONE, ZERO};

use super::counts::CountTable;

/// Analyzer state: H/V = |0⟩/|1⟩, P/M = (|H⟩ ± |V⟩)/√2, R/L = (|H⟩ ± i|V⟩)/√2.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum AnalyzerLabel {
    H,
    V,
    P,
    M,
    R,
    L,
}

/// The Pauli eigenbasis an analyzer belongs to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Basis {
    Z,
    X,
    Y,
}

impl Basis {
    /// The +1 eigenstate label (H, P, R).
    pub fn positive(self) -> AnalyzerLabel {
        match self {
            Basis::Z => AnalyzerLabel::H,
            Basis::X => AnalyzerLabel::P,
            Basis::Y => AnalyzerLabel::R,
        }
    }

    pub fn pauli_index(self) -> usize {
        match self {
            Basis::X => 1,
            Basis::Y => 2,
            Basis::Z => 3,
        }
    }
}

impl AnalyzerLabel {
    pub const ALL: [Self; 6] = [Self::H, Self::V, Self::P, Self::M, Self::R, Self::L];

    pub fn from_char(c: char) -> Result<Self> {
        Ok(match c {
            'H' | 'h' => Self::H,
            'V' | 'v' => Self::V,
            'P' | 'p' | '+' => Self::P,
            'M' | 'm' | '-' => Self::M,
            'R' | 'r' => Self::R,
            'L' | 'l' => Self::L,
            other => {
                return Err(Error::Parse(format!("unknown analyzer label '{other}'")));
            }
        })
    }

    pub fn as_char(self) -> char {
        match self {
            Self::H => 'H',
            Self::V => 'V',
            Self::P => 'P',
            Self::M => 'M',
            Self::R => 'R',
            Self::L => 'L',
        }
    }

    pub fn basis(self) -> Basis {
        match self {
            Self::H | Self::V => Basis::Z,
            Self::P | Self::M => Basis::X,
            Self::R | Self::L => Basis::Y,
        }
    }

    /// The orthogonal state in the same basis.
    pub fn partner(self) -> Self {
        match self {
            Self::H => Self::V,
            Self::V => Self::H,
            Self::P => Self::M,
            Self::M => Self::P,
            Self::R => Self::L,
            Self::L => Self::R,
        }
    }

    /// Eigenvalue of the basis Pauli: +1 for H, P, R and −1 for V, M, L.
    pub fn sign(self) -> f64 {
        match self {
            Self::H | Self::P | Self::R => 1.0,
            Self::V | Self::M | Self::L => -1.0,
        }
    }

    pub fn ket(self) -> [Complex64; 2] {
        let s = std::f64::consts::FRAC_1_SQRT_2;
        let re = |x: f64| Complex64::new(x, 0.0);
        match self {
            Self::H => [ONE, ZERO],
            Self::V => [ZERO, ONE],
            Self::P => [re(s), re(s)],
            Self::M => [re(s), re(-s)],
            Self::R => [re(s), Complex64::new(0.0, s)],
            Self::L => [re(s), Complex64::new(0.0, -s)],
        }
    }

    /// Bloch vector (x, y, z).
    pub fn bloch(self) -> [f64; 3] {
        let axis = match self.basis() {
            Basis::X => [1.0, 0.0, 0.0],
            Basis::Y => [0.0, 1.0, 0.0],
            Basis::Z => [0.0, 0.0, 1.0],
        };
        axis.map(|a| a * self.sign())
    }
}

/// Rank-1 projector onto the analyzer state.
pub fn analyzer_projector(label: AnalyzerLabel) -> ComplexMatrix {
    ComplexMatrix::outer(&label.ket())
}

fn parse_labels(s: &str) -> Result<Vec<AnalyzerLabel>> {
    let labels: Vec<AnalyzerLabel> = s.trim().chars().map(AnalyzerLabel::from_char).collect::<Result<_>>()?;
    if labels.is_empty() {
        return Err(Error::Parse("empty label string".into()));
    }
    Ok(labels)
}

fn write_labels(labels: &[AnalyzerLabel], f: &mut fmt::Formatter<'_>) -> fmt::Result {
    labels.iter().try_for_each(|l| write!(f, "{}", l.as_char()))
}

macro_rules! label_string {
    ($name:ident) => {
        impl $name {
            pub fn new(labels: Vec<AnalyzerLabel>) -> Self {
                Self(labels)
            }

            pub fn labels(&self) -> &[AnalyzerLabel] {
                &self.0
            }

            pub fn n_qubits(&self) -> usize {
                self.0.len()
            }

            pub fn bases(&self) -> Vec<Basis> {
                self.0.iter().map(|l| l.basis()).collect()
            }
        }

        impl FromStr for $name {
            type Err = Error;

            fn from_str(s: &str) -> Result<Self> {
                parse_labels(s).map(Self)
            }
        }

        impl fmt::Display for $name {
            fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                write_labels(&self.0, f)
            }
        }

        impl Serialize for $name {
            fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
                s.collect_str(self)
            }
        }

        impl<'de> Deserialize<'de> for $name {
            fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
                let s = String::deserialize(d)?;
                s.parse().map_err(serde::de::Error::custom)
            }
        }
    };
}

/// Per-qubit analyzer setting; the label names the state sent to the
/// transmitted port, its partner goes to the reflected port.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct MeasurementSetting(Vec<AnalyzerLabel>);

/// Per-qubit detected analyzer states of one coincidence outcome.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Outcome(Vec<AnalyzerLabel>);

label_string!(MeasurementSetting);
label_string!(Outcome);

impl MeasurementSetting {
    /// Canonical setting of a basis string (H, P, R on every qubit).
    pub fn from_bases(bases: &[Basis]) -> Self {
        Self(bases.iter().map(|b| b.positive()).collect())
    }

    /// The same-basis setting with every qubit using the +1 label.
    pub fn canonical(&self) -> Self {
        Self::from_bases(&self.bases())
    }

    pub fn admits(&self, outcome: &Outcome) -> bool {
        outcome.n_qubits() == self.n_qubits() && outcome.bases() == self.bases()
    }

    /// The `2^n` outcomes; bit 0 of a qubit selects the transmitted label.
    pub fn outcomes(&self) -> Vec<Outcome> {
        let n = self.n_qubits();
        (0..1usize << n)
            .map(|k| {
                Outcome(
                    self.0
                        .iter()
                        .enumerate()
                        .map(|(q, &l)| if (k >> (n - 1 - q)) & 1 == 0 { l } else { l.partner() })
                        .collect(),
                )
            })
            .collect()
    }
}

impl Outcome {
    /// Product of per-qubit signs: the Pauli-string eigenvalue of this outcome.
    pub fn parity(&self) -> f64 {
        self.0.iter().map(|l| l.sign()).product()
    }

    /// Product state vector `⊗ |label_q⟩`.
    pub fn state_vector(&self) -> Vec<Complex64> {
        self.0.iter().fold(vec![ONE], |acc, l| {
            let ket = l.ket();
            acc.iter().flat_map(|a| ket.iter().map(move |k| a * k)).collect()
        })
    }

    pub fn projector(&self) -> ComplexMatrix {
        ComplexMatrix::outer(&self.state_vector())
    }

    /// `Tr(ρ Π)` for this outcome's projector.
    pub fn probability(&self, rho: &DensityMatrix) -> f64 {
        rho.matrix().expectation(&self.state_vector()).re.max(0.0)
    }
}

/// Outcomes of a setting paired with their projectors; the projectors are
/// orthogonal and sum to the identity.
pub fn setting_outcomes(setting: &MeasurementSetting) -> Vec<(Outcome, ComplexMatrix)> {
    setting
        .outcomes()
        .into_iter()
        .map(|o| {
            let p = o.projector();
            (o, p)
        })
        .collect()
}

/// All `6^n` label settings.
pub fn all_label_settings(n_qubits: usize) -> Vec<MeasurementSetting> {
    let mut out = vec![Vec::new()];
    for _ in 0..n_qubits {
        out = out
            .into_iter()
            .flat_map(|prefix: Vec<AnalyzerLabel>| {
                AnalyzerLabel::ALL.iter().map(move |&l| {
                    let mut next = prefix.clone();
                    next.push(l);
                    next
                })
            })
            .collect();
    }
    out.into_iter().map(MeasurementSetting).collect()
}

/// The `3^n` canonical basis settings.
pub fn basis_settings(n_qubits: usize) -> Vec<MeasurementSetting> {
    let mut seen = std::collections::BTreeSet::new();
    all_label_settings(n_qubits)
        .into_iter()
        .map(|s| s.canonical())
        .filter(|s| seen.insert(s.clone()))
        .collect()
}

/// ZZZZ, XXXX and YYYY canonical settings used for the direct witness measurement.
pub fn witness_settings(n_qubits: usize) -> [MeasurementSetting; 3] {
    [Basis::Z, Basis::X, Basis::Y].map(|b| MeasurementSetting::from_bases(&vec![b; n_qubits]))
}

fn check_setting(rho: &DensityMatrix, setting: &MeasurementSetting) -> Result<()> {
    if setting.n_qubits() != rho.n_qubits() {
        return Err(Error::Dimension(format!(
            "setting {setting} has {} qubits, state has {}",
            setting.n_qubits(),
            rho.n_qubits()
        )));
    }
    Ok(())
}

/// Noise-free counts `mean_total · Tr(ρ Π)` (not rounded).
pub fn expected_counts(rho: &DensityMatrix, settings: &[MeasurementSetting], mean_total: f64) -> Result<Vec<CountTable>> {
    simulate_with(rho, settings, mean_total, |_, _, mean| mean)
}

/// Poisson-sampled counts with mean `mean_total · Tr(ρ Π)`, independent per outcome.
pub fn simulate_counts<R: Rng + ?Sized>(
    rho: &DensityMatrix,
    settings: &[MeasurementSetting],
    mean_total: f64,
    rng: &mut R,
) -> Result<Vec<CountTable>> {
    simulate_with(rho, settings, mean_total, |_, _, mean| poisson(mean, rng))
}

/// Like [`simulate_counts`], with per-port detection efficiencies
/// `[transmitted, reflected]` applied to every qubit of every outcome.
pub fn simulate_counts_imbalanced<R: Rng + ?Sized>(
    rho: &DensityMatrix,
    settings: &[MeasurementSetting],
    mean_total: f64,
    port_efficiency: [f64; 2],
    rng: &mut R,
) -> Result<Vec<CountTable>> {
    simulate_with(rho, settings, mean_total, |setting, outcome, mean| {
        let eff: f64 = setting
            .labels()
            .iter()
            .zip(outcome.labels())
            .map(|(s, o)| if s == o { port_efficiency[0] } else { port_efficiency[1] })
            .product();
        poisson(mean * eff, rng)
    })
}

fn simulate_with(
    rho: &DensityMatrix,
    settings: &[MeasurementSetting],
    mean_total: f64,
    mut draw: impl FnMut(&MeasurementSetting, &Outcome, f64) -> f64,
) -> Result<Vec<CountTable>> {
    if !(mean_total.is_finite() && mean_total > 0.0) {
        return Err(Error::InvalidInput(format!(
            "mean counts per setting must be positive, got {mean_total}"
        )));
    }
    settings
        .iter()
        .map(|setting| {
            check_setting(rho, setting)?;
            let counts = setting
                .outcomes()
                .into_iter()
                .map(|o| {
                    let mean = mean_total * o.probability(rho);
                    let c = draw(setting, &o, mean);
                    (o, c)
                })
                .collect();
            CountTable::new(setting.clone(), counts)
        })
        .collect()
}

/// One Poisson draw; zero mean gives zero.
pub fn poisson<R: Rng + ?Sized>(mean: f64, rng: &mut R) -> f64 {
    if mean <= 0.0 {
        return 0.0;
    }
    Poisson::new(mean).expect("positive finite mean").sample(rng)
}
