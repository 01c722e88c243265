//! Poisson resampling of count data and re-reconstruction for error bars.

use std::fmt;
use std::str::FromStr;

use serde::Serialize;

use crate::analysis::{fidelity, min_pt_eigenvalue, tangle, witness_expectation};
use crate::density::DensityMatrix;
use crate::error::{Error, Result};
use crate::exec::Execution;
use crate::rng;

use super::counts::CountTable;
use super::measurement::poisson;
use super::mle::{reconstruct_model, MeasurementModel, ReconstructionConfig};

/// Weight of `I/dim` mixed into the central estimate when warm-starting.
pub const WARM_START_MIXING: f64 = 0.02;

#[derive(Debug, Clone, Copy)]
pub struct McConfig {
    pub iterations: usize,
    pub seed: u64,
    pub execution: Execution,
    pub reconstruction: ReconstructionConfig,
    /// Start every resampled reconstruction near the central estimate
    /// instead of at `I/dim`.
    pub warm_start: bool,
}

impl Default for McConfig {
    fn default() -> Self {
        Self {
            iterations: 500,
            seed: 0,
            execution: Execution::default(),
            reconstruction: ReconstructionConfig::default(),
            warm_start: true,
        }
    }
}

/// Quantity evaluated on each reconstructed state.
#[derive(Debug, Clone)]
pub enum Statistic {
    Witness,
    MinPtEig,
    FidelityWith(DensityMatrix),
    Tangle,
    Trace,
}

impl Statistic {
    pub fn name(&self) -> &'static str {
        match self {
            Statistic::Witness => "witness",
            Statistic::MinPtEig => "min_pt_eig",
            Statistic::FidelityWith(_) => "fidelity",
            Statistic::Tangle => "tangle",
            Statistic::Trace => "trace",
        }
    }

    pub fn evaluate(&self, rho: &DensityMatrix) -> Result<f64> {
        match self {
            Statistic::Witness => witness_expectation(rho),
            Statistic::MinPtEig => min_pt_eigenvalue(rho).map(|m| m.value),
            Statistic::FidelityWith(target) => fidelity(rho, target),
            Statistic::Tangle => tangle(rho),
            Statistic::Trace => Ok(rho.matrix().trace().re),
        }
    }
}

/// Names accepted on the command line; `fidelity` needs a target and is
/// constructed separately.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StatisticName {
    Witness,
    MinPtEig,
    Fidelity,
    Tangle,
    Trace,
}

impl FromStr for StatisticName {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Ok(match s {
            "witness" => Self::Witness,
            "min_pt_eig" | "min-pt-eig" | "min_pt" => Self::MinPtEig,
            "fidelity" => Self::Fidelity,
            "tangle" => Self::Tangle,
            "trace" => Self::Trace,
            other => return Err(Error::InvalidInput(format!("unknown statistic '{other}'"))),
        })
    }
}

impl fmt::Display for StatisticName {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::Witness => "witness",
            Self::MinPtEig => "min_pt_eig",
            Self::Fidelity => "fidelity",
            Self::Tangle => "tangle",
            Self::Trace => "trace",
        })
    }
}

impl StatisticName {
    pub fn with_target(self, target: Option<&DensityMatrix>) -> Result<Statistic> {
        Ok(match self {
            Self::Witness => Statistic::Witness,
            Self::MinPtEig => Statistic::MinPtEig,
            Self::Tangle => Statistic::Tangle,
            Self::Trace => Statistic::Trace,
            Self::Fidelity => Statistic::FidelityWith(
                target
                    .cloned()
                    .ok_or_else(|| Error::InvalidInput("fidelity needs a target state".into()))?,
            ),
        })
    }
}

/// Histogram as `(bin_edges, counts)`; `edges.len() == counts.len() + 1`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Histogram {
    pub edges: Vec<f64>,
    pub counts: Vec<usize>,
}

fn quantile(sorted: &[f64], q: f64) -> f64 {
    let pos = q * (sorted.len() - 1) as f64;
    let lo = pos.floor() as usize;
    let hi = pos.ceil() as usize;
    sorted[lo] + (sorted[hi] - sorted[lo]) * (pos - lo as f64)
}

/// Freedman–Diaconis binning: width `2·IQR·n^(−1/3)`.
pub fn freedman_diaconis(samples: &[f64]) -> Histogram {
    if samples.is_empty() {
        return Histogram {
            edges: Vec::new(),
            counts: Vec::new(),
        };
    }
    let mut sorted = samples.to_vec();
    sorted.sort_by(f64::total_cmp);
    let (min, max) = (sorted[0], sorted[sorted.len() - 1]);
    let range = max - min;
    let iqr = quantile(&sorted, 0.75) - quantile(&sorted, 0.25);
    let width = 2.0 * iqr / (sorted.len() as f64).cbrt();
    let bins = if range > 0.0 && width > 0.0 {
        ((range / width).ceil() as usize).clamp(1, 1000)
    } else {
        1
    };
    let edges: Vec<f64> = (0..=bins)
        .map(|k| if k == bins { max } else { min + range * k as f64 / bins as f64 })
        .collect();
    let mut counts = vec![0; bins];
    for &x in &sorted {
        let k = if range > 0.0 {
            (((x - min) / range) * bins as f64).floor() as usize
        } else {
            0
        };
        counts[k.min(bins - 1)] += 1;
    }
    Histogram { edges, counts }
}

#[derive(Debug, Clone, Serialize)]
pub struct McSummary {
    pub statistic: String,
    /// Statistic on the reconstruction from the unperturbed data.
    pub central: f64,
    pub mean: f64,
    /// Sample standard deviation (n − 1 normalization).
    pub std: f64,
    pub histogram: Histogram,
    pub samples: Vec<f64>,
}

impl McSummary {
    fn from_samples(statistic: &Statistic, central: f64, samples: Vec<f64>) -> Self {
        let n = samples.len() as f64;
        let mean = samples.iter().sum::<f64>() / n;
        let std = if samples.len() > 1 {
            (samples.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0)).sqrt()
        } else {
            0.0
        };
        Self {
            statistic: statistic.name().to_string(),
            central,
            mean,
            std,
            histogram: freedman_diaconis(&samples),
            samples,
        }
    }
}

/// Central reconstruction plus Monte-Carlo summaries for several statistics
/// computed from the same resampled reconstructions.
#[derive(Debug, Clone)]
pub struct McResult {
    pub central_state: DensityMatrix,
    pub summaries: Vec<McSummary>,
}

/// Resamples every count as `Poisson(c)`, reconstructs each replica, and
/// evaluates `statistics` on it.
///
/// Counts of repeated projectors are merged before resampling; a sum of
/// independent Poisson variables is Poisson with the summed mean, so this
/// leaves the replica distribution unchanged. Replica `i` draws from RNG
/// stream `i`, so the output does not depend on the execution mode.
pub fn monte_carlo_multi(tables: &[CountTable], statistics: &[Statistic], config: &McConfig) -> Result<McResult> {
    if config.iterations == 0 {
        return Err(Error::InvalidInput("Monte-Carlo needs at least one iteration".into()));
    }
    let model = MeasurementModel::from_tables(tables)?;
    let central = reconstruct_model(&model, &config.reconstruction, None)?;
    let centrals: Vec<f64> = statistics
        .iter()
        .map(|s| s.evaluate(&central.state))
        .collect::<Result<_>>()?;
    let start = if config.warm_start {
        let mixed = DensityMatrix::maximally_mixed(model.n_qubits());
        Some(central.state.mix(1.0 - WARM_START_MIXING, &mixed)?)
    } else {
        None
    };

    let replicas = config.execution.map(config.iterations, |i| -> Result<Vec<f64>> {
        let mut rng = rng::stream(config.seed, i as u64);
        let counts = model.counts().iter().map(|&c| poisson(c, &mut rng)).collect();
        let replica = model.with_counts(counts)?;
        let rec = reconstruct_model(&replica, &config.reconstruction, start.as_ref())?;
        statistics.iter().map(|s| s.evaluate(&rec.state)).collect()
    });

    let mut columns = vec![Vec::with_capacity(config.iterations); statistics.len()];
    for values in replicas {
        for (col, v) in columns.iter_mut().zip(values?) {
            col.push(v);
        }
    }
    let summaries = statistics
        .iter()
        .zip(centrals)
        .zip(columns)
        .map(|((s, c), samples)| McSummary::from_samples(s, c, samples))
        .collect();
    Ok(McResult {
        central_state: central.state,
        summaries,
    })
}

pub fn monte_carlo_errors(tables: &[CountTable], statistic: &Statistic, config: &McConfig) -> Result<McSummary> {
    let mut result = monte_carlo_multi(tables, std::slice::from_ref(statistic), config)?;
    Ok(result.summaries.remove(0))
}
