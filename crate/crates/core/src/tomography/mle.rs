//! Iterative maximum-likelihood state reconstruction (the RρR fixed point).
//!
//! With counts `c_j` on product projectors `Π_j = |v_j⟩⟨v_j|` and total
//! `N = Σ c_j`, the normalized log-likelihood is `L(ρ) = Σ_j (c_j/N) ln p_j`
//! where `p_j = ⟨v_j|ρ|v_j⟩`. Each setting block's projectors resolve the
//! identity, so the per-block multinomial likelihoods weighted by block
//! totals add up to exactly this sum, and repeated projectors from
//! different settings can be merged by adding their counts.

use std::collections::BTreeMap;

use num_complex::Complex64;

use crate::density::DensityMatrix;
use crate::error::{Error, Result};
use crate::linalg::{ComplexMatrix, ZERO};

use super::counts::CountTable;
use super::measurement::Outcome;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ReconstructionConfig {
    pub max_iterations: usize,
    /// Stop once an accepted step raises the log-likelihood by less than this.
    pub stop_delta: f64,
    /// Lower clamp on outcome probabilities inside `R(ρ)` and the likelihood.
    pub probability_floor: f64,
}

impl Default for ReconstructionConfig {
    fn default() -> Self {
        Self {
            max_iterations: 500,
            stop_delta: 1e-10,
            probability_floor: 1e-12,
        }
    }
}

impl ReconstructionConfig {
    pub fn validate(&self) -> Result<()> {
        if self.max_iterations == 0 || !(self.stop_delta > 0.0) || !(self.probability_floor > 0.0) {
            return Err(Error::InvalidInput(format!(
                "reconstruction settings must be positive: {self:?}"
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone)]
pub struct Reconstruction {
    pub state: DensityMatrix,
    /// Accepted update steps.
    pub iterations: usize,
    pub converged: bool,
    pub log_likelihood: f64,
    /// Log-likelihood of the starting point followed by every accepted step.
    pub history: Vec<f64>,
}

/// Merged projectors and counts, ready for repeated reconstructions.
#[derive(Debug, Clone)]
pub struct MeasurementModel {
    n_qubits: usize,
    dim: usize,
    outcomes: Vec<Outcome>,
    /// Row-major `outcomes.len() × dim` product-state vectors.
    vectors: Vec<Complex64>,
    counts: Vec<f64>,
}

impl MeasurementModel {
    /// Merges all tables by outcome and checks informational completeness.
    pub fn from_tables(tables: &[CountTable]) -> Result<Self> {
        let first = tables
            .first()
            .ok_or_else(|| Error::InvalidInput("no count tables given".into()))?;
        let n_qubits = first.n_qubits();
        let mut merged: BTreeMap<Outcome, f64> = BTreeMap::new();
        for t in tables {
            if t.n_qubits() != n_qubits {
                return Err(Error::InvalidInput(format!(
                    "tables mix {n_qubits}- and {}-qubit settings",
                    t.n_qubits()
                )));
            }
            for (o, &c) in &t.counts {
                *merged.entry(o.clone()).or_insert(0.0) += c;
            }
        }
        let (outcomes, counts): (Vec<Outcome>, Vec<f64>) = merged.into_iter().unzip();
        let required = 1usize << (2 * n_qubits);
        let rank = operator_span_rank(&outcomes);
        if rank < required {
            return Err(Error::NotInformationallyComplete { rank, required });
        }
        let model = Self {
            n_qubits,
            dim: 1 << n_qubits,
            vectors: outcomes.iter().flat_map(|o| o.state_vector()).collect(),
            outcomes,
            counts,
        };
        if model.total() <= 0.0 {
            return Err(Error::NoCounts);
        }
        Ok(model)
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn outcomes(&self) -> &[Outcome] {
        &self.outcomes
    }

    pub fn counts(&self) -> &[f64] {
        &self.counts
    }

    pub fn total(&self) -> f64 {
        self.counts.iter().sum()
    }

    /// Same projectors with replacement counts (e.g. a resampled data set).
    pub fn with_counts(&self, counts: Vec<f64>) -> Result<Self> {
        if counts.len() != self.counts.len() {
            return Err(Error::InvalidInput("count vector length mismatch".into()));
        }
        if counts.iter().sum::<f64>() <= 0.0 {
            return Err(Error::NoCounts);
        }
        Ok(Self {
            counts,
            ..self.clone()
        })
    }

    fn vector(&self, j: usize) -> &[Complex64] {
        &self.vectors[j * self.dim..(j + 1) * self.dim]
    }

    /// `p_j = ⟨v_j|ρ|v_j⟩` for every projector.
    pub fn probabilities(&self, rho: &ComplexMatrix) -> Vec<f64> {
        let d = self.dim;
        let m = rho.as_slice();
        let mut tmp = vec![ZERO; d];
        (0..self.counts.len())
            .map(|j| {
                let v = self.vector(j);
                for (r, t) in tmp.iter_mut().enumerate() {
                    *t = m[r * d..(r + 1) * d].iter().zip(v).map(|(a, b)| a * b).sum();
                }
                v.iter().zip(&tmp).map(|(a, b)| (a.conj() * b).re).sum()
            })
            .collect()
    }

    pub fn log_likelihood_from_probabilities(&self, probs: &[f64], floor: f64) -> f64 {
        let total = self.total();
        self.counts
            .iter()
            .zip(probs)
            .filter(|(c, _)| **c > 0.0)
            .map(|(c, p)| c / total * p.max(floor).ln())
            .sum()
    }

    pub fn log_likelihood(&self, rho: &DensityMatrix, floor: f64) -> f64 {
        self.log_likelihood_from_probabilities(&self.probabilities(rho.matrix()), floor)
    }

    /// `R = Σ_j (c_j/N) / max(p_j, floor) |v_j⟩⟨v_j|`
    fn r_operator(&self, probs: &[f64], floor: f64) -> ComplexMatrix {
        let d = self.dim;
        let total = self.total();
        let mut r = ComplexMatrix::zeros(d);
        let out = r.as_mut_slice();
        for (j, (&c, &p)) in self.counts.iter().zip(probs).enumerate() {
            if c == 0.0 {
                continue;
            }
            let w = c / total / p.max(floor);
            let v = self.vector(j);
            for a in 0..d {
                let va = v[a] * w;
                if va == ZERO {
                    continue;
                }
                for b in a..d {
                    out[a * d + b] += va * v[b].conj();
                }
            }
        }
        for a in 0..d {
            for b in 0..a {
                out[a * d + b] = out[b * d + a].conj();
            }
        }
        r
    }
}

/// Rank of the real span of the projectors, computed in the Pauli basis.
pub fn operator_span_rank(outcomes: &[Outcome]) -> usize {
    let Some(first) = outcomes.first() else {
        return 0;
    };
    let n = first.n_qubits();
    let len = 1usize << (2 * n);
    let mut basis: Vec<Vec<f64>> = Vec::new();
    for o in outcomes {
        // coefficient on σ_{i1}⊗...⊗σ_{in} is Π_q (1, b_x, b_y, b_z)[i_q]
        let mut v = vec![1.0];
        for l in o.labels() {
            let b = l.bloch();
            let local = [1.0, b[0], b[1], b[2]];
            v = v.iter().flat_map(|a| local.iter().map(move |x| a * x)).collect();
        }
        for e in &basis {
            let dot: f64 = v.iter().zip(e).map(|(a, b)| a * b).sum();
            for (x, y) in v.iter_mut().zip(e) {
                *x -= dot * y;
            }
        }
        let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        if norm > 1e-9 {
            basis.push(v.into_iter().map(|x| x / norm).collect());
            if basis.len() == len {
                break;
            }
        }
    }
    basis.len()
}

fn sandwich(a: &ComplexMatrix, rho: &ComplexMatrix, b: &ComplexMatrix) -> ComplexMatrix {
    a.matmul(rho).matmul(b)
}

/// Reconstructs from `I/dim`.
pub fn mle_reconstruct(tables: &[CountTable], config: &ReconstructionConfig) -> Result<Reconstruction> {
    let model = MeasurementModel::from_tables(tables)?;
    reconstruct_model(&model, config, None)
}

/// Runs the fixed-point iteration on a prepared model, optionally from a
/// given starting state (which should be full rank).
pub fn reconstruct_model(
    model: &MeasurementModel,
    config: &ReconstructionConfig,
    start: Option<&DensityMatrix>,
) -> Result<Reconstruction> {
    config.validate()?;
    let floor = config.probability_floor;
    let mut rho = match start {
        Some(s) if s.n_qubits() == model.n_qubits => s.matrix().clone(),
        Some(s) => {
            return Err(Error::Dimension(format!(
                "start state has {} qubits, data has {}",
                s.n_qubits(),
                model.n_qubits
            )));
        }
        None => DensityMatrix::maximally_mixed(model.n_qubits).into_matrix(),
    };
    let mut probs = model.probabilities(&rho);
    let mut ll = model.log_likelihood_from_probabilities(&probs, floor);
    let mut history = vec![ll];
    let mut converged = false;
    let identity = ComplexMatrix::identity(model.dim);

    for _ in 0..config.max_iterations {
        let r = model.r_operator(&probs, floor);
        let mut accepted = None;
        let full = normalize(sandwich(&r, &rho, &r));
        if let Some(candidate) = full {
            let cp = model.probabilities(&candidate);
            let cll = model.log_likelihood_from_probabilities(&cp, floor);
            if cll >= ll {
                accepted = Some((candidate, cp, cll));
            }
        }
        if accepted.is_none() {
            // diluted step (I + εR) ρ (I + εR), halving ε until the likelihood does not drop
            let mut eps = 0.1;
            while eps > 1e-12 {
                let mut step = identity.clone();
                step.add_scaled(eps, &r);
                if let Some(candidate) = normalize(sandwich(&step, &rho, &step)) {
                    let cp = model.probabilities(&candidate);
                    let cll = model.log_likelihood_from_probabilities(&cp, floor);
                    if cll >= ll {
                        accepted = Some((candidate, cp, cll));
                        break;
                    }
                }
                eps *= 0.5;
            }
        }
        let Some((candidate, cp, cll)) = accepted else {
            converged = true;
            break;
        };
        let delta = cll - ll;
        rho = candidate;
        probs = cp;
        ll = cll;
        history.push(ll);
        if delta < config.stop_delta {
            converged = true;
            break;
        }
    }

    Ok(Reconstruction {
        state: DensityMatrix::normalized(rho)?,
        iterations: history.len() - 1,
        converged,
        log_likelihood: ll,
        history,
    })
}

fn normalize(m: ComplexMatrix) -> Option<ComplexMatrix> {
    let h = m.hermitian_part();
    let tr = h.trace().re;
    (tr.is_finite() && tr > 0.0).then(|| h.scale(1.0 / tr))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::analysis::fidelity;
    use crate::states::{noisy_smolin, NoiseLevel};
    use crate::tomography::measurement::{all_label_settings, basis_settings, expected_counts};

    #[test]
    fn rank_of_standard_sets() {
        let outs = |settings: Vec<crate::tomography::MeasurementSetting>| -> Vec<Outcome> {
            settings.iter().flat_map(|s| s.outcomes()).collect()
        };
        assert_eq!(operator_span_rank(&outs(basis_settings(2))), 16);
        assert_eq!(operator_span_rank(&outs(all_label_settings(1))), 4);
        assert_eq!(operator_span_rank(&outs(vec!["HH".parse().unwrap()])), 4);
    }

    #[test]
    fn non_ic_input_is_rejected() {
        let rho = DensityMatrix::maximally_mixed(2);
        let tables = expected_counts(&rho, &["HH".parse().unwrap()], 100.0).unwrap();
        assert!(matches!(
            mle_reconstruct(&tables, &ReconstructionConfig::default()),
            Err(Error::NotInformationallyComplete { rank: 4, required: 16 })
        ));
    }

    #[test]
    fn zero_counts_rejected() {
        let rho = DensityMatrix::maximally_mixed(1);
        let tables: Vec<CountTable> = expected_counts(&rho, &basis_settings(1), 10.0)
            .unwrap()
            .into_iter()
            .map(|t| t.map_counts(|_| 0.0))
            .collect();
        assert!(matches!(
            mle_reconstruct(&tables, &ReconstructionConfig::default()),
            Err(Error::NoCounts)
        ));
    }

    #[test]
    fn maximally_mixed_is_a_fixed_point() {
        let rho = DensityMatrix::maximally_mixed(2);
        let tables = expected_counts(&rho, &all_label_settings(2), 1e4).unwrap();
        let rec = mle_reconstruct(&tables, &ReconstructionConfig::default()).unwrap();
        assert!(fidelity(&rec.state, &rho).unwrap() > 0.999_999);
    }

    #[test]
    fn expected_counts_reconstruct_noisy_smolin() {
        let truth = noisy_smolin(NoiseLevel::new(0.49).unwrap());
        let tables = expected_counts(&truth, &basis_settings(4), 1e6).unwrap();
        let rec = mle_reconstruct(&tables, &ReconstructionConfig::default()).unwrap();
        assert!(fidelity(&rec.state, &truth).unwrap() >= 0.9999);
        assert!(rec.history.windows(2).all(|w| w[1] >= w[0]));
    }
}
