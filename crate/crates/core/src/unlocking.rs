//! Bell projection on two of the four parties and the simulated unlocking run.

use num_complex::Complex64;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::density::DensityMatrix;
use crate::error::{Error, Result};
use crate::linalg::{partial_trace, permute_qubits, tensor, ComplexMatrix, QubitSubset};
use crate::states::{bell_projector, imperfect_source, twirled_pair_state, NoiseLevel, PauliLabel, SourceModel};
use crate::tomography::counts::CountTable;
use crate::tomography::measurement::{all_label_settings, simulate_counts};

/// Heralding probabilities below this are treated as an impossible outcome.
pub const MIN_PROBABILITY: f64 = 1e-14;

/// Which Bell state is heralded on which pair of parties.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BellProjectionSpec {
    pub parties: [usize; 2],
    pub bell: PauliLabel,
    /// Two-photon interference visibility in `[0, 1]`.
    #[serde(default = "unit")]
    pub visibility: f64,
    /// Optional phase `diag(1, e^{iχ})` applied to the second party first.
    #[serde(default)]
    pub chi: Option<f64>,
}

fn unit() -> f64 {
    1.0
}

impl BellProjectionSpec {
    pub fn new(parties: [usize; 2], bell: PauliLabel) -> Self {
        Self {
            parties,
            bell,
            visibility: 1.0,
            chi: None,
        }
    }

    /// |φ⁻⟩ on parties A and C, as used to unlock the B–D pair.
    pub fn phi_minus_ac() -> Self {
        Self::new([0, 2], PauliLabel::Z)
    }

    pub fn with_visibility(mut self, visibility: f64) -> Self {
        self.visibility = visibility;
        self
    }

    pub fn validate(&self) -> Result<()> {
        let [a, b] = self.parties;
        if a == b || a > 3 || b > 3 {
            return Err(Error::InvalidInput(format!(
                "Bell projection needs two distinct parties out of 0..4, got {a} and {b}"
            )));
        }
        if !(0.0..=1.0).contains(&self.visibility) {
            return Err(Error::InvalidInput(format!(
                "visibility {} outside [0, 1]",
                self.visibility
            )));
        }
        if let Some(chi) = self.chi {
            if !chi.is_finite() {
                return Err(Error::InvalidInput("phase chi must be finite".into()));
            }
        }
        Ok(())
    }

    /// Parties that keep their qubits, in ascending order.
    pub fn remaining(&self) -> [usize; 2] {
        let subset = QubitSubset::new(4, self.parties).expect("validated parties");
        let rest = subset.complement();
        [rest.indices()[0], rest.indices()[1]]
    }

    /// Two-qubit POVM element on the projected parties (in the order given).
    pub fn povm_element(&self) -> ComplexMatrix {
        let mut e = bell_projector(self.bell).scale(self.visibility);
        if self.visibility < 1.0 {
            // φ-type Bell states herald |00⟩,|11⟩; ψ-type herald |01⟩,|10⟩
            let incoherent = if self.bell == PauliLabel::I || self.bell == PauliLabel::Z {
                [0.5, 0.0, 0.0, 0.5]
            } else {
                [0.0, 0.5, 0.5, 0.0]
            };
            e.add_scaled(1.0 - self.visibility, &ComplexMatrix::diagonal(&incoherent));
        }
        if let Some(chi) = self.chi {
            // the phase acts on the state, so the element becomes U† E U
            let phase = ComplexMatrix::from_fn(2, |r, c| match (r, c) {
                (0, 0) => Complex64::new(1.0, 0.0),
                (1, 1) => Complex64::from_polar(1.0, chi),
                _ => Complex64::new(0.0, 0.0),
            });
            let u = tensor(&ComplexMatrix::identity(2), &phase);
            e = u.adjoint().matmul(&e).matmul(&u);
        }
        e
    }
}

/// Heralded two-qubit state and the probability of the heralding outcome.
#[derive(Debug, Clone)]
pub struct Projection {
    pub state: DensityMatrix,
    pub probability: f64,
}

/// Projects `spec.parties` of a four-qubit state and returns the state of the
/// other two parties (ascending order) with the outcome probability.
pub fn bell_project(rho: &DensityMatrix, spec: &BellProjectionSpec) -> Result<Projection> {
    if rho.n_qubits() != 4 {
        return Err(Error::Dimension(format!(
            "Bell projection expects a four-qubit state, got {} qubits",
            rho.n_qubits()
        )));
    }
    spec.validate()?;
    let [a, b] = spec.parties;
    let [c, d] = spec.remaining();
    let mut perm = [0; 4];
    perm[a] = 0;
    perm[b] = 1;
    perm[c] = 2;
    perm[d] = 3;
    let reordered = permute_qubits(rho.matrix(), &perm)?;
    let element = tensor(&spec.povm_element(), &ComplexMatrix::identity(4));
    // Tr_P[(E⊗I)ρ] equals Tr_P[√E ρ √E] after tracing out the measured pair
    let applied = element.matmul(&reordered);
    let reduced = partial_trace(&applied, &QubitSubset::new(4, [2, 3])?)?.hermitian_part();
    let probability = reduced.trace().re;
    if probability < MIN_PROBABILITY {
        return Err(Error::NullProjection(probability));
    }
    Ok(Projection {
        state: DensityMatrix::normalized(reduced)?,
        probability,
    })
}

/// Four-qubit state from two sources and the twirl at level `p`.
pub fn prepared_state(p: NoiseLevel, sources: (&SourceModel, &SourceModel)) -> Result<DensityMatrix> {
    let ab = imperfect_source(sources.0)?;
    let cd = imperfect_source(sources.1)?;
    twirled_pair_state(p, &ab, &cd)
}

/// Heralded state after preparing at level `p` and projecting per `spec`.
pub fn unlocked_state(p: NoiseLevel, sources: (&SourceModel, &SourceModel), spec: &BellProjectionSpec) -> Result<Projection> {
    bell_project(&prepared_state(p, sources)?, spec)
}

#[derive(Debug, Clone)]
pub struct UnlockingRun {
    pub heralded: Projection,
    /// Counts for all 36 two-qubit analyzer settings on the remaining parties.
    pub tables: Vec<CountTable>,
}

/// Simulated unlocking experiment with Poisson counts on the heralded pair.
pub fn simulate_unlocking_run<R: Rng + ?Sized>(
    p: NoiseLevel,
    sources: (&SourceModel, &SourceModel),
    spec: &BellProjectionSpec,
    mean_total_per_setting: f64,
    rng: &mut R,
) -> Result<UnlockingRun> {
    let heralded = unlocked_state(p, sources, spec)?;
    let tables = simulate_counts(&heralded.state, &all_label_settings(2), mean_total_per_setting, rng)?;
    Ok(UnlockingRun { heralded, tables })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::analysis::{fidelity, min_pt_eigenvalue, tangle};
    use crate::states::{bell_state, noisy_smolin, smolin, werner_state};
    use approx::assert_abs_diff_eq;

    fn p(x: f64) -> NoiseLevel {
        NoiseLevel::new(x).unwrap()
    }

    #[test]
    fn smolin_ab_phi_plus_heralds_phi_plus() {
        let out = bell_project(&smolin(), &BellProjectionSpec::new([0, 1], PauliLabel::I)).unwrap();
        assert_abs_diff_eq!(out.probability, 0.25, epsilon = 1e-12);
        let phi = bell_state(PauliLabel::I).density();
        assert!(out.state.matrix().max_abs_diff(phi.matrix()) < 1e-12);
    }

    #[test]
    fn noisy_smolin_ac_phi_minus_gives_werner() {
        for &x in &[0.0, 0.3, 0.49, 1.0] {
            let out = bell_project(&noisy_smolin(p(x)), &BellProjectionSpec::phi_minus_ac()).unwrap();
            assert_abs_diff_eq!(out.probability, 0.25, epsilon = 1e-12);
            let expected = werner_state(1.0 - x, PauliLabel::Z).unwrap();
            assert!(out.state.matrix().max_abs_diff(expected.matrix()) < 1e-12);
        }
    }

    #[test]
    fn maximally_mixed_input() {
        let out = bell_project(&DensityMatrix::maximally_mixed(4), &BellProjectionSpec::new([1, 3], PauliLabel::Y)).unwrap();
        assert_abs_diff_eq!(out.probability, 0.25, epsilon = 1e-12);
        assert!(out.state.matrix().max_abs_diff(DensityMatrix::maximally_mixed(2).matrix()) < 1e-12);
    }

    #[test]
    fn invalid_specs_and_null_outcomes() {
        let rho = smolin();
        assert!(bell_project(&rho, &BellProjectionSpec::new([1, 1], PauliLabel::I)).is_err());
        assert!(bell_project(&rho, &BellProjectionSpec::new([0, 4], PauliLabel::I)).is_err());
        assert!(bell_project(&rho, &BellProjectionSpec::new([0, 1], PauliLabel::I).with_visibility(1.5)).is_err());
        // |φ⁺⟩|φ⁺⟩ never gives ψ⁻ on A,B
        let phi = bell_state(PauliLabel::I).density();
        let pair = DensityMatrix::new(tensor(phi.matrix(), phi.matrix())).unwrap();
        assert!(matches!(
            bell_project(&pair, &BellProjectionSpec::new([0, 1], PauliLabel::Y)),
            Err(Error::NullProjection(_))
        ));
    }

    #[test]
    fn outcome_probabilities_sum_to_one() {
        let rho = noisy_smolin(p(0.37));
        for parties in [[0, 1], [0, 2], [0, 3], [1, 2], [1, 3], [2, 3]] {
            let total: f64 = PauliLabel::ALL
                .iter()
                .map(|&mu| bell_project(&rho, &BellProjectionSpec::new(parties, mu)).unwrap().probability)
                .sum();
            assert_abs_diff_eq!(total, 1.0, epsilon = 1e-12);
        }
    }

    #[test]
    fn finite_visibility_dephases_the_herald() {
        let spec = BellProjectionSpec::phi_minus_ac().with_visibility(0.0);
        let out = bell_project(&smolin(), &spec).unwrap();
        assert!(tangle(&out.state).unwrap() < 1e-12);
        let partial = bell_project(&smolin(), &BellProjectionSpec::phi_minus_ac().with_visibility(0.9)).unwrap();
        let t = tangle(&partial.state).unwrap();
        assert!(t > 0.5 && t < 1.0, "{t}");
    }

    #[test]
    fn chi_rotates_phi_plus_into_phi_minus() {
        let spec = BellProjectionSpec {
            chi: Some(std::f64::consts::PI),
            ..BellProjectionSpec::new([0, 1], PauliLabel::I)
        };
        let phi_minus = bell_state(PauliLabel::Z).density();
        let pair = DensityMatrix::new(tensor(phi_minus.matrix(), phi_minus.matrix())).unwrap();
        assert!(bell_project(&pair, &BellProjectionSpec::new([0, 1], PauliLabel::I)).is_err());
        let out = bell_project(&pair, &spec).unwrap();
        assert_abs_diff_eq!(out.probability, 1.0, epsilon = 1e-12);
        assert_abs_diff_eq!(
            fidelity(&out.state, &bell_state(PauliLabel::Z).density()).unwrap(),
            1.0,
            epsilon = 1e-10
        );
    }

    #[test]
    fn ideal_run_heralds_entanglement_below_two_thirds() {
        let ideal = SourceModel::ideal();
        let out = unlocked_state(p(0.49), (&ideal, &ideal), &BellProjectionSpec::phi_minus_ac()).unwrap();
        // Werner v = 0.51 has concurrence (3v − 1)/2
        assert_abs_diff_eq!(tangle(&out.state).unwrap(), (0.53f64 / 2.0).powi(2), epsilon = 1e-10);
        let out = unlocked_state(p(0.75), (&ideal, &ideal), &BellProjectionSpec::phi_minus_ac()).unwrap();
        assert!(min_pt_eigenvalue(&out.state).unwrap().value > 0.0);
    }

    #[test]
    fn simulated_run_has_36_settings() {
        let ideal = SourceModel::ideal();
        let mut rng = crate::rng::seeded(5);
        let run = simulate_unlocking_run(p(0.2), (&ideal, &ideal), &BellProjectionSpec::phi_minus_ac(), 100.0, &mut rng)
            .unwrap();
        assert_eq!(run.tables.len(), 36);
        assert!(run.tables.iter().all(|t| t.counts.len() == 4));
    }
}
