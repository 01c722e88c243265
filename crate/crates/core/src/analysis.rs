//! Entanglement certification: witness, partial-transpose spectra across the
//! two-two cuts, fidelity, tangle, and the product-state geometry of the
//! Smolin witness.

use std::fmt;

use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::density::DensityMatrix;
use crate::error::{Error, Result};
use crate::exec::Execution;
use crate::linalg::{
    hermitian_eigen, hermitian_eigenvalues, partial_transpose, pauli, tensor, tensor_all,
    ComplexMatrix, QubitSubset, ZERO,
};
use crate::rng;
use crate::states::{noisy_smolin, smolin, NoiseLevel};

/// Negative eigenvalues above this magnitude mean the input is not PSD.
pub const PSD_TOL: f64 = 1e-10;

// eigenvalues below this are treated as exact zeros before taking square roots
const ROUNDOFF: f64 = 1e-14;

/// Two-two partition of the parties A, B, C, D (qubits 0..4).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum BipartiteCut {
    /// (AB):(CD)
    AbCd,
    /// (AC):(BD)
    AcBd,
    /// (AD):(BC)
    AdBc,
}

impl BipartiteCut {
    pub const ALL: [Self; 3] = [Self::AbCd, Self::AcBd, Self::AdBc];

    /// The pair that contains party A.
    pub fn left(self) -> [usize; 2] {
        match self {
            Self::AbCd => [0, 1],
            Self::AcBd => [0, 2],
            Self::AdBc => [0, 3],
        }
    }

    pub fn right(self) -> [usize; 2] {
        match self {
            Self::AbCd => [2, 3],
            Self::AcBd => [1, 3],
            Self::AdBc => [1, 2],
        }
    }

    /// Qubits that get transposed when testing this cut.
    pub fn transposed_subset(self) -> QubitSubset {
        QubitSubset::new(4, self.right()).expect("cut pairs are valid")
    }
}

impl fmt::Display for BipartiteCut {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let name = |q: usize| ['A', 'B', 'C', 'D'][q];
        let [a, b] = self.left();
        let [c, d] = self.right();
        write!(f, "({}{}):({}{})", name(a), name(b), name(c), name(d))
    }
}

impl Serialize for BipartiteCut {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_string())
    }
}

impl<'de> Deserialize<'de> for BipartiteCut {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        Self::ALL
            .into_iter()
            .find(|c| c.to_string() == s)
            .ok_or_else(|| serde::de::Error::custom(format!("unknown cut {s}")))
    }
}

/// `W = I − X⊗4 − Y⊗4 − Z⊗4`
pub fn witness_operator() -> ComplexMatrix {
    let mut w = ComplexMatrix::identity(16);
    for i in 1..=3 {
        let s = pauli(i);
        w.add_scaled(-1.0, &tensor_all([&s, &s, &s, &s]));
    }
    w
}

fn require_qubits(rho: &DensityMatrix, n: usize, what: &str) -> Result<()> {
    if rho.n_qubits() != n {
        return Err(Error::Dimension(format!(
            "{what} needs a {n}-qubit state, got {} qubits",
            rho.n_qubits()
        )));
    }
    Ok(())
}

/// `Tr(W ρ)` for a four-qubit state.
pub fn witness_expectation(rho: &DensityMatrix) -> Result<f64> {
    require_qubits(rho, 4, "the witness")?;
    Ok(rho.expectation(&witness_operator()))
}

/// Smallest partial-transpose eigenvalue and the cut achieving it.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PtMinimum {
    pub value: f64,
    /// `None` for two-qubit input, where there is a single cut.
    pub cut: Option<BipartiteCut>,
}

/// Minimum PT eigenvalue of a single cut.
pub fn pt_min_for_cut(rho: &DensityMatrix, cut: BipartiteCut) -> Result<f64> {
    require_qubits(rho, 4, "a two-two cut")?;
    let pt = partial_transpose(rho.matrix(), &cut.transposed_subset())?;
    Ok(hermitian_eigenvalues(&pt)?[0])
}

/// Minimum over all two-two cuts (four qubits) or over the single cut (two qubits).
pub fn min_pt_eigenvalue(rho: &DensityMatrix) -> Result<PtMinimum> {
    match rho.n_qubits() {
        2 => {
            let pt = partial_transpose(rho.matrix(), &QubitSubset::new(2, [1])?)?;
            Ok(PtMinimum {
                value: hermitian_eigenvalues(&pt)?[0],
                cut: None,
            })
        }
        4 => {
            let mut best = PtMinimum {
                value: f64::INFINITY,
                cut: None,
            };
            for cut in BipartiteCut::ALL {
                let v = pt_min_for_cut(rho, cut)?;
                if v < best.value {
                    best = PtMinimum {
                        value: v,
                        cut: Some(cut),
                    };
                }
            }
            Ok(best)
        }
        n => Err(Error::Dimension(format!(
            "minimum PT eigenvalue is defined for 2 or 4 qubits, got {n}"
        ))),
    }
}

fn psd_square_root(rho: &DensityMatrix) -> Result<ComplexMatrix> {
    let eig = hermitian_eigen(rho.matrix())?;
    if eig.values[0] < -PSD_TOL {
        return Err(Error::NotDensityMatrix(format!(
            "state has negative eigenvalue {:.3e}",
            eig.values[0]
        )));
    }
    let cutoff = ROUNDOFF * eig.values.last().copied().unwrap_or(0.0).max(1.0);
    Ok(eig.map_spectrum(|x| if x > cutoff { x.sqrt() } else { 0.0 }))
}

/// Uhlmann fidelity `(Tr √(√ρ σ √ρ))²`.
pub fn fidelity(rho: &DensityMatrix, sigma: &DensityMatrix) -> Result<f64> {
    if rho.dim() != sigma.dim() {
        return Err(Error::Dimension(format!(
            "fidelity between {}-dim and {}-dim states",
            rho.dim(),
            sigma.dim()
        )));
    }
    if sigma.min_eigenvalue() < -PSD_TOL {
        return Err(Error::NotDensityMatrix("second argument is not PSD".into()));
    }
    let root = psd_square_root(rho)?;
    let inner = root.matmul(sigma.matrix()).matmul(&root).hermitian_part();
    let f: f64 = hermitian_eigenvalues(&inner)?
        .into_iter()
        .filter(|&x| x > ROUNDOFF)
        .map(f64::sqrt)
        .sum();
    Ok((f * f).min(1.0))
}

/// Squared Wootters concurrence of a two-qubit state.
pub fn tangle(rho: &DensityMatrix) -> Result<f64> {
    require_qubits(rho, 2, "the tangle")?;
    let yy = tensor(&pauli(2), &pauli(2));
    let flipped = yy.matmul(&rho.matrix().conj()).matmul(&yy);
    // √ρ ρ̃ √ρ is Hermitian and isospectral to ρ ρ̃
    let root = psd_square_root(rho)?;
    let r = root.matmul(&flipped).matmul(&root).hermitian_part();
    let mut lambdas: Vec<f64> = hermitian_eigenvalues(&r)?
        .into_iter()
        .map(|x| x.max(0.0).sqrt())
        .collect();
    lambdas.sort_by(|a, b| b.total_cmp(a));
    let c = (lambdas[0] - lambdas[1] - lambdas[2] - lambdas[3]).max(0.0);
    Ok(c * c)
}

/// Haar-random single-qubit pure state via normalized complex Gaussians.
pub fn random_qubit<R: Rng + ?Sized>(rng: &mut R) -> [Complex64; 2] {
    random_vector(2, rng).try_into().expect("length 2")
}

pub fn random_vector<R: Rng + ?Sized>(dim: usize, rng: &mut R) -> Vec<Complex64> {
    let mut v: Vec<Complex64> = (0..dim)
        .map(|_| Complex64::new(rng.sample(StandardNormal), rng.sample(StandardNormal)))
        .collect();
    let norm = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    for z in &mut v {
        *z /= norm;
    }
    v
}

/// Random fully product pure four-qubit state.
pub fn random_product_state<R: Rng + ?Sized>(rng: &mut R) -> DensityMatrix {
    let factors: Vec<ComplexMatrix> = (0..4).map(|_| ComplexMatrix::outer(&random_qubit(rng))).collect();
    DensityMatrix::new(tensor_all(&factors)).expect("product of pure states")
}

#[derive(Debug, Clone, Copy)]
pub struct SeesawConfig {
    pub restarts: usize,
    pub max_sweeps: usize,
    pub tolerance: f64,
    pub seed: u64,
    pub execution: Execution,
}

impl Default for SeesawConfig {
    fn default() -> Self {
        Self {
            restarts: 50,
            max_sweeps: 500,
            tolerance: 1e-10,
            seed: 0,
            execution: Execution::default(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Direction {
    Max,
    Min,
}

/// `(⟨α| ⊗ I) ρ (|α⟩ ⊗ I)`, an 8×8 operator on BCD.
fn contract_first(rho: &ComplexMatrix, alpha: &[Complex64; 2]) -> ComplexMatrix {
    ComplexMatrix::from_fn(8, |i, j| {
        let mut acc = ZERO;
        for a in 0..2 {
            for b in 0..2 {
                acc += alpha[a].conj() * rho[(a * 8 + i, b * 8 + j)] * alpha[b];
            }
        }
        acc
    })
}

/// `(I ⊗ ⟨φ|) ρ (I ⊗ |φ⟩)`, a 2×2 operator on A.
fn contract_rest(rho: &ComplexMatrix, phi: &[Complex64]) -> ComplexMatrix {
    ComplexMatrix::from_fn(2, |a, b| {
        let mut acc = ZERO;
        for i in 0..8 {
            let row: Complex64 = (0..8).map(|j| rho[(a * 8 + i, b * 8 + j)] * phi[j]).sum();
            acc += phi[i].conj() * row;
        }
        acc
    })
}

fn extreme_eigvec(m: &ComplexMatrix, dir: Direction) -> Result<(f64, Vec<Complex64>)> {
    let eig = hermitian_eigen(m)?;
    let k = match dir {
        Direction::Max => eig.values.len() - 1,
        Direction::Min => 0,
    };
    Ok((eig.values[k], eig.vectors[k].clone()))
}

fn seesaw_run(rho: &ComplexMatrix, dir: Direction, cfg: &SeesawConfig, restart: usize) -> Result<f64> {
    let mut rng = rng::stream(cfg.seed, restart as u64);
    let mut alpha = random_qubit(&mut rng);
    let mut last = match dir {
        Direction::Max => f64::NEG_INFINITY,
        Direction::Min => f64::INFINITY,
    };
    for _ in 0..cfg.max_sweeps {
        let (_, phi) = extreme_eigvec(&contract_first(rho, &alpha), dir)?;
        let (value, a) = extreme_eigvec(&contract_rest(rho, &phi), dir)?;
        alpha = [a[0], a[1]];
        let done = (value - last).abs() < cfg.tolerance;
        last = value;
        if done {
            break;
        }
    }
    Ok(last)
}

fn product_overlap(rho: &DensityMatrix, dir: Direction, cfg: &SeesawConfig) -> Result<f64> {
    require_qubits(rho, 4, "the product-state seesaw")?;
    if cfg.restarts == 0 {
        return Err(Error::InvalidInput("seesaw needs at least one restart".into()));
    }
    let runs = cfg
        .execution
        .map(cfg.restarts, |k| seesaw_run(rho.matrix(), dir, cfg, k));
    let mut best: Option<f64> = None;
    for r in runs {
        let v = r?;
        best = Some(match (best, dir) {
            (None, _) => v,
            (Some(b), Direction::Max) => b.max(v),
            (Some(b), Direction::Min) => b.min(v),
        });
    }
    Ok(best.expect("at least one restart"))
}

/// Largest `Tr(ρ |α⟩⟨α|_A ⊗ |φ⟩⟨φ|_BCD)` found by alternating eigen-maximization.
///
/// Every value returned is attained by an explicit product state, so it is a
/// lower bound on the true maximum. Restart `k` always uses stream `k` of the
/// seed, which makes the result non-decreasing in the number of restarts.
pub fn max_product_overlap(rho: &DensityMatrix, cfg: &SeesawConfig) -> Result<f64> {
    product_overlap(rho, Direction::Max, cfg)
}

/// Smallest overlap with an A|BCD product state; an upper bound on the true minimum.
pub fn min_product_overlap(rho: &DensityMatrix, cfg: &SeesawConfig) -> Result<f64> {
    product_overlap(rho, Direction::Min, cfg)
}

/// Numerical check of the nearest-separable-state construction of the witness.
#[derive(Debug, Clone, Serialize)]
pub struct GeometryReport {
    /// `Tr(ρ_S(2/3) (ρ_S − ρ_S(2/3)))`
    pub c0: f64,
    /// `max |24 W̃ − W|` with `W̃ = c0 I + ρ_S(2/3) − ρ_S`
    pub witness_residual: f64,
    /// `max |ρ_S^{Γ_A} − (Y⊗I⊗I⊗I)(I/8 − ρ_S)(Y⊗I⊗I⊗I)|`
    pub gamma_a_residual: f64,
    /// Largest disagreement between `sqrt(Σ|x_ij|²)` and `sqrt(Tr X†X)` on the test matrices.
    pub hs_norm_residual: f64,
    pub passed: bool,
}

pub fn witness_geometry_check() -> GeometryReport {
    const TOL: f64 = 1e-12;
    let rho = smolin();
    let nearest = noisy_smolin(NoiseLevel::new(2.0 / 3.0).expect("in range"));
    let diff = rho.matrix() - nearest.matrix();
    let c0 = nearest.matrix().hs_inner(&diff).re;

    let mut w_tilde = ComplexMatrix::identity(16).scale(c0);
    w_tilde = &w_tilde + &(nearest.matrix() - rho.matrix());
    let witness_residual = w_tilde.scale(24.0).max_abs_diff(&witness_operator());

    let y_a = tensor_all([&pauli(2), &pauli(0), &pauli(0), &pauli(0)]);
    let shifted = &ComplexMatrix::identity(16).scale(1.0 / 8.0) - rho.matrix();
    let conjugated = y_a.matmul(&shifted).matmul(&y_a);
    let gamma_a = partial_transpose(rho.matrix(), &QubitSubset::new(4, [0]).expect("valid"))
        .expect("four qubits");
    let gamma_a_residual = gamma_a.max_abs_diff(&conjugated);

    let hs_norm_residual = [ComplexMatrix::identity(16), rho.matrix().clone(), witness_operator(), diff]
        .iter()
        .map(|x| (x.hs_norm() - x.adjoint().matmul(x).trace().re.sqrt()).abs())
        .fold(0.0, f64::max);

    let passed = (c0 - 1.0 / 24.0).abs() <= TOL
        && witness_residual <= TOL
        && gamma_a_residual <= TOL
        && hs_norm_residual <= TOL;
    GeometryReport {
        c0,
        witness_residual,
        gamma_a_residual,
        hs_norm_residual,
        passed,
    }
}

/// A value with an optional one-sigma uncertainty.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Estimate {
    pub value: f64,
    pub uncertainty: Option<f64>,
}

impl Estimate {
    pub fn exact(value: f64) -> Self {
        Self {
            value,
            uncertainty: None,
        }
    }

    pub fn with_uncertainty(value: f64, sigma: f64) -> Self {
        Self {
            value,
            uncertainty: Some(sigma),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PtEstimate {
    pub value: f64,
    pub uncertainty: Option<f64>,
    pub cut: Option<BipartiteCut>,
}

/// Certification summary; fields that were not computed serialize as `null`.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct AnalysisReport {
    pub n_qubits: usize,
    /// `Tr(W ρ)` from a density matrix (four qubits only).
    pub witness: Option<Estimate>,
    /// Witness measured directly from the three Pauli-basis count tables.
    pub witness_from_counts: Option<Estimate>,
    pub min_pt_eig: Option<PtEstimate>,
    pub fidelity_with_target: Option<Estimate>,
    /// Two qubits only.
    pub tangle: Option<Estimate>,
}

/// Central values for `rho`, without uncertainties.
pub fn analyze_state(rho: &DensityMatrix, target: Option<&DensityMatrix>) -> Result<AnalysisReport> {
    let n = rho.n_qubits();
    let pt = min_pt_eigenvalue(rho)?;
    Ok(AnalysisReport {
        n_qubits: n,
        witness: if n == 4 {
            Some(Estimate::exact(witness_expectation(rho)?))
        } else {
            None
        },
        witness_from_counts: None,
        min_pt_eig: Some(PtEstimate {
            value: pt.value,
            uncertainty: None,
            cut: pt.cut,
        }),
        fidelity_with_target: target
            .map(|t| fidelity(rho, t).map(Estimate::exact))
            .transpose()?,
        tangle: if n == 2 {
            Some(Estimate::exact(tangle(rho)?))
        } else {
            None
        },
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::states::{bell_state, werner_state, PauliLabel};
    use approx::assert_abs_diff_eq;

    fn p(x: f64) -> NoiseLevel {
        NoiseLevel::new(x).unwrap()
    }

    #[test]
    fn witness_values() {
        assert_abs_diff_eq!(witness_expectation(&smolin()).unwrap(), -2.0, epsilon = 1e-12);
        assert_abs_diff_eq!(
            witness_expectation(&DensityMatrix::maximally_mixed(4)).unwrap(),
            1.0,
            epsilon = 1e-12
        );
        assert_abs_diff_eq!(
            witness_expectation(&noisy_smolin(p(2.0 / 3.0))).unwrap(),
            0.0,
            epsilon = 1e-12
        );
        assert!(witness_expectation(&DensityMatrix::maximally_mixed(2)).is_err());
    }

    #[test]
    fn pt_minimum_examples() {
        let m = min_pt_eigenvalue(&noisy_smolin(p(0.49))).unwrap();
        assert_abs_diff_eq!(m.value, 0.030625, epsilon = 1e-12);
        assert!(m.cut.is_some());

        let bell = min_pt_eigenvalue(&bell_state(PauliLabel::I).density()).unwrap();
        assert_abs_diff_eq!(bell.value, -0.5, epsilon = 1e-12);
        assert_eq!(bell.cut, None);

        assert!(min_pt_eigenvalue(&DensityMatrix::maximally_mixed(3)).is_err());
    }

    #[test]
    fn smolin_is_invariant_under_cut_transposes() {
        let rho = smolin();
        for cut in BipartiteCut::ALL {
            let pt = partial_transpose(rho.matrix(), &cut.transposed_subset()).unwrap();
            assert!(pt.max_abs_diff(rho.matrix()) < 1e-15, "{cut}");
        }
    }

    #[test]
    fn cut_names_round_trip() {
        for cut in BipartiteCut::ALL {
            let json = serde_json::to_string(&cut).unwrap();
            assert_eq!(serde_json::from_str::<BipartiteCut>(&json).unwrap(), cut);
        }
        assert_eq!(BipartiteCut::AcBd.to_string(), "(AC):(BD)");
    }

    #[test]
    fn fidelity_examples() {
        let rho = noisy_smolin(p(0.3));
        assert_abs_diff_eq!(fidelity(&rho, &rho).unwrap(), 1.0, epsilon = 1e-10);
        let phi = bell_state(PauliLabel::I).density();
        assert_abs_diff_eq!(
            fidelity(&phi, &DensityMatrix::maximally_mixed(2)).unwrap(),
            0.25,
            epsilon = 1e-12
        );
        assert!(fidelity(&phi, &rho).is_err());
    }

    #[test]
    fn fidelity_of_commuting_smolin_states() {
        // common eigenbasis: ρ_S has {0 ×12, 1/4 ×4}, ρ_S(2/3) has {1/24 ×12, 1/8 ×4}
        let expected = (4.0 * (0.25f64 * 0.125).sqrt()).powi(2);
        let f = fidelity(&smolin(), &noisy_smolin(p(2.0 / 3.0))).unwrap();
        assert_abs_diff_eq!(f, expected, epsilon = 1e-9);
        assert_abs_diff_eq!(expected, 0.5, epsilon = 1e-15);
    }

    #[test]
    fn tangle_examples() {
        assert_abs_diff_eq!(tangle(&bell_state(PauliLabel::X).density()).unwrap(), 1.0, epsilon = 1e-10);
        assert_abs_diff_eq!(tangle(&DensityMatrix::maximally_mixed(2)).unwrap(), 0.0, epsilon = 1e-12);
        let w = werner_state(0.51, PauliLabel::Z).unwrap();
        assert_abs_diff_eq!(tangle(&w).unwrap(), 0.070225, epsilon = 1e-10);
        assert!(tangle(&smolin()).is_err());
    }

    #[test]
    fn seesaw_simple_cases() {
        let cfg = SeesawConfig {
            restarts: 5,
            ..Default::default()
        };
        let mixed = DensityMatrix::maximally_mixed(4);
        assert_abs_diff_eq!(max_product_overlap(&mixed, &cfg).unwrap(), 1.0 / 16.0, epsilon = 1e-12);
        assert_abs_diff_eq!(min_product_overlap(&mixed, &cfg).unwrap(), 1.0 / 16.0, epsilon = 1e-12);

        let mut zero = ComplexMatrix::zeros(16);
        zero[(0, 0)] = Complex64::new(1.0, 0.0);
        let ket0000 = DensityMatrix::new(zero).unwrap();
        assert_abs_diff_eq!(max_product_overlap(&ket0000, &cfg).unwrap(), 1.0, epsilon = 1e-10);
    }

    #[test]
    fn seesaw_min_respects_spectral_bound() {
        let rho = noisy_smolin(p(0.4));
        let cfg = SeesawConfig {
            restarts: 8,
            ..Default::default()
        };
        let m = rho.min_eigenvalue();
        assert!(min_product_overlap(&rho, &cfg).unwrap() >= m - 1e-12);
    }

    #[test]
    fn geometry_check_passes() {
        let report = witness_geometry_check();
        assert_abs_diff_eq!(report.c0, 1.0 / 24.0, epsilon = 1e-12);
        assert!(report.passed, "{report:?}");
    }

    #[test]
    fn report_serializes_nulls() {
        let report = analyze_state(&DensityMatrix::maximally_mixed(4), None).unwrap();
        let json = serde_json::to_value(&report).unwrap();
        assert!(json["tangle"].is_null());
        assert!(json["fidelity_with_target"].is_null());
        assert_abs_diff_eq!(json["witness"]["value"].as_f64().unwrap(), 1.0, epsilon = 1e-12);
        assert!(json["witness"]["uncertainty"].is_null());
        assert_abs_diff_eq!(report.min_pt_eig.unwrap().value, 1.0 / 16.0, epsilon = 1e-12);
    }
}
