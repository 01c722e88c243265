//! Bell, Smolin, noisy-Smolin and Werner states, the random Pauli twirl that
//! produces the noisy family, and models of imperfect pair sources.

use std::fmt;

use num_complex::Complex64;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::analysis;
use crate::density::DensityMatrix;
use crate::error::{Error, Result};
use crate::linalg::{pauli, tensor, tensor_all, ComplexMatrix, ZERO};

/// Index into {I, X, Y, Z}.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(try_from = "u8", into = "u8")]
pub struct PauliLabel(u8);

impl PauliLabel {
    pub const I: Self = Self(0);
    pub const X: Self = Self(1);
    pub const Y: Self = Self(2);
    pub const Z: Self = Self(3);
    pub const ALL: [Self; 4] = [Self::I, Self::X, Self::Y, Self::Z];

    pub fn new(mu: u8) -> Result<Self> {
        if mu < 4 {
            Ok(Self(mu))
        } else {
            Err(Error::InvalidInput(format!("Pauli label {mu} not in 0..=3")))
        }
    }

    pub fn index(self) -> usize {
        self.0 as usize
    }

    pub fn matrix(self) -> ComplexMatrix {
        pauli(self.index())
    }
}

impl TryFrom<u8> for PauliLabel {
    type Error = Error;

    fn try_from(mu: u8) -> Result<Self> {
        Self::new(mu)
    }
}

impl From<PauliLabel> for u8 {
    fn from(l: PauliLabel) -> u8 {
        l.0
    }
}

impl fmt::Display for PauliLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(["I", "X", "Y", "Z"][self.index()])
    }
}

/// White-noise fraction `p` in `[0, 1]`.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Serialize, Deserialize)]
#[serde(try_from = "f64", into = "f64")]
pub struct NoiseLevel(f64);

impl NoiseLevel {
    pub fn new(p: f64) -> Result<Self> {
        if (0.0..=1.0).contains(&p) {
            Ok(Self(p))
        } else {
            Err(Error::InvalidInput(format!("noise level {p} not in [0, 1]")))
        }
    }

    pub fn value(self) -> f64 {
        self.0
    }
}

impl TryFrom<f64> for NoiseLevel {
    type Error = Error;

    fn try_from(p: f64) -> Result<Self> {
        Self::new(p)
    }
}

impl From<NoiseLevel> for f64 {
    fn from(p: NoiseLevel) -> f64 {
        p.0
    }
}

/// Unit-norm state vector on `n` qubits.
#[derive(Debug, Clone, PartialEq)]
pub struct PureState {
    n_qubits: usize,
    amplitudes: Vec<Complex64>,
}

impl PureState {
    pub fn new(amplitudes: Vec<Complex64>) -> Result<Self> {
        if !amplitudes.len().is_power_of_two() {
            return Err(Error::Dimension(format!(
                "{} amplitudes is not a power of two",
                amplitudes.len()
            )));
        }
        let norm: f64 = amplitudes.iter().map(|a| a.norm_sqr()).sum();
        if (norm - 1.0).abs() > 1e-12 {
            return Err(Error::InvalidInput(format!("state norm² is {norm}")));
        }
        Ok(Self {
            n_qubits: amplitudes.len().trailing_zeros() as usize,
            amplitudes,
        })
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amplitudes
    }

    pub fn inner(&self, other: &Self) -> Complex64 {
        self.amplitudes
            .iter()
            .zip(&other.amplitudes)
            .map(|(a, b)| a.conj() * b)
            .sum()
    }

    pub fn projector(&self) -> ComplexMatrix {
        ComplexMatrix::outer(&self.amplitudes)
    }

    pub fn density(&self) -> DensityMatrix {
        DensityMatrix::new(self.projector()).expect("unit vectors give valid projectors")
    }
}

/// Bell state `(σ^μ ⊗ I)|φ⁺⟩`.
///
/// μ=0 → φ⁺ = (|00⟩+|11⟩)/√2, μ=1 → ψ⁺ = (|01⟩+|10⟩)/√2,
/// μ=2 → (|10⟩−|01⟩)/√2 (the global factor `i` from Y is dropped, so the
/// amplitudes are (0, −1/√2, 1/√2, 0)), μ=3 → φ⁻ = (|00⟩−|11⟩)/√2.
pub fn bell_state(mu: PauliLabel) -> PureState {
    let s = Complex64::new(std::f64::consts::FRAC_1_SQRT_2, 0.0);
    let amplitudes = match mu.index() {
        0 => vec![s, ZERO, ZERO, s],
        1 => vec![ZERO, s, s, ZERO],
        2 => vec![ZERO, -s, s, ZERO],
        3 => vec![s, ZERO, ZERO, -s],
        _ => unreachable!(),
    };
    PureState::new(amplitudes).expect("Bell states are normalized")
}

pub fn bell_projector(mu: PauliLabel) -> ComplexMatrix {
    bell_state(mu).projector()
}

/// `ρ_S = ¼ Σ_μ |Ψ^μ⟩⟨Ψ^μ|_AB ⊗ |Ψ^μ⟩⟨Ψ^μ|_CD`
pub fn smolin() -> DensityMatrix {
    let mut m = ComplexMatrix::zeros(16);
    for mu in PauliLabel::ALL {
        let b = bell_projector(mu);
        m.add_scaled(0.25, &tensor(&b, &b));
    }
    DensityMatrix::new(m).expect("Smolin state is a valid state")
}

/// `(1-p) ρ_S + p I/16`
pub fn noisy_smolin(p: NoiseLevel) -> DensityMatrix {
    smolin()
        .mix(1.0 - p.value(), &DensityMatrix::maximally_mixed(4))
        .expect("same dimension")
}

/// `v |Ψ^μ⟩⟨Ψ^μ| + (1-v) I/4`
pub fn werner_state(v: f64, mu: PauliLabel) -> Result<DensityMatrix> {
    if !(0.0..=1.0).contains(&v) {
        return Err(Error::InvalidInput(format!("Werner weight {v} not in [0, 1]")));
    }
    bell_state(mu)
        .density()
        .mix(v, &DensityMatrix::maximally_mixed(2))
}

/// Draws the rotations applied to parties A and C for one event.
///
/// With probability `1-p` one uniform label is applied to both pairs
/// (correlated twirl); otherwise the two labels are independent.
pub fn twirl_sample<R: Rng + ?Sized>(p: NoiseLevel, rng: &mut R) -> (PauliLabel, PauliLabel) {
    let uncorrelated = rng.random_bool(p.value());
    let first = PauliLabel(rng.random_range(0..4));
    let second = if uncorrelated {
        PauliLabel(rng.random_range(0..4))
    } else {
        first
    };
    (first, second)
}

/// Probability of the label pair `(μ1, μ2)` under [`twirl_sample`].
pub fn twirl_weight(p: NoiseLevel, mu1: PauliLabel, mu2: PauliLabel) -> f64 {
    let correlated = if mu1 == mu2 { (1.0 - p.value()) / 4.0 } else { 0.0 };
    correlated + p.value() / 16.0
}

fn local_pauli_operator(n_qubits: usize, assignments: &[(usize, PauliLabel)]) -> Result<ComplexMatrix> {
    let mut labels = vec![PauliLabel::I; n_qubits];
    let mut used = vec![false; n_qubits];
    for &(q, mu) in assignments {
        if q >= n_qubits {
            return Err(Error::InvalidInput(format!(
                "qubit {q} out of range for {n_qubits} qubits"
            )));
        }
        if used[q] {
            return Err(Error::InvalidInput(format!("qubit {q} assigned twice")));
        }
        used[q] = true;
        labels[q] = mu;
    }
    let factors: Vec<ComplexMatrix> = labels.iter().map(|l| l.matrix()).collect();
    Ok(tensor_all(&factors))
}

/// Conjugates `state` by the tensor product of the given single-qubit Paulis.
pub fn apply_local_pauli(state: &DensityMatrix, assignments: &[(usize, PauliLabel)]) -> Result<DensityMatrix> {
    let u = local_pauli_operator(state.n_qubits(), assignments)?;
    // Paulis are Hermitian, so U† = U
    DensityMatrix::normalized(u.matmul(state.matrix()).matmul(&u))
}

/// Ensemble average of the twirl applied to two pair sources: source 1 feeds
/// parties A,B and source 2 feeds C,D; rotations act on A and C.
pub fn twirled_pair_state(p: NoiseLevel, source_ab: &DensityMatrix, source_cd: &DensityMatrix) -> Result<DensityMatrix> {
    for s in [source_ab, source_cd] {
        if s.n_qubits() != 2 {
            return Err(Error::Dimension("pair sources must be two-qubit states".into()));
        }
    }
    let rotated = |src: &DensityMatrix| -> Vec<DensityMatrix> {
        PauliLabel::ALL
            .iter()
            .map(|&mu| apply_local_pauli(src, &[(0, mu)]).expect("qubit 0 exists"))
            .collect()
    };
    let ab = rotated(source_ab);
    let cd = rotated(source_cd);
    let mut m = ComplexMatrix::zeros(16);
    for mu1 in PauliLabel::ALL {
        for mu2 in PauliLabel::ALL {
            let w = twirl_weight(p, mu1, mu2);
            if w > 0.0 {
                m.add_scaled(w, &tensor(ab[mu1.index()].matrix(), cd[mu2.index()].matrix()));
            }
        }
    }
    DensityMatrix::normalized(m)
}

/// Empirical twirl mixture of `events` sampled events on ideal |φ⁺⟩ pairs.
pub fn sample_twirled_smolin<R: Rng + ?Sized>(p: NoiseLevel, events: usize, rng: &mut R) -> Result<DensityMatrix> {
    if events == 0 {
        return Err(Error::InvalidInput("need at least one event".into()));
    }
    let mut tally = [[0usize; 4]; 4];
    for _ in 0..events {
        let (a, c) = twirl_sample(p, rng);
        tally[a.index()][c.index()] += 1;
    }
    let base = bell_state(PauliLabel::I).density();
    let pair = tensor(base.matrix(), base.matrix());
    let start = DensityMatrix::new(pair)?;
    let mut m = ComplexMatrix::zeros(16);
    for mu1 in PauliLabel::ALL {
        for mu2 in PauliLabel::ALL {
            let n = tally[mu1.index()][mu2.index()];
            if n > 0 {
                let rotated = apply_local_pauli(&start, &[(0, mu1), (2, mu2)])?;
                m.add_scaled(n as f64 / events as f64, rotated.matrix());
            }
        }
    }
    DensityMatrix::normalized(m)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SourceKind {
    Ideal,
    Werner,
    Colored,
}

/// Imperfect |φ⁺⟩ pair source, specified by its fidelity with |φ⁺⟩ and its tangle.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SourceModel {
    pub kind: SourceKind,
    #[serde(default = "one")]
    pub fidelity: f64,
    #[serde(default)]
    pub tangle: Option<f64>,
}

fn one() -> f64 {
    1.0
}

impl SourceModel {
    pub fn ideal() -> Self {
        Self {
            kind: SourceKind::Ideal,
            fidelity: 1.0,
            tangle: Some(1.0),
        }
    }

    pub fn werner(fidelity: f64) -> Self {
        Self {
            kind: SourceKind::Werner,
            fidelity,
            tangle: None,
        }
    }

    pub fn colored(fidelity: f64, tangle: f64) -> Self {
        Self {
            kind: SourceKind::Colored,
            fidelity,
            tangle: Some(tangle),
        }
    }

    /// First laboratory source, both modulators off: F = 95.77 %, tangle 0.8709.
    pub fn measured_source_1() -> Self {
        Self::colored(0.9577, 0.8709)
    }

    /// Second laboratory source, both modulators off: F = 96.34 %, tangle 0.8685.
    pub fn measured_source_2() -> Self {
        Self::colored(0.9634, 0.8685)
    }

    pub fn validate(&self) -> Result<()> {
        let in_unit = |x: f64| (0.0..=1.0).contains(&x);
        if !in_unit(self.fidelity) || !self.tangle.is_none_or(in_unit) {
            return Err(Error::InvalidInput(format!(
                "source targets out of range: {self:?}"
            )));
        }
        if self.kind == SourceKind::Ideal
            && (self.fidelity != 1.0 || self.tangle.is_some_and(|t| t != 1.0))
        {
            return Err(Error::InvalidInput(
                "an ideal source has fidelity 1 and tangle 1".into(),
            ));
        }
        if self.kind == SourceKind::Colored && self.tangle.is_none() {
            return Err(Error::InvalidInput("colored source needs a tangle target".into()));
        }
        Ok(())
    }
}

/// Tolerance for matching a requested tangle.
pub const SOURCE_TANGLE_TOL: f64 = 1e-3;

/// `a|φ⁺⟩⟨φ⁺| + b|01⟩⟨01| + w I/4` with `a = F − w/4`, `b = 1 − a − w`.
///
/// Fidelity with |φ⁺⟩ is `F` for every admissible `w ∈ [0, 4(1−F)/3]`.
/// The unbalanced |01⟩ population lifts the tangle above the Werner value
/// `(2F−1)²` (reached at the upper end of `w`) up to `F²` at `w = 0`.
pub fn colored_source(fidelity: f64, white_weight: f64) -> Result<DensityMatrix> {
    let a = fidelity - white_weight / 4.0;
    let b = 1.0 - a - white_weight;
    if a < -1e-15 || b < -1e-15 || white_weight < 0.0 {
        return Err(Error::InfeasibleSource(format!(
            "weights a={a}, b={b}, w={white_weight} are not a valid mixture"
        )));
    }
    let mut m = bell_projector(PauliLabel::I).scale(a);
    let mut e01 = ComplexMatrix::zeros(4);
    e01[(1, 1)] = Complex64::new(1.0, 0.0);
    m.add_scaled(b.max(0.0), &e01);
    m.add_scaled(white_weight / 4.0, &ComplexMatrix::identity(4));
    DensityMatrix::normalized(m)
}

/// Two-qubit state produced by `model`.
pub fn imperfect_source(model: &SourceModel) -> Result<DensityMatrix> {
    model.validate()?;
    match model.kind {
        SourceKind::Ideal => Ok(bell_state(PauliLabel::I).density()),
        SourceKind::Werner => {
            let v = (4.0 * model.fidelity - 1.0) / 3.0;
            if !(0.0..=1.0).contains(&v) {
                return Err(Error::InfeasibleSource(format!(
                    "Werner fidelity must lie in [1/4, 1], got {}",
                    model.fidelity
                )));
            }
            let rho = werner_state(v, PauliLabel::I)?;
            if let Some(t) = model.tangle {
                let achieved = analysis::tangle(&rho)?;
                if (achieved - t).abs() > SOURCE_TANGLE_TOL {
                    return Err(Error::InfeasibleSource(format!(
                        "a Werner source with fidelity {} has tangle {achieved:.4}, not {t}",
                        model.fidelity
                    )));
                }
            }
            Ok(rho)
        }
        SourceKind::Colored => {
            let target = model.tangle.expect("validated");
            fit_colored_source(model.fidelity, target)
        }
    }
}

fn fit_colored_source(fidelity: f64, target_tangle: f64) -> Result<DensityMatrix> {
    let w_max = 4.0 * (1.0 - fidelity) / 3.0;
    let tangle_at = |w: f64| -> Result<f64> { analysis::tangle(&colored_source(fidelity, w)?) };
    let (t_hi, t_lo) = (tangle_at(0.0)?, tangle_at(w_max)?);
    if fidelity < 0.5 || target_tangle > t_hi + SOURCE_TANGLE_TOL || target_tangle < t_lo - SOURCE_TANGLE_TOL {
        return Err(Error::InfeasibleSource(format!(
            "tangle {target_tangle} outside [{t_lo:.4}, {t_hi:.4}] reachable at fidelity {fidelity}"
        )));
    }
    // tangle decreases monotonically in the white-noise weight
    let (mut lo, mut hi) = (0.0, w_max);
    for _ in 0..100 {
        let mid = 0.5 * (lo + hi);
        if tangle_at(mid)? > target_tangle {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    colored_source(fidelity, 0.5 * (lo + hi))
}
