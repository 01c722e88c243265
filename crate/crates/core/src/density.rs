//! Density matrices and their JSON file format.

use std::fs;
use std::path::Path;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{self, ComplexMatrix};

/// Tolerance on `|Tr ρ - 1|` and on Hermiticity when validating a state.
pub const STATE_TOL: f64 = 1e-10;

/// Hermitian, unit-trace operator on `n` qubits.
///
/// Positivity is not enforced on construction: reconstructions are PSD only
/// up to rounding and linear estimates may not be PSD at all. Use
/// [`DensityMatrix::min_eigenvalue`] when it matters.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrix {
    n_qubits: usize,
    matrix: ComplexMatrix,
}

impl DensityMatrix {
    pub fn new(matrix: ComplexMatrix) -> Result<Self> {
        let n_qubits = matrix.require_qubits()?;
        let defect = matrix.hermiticity_defect();
        if defect > STATE_TOL {
            return Err(Error::NotHermitian(defect));
        }
        let tr = matrix.trace();
        if (tr - Complex64::new(1.0, 0.0)).norm() > STATE_TOL {
            return Err(Error::NotDensityMatrix(format!(
                "trace is {:.12}{:+.3e}i",
                tr.re, tr.im
            )));
        }
        Ok(Self { n_qubits, matrix })
    }

    /// Symmetrizes and rescales to unit trace; for outputs of iterative updates.
    pub fn normalized(matrix: ComplexMatrix) -> Result<Self> {
        let h = matrix.hermitian_part();
        let tr = h.trace().re;
        if !(tr.is_finite() && tr > 0.0) {
            return Err(Error::NotDensityMatrix(format!("trace {tr} cannot be normalized")));
        }
        Self::new(h.scale(1.0 / tr))
    }

    pub fn maximally_mixed(n_qubits: usize) -> Self {
        let dim = 1 << n_qubits;
        Self {
            n_qubits,
            matrix: ComplexMatrix::identity(dim).scale(1.0 / dim as f64),
        }
    }

    pub fn pure(amplitudes: &[Complex64]) -> Result<Self> {
        let norm: f64 = amplitudes.iter().map(|a| a.norm_sqr()).sum();
        if (norm - 1.0).abs() > 1e-12 {
            return Err(Error::NotDensityMatrix(format!("state norm² is {norm}")));
        }
        Self::new(ComplexMatrix::outer(amplitudes))
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn dim(&self) -> usize {
        self.matrix.dim()
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        &self.matrix
    }

    pub fn into_matrix(self) -> ComplexMatrix {
        self.matrix
    }

    pub fn eigenvalues(&self) -> Vec<f64> {
        linalg::hermitian_eigenvalues(&self.matrix).expect("density matrices are Hermitian")
    }

    pub fn min_eigenvalue(&self) -> f64 {
        self.eigenvalues()[0]
    }

    /// `Tr(ρ O)`, real part.
    pub fn expectation(&self, observable: &ComplexMatrix) -> f64 {
        // Tr(ρ O) = Σ ρ_rc O_cr = hs_inner(ρ†, O) with ρ Hermitian
        self.matrix.hs_inner(observable).re
    }

    /// Convex mixture `w·self + (1-w)·other`.
    pub fn mix(&self, w: f64, other: &Self) -> Result<Self> {
        if self.dim() != other.dim() {
            return Err(Error::Dimension(format!(
                "cannot mix {}-dim and {}-dim states",
                self.dim(),
                other.dim()
            )));
        }
        let mut m = self.matrix.scale(w);
        m.add_scaled(1.0 - w, &other.matrix);
        Self::new(m)
    }

    pub fn to_file_format(&self) -> DensityMatrixFile {
        let dim = self.dim();
        let row = |f: fn(&Complex64) -> f64, r: usize| -> Vec<f64> {
            (0..dim).map(|c| f(&self.matrix[(r, c)])).collect()
        };
        DensityMatrixFile {
            n_qubits: self.n_qubits,
            re: (0..dim).map(|r| row(|z| z.re, r)).collect(),
            im: (0..dim).map(|r| row(|z| z.im, r)).collect(),
        }
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(&self.to_file_format())?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let file: DensityMatrixFile = serde_json::from_str(text)?;
        file.into_state()
    }

    pub fn write_json(&self, path: &Path) -> Result<()> {
        fs::write(path, self.to_json()?)?;
        Ok(())
    }

    pub fn read_json(path: &Path) -> Result<Self> {
        Self::from_json(&fs::read_to_string(path)?)
    }
}

/// On-disk layout: `{"n_qubits": n, "re": [[...]], "im": [[...]]}`, row-major.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct DensityMatrixFile {
    pub n_qubits: usize,
    pub re: Vec<Vec<f64>>,
    pub im: Vec<Vec<f64>>,
}

impl DensityMatrixFile {
    pub fn into_state(self) -> Result<DensityMatrix> {
        let dim = 1usize
            .checked_shl(self.n_qubits as u32)
            .filter(|_| self.n_qubits <= 10)
            .ok_or_else(|| Error::Parse(format!("unsupported n_qubits {}", self.n_qubits)))?;
        let shape_ok = |rows: &Vec<Vec<f64>>| rows.len() == dim && rows.iter().all(|r| r.len() == dim);
        if !shape_ok(&self.re) || !shape_ok(&self.im) {
            return Err(Error::Parse(format!(
                "re/im must both be {dim}x{dim} for {} qubits",
                self.n_qubits
            )));
        }
        let data = self
            .re
            .iter()
            .zip(&self.im)
            .flat_map(|(re, im)| re.iter().zip(im).map(|(&a, &b)| Complex64::new(a, b)))
            .collect();
        DensityMatrix::new(ComplexMatrix::from_row_major(dim, data)?)
    }
}
