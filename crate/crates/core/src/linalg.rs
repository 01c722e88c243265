//! Dense complex matrix kernel for few-qubit operators.
//!
//! Qubit 0 is the leftmost tensor factor and the most significant bit of a
//! basis index, so `|q0 q1 ... q(n-1)>` maps to index `q0·2^(n-1) + ... + q(n-1)`.

use std::fmt;
use std::ops::{Add, Index, IndexMut, Mul, Sub};

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::{Error, Result};

/// Entrywise tolerance applied to Hermiticity checks before eigensolves.
pub const HERMITIAN_TOL: f64 = 1e-10;

pub const ZERO: Complex64 = Complex64::new(0.0, 0.0);
pub const ONE: Complex64 = Complex64::new(1.0, 0.0);
pub const I: Complex64 = Complex64::new(0.0, 1.0);

/// Square complex matrix, row-major.
#[derive(Clone, PartialEq)]
pub struct ComplexMatrix {
    dim: usize,
    data: Vec<Complex64>,
}

impl ComplexMatrix {
    pub fn zeros(dim: usize) -> Self {
        Self {
            dim,
            data: vec![ZERO; dim * dim],
        }
    }

    pub fn identity(dim: usize) -> Self {
        let mut m = Self::zeros(dim);
        for i in 0..dim {
            m.data[i * dim + i] = ONE;
        }
        m
    }

    pub fn from_fn(dim: usize, mut f: impl FnMut(usize, usize) -> Complex64) -> Self {
        let mut data = Vec::with_capacity(dim * dim);
        for r in 0..dim {
            for c in 0..dim {
                data.push(f(r, c));
            }
        }
        Self { dim, data }
    }

    /// Builds a matrix from row-major entries; `data.len()` must be a square.
    pub fn from_row_major(dim: usize, data: Vec<Complex64>) -> Result<Self> {
        if data.len() != dim * dim {
            return Err(Error::Dimension(format!(
                "expected {} entries for a {dim}x{dim} matrix, got {}",
                dim * dim,
                data.len()
            )));
        }
        Ok(Self { dim, data })
    }

    pub fn from_real_rows(rows: &[&[f64]]) -> Self {
        let dim = rows.len();
        Self::from_fn(dim, |r, c| Complex64::new(rows[r][c], 0.0))
    }

    pub fn diagonal(values: &[f64]) -> Self {
        let mut m = Self::zeros(values.len());
        for (i, &v) in values.iter().enumerate() {
            m[(i, i)] = Complex64::new(v, 0.0);
        }
        m
    }

    /// `|v><v|`
    pub fn outer(v: &[Complex64]) -> Self {
        Self::from_fn(v.len(), |r, c| v[r] * v[c].conj())
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Number of qubits when the dimension is a power of two.
    pub fn n_qubits(&self) -> Option<usize> {
        if self.dim.is_power_of_two() {
            Some(self.dim.trailing_zeros() as usize)
        } else {
            None
        }
    }

    pub(crate) fn require_qubits(&self) -> Result<usize> {
        self.n_qubits().ok_or_else(|| {
            Error::Dimension(format!("dimension {} is not a power of two", self.dim))
        })
    }

    pub fn as_slice(&self) -> &[Complex64] {
        &self.data
    }

    pub fn as_mut_slice(&mut self) -> &mut [Complex64] {
        &mut self.data
    }

    pub fn trace(&self) -> Complex64 {
        (0..self.dim).map(|i| self.data[i * self.dim + i]).sum()
    }

    pub fn adjoint(&self) -> Self {
        Self::from_fn(self.dim, |r, c| self[(c, r)].conj())
    }

    pub fn transpose(&self) -> Self {
        Self::from_fn(self.dim, |r, c| self[(c, r)])
    }

    pub fn conj(&self) -> Self {
        Self {
            dim: self.dim,
            data: self.data.iter().map(|z| z.conj()).collect(),
        }
    }

    pub fn scale(&self, s: f64) -> Self {
        Self {
            dim: self.dim,
            data: self.data.iter().map(|z| z * s).collect(),
        }
    }

    pub fn scale_complex(&self, s: Complex64) -> Self {
        Self {
            dim: self.dim,
            data: self.data.iter().map(|z| z * s).collect(),
        }
    }

    /// `self += s * other`
    pub fn add_scaled(&mut self, s: f64, other: &Self) {
        assert_eq!(self.dim, other.dim, "dimension mismatch");
        for (a, b) in self.data.iter_mut().zip(&other.data) {
            *a += b * s;
        }
    }

    pub fn matmul(&self, other: &Self) -> Self {
        assert_eq!(self.dim, other.dim, "dimension mismatch");
        let n = self.dim;
        let mut out = vec![ZERO; n * n];
        for r in 0..n {
            let row = &self.data[r * n..(r + 1) * n];
            let out_row = &mut out[r * n..(r + 1) * n];
            for (k, &a) in row.iter().enumerate() {
                if a == ZERO {
                    continue;
                }
                let other_row = &other.data[k * n..(k + 1) * n];
                for (o, &b) in out_row.iter_mut().zip(other_row) {
                    *o += a * b;
                }
            }
        }
        Self { dim: n, data: out }
    }

    pub fn matvec(&self, v: &[Complex64]) -> Vec<Complex64> {
        let n = self.dim;
        (0..n)
            .map(|r| {
                self.data[r * n..(r + 1) * n]
                    .iter()
                    .zip(v)
                    .map(|(a, b)| a * b)
                    .sum()
            })
            .collect()
    }

    /// `<v|M|v>`
    pub fn expectation(&self, v: &[Complex64]) -> Complex64 {
        self.matvec(v)
            .iter()
            .zip(v)
            .map(|(mv, vi)| vi.conj() * mv)
            .sum()
    }

    /// `Tr(A† B)`
    pub fn hs_inner(&self, other: &Self) -> Complex64 {
        assert_eq!(self.dim, other.dim, "dimension mismatch");
        self.data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| a.conj() * b)
            .sum()
    }

    /// Hilbert-Schmidt norm `sqrt(Tr(X† X))`.
    pub fn hs_norm(&self) -> f64 {
        self.data.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        assert_eq!(self.dim, other.dim, "dimension mismatch");
        self.data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }

    /// Largest entrywise deviation `|M - M†|`.
    pub fn hermiticity_defect(&self) -> f64 {
        let n = self.dim;
        let mut worst: f64 = 0.0;
        for r in 0..n {
            for c in r..n {
                worst = worst.max((self[(r, c)] - self[(c, r)].conj()).norm());
            }
        }
        worst
    }

    pub fn is_hermitian(&self, tol: f64) -> bool {
        self.hermiticity_defect() <= tol
    }

    /// `(M + M†) / 2`
    pub fn hermitian_part(&self) -> Self {
        Self::from_fn(self.dim, |r, c| (self[(r, c)] + self[(c, r)].conj()) * 0.5)
    }

    pub(crate) fn to_nalgebra(&self) -> DMatrix<Complex64> {
        DMatrix::from_row_slice(self.dim, self.dim, &self.data)
    }
}

impl Index<(usize, usize)> for ComplexMatrix {
    type Output = Complex64;

    fn index(&self, (r, c): (usize, usize)) -> &Complex64 {
        &self.data[r * self.dim + c]
    }
}

impl IndexMut<(usize, usize)> for ComplexMatrix {
    fn index_mut(&mut self, (r, c): (usize, usize)) -> &mut Complex64 {
        &mut self.data[r * self.dim + c]
    }
}

impl Add for &ComplexMatrix {
    type Output = ComplexMatrix;

    fn add(self, rhs: &ComplexMatrix) -> ComplexMatrix {
        assert_eq!(self.dim, rhs.dim, "dimension mismatch");
        ComplexMatrix {
            dim: self.dim,
            data: self.data.iter().zip(&rhs.data).map(|(a, b)| a + b).collect(),
        }
    }
}

impl Sub for &ComplexMatrix {
    type Output = ComplexMatrix;

    fn sub(self, rhs: &ComplexMatrix) -> ComplexMatrix {
        assert_eq!(self.dim, rhs.dim, "dimension mismatch");
        ComplexMatrix {
            dim: self.dim,
            data: self.data.iter().zip(&rhs.data).map(|(a, b)| a - b).collect(),
        }
    }
}

impl Mul for &ComplexMatrix {
    type Output = ComplexMatrix;

    fn mul(self, rhs: &ComplexMatrix) -> ComplexMatrix {
        self.matmul(rhs)
    }
}

impl fmt::Debug for ComplexMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "ComplexMatrix({}x{}) [", self.dim, self.dim)?;
        for r in 0..self.dim {
            write!(f, "  ")?;
            for c in 0..self.dim {
                let z = self[(r, c)];
                write!(f, "{:+.4}{:+.4}i ", z.re, z.im)?;
            }
            writeln!(f)?;
        }
        write!(f, "]")
    }
}

/// The single-qubit Pauli matrices indexed 0..=3 as I, X, Y, Z.
pub fn pauli(index: usize) -> ComplexMatrix {
    match index {
        0 => ComplexMatrix::identity(2),
        1 => ComplexMatrix::from_real_rows(&[&[0.0, 1.0], &[1.0, 0.0]]),
        2 => ComplexMatrix::from_fn(2, |r, c| match (r, c) {
            (0, 1) => -I,
            (1, 0) => I,
            _ => ZERO,
        }),
        3 => ComplexMatrix::from_real_rows(&[&[1.0, 0.0], &[0.0, -1.0]]),
        _ => panic!("Pauli index {index} out of range"),
    }
}

/// Tensor product of a list of factors, leftmost first.
pub fn tensor_all<'a>(factors: impl IntoIterator<Item = &'a ComplexMatrix>) -> ComplexMatrix {
    factors
        .into_iter()
        .fold(ComplexMatrix::identity(1), |acc, m| tensor(&acc, m))
}

/// Ordered set of distinct qubit positions within an `n`-qubit register.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct QubitSubset {
    n_qubits: usize,
    indices: Vec<usize>,
}

impl QubitSubset {
    pub fn new(n_qubits: usize, indices: impl IntoIterator<Item = usize>) -> Result<Self> {
        let mut indices: Vec<usize> = indices.into_iter().collect();
        indices.sort_unstable();
        for w in indices.windows(2) {
            if w[0] == w[1] {
                return Err(Error::InvalidInput(format!("qubit {} listed twice", w[0])));
            }
        }
        if let Some(&q) = indices.iter().find(|&&q| q >= n_qubits) {
            return Err(Error::InvalidInput(format!(
                "qubit {q} out of range for {n_qubits} qubits"
            )));
        }
        Ok(Self { n_qubits, indices })
    }

    pub fn all(n_qubits: usize) -> Self {
        Self {
            n_qubits,
            indices: (0..n_qubits).collect(),
        }
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn indices(&self) -> &[usize] {
        &self.indices
    }

    pub fn len(&self) -> usize {
        self.indices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.indices.is_empty()
    }

    pub fn contains(&self, q: usize) -> bool {
        self.indices.binary_search(&q).is_ok()
    }

    pub fn complement(&self) -> Self {
        Self {
            n_qubits: self.n_qubits,
            indices: (0..self.n_qubits).filter(|&q| !self.contains(q)).collect(),
        }
    }

    /// Basis-index bit mask of the subset's qubits.
    fn mask(&self) -> usize {
        self.indices
            .iter()
            .fold(0, |m, &q| m | (1 << (self.n_qubits - 1 - q)))
    }

    fn check_against(&self, m: &ComplexMatrix) -> Result<usize> {
        let n = m.require_qubits()?;
        if n != self.n_qubits {
            return Err(Error::Dimension(format!(
                "subset defined over {} qubits, matrix has {n}",
                self.n_qubits
            )));
        }
        Ok(n)
    }
}

/// Kronecker product; `a`'s qubits come first.
pub fn tensor(a: &ComplexMatrix, b: &ComplexMatrix) -> ComplexMatrix {
    let (da, db) = (a.dim(), b.dim());
    let dim = da * db;
    ComplexMatrix::from_fn(dim, |r, c| a[(r / db, c / db)] * b[(r % db, c % db)])
}

/// Moves qubit `i` to position `perm[i]`.
pub fn permute_qubits(m: &ComplexMatrix, perm: &[usize]) -> Result<ComplexMatrix> {
    let n = m.require_qubits()?;
    if perm.len() != n {
        return Err(Error::InvalidInput(format!(
            "permutation has {} entries for {n} qubits",
            perm.len()
        )));
    }
    let mut seen = vec![false; n];
    for &p in perm {
        if p >= n || seen[p] {
            return Err(Error::InvalidInput(format!(
                "{perm:?} is not a permutation of 0..{n}"
            )));
        }
        seen[p] = true;
    }
    let relabel = |x: usize| {
        (0..n).fold(0, |acc, q| {
            let bit = (x >> (n - 1 - q)) & 1;
            acc | (bit << (n - 1 - perm[q]))
        })
    };
    let map: Vec<usize> = (0..m.dim()).map(relabel).collect();
    let mut out = ComplexMatrix::zeros(m.dim());
    for r in 0..m.dim() {
        for c in 0..m.dim() {
            out[(map[r], map[c])] = m[(r, c)];
        }
    }
    Ok(out)
}

/// Transposes the tensor factors listed in `subset`.
pub fn partial_transpose(m: &ComplexMatrix, subset: &QubitSubset) -> Result<ComplexMatrix> {
    subset.check_against(m)?;
    let mask = subset.mask();
    let mut out = ComplexMatrix::zeros(m.dim());
    for r in 0..m.dim() {
        for c in 0..m.dim() {
            // swap the subset bits between row and column index
            let swapped = (r ^ c) & mask;
            out[(r ^ swapped, c ^ swapped)] = m[(r, c)];
        }
    }
    Ok(out)
}

/// Traces out every qubit not in `keep`; the kept qubits stay in ascending order.
pub fn partial_trace(m: &ComplexMatrix, keep: &QubitSubset) -> Result<ComplexMatrix> {
    let n = keep.check_against(m)?;
    let kept = keep.indices();
    let traced = keep.complement();
    let traced = traced.indices();
    let dk = 1usize << kept.len();
    let dt = 1usize << traced.len();
    let compose = |k: usize, t: usize| {
        let mut idx = 0;
        for (pos, &q) in kept.iter().enumerate() {
            idx |= ((k >> (kept.len() - 1 - pos)) & 1) << (n - 1 - q);
        }
        for (pos, &q) in traced.iter().enumerate() {
            idx |= ((t >> (traced.len() - 1 - pos)) & 1) << (n - 1 - q);
        }
        idx
    };
    let mut out = ComplexMatrix::zeros(dk);
    for r in 0..dk {
        for c in 0..dk {
            out[(r, c)] = (0..dt).map(|t| m[(compose(r, t), compose(c, t))]).sum();
        }
    }
    Ok(out)
}

/// Eigenvalues and column eigenvectors of a Hermitian matrix, ascending.
#[derive(Debug, Clone)]
pub struct HermitianEigen {
    pub values: Vec<f64>,
    /// `vectors[k]` is the normalized eigenvector for `values[k]`.
    pub vectors: Vec<Vec<Complex64>>,
}

impl HermitianEigen {
    /// Reassembles `Σ f(λ_k) |v_k><v_k|`.
    pub fn map_spectrum(&self, f: impl Fn(f64) -> f64) -> ComplexMatrix {
        let dim = self.values.len();
        let mut out = ComplexMatrix::zeros(dim);
        for (lambda, v) in self.values.iter().zip(&self.vectors) {
            let w = f(*lambda);
            if w == 0.0 {
                continue;
            }
            for r in 0..dim {
                let vr = v[r] * w;
                for c in 0..dim {
                    out[(r, c)] += vr * v[c].conj();
                }
            }
        }
        out
    }
}

fn symmetrized(m: &ComplexMatrix) -> Result<ComplexMatrix> {
    let defect = m.hermiticity_defect();
    if defect > HERMITIAN_TOL {
        return Err(Error::NotHermitian(defect));
    }
    Ok(m.hermitian_part())
}

/// Full Hermitian eigendecomposition, eigenvalues ascending.
pub fn hermitian_eigen(m: &ComplexMatrix) -> Result<HermitianEigen> {
    let h = symmetrized(m)?;
    let eig = h.to_nalgebra().symmetric_eigen();
    let mut order: Vec<usize> = (0..h.dim()).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let values = order.iter().map(|&k| eig.eigenvalues[k]).collect();
    let vectors = order
        .iter()
        .map(|&k| eig.eigenvectors.column(k).iter().copied().collect())
        .collect();
    Ok(HermitianEigen { values, vectors })
}

/// Real eigenvalues of a Hermitian matrix in ascending order.
pub fn hermitian_eigenvalues(m: &ComplexMatrix) -> Result<Vec<f64>> {
    let h = symmetrized(m)?;
    let mut values: Vec<f64> = h.to_nalgebra().symmetric_eigenvalues().iter().copied().collect();
    values.sort_by(f64::total_cmp);
    Ok(values)
}
