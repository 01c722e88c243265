//! Independent reference implementations used by the integration tests.
//!
//! Nothing here calls the library's eigensolver, partial transpose or tangle;
//! the oracles work from explicit index loops and characteristic polynomials.
#![allow(dead_code)]

use boundent::{ComplexMatrix, DensityMatrix};
use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;

pub fn gaussian_complex<R: Rng + ?Sized>(rng: &mut R) -> Complex64 {
    Complex64::new(rng.sample(StandardNormal), rng.sample(StandardNormal))
}

/// Ginibre-distributed mixed state `G G† / Tr(G G†)`.
pub fn random_density<R: Rng + ?Sized>(n_qubits: usize, rng: &mut R) -> DensityMatrix {
    let d = 1 << n_qubits;
    let g = ComplexMatrix::from_fn(d, |_, _| gaussian_complex(rng));
    DensityMatrix::normalized(g.matmul(&g.adjoint())).unwrap()
}

pub fn random_hermitian<R: Rng + ?Sized>(dim: usize, rng: &mut R) -> ComplexMatrix {
    let g = ComplexMatrix::from_fn(dim, |_, _| gaussian_complex(rng));
    ComplexMatrix::from_fn(dim, |r, c| (g[(r, c)] + g[(c, r)].conj()) * 0.5)
}

/// Coefficients `c_0..c_n` (highest degree first, `c_0 = 1`) of `det(λI − A)`
/// by the Faddeev–LeVerrier recursion.
pub fn characteristic_polynomial(a: &ComplexMatrix) -> Vec<Complex64> {
    let n = a.dim();
    let mut coeffs = vec![Complex64::new(1.0, 0.0)];
    let mut m = ComplexMatrix::zeros(n);
    for k in 1..=n {
        // M_k = A M_{k−1} + c_{k−1} I
        m = a.matmul(&m);
        for i in 0..n {
            m[(i, i)] += coeffs[k - 1];
        }
        let ck = -a.matmul(&m).trace() / k as f64;
        coeffs.push(ck);
    }
    coeffs
}

fn eval(coeffs: &[Complex64], z: Complex64) -> Complex64 {
    coeffs.iter().fold(Complex64::new(0.0, 0.0), |acc, &c| acc * z + c)
}

fn eval_derivative(coeffs: &[Complex64], z: Complex64) -> Complex64 {
    let n = coeffs.len() - 1;
    coeffs[..n]
        .iter()
        .enumerate()
        .fold(Complex64::new(0.0, 0.0), |acc, (i, &c)| acc * z + c * (n - i) as f64)
}

/// Roots of a monic polynomial by Durand–Kerner, then Newton polishing.
pub fn polynomial_roots(coeffs: &[Complex64]) -> Vec<Complex64> {
    let n = coeffs.len() - 1;
    let scale = 1.0 + coeffs.iter().skip(1).map(|c| c.norm()).fold(0.0, f64::max);
    let seed = Complex64::new(0.4, 0.9);
    let mut z: Vec<Complex64> = (0..n).map(|k| seed.powu(k as u32) * scale).collect();
    for _ in 0..2000 {
        let mut delta = 0.0f64;
        for i in 0..n {
            let mut denom = Complex64::new(1.0, 0.0);
            for j in 0..n {
                if i != j {
                    denom *= z[i] - z[j];
                }
            }
            let step = eval(coeffs, z[i]) / denom;
            z[i] -= step;
            delta = delta.max(step.norm());
        }
        if delta < 1e-15 * scale {
            break;
        }
    }
    for zi in z.iter_mut() {
        for _ in 0..5 {
            let d = eval_derivative(coeffs, *zi);
            if d.norm() == 0.0 {
                break;
            }
            *zi -= eval(coeffs, *zi) / d;
        }
    }
    z
}

/// Ascending real parts of the eigenvalues via the characteristic polynomial.
pub fn charpoly_eigenvalues(a: &ComplexMatrix) -> Vec<f64> {
    let mut values: Vec<f64> = polynomial_roots(&characteristic_polynomial(a))
        .into_iter()
        .map(|z| z.re)
        .collect();
    values.sort_by(f64::total_cmp);
    values
}

/// Eigenvalues of a Hermitian matrix by cyclic Jacobi rotations on the real
/// embedding `[[Re, −Im], [Im, Re]]`, whose spectrum is each eigenvalue twice.
/// Robust for degenerate spectra, where polynomial roots lose precision.
pub fn jacobi_eigenvalues(h: &ComplexMatrix) -> Vec<f64> {
    let n = h.dim();
    let m = 2 * n;
    let mut a = vec![vec![0.0; m]; m];
    for r in 0..n {
        for c in 0..n {
            let z = h[(r, c)];
            a[r][c] = z.re;
            a[r + n][c + n] = z.re;
            a[r][c + n] = -z.im;
            a[r + n][c] = z.im;
        }
    }
    for _ in 0..100 {
        let off: f64 = (0..m)
            .flat_map(|i| (0..m).filter(move |&j| j != i).map(move |j| (i, j)))
            .map(|(i, j)| a[i][j] * a[i][j])
            .sum();
        if off < 1e-30 {
            break;
        }
        for p in 0..m {
            for q in p + 1..m {
                if a[p][q].abs() < 1e-300 {
                    continue;
                }
                let theta = (a[q][q] - a[p][p]) / (2.0 * a[p][q]);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let t = if theta == 0.0 { 1.0 } else { t };
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                for k in 0..m {
                    let (akp, akq) = (a[k][p], a[k][q]);
                    a[k][p] = c * akp - s * akq;
                    a[k][q] = s * akp + c * akq;
                }
                for k in 0..m {
                    let (apk, aqk) = (a[p][k], a[q][k]);
                    a[p][k] = c * apk - s * aqk;
                    a[q][k] = s * apk + c * aqk;
                }
            }
        }
    }
    let mut diag: Vec<f64> = (0..m).map(|i| a[i][i]).collect();
    diag.sort_by(f64::total_cmp);
    diag.into_iter().step_by(2).collect()
}

/// Wootters tangle from the non-Hermitian product `ρ (σ_y⊗σ_y) ρ* (σ_y⊗σ_y)`.
pub fn tangle_oracle(rho: &DensityMatrix) -> f64 {
    let m = rho.matrix();
    // σ_y⊗σ_y is the anti-diagonal (−1, 1, 1, −1)
    let yy = [-1.0, 1.0, 1.0, -1.0];
    let flipped = ComplexMatrix::from_fn(4, |i, j| yy[i] * yy[3 - j] * m[(3 - i, 3 - j)].conj());
    let product = m.matmul(&flipped);
    let mut lambdas: Vec<f64> = polynomial_roots(&characteristic_polynomial(&product))
        .into_iter()
        .map(|z| z.re.max(0.0).sqrt())
        .collect();
    lambdas.sort_by(|a, b| b.total_cmp(a));
    let c = (lambdas[0] - lambdas[1] - lambdas[2] - lambdas[3]).max(0.0);
    c * c
}

/// Partial transpose by explicit index arithmetic: qubit `q` is bit `n−1−q`.
pub fn partial_transpose_oracle(m: &ComplexMatrix, qubits: &[usize]) -> ComplexMatrix {
    let d = m.dim();
    let n = d.trailing_zeros() as usize;
    let mut out = ComplexMatrix::zeros(d);
    for r in 0..d {
        for c in 0..d {
            let (mut r2, mut c2) = (r, c);
            for &q in qubits {
                let bit = 1 << (n - 1 - q);
                let (rb, cb) = (r & bit, c & bit);
                r2 = (r2 & !bit) | cb;
                c2 = (c2 & !bit) | rb;
            }
            out[(r2, c2)] = m[(r, c)];
        }
    }
    out
}

/// Fitted slope of `ln y` against `ln x`.
pub fn log_log_slope(xs: &[f64], ys: &[f64]) -> f64 {
    let lx: Vec<f64> = xs.iter().map(|x| x.ln()).collect();
    let ly: Vec<f64> = ys.iter().map(|y| y.ln()).collect();
    let n = lx.len() as f64;
    let mx = lx.iter().sum::<f64>() / n;
    let my = ly.iter().sum::<f64>() / n;
    let sxy: f64 = lx.iter().zip(&ly).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = lx.iter().map(|x| (x - mx).powi(2)).sum();
    sxy / sxx
}
