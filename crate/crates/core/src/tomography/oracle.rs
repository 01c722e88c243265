//! Cross-check reconstruction for one- and two-qubit data.
//!
//! Maximizes the same log-likelihood as the RρR iteration by a different
//! route: `ρ = T†T / Tr(T†T)` with `T` lower triangular (`dim²` real
//! parameters), optimized by BFGS on central finite-difference gradients.
//! Projectors are built as dense matrices from the analyzer kets, and no
//! code is shared with the fixed-point solver beyond the completeness check.

use num_complex::Complex64;

use crate::density::DensityMatrix;
use crate::error::{Error, Result};
use crate::linalg::{tensor_all, ComplexMatrix};

use super::counts::CountTable;
use super::measurement::analyzer_projector;
use super::mle::operator_span_rank;

const FD_STEP: f64 = 1e-6;

struct Problem {
    dim: usize,
    projectors: Vec<ComplexMatrix>,
    weights: Vec<f64>,
}

impl Problem {
    fn state(&self, x: &[f64]) -> ComplexMatrix {
        let d = self.dim;
        let mut t = ComplexMatrix::zeros(d);
        let mut k = 0;
        for i in 0..d {
            t[(i, i)] = Complex64::new(x[k], 0.0);
            k += 1;
            for j in 0..i {
                t[(i, j)] = Complex64::new(x[k], x[k + 1]);
                k += 2;
            }
        }
        let m = t.adjoint().matmul(&t);
        let tr = m.trace().re;
        m.scale(1.0 / tr)
    }

    fn objective(&self, x: &[f64]) -> f64 {
        let rho = self.state(x);
        self.projectors
            .iter()
            .zip(&self.weights)
            .filter(|(_, w)| **w > 0.0)
            .map(|(p, w)| w * rho.hs_inner(p).re.max(1e-300).ln())
            .sum()
    }

    fn gradient(&self, x: &[f64]) -> Vec<f64> {
        let mut xp = x.to_vec();
        (0..x.len())
            .map(|i| {
                xp[i] = x[i] + FD_STEP;
                let up = self.objective(&xp);
                xp[i] = x[i] - FD_STEP;
                let down = self.objective(&xp);
                xp[i] = x[i];
                (up - down) / (2.0 * FD_STEP)
            })
            .collect()
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Likelihood-ascent reconstruction used only to cross-check [`super::mle_reconstruct`].
///
/// `budget` caps the number of BFGS iterations.
pub fn independent_mle_oracle(tables: &[CountTable], budget: usize) -> Result<DensityMatrix> {
    let n = tables
        .first()
        .ok_or_else(|| Error::InvalidInput("no count tables given".into()))?
        .n_qubits();
    if n > 2 || tables.iter().any(|t| t.n_qubits() != n) {
        return Err(Error::Dimension(format!(
            "the oracle handles at most two qubits (got {n})"
        )));
    }
    let outcomes: Vec<_> = tables.iter().flat_map(|t| t.counts.keys().cloned()).collect();
    let required = 1usize << (2 * n);
    let rank = operator_span_rank(&outcomes);
    if rank < required {
        return Err(Error::NotInformationallyComplete { rank, required });
    }
    let total: f64 = tables.iter().map(|t| t.total()).sum();
    if total <= 0.0 {
        return Err(Error::NoCounts);
    }
    let mut projectors = Vec::new();
    let mut weights = Vec::new();
    for t in tables {
        for (o, &c) in &t.counts {
            let factors: Vec<ComplexMatrix> = o.labels().iter().map(|&l| analyzer_projector(l)).collect();
            projectors.push(tensor_all(&factors));
            weights.push(c / total);
        }
    }
    let dim = 1usize << n;
    let problem = Problem {
        dim,
        projectors,
        weights,
    };

    let n_params = dim * dim;
    let mut x = vec![0.0; n_params];
    let mut k = 0;
    for i in 0..dim {
        x[k] = 1.0;
        k += 1 + 2 * i;
    }
    // ascent on f, i.e. BFGS descent on −f
    let mut f = problem.objective(&x);
    let mut g: Vec<f64> = problem.gradient(&x).iter().map(|v| -v).collect();
    let mut h_inv = vec![vec![0.0; n_params]; n_params];
    for (i, row) in h_inv.iter_mut().enumerate() {
        row[i] = 1.0;
    }

    for _ in 0..budget {
        if dot(&g, &g).sqrt() < 1e-10 {
            break;
        }
        let mut dir: Vec<f64> = h_inv.iter().map(|row| -dot(row, &g)).collect();
        if dot(&dir, &g) >= 0.0 {
            // lost descent direction; reset curvature
            for (i, row) in h_inv.iter_mut().enumerate() {
                row.iter_mut().for_each(|v| *v = 0.0);
                row[i] = 1.0;
            }
            dir = g.iter().map(|v| -v).collect();
        }
        let slope = dot(&dir, &g);
        let mut step = 1.0;
        let mut next = None;
        while step > 1e-14 {
            let trial: Vec<f64> = x.iter().zip(&dir).map(|(a, d)| a + step * d).collect();
            let ft = problem.objective(&trial);
            // Armijo condition on −f
            if -ft <= -f + 1e-4 * step * slope {
                next = Some((trial, ft));
                break;
            }
            step *= 0.5;
        }
        let Some((x_new, f_new)) = next else {
            break;
        };
        let g_new: Vec<f64> = problem.gradient(&x_new).iter().map(|v| -v).collect();
        let s: Vec<f64> = x_new.iter().zip(&x).map(|(a, b)| a - b).collect();
        let y: Vec<f64> = g_new.iter().zip(&g).map(|(a, b)| a - b).collect();
        let sy = dot(&s, &y);
        if sy > 1e-16 {
            let hy: Vec<f64> = h_inv.iter().map(|row| dot(row, &y)).collect();
            let yhy = dot(&y, &hy);
            let rho = 1.0 / sy;
            for i in 0..n_params {
                for j in 0..n_params {
                    h_inv[i][j] += (1.0 + yhy * rho) * rho * s[i] * s[j]
                        - rho * (hy[i] * s[j] + s[i] * hy[j]);
                }
            }
        }
        let improvement = f_new - f;
        x = x_new;
        f = f_new;
        g = g_new;
        if improvement.abs() < 1e-15 {
            break;
        }
    }
    DensityMatrix::normalized(problem.state(&x))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::analysis::fidelity;
    use crate::states::{bell_state, PauliLabel};
    use crate::tomography::measurement::{all_label_settings, expected_counts};

    #[test]
    fn rejects_large_and_incomplete_inputs() {
        let rho = DensityMatrix::maximally_mixed(3);
        let tables = expected_counts(&rho, &all_label_settings(3)[..2], 10.0).unwrap();
        assert!(matches!(independent_mle_oracle(&tables, 10), Err(Error::Dimension(_))));

        let rho = DensityMatrix::maximally_mixed(2);
        let single = expected_counts(&rho, &["HH".parse().unwrap()], 100.0).unwrap();
        assert!(matches!(
            independent_mle_oracle(&single, 10),
            Err(Error::NotInformationallyComplete { .. })
        ));
    }

    #[test]
    fn recovers_mixed_bell_state() {
        let truth = bell_state(PauliLabel::Y)
            .density()
            .mix(0.8, &DensityMatrix::maximally_mixed(2))
            .unwrap();
        let tables = expected_counts(&truth, &all_label_settings(2), 1e5).unwrap();
        let est = independent_mle_oracle(&tables, 500).unwrap();
        assert!(fidelity(&est, &truth).unwrap() > 0.999_99);
    }
}
