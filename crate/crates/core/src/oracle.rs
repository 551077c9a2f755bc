//! Centralized ground truth, computed without any of the distributed
//! machinery. Tests and run diagnostics compare against these values.

use nalgebra::DMatrix;

use crate::digraph::WeightMatrix;
use crate::problems::{CostFunction, LeastSquaresInstance};
use crate::{Error, Result, Vector};

#[derive(Debug, Clone, PartialEq)]
pub struct GroundTruth {
    pub x_star: Vector,
    /// `F* = ½ Σ ‖A_i x* − b_i‖²`.
    pub objective: f64,
    /// `λ_i* = −∇f_i(x*)`.
    pub lambda_star: Vec<Vector>,
}

/// Solves the stacked normal equations `(Σ A_iᵀA_i) x = Σ A_iᵀ b_i`.
pub fn centralized_solution(instance: &LeastSquaresInstance) -> Result<GroundTruth> {
    let p = instance.dim();
    let mut normal = DMatrix::zeros(p, p);
    let mut rhs = Vector::zeros(p);
    for c in instance.costs() {
        normal += c.a().tr_mul(c.a());
        rhs += c.a().tr_mul(c.b());
    }
    let chol = normal.cholesky().ok_or(Error::Singular)?;
    let x_star = chol.solve(&rhs);
    let lambda_star = instance
        .costs()
        .iter()
        .map(|c| -c.a().tr_mul(&(c.a() * &x_star - c.b())))
        .collect();
    let objective = instance.costs().iter().map(|c| c.eval(&x_star)).sum();
    Ok(GroundTruth {
        x_star,
        objective,
        lambda_star,
    })
}

/// Arithmetic mean with Neumaier-compensated summation per component.
pub fn exact_average(vectors: &[Vector]) -> Vector {
    assert!(!vectors.is_empty(), "average of no vectors");
    let dim = vectors[0].len();
    let mut sum = Vector::zeros(dim);
    let mut comp = Vector::zeros(dim);
    for v in vectors {
        for c in 0..dim {
            let t = sum[c] + v[c];
            if sum[c].abs() >= v[c].abs() {
                comp[c] += (sum[c] - t) + v[c];
            } else {
                comp[c] += (v[c] - t) + sum[c];
            }
            sum[c] = t;
        }
    }
    (sum + comp) / vectors.len() as f64
}

/// Ratios `(Pᵏy⁰) ÷ (Pᵏ𝟙)` for `k = 0..=steps`, by repeated dense
/// matrix-vector products. Each receiver accumulates `p_lj·y_j` over senders
/// in ascending order, so the result is bit-comparable with an undelayed
/// simulation.
pub fn synchronous_ratio_trajectory(
    weights: &WeightMatrix,
    y0: &[Vector],
    steps: usize,
) -> Vec<Vec<Vector>> {
    let p = weights.to_dense();
    let n = p.len();
    let dim = y0.first().map_or(0, Vector::len);
    let mut y: Vec<Vec<f64>> = y0.iter().map(|v| v.iter().copied().collect()).collect();
    let mut w = vec![1.0; n];
    let ratios = |y: &[Vec<f64>], w: &[f64]| -> Vec<Vector> {
        y.iter()
            .zip(w)
            .map(|(yl, &wl)| Vector::from_iterator(dim, yl.iter().map(|v| v / wl)))
            .collect()
    };
    let mut out = vec![ratios(&y, &w)];
    for _ in 0..steps {
        let mut ny = vec![vec![0.0; dim]; n];
        let mut nw = vec![0.0; n];
        for l in 0..n {
            for j in 0..n {
                let plj = p[l][j];
                if plj == 0.0 {
                    continue;
                }
                for c in 0..dim {
                    ny[l][c] += y[j][c] * plj;
                }
                nw[l] += plj * w[j];
            }
        }
        y = ny;
        w = nw;
        out.push(ratios(&y, &w));
    }
    out
}

pub fn synchronous_ratio_oracle(weights: &WeightMatrix, y0: &[Vector], k: usize) -> Vec<Vector> {
    synchronous_ratio_trajectory(weights, y0, k)
        .pop()
        .unwrap_or_default()
}
