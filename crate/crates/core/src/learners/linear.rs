//! Weighted least squares and L2-penalized logistic regression.

use serde::{Deserialize, Serialize};

use super::{linalg, sigmoid, LearnerError};
use crate::matrix::Matrix;

/// Relative ridge jitter added to the normal equations so singular designs
/// (collinear or one-hot blocks) still solve.
const RIDGE_JITTER: f64 = 1e-10;

/// L2 penalty of the logistic objective (on the weighted-mean log loss).
pub const LOGISTIC_L2: f64 = 1e-4;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LinearParams {
    pub coef: Vec<f64>,
    pub intercept: f64,
}

impl LinearParams {
    #[inline]
    pub fn decision(&self, row: &[f64]) -> f64 {
        self.intercept + self.coef.iter().zip(row).map(|(c, x)| c * x).sum::<f64>()
    }
}

fn weighted_means(x: &Matrix, y: &[f64], w: &[f64]) -> (Vec<f64>, f64, f64) {
    let total: f64 = w.iter().sum();
    let mut mx = vec![0.0; x.ncols()];
    let mut my = 0.0;
    for (i, row) in x.rows_iter().enumerate() {
        for (m, v) in mx.iter_mut().zip(row) {
            *m += w[i] * v;
        }
        my += w[i] * y[i];
    }
    mx.iter_mut().for_each(|m| *m /= total);
    (mx, my / total, total)
}

/// Solves the weighted normal equations on centered data.
/// Returns the parameters and the training loss trace (final weighted MSE).
pub(crate) fn fit_least_squares(x: &Matrix, y: &[f64], w: &[f64]) -> Result<(LinearParams, Vec<f64>), LearnerError> {
    let p = x.ncols();
    let (mx, my, total) = weighted_means(x, y, w);
    let mut gram = vec![0.0; p * p];
    let mut rhs = vec![0.0; p];
    let mut centered = vec![0.0; p];
    for (i, row) in x.rows_iter().enumerate() {
        for (c, (v, m)) in centered.iter_mut().zip(row.iter().zip(&mx)) {
            *c = v - m;
        }
        let yc = y[i] - my;
        for a in 0..p {
            let wa = w[i] * centered[a];
            rhs[a] += wa * yc;
            for b in a..p {
                gram[a * p + b] += wa * centered[b];
            }
        }
    }
    for a in 0..p {
        for b in 0..a {
            gram[a * p + b] = gram[b * p + a];
        }
    }
    let mean_diag = if p > 0 { (0..p).map(|a| gram[a * p + a]).sum::<f64>() / p as f64 } else { 0.0 };
    let jitter = RIDGE_JITTER * mean_diag.max(1.0);
    for a in 0..p {
        gram[a * p + a] += jitter;
    }
    let coef = if p == 0 {
        Vec::new()
    } else {
        linalg::solve(gram, rhs, p).ok_or_else(|| LearnerError::Numerical("normal equations are singular".into()))?
    };
    let intercept = my - coef.iter().zip(&mx).map(|(c, m)| c * m).sum::<f64>();
    let params = LinearParams { coef, intercept };
    let mse = x
        .rows_iter()
        .zip(y)
        .zip(w)
        .map(|((row, &t), &wi)| wi * (params.decision(row) - t).powi(2))
        .sum::<f64>()
        / total;
    Ok((params, vec![mse]))
}

fn logistic_objective(x: &Matrix, y: &[f64], w: &[f64], total: f64, params: &LinearParams) -> f64 {
    let data: f64 = x
        .rows_iter()
        .zip(y)
        .zip(w)
        .map(|((row, &t), &wi)| {
            let z = params.decision(row);
            // log(1 + e^z) - t z, computed stably
            let softplus = if z > 0.0 { z + (-z).exp().ln_1p() } else { z.exp().ln_1p() };
            wi * (softplus - t * z)
        })
        .sum::<f64>()
        / total;
    data + 0.5 * LOGISTIC_L2 * params.coef.iter().map(|c| c * c).sum::<f64>()
}

/// Newton iterations with backtracking on the weighted-mean log loss plus
/// an L2 penalty on the coefficients. Weights enter only through their
/// normalized values, so rescaling all weights leaves the optimum unchanged.
pub(crate) fn fit_logistic(x: &Matrix, y: &[f64], w: &[f64]) -> Result<(LinearParams, Vec<f64>), LearnerError> {
    let p = x.ncols();
    let dim = p + 1;
    let total: f64 = w.iter().sum();
    let prior = (y.iter().zip(w).map(|(t, wi)| t * wi).sum::<f64>() / total).clamp(1e-12, 1.0 - 1e-12);
    let mut params = LinearParams {
        coef: vec![0.0; p],
        intercept: (prior / (1.0 - prior)).ln(),
    };
    let mut loss = logistic_objective(x, y, w, total, &params);
    let mut trace = vec![loss];
    for _ in 0..100 {
        let mut grad = vec![0.0; dim];
        let mut hess = vec![0.0; dim * dim];
        for ((row, &t), &wi) in x.rows_iter().zip(y).zip(w) {
            let prob = sigmoid(params.decision(row));
            let r = wi * (prob - t) / total;
            let s = wi * prob * (1.0 - prob) / total;
            for a in 0..p {
                grad[a] += r * row[a];
                for b in a..p {
                    hess[a * dim + b] += s * row[a] * row[b];
                }
                hess[a * dim + p] += s * row[a];
            }
            grad[p] += r;
            hess[p * dim + p] += s;
        }
        for a in 0..p {
            grad[a] += LOGISTIC_L2 * params.coef[a];
            hess[a * dim + a] += LOGISTIC_L2;
        }
        hess[p * dim + p] += 1e-12;
        for a in 0..dim {
            for b in 0..a {
                hess[a * dim + b] = hess[b * dim + a];
            }
        }
        if grad.iter().all(|g| g.abs() < 1e-10) {
            break;
        }
        let step = linalg::solve(hess, grad.clone(), dim)
            .ok_or_else(|| LearnerError::Numerical("singular Hessian in logistic fit".into()))?;
        let mut scale = 1.0;
        let mut improved = false;
        for _ in 0..30 {
            let candidate = LinearParams {
                coef: params.coef.iter().zip(&step).map(|(c, s)| c - scale * s).collect(),
                intercept: params.intercept - scale * step[p],
            };
            let cand_loss = logistic_objective(x, y, w, total, &candidate);
            if cand_loss <= loss {
                params = candidate;
                improved = cand_loss < loss;
                loss = cand_loss;
                break;
            }
            scale *= 0.5;
        }
        trace.push(loss);
        if !improved {
            break;
        }
    }
    Ok((params, trace))
}
