//! Epsilon-insensitive support vector regression with an RBF kernel.
//!
//! The dual is solved by sequential minimal optimization over the usual
//! `2l`-variable formulation (`alpha` and `alpha*` stacked, labels `±1`),
//! picking working pairs with second-order information. Targets are
//! standardized before solving, so `epsilon` and `C` are in units of the
//! target's standard deviation.

use alloc::vec;
use alloc::vec::Vec;

use super::check_matrix;
use crate::error::{Error, Result};

const TAU: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SvrParams {
    /// Box constraint.
    pub c: f64,
    /// Tube half-width.
    pub epsilon: f64,
    /// RBF width; `None` means `1 / feature_dimension`.
    pub gamma: Option<f64>,
    /// KKT violation tolerance.
    pub tol: f64,
    pub max_iter: usize,
}

impl Default for SvrParams {
    fn default() -> Self {
        Self { c: 10.0, epsilon: 0.01, gamma: None, tol: 1e-3, max_iter: 10_000 }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SvrRbfModel {
    /// `alpha_i - alpha*_i` for every training point, in standardized units.
    pub dual: Vec<f64>,
    /// Decision-function offset in standardized units.
    pub offset: f64,
    pub gamma: f64,
    pub c: f64,
    pub epsilon: f64,
    pub y_mean: f64,
    pub y_scale: f64,
    /// Features of the points with non-zero dual coefficient.
    pub support: Vec<Vec<f64>>,
    pub support_coef: Vec<f64>,
    pub iterations: usize,
    pub converged: bool,
}

impl SvrRbfModel {
    /// Constant part of the prediction in target units.
    pub fn bias(&self) -> f64 {
        self.y_mean + self.y_scale * self.offset
    }

    pub fn predict(&self, x: &[f64]) -> f64 {
        let f: f64 = self.support.iter().zip(&self.support_coef).map(|(s, a)| a * rbf(self.gamma, s, x)).sum();
        self.y_mean + self.y_scale * (f + self.offset)
    }
}

fn rbf(gamma: f64, a: &[f64], b: &[f64]) -> f64 {
    let d2: f64 = a.iter().zip(b).map(|(p, q)| (p - q) * (p - q)).sum();
    libm::exp(-gamma * d2)
}

pub fn fit_svr_rbf(x: &[Vec<f64>], y: &[f64], params: &SvrParams) -> Result<SvrRbfModel> {
    if !(params.c > 0.0) {
        return Err(Error::Parameter(alloc::format!("C must be positive, got {}", params.c)));
    }
    if !(params.epsilon >= 0.0) {
        return Err(Error::Parameter(alloc::format!("epsilon must be >= 0, got {}", params.epsilon)));
    }
    let d = check_matrix(x, y, 2)?;
    let gamma = params.gamma.unwrap_or(1.0 / d.max(1) as f64);
    if !(gamma > 0.0) {
        return Err(Error::Parameter(alloc::format!("gamma must be positive, got {gamma}")));
    }

    let l = x.len();
    let y_mean = y.iter().sum::<f64>() / l as f64;
    let var = y.iter().map(|v| (v - y_mean) * (v - y_mean)).sum::<f64>() / l as f64;
    let y_scale = if var > 0.0 { libm::sqrt(var) } else { 1.0 };
    let z: Vec<f64> = y.iter().map(|v| (v - y_mean) / y_scale).collect();

    let mut kernel = vec![0.0; l * l];
    for i in 0..l {
        kernel[i * l + i] = 1.0;
        for j in 0..i {
            let k = rbf(gamma, &x[i], &x[j]);
            kernel[i * l + j] = k;
            kernel[j * l + i] = k;
        }
    }

    let solution = solve_dual(&kernel, &z, params.c, params.epsilon, params.tol, params.max_iter);
    let dual: Vec<f64> = (0..l).map(|i| solution.alpha[i] - solution.alpha[i + l]).collect();
    let (support, support_coef) =
        dual.iter().zip(x).filter(|(a, _)| **a != 0.0).map(|(a, row)| (row.clone(), *a)).unzip();

    Ok(SvrRbfModel {
        dual,
        offset: -solution.rho,
        gamma,
        c: params.c,
        epsilon: params.epsilon,
        y_mean,
        y_scale,
        support,
        support_coef,
        iterations: solution.iterations,
        converged: solution.converged,
    })
}

struct DualSolution {
    alpha: Vec<f64>,
    rho: f64,
    iterations: usize,
    converged: bool,
}

/// SMO on `min ½ βᵀQβ + pᵀβ` s.t. `yᵀβ = 0`, `0 ≤ β ≤ C`.
fn solve_dual(kernel: &[f64], z: &[f64], c: f64, eps: f64, tol: f64, max_iter: usize) -> DualSolution {
    let l = z.len();
    let n = 2 * l;
    let sign = |t: usize| if t < l { 1.0 } else { -1.0 };
    let q = |t: usize, s: usize| sign(t) * sign(s) * kernel[(t % l) * l + (s % l)];
    let qd = |t: usize| kernel[(t % l) * l + (t % l)];

    let mut alpha = vec![0.0; n];
    let mut grad: Vec<f64> = (0..n).map(|t| if t < l { eps - z[t] } else { eps + z[t - l] }).collect();
    let upper = |a: f64| a >= c;
    let lower = |a: f64| a <= 0.0;

    let mut iterations = 0;
    let mut converged = false;
    while iterations < max_iter {
        // Maximal violating index from I_up.
        let mut gmax = f64::NEG_INFINITY;
        let mut i = usize::MAX;
        for t in 0..n {
            let yt = sign(t);
            if (yt > 0.0 && !upper(alpha[t])) || (yt < 0.0 && !lower(alpha[t])) {
                let v = -yt * grad[t];
                if v >= gmax {
                    gmax = v;
                    i = t;
                }
            }
        }
        // Partner from I_low with the largest second-order decrease.
        let mut gmax2 = f64::NEG_INFINITY;
        let mut j = usize::MAX;
        let mut best = f64::INFINITY;
        if i != usize::MAX {
            for t in 0..n {
                let yt = sign(t);
                if (yt > 0.0 && !lower(alpha[t])) || (yt < 0.0 && !upper(alpha[t])) {
                    let v = yt * grad[t];
                    if v >= gmax2 {
                        gmax2 = v;
                    }
                    let b = gmax + v;
                    if b > 0.0 {
                        let a = qd(i) + qd(t) - 2.0 * kernel[(i % l) * l + (t % l)];
                        let a = if a > 0.0 { a } else { TAU };
                        let obj = -(b * b) / a;
                        if obj <= best {
                            best = obj;
                            j = t;
                        }
                    }
                }
            }
        }
        if i == usize::MAX || j == usize::MAX || gmax + gmax2 < tol {
            converged = true;
            break;
        }
        iterations += 1;

        let (yi, yj) = (sign(i), sign(j));
        let qij = q(i, j);
        let (old_i, old_j) = (alpha[i], alpha[j]);
        if yi != yj {
            let quad = {
                let a = qd(i) + qd(j) + 2.0 * qij;
                if a > 0.0 { a } else { TAU }
            };
            let delta = (-grad[i] - grad[j]) / quad;
            let diff = alpha[i] - alpha[j];
            alpha[i] += delta;
            alpha[j] += delta;
            if diff > 0.0 {
                if alpha[j] < 0.0 {
                    alpha[j] = 0.0;
                    alpha[i] = diff;
                }
            } else if alpha[i] < 0.0 {
                alpha[i] = 0.0;
                alpha[j] = -diff;
            }
            if diff > 0.0 {
                if alpha[i] > c {
                    alpha[i] = c;
                    alpha[j] = c - diff;
                }
            } else if alpha[j] > c {
                alpha[j] = c;
                alpha[i] = c + diff;
            }
        } else {
            let quad = {
                let a = qd(i) + qd(j) - 2.0 * qij;
                if a > 0.0 { a } else { TAU }
            };
            let delta = (grad[i] - grad[j]) / quad;
            let sum = alpha[i] + alpha[j];
            alpha[i] -= delta;
            alpha[j] += delta;
            if sum > c {
                if alpha[i] > c {
                    alpha[i] = c;
                    alpha[j] = sum - c;
                }
            } else if alpha[j] < 0.0 {
                alpha[j] = 0.0;
                alpha[i] = sum;
            }
            if sum > c {
                if alpha[j] > c {
                    alpha[j] = c;
                    alpha[i] = sum - c;
                }
            } else if alpha[i] < 0.0 {
                alpha[i] = 0.0;
                alpha[j] = sum;
            }
        }

        let (di, dj) = (alpha[i] - old_i, alpha[j] - old_j);
        for (t, g) in grad.iter_mut().enumerate() {
            *g += q(i, t) * di + q(j, t) * dj;
        }
    }

    // Offset from free variables, or the midpoint of the feasible interval.
    let (mut ub, mut lb) = (f64::INFINITY, f64::NEG_INFINITY);
    let (mut free_sum, mut free) = (0.0, 0usize);
    for t in 0..n {
        let yg = sign(t) * grad[t];
        if upper(alpha[t]) {
            if sign(t) < 0.0 {
                ub = ub.min(yg);
            } else {
                lb = lb.max(yg);
            }
        } else if lower(alpha[t]) {
            if sign(t) > 0.0 {
                ub = ub.min(yg);
            } else {
                lb = lb.max(yg);
            }
        } else {
            free += 1;
            free_sum += yg;
        }
    }
    let rho = if free > 0 { free_sum / free as f64 } else { (ub + lb) / 2.0 };

    DualSolution { alpha, rho, iterations, converged }
}
