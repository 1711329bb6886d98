//! Damped least squares (Levenberg–Marquardt) with a forward-difference Jacobian.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct LmConfig {
    /// Relative Jacobian step.
    pub jacobian_step: f64,
    /// Stop when the relative cost decrease of an accepted step falls below this.
    pub cost_tolerance: f64,
    /// Stop when ‖Δp‖ < step_tolerance·(1 + ‖p‖).
    pub step_tolerance: f64,
    pub max_iterations: usize,
    pub initial_damping: f64,
}

impl Default for LmConfig {
    fn default() -> Self {
        LmConfig {
            jacobian_step: 1e-6,
            cost_tolerance: 1e-10,
            step_tolerance: 1e-8,
            max_iterations: 200,
            initial_damping: 1e-3,
        }
    }
}

#[derive(Clone, Debug)]
pub struct LmOutcome {
    pub params: Vec<f64>,
    pub residuals: Vec<f64>,
    /// Σ r².
    pub cost: f64,
    /// Jacobian at the returned parameters (rows: residuals).
    pub jacobian: DMatrix<f64>,
    pub iterations: usize,
    /// Cost after each accepted step, starting with the initial cost.
    pub trace: Vec<f64>,
}

impl LmOutcome {
    /// Σ r² / (N − p).
    pub fn reduced_chi2(&self) -> f64 {
        let dof = self.residuals.len().saturating_sub(self.params.len()).max(1);
        self.cost / dof as f64
    }

    /// s²·(JᵀJ)⁻¹ with s² the reduced χ². Singular directions get infinite
    /// variance.
    pub fn covariance(&self) -> DMatrix<f64> {
        let s2 = self.reduced_chi2();
        let p = self.params.len();
        let jtj = self.jacobian.transpose() * &self.jacobian;
        // column scaling keeps the conditioning test meaningful across parameters
        let scale: Vec<f64> = (0..p).map(|i| jtj[(i, i)].sqrt()).collect();
        let mut cov = DMatrix::from_element(p, p, 0.0);
        let active: Vec<usize> = (0..p).filter(|&i| scale[i] > 0.0 && scale[i].is_finite()).collect();
        let k = active.len();
        let mut scaled = DMatrix::from_element(k, k, 0.0);
        for (a, &i) in active.iter().enumerate() {
            for (b, &j) in active.iter().enumerate() {
                scaled[(a, b)] = jtj[(i, j)] / (scale[i] * scale[j]);
            }
        }
        let svd = scaled.svd(true, true);
        let smax = svd.singular_values.iter().cloned().fold(0.0, f64::max);
        let u = svd.u.as_ref().expect("u requested");
        let vt = svd.v_t.as_ref().expect("v requested");
        let mut singular = vec![false; k];
        let mut inv = DMatrix::from_element(k, k, 0.0);
        for (m, &sv) in svd.singular_values.iter().enumerate() {
            if sv > 1e-13 * smax {
                inv += vt.row(m).transpose() * u.column(m).transpose() / sv;
            } else {
                for (a, flag) in singular.iter_mut().enumerate() {
                    if vt[(m, a)].abs() > 1e-3 {
                        *flag = true;
                    }
                }
            }
        }
        for i in 0..p {
            cov[(i, i)] = f64::INFINITY;
        }
        for (a, &i) in active.iter().enumerate() {
            for (b, &j) in active.iter().enumerate() {
                cov[(i, j)] = if singular[a] || singular[b] {
                    if i == j {
                        f64::INFINITY
                    } else {
                        f64::NAN
                    }
                } else {
                    s2 * inv[(a, b)] / (scale[i] * scale[j])
                };
            }
        }
        cov
    }
}

fn evaluate<F>(f: &F, p: &[f64]) -> Result<(Vec<f64>, f64)>
where
    F: Fn(&[f64]) -> Result<Vec<f64>>,
{
    let r = f(p)?;
    let cost: f64 = r.iter().map(|v| v * v).sum();
    if !cost.is_finite() {
        return Err(Error::Numerical(format!("non-finite residuals at parameters {p:?}")));
    }
    Ok((r, cost))
}

pub fn jacobian<F>(f: &F, p: &[f64], r0: &[f64], rel_step: f64) -> Result<DMatrix<f64>>
where
    F: Fn(&[f64]) -> Result<Vec<f64>>,
{
    let mut jac = DMatrix::from_element(r0.len(), p.len(), 0.0);
    let mut q = p.to_vec();
    for j in 0..p.len() {
        let h = rel_step * p[j].abs().max(1.0);
        q[j] = p[j] + h;
        let r = f(&q)?;
        q[j] = p[j];
        for i in 0..r0.len() {
            jac[(i, j)] = (r[i] - r0[i]) / h;
        }
    }
    Ok(jac)
}

/// Minimises Σ r(p)² from `p0`.
pub fn levenberg_marquardt<F>(f: F, p0: &[f64], cfg: &LmConfig) -> Result<LmOutcome>
where
    F: Fn(&[f64]) -> Result<Vec<f64>>,
{
    let n = p0.len();
    let mut p = p0.to_vec();
    let (mut r, mut cost) = evaluate(&f, &p)?;
    let mut trace = vec![cost];
    let mut lambda = cfg.initial_damping;
    let mut jac = jacobian(&f, &p, &r, cfg.jacobian_step)?;

    for iter in 1..=cfg.max_iterations {
        if cost == 0.0 {
            return Ok(LmOutcome { params: p, residuals: r, cost, jacobian: jac, iterations: iter - 1, trace });
        }
        let jtj = jac.transpose() * &jac;
        let g = jac.transpose() * DVector::from_column_slice(&r);
        let mut accepted = false;
        while lambda < 1e16 {
            let mut a = jtj.clone();
            for i in 0..n {
                a[(i, i)] += lambda * jtj[(i, i)].max(1e-12);
            }
            let Some(step) = a.clone().cholesky().map(|c| c.solve(&(-&g))).or_else(|| a.lu().solve(&(-&g))) else {
                lambda *= 10.0;
                continue;
            };
            let trial: Vec<f64> = p.iter().zip(step.iter()).map(|(a, b)| a + b).collect();
            match evaluate(&f, &trial) {
                Ok((rt, ct)) if ct < cost => {
                    let rel = (cost - ct) / cost;
                    let step_norm = step.norm();
                    let p_norm = trial.iter().map(|v| v * v).sum::<f64>().sqrt();
                    p = trial;
                    r = rt;
                    cost = ct;
                    trace.push(cost);
                    lambda = (lambda / 3.0).max(1e-12);
                    accepted = true;
                    jac = jacobian(&f, &p, &r, cfg.jacobian_step)?;
                    if rel < cfg.cost_tolerance || step_norm < cfg.step_tolerance * (1.0 + p_norm) {
                        return Ok(LmOutcome { params: p, residuals: r, cost, jacobian: jac, iterations: iter, trace });
                    }
                    break;
                }
                _ => lambda *= 4.0,
            }
        }
        if !accepted {
            // no descent direction left at any damping: a stationary point
            return Ok(LmOutcome { params: p, residuals: r, cost, jacobian: jac, iterations: iter, trace });
        }
    }
    Err(Error::NonConvergence { iterations: cfg.max_iterations, cost, params: p })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fits_exponential_decay() {
        let t: Vec<f64> = (0..40).map(|i| i as f64 * 0.1).collect();
        let y: Vec<f64> = t.iter().map(|t| 2.5 * (-1.3 * t).exp() + 0.2).collect();
        let out = levenberg_marquardt(
            |p: &[f64]| Ok(t.iter().zip(&y).map(|(t, y)| p[0] * (-p[1] * t).exp() + p[2] - y).collect()),
            &[1.0, 0.5, 0.0],
            &LmConfig::default(),
        )
        .unwrap();
        assert!((out.params[0] - 2.5).abs() < 1e-6);
        assert!((out.params[1] - 1.3).abs() < 1e-6);
        assert!((out.params[2] - 0.2).abs() < 1e-6);
    }

    #[test]
    fn rosenbrock() {
        let out = levenberg_marquardt(
            |p: &[f64]| Ok(vec![10.0 * (p[1] - p[0] * p[0]), 1.0 - p[0]]),
            &[-1.2, 1.0],
            &LmConfig::default(),
        )
        .unwrap();
        assert!((out.params[0] - 1.0).abs() < 1e-6 && (out.params[1] - 1.0).abs() < 1e-6);
    }

    #[test]
    fn linear_covariance_matches_closed_form() {
        // straight line with unit noise-free scatter injected by hand
        let x = [0.0, 1.0, 2.0, 3.0, 4.0];
        let y = [0.1, 0.9, 2.1, 2.9, 4.1];
        let out = levenberg_marquardt(
            |p: &[f64]| Ok(x.iter().zip(&y).map(|(x, y)| p[0] + p[1] * x - y).collect()),
            &[0.0, 0.0],
            &LmConfig::default(),
        )
        .unwrap();
        let cov = out.covariance();
        let s2 = out.cost / 3.0;
        let sxx: f64 = x.iter().map(|v| (v - 2.0) * (v - 2.0)).sum();
        assert!((cov[(1, 1)] - s2 / sxx).abs() < 1e-8 * s2 / sxx);
    }

    #[test]
    fn iteration_cap_reports_last_iterate() {
        let cfg = LmConfig { max_iterations: 1, cost_tolerance: 0.0, step_tolerance: 0.0, ..LmConfig::default() };
        let r = levenberg_marquardt(|p: &[f64]| Ok(vec![10.0 * (p[1] - p[0] * p[0]), 1.0 - p[0]]), &[-1.2, 1.0], &cfg);
        match r {
            Err(Error::NonConvergence { iterations, params, .. }) => {
                assert_eq!(iterations, 1);
                assert_eq!(params.len(), 2);
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn singular_direction_gets_infinite_variance() {
        let out = levenberg_marquardt(
            |p: &[f64]| Ok(vec![p[0] + p[1] - 1.0, p[0] + p[1] - 1.2, 2.0 * (p[0] + p[1]) - 2.1]),
            &[0.0, 0.0],
            &LmConfig::default(),
        )
        .unwrap();
        let cov = out.covariance();
        assert!(cov[(0, 0)].is_infinite() && cov[(1, 1)].is_infinite());
    }
}
