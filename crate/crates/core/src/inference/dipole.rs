//! Rabi frequency versus √P regression and dipole extraction.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::angular::{stretched_hyperfine_factor, HyperfineTransition};
use crate::constants::{dipole_si_to_au, EPSILON_0, HBAR, SPEED_OF_LIGHT};
use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PowerSeriesPoint {
    /// Coupling power, W.
    pub power: f64,
    pub sqrt_power: f64,
    /// Fitted peak Rabi frequency and its standard error, rad/s.
    pub rabi: f64,
    pub sigma_rabi: f64,
}

impl PowerSeriesPoint {
    pub fn new(power: f64, rabi: f64, sigma_rabi: f64) -> Result<Self> {
        if !(power >= 0.0) || !(sigma_rabi > 0.0 && sigma_rabi.is_finite()) || !rabi.is_finite() {
            return Err(Error::Domain(format!(
                "power series point needs P ≥ 0 and finite σ_Ω > 0 (P={power}, Ω={rabi}, σ={sigma_rabi})"
            )));
        }
        Ok(PowerSeriesPoint { power, sqrt_power: power.sqrt(), rabi, sigma_rabi })
    }
}

/// Weighted straight line Ω = g·√P + b.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct LinearFit {
    /// rad/s per √W.
    pub gradient: f64,
    pub sigma_gradient: f64,
    pub intercept: f64,
    pub sigma_intercept: f64,
    pub chi2: f64,
    pub dof: usize,
    /// |b| ≤ 2σ_b.
    pub intercept_consistent_with_zero: bool,
}

/// Weighted least squares of Ω against √P with a free intercept. Errors are
/// taken as absolute (no rescaling by the reduced χ²).
pub fn fit_power_series(points: &[PowerSeriesPoint]) -> Result<LinearFit> {
    if points.len() < 3 {
        return Err(Error::InsufficientData(format!("need ≥ 3 power points, got {}", points.len())));
    }
    for p in points {
        PowerSeriesPoint::new(p.power, p.rabi, p.sigma_rabi)?;
    }
    let first = points[0].power;
    if points.iter().all(|p| p.power == first) {
        return Err(Error::InsufficientData(format!("all points share the power {first} W")));
    }
    // sums in a fixed order: sort so that reordering the input cannot change rounding
    let mut pts = points.to_vec();
    pts.sort_by(|a, b| a.power.total_cmp(&b.power).then(a.rabi.total_cmp(&b.rabi)));
    let (mut s, mut sx, mut sy, mut sxx, mut sxy) = (0.0, 0.0, 0.0, 0.0, 0.0);
    for p in &pts {
        let w = 1.0 / (p.sigma_rabi * p.sigma_rabi);
        let x = p.power.sqrt();
        s += w;
        sx += w * x;
        sy += w * p.rabi;
        sxx += w * x * x;
        sxy += w * x * p.rabi;
    }
    let det = s * sxx - sx * sx;
    if !(det > 0.0) {
        return Err(Error::Numerical("degenerate power series".into()));
    }
    let gradient = (s * sxy - sx * sy) / det;
    let intercept = (sxx * sy - sx * sxy) / det;
    let sigma_gradient = (s / det).sqrt();
    let sigma_intercept = (sxx / det).sqrt();
    let chi2 = pts
        .iter()
        .map(|p| ((p.rabi - gradient * p.power.sqrt() - intercept) / p.sigma_rabi).powi(2))
        .sum();
    Ok(LinearFit {
        gradient,
        sigma_gradient,
        intercept,
        sigma_intercept,
        chi2,
        dof: pts.len() - 2,
        intercept_consistent_with_zero: intercept.abs() <= 2.0 * sigma_intercept,
    })
}

/// Beam and power calibration entering the dipole, with standard errors.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct BeamCalibration {
    pub w_maj: f64,
    pub sigma_w_maj: f64,
    pub w_min: f64,
    pub sigma_w_min: f64,
    /// Relative standard error of the power scale.
    pub power_rel_error: f64,
}

impl Default for BeamCalibration {
    /// 240 ± 10 μm by 172 ± 10 μm, power known to 5%.
    fn default() -> Self {
        BeamCalibration { w_maj: 240e-6, sigma_w_maj: 10e-6, w_min: 172e-6, sigma_w_min: 10e-6, power_rel_error: 0.05 }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct DipoleEstimate {
    pub n: u32,
    /// Transition dipole of the driven (stretched) transition, C·m.
    pub mu_si: f64,
    pub sigma_mu_si: f64,
    /// The same in e·a₀.
    pub mu_au: f64,
    pub sigma_mu_au: f64,
    pub relative_error: f64,
    pub reduced_au: Option<f64>,
    pub sigma_reduced_au: Option<f64>,
}

impl DipoleEstimate {
    /// Fills in the reduced element for transition `t`.
    pub fn with_reduced(mut self, t: &HyperfineTransition) -> Result<Self> {
        let r = to_reduced(&self, t)?;
        self.reduced_au = Some(r);
        self.sigma_reduced_au = Some((r * self.relative_error).abs());
        Ok(self)
    }
}

/// μ = g·(ħ/2)·√(π w_maj w_min c ε₀), the inverse of Ω_max(P).
pub fn dipole_from_gradient(n: u32, gradient: f64, sigma_gradient: f64, cal: &BeamCalibration) -> Result<DipoleEstimate> {
    let positive = [gradient, cal.w_maj, cal.w_min];
    let non_negative = [sigma_gradient, cal.sigma_w_maj, cal.sigma_w_min, cal.power_rel_error];
    if positive.iter().any(|v| !(*v > 0.0)) || non_negative.iter().any(|v| !(*v >= 0.0)) {
        return Err(Error::Domain(format!(
            "dipole extraction needs positive gradient and waists (g={gradient}, {cal:?})"
        )));
    }
    let mu = gradient * HBAR / 2.0 * (PI * cal.w_maj * cal.w_min * SPEED_OF_LIGHT * EPSILON_0).sqrt();
    let rel = ((sigma_gradient / gradient).powi(2)
        + (cal.power_rel_error / 2.0).powi(2)
        + (cal.sigma_w_maj / (2.0 * cal.w_maj)).powi(2)
        + (cal.sigma_w_min / (2.0 * cal.w_min)).powi(2))
    .sqrt();
    Ok(DipoleEstimate {
        n,
        mu_si: mu,
        sigma_mu_si: mu * rel,
        mu_au: dipole_si_to_au(mu),
        sigma_mu_au: dipole_si_to_au(mu * rel),
        relative_error: rel,
        reduced_au: None,
        sigma_reduced_au: None,
    })
}

/// Reduced matrix element (e·a₀) from the measured transition dipole.
pub fn to_reduced(estimate: &DipoleEstimate, t: &HyperfineTransition) -> Result<f64> {
    let c = stretched_hyperfine_factor(t)?;
    if c.abs() < 1e-12 {
        return Err(Error::SelectionRule(format!("angular coefficient vanishes for {} → {}", t.lower, t.upper)));
    }
    Ok(estimate.mu_au / c)
}
