//! JSON report shapes. Rates are written in MHz (cyclic), lengths in μm.

use serde::{Deserialize, Serialize};

use crate::constants::rad_to_mhz;
use crate::error::Error;
use crate::inference::{FitMode, FitResult, TwoLevelFit, WaistFit};

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ErrorReport {
    pub category: String,
    pub message: String,
}

impl From<&Error> for ErrorReport {
    fn from(e: &Error) -> Self {
        ErrorReport { category: e.category().to_string(), message: e.to_string() }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FitReport {
    pub mode: FitMode,
    pub gamma_mhz: f64,
    pub rabi_max_mhz: f64,
    #[serde(with = "crate::serde_float::scalar")]
    pub sigma_rabi_max_mhz: f64,
    pub gamma3_mhz: f64,
    #[serde(with = "crate::serde_float::scalar")]
    pub sigma_gamma3_mhz: f64,
    pub coupling_detuning_mhz: f64,
    #[serde(with = "crate::serde_float::scalar")]
    pub sigma_coupling_detuning_mhz: f64,
    pub amplitude: f64,
    #[serde(with = "crate::serde_float::scalar")]
    pub sigma_amplitude: f64,
    pub baseline: f64,
    #[serde(with = "crate::serde_float::scalar")]
    pub sigma_baseline: f64,
    /// Covariance of (Ω_max, γ₃, Δ, amplitude, baseline) with rates in MHz.
    #[serde(with = "crate::serde_float::matrix")]
    pub covariance: Vec<Vec<f64>>,
    pub reduced_chi2: f64,
    pub converged: bool,
    pub iterations: usize,
    pub at_bound: Vec<String>,
}

impl From<&FitResult> for FitReport {
    fn from(f: &FitResult) -> Self {
        let unit = [rad_to_mhz(1.0), rad_to_mhz(1.0), rad_to_mhz(1.0), 1.0, 1.0];
        let covariance = f
            .covariance
            .iter()
            .enumerate()
            .map(|(i, row)| row.iter().enumerate().map(|(j, c)| c * unit[i] * unit[j]).collect())
            .collect();
        FitReport {
            mode: f.mode,
            gamma_mhz: rad_to_mhz(f.gamma),
            rabi_max_mhz: rad_to_mhz(f.rabi_max),
            sigma_rabi_max_mhz: rad_to_mhz(f.sigma_rabi_max),
            gamma3_mhz: rad_to_mhz(f.gamma3),
            sigma_gamma3_mhz: rad_to_mhz(f.sigma_gamma3),
            coupling_detuning_mhz: rad_to_mhz(f.coupling_detuning),
            sigma_coupling_detuning_mhz: rad_to_mhz(f.sigma_coupling_detuning),
            amplitude: f.amplitude,
            sigma_amplitude: f.sigma_amplitude,
            baseline: f.baseline,
            sigma_baseline: f.sigma_baseline,
            covariance,
            reduced_chi2: f.reduced_chi2,
            converged: f.converged,
            iterations: f.iterations,
            at_bound: f.at_bound.clone(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TwoLevelReport {
    pub gamma_mhz: f64,
    #[serde(with = "crate::serde_float::scalar")]
    pub sigma_gamma_mhz: f64,
    pub center_mhz: f64,
    pub optical_depth: f64,
    pub baseline: f64,
    pub reduced_chi2: f64,
    pub iterations: usize,
}

impl From<&TwoLevelFit> for TwoLevelReport {
    fn from(f: &TwoLevelFit) -> Self {
        TwoLevelReport {
            gamma_mhz: rad_to_mhz(f.gamma),
            sigma_gamma_mhz: rad_to_mhz(f.sigma_gamma),
            center_mhz: rad_to_mhz(f.center),
            optical_depth: f.optical_depth,
            baseline: f.baseline,
            reduced_chi2: f.reduced_chi2,
            iterations: f.iterations,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct WaistReport {
    pub w_maj_um: f64,
    #[serde(with = "crate::serde_float::scalar")]
    pub sigma_w_maj_um: f64,
    pub w_min_um: f64,
    #[serde(with = "crate::serde_float::scalar")]
    pub sigma_w_min_um: f64,
    pub rabi_max_mhz: f64,
    #[serde(with = "crate::serde_float::scalar")]
    pub sigma_rabi_max_mhz: f64,
    pub x0_um: f64,
    pub y0_um: f64,
    pub od_scale: f64,
    pub reduced_chi2: f64,
    pub iterations: usize,
}

impl From<&WaistFit> for WaistReport {
    fn from(f: &WaistFit) -> Self {
        WaistReport {
            w_maj_um: f.w_maj * 1e6,
            sigma_w_maj_um: f.sigma_w_maj * 1e6,
            w_min_um: f.w_min * 1e6,
            sigma_w_min_um: f.sigma_w_min * 1e6,
            rabi_max_mhz: rad_to_mhz(f.rabi_max),
            sigma_rabi_max_mhz: rad_to_mhz(f.sigma_rabi_max),
            x0_um: f.x0 * 1e6,
            y0_um: f.y0 * 1e6,
            od_scale: f.od_scale,
            reduced_chi2: f.reduced_chi2,
            iterations: f.iterations,
        }
    }
}
