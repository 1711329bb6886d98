//! Inverse pipeline: spectrum fits, waist fits, Rabi-frequency regression,
//! dipole extraction and model comparison.

mod compare;
mod dipole;
mod lm;
mod spectrum;
mod waist;

pub use compare::{chi_squared_compare, ModelComparison, ModelPrediction, ModelScore};
pub use dipole::{
    dipole_from_gradient, fit_power_series, to_reduced, BeamCalibration, DipoleEstimate, LinearFit, PowerSeriesPoint,
};
pub use lm::{jacobian, levenberg_marquardt, LmConfig, LmOutcome};
pub use spectrum::{
    calibrate_sweep_span, estimate_noise, fit_at_spectrum, fit_two_level, fit_two_level_with, AtFitOptions, AtInitial,
    ColumnProfile, FitMode, FitResult, TwoLevelFit,
};
pub use waist::{fit_beam_waists, simulate_image, TransmissionImage, WaistFit};
