//! Detection-chain response: laser linewidth and the detector low-pass filter.
//!
//! The ideal trace is treated as piecewise linear between samples and held
//! constant beyond its ends. The Lorentzian convolution of that function is
//! exact (closed form per segment) and is precomputed as a matrix, which makes
//! repeated application inside a fit cheap. The single-pole filter acts in time,
//! with detuning mapped to time through the sweep rate span/T; its recursion is
//! the exact response to the same piecewise-linear input.

use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::trace::{SpectrumTrace, Stage};
use crate::constants::mhz_to_rad;
use crate::error::{Error, Result};

/// Sweep span that turns the natural 6.065 MHz probe line into a fitted
/// 9 MHz line with the default filter, sweep time and linewidth, MHz.
pub const CALIBRATED_SWEEP_SPAN_MHZ: f64 = 668.0;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum SweepDirection {
    Up,
    Down,
}

impl fmt::Display for SweepDirection {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            SweepDirection::Up => "up",
            SweepDirection::Down => "down",
        })
    }
}

impl FromStr for SweepDirection {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "up" => Ok(SweepDirection::Up),
            "down" => Ok(SweepDirection::Down),
            other => Err(Error::Config(format!("sweep direction must be `up` or `down`, got `{other}`"))),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct InstrumentModel {
    /// Probe detuning covered in one sweep, rad/s.
    pub sweep_span: f64,
    /// Duration of one sweep, s.
    pub sweep_time: f64,
    /// Low-pass corner frequency, Hz. Infinite disables the filter.
    pub corner_frequency: f64,
    /// Combined laser linewidth (Lorentzian FWHM), Hz.
    pub laser_linewidth: f64,
    pub direction: SweepDirection,
}

impl Default for InstrumentModel {
    fn default() -> Self {
        InstrumentModel {
            sweep_span: mhz_to_rad(CALIBRATED_SWEEP_SPAN_MHZ),
            sweep_time: 1e-3,
            corner_frequency: 35e3,
            laser_linewidth: 450e3,
            direction: SweepDirection::Up,
        }
    }
}

impl InstrumentModel {
    /// No broadening and no filtering.
    pub fn identity() -> Self {
        InstrumentModel { corner_frequency: f64::INFINITY, laser_linewidth: 0.0, ..Self::default() }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.sweep_span > 0.0 && self.sweep_span.is_finite())
            || !(self.sweep_time > 0.0 && self.sweep_time.is_finite())
            || !(self.corner_frequency > 0.0)
            || !(self.laser_linewidth >= 0.0 && self.laser_linewidth.is_finite())
        {
            return Err(Error::Domain(format!("invalid instrument model {self:?}")));
        }
        Ok(())
    }

    /// Detuning swept per unit time, rad/s².
    pub fn sweep_rate(&self) -> f64 {
        self.sweep_span / self.sweep_time
    }

    /// Filter time constant 1/(2πf_c), s.
    pub fn time_constant(&self) -> f64 {
        1.0 / (2.0 * PI * self.corner_frequency)
    }
}

/// The instrument response on a fixed detuning grid.
#[derive(Clone, Debug)]
pub struct InstrumentResponse {
    n: usize,
    /// Row-major Lorentzian matrix; `None` for zero linewidth.
    lorentz: Option<Vec<f64>>,
    /// Per-step (α, τ/h) in sweep order; empty for an infinite corner frequency.
    filter: Vec<(f64, f64)>,
    direction: SweepDirection,
}

impl InstrumentResponse {
    pub fn new(detuning: &[f64], inst: &InstrumentModel) -> Result<Self> {
        inst.validate()?;
        let n = detuning.len();
        let hwhm = PI * inst.laser_linewidth;
        let lorentz = (hwhm > 0.0 && n > 1).then(|| lorentzian_matrix(detuning, hwhm));
        let filter = if inst.corner_frequency.is_finite() && n > 1 {
            let tau = inst.time_constant();
            let rate = inst.sweep_rate();
            let mut steps: Vec<(f64, f64)> = detuning
                .windows(2)
                .map(|w| {
                    let h = (w[1] - w[0]) / rate;
                    ((-h / tau).exp(), tau / h)
                })
                .collect();
            if inst.direction == SweepDirection::Down {
                steps.reverse();
            }
            steps
        } else {
            Vec::new()
        };
        Ok(InstrumentResponse { n, lorentz, filter, direction: inst.direction })
    }

    pub fn apply(&self, values: &[f64]) -> Vec<f64> {
        assert_eq!(values.len(), self.n, "trace length does not match the response grid");
        let mut y = match &self.lorentz {
            Some(m) => m.chunks_exact(self.n).map(|row| row.iter().zip(values).map(|(a, b)| a * b).sum()).collect(),
            None => values.to_vec(),
        };
        if !self.filter.is_empty() {
            if self.direction == SweepDirection::Down {
                y.reverse();
            }
            low_pass(&mut y, &self.filter);
            if self.direction == SweepDirection::Down {
                y.reverse();
            }
        }
        y
    }
}

/// First-order low-pass with first-order-hold input, in place. Starts in
/// steady state with the first sample.
fn low_pass(x: &mut [f64], steps: &[(f64, f64)]) {
    let mut prev_x = x[0];
    let mut y = x[0];
    for (k, &(alpha, tau_over_h)) in steps.iter().enumerate() {
        let xn = x[k + 1];
        y = alpha * y + xn - alpha * prev_x - (xn - prev_x) * tau_over_h * (1.0 - alpha);
        prev_x = xn;
        x[k + 1] = y;
    }
}

/// M[i][j] such that Σ_j M[i][j] f_j = ∫ f(s) L(δ_i − s) ds for the piecewise
/// linear interpolant of f, held constant outside the grid.
fn lorentzian_matrix(grid: &[f64], g: f64) -> Vec<f64> {
    let n = grid.len();
    let a = |t: f64| (t / g).atan() / PI;
    let b = |t: f64| g / (2.0 * PI) * (t * t + g * g).ln();
    let mut m = vec![0.0; n * n];
    for (i, &d) in grid.iter().enumerate() {
        let row = &mut m[i * n..(i + 1) * n];
        row[0] += a(grid[0] - d) + 0.5;
        row[n - 1] += 0.5 - a(grid[n - 1] - d);
        for k in 0..n - 1 {
            let (ta, tb) = (grid[k] - d, grid[k + 1] - d);
            let width = grid[k + 1] - grid[k];
            let i0 = a(tb) - a(ta);
            let i1 = b(tb) - b(ta);
            let upper = ((d - grid[k]) * i0 + i1) / width;
            row[k + 1] += upper;
            row[k] += i0 - upper;
        }
    }
    m
}

pub fn apply_instrument(trace: &SpectrumTrace, inst: &InstrumentModel) -> Result<SpectrumTrace> {
    if trace.stage == Stage::Instrumented {
        return Err(Error::Domain("trace already carries the instrument response".into()));
    }
    let resp = InstrumentResponse::new(&trace.detuning, inst)?;
    Ok(SpectrumTrace {
        detuning: trace.detuning.clone(),
        value: resp.apply(&trace.value),
        kind: trace.kind,
        stage: Stage::Instrumented,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lineshape::trace::{uniform_grid, ValueKind};

    fn dip(grid: &[f64], center: f64, width: f64) -> Vec<f64> {
        grid.iter().map(|d| 1.0 - 0.5 / (1.0 + ((d - center) / width).powi(2))).collect()
    }

    fn centroid(grid: &[f64], v: &[f64]) -> f64 {
        let w: Vec<f64> = v.iter().map(|y| 1.0 - y).collect();
        grid.iter().zip(&w).map(|(d, a)| d * a).sum::<f64>() / w.iter().sum::<f64>()
    }

    #[test]
    fn identity_instrument() {
        let grid = uniform_grid(mhz_to_rad(-50.0), mhz_to_rad(50.0), 201).unwrap();
        let v = dip(&grid, 0.0, mhz_to_rad(3.0));
        let t = SpectrumTrace::new(grid, v.clone(), ValueKind::Transmission, Stage::Ideal).unwrap();
        let out = apply_instrument(&t, &InstrumentModel::identity()).unwrap();
        for (a, b) in out.value.iter().zip(&v) {
            assert!((a - b).abs() < 1e-9);
        }
        assert_eq!(out.stage, Stage::Instrumented);
    }

    #[test]
    fn lorentzian_preserves_constants_and_area() {
        let grid = uniform_grid(-200.0, 200.0, 2001).unwrap();
        let m = lorentzian_matrix(&grid, 2.0);
        for row in m.chunks_exact(grid.len()) {
            assert!((row.iter().sum::<f64>() - 1.0).abs() < 1e-12);
        }
        // Lorentzian ⊗ Lorentzian: widths add
        let f: Vec<f64> = grid.iter().map(|d| 3.0 / PI / (d * d + 9.0)).collect();
        let n = grid.len();
        for i in (950..1050).step_by(10) {
            let got: f64 = (0..n).map(|j| m[i * n + j] * f[j]).sum();
            let exact = 5.0 / PI / (grid[i] * grid[i] + 25.0);
            assert!((got - exact).abs() < 1e-3 * exact, "{got} vs {exact}");
        }
    }

    #[test]
    fn filter_matches_impulse_response_convolution() {
        // oracle: direct quadrature of y(t) = ∫ x(t') e^{-(t-t')/τ}/τ dt' on a fine grid
        let tau = 1.0;
        let grid = uniform_grid(0.0, 20.0, 41).unwrap();
        let x: Vec<f64> = grid.iter().map(|t| if *t < 5.0 { 0.0 } else { (t - 5.0).min(3.0) }).collect();
        let steps: Vec<(f64, f64)> = grid.windows(2).map(|w| ((-(w[1] - w[0]) / tau).exp(), tau / (w[1] - w[0]))).collect();
        let mut y = x.clone();
        low_pass(&mut y, &steps);
        for (k, &t) in grid.iter().enumerate() {
            let m = 20000;
            let h = t / m as f64;
            let interp = |s: f64| if s < 5.0 { 0.0 } else { (s - 5.0).min(3.0) };
            let mut acc = 0.0;
            for j in 0..m {
                let s = (j as f64 + 0.5) * h;
                acc += interp(s) * (-(t - s) / tau).exp() / tau * h;
            }
            assert!((y[k] - acc).abs() < 1e-6, "t={t}: {} vs {acc}", y[k]);
        }
    }

    #[test]
    fn filter_shifts_centroid_along_sweep() {
        let inst = InstrumentModel { laser_linewidth: 0.0, ..InstrumentModel::default() };
        let expected = inst.sweep_rate() * inst.time_constant();
        let grid = uniform_grid(mhz_to_rad(-150.0), mhz_to_rad(150.0), 3001).unwrap();
        let v = dip(&grid, 0.0, mhz_to_rad(4.5));
        let c0 = centroid(&grid, &v);
        for (dir, sign) in [(SweepDirection::Up, 1.0), (SweepDirection::Down, -1.0)] {
            let resp = InstrumentResponse::new(&grid, &InstrumentModel { direction: dir, ..inst }).unwrap();
            let shift = centroid(&grid, &resp.apply(&v)) - c0;
            assert!((shift - sign * expected).abs() < 0.02 * expected, "{dir}: {shift} vs {expected}");
        }
    }

    #[test]
    fn invalid_models_rejected() {
        let bad = InstrumentModel { sweep_time: 0.0, ..InstrumentModel::default() };
        assert!(bad.validate().is_err());
        assert_eq!("Down".parse::<SweepDirection>().unwrap(), SweepDirection::Down);
    }
}
