//! Transmitted probe signal integrated over the coupling region.
//!
//! The detected region is the rectangle ±3 coupling waists wide, clipped to
//! ±4 cloud rms radii. The normalised signal is
//!
//! ```text
//! S/I₀ = (1/A) ∫ exp(−σ_P(δ; Ω(x,y)) n_col(x,y)) dx dy
//! ```
//!
//! evaluated by the midpoint rule on a tensor grid, with z integrated
//! analytically into the column density. Both Gaussians are symmetric under
//! x → −x and y → −y, so one quadrant is enough.

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::beam::{rabi_profile, BeamGeometry};
use super::cloud::{column_density, CloudModel};
use super::ladder::{probe_cross_section, LadderSystem};
use super::trace::{SpectrumTrace, Stage, ValueKind};
use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct QuadratureConfig {
    /// Transverse cells per axis.
    pub cells: usize,
    /// Half-width of the region, in coupling waists.
    pub beam_extent: f64,
    /// Upper bound on the half-width, in cloud rms radii.
    pub cloud_extent: f64,
}

impl Default for QuadratureConfig {
    fn default() -> Self {
        QuadratureConfig { cells: 64, beam_extent: 3.0, cloud_extent: 4.0 }
    }
}

impl QuadratureConfig {
    pub fn validate(&self) -> Result<()> {
        if self.cells < 2 || !(self.beam_extent > 0.0) || !(self.cloud_extent > 0.0) {
            return Err(Error::Config(format!("invalid quadrature settings {self:?}")));
        }
        Ok(())
    }

    /// Same region, `factor` times more cells per axis.
    pub fn refined(&self, factor: usize) -> Self {
        QuadratureConfig { cells: self.cells * factor, ..*self }
    }
}

/// Precomputed quadrature for a fixed beam shape and cloud; the peak Rabi
/// frequency and the ladder parameters stay free.
#[derive(Clone, Debug)]
pub struct SignalModel {
    /// Ω²/Ω_max² at each cell.
    intensity: Vec<f64>,
    column: Vec<f64>,
    /// Area fraction of each cell.
    weight: f64,
}

impl SignalModel {
    pub fn new(w_maj: f64, w_min: f64, cloud: &CloudModel, quad: &QuadratureConfig) -> Result<Self> {
        quad.validate()?;
        cloud.validate()?;
        if !(w_maj > 0.0 && w_min > 0.0) {
            return Err(Error::Domain(format!("beam waists must be positive (got {w_maj}, {w_min})")));
        }
        let half = quad.cells.div_ceil(2);
        let x_max = (quad.beam_extent * w_maj).min(quad.cloud_extent * cloud.sx);
        let y_max = (quad.beam_extent * w_min).min(quad.cloud_extent * cloud.sy);
        let (hx, hy) = (x_max / half as f64, y_max / half as f64);
        let unit_beam = BeamGeometry::with_rabi_max(w_maj, w_min, 1.0);

        let mut intensity = Vec::with_capacity(half * half);
        let mut column = Vec::with_capacity(half * half);
        for i in 0..half {
            let x = (i as f64 + 0.5) * hx;
            for j in 0..half {
                let y = (j as f64 + 0.5) * hy;
                intensity.push(rabi_profile(x, y, &unit_beam).powi(2));
                column.push(column_density(x, y, cloud));
            }
        }
        Ok(SignalModel { intensity, column, weight: 1.0 / (half * half) as f64 })
    }

    pub fn from_beam(beam: &BeamGeometry, cloud: &CloudModel, quad: &QuadratureConfig) -> Result<Self> {
        Self::new(beam.w_maj, beam.w_min, cloud, quad)
    }

    /// (n_col / n_col(0,0), area fraction) for every cell: all a two-level
    /// fit needs to know about the geometry.
    pub fn column_profile(&self, cloud: &CloudModel) -> Vec<(f64, f64)> {
        let peak = cloud.peak_column_density();
        self.column.iter().map(|&n| (n / peak, self.weight)).collect()
    }

    /// Normalised transmitted signal at probe detuning `delta`.
    pub fn transmission(&self, delta: f64, sys: &LadderSystem, rabi_max: f64) -> f64 {
        if rabi_max == 0.0 {
            let sigma2 = probe_cross_section(delta, sys, 0.0);
            return self.weight * self.column.iter().map(|&n| (-sigma2 * n).exp()).sum::<f64>();
        }
        let a = Complex64::new(sys.gamma, 2.0 * delta);
        let b = Complex64::new(sys.gamma3, 2.0 * (delta + sys.coupling_detuning));
        if b.norm_sqr() == 0.0 {
            return 1.0;
        }
        let coupling = rabi_max * rabi_max / b;
        let scale = sys.sigma0 * sys.gamma;
        let mut total = 0.0;
        for (&f, &n) in self.intensity.iter().zip(&self.column) {
            let z = a + coupling * f;
            total += (-scale * z.re / z.norm_sqr() * n).exp();
        }
        self.weight * total
    }

    pub fn spectrum(&self, grid: &[f64], sys: &LadderSystem, rabi_max: f64) -> Vec<f64> {
        grid.par_iter().map(|&d| self.transmission(d, sys, rabi_max)).collect()
    }
}

pub fn transmission_signal(
    delta: f64,
    sys: &LadderSystem,
    beam: &BeamGeometry,
    cloud: &CloudModel,
    quad: &QuadratureConfig,
) -> Result<f64> {
    sys.validate()?;
    beam.validate()?;
    Ok(SignalModel::from_beam(beam, cloud, quad)?.transmission(delta, sys, beam.rabi_max))
}

/// Transmission along the single ray through (x, y): the image a camera records.
pub fn local_transmission(x: f64, y: f64, delta: f64, sys: &LadderSystem, beam: &BeamGeometry, cloud: &CloudModel) -> f64 {
    let sigma = probe_cross_section(delta, sys, rabi_profile(x, y, beam));
    (-sigma * column_density(x, y, cloud)).exp()
}

pub fn simulate_spectrum(
    grid: &[f64],
    sys: &LadderSystem,
    beam: &BeamGeometry,
    cloud: &CloudModel,
    quad: &QuadratureConfig,
) -> Result<SpectrumTrace> {
    sys.validate()?;
    beam.validate()?;
    let model = SignalModel::from_beam(beam, cloud, quad)?;
    SpectrumTrace::new(grid.to_vec(), model.spectrum(grid, sys, beam.rabi_max), ValueKind::Transmission, Stage::Ideal)
}
