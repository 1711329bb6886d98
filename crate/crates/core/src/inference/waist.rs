//! Coupling-beam waists from an absorption image of the cloud.
//!
//! Where the coupling beam is strong the cloud turns transparent, leaving a
//! hole in the absorption image. The image is fitted pixel by pixel with the
//! single-ray transmission exp(−k·σ_P(δ; Ω(x−x₀, y−y₀))·n_col(x−x₀, y−y₀)).

use serde::{Deserialize, Serialize};

use super::lm::{levenberg_marquardt, LmConfig};
use super::spectrum::estimate_noise;
use crate::error::{Error, Result};
use crate::lineshape::{column_density, local_transmission, probe_cross_section, BeamGeometry, CloudModel, LadderSystem};

/// A transmission map on a square-pixel grid. Pixel (i, j) sits at
/// x = (i − (nx−1)/2)·pixel, y = (j − (ny−1)/2)·pixel; values are row-major
/// with y as the slow index.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TransmissionImage {
    pub nx: usize,
    pub ny: usize,
    /// Pixel pitch in the object plane, m.
    pub pixel_size: f64,
    /// Probe detuning the image was taken at, rad/s.
    pub probe_detuning: f64,
    pub values: Vec<f64>,
}

impl TransmissionImage {
    pub fn new(nx: usize, ny: usize, pixel_size: f64, probe_detuning: f64, values: Vec<f64>) -> Result<Self> {
        if nx == 0 || ny == 0 || values.len() != nx * ny {
            return Err(Error::Domain(format!("image {nx}×{ny} needs {} values, got {}", nx * ny, values.len())));
        }
        if !(pixel_size > 0.0) {
            return Err(Error::Domain(format!("pixel size must be positive, got {pixel_size}")));
        }
        Ok(TransmissionImage { nx, ny, pixel_size, probe_detuning, values })
    }

    pub fn position(&self, i: usize, j: usize) -> (f64, f64) {
        (
            (i as f64 - (self.nx as f64 - 1.0) / 2.0) * self.pixel_size,
            (j as f64 - (self.ny as f64 - 1.0) / 2.0) * self.pixel_size,
        )
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.values[j * self.nx + i]
    }
}

/// Noise-free image of the cloud with the coupling beam centred.
pub fn simulate_image(
    nx: usize,
    ny: usize,
    pixel_size: f64,
    probe_detuning: f64,
    sys: &LadderSystem,
    beam: &BeamGeometry,
    cloud: &CloudModel,
) -> Result<TransmissionImage> {
    sys.validate()?;
    beam.validate()?;
    cloud.validate()?;
    let mut img = TransmissionImage::new(nx, ny, pixel_size, probe_detuning, vec![0.0; nx * ny])?;
    for j in 0..ny {
        for i in 0..nx {
            let (x, y) = img.position(i, j);
            img.values[j * nx + i] = local_transmission(x, y, probe_detuning, sys, beam, cloud);
        }
    }
    Ok(img)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct WaistFit {
    pub w_maj: f64,
    pub sigma_w_maj: f64,
    pub w_min: f64,
    pub sigma_w_min: f64,
    pub rabi_max: f64,
    pub sigma_rabi_max: f64,
    /// Offset of beam and cloud centre from the image centre, m.
    pub x0: f64,
    pub y0: f64,
    /// Optical-depth scale relative to the supplied cloud.
    pub od_scale: f64,
    pub reduced_chi2: f64,
    pub iterations: usize,
}

/// Fits waists (along the image axes), peak Rabi frequency, centre offset and
/// an optical-depth scale. `prior` supplies the starting waists and Ω_max.
pub fn fit_beam_waists(
    image: &TransmissionImage,
    sys: &LadderSystem,
    cloud: &CloudModel,
    prior: &BeamGeometry,
    lm: &LmConfig,
) -> Result<WaistFit> {
    sys.validate()?;
    cloud.validate()?;
    if !(prior.w_maj > 0.0 && prior.w_min > 0.0 && prior.rabi_max > 0.0) {
        return Err(Error::Domain(format!("beam prior needs positive waists and Ω_max, got {prior:?}")));
    }
    check_contrast(image, sys, cloud)?;

    let delta = image.probe_detuning;
    let positions: Vec<(f64, f64)> =
        (0..image.ny).flat_map(|j| (0..image.nx).map(move |i| (i, j))).map(|(i, j)| image.position(i, j)).collect();
    let len = prior.w_maj;
    let model = |p: &[f64], x: f64, y: f64| {
        let beam = BeamGeometry::with_rabi_max(prior.w_maj * p[0].exp(), prior.w_min * p[1].exp(), prior.rabi_max * p[2].exp());
        let (dx, dy) = (x - p[3] * len, y - p[4] * len);
        let omega = beam.rabi_max * (-(dx * dx) / (beam.w_maj * beam.w_maj) - (dy * dy) / (beam.w_min * beam.w_min)).exp();
        (-p[5].exp() * probe_cross_section(delta, sys, omega) * column_density(dx, dy, cloud)).exp()
    };
    let resid = |p: &[f64]| Ok(positions.iter().zip(&image.values).map(|(&(x, y), &v)| model(p, x, y) - v).collect());
    let out = levenberg_marquardt(resid, &[0.0; 6], lm)?;
    let cov = out.covariance();
    let p = &out.params;
    let (w_maj, w_min, rabi) = (prior.w_maj * p[0].exp(), prior.w_min * p[1].exp(), prior.rabi_max * p[2].exp());
    Ok(WaistFit {
        w_maj,
        sigma_w_maj: w_maj * cov[(0, 0)].sqrt(),
        w_min,
        sigma_w_min: w_min * cov[(1, 1)].sqrt(),
        rabi_max: rabi,
        sigma_rabi_max: rabi * cov[(2, 2)].sqrt(),
        x0: p[3] * len,
        y0: p[4] * len,
        od_scale: p[5].exp(),
        reduced_chi2: out.reduced_chi2(),
        iterations: out.iterations,
    })
}

/// The hole must stand out: mean of the central 3×3 pixels above the
/// coupling-free transmission by more than three times the pixel noise.
fn check_contrast(image: &TransmissionImage, sys: &LadderSystem, cloud: &CloudModel) -> Result<()> {
    let (ci, cj) = (image.nx / 2, image.ny / 2);
    let mut sum = 0.0;
    let mut count = 0.0;
    for j in cj.saturating_sub(1)..=(cj + 1).min(image.ny - 1) {
        for i in ci.saturating_sub(1)..=(ci + 1).min(image.nx - 1) {
            sum += image.get(i, j);
            count += 1.0;
        }
    }
    let centre = sum / count;
    let dark = (-probe_cross_section(image.probe_detuning, sys, 0.0) * cloud.peak_column_density()).exp();
    let noise = estimate_noise(&image.values);
    let hole = centre - dark;
    if !(hole > 3.0 * noise) || !(hole > 1e-6) {
        return Err(Error::InsufficientContrast(format!("hole depth {hole:.3e} vs pixel noise {noise:.3e}")));
    }
    Ok(())
}
