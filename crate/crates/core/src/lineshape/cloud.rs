use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Gaussian atom cloud, n(x,y,z) = n₀ exp(−x²/2s_x² − y²/2s_y² − z²/2s_z²).
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CloudModel {
    /// Peak density, m⁻³.
    pub peak_density: f64,
    pub sx: f64,
    pub sy: f64,
    pub sz: f64,
    pub atom_number: f64,
}

const TWO_PI_3_2: f64 = 15.749_609_945_722_419;

impl CloudModel {
    /// Spherical cloud holding `atom_number` atoms at peak density `peak_density`.
    pub fn spherical(peak_density: f64, atom_number: f64) -> Result<Self> {
        if !(peak_density > 0.0 && atom_number > 0.0) {
            return Err(Error::Domain("cloud density and atom number must be positive".into()));
        }
        let s = (atom_number / (peak_density * TWO_PI_3_2)).cbrt();
        Ok(CloudModel { peak_density, sx: s, sy: s, sz: s, atom_number })
    }

    /// 6×10⁹ cm⁻³ peak density, 3×10⁶ atoms.
    pub fn paper_default() -> Self {
        CloudModel::spherical(6e15, 3e6).expect("positive inputs")
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.peak_density >= 0.0 && self.sx > 0.0 && self.sy > 0.0 && self.sz > 0.0) {
            return Err(Error::Domain(format!("invalid cloud {self:?}")));
        }
        let implied = self.peak_density * TWO_PI_3_2 * self.sx * self.sy * self.sz;
        if self.atom_number > 0.0 && ((implied - self.atom_number) / self.atom_number).abs() > 0.01 {
            return Err(Error::Domain(format!(
                "cloud atom number {} inconsistent with density and radii ({implied:.4e})",
                self.atom_number
            )));
        }
        Ok(())
    }

    pub fn peak_column_density(&self) -> f64 {
        self.peak_density * (2.0 * std::f64::consts::PI).sqrt() * self.sz
    }
}

/// ∫ n dz along the probe axis, m⁻².
pub fn column_density(x: f64, y: f64, cloud: &CloudModel) -> f64 {
    cloud.peak_column_density() * (-(x * x) / (2.0 * cloud.sx * cloud.sx) - (y * y) / (2.0 * cloud.sy * cloud.sy)).exp()
}
