use serde::{Deserialize, Serialize};

use crate::constants::{EPSILON_0, HBAR, SPEED_OF_LIGHT};
use crate::error::{Error, Result};

/// Elliptical Gaussian coupling beam. Waists are 1/e² intensity radii (m) along
/// the principal axes x (major) and y (minor).
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct BeamGeometry {
    pub w_maj: f64,
    pub w_min: f64,
    /// Total power, W.
    pub power: f64,
    /// Peak coupling Rabi frequency, rad/s.
    pub rabi_max: f64,
}

impl BeamGeometry {
    /// Beam whose peak Rabi frequency follows from power and transition dipole `mu` (C·m).
    pub fn from_power(w_maj: f64, w_min: f64, power: f64, mu: f64) -> Result<Self> {
        Ok(BeamGeometry { w_maj, w_min, power, rabi_max: rabi_max_from_power(power, w_maj, w_min, mu)? })
    }

    /// Beam with a given peak Rabi frequency; power is left at zero.
    pub fn with_rabi_max(w_maj: f64, w_min: f64, rabi_max: f64) -> Self {
        BeamGeometry { w_maj, w_min, power: 0.0, rabi_max }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.w_maj > 0.0 && self.w_min > 0.0) || !(self.power >= 0.0) || !(self.rabi_max >= 0.0) {
            return Err(Error::Domain(format!("invalid beam geometry {self:?}")));
        }
        Ok(())
    }
}

/// Ω_max = (2μ/ħ)·√(P / (π w_maj w_min c ε₀)), the peak field of the elliptical beam.
pub fn rabi_max_from_power(power: f64, w_maj: f64, w_min: f64, mu: f64) -> Result<f64> {
    if !(w_maj > 0.0 && w_min > 0.0) {
        return Err(Error::Domain(format!("beam waists must be positive (got {w_maj}, {w_min})")));
    }
    if !(power >= 0.0) || !(mu >= 0.0) {
        return Err(Error::Domain(format!("power and dipole must be non-negative (got {power}, {mu})")));
    }
    Ok(2.0 * mu / HBAR * (power / (std::f64::consts::PI * w_maj * w_min * SPEED_OF_LIGHT * EPSILON_0)).sqrt())
}

/// Local Rabi frequency Ω(x,y) = Ω_max·exp(−x²/w_maj² − y²/w_min²).
pub fn rabi_profile(x: f64, y: f64, beam: &BeamGeometry) -> f64 {
    beam.rabi_max * (-(x * x) / (beam.w_maj * beam.w_maj) - (y * y) / (beam.w_min * beam.w_min)).exp()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::constants::DIPOLE_AU;

    #[test]
    fn power_scaling() {
        assert_eq!(rabi_max_from_power(0.0, 240e-6, 172e-6, DIPOLE_AU).unwrap(), 0.0);
        let a = rabi_max_from_power(0.02, 240e-6, 172e-6, DIPOLE_AU).unwrap();
        let b = rabi_max_from_power(0.08, 240e-6, 172e-6, DIPOLE_AU).unwrap();
        assert!((b / a - 2.0).abs() < 1e-14);
        assert!(matches!(rabi_max_from_power(0.08, 0.0, 172e-6, DIPOLE_AU), Err(Error::Domain(_))));
    }

    #[test]
    fn reference_value() {
        // independent evaluation: 2·(e a0)/ħ · sqrt(P/(π w_maj w_min c ε0))
        let omega = rabi_max_from_power(0.08, 240e-6, 172e-6, DIPOLE_AU).unwrap();
        assert!((omega / 2.45e9 - 1.0).abs() < 0.01, "{omega:e}");
    }

    #[test]
    fn profile_convention() {
        let beam = BeamGeometry::with_rabi_max(240e-6, 172e-6, 1e8);
        assert_eq!(rabi_profile(0.0, 0.0, &beam), 1e8);
        assert!((rabi_profile(240e-6, 0.0, &beam) - 1e8 / std::f64::consts::E).abs() < 1e-3);
        let i_ratio = (rabi_profile(240e-6, 0.0, &beam) / 1e8).powi(2);
        assert!((i_ratio - (-2.0f64).exp()).abs() < 1e-15);
    }
}
