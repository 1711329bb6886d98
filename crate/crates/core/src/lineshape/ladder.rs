use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::constants::mhz_to_rad;
use crate::error::{Error, Result};

/// Parameters of the probe cross-section in the three-level ladder.
/// All rates and detunings are angular frequencies (rad/s).
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct LadderSystem {
    /// Width Γ of the intermediate state |2⟩.
    pub gamma: f64,
    /// Dephasing rate γ₃ of the Rydberg state |3⟩.
    pub gamma3: f64,
    /// Resonant two-level cross-section σ₀, m².
    pub sigma0: f64,
    /// Coupling-laser detuning Δ.
    pub coupling_detuning: f64,
    /// Probe saturation intensity, W/m².
    pub probe_saturation_intensity: f64,
}

impl Default for LadderSystem {
    /// ⁸⁷Rb 5S₁/₂ F=2 → 5P₃/₂ F=3 probe: Γ/2π = 6.065 MHz, σ₀ = 2.90×10⁻¹³ m²,
    /// γ₃/2π = 2.5 MHz, resonant coupling.
    fn default() -> Self {
        LadderSystem {
            gamma: mhz_to_rad(6.065),
            gamma3: mhz_to_rad(2.5),
            sigma0: 2.90e-13,
            coupling_detuning: 0.0,
            probe_saturation_intensity: 16.69,
        }
    }
}

impl LadderSystem {
    pub fn validate(&self) -> Result<()> {
        if !(self.gamma > 0.0) || !(self.gamma3 >= 0.0) || !(self.sigma0 > 0.0) || !self.coupling_detuning.is_finite() {
            return Err(Error::Domain(format!(
                "ladder system needs Γ > 0, γ₃ ≥ 0, σ₀ > 0 (got Γ={}, γ₃={}, σ₀={})",
                self.gamma, self.gamma3, self.sigma0
            )));
        }
        Ok(())
    }
}

/// Probe absorption cross-section (m²) at probe detuning `delta` with coupling
/// Rabi frequency `rabi` (both rad/s).
///
/// σ_P = (σ₀Γ/2)·2Re[ ((Γ + 2iδ) + Ω²/(γ₃ + 2i(δ+Δ)))⁻¹ ], normalised so that the
/// two-level line peaks at σ₀.
pub fn probe_cross_section(delta: f64, sys: &LadderSystem, rabi: f64) -> f64 {
    let a = Complex64::new(sys.gamma, 2.0 * delta);
    if rabi == 0.0 {
        return sys.sigma0 * sys.gamma * (a.re / a.norm_sqr());
    }
    let b = Complex64::new(sys.gamma3, 2.0 * (delta + sys.coupling_detuning));
    if b.norm_sqr() == 0.0 {
        // two-photon resonance without dephasing: perfect transparency
        return 0.0;
    }
    let z = a + rabi * rabi / b;
    sys.sigma0 * sys.gamma * (z.re / z.norm_sqr())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn two_level_limits() {
        let sys = LadderSystem::default();
        assert!((probe_cross_section(0.0, &sys, 0.0) / sys.sigma0 - 1.0).abs() < 1e-12);
        let half = probe_cross_section(sys.gamma / 2.0, &sys, 0.0);
        assert!((half / sys.sigma0 - 0.5).abs() < 1e-12);
        let mut detuned = sys;
        detuned.coupling_detuning = 1e9;
        assert!((probe_cross_section(0.0, &detuned, 0.0) / sys.sigma0 - 1.0).abs() < 1e-12);
    }

    #[test]
    fn removable_singularity() {
        let sys = LadderSystem { gamma3: 0.0, coupling_detuning: 3e7, ..LadderSystem::default() };
        let v = probe_cross_section(-3e7, &sys, 0.0);
        assert!(v.is_finite() && v > 0.0);
        assert_eq!(probe_cross_section(-3e7, &sys, 1e7), 0.0);
    }

    #[test]
    fn at_doublet_for_strong_coupling() {
        let mut sys = LadderSystem::default();
        sys.gamma3 = sys.gamma / 100.0;
        let rabi = 10.0 * sys.gamma;
        let n = 40001;
        let span = 12.0 * sys.gamma;
        let xs: Vec<f64> = (0..n).map(|i| -span / 2.0 + span * i as f64 / (n - 1) as f64).collect();
        let ys: Vec<f64> = xs.iter().map(|&d| probe_cross_section(d, &sys, rabi)).collect();
        let mut peaks = Vec::new();
        for i in 1..n - 1 {
            if ys[i] > ys[i - 1] && ys[i] >= ys[i + 1] {
                peaks.push(xs[i]);
            }
        }
        assert_eq!(peaks.len(), 2, "{peaks:?}");
        for (p, expect) in peaks.iter().zip([-rabi / 2.0, rabi / 2.0]) {
            assert!(((p - expect) / expect).abs() < 0.02);
        }
    }
}
