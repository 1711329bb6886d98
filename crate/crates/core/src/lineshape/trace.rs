use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum ValueKind {
    /// Probe absorption cross-section, m².
    CrossSection,
    /// Transmitted probe power relative to the incident power.
    Transmission,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Stage {
    /// Straight from the forward model.
    Ideal,
    /// After the laser-linewidth and detector-bandwidth response.
    Instrumented,
}

impl fmt::Display for ValueKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ValueKind::CrossSection => "cross_section",
            ValueKind::Transmission => "transmission",
        })
    }
}

impl fmt::Display for Stage {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Stage::Ideal => "ideal",
            Stage::Instrumented => "instrumented",
        })
    }
}

/// A probe spectrum: values sampled at strictly increasing probe detunings (rad/s).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SpectrumTrace {
    pub detuning: Vec<f64>,
    pub value: Vec<f64>,
    pub kind: ValueKind,
    pub stage: Stage,
}

impl SpectrumTrace {
    pub fn new(detuning: Vec<f64>, value: Vec<f64>, kind: ValueKind, stage: Stage) -> Result<Self> {
        if detuning.len() != value.len() {
            return Err(Error::Domain(format!(
                "trace has {} detunings but {} values",
                detuning.len(),
                value.len()
            )));
        }
        if let Some(i) = first_non_increasing(&detuning) {
            return Err(Error::Domain(format!("detunings not strictly increasing at sample {i}")));
        }
        Ok(SpectrumTrace { detuning, value, kind, stage })
    }

    pub fn len(&self) -> usize {
        self.detuning.len()
    }

    pub fn is_empty(&self) -> bool {
        self.detuning.is_empty()
    }
}

pub(crate) fn first_non_increasing(xs: &[f64]) -> Option<usize> {
    xs.windows(2).position(|w| !(w[1] > w[0])).map(|i| i + 1)
}

/// `points` equally spaced detunings from `start` to `stop` inclusive.
pub fn uniform_grid(start: f64, stop: f64, points: usize) -> Result<Vec<f64>> {
    if points < 2 || !(stop > start) {
        return Err(Error::Config(format!("sweep grid needs ≥ 2 points and stop > start ({start}..{stop}, {points})")));
    }
    let step = (stop - start) / (points - 1) as f64;
    Ok((0..points).map(|i| start + step * i as f64).collect())
}
