//! Inward Numerov integration of the radial Schrödinger equation.
//!
//! The equation for the reduced radial function P(r) is solved on a grid
//! uniform in x = √r. With P(r) = x^{1/2} X(x) the first-derivative term
//! disappears and
//!
//! ```text
//! X''(x) = [ 8x² (U(x²) − E) + 3/(4x²) ] X(x)
//! ```
//!
//! where U already contains the centrifugal barrier. Integration starts in the
//! classically forbidden tail at r_out = 2n(n+15) and runs inwards to
//! r_in = max(α_c^{1/3}, 0.05). If the solution starts growing again inside the
//! inner forbidden region (the irregular solution taking over) it is truncated
//! to zero from that point inwards.

use log::warn;
use serde::{Deserialize, Serialize};

use super::potential::{potential, ModelTag};
use super::species::{binding_energy, effective_n, SpeciesModel};
use super::state::RydbergState;
use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct NumerovConfig {
    /// Step in x = √r.
    pub step: f64,
    /// Lower bound on the inner radius, a.u.
    pub min_inner_radius: f64,
}

impl Default for NumerovConfig {
    fn default() -> Self {
        NumerovConfig { step: 0.01, min_inner_radius: 0.05 }
    }
}

/// Reduced radial wavefunction P(r) = r R(r) on a grid uniform in √r.
///
/// Grid point `k` sits at x = (first_index + k)·step, so functions computed
/// with the same step share grid points wherever they overlap.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RadialWavefunction {
    pub state: RydbergState,
    pub energy: f64,
    pub step: f64,
    pub first_index: usize,
    pub r: Vec<f64>,
    pub p: Vec<f64>,
    pub nodes: usize,
    pub normalized: bool,
    /// Set when a hydrogenic calculation does not show n − l − 1 nodes.
    pub node_warning: bool,
}

impl RadialWavefunction {
    pub fn x(&self, k: usize) -> f64 {
        (self.first_index + k) as f64 * self.step
    }

    pub fn last_index(&self) -> usize {
        self.first_index + self.p.len() - 1
    }

    /// ∫ P² dr by the trapezoidal rule on the x grid.
    pub fn norm(&self) -> f64 {
        trapezoid_x(self, |k| self.p[k] * self.p[k])
    }
}

/// Trapezoidal ∫ f dr = ∫ f · 2x dx over the wavefunction's own grid.
fn trapezoid_x(w: &RadialWavefunction, f: impl Fn(usize) -> f64) -> f64 {
    let n = w.p.len();
    if n < 2 {
        return 0.0;
    }
    let mut s = 0.0;
    for k in 0..n {
        let weight = if k == 0 || k == n - 1 { 0.5 } else { 1.0 };
        s += weight * f(k) * 2.0 * w.x(k);
    }
    s * w.step
}

pub fn outer_radius(n: u32) -> f64 {
    2.0 * n as f64 * (n as f64 + 15.0)
}

pub fn inner_radius(species: &SpeciesModel, cfg: &NumerovConfig) -> f64 {
    species.core_polarizability_au.cbrt().max(cfg.min_inner_radius)
}

pub fn numerov_radial(state: &RydbergState, species: &SpeciesModel, model: &ModelTag) -> Result<RadialWavefunction> {
    numerov_radial_with(state, species, model, &NumerovConfig::default())
}

pub fn numerov_radial_with(
    state: &RydbergState,
    species: &SpeciesModel,
    model: &ModelTag,
    cfg: &NumerovConfig,
) -> Result<RadialWavefunction> {
    if let ModelTag::External(name) = model {
        return Err(Error::Unsupported(format!("external model `{name}` has no wavefunctions")));
    }
    state.validate()?;
    if !(cfg.step > 0.0) {
        return Err(Error::Config(format!("Numerov step must be positive, got {}", cfg.step)));
    }
    let energy = binding_energy(state, species)?;
    let h = cfg.step;
    let x_in = inner_radius(species, cfg).sqrt();
    let x_out = outer_radius(state.n).sqrt();
    let i0 = (x_in / h).ceil() as usize;
    let i1 = (x_out / h).floor() as usize;
    if i1 < i0 + 3 {
        return Err(Error::Numerical(format!("grid too coarse for {state}: {} points", i1 + 1 - i0.min(i1 + 1))));
    }
    let len = i1 - i0 + 1;
    let l = state.l;

    let mut kfun = Vec::with_capacity(len);
    for k in 0..len {
        let x = (i0 + k) as f64 * h;
        let u = potential(x * x, l, species, model)?;
        kfun.push(8.0 * x * x * (u - energy) + 0.75 / (x * x));
    }

    let h2 = h * h / 12.0;
    let mut xs = vec![0.0; len];
    xs[len - 1] = 1e-30;
    xs[len - 2] = xs[len - 1] * (h * kfun[len - 1].max(0.0).sqrt()).exp().max(1.0 + 1e-12);

    let mut seen_allowed = false;
    let mut truncated_at = None;
    for k in (0..len - 2).rev() {
        let next = (2.0 * xs[k + 1] * (1.0 + 5.0 * h2 * kfun[k + 1]) - xs[k + 2] * (1.0 - h2 * kfun[k + 2]))
            / (1.0 - h2 * kfun[k]);
        if !next.is_finite() {
            return Err(Error::Numerical(format!(
                "Numerov diverged for {state} ({model}) at r = {:.4} a.u., E = {energy:e}",
                ((i0 + k) as f64 * h).powi(2)
            )));
        }
        xs[k] = next;
        if kfun[k] < 0.0 {
            seen_allowed = true;
        }
        if seen_allowed && kfun[k] > 0.0 && xs[k].abs() > xs[k + 1].abs() {
            truncated_at = Some(k);
            break;
        }
        if next.abs() > 1e150 {
            for v in &mut xs[k..] {
                *v *= 1e-150;
            }
        }
    }
    if let Some(k) = truncated_at {
        for v in &mut xs[..=k] {
            *v = 0.0;
        }
    }
    // The regular solution cannot cross zero inside the inner forbidden region,
    // so a crossing there is the irregular solution surfacing.
    if let Some(turn) = kfun.iter().position(|&kv| kv < 0.0) {
        if let Some(k) = (0..turn).rev().find(|&k| xs[k] != 0.0 && xs[k + 1] != 0.0 && xs[k].signum() != xs[k + 1].signum()) {
            for v in &mut xs[..=k] {
                *v = 0.0;
            }
        }
    }

    let mut w = RadialWavefunction {
        state: *state,
        energy,
        step: h,
        first_index: i0,
        r: (0..len).map(|k| ((i0 + k) as f64 * h).powi(2)).collect(),
        p: Vec::new(),
        nodes: 0,
        normalized: false,
        node_warning: false,
    };
    w.p = (0..len).map(|k| w.x(k).sqrt() * xs[k]).collect();

    let norm = w.norm();
    if !(norm > 0.0) || !norm.is_finite() {
        return Err(Error::Numerical(format!("cannot normalise wavefunction for {state} (norm {norm:e})")));
    }
    let scale = norm.sqrt().recip();
    for v in &mut w.p {
        *v *= scale;
    }
    w.normalized = true;
    w.nodes = count_nodes(&w.p);

    let hydrogenic = species.core_charge == 1
        && species.core_polarizability_au == 0.0
        && effective_n(state, species).map(|ns| ns == state.n as f64).unwrap_or(false);
    if hydrogenic && w.nodes != (state.n - state.l - 1) as usize {
        w.node_warning = true;
        warn!("{state}: {} nodes, expected {}", w.nodes, state.n - state.l - 1);
    }
    Ok(w)
}

/// Sign changes, ignoring values below 1e-10 of the peak.
fn count_nodes(p: &[f64]) -> usize {
    let peak = p.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let floor = peak * 1e-10;
    let mut last = 0.0f64;
    let mut nodes = 0;
    for &v in p {
        if v.abs() <= floor {
            continue;
        }
        if last != 0.0 && v.signum() != last.signum() {
            nodes += 1;
        }
        last = v;
    }
    nodes
}

/// ∫ P_a(r) rᵖ P_b(r) dr over the overlap of the two grids.
pub fn radial_overlap(a: &RadialWavefunction, b: &RadialWavefunction, power: i32) -> Result<f64> {
    if (a.step - b.step).abs() > 1e-15 * a.step {
        return Err(Error::Numerical("wavefunctions live on different grids".into()));
    }
    let lo = a.first_index.max(b.first_index);
    let hi = a.last_index().min(b.last_index());
    if hi <= lo {
        return Ok(0.0);
    }
    let h = a.step;
    let mut s = 0.0;
    for i in lo..=hi {
        let x = i as f64 * h;
        let r = x * x;
        let weight = if i == lo || i == hi { 0.5 } else { 1.0 };
        s += weight * a.p[i - a.first_index] * b.p[i - b.first_index] * r.powi(power) * 2.0 * x;
    }
    Ok(s * h)
}
