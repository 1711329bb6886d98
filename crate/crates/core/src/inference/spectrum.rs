//! Fits of probe spectra: the two-level linewidth and the Autler–Townes model.

use serde::{Deserialize, Serialize};

use super::lm::{levenberg_marquardt, LmConfig, LmOutcome};
use crate::constants::{mhz_to_rad, rad_to_mhz};
use crate::error::{Error, Result};
use crate::lineshape::{
    apply_instrument, simulate_spectrum, BeamGeometry, CloudModel, InstrumentModel, InstrumentResponse, LadderSystem,
    QuadratureConfig, SignalModel, SpectrumTrace, ValueKind,
};

/// Robust noise level of a trace from the median absolute first difference.
pub fn estimate_noise(values: &[f64]) -> f64 {
    if values.len() < 3 {
        return 0.0;
    }
    let mut d: Vec<f64> = values.windows(2).map(|w| (w[1] - w[0]).abs()).collect();
    d.sort_by(f64::total_cmp);
    1.4826 * d[d.len() / 2] / 2f64.sqrt()
}

fn median(values: &[f64]) -> f64 {
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    v[v.len() / 2]
}

fn require_transmission(trace: &SpectrumTrace) -> Result<()> {
    if trace.kind != ValueKind::Transmission {
        return Err(Error::Domain("spectrum fits need a transmission trace".into()));
    }
    if trace.len() < 8 {
        return Err(Error::InsufficientData(format!("trace has only {} samples", trace.len())));
    }
    Ok(())
}

fn check_signal(trace: &SpectrumTrace) -> Result<(f64, f64)> {
    let base = median(&trace.value);
    // a short running mean keeps single noisy samples from posing as a dip
    let min = trace.value.windows(5).map(|w| w.iter().sum::<f64>() / 5.0).fold(f64::INFINITY, f64::min);
    let depth = base - min;
    let noise = estimate_noise(&trace.value);
    if !(depth > 3.0 * noise) || !(depth > 1e-9 * base.abs()) {
        return Err(Error::NoSignal(format!("dip depth {depth:.3e} vs noise {noise:.3e}")));
    }
    Ok((depth, noise))
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TwoLevelFit {
    /// Effective Lorentzian width (FWHM of the cross-section), rad/s.
    pub gamma: f64,
    #[serde(with = "crate::serde_float::scalar")]
    pub sigma_gamma: f64,
    /// Line centre, rad/s.
    pub center: f64,
    /// Peak optical depth along the central ray.
    pub optical_depth: f64,
    pub baseline: f64,
    #[serde(with = "crate::serde_float::scalar")]
    pub reduced_chi2: f64,
    pub iterations: usize,
}

/// Distribution of column density over the detected region, as
/// (n_col / peak, area fraction) pairs.
#[derive(Clone, Debug, PartialEq)]
pub struct ColumnProfile(pub Vec<(f64, f64)>);

impl ColumnProfile {
    /// A single uniform slab.
    pub fn uniform() -> Self {
        ColumnProfile(vec![(1.0, 1.0)])
    }

    pub fn for_region(w_maj: f64, w_min: f64, cloud: &CloudModel, quad: &QuadratureConfig) -> Result<Self> {
        Ok(ColumnProfile(SignalModel::new(w_maj, w_min, cloud, quad)?.column_profile(cloud)))
    }
}

/// Fits the Ω = 0 model: baseline × region average of
/// exp(−OD·c·Γ²/(Γ² + 4(δ − δ_c)²)), c the relative column density.
///
/// The detection chain is not part of this model, so an instrumented trace
/// yields the broadened width.
pub fn fit_two_level(trace: &SpectrumTrace, profile: &ColumnProfile) -> Result<TwoLevelFit> {
    fit_two_level_with(trace, profile, &LmConfig::default())
}

pub fn fit_two_level_with(trace: &SpectrumTrace, profile: &ColumnProfile, lm: &LmConfig) -> Result<TwoLevelFit> {
    require_transmission(trace)?;
    let (depth, _) = check_signal(trace)?;
    let nodes = &profile.0;
    let d = &trace.detuning;
    let y = &trace.value;
    let base0 = median(y);

    // seeds: centre at the minimum, width from the half-depth crossing
    let imin = (0..y.len()).min_by(|&a, &b| y[a].total_cmp(&y[b])).unwrap_or(0);
    let half = base0 - depth / 2.0;
    let mut lo = imin;
    while lo > 0 && y[lo] < half {
        lo -= 1;
    }
    let mut hi = imin;
    while hi + 1 < y.len() && y[hi] < half {
        hi += 1;
    }
    let width0 = (d[hi] - d[lo]).max(d[1] - d[0]);
    let od0 = -(1.0 - depth / base0).max(1e-6).ln() * 2.0;
    let scale = width0;

    let model = |p: &[f64], delta: f64| {
        let (g, c, od, b) = (p[0].exp() * scale, p[1] * scale, p[2].exp(), p[3]);
        let x = 2.0 * (delta - c) / g;
        let lor = 1.0 / (1.0 + x * x);
        b * nodes.iter().map(|&(rel, w)| w * (-od * rel * lor).exp()).sum::<f64>()
    };
    let resid = |p: &[f64]| Ok(d.iter().zip(y).map(|(&di, &yi)| model(p, di) - yi).collect());
    let p0 = [0.0, d[imin] / scale, od0.ln(), base0];
    let out = levenberg_marquardt(resid, &p0, lm)?;
    let cov = out.covariance();
    let gamma = out.params[0].exp() * scale;
    Ok(TwoLevelFit {
        gamma,
        sigma_gamma: gamma * cov[(0, 0)].sqrt(),
        center: out.params[1] * scale,
        optical_depth: out.params[2].exp(),
        baseline: out.params[3],
        reduced_chi2: out.reduced_chi2(),
        iterations: out.iterations,
    })
}

/// Sweep span (rad/s) for which the instrumented two-level line of `sys` fits
/// to `target_width`. Bisection over 100–1000 MHz.
pub fn calibrate_sweep_span(
    sys: &LadderSystem,
    beam: &BeamGeometry,
    cloud: &CloudModel,
    template: &InstrumentModel,
    grid: &[f64],
    target_width: f64,
) -> Result<f64> {
    let quad = QuadratureConfig::default();
    let profile = ColumnProfile::for_region(beam.w_maj, beam.w_min, cloud, &quad)?;
    let dark = BeamGeometry { rabi_max: 0.0, ..*beam };
    let ideal = simulate_spectrum(grid, sys, &dark, cloud, &quad)?;
    let width_at = |span_mhz: f64| -> Result<f64> {
        let inst = InstrumentModel { sweep_span: mhz_to_rad(span_mhz), ..*template };
        Ok(fit_two_level(&apply_instrument(&ideal, &inst)?, &profile)?.gamma)
    };
    let (mut lo, mut hi) = (100.0, 1000.0);
    let (wlo, whi) = (width_at(lo)?, width_at(hi)?);
    if !(wlo <= target_width && target_width <= whi) {
        return Err(Error::Numerical(format!(
            "target width {:.3} MHz outside [{:.3}, {:.3}] MHz reachable over 100–1000 MHz spans",
            rad_to_mhz(target_width),
            rad_to_mhz(wlo),
            rad_to_mhz(whi)
        )));
    }
    while hi - lo > 1e-3 {
        let mid = 0.5 * (lo + hi);
        if width_at(mid)? < target_width {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(mhz_to_rad(0.5 * (lo + hi)))
}

/// Starting point for an Autler–Townes fit.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct AtInitial {
    pub rabi_max: f64,
    pub gamma3: f64,
    pub coupling_detuning: f64,
    pub amplitude: f64,
    pub baseline: f64,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct AtFitOptions {
    pub quadrature: QuadratureConfig,
    pub lm: LmConfig,
    /// Auto-seeded when absent.
    pub initial: Option<AtInitial>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FitMode {
    /// Natural Γ with the detection chain in the forward model.
    InstrumentModel,
    /// Γ fixed at the broadened two-level width, no detection chain.
    BroadenedGamma,
}

/// Result of an Autler–Townes fit. Rates in rad/s.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FitResult {
    pub mode: FitMode,
    pub gamma: f64,
    pub rabi_max: f64,
    pub gamma3: f64,
    pub coupling_detuning: f64,
    pub amplitude: f64,
    pub baseline: f64,
    #[serde(with = "crate::serde_float::scalar")]
    pub sigma_rabi_max: f64,
    #[serde(with = "crate::serde_float::scalar")]
    pub sigma_gamma3: f64,
    #[serde(with = "crate::serde_float::scalar")]
    pub sigma_coupling_detuning: f64,
    #[serde(with = "crate::serde_float::scalar")]
    pub sigma_amplitude: f64,
    #[serde(with = "crate::serde_float::scalar")]
    pub sigma_baseline: f64,
    /// Covariance of (Ω_max, γ₃, Δ, amplitude, baseline).
    #[serde(with = "crate::serde_float::matrix")]
    pub covariance: Vec<Vec<f64>>,
    pub reduced_chi2: f64,
    pub converged: bool,
    pub iterations: usize,
    /// Length of the accepted-step cost trace.
    pub trace_length: usize,
    /// Parameters that ended at a boundary of their domain.
    pub at_bound: Vec<String>,
}

const PARAM_NAMES: [&str; 5] = ["rabi_max", "gamma3", "coupling_detuning", "amplitude", "baseline"];

/// Forward model for the fit: baseline − amplitude·(1 − R[S]), with R the
/// detection chain (or identity).
struct AtModel<'a> {
    signal: SignalModel,
    response: Option<InstrumentResponse>,
    sys: LadderSystem,
    grid: &'a [f64],
}

impl AtModel<'_> {
    /// Scaled parameters: (ln(Ω/Γ), γ₃/Γ, Δ/Γ, amplitude, baseline).
    fn physical(&self, p: &[f64]) -> (f64, LadderSystem, f64, f64) {
        let g = self.sys.gamma;
        let sys = LadderSystem { gamma3: g * p[1].abs(), coupling_detuning: g * p[2], ..self.sys };
        (g * p[0].exp(), sys, p[3], p[4])
    }

    fn eval(&self, p: &[f64]) -> Vec<f64> {
        let (rabi, sys, amp, base) = self.physical(p);
        let s = self.signal.spectrum(self.grid, &sys, rabi);
        let s = match &self.response {
            Some(r) => r.apply(&s),
            None => s,
        };
        s.into_iter().map(|v| base - amp * (1.0 - v)).collect()
    }
}

/// Linear least squares for (amplitude, baseline) given the model shape S.
fn linear_nuisance(s: &[f64], y: &[f64]) -> (f64, f64, f64) {
    // y ≈ b − a(1 − s) = (b − a) + a s
    let n = s.len() as f64;
    let (ms, my) = (s.iter().sum::<f64>() / n, y.iter().sum::<f64>() / n);
    let sxx: f64 = s.iter().map(|v| (v - ms) * (v - ms)).sum();
    let sxy: f64 = s.iter().zip(y).map(|(a, b)| (a - ms) * (b - my)).sum();
    let a = if sxx > 0.0 { sxy / sxx } else { 0.0 };
    let c = my - a * ms;
    let cost = s.iter().zip(y).map(|(si, yi)| (c + a * si - yi).powi(2)).sum();
    (a, c + a, cost)
}

/// The two deepest well-separated local minima, lowest detuning first.
fn dip_positions(trace: &SpectrumTrace) -> Vec<f64> {
    let y = &trace.value;
    let n = y.len();
    let w = (n / 200).max(1);
    let smooth: Vec<f64> = (0..n)
        .map(|i| {
            let (a, b) = (i.saturating_sub(w), (i + w).min(n - 1));
            y[a..=b].iter().sum::<f64>() / (b - a + 1) as f64
        })
        .collect();
    let mut minima: Vec<usize> = (1..n - 1).filter(|&i| smooth[i] < smooth[i - 1] && smooth[i] <= smooth[i + 1]).collect();
    minima.sort_by(|&a, &b| smooth[a].total_cmp(&smooth[b]));
    let mut picked: Vec<usize> = Vec::new();
    let min_gap = (trace.detuning[n - 1] - trace.detuning[0]) / 100.0;
    for i in minima {
        if picked.iter().all(|&j| (trace.detuning[i] - trace.detuning[j]).abs() > min_gap) {
            picked.push(i);
        }
        if picked.len() == 2 {
            break;
        }
    }
    let mut d: Vec<f64> = picked.into_iter().map(|i| trace.detuning[i]).collect();
    d.sort_by(f64::total_cmp);
    d
}

fn auto_seed(model: &AtModel, trace: &SpectrumTrace) -> [f64; 5] {
    let g = model.sys.gamma;
    let y = &trace.value;
    let gamma3 = mhz_to_rad(2.5) / g;
    let dips = dip_positions(trace);
    let mut delta0 = 0.0;
    let mut candidates: Vec<f64> = (0..30).map(|k| mhz_to_rad(0.5) * 400f64.powf(k as f64 / 29.0)).collect();
    if dips.len() == 2 {
        let sep = dips[1] - dips[0];
        delta0 = -(dips[0] + dips[1]);
        let omega = (sep * sep - delta0 * delta0).max(0.0).sqrt();
        if omega > 0.0 {
            // the beam average sees less than the peak
            candidates.extend([omega, 1.3 * omega, 1.7 * omega]);
        }
    }
    let score = |rabi: f64, delta: f64| {
        let p = [(rabi / g).ln(), gamma3, delta / g, 1.0, 1.0];
        let s = model.eval(&p);
        let (a, b, cost) = linear_nuisance(&s, y);
        (cost, [p[0], p[1], p[2], a, b])
    };
    let mut best = score(candidates[0], delta0);
    for &c in &candidates[1..] {
        let t = score(c, delta0);
        if t.0 < best.0 {
            best = t;
        }
    }
    let rabi = best.1[0].exp() * g;
    for k in -4..=4 {
        let t = score(rabi, delta0 + k as f64 * 0.5 * g);
        if t.0 < best.0 {
            best = t;
        }
    }
    best.1
}

/// Fits Ω_max, γ₃, Δ and the nuisance amplitude and baseline of an
/// Autler–Townes spectrum with Γ = `sys.gamma` held fixed.
///
/// With `inst` the detection chain is part of the forward model; without it
/// the trace is compared with the ideal signal directly.
pub fn fit_at_spectrum(
    trace: &SpectrumTrace,
    sys: &LadderSystem,
    beam: &BeamGeometry,
    cloud: &CloudModel,
    inst: Option<&InstrumentModel>,
    opts: &AtFitOptions,
) -> Result<FitResult> {
    require_transmission(trace)?;
    sys.validate()?;
    check_signal(trace)?;
    let model = AtModel {
        signal: SignalModel::new(beam.w_maj, beam.w_min, cloud, &opts.quadrature)?,
        response: inst.map(|i| InstrumentResponse::new(&trace.detuning, i)).transpose()?,
        sys: *sys,
        grid: &trace.detuning,
    };
    let g = sys.gamma;
    let p0 = match opts.initial {
        Some(s) => {
            if !(s.rabi_max > 0.0) {
                return Err(Error::Domain("initial Ω_max must be positive".into()));
            }
            [(s.rabi_max / g).ln(), s.gamma3 / g, s.coupling_detuning / g, s.amplitude, s.baseline]
        }
        None => auto_seed(&model, trace),
    };
    log::debug!("AT seed {p0:?}");
    let y = &trace.value;
    let resid = |p: &[f64]| Ok(model.eval(p).into_iter().zip(y).map(|(m, d)| m - d).collect());
    let out = levenberg_marquardt(resid, &p0, &opts.lm)?;
    Ok(finish(&model, trace, out, inst.is_some()))
}

fn finish(model: &AtModel, trace: &SpectrumTrace, out: LmOutcome, with_instrument: bool) -> FitResult {
    let g = model.sys.gamma;
    let p = &out.params;
    let (rabi, sys, amp, base) = model.physical(p);
    // d(physical)/d(scaled)
    let dphys = [rabi, if p[1] < 0.0 { -g } else { g }, g, 1.0, 1.0];
    let cov_s = out.covariance();
    let mut cov = vec![vec![0.0; 5]; 5];
    for i in 0..5 {
        for j in 0..5 {
            cov[i][j] = dphys[i] * dphys[j] * cov_s[(i, j)];
        }
    }
    let mut sigma: Vec<f64> = (0..5).map(|i| cov[i][i].abs().sqrt()).collect();
    let mut at_bound = Vec::new();
    if p[1].abs() < 1e-6 {
        at_bound.push(PARAM_NAMES[1].to_string());
    }
    let s2 = out.reduced_chi2();
    if !(sigma[0].is_finite()) || sigma[0] > 0.5 * rabi {
        // Ω barely constrained: profile the cost upward instead of trusting curvature
        sigma[0] = profile_rabi_bound(model, trace, p, out.cost, s2);
        at_bound.push(PARAM_NAMES[0].to_string());
    }
    FitResult {
        mode: if with_instrument { FitMode::InstrumentModel } else { FitMode::BroadenedGamma },
        gamma: g,
        rabi_max: rabi,
        gamma3: sys.gamma3,
        coupling_detuning: sys.coupling_detuning,
        amplitude: amp,
        baseline: base,
        sigma_rabi_max: sigma[0],
        sigma_gamma3: sigma[1],
        sigma_coupling_detuning: sigma[2],
        sigma_amplitude: sigma[3],
        sigma_baseline: sigma[4],
        covariance: cov,
        reduced_chi2: s2,
        converged: true,
        iterations: out.iterations,
        trace_length: out.trace.len(),
        at_bound,
    }
}

/// Smallest Ω above the optimum at which the cost rises by one unit of the
/// residual variance, other parameters held at the optimum.
fn profile_rabi_bound(model: &AtModel, trace: &SpectrumTrace, p: &[f64], cost_min: f64, s2: f64) -> f64 {
    let g = model.sys.gamma;
    let target = cost_min + s2.max(1e-30);
    let cost_at = |ln_ratio: f64| {
        let mut q = p.to_vec();
        q[0] = ln_ratio;
        model.eval(&q).iter().zip(&trace.value).map(|(m, d)| (m - d).powi(2)).sum::<f64>()
    };
    let mut lo = p[0];
    let mut hi = p[0].max((1e-3f64).ln());
    while cost_at(hi) < target && hi < 5.0 {
        lo = hi;
        hi += 1.0;
    }
    for _ in 0..60 {
        let mid = 0.5 * (lo + hi);
        if cost_at(mid) < target {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    g * hi.exp()
}
