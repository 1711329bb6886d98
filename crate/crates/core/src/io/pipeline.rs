//! The end-to-end run: spectra → Autler–Townes fits → Ω vs √P → dipoles →
//! model comparison.
//!
//! Spectra are either synthesised from the configured truth model or loaded
//! from `n{n}_p{k}.csv` files. Every (n, power) point runs in parallel with a
//! seed derived from the run seed, n and k, so results do not depend on
//! scheduling. A failure at one n is recorded and the others carry on.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::Serialize;

use super::config::{FitModeSetting, RunConfig, SpectrumSource};
use super::ledger::{append_ledger, digest_outputs, LedgerEntry};
use super::plot::emit_plot_data;
use super::report::{ErrorReport, FitReport, TwoLevelReport};
use super::spectrum_csv::{read_spectrum, write_spectrum, DetuningUnit};
use super::write_json;
use crate::angular::{stretched_hyperfine_factor, HalfInteger, HyperfineTransition};
use crate::constants::{dipole_au_to_si, mhz_to_rad, rad_to_mhz};
use crate::error::{Error, Result};
use crate::inference::{
    chi_squared_compare, dipole_from_gradient, fit_at_spectrum, fit_power_series, fit_two_level, ColumnProfile,
    DipoleEstimate, FitResult, LinearFit, ModelComparison, ModelPrediction, PowerSeriesPoint,
};
use crate::lineshape::{
    add_noise, apply_instrument, rabi_max_from_power, simulate_spectrum, BeamGeometry, LadderSystem, SpectrumTrace,
};
use crate::structure::{load_external_model, reduced_dipole, ExternalModelTable, Model, RydbergState, SpeciesModel};

/// SplitMix64 over the base seed and the parts; stable across platforms.
pub fn derive_seed(base: u64, parts: &[u64]) -> u64 {
    let mix = |mut z: u64| {
        z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
        z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
        z ^ (z >> 31)
    };
    parts.iter().fold(mix(base), |acc, &p| mix(acc ^ mix(p)))
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PointReport {
    pub index: usize,
    pub power_mw: f64,
    /// Power as the analysis sees it (after the calibration scale).
    pub reported_power_mw: f64,
    pub rabi_true_mhz: Option<f64>,
    pub fit: Option<FitReport>,
    /// Second fit when both modes are requested.
    pub alternate_fit: Option<FitReport>,
    pub used_in_regression: bool,
    pub error: Option<ErrorReport>,
    #[serde(skip)]
    pub result: Option<FitResult>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PowerSeriesReport {
    pub gradient_mhz_per_sqrt_mw: f64,
    pub sigma_gradient_mhz_per_sqrt_mw: f64,
    pub intercept_mhz: f64,
    pub sigma_intercept_mhz: f64,
    pub chi2: f64,
    pub dof: usize,
    pub intercept_consistent_with_zero: bool,
}

impl From<&LinearFit> for PowerSeriesReport {
    fn from(f: &LinearFit) -> Self {
        // rad/s per √W → MHz per √mW
        let k = rad_to_mhz(1.0) / 1000f64.sqrt();
        PowerSeriesReport {
            gradient_mhz_per_sqrt_mw: f.gradient * k,
            sigma_gradient_mhz_per_sqrt_mw: f.sigma_gradient * k,
            intercept_mhz: rad_to_mhz(f.intercept),
            sigma_intercept_mhz: rad_to_mhz(f.sigma_intercept),
            chi2: f.chi2,
            dof: f.dof,
            intercept_consistent_with_zero: f.intercept_consistent_with_zero,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct NReport {
    pub n: u32,
    /// Stretched-transition dipole of the truth model (synthetic runs).
    pub truth_mu_au: Option<f64>,
    pub points: Vec<PointReport>,
    pub power_series: Option<PowerSeriesReport>,
    pub dipole: Option<DipoleEstimate>,
    pub error: Option<ErrorReport>,
    #[serde(skip)]
    pub linear_fit: Option<LinearFit>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PipelineReport {
    pub seed: u64,
    pub config_sha256: String,
    pub fit_mode: FitModeSetting,
    pub broadened_gamma: Option<TwoLevelReport>,
    pub per_n: Vec<NReport>,
    pub dipoles: Vec<DipoleEstimate>,
    pub predictions: Vec<ModelPrediction>,
    pub comparison: Option<ModelComparison>,
    pub comparison_error: Option<ErrorReport>,
    /// Files written, relative to the output directory.
    #[serde(skip)]
    pub files: Vec<PathBuf>,
    #[serde(skip)]
    pub outputs_digest: Option<String>,
}

fn lower_state() -> Result<RydbergState> {
    RydbergState::new(5, 1, HalfInteger::from_twice(3))
}

fn upper_state(n: u32) -> Result<RydbergState> {
    RydbergState::new(n, 2, HalfInteger::from_twice(5))
}

fn resolve_model<'a>(name: &str, tables: &'a [ExternalModelTable]) -> Result<Model<'a>> {
    match name.to_ascii_uppercase().as_str() {
        "NCA" => Ok(Model::Nca),
        "MMP" => Ok(Model::Mmp),
        _ => tables
            .iter()
            .find(|t| t.name == name)
            .map(Model::External)
            .ok_or_else(|| Error::Lookup(format!("no model named `{name}` (load it via pipeline.external_models)"))),
    }
}

/// |μ| of the stretched transition, e·a₀, according to `model`.
fn truth_dipole_au(n: u32, species: &SpeciesModel, model: &Model) -> Result<f64> {
    let reduced = reduced_dipole(&lower_state()?, &upper_state(n)?, species, model)?;
    let c = stretched_hyperfine_factor(&HyperfineTransition::rb87_stretched(n)?)?;
    Ok((reduced * c).abs())
}

struct Task {
    n: u32,
    k: usize,
    power_w: f64,
    mu_si: Option<f64>,
}

struct TaskOutcome {
    report: PointReport,
    trace: Option<SpectrumTrace>,
}

struct Context<'a> {
    cfg: &'a RunConfig,
    sys: LadderSystem,
    /// Broadened-width system and the two-level line centre (rad/s).
    broadened: Option<(LadderSystem, f64)>,
    grid: Vec<f64>,
}

impl Context<'_> {
    fn synthesise(&self, n: u32, k: usize, power_w: f64, mu_si: f64) -> Result<(SpectrumTrace, f64)> {
        let cfg = self.cfg;
        let (w_maj, w_min) = cfg.waists();
        let rabi = rabi_max_from_power(power_w, w_maj, w_min, mu_si)?;
        let beam = BeamGeometry { w_maj, w_min, power: power_w, rabi_max: rabi };
        let mut trace = simulate_spectrum(&self.grid, &self.sys, &beam, &cfg.cloud()?, &cfg.quadrature())?;
        if let Some(inst) = cfg.instrument_if_enabled() {
            trace = apply_instrument(&trace, &inst)?;
        }
        let trace = add_noise(&trace, cfg.noise_relative, derive_seed(cfg.seed, &[n as u64, k as u64]))?;
        Ok((trace, rabi))
    }

    fn fit(&self, trace: &SpectrumTrace, broadened: bool) -> Result<FitResult> {
        let cal = self.cfg.calibration();
        let beam = BeamGeometry::with_rabi_max(cal.w_maj, cal.w_min, 1.0);
        let cloud = self.cfg.cloud()?;
        let opts = self.cfg.fit_options();
        if broadened {
            let (sys, centre) = self.broadened.ok_or_else(|| Error::Config("broadened Γ unavailable".into()))?;
            fit_at_spectrum(&recentre(trace, centre), &sys, &beam, &cloud, None, &opts)
        } else {
            let inst = self.cfg.instrument_if_enabled();
            fit_at_spectrum(trace, &self.sys, &beam, &cloud, inst.as_ref(), &opts)
        }
    }

    fn run(&self, task: &Task) -> TaskOutcome {
        let cfg = self.cfg;
        let mut report = PointReport {
            index: task.k,
            power_mw: task.power_w * 1e3,
            reported_power_mw: task.power_w * 1e3 * cfg.calibration_power_scale,
            rabi_true_mhz: None,
            fit: None,
            alternate_fit: None,
            used_in_regression: false,
            error: None,
            result: None,
        };
        let trace = match cfg.source {
            SpectrumSource::Simulate => match task.mu_si.map(|mu| self.synthesise(task.n, task.k, task.power_w, mu)) {
                Some(Ok((t, rabi))) => {
                    report.rabi_true_mhz = Some(rad_to_mhz(rabi));
                    Ok(t)
                }
                Some(Err(e)) => Err(e),
                None => Err(Error::Config("no truth dipole for synthesis".into())),
            },
            SpectrumSource::Load => spectra_dir(cfg)
                .and_then(|d| read_spectrum(&d.join(spectrum_name(task.n, task.k))))
                .map(|f| f.trace),
        };
        let trace = match trace {
            Ok(t) => t,
            Err(e) => {
                report.error = Some((&e).into());
                return TaskOutcome { report, trace: None };
            }
        };
        let (primary, alternate) = match cfg.fit_mode {
            FitModeSetting::Instrument => (self.fit(&trace, false), None),
            FitModeSetting::Broadened => (self.fit(&trace, true), None),
            FitModeSetting::Both => (self.fit(&trace, false), Some(self.fit(&trace, true))),
        };
        match primary {
            Ok(f) => {
                report.fit = Some((&f).into());
                report.result = Some(f);
            }
            Err(e) => report.error = Some((&e).into()),
        }
        if let Some(Ok(f)) = alternate {
            report.alternate_fit = Some((&f).into());
        }
        TaskOutcome { report, trace: Some(trace) }
    }
}

/// Moves the detuning axis so that the two-level line centre sits at zero.
pub(crate) fn recentre(trace: &SpectrumTrace, centre: f64) -> SpectrumTrace {
    let mut t = trace.clone();
    t.detuning.iter_mut().for_each(|d| *d -= centre);
    t
}

fn spectrum_name(n: u32, k: usize) -> String {
    format!("n{n}_p{k}.csv")
}

fn spectra_dir(cfg: &RunConfig) -> Result<PathBuf> {
    cfg.spectra_dir.clone().ok_or_else(|| Error::Config("pipeline.source = load needs pipeline.spectra_dir".into()))
}

type Broadened = (f64, f64, Option<TwoLevelReport>, Option<SpectrumTrace>);

/// Γ and line centre for broadened-mode fits: configured, or from a
/// coupling-off spectrum.
fn broadened_gamma(cfg: &RunConfig, sys: &LadderSystem, grid: &[f64]) -> Result<Broadened> {
    if let Some(g) = cfg.broadened_gamma_mhz {
        let c = cfg.broadened_center_mhz.unwrap_or(0.0);
        return Ok((mhz_to_rad(g), mhz_to_rad(c), None, None));
    }
    let trace = match cfg.source {
        SpectrumSource::Load => read_spectrum(&spectra_dir(cfg)?.join("two_level.csv"))?.trace,
        SpectrumSource::Simulate => {
            let (w_maj, w_min) = cfg.waists();
            let beam = BeamGeometry { w_maj, w_min, power: 0.0, rabi_max: 0.0 };
            let mut t = simulate_spectrum(grid, sys, &beam, &cfg.cloud()?, &cfg.quadrature())?;
            if let Some(inst) = cfg.instrument_if_enabled() {
                t = apply_instrument(&t, &inst)?;
            }
            add_noise(&t, cfg.noise_relative, derive_seed(cfg.seed, &[u64::MAX]))?
        }
    };
    let cal = cfg.calibration();
    let profile = ColumnProfile::for_region(cal.w_maj, cal.w_min, &cfg.cloud()?, &cfg.quadrature())?;
    let fit = fit_two_level(&trace, &profile)?;
    let generated = (cfg.source == SpectrumSource::Simulate).then_some(trace);
    Ok((fit.gamma, fit.center, Some((&fit).into()), generated))
}

/// Runs the pipeline; with `out` set, writes spectra, fits, reports, plot
/// data and a ledger entry there.
pub fn run_pipeline(cfg: &RunConfig, out: Option<&Path>) -> Result<PipelineReport> {
    cfg.validate()?;
    let config_text = cfg.to_text();
    let mut report = PipelineReport {
        seed: cfg.seed,
        config_sha256: super::ledger::sha256_hex(config_text.as_bytes()),
        fit_mode: cfg.fit_mode,
        broadened_gamma: None,
        per_n: Vec::new(),
        dipoles: Vec::new(),
        predictions: Vec::new(),
        comparison: None,
        comparison_error: None,
        files: Vec::new(),
        outputs_digest: None,
    };
    if cfg.n_list.is_empty() {
        log::warn!("pipeline.n_list is empty; nothing to do");
        return Ok(report);
    }

    let species = cfg.species()?;
    let tables =
        cfg.external_models.iter().map(|p| load_external_model(p)).collect::<Result<Vec<ExternalModelTable>>>()?;
    let sys = cfg.ladder();
    let grid = cfg.grid()?;

    let mut generated: BTreeMap<String, SpectrumTrace> = BTreeMap::new();
    let broadened = if matches!(cfg.fit_mode, FitModeSetting::Broadened | FitModeSetting::Both) {
        let (g, centre, rep, trace) = broadened_gamma(cfg, &sys, &grid)?;
        report.broadened_gamma = rep;
        if let Some(t) = trace {
            generated.insert("two_level.csv".into(), t);
        }
        Some((LadderSystem { gamma: g, ..sys }, centre))
    } else {
        None
    };

    // truth dipoles, per n
    let mut n_errors: BTreeMap<u32, Error> = BTreeMap::new();
    let mut truth: BTreeMap<u32, f64> = BTreeMap::new();
    if cfg.source == SpectrumSource::Simulate {
        let model = resolve_model(&cfg.truth_model, &tables)?;
        let results: Vec<(u32, Result<f64>)> =
            cfg.n_list.par_iter().map(|&n| (n, truth_dipole_au(n, &species, &model))).collect();
        for (n, r) in results {
            match r {
                Ok(mu) => {
                    truth.insert(n, mu);
                }
                Err(e) => {
                    n_errors.insert(n, e);
                }
            }
        }
    }

    let tasks: Vec<Task> = cfg
        .n_list
        .iter()
        .filter(|n| !n_errors.contains_key(n))
        .flat_map(|&n| {
            let mu_si = truth.get(&n).map(|mu| dipole_au_to_si(*mu));
            cfg.powers_mw.iter().enumerate().map(move |(k, p)| Task { n, k, power_w: p * 1e-3, mu_si })
        })
        .collect();
    let ctx = Context { cfg, sys, broadened, grid };
    let outcomes: Vec<TaskOutcome> = tasks.par_iter().map(|t| ctx.run(t)).collect();

    let mut by_n: BTreeMap<u32, Vec<TaskOutcome>> = BTreeMap::new();
    for (t, o) in tasks.iter().zip(outcomes) {
        by_n.entry(t.n).or_default().push(o);
    }

    let cal = cfg.calibration();
    for &n in &cfg.n_list {
        let mut nr = NReport {
            n,
            truth_mu_au: truth.get(&n).copied(),
            points: Vec::new(),
            power_series: None,
            dipole: None,
            error: n_errors.get(&n).map(ErrorReport::from),
            linear_fit: None,
        };
        let outcomes = by_n.remove(&n).unwrap_or_default();
        let mut series = Vec::new();
        for o in outcomes {
            let mut pr = o.report;
            if let Some(f) = &pr.result {
                match PowerSeriesPoint::new(pr.reported_power_mw * 1e-3, f.rabi_max, f.sigma_rabi_max) {
                    Ok(p) if !f.at_bound.iter().any(|b| b == "rabi_max") => {
                        series.push(p);
                        pr.used_in_regression = true;
                    }
                    Ok(_) => log::info!("n={n} P={} mW: Ω at a bound, left out of the regression", pr.power_mw),
                    Err(e) => log::info!("n={n} P={} mW: {e}", pr.power_mw),
                }
            }
            if let Some(t) = o.trace {
                if cfg.source == SpectrumSource::Simulate {
                    generated.insert(spectrum_name(n, pr.index), t);
                }
            }
            nr.points.push(pr);
        }
        if nr.error.is_none() {
            let est = fit_power_series(&series).and_then(|lin| {
                nr.power_series = Some((&lin).into());
                nr.linear_fit = Some(lin);
                dipole_from_gradient(n, lin.gradient, lin.sigma_gradient, &cal)?
                    .with_reduced(&HyperfineTransition::rb87_stretched(n)?)
            });
            match est {
                Ok(d) => {
                    nr.dipole = Some(d);
                    report.dipoles.push(d);
                }
                Err(e) => {
                    log::warn!("n={n}: {e}");
                    nr.error = Some((&e).into());
                }
            }
        }
        report.per_n.push(nr);
    }

    if !report.dipoles.is_empty() {
        let ns: Vec<u32> = report.dipoles.iter().map(|d| d.n).collect();
        let mut names = cfg.comparison_models.clone();
        for t in &tables {
            if !names.contains(&t.name) {
                names.push(t.name.clone());
            }
        }
        let compared = (|| -> Result<(Vec<ModelPrediction>, ModelComparison)> {
            let lower = lower_state()?;
            let preds = names
                .iter()
                .map(|name| ModelPrediction::compute(&species, &resolve_model(name, &tables)?, &lower, &ns))
                .collect::<Result<Vec<_>>>()?;
            let cmp = chi_squared_compare(&report.dipoles, &preds)?;
            Ok((preds, cmp))
        })();
        match compared {
            Ok((p, c)) => {
                report.predictions = p;
                report.comparison = Some(c);
            }
            Err(e) => {
                log::warn!("model comparison failed: {e}");
                report.comparison_error = Some((&e).into());
            }
        }
    }

    if let Some(dir) = out {
        write_outputs(cfg, &config_text, &mut report, &generated, dir)?;
    }
    Ok(report)
}

fn write_outputs(
    cfg: &RunConfig,
    config_text: &str,
    report: &mut PipelineReport,
    generated: &BTreeMap<String, SpectrumTrace>,
    dir: &Path,
) -> Result<()> {
    let mut files: Vec<PathBuf> = Vec::new();
    for (name, trace) in generated {
        let rel = Path::new("spectra").join(name);
        let mut meta = BTreeMap::new();
        meta.insert("seed".to_string(), cfg.seed.to_string());
        write_spectrum(&dir.join(&rel), trace, DetuningUnit::MHz, &meta)?;
        files.push(rel);
    }
    for nr in &report.per_n {
        for p in &nr.points {
            if let Some(f) = &p.fit {
                let rel = Path::new("fits").join(format!("n{}_p{}.json", nr.n, p.index));
                write_json(&dir.join(&rel), f)?;
                files.push(rel);
            }
        }
    }
    for (name, value) in [
        ("report.json", serde_json::to_value(&*report)?),
        ("dipoles.json", serde_json::to_value(&report.dipoles)?),
    ] {
        write_json(&dir.join(name), &value)?;
        files.push(name.into());
    }
    if let Some(c) = &report.comparison {
        write_json(&dir.join("comparison.json"), c)?;
        files.push("comparison.json".into());
    }
    files.extend(emit_plot_data(report, dir)?);
    let (records, digest) = digest_outputs(dir, &files)?;
    append_ledger(&dir.join("ledger.jsonl"), &LedgerEntry::new("pipeline", cfg.seed, config_text, records, digest.clone()))?;
    report.files = files;
    report.outputs_digest = Some(digest);
    Ok(())
}
