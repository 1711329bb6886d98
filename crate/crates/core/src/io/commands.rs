//! One function per command-line subcommand. Each writes its outputs under
//! `out`, appends a ledger entry and returns a JSON summary for stdout.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use super::config::{FitModeSetting, RunConfig};
use super::image::read_image;
use super::ledger::{append_ledger, digest_outputs, LedgerEntry};
use super::pipeline::{derive_seed, recentre, run_pipeline};
use super::report::{FitReport, TwoLevelReport, WaistReport};
use super::spectrum_csv::{read_spectrum, write_spectrum, DetuningUnit};
use super::write_json;
use crate::angular::{stretched_hyperfine_factor, HalfInteger, HyperfineTransition};
use crate::constants::{dipole_au_to_si, mhz_to_rad, rad_to_mhz, HARTREE_CM1};
use crate::error::{read_to_string, Error, Result};
use crate::inference::{
    chi_squared_compare, fit_at_spectrum, fit_beam_waists, fit_two_level, ColumnProfile, DipoleEstimate, LmConfig,
    ModelPrediction,
};
use crate::lineshape::{
    add_noise, apply_instrument, rabi_max_from_power, simulate_spectrum, BeamGeometry, LadderSystem, Stage,
};
use crate::structure::{
    binding_energy, effective_n, load_external_model, quantum_defect, radial_matrix_element, reduced_dipole,
    ExternalModelTable, Model, RydbergState, SpeciesModel,
};

/// What a command produced.
#[derive(Clone, Debug, Serialize)]
pub struct CommandOutput {
    pub summary: Value,
    pub files: Vec<PathBuf>,
    pub outputs_digest: String,
}

fn finish(cfg: &RunConfig, command: &str, out: &Path, files: Vec<PathBuf>, summary: Value) -> Result<CommandOutput> {
    let (records, digest) = digest_outputs(out, &files)?;
    append_ledger(&out.join("ledger.jsonl"), &LedgerEntry::new(command, cfg.seed, &cfg.to_text(), records, digest.clone()))?;
    Ok(CommandOutput { summary, files, outputs_digest: digest })
}

fn write_value(out: &Path, name: &str, v: &Value, files: &mut Vec<PathBuf>) -> Result<()> {
    write_json(&out.join(name), v)?;
    files.push(name.into());
    Ok(())
}

fn parse_states(labels: &[String]) -> Result<Vec<RydbergState>> {
    labels.iter().map(|s| s.parse()).collect()
}

fn parse_pairs(labels: &[String]) -> Result<Vec<(RydbergState, RydbergState)>> {
    labels
        .iter()
        .map(|s| {
            let (a, b) = s
                .split_once(':')
                .ok_or_else(|| Error::Config(format!("transition `{s}` is not of the form lower:upper")))?;
            Ok((a.parse()?, b.parse()?))
        })
        .collect()
}

fn load_tables(cfg: &RunConfig) -> Result<Vec<ExternalModelTable>> {
    cfg.external_models.iter().map(|p| load_external_model(p)).collect()
}

fn resolve<'a>(name: &str, tables: &'a [ExternalModelTable]) -> Result<Model<'a>> {
    match name.to_ascii_uppercase().as_str() {
        "NCA" => Ok(Model::Nca),
        "MMP" => Ok(Model::Mmp),
        _ => tables
            .iter()
            .find(|t| t.name == name)
            .map(Model::External)
            .ok_or_else(|| Error::Lookup(format!("no model named `{name}`"))),
    }
}

pub fn qdefect(cfg: &RunConfig, out: &Path) -> Result<CommandOutput> {
    let species = cfg.species()?;
    let rows = parse_states(&cfg.states)?
        .iter()
        .map(|s| {
            let series = species.defect_series(s.l, s.j)?;
            let e = binding_energy(s, &species)?;
            Ok(json!({
                "state": s.to_string(),
                "quantum_defect": quantum_defect(&series, s.n)?,
                "effective_n": effective_n(s, &species)?,
                "binding_energy_hartree": e,
                "binding_energy_cm1": e * HARTREE_CM1,
            }))
        })
        .collect::<Result<Vec<_>>>()?;
    let summary = Value::Array(rows);
    let mut files = Vec::new();
    write_value(out, "qdefect.json", &summary, &mut files)?;
    finish(cfg, "qdefect", out, files, summary)
}

fn matrix_elements(cfg: &RunConfig, reduced: bool) -> Result<Value> {
    let species = cfg.species()?;
    let tables = load_tables(cfg)?;
    let pairs = parse_pairs(&cfg.transitions)?;
    let mut rows = Vec::new();
    for (a, b) in &pairs {
        for name in &cfg.models {
            let model = resolve(name, &tables)?;
            let row = if reduced {
                let r = reduced_dipole(a, b, &species, &model)?;
                let mut row = json!({ "lower": a.to_string(), "upper": b.to_string(), "model": name, "reduced_au": r });
                // the stretched hyperfine transition applies to 5P3/2 → nD5/2
                if (a.n, a.l, a.j, b.l, b.j) == (5, 1, HalfInteger::from_twice(3), 2, HalfInteger::from_twice(5)) {
                    let c = stretched_hyperfine_factor(&HyperfineTransition::rb87_stretched(b.n)?)?;
                    row["stretched_factor"] = json!(c);
                    row["stretched_dipole_au"] = json!(r * c);
                }
                row
            } else {
                json!({
                    "lower": a.to_string(), "upper": b.to_string(), "model": name,
                    "radial_au": radial_matrix_element(a, b, &species, &model)?,
                })
            };
            rows.push(row);
        }
    }
    Ok(Value::Array(rows))
}

pub fn radial_me(cfg: &RunConfig, out: &Path) -> Result<CommandOutput> {
    let summary = matrix_elements(cfg, false)?;
    let mut files = Vec::new();
    write_value(out, "radial_me.json", &summary, &mut files)?;
    finish(cfg, "radial-me", out, files, summary)
}

pub fn reduced_me(cfg: &RunConfig, out: &Path) -> Result<CommandOutput> {
    let summary = matrix_elements(cfg, true)?;
    let mut files = Vec::new();
    write_value(out, "reduced_me.json", &summary, &mut files)?;
    finish(cfg, "reduced-me", out, files, summary)
}

/// Peak Rabi frequency for `simulate`: the configured override, or the
/// configured power through the model dipole of nD₅/₂.
fn simulate_rabi(cfg: &RunConfig, species: &SpeciesModel) -> Result<(f64, Option<f64>)> {
    if let Some(r) = cfg.rabi_max_mhz {
        return Ok((mhz_to_rad(r), None));
    }
    let tables = load_tables(cfg)?;
    let model = resolve(&cfg.simulate_model, &tables)?;
    let n = cfg.simulate_n;
    let lower = RydbergState::new(5, 1, HalfInteger::from_twice(3))?;
    let upper = RydbergState::new(n, 2, HalfInteger::from_twice(5))?;
    let c = stretched_hyperfine_factor(&HyperfineTransition::rb87_stretched(n)?)?;
    let mu_au = (reduced_dipole(&lower, &upper, species, &model)? * c).abs();
    let (w_maj, w_min) = cfg.waists();
    Ok((rabi_max_from_power(cfg.power_mw * 1e-3, w_maj, w_min, dipole_au_to_si(mu_au))?, Some(mu_au)))
}

pub fn simulate(cfg: &RunConfig, out: &Path) -> Result<CommandOutput> {
    let species = cfg.species()?;
    let (rabi, mu_au) = simulate_rabi(cfg, &species)?;
    let beam = cfg.beam_with_rabi(rabi);
    let sys = cfg.ladder();
    let ideal = simulate_spectrum(&cfg.grid()?, &sys, &beam, &cfg.cloud()?, &cfg.quadrature())?;
    let mut measured = match cfg.instrument_if_enabled() {
        Some(inst) => apply_instrument(&ideal, &inst)?,
        None => ideal.clone(),
    };
    measured = add_noise(&measured, cfg.noise_relative, derive_seed(cfg.seed, &[0]))?;

    let mut meta = std::collections::BTreeMap::new();
    meta.insert("rabi_max_MHz".to_string(), format!("{:?}", rad_to_mhz(rabi)));
    meta.insert("seed".to_string(), cfg.seed.to_string());
    let mut files: Vec<PathBuf> = vec!["spectrum_ideal.csv".into(), "spectrum.csv".into()];
    write_spectrum(&out.join(&files[0]), &ideal, DetuningUnit::MHz, &meta)?;
    write_spectrum(&out.join(&files[1]), &measured, DetuningUnit::MHz, &meta)?;
    let summary = json!({
        "rabi_max_mhz": rad_to_mhz(rabi),
        "stretched_dipole_au": mu_au,
        "power_mw": cfg.power_mw,
        "points": ideal.len(),
        "instrumented": cfg.instrument_enabled,
        "noise_relative": cfg.noise_relative,
        "min_transmission": measured.value.iter().cloned().fold(f64::INFINITY, f64::min),
    });
    write_value(out, "simulate.json", &summary, &mut files)?;
    finish(cfg, "simulate", out, files, summary)
}

/// Fits a spectrum file. `two_level` fits the coupling-off line instead,
/// giving the broadened width.
pub fn fit(cfg: &RunConfig, input: &Path, out: &Path, two_level: bool) -> Result<CommandOutput> {
    let trace = read_spectrum(input)?.trace;
    let cal = cfg.calibration();
    let cloud = cfg.cloud()?;
    let mut files = Vec::new();
    if two_level {
        let profile = ColumnProfile::for_region(cal.w_maj, cal.w_min, &cloud, &cfg.quadrature())?;
        let f = fit_two_level(&trace, &profile)?;
        let summary = serde_json::to_value(TwoLevelReport::from(&f))?;
        write_value(out, "two_level.json", &summary, &mut files)?;
        return finish(cfg, "fit", out, files, summary);
    }
    let beam = BeamGeometry::with_rabi_max(cal.w_maj, cal.w_min, 1.0);
    let opts = cfg.fit_options();
    let sys = cfg.ladder();
    // an ideal trace has seen no detection chain, so the model leaves it out too
    let inst = cfg.instrument_if_enabled().filter(|_| trace.stage == Stage::Instrumented);
    let instrument_fit = || -> Result<FitReport> { Ok((&fit_at_spectrum(&trace, &sys, &beam, &cloud, inst.as_ref(), &opts)?).into()) };
    let broadened_fit = || -> Result<FitReport> {
        let g = cfg
            .broadened_gamma_mhz
            .ok_or_else(|| Error::Config("fit.mode = broadened needs fit.broadened_gamma_MHz and fit.broadened_center_MHz (see `fit --two-level`)".into()))?;
        let sys = LadderSystem { gamma: mhz_to_rad(g), ..sys };
        let shifted = recentre(&trace, mhz_to_rad(cfg.broadened_center_mhz.unwrap_or(0.0)));
        Ok((&fit_at_spectrum(&shifted, &sys, &beam, &cloud, None, &opts)?).into())
    };
    let summary = match cfg.fit_mode {
        FitModeSetting::Instrument => serde_json::to_value(instrument_fit()?)?,
        FitModeSetting::Broadened => serde_json::to_value(broadened_fit()?)?,
        FitModeSetting::Both => json!({ "instrument_model": instrument_fit()?, "broadened_gamma": broadened_fit()? }),
    };
    write_value(out, "fit.json", &summary, &mut files)?;
    finish(cfg, "fit", out, files, summary)
}

pub fn fit_waist(cfg: &RunConfig, input: &Path, out: &Path) -> Result<CommandOutput> {
    let image = read_image(input, cfg.image_detuning_mhz)?;
    let prior = BeamGeometry::with_rabi_max(
        cfg.image_prior_w_maj_um * 1e-6,
        cfg.image_prior_w_min_um * 1e-6,
        mhz_to_rad(cfg.image_prior_rabi_mhz),
    );
    let f = fit_beam_waists(&image, &cfg.ladder(), &cfg.cloud()?, &prior, &LmConfig::default())?;
    let summary = serde_json::to_value(WaistReport::from(&f))?;
    let mut files = Vec::new();
    write_value(out, "waists.json", &summary, &mut files)?;
    finish(cfg, "fit-waist", out, files, summary)
}

pub fn pipeline(cfg: &RunConfig, out: &Path) -> Result<CommandOutput> {
    let r = run_pipeline(cfg, Some(out))?;
    let summary = json!({
        "dipoles": r.dipoles,
        "ranking": r.comparison.as_ref().map(|c| c.ranking.clone()),
        "failed_n": r.per_n.iter().filter(|n| n.error.is_some()).map(|n| n.n).collect::<Vec<_>>(),
    });
    Ok(CommandOutput { summary, files: r.files, outputs_digest: r.outputs_digest.unwrap_or_default() })
}

/// Measured reduced elements, as written by the pipeline to `dipoles.json`.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(transparent)]
struct Measured(Vec<DipoleEstimate>);

pub fn compare_models(cfg: &RunConfig, input: &Path, out: &Path) -> Result<CommandOutput> {
    let measured: Measured = serde_json::from_str(&read_to_string(input)?)?;
    if measured.0.is_empty() {
        return Err(Error::InsufficientData(format!("{} holds no measurements", input.display())));
    }
    let species = cfg.species()?;
    let tables = load_tables(cfg)?;
    let mut names = cfg.comparison_models.clone();
    names.extend(tables.iter().map(|t| t.name.clone()).filter(|n| !cfg.comparison_models.contains(n)));
    let ns: Vec<u32> = measured.0.iter().map(|d| d.n).collect();
    let lower = RydbergState::new(5, 1, HalfInteger::from_twice(3))?;
    let preds = names
        .iter()
        .map(|name| ModelPrediction::compute(&species, &resolve(name, &tables)?, &lower, &ns))
        .collect::<Result<Vec<_>>>()?;
    let cmp = chi_squared_compare(&measured.0, &preds)?;
    let summary = json!({ "comparison": cmp, "predictions": preds });
    let mut files = Vec::new();
    write_value(out, "comparison.json", &summary, &mut files)?;
    finish(cfg, "compare-models", out, files, summary)
}
