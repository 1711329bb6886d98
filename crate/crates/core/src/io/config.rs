//! Run configuration: flat `key = value` text with dotted section prefixes.
//!
//! Every physical quantity carries its unit in the key (`ladder.gamma_MHz`,
//! `beam.w_maj_um`, ...). Values are stored in those file units so that
//! `parse(to_text(c)) == c` holds exactly; conversion to internal units
//! happens in the accessor methods. Unknown keys are rejected.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::angular::HalfInteger;
use crate::constants::mhz_to_rad;
use crate::error::{read_to_string, Error, Result};
use crate::inference::{AtFitOptions, BeamCalibration, LmConfig};
use crate::lineshape::{
    uniform_grid, BeamGeometry, CloudModel, InstrumentModel, LadderSystem, QuadratureConfig, SweepDirection,
    CALIBRATED_SWEEP_SPAN_MHZ,
};
use crate::structure::{l_from_letter, QuantumDefectSeries, SpeciesModel};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum FitModeSetting {
    /// Natural Γ, detection chain in the forward model.
    Instrument,
    /// Γ from the two-level fit, no detection chain.
    Broadened,
    /// Both, reporting the instrument-model fit as primary.
    Both,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum SpectrumSource {
    Simulate,
    Load,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunConfig {
    /// None selects the built-in ⁸⁷Rb data.
    pub species_path: Option<PathBuf>,
    /// Quantum-defect overrides keyed by channel label such as `D5/2`.
    pub defect_overrides: BTreeMap<String, Vec<f64>>,

    pub gamma_mhz: f64,
    pub gamma3_mhz: f64,
    pub sigma0_m2: f64,
    pub coupling_detuning_mhz: f64,
    pub probe_saturation_w_m2: f64,

    pub w_maj_um: f64,
    pub w_min_um: f64,
    pub power_mw: f64,
    /// Overrides the Rabi frequency implied by power and dipole.
    pub rabi_max_mhz: Option<f64>,

    pub peak_density_cm3: f64,
    pub atom_number: f64,

    pub instrument_enabled: bool,
    pub sweep_span_mhz: f64,
    pub sweep_time_ms: f64,
    /// `inf` disables the filter.
    pub corner_frequency_khz: f64,
    pub laser_linewidth_khz: f64,
    pub sweep_direction: SweepDirection,

    pub sweep_start_mhz: f64,
    pub sweep_stop_mhz: f64,
    pub sweep_points: usize,

    pub quadrature_cells: usize,
    pub quadrature_beam_extent: f64,
    pub quadrature_cloud_extent: f64,

    pub seed: u64,
    pub noise_relative: f64,
    pub output_dir: PathBuf,

    pub states: Vec<String>,
    /// `lower:upper` state pairs.
    pub transitions: Vec<String>,
    pub models: Vec<String>,

    /// Upper state n and model for `simulate`.
    pub simulate_n: u32,
    pub simulate_model: String,

    pub fit_mode: FitModeSetting,
    pub broadened_gamma_mhz: Option<f64>,
    /// Two-level line centre used to recentre spectra in broadened mode.
    pub broadened_center_mhz: Option<f64>,

    pub image_detuning_mhz: f64,
    pub image_prior_w_maj_um: f64,
    pub image_prior_w_min_um: f64,
    pub image_prior_rabi_mhz: f64,

    /// Waists reported to the analysis; None means the true beam waists.
    pub calibration_w_maj_um: Option<f64>,
    pub calibration_w_min_um: Option<f64>,
    pub calibration_sigma_w_maj_um: f64,
    pub calibration_sigma_w_min_um: f64,
    pub calibration_power_rel_error: f64,
    /// Reported power = true power × this factor.
    pub calibration_power_scale: f64,

    pub n_list: Vec<u32>,
    pub powers_mw: Vec<f64>,
    pub truth_model: String,
    pub source: SpectrumSource,
    pub spectra_dir: Option<PathBuf>,
    pub external_models: Vec<PathBuf>,
    pub comparison_models: Vec<String>,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            species_path: None,
            defect_overrides: BTreeMap::new(),
            gamma_mhz: 6.065,
            gamma3_mhz: 2.5,
            sigma0_m2: 2.90e-13,
            coupling_detuning_mhz: 0.0,
            probe_saturation_w_m2: 16.69,
            w_maj_um: 240.0,
            w_min_um: 172.0,
            power_mw: 80.0,
            rabi_max_mhz: None,
            peak_density_cm3: 6e9,
            atom_number: 3e6,
            instrument_enabled: true,
            sweep_span_mhz: CALIBRATED_SWEEP_SPAN_MHZ,
            sweep_time_ms: 1.0,
            corner_frequency_khz: 35.0,
            laser_linewidth_khz: 450.0,
            sweep_direction: SweepDirection::Up,
            sweep_start_mhz: -60.0,
            sweep_stop_mhz: 60.0,
            sweep_points: 481,
            quadrature_cells: 64,
            quadrature_beam_extent: 3.0,
            quadrature_cloud_extent: 4.0,
            seed: 1,
            noise_relative: 0.01,
            output_dir: PathBuf::from("out"),
            states: vec!["5P3/2".into(), "22D5/2".into(), "44D5/2".into()],
            transitions: vec!["5P3/2:22D5/2".into(), "5P3/2:44D5/2".into()],
            models: vec!["NCA".into(), "MMP".into()],
            simulate_n: 44,
            simulate_model: "NCA".into(),
            fit_mode: FitModeSetting::Instrument,
            broadened_gamma_mhz: None,
            broadened_center_mhz: None,
            image_detuning_mhz: 0.0,
            image_prior_w_maj_um: 200.0,
            image_prior_w_min_um: 200.0,
            image_prior_rabi_mhz: 15.0,
            calibration_w_maj_um: None,
            calibration_w_min_um: None,
            calibration_sigma_w_maj_um: 10.0,
            calibration_sigma_w_min_um: 10.0,
            calibration_power_rel_error: 0.05,
            calibration_power_scale: 1.0,
            n_list: vec![22, 44],
            powers_mw: vec![5.0, 10.0, 20.0, 40.0, 60.0, 80.0],
            truth_model: "NCA".into(),
            source: SpectrumSource::Simulate,
            spectra_dir: None,
            external_models: Vec::new(),
            comparison_models: vec!["NCA".into(), "MMP".into()],
        }
    }
}

fn fmt_list<T: ToString>(v: &[T]) -> String {
    v.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(" ")
}

fn fmt_f64(v: f64) -> String {
    if v.is_infinite() {
        if v > 0.0 { "inf".into() } else { "-inf".into() }
    } else {
        format!("{v:?}")
    }
}

fn parse_f64(line: usize, key: &str, v: &str) -> Result<f64> {
    match v {
        "inf" => Ok(f64::INFINITY),
        _ => v
            .parse::<f64>()
            .ok()
            .filter(|x| !x.is_nan())
            .ok_or_else(|| Error::parse(line, format!("`{key}`: expected a number, got `{v}`"))),
    }
}

fn parse_int<T: std::str::FromStr>(line: usize, key: &str, v: &str) -> Result<T> {
    v.parse::<T>().map_err(|_| Error::parse(line, format!("`{key}`: expected a non-negative integer, got `{v}`")))
}

fn parse_bool(line: usize, key: &str, v: &str) -> Result<bool> {
    match v {
        "true" => Ok(true),
        "false" => Ok(false),
        _ => Err(Error::parse(line, format!("`{key}`: expected true or false, got `{v}`"))),
    }
}

fn words(v: &str) -> Vec<String> {
    v.split(|c: char| c.is_whitespace() || c == ',').filter(|s| !s.is_empty()).map(String::from).collect()
}

fn parse_f64_list(line: usize, key: &str, v: &str) -> Result<Vec<f64>> {
    words(v).iter().map(|w| parse_f64(line, key, w)).collect()
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<Self> {
        Self::parse(&read_to_string(path)?).map_err(|e| e.with_path(path))
    }

    pub fn parse(text: &str) -> Result<Self> {
        let mut c = RunConfig::default();
        let mut seen = BTreeMap::new();
        for (idx, raw) in text.lines().enumerate() {
            let line = idx + 1;
            let body = raw.split('#').next().unwrap_or("").trim();
            if body.is_empty() {
                continue;
            }
            let (key, value) = body
                .split_once('=')
                .map(|(k, v)| (k.trim(), v.trim()))
                .ok_or_else(|| Error::parse(line, format!("expected `key = value`, got `{body}`")))?;
            if let Some(prev) = seen.insert(key.to_string(), line) {
                return Err(Error::parse(line, format!("duplicate key `{key}` (first on line {prev})")));
            }
            c.set(line, key, value)?;
        }
        c.validate().map_err(|e| match e {
            Error::Config(msg) => Error::parse(0, msg),
            other => other,
        })?;
        Ok(c)
    }

    fn set(&mut self, line: usize, key: &str, v: &str) -> Result<()> {
        let f = |v: &str| parse_f64(line, key, v);
        match key {
            "species.path" => self.species_path = if v == "builtin" { None } else { Some(PathBuf::from(v)) },
            k if k.starts_with("species.defect.") => {
                let label = &k["species.defect.".len()..];
                parse_channel(label).map_err(|m| Error::parse(line, m))?;
                self.defect_overrides.insert(label.to_string(), parse_f64_list(line, key, v)?);
            }
            "ladder.gamma_MHz" => self.gamma_mhz = f(v)?,
            "ladder.gamma3_MHz" => self.gamma3_mhz = f(v)?,
            "ladder.sigma0_m2" => self.sigma0_m2 = f(v)?,
            "ladder.coupling_detuning_MHz" => self.coupling_detuning_mhz = f(v)?,
            "ladder.probe_saturation_W_m2" => self.probe_saturation_w_m2 = f(v)?,
            "beam.w_maj_um" => self.w_maj_um = f(v)?,
            "beam.w_min_um" => self.w_min_um = f(v)?,
            "beam.power_mW" => self.power_mw = f(v)?,
            "beam.rabi_max_MHz" => self.rabi_max_mhz = Some(f(v)?),
            "cloud.peak_density_cm3" => self.peak_density_cm3 = f(v)?,
            "cloud.atom_number" => self.atom_number = f(v)?,
            "instrument.enabled" => self.instrument_enabled = parse_bool(line, key, v)?,
            "instrument.sweep_span_MHz" => self.sweep_span_mhz = f(v)?,
            "instrument.sweep_time_ms" => self.sweep_time_ms = f(v)?,
            "instrument.corner_frequency_kHz" => self.corner_frequency_khz = f(v)?,
            "instrument.laser_linewidth_kHz" => self.laser_linewidth_khz = f(v)?,
            "instrument.direction" => self.sweep_direction = v.parse().map_err(|e: Error| Error::parse(line, e.to_string()))?,
            "sweep.start_MHz" => self.sweep_start_mhz = f(v)?,
            "sweep.stop_MHz" => self.sweep_stop_mhz = f(v)?,
            "sweep.points" => self.sweep_points = parse_int(line, key, v)?,
            "quadrature.cells" => self.quadrature_cells = parse_int(line, key, v)?,
            "quadrature.beam_extent_waists" => self.quadrature_beam_extent = f(v)?,
            "quadrature.cloud_extent_rms" => self.quadrature_cloud_extent = f(v)?,
            "run.seed" => self.seed = parse_int(line, key, v)?,
            "run.noise_relative" => self.noise_relative = f(v)?,
            "run.output_dir" => self.output_dir = PathBuf::from(v),
            "structure.states" => self.states = words(v),
            "structure.transitions" => self.transitions = words(v),
            "structure.models" => self.models = words(v),
            "simulate.n" => self.simulate_n = parse_int(line, key, v)?,
            "simulate.model" => self.simulate_model = v.to_string(),
            "fit.mode" => {
                self.fit_mode = match v {
                    "instrument" => FitModeSetting::Instrument,
                    "broadened" => FitModeSetting::Broadened,
                    "both" => FitModeSetting::Both,
                    _ => return Err(Error::parse(line, format!("`fit.mode`: expected instrument, broadened or both, got `{v}`"))),
                }
            }
            "fit.broadened_gamma_MHz" => self.broadened_gamma_mhz = Some(f(v)?),
            "fit.broadened_center_MHz" => self.broadened_center_mhz = Some(f(v)?),
            "image.detuning_MHz" => self.image_detuning_mhz = f(v)?,
            "image.prior_w_maj_um" => self.image_prior_w_maj_um = f(v)?,
            "image.prior_w_min_um" => self.image_prior_w_min_um = f(v)?,
            "image.prior_rabi_max_MHz" => self.image_prior_rabi_mhz = f(v)?,
            "calibration.w_maj_um" => self.calibration_w_maj_um = Some(f(v)?),
            "calibration.w_min_um" => self.calibration_w_min_um = Some(f(v)?),
            "calibration.sigma_w_maj_um" => self.calibration_sigma_w_maj_um = f(v)?,
            "calibration.sigma_w_min_um" => self.calibration_sigma_w_min_um = f(v)?,
            "calibration.power_rel_error" => self.calibration_power_rel_error = f(v)?,
            "calibration.power_scale" => self.calibration_power_scale = f(v)?,
            "pipeline.n_list" => self.n_list = words(v).iter().map(|w| parse_int(line, key, w)).collect::<Result<_>>()?,
            "pipeline.powers_mW" => self.powers_mw = parse_f64_list(line, key, v)?,
            "pipeline.truth_model" => self.truth_model = v.to_string(),
            "pipeline.source" => {
                self.source = match v {
                    "simulate" => SpectrumSource::Simulate,
                    "load" => SpectrumSource::Load,
                    _ => return Err(Error::parse(line, format!("`pipeline.source`: expected simulate or load, got `{v}`"))),
                }
            }
            "pipeline.spectra_dir" => self.spectra_dir = Some(PathBuf::from(v)),
            "pipeline.external_models" => self.external_models = words(v).into_iter().map(PathBuf::from).collect(),
            "pipeline.comparison_models" => self.comparison_models = words(v),
            _ => return Err(Error::parse(line, format!("unknown key `{key}`"))),
        }
        Ok(())
    }

    /// Canonical text form: every key, fixed order.
    pub fn to_text(&self) -> String {
        let mut s = String::new();
        let mut kv = |k: &str, v: String| {
            let _ = writeln!(s, "{k} = {v}");
        };
        kv("species.path", self.species_path.as_ref().map(|p| p.display().to_string()).unwrap_or("builtin".into()));
        for (label, coeffs) in &self.defect_overrides {
            kv(&format!("species.defect.{label}"), coeffs.iter().map(|c| fmt_f64(*c)).collect::<Vec<_>>().join(" "));
        }
        kv("ladder.gamma_MHz", fmt_f64(self.gamma_mhz));
        kv("ladder.gamma3_MHz", fmt_f64(self.gamma3_mhz));
        kv("ladder.sigma0_m2", fmt_f64(self.sigma0_m2));
        kv("ladder.coupling_detuning_MHz", fmt_f64(self.coupling_detuning_mhz));
        kv("ladder.probe_saturation_W_m2", fmt_f64(self.probe_saturation_w_m2));
        kv("beam.w_maj_um", fmt_f64(self.w_maj_um));
        kv("beam.w_min_um", fmt_f64(self.w_min_um));
        kv("beam.power_mW", fmt_f64(self.power_mw));
        if let Some(r) = self.rabi_max_mhz {
            kv("beam.rabi_max_MHz", fmt_f64(r));
        }
        kv("cloud.peak_density_cm3", fmt_f64(self.peak_density_cm3));
        kv("cloud.atom_number", fmt_f64(self.atom_number));
        kv("instrument.enabled", self.instrument_enabled.to_string());
        kv("instrument.sweep_span_MHz", fmt_f64(self.sweep_span_mhz));
        kv("instrument.sweep_time_ms", fmt_f64(self.sweep_time_ms));
        kv("instrument.corner_frequency_kHz", fmt_f64(self.corner_frequency_khz));
        kv("instrument.laser_linewidth_kHz", fmt_f64(self.laser_linewidth_khz));
        kv("instrument.direction", self.sweep_direction.to_string());
        kv("sweep.start_MHz", fmt_f64(self.sweep_start_mhz));
        kv("sweep.stop_MHz", fmt_f64(self.sweep_stop_mhz));
        kv("sweep.points", self.sweep_points.to_string());
        kv("quadrature.cells", self.quadrature_cells.to_string());
        kv("quadrature.beam_extent_waists", fmt_f64(self.quadrature_beam_extent));
        kv("quadrature.cloud_extent_rms", fmt_f64(self.quadrature_cloud_extent));
        kv("run.seed", self.seed.to_string());
        kv("run.noise_relative", fmt_f64(self.noise_relative));
        kv("run.output_dir", self.output_dir.display().to_string());
        kv("structure.states", fmt_list(&self.states));
        kv("structure.transitions", fmt_list(&self.transitions));
        kv("structure.models", fmt_list(&self.models));
        kv("simulate.n", self.simulate_n.to_string());
        kv("simulate.model", self.simulate_model.clone());
        kv(
            "fit.mode",
            match self.fit_mode {
                FitModeSetting::Instrument => "instrument",
                FitModeSetting::Broadened => "broadened",
                FitModeSetting::Both => "both",
            }
            .into(),
        );
        if let Some(g) = self.broadened_gamma_mhz {
            kv("fit.broadened_gamma_MHz", fmt_f64(g));
        }
        if let Some(c) = self.broadened_center_mhz {
            kv("fit.broadened_center_MHz", fmt_f64(c));
        }
        kv("image.detuning_MHz", fmt_f64(self.image_detuning_mhz));
        kv("image.prior_w_maj_um", fmt_f64(self.image_prior_w_maj_um));
        kv("image.prior_w_min_um", fmt_f64(self.image_prior_w_min_um));
        kv("image.prior_rabi_max_MHz", fmt_f64(self.image_prior_rabi_mhz));
        if let Some(w) = self.calibration_w_maj_um {
            kv("calibration.w_maj_um", fmt_f64(w));
        }
        if let Some(w) = self.calibration_w_min_um {
            kv("calibration.w_min_um", fmt_f64(w));
        }
        kv("calibration.sigma_w_maj_um", fmt_f64(self.calibration_sigma_w_maj_um));
        kv("calibration.sigma_w_min_um", fmt_f64(self.calibration_sigma_w_min_um));
        kv("calibration.power_rel_error", fmt_f64(self.calibration_power_rel_error));
        kv("calibration.power_scale", fmt_f64(self.calibration_power_scale));
        kv("pipeline.n_list", fmt_list(&self.n_list));
        kv("pipeline.powers_mW", self.powers_mw.iter().map(|p| fmt_f64(*p)).collect::<Vec<_>>().join(" "));
        kv("pipeline.truth_model", self.truth_model.clone());
        kv(
            "pipeline.source",
            match self.source {
                SpectrumSource::Simulate => "simulate",
                SpectrumSource::Load => "load",
            }
            .into(),
        );
        if let Some(d) = &self.spectra_dir {
            kv("pipeline.spectra_dir", d.display().to_string());
        }
        if !self.external_models.is_empty() {
            kv(
                "pipeline.external_models",
                self.external_models.iter().map(|p| p.display().to_string()).collect::<Vec<_>>().join(" "),
            );
        }
        kv("pipeline.comparison_models", fmt_list(&self.comparison_models));
        s
    }

    pub fn validate(&self) -> Result<()> {
        self.ladder().validate().map_err(to_config)?;
        if !(self.w_maj_um > 0.0 && self.w_min_um > 0.0 && self.power_mw >= 0.0) {
            return Err(Error::Config("beam waists must be positive and power non-negative".into()));
        }
        self.cloud().map_err(to_config)?;
        self.instrument().validate().map_err(to_config)?;
        self.grid().map_err(to_config)?;
        self.quadrature().validate()?;
        if !(self.noise_relative >= 0.0) {
            return Err(Error::Config("run.noise_relative must be ≥ 0".into()));
        }
        if self.powers_mw.iter().any(|p| !(*p > 0.0)) {
            return Err(Error::Config("pipeline powers must be positive".into()));
        }
        if !(self.calibration_power_scale > 0.0) {
            return Err(Error::Config("calibration.power_scale must be positive".into()));
        }
        Ok(())
    }

    pub fn species(&self) -> Result<SpeciesModel> {
        let mut sp = match &self.species_path {
            None => SpeciesModel::rubidium87(),
            Some(p) => SpeciesModel::load(p)?,
        };
        for (label, coeffs) in &self.defect_overrides {
            let (l, j) = parse_channel(label).map_err(Error::Config)?;
            sp.set_defect_series(QuantumDefectSeries::new(l, j, coeffs.clone()));
        }
        Ok(sp)
    }

    pub fn ladder(&self) -> LadderSystem {
        LadderSystem {
            gamma: mhz_to_rad(self.gamma_mhz),
            gamma3: mhz_to_rad(self.gamma3_mhz),
            sigma0: self.sigma0_m2,
            coupling_detuning: mhz_to_rad(self.coupling_detuning_mhz),
            probe_saturation_intensity: self.probe_saturation_w_m2,
        }
    }

    /// Waists (m) of the coupling beam that actually illuminates the cloud.
    pub fn waists(&self) -> (f64, f64) {
        (self.w_maj_um * 1e-6, self.w_min_um * 1e-6)
    }

    /// Beam with the given peak Rabi frequency (rad/s) and the configured power.
    pub fn beam_with_rabi(&self, rabi_max: f64) -> BeamGeometry {
        let (a, b) = self.waists();
        BeamGeometry { w_maj: a, w_min: b, power: self.power_mw * 1e-3, rabi_max }
    }

    pub fn cloud(&self) -> Result<CloudModel> {
        CloudModel::spherical(self.peak_density_cm3 * 1e6, self.atom_number)
    }

    pub fn instrument(&self) -> InstrumentModel {
        InstrumentModel {
            sweep_span: mhz_to_rad(self.sweep_span_mhz),
            sweep_time: self.sweep_time_ms * 1e-3,
            corner_frequency: self.corner_frequency_khz * 1e3,
            laser_linewidth: self.laser_linewidth_khz * 1e3,
            direction: self.sweep_direction,
        }
    }

    pub fn instrument_if_enabled(&self) -> Option<InstrumentModel> {
        self.instrument_enabled.then(|| self.instrument())
    }

    pub fn grid(&self) -> Result<Vec<f64>> {
        uniform_grid(mhz_to_rad(self.sweep_start_mhz), mhz_to_rad(self.sweep_stop_mhz), self.sweep_points)
    }

    pub fn quadrature(&self) -> QuadratureConfig {
        QuadratureConfig {
            cells: self.quadrature_cells,
            beam_extent: self.quadrature_beam_extent,
            cloud_extent: self.quadrature_cloud_extent,
        }
    }

    pub fn fit_options(&self) -> AtFitOptions {
        AtFitOptions { quadrature: self.quadrature(), lm: LmConfig::default(), initial: None }
    }

    /// What the analysis believes about the beam and the power scale.
    pub fn calibration(&self) -> BeamCalibration {
        BeamCalibration {
            w_maj: self.calibration_w_maj_um.unwrap_or(self.w_maj_um) * 1e-6,
            sigma_w_maj: self.calibration_sigma_w_maj_um * 1e-6,
            w_min: self.calibration_w_min_um.unwrap_or(self.w_min_um) * 1e-6,
            sigma_w_min: self.calibration_sigma_w_min_um * 1e-6,
            power_rel_error: self.calibration_power_rel_error,
        }
    }
}

fn to_config(e: Error) -> Error {
    match e {
        Error::Domain(m) => Error::Config(m),
        other => other,
    }
}

/// `D5/2` → (2, 5/2).
fn parse_channel(label: &str) -> std::result::Result<(u32, HalfInteger), String> {
    let mut chars = label.chars();
    let l = chars.next().and_then(l_from_letter).ok_or_else(|| format!("bad channel label `{label}`"))?;
    let j: HalfInteger = chars.as_str().parse().map_err(|_| format!("bad channel label `{label}`"))?;
    Ok((l, j))
}
