//! Species data: quantum-defect series, core model-potential coefficients and
//! anchor energies, loaded from a key-value data file.
//!
//! File format, one `key = value` per line, `#` starts a comment:
//!
//! ```text
//! name = Rb87
//! rydberg_au = 0.4999968
//! core_charge = 37
//! core_polarizability_au = 9.0760
//! nuclear_spin = 3/2
//! defect.D5/2 = 1.34646572 -0.59600      # δ0 δ2 [δ4 ...]
//! defect.* = 0                            # fallback for every other (l, j)
//! potential.D = a1 a2 a3 a4 rc            # per-l core potential
//! potential.* = a1 a2 a3 a4 rc            # fallback for higher l
//! anchor.5P3/2 = -0.0951101               # binding energy, a.u.
//! ```

use std::collections::BTreeMap;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::state::{l_from_letter, RydbergState};
use crate::angular::HalfInteger;
use crate::error::{read_to_string, Error, Result};

/// Rydberg–Ritz expansion δ(n) = δ₀ + δ₂/(n−δ₀)² + δ₄/(n−δ₀)⁴ + …
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct QuantumDefectSeries {
    pub l: u32,
    pub j: HalfInteger,
    /// δ₀, δ₂, δ₄, … in that order.
    pub coefficients: Vec<f64>,
}

impl QuantumDefectSeries {
    pub fn new(l: u32, j: HalfInteger, coefficients: Vec<f64>) -> Self {
        QuantumDefectSeries { l, j, coefficients }
    }
}

pub fn quantum_defect(series: &QuantumDefectSeries, n: u32) -> Result<f64> {
    let d0 = series.coefficients.first().copied().unwrap_or(0.0);
    let base = n as f64 - d0;
    if !(base > 0.0) {
        return Err(Error::Domain(format!("n − δ₀ = {base} is not positive (n = {n})")));
    }
    let inv_sq = 1.0 / (base * base);
    let mut scale = 1.0;
    let mut delta = 0.0;
    for c in &series.coefficients {
        delta += c * scale;
        scale *= inv_sq;
    }
    Ok(delta)
}

/// Parametric core potential coefficients for one orbital angular momentum.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CorePotential {
    pub a1: f64,
    pub a2: f64,
    pub a3: f64,
    pub a4: f64,
    pub rc: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SpeciesModel {
    pub name: String,
    /// Rydberg constant corrected for the finite nuclear mass, in Hartree.
    pub rydberg_au: f64,
    pub core_charge: u32,
    pub core_polarizability_au: f64,
    pub nuclear_spin: Option<HalfInteger>,
    pub defects: Vec<QuantumDefectSeries>,
    pub default_defect: Option<Vec<f64>>,
    pub potentials: BTreeMap<u32, CorePotential>,
    pub default_potential: Option<CorePotential>,
    /// Binding energies (a.u.) that override the quantum-defect formula.
    pub anchors: Vec<(RydbergState, f64)>,
}

impl SpeciesModel {
    pub fn rubidium87() -> Self {
        Self::parse(include_str!("../../data/rb87.species")).expect("bundled Rb87 data parses")
    }

    pub fn hydrogen() -> Self {
        Self::parse(include_str!("../../data/hydrogen.species")).expect("bundled hydrogen data parses")
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::parse(&read_to_string(path)?).map_err(|e| e.with_path(path))
    }

    pub fn parse(text: &str) -> Result<Self> {
        let mut name = None;
        let mut rydberg_au = None;
        let mut core_charge = None;
        let mut alpha = None;
        let mut nuclear_spin = None;
        let mut defects: Vec<QuantumDefectSeries> = Vec::new();
        let mut default_defect = None;
        let mut potentials = BTreeMap::new();
        let mut default_potential = None;
        let mut anchors = Vec::new();

        for (idx, raw) in text.lines().enumerate() {
            let line_no = idx + 1;
            let line = raw.split('#').next().unwrap().trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| Error::parse(line_no, format!("expected `key = value`, got `{line}`")))?;
            let (key, value) = (key.trim(), value.trim());
            let floats = || -> Result<Vec<f64>> {
                value
                    .split_whitespace()
                    .map(|t| t.parse::<f64>().map_err(|_| Error::parse(line_no, format!("bad number `{t}`"))))
                    .collect()
            };
            let scalar = || -> Result<f64> {
                value.parse().map_err(|_| Error::parse(line_no, format!("bad number `{value}`")))
            };
            match key {
                "name" => name = Some(value.to_string()),
                "rydberg_au" => rydberg_au = Some(scalar()?),
                "core_charge" => {
                    core_charge = Some(
                        value
                            .parse::<u32>()
                            .map_err(|_| Error::parse(line_no, "core_charge must be a positive integer"))?,
                    )
                }
                "core_polarizability_au" => alpha = Some(scalar()?),
                "nuclear_spin" => {
                    nuclear_spin = Some(value.parse::<HalfInteger>().map_err(|e| Error::parse(line_no, e))?)
                }
                _ => {
                    if let Some(sel) = key.strip_prefix("defect.") {
                        let coeffs = floats()?;
                        if coeffs.is_empty() || coeffs.iter().any(|c| !c.is_finite()) {
                            return Err(Error::parse(line_no, "defect series needs finite coefficients"));
                        }
                        if sel == "*" {
                            default_defect = Some(coeffs);
                        } else {
                            let (l, j) = parse_lj(sel).map_err(|m| Error::parse(line_no, m))?;
                            if defects.iter().any(|d| d.l == l && d.j == j) {
                                return Err(Error::parse(line_no, format!("duplicate defect series {sel}")));
                            }
                            defects.push(QuantumDefectSeries::new(l, j, coeffs));
                        }
                    } else if let Some(sel) = key.strip_prefix("potential.") {
                        let c = floats()?;
                        if c.len() != 5 {
                            return Err(Error::parse(line_no, "potential needs a1 a2 a3 a4 rc"));
                        }
                        let pot = CorePotential { a1: c[0], a2: c[1], a3: c[2], a4: c[3], rc: c[4] };
                        if !(pot.rc > 0.0) {
                            return Err(Error::parse(line_no, "core radius rc must be positive"));
                        }
                        if sel == "*" {
                            default_potential = Some(pot);
                        } else {
                            let mut chars = sel.chars();
                            let l = match (chars.next(), chars.next()) {
                                (Some(c), None) => l_from_letter(c),
                                _ => None,
                            }
                            .ok_or_else(|| Error::parse(line_no, format!("bad orbital selector `{sel}`")))?;
                            potentials.insert(l, pot);
                        }
                    } else if let Some(label) = key.strip_prefix("anchor.") {
                        let state: RydbergState =
                            label.parse().map_err(|e: Error| Error::parse(line_no, e.to_string()))?;
                        let e = scalar()?;
                        if !(e < 0.0) {
                            return Err(Error::parse(line_no, "anchor binding energy must be negative"));
                        }
                        anchors.push((state, e));
                    } else {
                        return Err(Error::parse(line_no, format!("unknown key `{key}`")));
                    }
                }
            }
        }

        let missing = |k: &str| Error::parse(0, format!("missing required key `{k}`"));
        let species = SpeciesModel {
            name: name.ok_or_else(|| missing("name"))?,
            rydberg_au: rydberg_au.ok_or_else(|| missing("rydberg_au"))?,
            core_charge: core_charge.ok_or_else(|| missing("core_charge"))?,
            core_polarizability_au: alpha.ok_or_else(|| missing("core_polarizability_au"))?,
            nuclear_spin,
            defects,
            default_defect,
            potentials,
            default_potential,
            anchors,
        };
        if !(species.rydberg_au > 0.0) || species.core_charge == 0 || species.core_polarizability_au < 0.0 {
            return Err(Error::parse(0, "rydberg_au and core_charge must be positive, polarizability non-negative"));
        }
        Ok(species)
    }

    pub fn defect_series(&self, l: u32, j: HalfInteger) -> Result<QuantumDefectSeries> {
        if let Some(s) = self.defects.iter().find(|d| d.l == l && d.j == j) {
            return Ok(s.clone());
        }
        self.default_defect
            .as_ref()
            .map(|c| QuantumDefectSeries::new(l, j, c.clone()))
            .ok_or_else(|| Error::Config(format!("{}: no quantum-defect series for l={l}, j={j}", self.name)))
    }

    /// Replaces (or adds) the quantum-defect series for one (l, j) channel.
    pub fn set_defect_series(&mut self, series: QuantumDefectSeries) {
        self.defects.retain(|d| !(d.l == series.l && d.j == series.j));
        self.defects.push(series);
    }

    pub fn core_potential(&self, l: u32) -> Result<CorePotential> {
        self.potentials
            .get(&l)
            .copied()
            .or(self.default_potential)
            .ok_or_else(|| Error::Config(format!("{}: no model potential for l={l}", self.name)))
    }

    pub fn anchor_energy(&self, state: &RydbergState) -> Option<f64> {
        let key = state.fine();
        self.anchors.iter().find(|(s, _)| *s == key).map(|&(_, e)| e)
    }
}

fn parse_lj(sel: &str) -> std::result::Result<(u32, HalfInteger), String> {
    let mut chars = sel.chars();
    let l = chars
        .next()
        .and_then(l_from_letter)
        .ok_or_else(|| format!("bad channel selector `{sel}`"))?;
    let j: HalfInteger = chars.as_str().parse()?;
    Ok((l, j))
}

pub fn effective_n(state: &RydbergState, species: &SpeciesModel) -> Result<f64> {
    let series = species.defect_series(state.l, state.j)?;
    let n_star = state.n as f64 - quantum_defect(&series, state.n)?;
    if !(n_star > 0.0) {
        return Err(Error::Domain(format!("effective quantum number {n_star} ≤ 0 for {state}")));
    }
    Ok(n_star)
}

/// Binding energy in Hartree. Anchored states take the configured value;
/// everything else uses −Ry'/(n*)².
pub fn binding_energy(state: &RydbergState, species: &SpeciesModel) -> Result<f64> {
    if let Some(e) = species.anchor_energy(state) {
        return Ok(e);
    }
    let n_star = effective_n(state, species)?;
    Ok(-species.rydberg_au / (n_star * n_star))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn h(t: i32) -> HalfInteger {
        HalfInteger::from_twice(t)
    }

    #[test]
    fn defect_series_examples() {
        let zero = QuantumDefectSeries::new(2, h(5), vec![0.0, 0.0, 0.0]);
        assert_eq!(quantum_defect(&zero, 30).unwrap(), 0.0);

        let s = QuantumDefectSeries::new(2, h(5), vec![1.34, -0.60]);
        let d = quantum_defect(&s, 30).unwrap();
        assert!((d - (1.34 - 0.60 / (28.66f64 * 28.66))).abs() < 1e-15);
        assert!((d - 1.33927).abs() < 5e-6);

        let c = QuantumDefectSeries::new(0, h(1), vec![3.13]);
        for n in 4..60 {
            assert_eq!(quantum_defect(&c, n).unwrap(), 3.13);
        }
        let bad = QuantumDefectSeries::new(0, h(1), vec![3.13]);
        assert!(matches!(quantum_defect(&bad, 3), Err(Error::Domain(_))));
    }

    #[test]
    fn effective_n_and_energy() {
        let hyd = SpeciesModel::hydrogen();
        let s = RydbergState::new(20, 3, h(7)).unwrap();
        assert_eq!(effective_n(&s, &hyd).unwrap(), 20.0);
        let e2 = binding_energy(&RydbergState::new(2, 1, h(1)).unwrap(), &hyd).unwrap();
        assert_eq!(e2, -0.125);
        let e1 = binding_energy(&RydbergState::new(1, 0, h(1)).unwrap(), &hyd).unwrap();
        assert_eq!(e1, -0.5);

        let rb = SpeciesModel::rubidium87();
        let e = -rb.rydberg_au / (28.66073f64 * 28.66073);
        assert!((e + 6.087e-4).abs() < 1e-7);
    }

    #[test]
    fn non_positive_effective_n_is_rejected() {
        let mut sp = SpeciesModel::hydrogen();
        // n=1: δ = 0.5 + 1/0.25 = 4.5
        sp.set_defect_series(QuantumDefectSeries::new(0, h(1), vec![0.5, 1.0]));
        let s = RydbergState::new(1, 0, h(1)).unwrap();
        assert!(matches!(effective_n(&s, &sp), Err(Error::Domain(_))));
    }

    #[test]
    fn missing_series_is_a_config_error() {
        let mut sp = SpeciesModel::rubidium87();
        sp.default_defect = None;
        let s = RydbergState::new(30, 4, h(9)).unwrap();
        assert!(matches!(effective_n(&s, &sp), Err(Error::Config(_))));
    }

    #[test]
    fn anchors_override_defects() {
        let rb = SpeciesModel::rubidium87();
        let p = RydbergState::new(5, 1, h(3)).unwrap();
        assert!((binding_energy(&p, &rb).unwrap() + 0.0951101058).abs() < 1e-9);
    }

    #[test]
    fn parse_errors_carry_line_numbers() {
        let err = SpeciesModel::parse("name = X\nrydberg_au = 0.5\nbogus = 1\n").unwrap_err();
        match err {
            Error::Parse { line, .. } => assert_eq!(line, 3),
            other => panic!("{other:?}"),
        }
        assert!(SpeciesModel::parse("name = X\n").is_err());
        let dup = "name=X\nrydberg_au=0.5\ncore_charge=1\ncore_polarizability_au=0\ndefect.S1/2=0\ndefect.S1/2=1\n";
        assert!(matches!(SpeciesModel::parse(dup), Err(Error::Parse { line: 6, .. })));
    }
}
