use std::fmt;

use serde::{Deserialize, Serialize};

use super::external::ExternalModelTable;
use super::species::SpeciesModel;
use crate::error::{Error, Result};

/// Which theory produces a matrix element.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum ModelTag {
    /// Numerov integration in a pure Coulomb potential at quantum-defect energies.
    Nca,
    /// Numerov integration in the parametric core model potential.
    Mmp,
    /// An imported prediction table.
    External(String),
}

impl ModelTag {
    pub fn name(&self) -> &str {
        match self {
            ModelTag::Nca => "NCA",
            ModelTag::Mmp => "MMP",
            ModelTag::External(n) => n,
        }
    }

    pub fn parse(s: &str) -> Self {
        match s.trim().to_ascii_uppercase().as_str() {
            "NCA" => ModelTag::Nca,
            "MMP" => ModelTag::Mmp,
            _ => ModelTag::External(s.trim().to_string()),
        }
    }
}

impl fmt::Display for ModelTag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// A model resolved against the tables it may need.
#[derive(Clone, Copy, Debug)]
pub enum Model<'a> {
    Nca,
    Mmp,
    External(&'a ExternalModelTable),
}

impl Model<'_> {
    pub fn tag(&self) -> ModelTag {
        match self {
            Model::Nca => ModelTag::Nca,
            Model::Mmp => ModelTag::Mmp,
            Model::External(t) => ModelTag::External(t.name.clone()),
        }
    }
}

/// Effective radial potential (including the centrifugal term), Hartree.
pub fn potential(r: f64, l: u32, species: &SpeciesModel, model: &ModelTag) -> Result<f64> {
    if !(r > 0.0) {
        return Err(Error::Domain(format!("potential needs r > 0, got {r}")));
    }
    let centrifugal = (l * (l + 1)) as f64 / (2.0 * r * r);
    match model {
        ModelTag::Nca => Ok(-1.0 / r + centrifugal),
        ModelTag::Mmp => {
            let c = species.core_potential(l)?;
            let z = species.core_charge as f64;
            let z_eff = 1.0 + (z - 1.0) * (-c.a1 * r).exp() - r * (c.a3 + c.a4 * r) * (-c.a2 * r).exp();
            let pol = species.core_polarizability_au / (2.0 * r.powi(4)) * (1.0 - (-(r / c.rc).powi(6)).exp());
            Ok(-z_eff / r - pol + centrifugal)
        }
        ModelTag::External(name) => Err(Error::Unsupported(format!(
            "external model `{name}` is a prediction table and has no potential"
        ))),
    }
}
