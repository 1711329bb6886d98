use super::numerov::{numerov_radial_with, radial_overlap, NumerovConfig};
use super::potential::Model;
use super::species::SpeciesModel;
use super::state::RydbergState;
use crate::angular::reduced_j_factor;
use crate::error::{Error, Result};

fn check_dipole_pair(a: &RydbergState, b: &RydbergState) -> Result<()> {
    if (a.l as i32 - b.l as i32).abs() != 1 {
        return Err(Error::SelectionRule(format!(
            "{a} → {b}: electric-dipole radial element needs |Δl| = 1"
        )));
    }
    Ok(())
}

/// ⟨a|r|b⟩ in atomic units.
pub fn radial_matrix_element(a: &RydbergState, b: &RydbergState, species: &SpeciesModel, model: &Model) -> Result<f64> {
    radial_matrix_element_with(a, b, species, model, &NumerovConfig::default())
}

pub fn radial_matrix_element_with(
    a: &RydbergState,
    b: &RydbergState,
    species: &SpeciesModel,
    model: &Model,
    cfg: &NumerovConfig,
) -> Result<f64> {
    check_dipole_pair(a, b)?;
    match model {
        Model::External(table) => table.lookup(a, b),
        Model::Nca | Model::Mmp => {
            let tag = model.tag();
            let wa = numerov_radial_with(a, species, &tag, cfg)?;
            let wb = numerov_radial_with(b, species, &tag, cfg)?;
            radial_overlap(&wa, &wb, 1)
        }
    }
}

/// ⟨n_a l_a j_a‖d‖n_b l_b j_b⟩ in units of e·a₀, `a` being the lower level.
pub fn reduced_dipole(a: &RydbergState, b: &RydbergState, species: &SpeciesModel, model: &Model) -> Result<f64> {
    reduced_dipole_with(a, b, species, model, &NumerovConfig::default())
}

pub fn reduced_dipole_with(
    a: &RydbergState,
    b: &RydbergState,
    species: &SpeciesModel,
    model: &Model,
    cfg: &NumerovConfig,
) -> Result<f64> {
    check_dipole_pair(a, b)?;
    let factor = reduced_j_factor(a.l, a.j, b.l, b.j)?;
    Ok(factor * radial_matrix_element_with(a, b, species, model, cfg)?)
}
