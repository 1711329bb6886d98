//! Atomic structure: quantum-defect energies, Numerov radial wavefunctions in the
//! Coulomb approximation or a parametric core potential, and radial / reduced
//! dipole matrix elements.

mod external;
mod matrix;
mod numerov;
mod potential;
mod species;
mod state;

pub use external::{load_external_model, ExternalModelTable};
pub use matrix::{radial_matrix_element, radial_matrix_element_with, reduced_dipole, reduced_dipole_with};
pub use numerov::{
    inner_radius, numerov_radial, numerov_radial_with, outer_radius, radial_overlap, NumerovConfig,
    RadialWavefunction,
};
pub use potential::{potential, Model, ModelTag};
pub use species::{binding_energy, effective_n, quantum_defect, CorePotential, QuantumDefectSeries, SpeciesModel};
pub use state::{l_from_letter, l_letter, RydbergState};
