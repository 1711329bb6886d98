//! Electric-dipole moments of alkali Rydberg transitions from Autler–Townes spectra.
//!
//! The crate covers both directions of the measurement:
//!
//! * [`structure`] and [`angular`] compute dipole matrix elements from first
//!   principles (quantum defects, Numerov wavefunctions, Wigner algebra);
//! * [`lineshape`] is the forward model of a ladder-scheme probe spectrum through a
//!   cold cloud illuminated by a focused Gaussian coupling beam, including the
//!   detection chain;
//! * [`inference`] inverts it: spectrum fits, beam-waist fits from absorption
//!   images, Rabi frequency versus √P regression, dipole extraction and model
//!   comparison;
//! * [`io`] holds file formats, run configuration and the batch pipeline.

// `!(x > 0.0)` is how NaN gets rejected throughout
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod angular;
pub mod constants;
pub mod error;
pub mod inference;
pub mod io;
pub mod lineshape;
mod serde_float;
pub mod structure;

pub use error::{Error, Result};
