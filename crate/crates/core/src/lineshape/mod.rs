//! Forward model of the probe spectrum.

mod beam;
mod cloud;
mod instrument;
mod ladder;
mod noise;
mod signal;
mod trace;

pub use beam::{rabi_max_from_power, rabi_profile, BeamGeometry};
pub use cloud::{column_density, CloudModel};
pub use instrument::{apply_instrument, InstrumentModel, InstrumentResponse, SweepDirection, CALIBRATED_SWEEP_SPAN_MHZ};
pub use ladder::{probe_cross_section, LadderSystem};
pub use noise::{add_noise, apply_noise};
pub use signal::{local_transmission, simulate_spectrum, transmission_signal, QuadratureConfig, SignalModel};
pub use trace::{uniform_grid, SpectrumTrace, Stage, ValueKind};
