//! Forward model: an Autler–Townes probe spectrum before and after the
//! detection chain, printed as detuning / ideal / measured columns.
//!
//! ```bash
//! cargo run -p rydberg-at --example at_spectrum -- 30
//! ```

use rydberg_at::constants::{mhz_to_rad, rad_to_mhz};
use rydberg_at::lineshape::{
    add_noise, apply_instrument, simulate_spectrum, uniform_grid, BeamGeometry, CloudModel, InstrumentModel,
    LadderSystem, QuadratureConfig,
};

fn main() -> rydberg_at::Result<()> {
    let rabi_mhz: f64 = std::env::args().nth(1).and_then(|s| s.parse().ok()).unwrap_or(30.0);
    let grid = uniform_grid(mhz_to_rad(-60.0), mhz_to_rad(60.0), 121)?;
    let beam = BeamGeometry::with_rabi_max(240e-6, 172e-6, mhz_to_rad(rabi_mhz));
    let ideal = simulate_spectrum(&grid, &LadderSystem::default(), &beam, &CloudModel::paper_default(), &QuadratureConfig::default())?;
    let measured = add_noise(&apply_instrument(&ideal, &InstrumentModel::default())?, 0.01, 1)?;

    println!("# peak coupling Rabi frequency {rabi_mhz} MHz");
    println!("detuning_MHz,ideal,measured");
    for ((d, a), b) in ideal.detuning.iter().zip(&ideal.value).zip(&measured.value) {
        println!("{:.1},{a:.5},{b:.5}", rad_to_mhz(*d));
    }
    Ok(())
}
