//! Inverse problem: simulate noisy spectra at a few coupling Rabi frequencies,
//! fit them with the detection chain in the model, and recover beam waists
//! from an absorption image.
//!
//! ```bash
//! cargo run --release -p rydberg-at --example fit_spectrum
//! ```

use rydberg_at::constants::{mhz_to_rad, rad_to_mhz};
use rydberg_at::inference::{fit_at_spectrum, fit_beam_waists, simulate_image, AtFitOptions, LmConfig};
use rydberg_at::lineshape::{
    add_noise, apply_instrument, simulate_spectrum, uniform_grid, BeamGeometry, CloudModel, InstrumentModel,
    LadderSystem, QuadratureConfig,
};

fn main() -> rydberg_at::Result<()> {
    let sys = LadderSystem::default();
    let cloud = CloudModel::paper_default();
    let inst = InstrumentModel::default();
    let grid = uniform_grid(mhz_to_rad(-60.0), mhz_to_rad(60.0), 481)?;

    println!("{:>10} {:>12} {:>10} {:>8}", "true MHz", "fitted MHz", "σ MHz", "χ²_ν");
    for (k, rabi) in [15.0, 30.0, 45.0].into_iter().enumerate() {
        let beam = BeamGeometry::with_rabi_max(240e-6, 172e-6, mhz_to_rad(rabi));
        let ideal = simulate_spectrum(&grid, &sys, &beam, &cloud, &QuadratureConfig::default())?;
        let trace = add_noise(&apply_instrument(&ideal, &inst)?, 0.01, k as u64)?;
        let fit = fit_at_spectrum(&trace, &sys, &beam, &cloud, Some(&inst), &AtFitOptions::default())?;
        println!(
            "{rabi:>10.2} {:>12.3} {:>10.3} {:>8.2e}",
            rad_to_mhz(fit.rabi_max),
            rad_to_mhz(fit.sigma_rabi_max),
            fit.reduced_chi2
        );
    }

    let truth = BeamGeometry::with_rabi_max(240e-6, 172e-6, mhz_to_rad(20.0));
    let image = simulate_image(64, 64, 20e-6, 0.0, &sys, &truth, &cloud)?;
    let prior = BeamGeometry::with_rabi_max(200e-6, 200e-6, mhz_to_rad(15.0));
    let w = fit_beam_waists(&image, &sys, &cloud, &prior, &LmConfig::default())?;
    println!(
        "waists from the transparency hole: {:.1} ± {:.1} μm × {:.1} ± {:.1} μm",
        w.w_maj * 1e6,
        w.sigma_w_maj * 1e6,
        w.w_min * 1e6,
        w.sigma_w_min * 1e6
    );
    Ok(())
}
