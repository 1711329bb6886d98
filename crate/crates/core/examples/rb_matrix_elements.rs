//! Reduced dipole matrix elements for Rb 5P₃/₂ → nD₅/₂ in the numeric Coulomb
//! approximation and the core model potential.
//!
//! ```bash
//! cargo run -p rydberg-at --example rb_matrix_elements
//! ```

use rydberg_at::angular::HalfInteger;
use rydberg_at::structure::{effective_n, reduced_dipole, Model, RydbergState, SpeciesModel};

fn main() -> rydberg_at::Result<()> {
    let rb = SpeciesModel::rubidium87();
    let lower: RydbergState = "5P3/2".parse()?;
    println!("{:>4} {:>10} {:>12} {:>12} {:>14}", "n", "n*", "NCA (ea0)", "MMP (ea0)", "NCA·n*^1.5");
    for n in (20..=48).step_by(4) {
        let upper = RydbergState::new(n, 2, HalfInteger::from_twice(5))?;
        let ns = effective_n(&upper, &rb)?;
        let nca = reduced_dipole(&lower, &upper, &rb, &Model::Nca)?;
        let mmp = reduced_dipole(&lower, &upper, &rb, &Model::Mmp)?;
        println!("{n:>4} {ns:>10.5} {nca:>12.6} {mmp:>12.6} {:>14.6}", nca * ns.powf(1.5));
    }
    Ok(())
}
