//! Runs the full pipeline on the bundled golden configuration and prints the
//! recovered dipoles next to the truth and the model ranking.
//!
//! ```bash
//! cargo run --release -p rydberg-at --example golden_pipeline -- /tmp/golden_out
//! ```

use std::path::PathBuf;

use rydberg_at::io::{run_pipeline, RunConfig};

fn main() -> rydberg_at::Result<()> {
    let golden = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("examples/golden");
    let cfg = RunConfig::load(&golden.join("pipeline.cfg"))?;
    let out = std::env::args().nth(1).map(PathBuf::from);
    if let Some(dir) = &out {
        std::fs::create_dir_all(dir)?;
    }
    let report = run_pipeline(&cfg, out.as_deref())?;

    for n in &report.per_n {
        match (&n.dipole, n.truth_mu_au) {
            (Some(d), Some(truth)) => println!(
                "n = {:>2}: μ = {:.4} ± {:.4} ea₀ (truth {truth:.4}), {} of {} points in the regression",
                n.n,
                d.mu_au,
                d.sigma_mu_au,
                n.points.iter().filter(|p| p.used_in_regression).count(),
                n.points.len()
            ),
            _ => println!("n = {:>2}: no estimate ({:?})", n.n, n.error),
        }
    }
    if let Some(c) = &report.comparison {
        println!("model ranking: {}", c.ranking.join(" < "));
    }
    if let Some(d) = &report.outputs_digest {
        println!("outputs digest {d}");
    }
    Ok(())
}
