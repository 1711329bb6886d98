//! Plain CSV series for plotting: Ω against √P per n, and the reduced
//! element against n next to each model's prediction.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use super::pipeline::PipelineReport;
use super::write_atomic;
use crate::constants::rad_to_mhz;
use crate::error::Result;

/// Writes `plots/power_series_n{n}.csv` for every n with fitted points and
/// `plots/reduced_vs_n.csv`. Output depends only on the report, so
/// re-emitting gives identical bytes. Returns paths relative to `dir`.
pub fn emit_plot_data(report: &PipelineReport, dir: &Path) -> Result<Vec<PathBuf>> {
    let mut files = Vec::new();
    for nr in &report.per_n {
        let fitted: Vec<_> = nr.points.iter().filter_map(|p| p.fit.as_ref().map(|f| (p, f))).collect();
        if fitted.is_empty() {
            continue;
        }
        let mut s = format!("# n: {}\nsqrt_power_sqrt_mW,rabi_MHz,sigma_rabi_MHz,line_MHz,used\n", nr.n);
        for (p, f) in fitted {
            let x = p.reported_power_mw.sqrt();
            let line = nr
                .linear_fit
                .map(|l| rad_to_mhz(l.gradient * (p.reported_power_mw * 1e-3).sqrt() + l.intercept))
                .unwrap_or(f64::NAN);
            let _ = writeln!(
                s,
                "{x:?},{:?},{:?},{line:?},{}",
                f.rabi_max_mhz, f.sigma_rabi_max_mhz, p.used_in_regression as u8
            );
        }
        let rel = PathBuf::from(format!("plots/power_series_n{}.csv", nr.n));
        write_atomic(&dir.join(&rel), s.as_bytes())?;
        files.push(rel);
    }

    let mut s = String::from("n,measured_au,sigma_au");
    for p in &report.predictions {
        let _ = write!(s, ",{}", p.name);
    }
    s.push('\n');
    for d in &report.dipoles {
        let (Some(v), Some(e)) = (d.reduced_au, d.sigma_reduced_au) else { continue };
        let _ = write!(s, "{},{:?},{:?}", d.n, v.abs(), e);
        for p in &report.predictions {
            match p.values.get(&d.n) {
                Some(m) => {
                    let _ = write!(s, ",{:?}", m.abs());
                }
                None => s.push(','),
            }
        }
        s.push('\n');
    }
    let rel = PathBuf::from("plots/reduced_vs_n.csv");
    write_atomic(&dir.join(&rel), s.as_bytes())?;
    files.push(rel);
    Ok(files)
}
