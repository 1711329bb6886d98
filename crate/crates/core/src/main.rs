//! Command-line front end. All the work lives in the library.

use std::io::Write as _;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use rydberg_at::io::{commands, RunConfig};
use rydberg_at::{Error, Result};

#[derive(Parser)]
#[command(name = "rydberg-at", version, about = "Rydberg dipole moments from Autler-Townes spectra")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone)]
struct Common {
    /// Run configuration (key = value). Defaults apply when omitted.
    #[arg(long, value_name = "FILE")]
    config: Option<PathBuf>,
    /// Output directory [default: run.output_dir from the config]
    #[arg(long, value_name = "DIR")]
    out: Option<PathBuf>,
    /// Overrides run.seed.
    #[arg(long)]
    seed: Option<u64>,
}

#[derive(Subcommand)]
enum Command {
    /// Quantum defects, effective n and binding energies of structure.states.
    Qdefect(Common),
    /// Radial matrix elements for structure.transitions under structure.models.
    RadialMe(Common),
    /// Reduced dipole elements (and the stretched-transition dipole).
    ReducedMe(Common),
    /// Synthesise an Autler-Townes probe spectrum.
    Simulate(Common),
    /// Fit a spectrum file.
    Fit {
        #[command(flatten)]
        common: Common,
        /// Spectrum CSV to fit.
        #[arg(long, value_name = "FILE")]
        input: PathBuf,
        /// Fit the coupling-off line for the broadened width instead.
        #[arg(long)]
        two_level: bool,
    },
    /// Fit coupling-beam waists to an absorption image (PGM or matrix text).
    FitWaist {
        #[command(flatten)]
        common: Common,
        #[arg(long, value_name = "FILE")]
        input: PathBuf,
    },
    /// Spectra to dipoles to model comparison, over pipeline.n_list × pipeline.powers_mW.
    Pipeline(Common),
    /// Rank theory models against measured reduced elements (a dipoles.json).
    CompareModels {
        #[command(flatten)]
        common: Common,
        /// Measured reduced elements (`dipoles.json` from a pipeline run)
        #[arg(long, value_name = "FILE")]
        input: PathBuf,
    },
}

fn setup(common: &Common) -> Result<(RunConfig, PathBuf)> {
    let mut cfg = match &common.config {
        Some(p) => RunConfig::load(p)?,
        None => RunConfig::default(),
    };
    if let Some(s) = common.seed {
        cfg.seed = s;
    }
    let out = common.out.clone().unwrap_or_else(|| cfg.output_dir.clone());
    std::fs::create_dir_all(&out)?;
    Ok((cfg, out))
}

fn run(cmd: Command) -> Result<serde_json::Value> {
    type Job = Box<dyn FnOnce(&RunConfig, &Path) -> Result<commands::CommandOutput>>;
    let (common, job): (Common, Job) = match cmd {
        Command::Qdefect(c) => (c, Box::new(commands::qdefect)),
        Command::RadialMe(c) => (c, Box::new(commands::radial_me)),
        Command::ReducedMe(c) => (c, Box::new(commands::reduced_me)),
        Command::Simulate(c) => (c, Box::new(commands::simulate)),
        Command::Fit { common, input, two_level } => {
            (common, Box::new(move |cfg: &RunConfig, out: &Path| commands::fit(cfg, &input, out, two_level)))
        }
        Command::FitWaist { common, input } => {
            (common, Box::new(move |cfg: &RunConfig, out: &Path| commands::fit_waist(cfg, &input, out)))
        }
        Command::Pipeline(c) => (c, Box::new(commands::pipeline)),
        Command::CompareModels { common, input } => {
            (common, Box::new(move |cfg: &RunConfig, out: &Path| commands::compare_models(cfg, &input, out)))
        }
    };
    let (cfg, out) = setup(&common)?;
    let result = job(&cfg, &out)?;
    Ok(serde_json::json!({ "summary": result.summary, "outputs_digest": result.outputs_digest }))
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    match run(cli.command) {
        Ok(v) => {
            // a closed pipe downstream is not our failure
            let _ = writeln!(std::io::stdout(), "{}", serde_json::to_string_pretty(&v).unwrap_or_default());
            ExitCode::SUCCESS
        }
        Err(e) => {
            report(&e);
            ExitCode::from(e.exit_code() as u8)
        }
    }
}

fn report(e: &Error) {
    let v = serde_json::json!({ "error": { "category": e.category(), "message": e.to_string() } });
    eprintln!("{v}");
}
