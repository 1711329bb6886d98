use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::process::Command;

use proptest::prelude::*;
use rydberg_at::io::{digest_outputs, format_spectrum, parse_spectrum, DetuningUnit, FitModeSetting, RunConfig};
use rydberg_at::lineshape::{SpectrumTrace, Stage, ValueKind};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_rydberg-at"))
}

const SUBCOMMANDS: [&str; 8] =
    ["qdefect", "radial-me", "reduced-me", "simulate", "fit", "fit-waist", "pipeline", "compare-models"];

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn config_text_round_trips(
        gamma in 1.0f64..20.0,
        w in 50.0f64..500.0,
        seed in any::<u64>(),
        noise in 0.0f64..0.1,
        ns in prop::collection::vec(15u32..80, 1..6),
        powers in prop::collection::vec(0.1f64..200.0, 1..8),
        rabi in prop::option::of(1.0f64..100.0),
        mode in 0usize..3,
        inf_corner in any::<bool>(),
    ) {
        let mut cfg = RunConfig {
            gamma_mhz: gamma,
            w_maj_um: w,
            seed,
            noise_relative: noise,
            n_list: ns,
            powers_mw: powers,
            rabi_max_mhz: rabi,
            fit_mode: [FitModeSetting::Instrument, FitModeSetting::Broadened, FitModeSetting::Both][mode],
            ..RunConfig::default()
        };
        if inf_corner {
            cfg.corner_frequency_khz = f64::INFINITY;
        }
        let text = cfg.to_text();
        let back = RunConfig::parse(&text).unwrap();
        prop_assert_eq!(&back, &cfg);
        prop_assert_eq!(back.to_text(), text);
    }

    #[test]
    fn spectrum_csv_round_trips_exactly(
        start in -1e9f64..0.0,
        steps in prop::collection::vec(1e3f64..1e8, 2..60),
        values in prop::collection::vec(-1.0f64..2.0, 61),
        cross in any::<bool>(),
    ) {
        let mut d = vec![start];
        for s in &steps {
            let next = d.last().unwrap() + s;
            d.push(next);
        }
        let v = values[..d.len()].to_vec();
        let kind = if cross { ValueKind::CrossSection } else { ValueKind::Transmission };
        let t = SpectrumTrace::new(d, v, kind, Stage::Ideal).unwrap();
        let f = parse_spectrum(&format_spectrum(&t, DetuningUnit::RadPerSecond, &BTreeMap::new())).unwrap();
        prop_assert_eq!(f.trace, t);
    }
}

#[test]
fn ledger_digest_ignores_listing_order() {
    let dir = tempfile::tempdir().unwrap();
    for (name, body) in [("a.txt", "one"), ("b/c.txt", "two"), ("d.json", "{}")] {
        let p = dir.path().join(name);
        std::fs::create_dir_all(p.parent().unwrap()).unwrap();
        std::fs::write(p, body).unwrap();
    }
    let files: Vec<PathBuf> = ["a.txt", "b/c.txt", "d.json"].iter().map(PathBuf::from).collect();
    let mut rev = files.clone();
    rev.reverse();
    let (_, d1) = digest_outputs(dir.path(), &files).unwrap();
    let (_, d2) = digest_outputs(dir.path(), &rev).unwrap();
    assert_eq!(d1, d2);
    std::fs::write(dir.path().join("a.txt"), "changed").unwrap();
    let (_, d3) = digest_outputs(dir.path(), &files).unwrap();
    assert_ne!(d1, d3);
}

#[test]
fn help_on_every_subcommand() {
    let top = bin().arg("--help").output().unwrap();
    assert!(top.status.success());
    for sub in SUBCOMMANDS {
        let out = bin().args([sub, "--help"]).output().unwrap();
        assert!(out.status.success(), "{sub}");
        let text = String::from_utf8_lossy(&out.stdout);
        for flag in ["--config", "--out", "--seed"] {
            assert!(text.contains(flag), "{sub} --help lacks {flag}");
        }
    }
}

fn error_category(stderr: &[u8]) -> String {
    let v: serde_json::Value = serde_json::from_slice(stderr).expect("stderr is one JSON object");
    v["error"]["category"].as_str().unwrap().to_string()
}

#[test]
fn errors_have_categories_and_exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().to_str().unwrap();

    let missing = bin().args(["qdefect", "--config", "/no/such/file.cfg", "--out", out]).output().unwrap();
    assert_eq!(missing.status.code(), Some(3));
    assert_eq!(error_category(&missing.stderr), "file-not-found");

    let cfg = dir.path().join("bad.cfg");
    std::fs::write(&cfg, "ladder.gamma_MHz = 6.065\nbogus.key = 1\n").unwrap();
    let bad = bin().args(["qdefect", "--config", cfg.to_str().unwrap(), "--out", out]).output().unwrap();
    assert_eq!(bad.status.code(), Some(4));
    assert_eq!(error_category(&bad.stderr), "parse");
    assert!(String::from_utf8_lossy(&bad.stderr).contains("bad.cfg:2:"));

    let flag = bin().args(["qdefect", "--frobnicate"]).output().unwrap();
    assert_eq!(flag.status.code(), Some(2));

    let no_input = bin().args(["fit", "--input", "/no/such.csv", "--out", out]).output().unwrap();
    assert_eq!(no_input.status.code(), Some(3));
}

fn small_config(dir: &Path) -> PathBuf {
    let p = dir.join("small.cfg");
    let text = "sweep.points = 161\nquadrature.cells = 32\nrun.noise_relative = 0.01\nbeam.rabi_max_MHz = 25\n";
    std::fs::write(&p, text).unwrap();
    p
}

fn run_ok(args: &[&str]) -> serde_json::Value {
    let out = bin().args(args).output().unwrap();
    assert!(out.status.success(), "{args:?}: {}", String::from_utf8_lossy(&out.stderr));
    serde_json::from_slice(&out.stdout).unwrap()
}

#[test]
fn simulate_then_fit_from_the_command_line() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = small_config(dir.path());
    let (c, o) = (cfg.to_str().unwrap(), dir.path().to_str().unwrap());
    let sim = run_ok(&["simulate", "--config", c, "--out", o, "--seed", "5"]);
    let again = run_ok(&["simulate", "--config", c, "--out", o, "--seed", "5"]);
    assert_eq!(sim["outputs_digest"], again["outputs_digest"]);
    let other = run_ok(&["simulate", "--config", c, "--out", o, "--seed", "6"]);
    assert_ne!(sim["outputs_digest"], other["outputs_digest"]);

    let spectrum = dir.path().join("spectrum.csv");
    let fit = run_ok(&["fit", "--config", c, "--out", o, "--input", spectrum.to_str().unwrap()]);
    let rabi = fit["summary"]["rabi_max_mhz"].as_f64().unwrap();
    let sigma = fit["summary"]["sigma_rabi_max_mhz"].as_f64().unwrap();
    assert!((rabi - 25.0).abs() < 4.0 * sigma + 0.05, "{rabi} ± {sigma}");
    assert!(dir.path().join("fit.json").exists());

    let ledger = std::fs::read_to_string(dir.path().join("ledger.jsonl")).unwrap();
    assert_eq!(ledger.lines().count(), 4);
    for line in ledger.lines() {
        let v: serde_json::Value = serde_json::from_str(line).unwrap();
        assert!(v["outputs_digest"].as_str().unwrap().len() == 64);
    }
}

#[test]
fn structure_commands_write_their_tables() {
    let dir = tempfile::tempdir().unwrap();
    let o = dir.path().to_str().unwrap();
    let q = run_ok(&["qdefect", "--out", o]);
    assert!(q["summary"].is_array() || q["summary"].is_object());
    assert!(dir.path().join("qdefect.json").exists());
    run_ok(&["reduced-me", "--out", o]);
    let v: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("reduced_me.json")).unwrap()).unwrap();
    let text = v.to_string();
    assert!(text.contains("stretched_factor"), "{text}");
}
