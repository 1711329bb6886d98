//! Regression against the bundled golden dataset in examples/golden.

use std::path::PathBuf;

use rydberg_at::inference::DipoleEstimate;
use rydberg_at::io::{run_pipeline, RunConfig, SpectrumSource};

fn golden() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("examples/golden")
}

fn expected_dipoles() -> Vec<DipoleEstimate> {
    serde_json::from_str(&std::fs::read_to_string(golden().join("expected/dipoles.json")).unwrap()).unwrap()
}

#[test]
fn regenerating_reproduces_spectra_and_digest() {
    let cfg = RunConfig::load(&golden().join("pipeline.cfg")).unwrap();
    let dir = tempfile::tempdir().unwrap();
    let report = run_pipeline(&cfg, Some(dir.path())).unwrap();
    for entry in std::fs::read_dir(golden().join("spectra")).unwrap() {
        let path = entry.unwrap().path();
        let name = path.file_name().unwrap();
        let fresh = std::fs::read(dir.path().join("spectra").join(name)).unwrap();
        assert!(fresh == std::fs::read(&path).unwrap(), "{name:?} differs");
    }
    let digest = std::fs::read_to_string(golden().join("expected/outputs_digest.txt")).unwrap();
    assert_eq!(report.outputs_digest.as_deref(), Some(digest.trim()));
}

#[test]
fn refitting_stored_spectra_gives_expected_dipoles() {
    let mut cfg = RunConfig::load(&golden().join("pipeline.cfg")).unwrap();
    cfg.source = SpectrumSource::Load;
    cfg.spectra_dir = Some(golden().join("spectra"));
    let report = run_pipeline(&cfg, None).unwrap();
    let want = expected_dipoles();
    assert_eq!(report.dipoles.len(), want.len());
    for (got, want) in report.dipoles.iter().zip(&want) {
        assert_eq!(got.n, want.n);
        // decimal MHz detunings move the grid by an ulp; weakly constrained
        // fits can drift along flat directions by far less than their error
        assert!((got.mu_au - want.mu_au).abs() < 0.01 * want.sigma_mu_au, "n={}: {} vs {}", got.n, got.mu_au, want.mu_au);
        assert!((got.sigma_mu_au / want.sigma_mu_au - 1.0).abs() < 0.01);
    }
    let cmp: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(golden().join("expected/comparison.json")).unwrap()).unwrap();
    let ranking: Vec<String> = serde_json::from_value(cmp["ranking"].clone()).unwrap();
    assert_eq!(report.comparison.unwrap().ranking, ranking);
}
