mod common;

use rydberg_at::angular::HalfInteger;
use rydberg_at::structure::{
    binding_energy, effective_n, numerov_radial, numerov_radial_with, radial_matrix_element,
    radial_matrix_element_with, reduced_dipole, ExternalModelTable, Model, ModelTag, NumerovConfig,
    QuantumDefectSeries, RadialWavefunction, RydbergState, SpeciesModel,
};
use rydberg_at::Error;

fn st(n: u32, l: u32) -> RydbergState {
    RydbergState::stretched_j(n, l).unwrap()
}

fn sign_changes(p: &[f64]) -> usize {
    // skip the numerical dust in the far tail and at the origin
    let peak = p.iter().map(|v| v.abs()).fold(0.0, f64::max);
    let kept: Vec<f64> = p.iter().copied().filter(|v| v.abs() > 1e-8 * peak).collect();
    kept.windows(2).filter(|w| w[0] * w[1] < 0.0).count()
}

/// Simpson's rule for ∫ P² dr on the √r grid, written out independently.
fn simpson_norm(w: &RadialWavefunction) -> f64 {
    let f: Vec<f64> = (0..w.p.len()).map(|k| w.p[k] * w.p[k] * 2.0 * w.x(k)).collect();
    let m = if f.len().is_multiple_of(2) { f.len() - 1 } else { f.len() };
    let mut s = f[0] + f[m - 1];
    for (k, v) in f.iter().enumerate().take(m - 1).skip(1) {
        s += if k % 2 == 1 { 4.0 * v } else { 2.0 * v };
    }
    s * w.step / 3.0
}

#[test]
fn hydrogen_closed_forms() {
    let h = SpeciesModel::hydrogen();
    for (n, l, np, lp, tol) in [(1, 0, 2, 1, 1e-3), (2, 0, 2, 1, 1e-3), (1, 0, 3, 1, 1e-3)] {
        let exact = common::hydrogen_radial(n, l, np, lp).unwrap();
        let v = radial_matrix_element(&st(n, l), &st(np, lp), &h, &Model::Nca).unwrap();
        assert!(((v.abs() - exact) / exact).abs() < tol, "{n}{l}-{np}{lp}: {v} vs {exact}");
    }
}

#[test]
fn hydrogen_nodes_and_normalisation() {
    let h = SpeciesModel::hydrogen();
    for n in 1..=20 {
        for l in 0..n {
            let w = numerov_radial(&st(n, l), &h, &ModelTag::Nca).unwrap();
            assert_eq!(sign_changes(&w.p), (n - l - 1) as usize, "n={n} l={l}");
            assert!(!w.node_warning);
            assert!((w.norm() - 1.0).abs() < 1e-6);
            assert!((simpson_norm(&w) - 1.0).abs() < 1e-6, "n={n} l={l}: {}", simpson_norm(&w));
        }
    }
}

#[test]
fn hydrogen_energy_is_half_over_n_squared() {
    let h = SpeciesModel::hydrogen();
    for n in [1, 5, 30] {
        let e = binding_energy(&st(n, 0), &h).unwrap();
        assert!((e + 0.5 / (n * n) as f64).abs() < 1e-15);
    }
}

#[test]
fn rb_grid_refinement_changes_little() {
    let rb = SpeciesModel::rubidium87();
    let p: RydbergState = "5P3/2".parse().unwrap();
    for n in [22, 44] {
        let d = RydbergState::new(n, 2, HalfInteger::from_twice(5)).unwrap();
        for model in [Model::Nca, Model::Mmp] {
            let coarse = radial_matrix_element_with(&p, &d, &rb, &model, &NumerovConfig { step: 0.01, ..Default::default() }).unwrap();
            let fine = radial_matrix_element_with(&p, &d, &rb, &model, &NumerovConfig { step: 0.005, ..Default::default() }).unwrap();
            assert!(((coarse - fine) / fine).abs() < 1e-3, "n={n} {:?}: {coarse} vs {fine}", model.tag());
        }
    }
}

#[test]
fn rydberg_ritz_by_hand() {
    let rb = SpeciesModel::rubidium87();
    // δ = 1.34646572 − 0.596/(n − 1.34646572)²
    for n in [20u32, 33, 48] {
        let d = RydbergState::new(n, 2, HalfInteger::from_twice(5)).unwrap();
        let base = n as f64 - 1.34646572;
        let want = n as f64 - (1.34646572 - 0.596 / (base * base));
        assert!((effective_n(&d, &rb).unwrap() - want).abs() < 1e-12);
    }
    let s = QuantumDefectSeries::new(0, HalfInteger::HALF, vec![3.0, 0.5, 0.25]);
    let b: f64 = 7.0;
    let want = 3.0 + 0.5 / b.powi(2) + 0.25 / b.powi(4);
    assert!((rydberg_at::structure::quantum_defect(&s, 10).unwrap() - want).abs() < 1e-15);
}

#[test]
fn nca_and_mmp_agree_roughly_for_rydberg_d() {
    let rb = SpeciesModel::rubidium87();
    let p: RydbergState = "5P3/2".parse().unwrap();
    let d: RydbergState = "30D5/2".parse().unwrap();
    let a = reduced_dipole(&p, &d, &rb, &Model::Nca).unwrap();
    let b = reduced_dipole(&p, &d, &rb, &Model::Mmp).unwrap();
    assert!(((a - b) / a).abs() < 0.05, "{a} vs {b}");
}

#[test]
fn external_table_lookup_and_miss() {
    let text = "# model: TAB\n5 1 3/2 22 2 5/2 0.123\n";
    let t = ExternalModelTable::parse(text, "x").unwrap();
    assert_eq!(t.name, "TAB");
    let rb = SpeciesModel::rubidium87();
    let p: RydbergState = "5P3/2".parse().unwrap();
    let d22: RydbergState = "22D5/2".parse().unwrap();
    let d23: RydbergState = "23D5/2".parse().unwrap();
    assert_eq!(radial_matrix_element(&d22, &p, &rb, &Model::External(&t)).unwrap(), 0.123);
    let miss = radial_matrix_element(&p, &d23, &rb, &Model::External(&t));
    assert!(matches!(miss, Err(Error::Lookup(_))), "{miss:?}");
    assert!(matches!(ExternalModelTable::parse("5 1 3/2 22 2\n", "x"), Err(Error::Parse { line: 1, .. })));
}

#[test]
fn invalid_states_rejected() {
    assert!("3F1/2".parse::<RydbergState>().is_err());
    assert!("2D5/2".parse::<RydbergState>().is_err());
    assert!(RydbergState::new(5, 1, HalfInteger::from_twice(5)).is_err());
    let rb = SpeciesModel::rubidium87();
    let bad = numerov_radial_with(&st(20, 2), &rb, &ModelTag::Nca, &NumerovConfig { step: -1.0, ..Default::default() });
    assert!(bad.is_err());
}
