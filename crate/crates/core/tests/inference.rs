use proptest::prelude::*;
use rydberg_at::angular::HyperfineTransition;
use rydberg_at::constants::{dipole_au_to_si, mhz_to_rad, rad_to_mhz};
use rydberg_at::inference::{
    chi_squared_compare, dipole_from_gradient, fit_at_spectrum, fit_beam_waists, fit_power_series,
    levenberg_marquardt, simulate_image, AtFitOptions, BeamCalibration, DipoleEstimate, LmConfig, ModelPrediction,
    PowerSeriesPoint,
};
use rydberg_at::lineshape::{
    add_noise, apply_instrument, rabi_max_from_power, simulate_spectrum, uniform_grid, BeamGeometry, CloudModel,
    InstrumentModel, LadderSystem, QuadratureConfig, SpectrumTrace,
};

const W_MAJ: f64 = 240e-6;
const W_MIN: f64 = 172e-6;

fn quad() -> QuadratureConfig {
    QuadratureConfig { cells: 32, ..QuadratureConfig::default() }
}

fn synth(rabi_mhz: f64, points: usize, inst: Option<&InstrumentModel>) -> SpectrumTrace {
    let grid = uniform_grid(mhz_to_rad(-60.0), mhz_to_rad(60.0), points).unwrap();
    let beam = BeamGeometry::with_rabi_max(W_MAJ, W_MIN, mhz_to_rad(rabi_mhz));
    let t = simulate_spectrum(&grid, &LadderSystem::default(), &beam, &CloudModel::paper_default(), &quad()).unwrap();
    match inst {
        Some(i) => apply_instrument(&t, i).unwrap(),
        None => t,
    }
}

fn fit(trace: &SpectrumTrace, inst: Option<&InstrumentModel>) -> rydberg_at::inference::FitResult {
    let opts = AtFitOptions { quadrature: quad(), ..AtFitOptions::default() };
    let beam = BeamGeometry::with_rabi_max(W_MAJ, W_MIN, 1.0);
    fit_at_spectrum(trace, &LadderSystem::default(), &beam, &CloudModel::paper_default(), inst, &opts).unwrap()
}

#[test]
fn lm_solves_a_known_exponential() {
    // y = 3 e^{−0.7 t} + 0.5, exact data
    let t: Vec<f64> = (0..40).map(|k| k as f64 * 0.1).collect();
    let y: Vec<f64> = t.iter().map(|t| 3.0 * (-0.7 * t).exp() + 0.5).collect();
    let f = |p: &[f64]| Ok(t.iter().zip(&y).map(|(t, y)| p[0] * (-p[1] * t).exp() + p[2] - y).collect());
    let out = levenberg_marquardt(f, &[1.0, 0.1, 0.0], &LmConfig::default()).unwrap();
    for (got, want) in out.params.iter().zip([3.0, 0.7, 0.5]) {
        assert!((got - want).abs() < 1e-6, "{got} vs {want}");
    }
    assert!(out.trace.windows(2).all(|w| w[1] <= w[0]));
}

/// Standardised errors of the fitted Ω over many noise draws should look
/// like N(0, 1).
#[test]
fn rabi_pulls_are_standard_normal() {
    let truth = 30.0;
    let clean = synth(truth, 161, None);
    let seeds = 200u64;
    let pulls: Vec<f64> = (0..seeds)
        .map(|s| {
            let f = fit(&add_noise(&clean, 0.01, 1000 + s).unwrap(), None);
            (f.rabi_max - mhz_to_rad(truth)) / f.sigma_rabi_max
        })
        .collect();
    let mean = pulls.iter().sum::<f64>() / seeds as f64;
    let sd = (pulls.iter().map(|p| (p - mean).powi(2)).sum::<f64>() / (seeds - 1) as f64).sqrt();
    println!("pull mean {mean:.3}, sd {sd:.3}");
    assert!(mean.abs() < 0.2, "pull mean {mean}");
    assert!((0.8..=1.3).contains(&sd), "pull sd {sd}");
}

#[test]
fn instrument_aware_fit_matches_plain_fit_of_ideal_trace() {
    let inst = InstrumentModel::default();
    for rabi in [20.0, 40.0] {
        let plain = fit(&synth(rabi, 241, None), None);
        let aware = fit(&synth(rabi, 241, Some(&inst)), Some(&inst));
        let rel = (aware.rabi_max / plain.rabi_max - 1.0).abs();
        assert!(rel < 0.01, "Ω={rabi}: {} vs {}", rad_to_mhz(aware.rabi_max), rad_to_mhz(plain.rabi_max));
    }
}

#[test]
fn noiseless_chain_recovers_dipole() {
    let mu_au = 0.04;
    let mu = dipole_au_to_si(mu_au);
    let cal = BeamCalibration::default();
    let points: Vec<PowerSeriesPoint> = [10e-3, 30e-3, 60e-3]
        .iter()
        .map(|&p| {
            let rabi = rabi_max_from_power(p, W_MAJ, W_MIN, mu).unwrap();
            let f = fit(&synth(rad_to_mhz(rabi), 161, None), None);
            // noiseless fits come with σ near zero; give them a common floor
            PowerSeriesPoint::new(p, f.rabi_max, mhz_to_rad(0.1)).unwrap()
        })
        .collect();
    let line = fit_power_series(&points).unwrap();
    let est = dipole_from_gradient(44, line.gradient, line.sigma_gradient, &cal).unwrap();
    assert!((est.mu_au / mu_au - 1.0).abs() < 0.01, "{}", est.mu_au);
    let red = est.with_reduced(&HyperfineTransition::rb87_stretched(44).unwrap()).unwrap();
    assert!((red.reduced_au.unwrap() - mu_au / (2.0f64 / 3.0).sqrt()).abs() < 0.01 * mu_au);
}

#[test]
fn dipole_error_budget_by_hand() {
    let cal = BeamCalibration::default();
    let est = dipole_from_gradient(30, 2.0e9, 0.02e9, &cal).unwrap();
    let want = (0.01f64.powi(2) + 0.025f64.powi(2) + (10.0f64 / 480.0).powi(2) + (10.0f64 / 344.0).powi(2)).sqrt();
    assert!((est.relative_error - want).abs() < 1e-12);
    // μ·Ω-law inverse: feeding the predicted gradient back gives μ
    let mu = dipole_au_to_si(0.03);
    let g = rabi_max_from_power(1.0, cal.w_maj, cal.w_min, mu).unwrap();
    let back = dipole_from_gradient(30, g, 0.0, &cal).unwrap();
    assert!((back.mu_si / mu - 1.0).abs() < 1e-12);
}

#[test]
fn waist_fit_recovers_beam() {
    let sys = LadderSystem::default();
    let cloud = CloudModel::paper_default();
    let truth = BeamGeometry::with_rabi_max(W_MAJ, W_MIN, mhz_to_rad(20.0));
    let img = simulate_image(64, 64, 20e-6, 0.0, &sys, &truth, &cloud).unwrap();
    let prior = BeamGeometry::with_rabi_max(200e-6, 200e-6, mhz_to_rad(15.0));
    let f = fit_beam_waists(&img, &sys, &cloud, &prior, &LmConfig::default()).unwrap();
    assert!((f.w_maj / W_MAJ - 1.0).abs() < 0.01, "{}", f.w_maj);
    assert!((f.w_min / W_MIN - 1.0).abs() < 0.01, "{}", f.w_min);
}

fn meas(n: u32, v: f64, s: f64) -> DipoleEstimate {
    DipoleEstimate {
        n,
        mu_si: 0.0,
        sigma_mu_si: 0.0,
        mu_au: 0.0,
        sigma_mu_au: 0.0,
        relative_error: s / v,
        reduced_au: Some(v),
        sigma_reduced_au: Some(s),
    }
}

#[test]
fn chi_squared_by_hand() {
    let m = vec![meas(20, 0.08, 0.004), meas(30, 0.04, 0.002)];
    let a = ModelPrediction { name: "A".into(), values: [(20, -0.081), (30, -0.039)].into_iter().collect() };
    let b = ModelPrediction { name: "B".into(), values: [(20, 0.09), (30, 0.04)].into_iter().collect() };
    let c = chi_squared_compare(&m, &[b, a]).unwrap();
    let want_a = (0.001f64 / 0.004).powi(2) + (0.001f64 / 0.002).powi(2);
    let want_b = (0.01f64 / 0.004).powi(2);
    assert!((c.scores[1].chi2 - want_a).abs() < 1e-12);
    assert!((c.scores[0].chi2 - want_b).abs() < 1e-12);
    assert_eq!(c.ranking, vec!["A".to_string(), "B".to_string()]);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn power_series_order_and_scale(
        g in 0.5f64..5.0,
        b in -0.5f64..0.5,
        sigmas in prop::collection::vec(0.01f64..0.2, 6),
        noise in prop::collection::vec(-1.0f64..1.0, 6),
        k in 0.1f64..10.0,
        rot in 0usize..6,
    ) {
        let powers = [5e-3, 10e-3, 20e-3, 40e-3, 60e-3, 80e-3];
        let pts: Vec<PowerSeriesPoint> = powers.iter().zip(&sigmas).zip(&noise)
            .map(|((&p, &s), &e)| PowerSeriesPoint::new(p, g * p.sqrt() * 10.0 + b + e * s, s).unwrap())
            .collect();
        let base = fit_power_series(&pts).unwrap();
        let mut shuffled = pts.clone();
        shuffled.rotate_left(rot);
        shuffled.reverse();
        prop_assert_eq!(fit_power_series(&shuffled).unwrap(), base);
        // scaling every σ by k leaves the estimate and scales its error by k
        let scaled: Vec<PowerSeriesPoint> = pts.iter()
            .map(|p| PowerSeriesPoint::new(p.power, p.rabi, p.sigma_rabi * k).unwrap())
            .collect();
        let s = fit_power_series(&scaled).unwrap();
        prop_assert!((s.gradient - base.gradient).abs() <= 1e-9 * base.gradient.abs().max(1.0));
        prop_assert!((s.sigma_gradient / base.sigma_gradient - k).abs() < 1e-9 * k);
        prop_assert!((s.chi2 * k * k - base.chi2).abs() <= 1e-9 * base.chi2.max(1.0));
    }

    #[test]
    fn exact_line_is_recovered(g in 0.1f64..10.0, b in -1.0f64..1.0) {
        let pts: Vec<PowerSeriesPoint> = [1.0, 4.0, 9.0, 16.0]
            .iter()
            .map(|&p| PowerSeriesPoint::new(p, g * f64::sqrt(p) + b, 0.1).unwrap())
            .collect();
        let f = fit_power_series(&pts).unwrap();
        prop_assert!((f.gradient - g).abs() < 1e-9);
        prop_assert!((f.intercept - b).abs() < 1e-9);
        prop_assert!(f.chi2 < 1e-12);
        prop_assert_eq!(f.intercept_consistent_with_zero, b.abs() <= 2.0 * f.sigma_intercept);
    }

    #[test]
    fn chi_squared_is_zero_only_for_the_truth(scale in 0.5f64..1.5) {
        let m = vec![meas(22, 0.07, 0.003), meas(44, 0.023, 0.001)];
        let truth = ModelPrediction { name: "T".into(), values: [(22, 0.07), (44, 0.023)].into_iter().collect() };
        let other = ModelPrediction {
            name: "S".into(),
            values: truth.values.iter().map(|(&n, &v)| (n, v * scale)).collect(),
        };
        let c = chi_squared_compare(&m, &[truth, other]).unwrap();
        prop_assert_eq!(c.scores[0].chi2, 0.0);
        prop_assert!(c.scores[1].chi2 >= 0.0);
        prop_assert_eq!(&c.ranking[0], "T");
    }
}
