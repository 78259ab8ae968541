use tripod_core::calibration::{default_noise, small_coupling_grid, DEFAULT_GAMMA0, DEFAULT_STEPS};
use tripod_core::fidelity::{bloch_states, mean_fidelity_over, per_state_fidelities, sweep, SweepRequest, DEFAULT_STATES};
use tripod_core::fit::{f_of_tau_relation, fit_noise_response, least_squares, FitModel, Intercept};
use tripod_core::open_system::NoiseModel;
use tripod_core::path::{optimal_time, standard_not_loop, LoopFamily};
use tripod_core::peak::{find_optimal_point, PeakWindow};
use tripod_core::robustness::robustness;

fn noisy_mean(omega_tau: f64, lambda_sq: f64, states: usize, steps: usize) -> f64 {
    let spec = standard_not_loop(1.0, omega_tau).unwrap();
    mean_fidelity_over(&spec, &default_noise(lambda_sq), &bloch_states(states).unwrap(), steps).unwrap()
}

#[test]
fn step_halving_changes_fidelity_below_1e7() {
    for (ot, l) in [(18.251, 0.05), (56.35, 0.05), (30.0, 0.01)] {
        let coarse = noisy_mean(ot, l, 20, DEFAULT_STEPS);
        let fine = noisy_mean(ot, l, 20, 2 * DEFAULT_STEPS);
        assert!((coarse - fine).abs() <= 1e-7, "{ot} {l}: {coarse} vs {fine}");
    }
}

#[test]
fn doubling_the_sample_changes_mean_below_1e4() {
    for (ot, l) in [(12.0, 0.0), (25.0, 0.0), (18.251, 0.02), (44.0, 0.05)] {
        let a = noisy_mean(ot, l, 100, 400);
        let b = noisy_mean(ot, l, 200, 400);
        assert!((a - b).abs() <= 1e-4, "{ot} {l}: {a} vs {b}");
    }
}

#[test]
fn every_input_is_mapped_perfectly_at_revivals() {
    let inputs = bloch_states(DEFAULT_STATES).unwrap();
    for k in 1..=3 {
        let spec = standard_not_loop(1.0, optimal_time::<f64>(k, 1, 1.0).unwrap()).unwrap();
        let f = per_state_fidelities(&spec, &NoiseModel::noiseless(), &inputs, 1).unwrap();
        assert!(f.iter().all(|x| (x - 1.0).abs() <= 1e-6), "k = {k}");
    }
}

#[test]
fn off_revival_fidelity_depends_on_the_input() {
    let inputs = bloch_states(DEFAULT_STATES).unwrap();
    let f = per_state_fidelities(&standard_not_loop(1.0, 25.0).unwrap(), &NoiseModel::noiseless(), &inputs, 1).unwrap();
    let (lo, hi) = f.iter().fold((f64::MAX, f64::MIN), |(a, b), &x| (a.min(x), b.max(x)));
    assert!(hi - lo > 0.05);
    assert!(f.iter().all(|&x| (-1e-12..=1.0 + 1e-9).contains(&x)));
}

#[test]
fn slow_loops_approach_unit_fidelity_with_oscillations() {
    let vals: Vec<f64> = (0..20).map(|i| noisy_mean(300.0 + 0.5 * f64::from(i), 0.0, 50, 1)).collect();
    assert!(vals.iter().all(|&v| v > 0.99 && v <= 1.0 + 1e-9));
    assert!(vals.windows(2).any(|w| w[1] < w[0]) && vals.windows(2).any(|w| w[1] > w[0]));
}

#[test]
fn noise_can_raise_fidelity_on_very_fast_loops() {
    // Noiseless fidelity here is below the relaxed value.
    assert!(noisy_mean(6.0, 0.05, 100, DEFAULT_STEPS) > noisy_mean(6.0, 0.0, 100, DEFAULT_STEPS));
}

#[test]
fn noiseless_sweep_peaks_at_the_revivals() {
    let grid: Vec<f64> = (1..=3).map(|k| optimal_time::<f64>(k, 1, 1.0).unwrap()).collect();
    let curves = sweep(&SweepRequest {
        family: LoopFamily::Standard,
        omega: 1.0,
        omega_tau: grid,
        lambda_sq: vec![0.0],
        base_noise: default_noise(0.0),
        states: DEFAULT_STATES,
        steps: DEFAULT_STEPS,
    })
    .unwrap();
    assert_eq!(curves.len(), 1);
    assert!(curves[0].samples.iter().all(|s| s.mean_fidelity >= 1.0 - 1e-6));
    let rounded: Vec<String> = curves[0].samples.iter().map(|s| format!("{:.2}", s.omega_tau)).collect();
    assert_eq!(rounded, ["18.25", "37.40", "56.35"]);
}

#[test]
fn sweep_is_independent_of_worker_count() {
    let req = SweepRequest {
        family: LoopFamily::Wedge(2),
        omega: 1.3,
        omega_tau: vec![12.0, 15.5, 31.0, 40.0],
        lambda_sq: vec![0.0, 0.01, 0.03],
        base_noise: default_noise(0.0),
        states: 24,
        steps: 300,
    };
    let run = |threads| {
        rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build()
            .unwrap()
            .install(|| sweep(&req).unwrap())
    };
    let one = run(1);
    let three = run(3);
    assert_eq!(one, three);
    let csv: Vec<String> = one.iter().map(|c| c.to_csv()).collect();
    assert_eq!(csv, three.iter().map(|c| c.to_csv()).collect::<Vec<_>>());
    for pair in one.windows(2) {
        for (a, b) in pair[0].samples.iter().zip(&pair[1].samples) {
            assert!(b.mean_fidelity <= a.mean_fidelity + 1e-12);
        }
    }
}

#[test]
fn noisy_optimum_is_earlier_and_lower() {
    let p = find_optimal_point(LoopFamily::Standard, 1.0, &default_noise(0.02), 40, 600, &PeakWindow::default()).unwrap();
    assert!(p.omega_tau_star < optimal_time::<f64>(1, 1, 1.0).unwrap());
    assert!(p.f_star < 1.0);
    assert!(p.bracket[0] < p.omega_tau_star && p.omega_tau_star < p.bracket[1]);
    let json = serde_json::to_value(&p).unwrap();
    for key in ["tau_star", "f_star", "lambda_sq", "bracket", "tolerance"] {
        assert!(json.get(key).is_some(), "{key}");
    }
}

#[test]
fn optimum_scales_with_the_rabi_frequency() {
    let w = PeakWindow::default();
    let a = find_optimal_point::<f64>(LoopFamily::Standard, 1.0, &default_noise(0.01), 30, 600, &w).unwrap();
    let mut scaled = default_noise(0.01);
    // Rates are in units of Ω.
    for g in scaled.gamma.values_mut() {
        *g *= 2.0;
    }
    let b = find_optimal_point(LoopFamily::Standard, 2.0, &scaled, 30, 600, &w).unwrap();
    assert!((a.omega_tau_star - b.omega_tau_star).abs() < 1e-6);
    assert!((a.tau_star - 2.0 * b.tau_star).abs() < 1e-6);
    assert!((a.f_star - b.f_star).abs() < 1e-9);
}

#[test]
fn slope_relation_matches_direct_fit_of_working_points() {
    let w = PeakWindow::default();
    let pts: Vec<_> = small_coupling_grid::<f64>()
        .into_iter()
        .map(|l| find_optimal_point(LoopFamily::Standard, 1.0, &default_noise(l), 50, 600, &w).unwrap())
        .collect();
    let tau1 = optimal_time::<f64>(1, 1, 1.0).unwrap();
    let f = fit_noise_response(&pts.iter().map(|p| [p.lambda_sq, p.f_star]).collect::<Vec<_>>(), FitModel::FLinear, Intercept::Fixed(1.0)).unwrap();
    let t = fit_noise_response(&pts.iter().map(|p| [p.lambda_sq, p.omega_tau_star]).collect::<Vec<_>>(), FitModel::TauLinear, Intercept::Fixed(tau1)).unwrap();
    let implied = f_of_tau_relation(&f, &t).unwrap();
    let rows: Vec<Vec<f64>> = pts.iter().map(|p| vec![p.omega_tau_star - tau1]).collect();
    let rhs: Vec<f64> = pts.iter().map(|p| p.f_star - 1.0).collect();
    let direct = least_squares(&rows, &rhs).unwrap().coefficients[0];
    assert!(((implied - direct) / direct).abs() <= 0.02, "{implied} vs {direct}");
    assert!(implied > 0.0);
}

#[test]
fn robustness_is_positive_under_noise() {
    let r = robustness(LoopFamily::Standard, 1.0, &default_noise(0.01), 40, 600, &PeakWindow::default()).unwrap();
    assert!(r.robustness > 0.0 && r.f_adiab < r.f_star);
    assert!(serde_json::to_value(&r).unwrap().get("robustness").is_some());
}

#[test]
fn single_precision_reaches_the_revival() {
    let spec = standard_not_loop::<f32>(1.0, optimal_time(1, 1, 1.0f32).unwrap()).unwrap();
    let f = mean_fidelity_over(&spec, &NoiseModel::noiseless(), &bloch_states(30).unwrap(), 1).unwrap();
    assert!((f - 1.0).abs() < 1e-4, "{f}");
    let noisy = mean_fidelity_over(&spec, &NoiseModel::high_temperature(0.01f32, DEFAULT_GAMMA0 as f32), &bloch_states(30).unwrap(), 400).unwrap();
    let reference = noisy_mean(f64::from(spec.total_time()), 0.01, 30, 400);
    assert!((f64::from(noisy) - reference).abs() < 1e-4, "{noisy} vs {reference}");
}
