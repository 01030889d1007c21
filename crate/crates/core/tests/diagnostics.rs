use std::f64::consts::{PI, SQRT_2};

use approx::assert_relative_eq;
use freebound::config::{mixed_mode, stationary};
use freebound::diagnostics::{
    dissipation_rate, energy, eta_functional, eta_lower_bound, eulerian_map, forcing_f, gronwall_monitor,
    pressure_h1_seminorm, velocity_potential, volume, xi_bound_monitor, MonitorSettings,
};
use freebound::galerkin::output_grid;
use freebound::{run, DiagnosticsRecord, Galerkin, GalerkinState, InitialData, ModelParams, Profile, RunOptions};

fn system(a: f64, gamma: f64, mu: f64, r: usize, n: usize) -> Galerkin {
    Galerkin::new(ModelParams::new(a, gamma, mu, 1.0, r, n).unwrap()).unwrap()
}

fn unit_alpha(sys: &Galerkin, k: usize, eps: f64) -> GalerkinState {
    let n = sys.params().modes;
    let mut alpha = vec![0.0; n];
    alpha[k - 1] = eps;
    sys.state_from_coeffs(alpha, vec![0.0; n], 1.0)
}

/// Composite Simpson on `n` (even) intervals; the test-side quadrature.
fn simpson(f: impl Fn(f64) -> f64, n: usize) -> f64 {
    let h = 1.0 / n as f64;
    let mut s = f(0.0) + f(1.0);
    for j in 1..n {
        s += if j % 2 == 1 { 4.0 } else { 2.0 } * f(j as f64 * h);
    }
    s * h / 3.0
}

#[test]
fn stationary_energy_closed_form() {
    let sys = system(1.0, 2.0, 0.1, 2, 16);
    let s = sys.initial_state(&stationary(sys.params())).unwrap();
    let e = energy(&sys, &s).unwrap();
    assert_eq!(e.kinetic, 0.0);
    assert_relative_eq!(e.internal, 1.0, max_relative = 1e-14);
    assert_eq!(e.pv, 1.0);
    assert_relative_eq!(e.total, 2.0, max_relative = 1e-14);
}

#[test]
fn kinetic_energy_of_a_single_mode() {
    let sys = system(1.0, 5.0, 0.1, 2, 16);
    let e = energy(&sys, &unit_alpha(&sys, 3, 0.01)).unwrap();
    assert_relative_eq!(e.kinetic, 0.5e-4, max_relative = 1e-14);
}

#[test]
fn volume_matches_grid_quadrature() {
    let sys = system(1.0, 5.0, 0.1, 2, 16);
    let s = sys.initial_state(&mixed_mode(sys.params(), 0.05, 0.6).unwrap()).unwrap();
    let xi = sys.reconstruct_xi(&s, 4097);
    let simpson_v = {
        let h = 1.0 / 4096.0;
        let v = xi.values();
        let mut acc = v[0] + v[4096];
        for j in 1..4096 {
            acc += if j % 2 == 1 { 4.0 } else { 2.0 } * v[j];
        }
        acc * h / 3.0
    };
    assert!((volume(&s) - simpson_v).abs() < 1e-10);
}

#[test]
fn dissipation_rate_single_modes() {
    let sys = system(1.0, 5.0, 0.1, 2, 16);
    assert_eq!(dissipation_rate(&sys, &unit_alpha(&sys, 1, 1.0)), 0.0);
    assert_eq!(dissipation_rate(&sys, &unit_alpha(&sys, 2, 1.0)), 0.0);
    assert_relative_eq!(dissipation_rate(&sys, &unit_alpha(&sys, 3, 1.0)), 0.9 * PI * PI, max_relative = 1e-15);
}

#[test]
fn dissipation_rate_matches_quadrature_of_truncated_gradient() {
    let sys = system(1.0, 5.0, 0.1, 2, 8);
    let s = sys.initial_state(&mixed_mode(sys.params(), 0.05, 0.6).unwrap()).unwrap();
    let alpha = s.alpha.clone();
    // T v_x = -sum_{k > R} pi k alpha_k sqrt2 sin(pi k x).
    let tvx = |x: f64| -> f64 {
        (3..=8)
            .map(|k| -PI * k as f64 * alpha[k - 1] * SQRT_2 * (PI * k as f64 * x).sin())
            .sum()
    };
    let q = 0.1 * simpson(|x| tvx(x).powi(2), 2000);
    assert!((dissipation_rate(&sys, &s) - q).abs() < 1e-8);
}

#[test]
fn forcing_vanishes_without_undamped_modes() {
    let sys = system(1.0, 5.0, 0.1, 0, 8);
    let s = sys.initial_state(&mixed_mode(sys.params(), 0.05, 0.6).unwrap()).unwrap();
    let (f, norm) = forcing_f(&sys, &s, 33);
    assert_eq!(norm, 0.0);
    assert!(f.values().iter().all(|v| *v == 0.0));
}

#[test]
fn forcing_of_first_mode() {
    let sys = system(1.0, 5.0, 1.0, 1, 8);
    let (f, norm) = forcing_f(&sys, &unit_alpha(&sys, 1, 1.0), 401);
    assert_relative_eq!(norm, PI * PI, max_relative = 1e-15);
    assert_relative_eq!(f.l2_norm(), PI * PI, max_relative = 1e-4);
}

#[test]
fn eta_at_rest_and_its_lower_bound() {
    let sys = system(1.0, 5.0, 0.1, 2, 16);
    let s = sys.initial_state(&stationary(sys.params())).unwrap();
    // G(1) = 1/4 and P xi* = 1.
    assert_relative_eq!(eta_functional(&sys, &s).unwrap(), 40.0 * 1.25, max_relative = 1e-14);

    let s = sys.initial_state(&mixed_mode(sys.params(), 0.1, 0.6).unwrap()).unwrap();
    let eta = eta_functional(&sys, &s).unwrap();
    let lower = eta_lower_bound(&sys, &s).unwrap();
    assert!(eta >= lower && lower >= 0.0);
}

#[test]
fn eulerian_map_identity_and_constant_volume() {
    let sys = system(1.0, 5.0, 0.1, 2, 8);
    let s = sys.initial_state(&stationary(sys.params())).unwrap();
    let (r, big_s) = eulerian_map(&sys, &s, 33).unwrap();
    assert_eq!(big_s, 1.0);
    for (j, x) in r.xs().iter().enumerate() {
        assert!((r.values()[j] - x).abs() < 1e-15);
    }

    let s = sys.state_from_coeffs(vec![0.0; 8], vec![0.0; 8], 1.7);
    let (_, big_s) = eulerian_map(&sys, &s, 33).unwrap();
    assert_relative_eq!(big_s, 1.7, max_relative = 1e-15);
}

#[test]
fn free_boundary_equals_volume() {
    let sys = system(1.0, 5.0, 0.1, 2, 16);
    let s = sys.initial_state(&mixed_mode(sys.params(), 0.1, 0.7).unwrap()).unwrap();
    let (r, big_s) = eulerian_map(&sys, &s, 65).unwrap();
    assert!((big_s - volume(&s)).abs() < 1e-10);
    assert!(r.values().windows(2).all(|w| w[1] > w[0]));
}

#[test]
fn velocity_potential_vanishes_at_both_ends() {
    let sys = system(1.0, 5.0, 0.1, 2, 16);
    let s = sys.initial_state(&mixed_mode(sys.params(), 0.1, 0.7).unwrap()).unwrap();
    let u = velocity_potential(&sys, &s, 65).unwrap();
    assert!(u.values()[0].abs() < 1e-14);
    assert!(u.values()[64].abs() < 1e-10);
}

#[test]
fn pressure_seminorm_cases() {
    let sys = system(1.0, 5.0, 0.1, 2, 16);
    let s = sys.initial_state(&stationary(sys.params())).unwrap();
    assert_eq!(pressure_h1_seminorm(&sys, &s).unwrap(), 0.0);

    // xi = 1 + 0.1 sqrt2 sin(pi x), a = 1, gamma = 2 against fine Simpson.
    let init = InitialData {
        v0: Profile::Constant(0.0),
        xi0: Profile::function(|x| 1.0 + 0.1 * SQRT_2 * (PI * x).sin()),
    };
    let sys1 = system(1.0, 2.0, 0.1, 2, 16);
    let sys3 = system(3.0, 2.0, 0.1, 2, 16);
    let s1 = sys1.initial_state(&init).unwrap();
    let s3 = sys3.state_from_coeffs(s1.alpha.clone(), s1.gtilde.clone(), s1.pi());
    let oracle = simpson(
        |x| {
            let xi = 1.0 + 0.1 * SQRT_2 * (PI * x).sin();
            let xi_x = 0.1 * SQRT_2 * PI * (PI * x).cos();
            (2.0 * xi.powi(-3) * xi_x).powi(2)
        },
        20_000,
    )
    .sqrt();
    let h1 = pressure_h1_seminorm(&sys1, &s1).unwrap();
    assert!((h1 - oracle).abs() < 1e-8, "{h1} vs {oracle}");
    assert_relative_eq!(pressure_h1_seminorm(&sys3, &s3).unwrap(), 3.0 * h1, max_relative = 1e-14);
}

#[test]
fn stationary_trajectory_monitors() {
    let p = ModelParams::new(1.0, 5.0, 0.1, 1.0, 2, 16).unwrap();
    let traj = run(&stationary(&p), &p, 5.0, &output_grid(5.0, 0.5), &RunOptions::default()).unwrap();
    let g = gronwall_monitor(&traj, &p, 1e-6);
    assert!(g.local_ok && g.global_ok && g.global_applicable);
    let eta0 = traj.records[0].eta;
    assert!(traj.records.iter().all(|r| r.eta == eta0));

    let xb = xi_bound_monitor(&traj, &p);
    assert!(xb.floor_ok);
    assert!(traj.records.iter().all(|r| r.xi_min == 1.0 && r.xi_max == 1.0));
    assert!(xb.u_end_max <= 1e-10);
}

#[test]
fn perturbed_run_u_end_and_gronwall() {
    let p = ModelParams::new(1.0, 5.0, 0.1, 1.0, 2, 16).unwrap();
    let traj = run(&mixed_mode(&p, 0.02, 0.5).unwrap(), &p, 3.0, &output_grid(3.0, 0.1), &RunOptions::default()).unwrap();
    assert!(traj.records.iter().all(|r| r.u_end <= 1e-10));
    assert!(gronwall_monitor(&traj, &p, 1e-6).local_ok);
}

#[test]
fn monitor_flags_energy_drift_only_at_rest() {
    let sys = system(1.0, 5.0, 0.1, 2, 8);
    let s = sys.initial_state(&stationary(sys.params())).unwrap();
    let mut rec = DiagnosticsRecord::evaluate(&sys, &s, None).unwrap();
    rec.energy_residual = 1e-3;
    let m = MonitorSettings::default();
    assert!(m.check(&rec, 2.0, true).is_err());
    assert!(m.check(&rec, 2.0, false).is_ok());
    assert!(MonitorSettings::relaxed().check(&rec, 2.0, true).is_ok());
}
