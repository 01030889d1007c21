//! Invariants over randomly drawn states.
//!
//! Reproduce a failure with `PROPTEST_SEED=<seed> cargo test -p freebound --test properties`.

use freebound::diagnostics::{dissipation_rate, energy, eta_functional, eta_lower_bound, eulerian_map, volume};
use freebound::galerkin::output_grid;
use freebound::spectral::{cosine_analyze, sine_analyze, synthesize};
use freebound::{
    advance_pi, pi_bounds, run_from, stationary_xi, Basis, BoundaryState, CoeffVector, Galerkin, GalerkinState,
    ModelParams, MonitorSettings, RunOptions, Stepping,
};
use proptest::prelude::*;

const N: usize = 8;

fn system() -> Galerkin {
    Galerkin::new(ModelParams::new(1.0, 5.0, 0.1, 1.0, 2, N).unwrap()).unwrap()
}

fn coeffs(scale: f64) -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(-scale..scale, N)
}

/// States whose fluctuation decays like `1/k^2`, so `xi` stays positive.
fn state(scale: f64) -> impl Strategy<Value = (Vec<f64>, Vec<f64>, f64)> {
    (coeffs(scale), coeffs(scale), 0.8f64..1.25).prop_map(|(a, g, pi)| {
        let damp = |v: Vec<f64>| -> Vec<f64> {
            v.into_iter()
                .enumerate()
                .map(|(i, c)| c / ((i + 1) * (i + 1)) as f64)
                .collect()
        };
        (damp(a), damp(g), pi)
    })
}

fn build(sys: &Galerkin, (a, g, pi): (Vec<f64>, Vec<f64>, f64)) -> GalerkinState {
    sys.state_from_coeffs(a, g, pi)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn mean_velocity_is_zero(s in state(0.2)) {
        let sys = system();
        let st = build(&sys, s);
        let v = sys.reconstruct_v(&st, 257).unwrap();
        let scale = v.max_abs().max(1.0);
        prop_assert!(v.integrate().abs() <= 1e-12 * scale);
    }

    #[test]
    fn endpoints_equal_boundary_value(s in state(0.2)) {
        let sys = system();
        let st = build(&sys, s);
        let xi = sys.reconstruct_xi(&st, 65);
        prop_assert_eq!(xi.values()[0], st.pi());
        prop_assert_eq!(xi.values()[64], st.pi());
    }

    #[test]
    fn dissipation_is_nonnegative_and_ignores_low_modes(s in state(0.2)) {
        let sys = system();
        let st = build(&sys, s);
        prop_assert!(dissipation_rate(&sys, &st) >= 0.0);
        let mut low = st.clone();
        for a in low.alpha.iter_mut().skip(2) {
            *a = 0.0;
        }
        prop_assert_eq!(dissipation_rate(&sys, &low), 0.0);
    }

    #[test]
    fn eta_dominates_its_nonnegative_lower_bound(s in state(0.2)) {
        let sys = system();
        let st = build(&sys, s);
        let eta = eta_functional(&sys, &st).unwrap();
        let lower = eta_lower_bound(&sys, &st).unwrap();
        prop_assert!(lower >= 0.0);
        prop_assert!(eta >= lower - 1e-12 * eta.abs());
    }

    #[test]
    fn eulerian_map_is_monotone_and_ends_at_the_volume(s in state(0.2)) {
        let sys = system();
        let st = build(&sys, s);
        let (r, big_s) = eulerian_map(&sys, &st, 129).unwrap();
        prop_assert!(r.values().windows(2).all(|w| w[1] > w[0]));
        prop_assert!((big_s - volume(&st)).abs() <= 1e-12);
    }

    #[test]
    fn analysis_inverts_synthesis(c in coeffs(1.0), k0 in 0.0f64..1.0) {
        let mut cos = c.clone();
        cos.insert(0, k0);
        let cv = CoeffVector::from_coeffs(Basis::Cosine, cos.clone());
        let back = cosine_analyze(&synthesize(&cv, 4 * N + 1), N).unwrap();
        for (a, b) in cos.iter().zip(back.as_slice()) {
            prop_assert!((a - b).abs() < 1e-12);
        }
        let sv = CoeffVector::from_coeffs(Basis::Sine, c.clone());
        let back = sine_analyze(&synthesize(&sv, 4 * N + 1), N).unwrap();
        for (a, b) in c.iter().zip(back.as_slice()) {
            prop_assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn boundary_value_stays_in_its_bracket(pi0 in 0.3f64..4.0, dt in 1e-4f64..2.0, mu in 0.01f64..1.0) {
        let p = ModelParams::new(1.0, 5.0, mu, 1.0, 2, N).unwrap();
        let (lo, hi) = pi_bounds(pi0, &p);
        let xs = stationary_xi(&p);
        let mut s = BoundaryState::new(pi0, 0.0);
        let mut gap = (pi0 - xs).abs();
        for _ in 0..5 {
            s = advance_pi(s, dt, &p).unwrap();
            prop_assert!(s.pi >= lo - p.tol_ode && s.pi <= hi + p.tol_ode);
            let g = (s.pi - xs).abs();
            prop_assert!(g <= gap + p.tol_ode);
            gap = g;
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    /// With the boundary at rest, `E(t) + int D - E(0)` stays at the
    /// time-stepping error level. RK4 on an oscillator of frequency `w`
    /// loses a relative energy of about `(w h)^6 / 72` per step. For the
    /// top mode (`w = 8 pi sqrt(5)`, `h = 1e-3`) that is 4.3e-7 of the
    /// excess energy over 1000 steps.
    #[test]
    fn energy_balance_at_rest(a in coeffs(0.02), g in coeffs(0.02)) {
        let sys = system();
        let st = build(&sys, (a, g, 1.0));
        let rest = sys.state_from_coeffs(vec![0.0; N], vec![0.0; N], 1.0);
        let excess = energy(&sys, &st).unwrap().total - energy(&sys, &rest).unwrap().total;
        let w = std::f64::consts::PI * N as f64 * 5f64.sqrt();
        let bound = 2.0 * 1000.0 * (w * 1e-3).powi(6) / 72.0 * excess + 1e-12;
        let opts = RunOptions {
            stepping: Stepping::Fixed { dt: 1e-3 },
            monitors: MonitorSettings::relaxed(),
            ..RunOptions::default()
        };
        let traj = run_from(&sys, st, 1.0, &output_grid(1.0, 0.1), &opts).unwrap();
        for r in &traj.records {
            prop_assert!(r.energy_residual.abs() <= bound, "residual {} bound {}", r.energy_residual, bound);
            prop_assert!(r.mean_v_residual <= 1e-12);
            prop_assert_eq!(r.endpoint_mismatch, 0.0);
        }
    }

    #[test]
    fn fast_and_dense_pressure_pairing_agree(s in state(0.02)) {
        let sys = system();
        let st = build(&sys, s);
        let fast = sys.assemble_rhs(&st).unwrap();
        let dense = freebound::oracle::dense_rhs(&sys, &st, 8).unwrap();
        for (x, y) in fast.dalpha.iter().zip(&dense.dalpha) {
            prop_assert!((x - y).abs() <= 1e-8);
        }
        prop_assert!((fast.dpi - dense.dpi).abs() <= 1e-12);
    }
}
