//! Independent reference computations for the fast paths.
//!
//! [`dense_rhs`] re-evaluates the Galerkin right-hand side pointwise from
//! the series (no basis tables, no Gauss rule) with Romberg extrapolation of
//! uniform trapezoid sums. [`linearized_prediction`] gives the closed-form
//! small-amplitude dynamics around the stationary state:
//!
//! ```text
//! g_k'' + delta_k g_k' + omega_k^2 g_k = 0,
//! omega_k = pi k sqrt(a gamma) xi*^(-(gamma+1)/2),  delta_k = [k > R] mu pi^2 k^2
//! ```

use std::f64::consts::{PI, SQRT_2};

use crate::error::{Error, Result};
use crate::galerkin::{run_from, Galerkin, GalerkinState, RhsVariant, RunAbort, RunOptions, Trajectory};
use crate::model::{stationary_xi, ModelParams};
use crate::quadrature::romberg;

/// Reference right-hand side with its quadrature error estimate.
#[derive(Debug, Clone, PartialEq)]
pub struct DenseRhs {
    pub dalpha: Vec<f64>,
    pub dgtilde: Vec<f64>,
    pub dpi: f64,
    pub error_estimate: f64,
    pub intervals: usize,
}

/// Recomputes the right-hand side with Romberg quadrature starting from
/// `refinement` times the system grid resolution.
pub fn dense_rhs(system: &Galerkin, state: &GalerkinState, refinement: usize) -> Result<DenseRhs> {
    if refinement < 4 {
        return Err(Error::InvalidParams {
            field: "refinement",
            reason: format!("must be at least 4, got {refinement}"),
        });
    }
    let p = system.params();
    let n = p.modes;
    let pi = state.pi();
    let g = &state.gtilde;
    // Boundary law written out independently of the boundary module.
    let p_pi = p.a * pi.powf(-p.gamma);
    let pi_t = (p_pi - p.p_ext) / p.mu;
    let pi_tt = -p.gamma * p.a * pi.powf(-p.gamma - 1.0) * pi_t / p.mu;

    let mut min_xi = f64::INFINITY;
    let base = refinement * (p.grid - 1);
    // Components: (p - P) s_k for k = 1..N, then x w_k.
    let res = romberg(2 * n, base, base, 1e-14, 6, |x, out| {
        let xi = pi
            + g.iter()
                .enumerate()
                .map(|(i, gk)| gk * SQRT_2 * (PI * (i + 1) as f64 * x).sin())
                .sum::<f64>();
        let dp = p.a * xi.powf(-p.gamma) - p.p_ext;
        for k in 1..=n {
            let arg = PI * k as f64 * x;
            out[k - 1] = dp * SQRT_2 * arg.sin();
            out[n + k - 1] = x * SQRT_2 * arg.cos();
        }
    });
    // Vacuum check on a grid independent of the quadrature nodes.
    for j in 0..=base {
        let x = j as f64 / base as f64;
        let xi = pi
            + g.iter()
                .enumerate()
                .map(|(i, gk)| gk * SQRT_2 * (PI * (i + 1) as f64 * x).sin())
                .sum::<f64>();
        min_xi = min_xi.min(xi);
    }
    if !(min_xi >= p.xi_floor) {
        return Err(Error::VacuumApproach {
            xi: min_xi,
            floor: p.xi_floor,
            t: state.t,
        });
    }

    let sign = if system.variant() == RhsVariant::FlippedPressure { -1.0 } else { 1.0 };
    let mut dalpha = vec![0.0; n];
    let mut dgtilde = vec![0.0; n];
    for k in 1..=n {
        let kf = PI * k as f64;
        let b = -kf * res.values[k - 1];
        let c = res.values[n + k - 1];
        dalpha[k - 1] = -pi_tt * c + sign * b - system.viscous_rate(k) * state.alpha[k - 1];
        dgtilde[k - 1] = -kf * state.alpha[k - 1];
    }
    Ok(DenseRhs {
        dalpha,
        dgtilde,
        dpi: pi_t,
        error_estimate: res.error_estimate,
        intervals: res.intervals,
    })
}

/// Closed-form small-amplitude behaviour of mode `k` about the stationary
/// state.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LinearizedPrediction {
    pub k: usize,
    /// Undamped angular frequency.
    pub omega: f64,
    /// Viscous rate `mu pi^2 k^2` for damped modes, zero otherwise. Energy
    /// decays at this rate, amplitude at half of it.
    pub delta: f64,
}

impl LinearizedPrediction {
    /// Angular frequency of the damped oscillation, `sqrt(omega^2 - delta^2/4)`
    /// (zero when overdamped).
    pub fn damped_frequency(&self) -> f64 {
        (self.omega * self.omega - 0.25 * self.delta * self.delta).max(0.0).sqrt()
    }

    pub fn amplitude_decay_rate(&self) -> f64 {
        0.5 * self.delta
    }

    pub fn energy_decay_rate(&self) -> f64 {
        self.delta
    }

    pub fn period(&self) -> f64 {
        2.0 * PI / self.damped_frequency()
    }
}

pub fn linearized_prediction(k: usize, params: &ModelParams) -> LinearizedPrediction {
    assert!(k >= 1, "modes start at 1");
    let xs = stationary_xi(params);
    let kf = PI * k as f64;
    let omega = kf * (params.a * params.gamma).sqrt() * xs.powf(-(params.gamma + 1.0) / 2.0);
    let delta = if k > params.undamped { params.mu * kf * kf } else { 0.0 };
    LinearizedPrediction { k, omega, delta }
}

/// Damped-oscillation fit `x_n ~ Re(A z^n)` of uniformly sampled data by
/// two-term linear prediction (Prony).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OscillationFit {
    pub omega: f64,
    /// Amplitude decay rate.
    pub decay: f64,
    /// RMS residual of the linear prediction, relative to the RMS signal.
    pub residual: f64,
}

/// Fits `x_{n+2} = c1 x_{n+1} + c0 x_n` by least squares and reads the
/// frequency and decay from the roots of `z^2 - c1 z - c0`.
pub fn fit_damped_oscillation(samples: &[f64], dt: f64) -> Option<OscillationFit> {
    if samples.len() < 4 {
        return None;
    }
    let (mut s11, mut s12, mut s22, mut r1, mut r2) = (0.0, 0.0, 0.0, 0.0, 0.0);
    for w in samples.windows(3) {
        let (a, b, y) = (w[1], w[0], w[2]);
        s11 += a * a;
        s12 += a * b;
        s22 += b * b;
        r1 += a * y;
        r2 += b * y;
    }
    let det = s11 * s22 - s12 * s12;
    if det == 0.0 || !det.is_finite() {
        return None;
    }
    let c1 = (r1 * s22 - r2 * s12) / det;
    let c0 = (s11 * r2 - s12 * r1) / det;
    let disc = c1 * c1 + 4.0 * c0;
    if disc >= 0.0 {
        return None;
    }
    // Complex pair z = c1/2 +- i sqrt(-disc)/2, |z|^2 = -c0.
    let modulus = (-c0).sqrt();
    let theta = ((-disc).sqrt() / 2.0).atan2(c1 / 2.0);
    let mut res = 0.0;
    let mut sig = 0.0;
    for w in samples.windows(3) {
        res += (w[2] - c1 * w[1] - c0 * w[0]).powi(2);
        sig += w[2] * w[2];
    }
    Some(OscillationFit {
        omega: theta / dt,
        decay: -modulus.ln() / dt,
        residual: (res / sig.max(f64::MIN_POSITIVE)).sqrt(),
    })
}

/// `L2` distance `(||v_a - v_b||^2 + ||xi_a - xi_b||^2)^(1/2)` by Parseval.
pub fn state_distance(system: &Galerkin, a: &GalerkinState, b: &GalerkinState) -> Result<f64> {
    let p = system.params();
    let dpt = crate::boundary::boundary_rhs(a.pi(), p)? - crate::boundary::boundary_rhs(b.pi(), p)?;
    let dpi = a.pi() - b.pi();
    let mut w2 = dpt * dpt / 12.0;
    let mut p2 = dpi * dpi;
    for k in 1..=p.modes {
        let da = a.alpha[k - 1] - b.alpha[k - 1];
        let dg = a.gtilde[k - 1] - b.gtilde[k - 1];
        w2 += 2.0 * dpt * da * system.x_moment(k) + da * da;
        p2 += 2.0 * dpi * dg * crate::spectral::sine_mean(k) + dg * dg;
    }
    Ok((w2.max(0.0) + p2.max(0.0)).sqrt())
}

/// Two trajectories with identical numerics and their distance history.
#[derive(Debug, Clone)]
pub struct TwinRun {
    pub times: Vec<f64>,
    pub distances: Vec<f64>,
    pub a: Trajectory,
    pub b: Trajectory,
}

impl TwinRun {
    pub fn max_distance(&self) -> f64 {
        self.distances.iter().copied().fold(0.0, f64::max)
    }
}

/// Runs both states to `t_end` recording at `output_times` and returns the
/// distance at every common output time.
pub fn twin_run_divergence(
    system: &Galerkin,
    a: GalerkinState,
    b: GalerkinState,
    t_end: f64,
    output_times: &[f64],
    options: &RunOptions,
) -> std::result::Result<TwinRun, RunAbort> {
    let ta = run_from(system, a, t_end, output_times, options)?;
    let tb = run_from(system, b, t_end, output_times, options)?;
    let mut distances = Vec::with_capacity(ta.len());
    for (sa, sb) in ta.states.iter().zip(&tb.states) {
        distances.push(state_distance(system, sa, sb)?);
    }
    Ok(TwinRun {
        times: ta.times(),
        distances,
        a: ta,
        b: tb,
    })
}

/// Gronwall amplification factor `K(T)` for the distance between two runs:
///
/// ```text
/// K^2 = max(1, m+) / min(1, m-) * exp(int_0^T C(t) ||xi_t||_inf / m- dt)
/// ```
///
/// with `m = a gamma xi^(-gamma-1)` bounded on the range of both runs and
/// `C = a gamma (gamma+1) xi_min^(-gamma-2)`. The integral uses the
/// trapezoid rule over the recorded times.
pub fn uniqueness_factor(a: &Trajectory, b: &Trajectory, params: &ModelParams) -> f64 {
    let recs: Vec<_> = a.records.iter().zip(&b.records).collect();
    let xi_min = recs.iter().map(|(x, y)| x.xi_min.min(y.xi_min)).fold(f64::INFINITY, f64::min);
    let xi_max = recs.iter().map(|(x, y)| x.xi_max.max(y.xi_max)).fold(0.0, f64::max);
    let (ag, g) = (params.a * params.gamma, params.gamma);
    let m_minus = ag * xi_max.powf(-g - 1.0);
    let m_plus = ag * xi_min.powf(-g - 1.0);
    let phi: Vec<(f64, f64)> = recs
        .iter()
        .map(|(x, y)| {
            let lo = x.xi_min.min(y.xi_min);
            let c = ag * (g + 1.0) * lo.powf(-g - 2.0);
            (x.t, c * x.xi_t_sup.max(y.xi_t_sup) / m_minus)
        })
        .collect();
    let integral: f64 = phi.windows(2).map(|w| 0.5 * (w[1].0 - w[0].0) * (w[0].1 + w[1].1)).sum();
    (m_plus.max(1.0) / m_minus.min(1.0) * integral.exp()).sqrt()
}
