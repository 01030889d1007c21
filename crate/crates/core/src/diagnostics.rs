//! Functionals, bounds and run monitors evaluated on Galerkin states.
//!
//! Integrals of polynomial expressions in the coefficients (kinetic energy,
//! `int xi_x^2`, `int v xi_x`, volume) are evaluated in closed form by
//! orthonormality. Integrals of the pressure potential use the same Gauss
//! rule as the pressure projection, which keeps the discrete energy balance
//! consistent with the scheme.

use std::f64::consts::PI;

use crate::boundary::boundary_rhs;
use crate::error::{Error, Result};
use crate::galerkin::{Galerkin, GalerkinState, Trajectory};
use crate::model::{big_g_unchecked, ModelParams};
use crate::spectral::{sine_mean, GridField};

/// Diagnostics at one output time.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct DiagnosticsRecord {
    pub t: f64,
    pub kinetic: f64,
    pub internal: f64,
    pub pv: f64,
    pub total_energy: f64,
    pub dissipation_rate: f64,
    pub dissipation_cum: f64,
    /// `E(t) + int_0^t D - E(0)`.
    pub energy_residual: f64,
    pub eta: f64,
    pub chi: f64,
    /// Time integral of `chi`.
    pub chi_cum: f64,
    pub volume: f64,
    /// `V - pi`, kept separately so that volume changes are not lost to
    /// rounding against `pi`.
    pub volume_fluct: f64,
    /// Free-boundary position `r(1, t)`.
    pub s_boundary: f64,
    pub pi: f64,
    pub pi_t: f64,
    pub xi_min: f64,
    pub xi_max: f64,
    pub mean_v_residual: f64,
    pub f_norm: f64,
    /// `sup_x |U(x, t)|`.
    pub m_u: f64,
    /// `max(|xi(0) - pi|, |xi(1) - pi|)` on the reconstructed grid.
    pub endpoint_mismatch: f64,
    /// `|U(1, t)|`.
    pub u_end: f64,
    /// `sup_x |v_x|`, i.e. `||xi_t||_inf`.
    pub xi_t_sup: f64,
    /// `sup_x |(1 - T) xi_t|`.
    pub low_xi_t_sup: f64,
    /// `sup_x (xi + U / mu)`.
    pub xi_plus_u_sup: f64,
    /// Right-hand side of the global form of the second energy inequality.
    pub gronwall_rhs: f64,
    pub pressure_h1: f64,
    /// Smallest eulerian increment `r(x_{j+1}) - r(x_j)`.
    pub min_increment: f64,
    pub boundary_substeps: u64,
}

/// Energy components `(kinetic, internal, P V, total)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Energy {
    pub kinetic: f64,
    pub internal: f64,
    pub pv: f64,
    pub total: f64,
}

/// `int v^2 / 2`, including the affine boundary part.
pub fn kinetic_energy(system: &Galerkin, state: &GalerkinState) -> Result<f64> {
    let pi_t = boundary_rhs(state.pi(), system.params())?;
    Ok(0.5 * l2_squared_v(system, state, pi_t))
}

fn l2_squared_v(system: &Galerkin, state: &GalerkinState, pi_t: f64) -> f64 {
    // |pi_t (x - 1/2)|^2 = pi_t^2 / 12; cross terms pi_t alpha_k c_k.
    let cross: f64 = state
        .alpha
        .iter()
        .enumerate()
        .map(|(i, a)| a * system.x_moment(i + 1))
        .sum();
    let sq: f64 = state.alpha.iter().map(|a| a * a).sum();
    pi_t * pi_t / 12.0 + 2.0 * pi_t * cross + sq
}

/// `V(t) = int xi`, in closed form.
pub fn volume(state: &GalerkinState) -> f64 {
    state.pi() + volume_fluctuation(state)
}

/// `V(t) - pi(t) = sum_k g_k int s_k`.
pub fn volume_fluctuation(state: &GalerkinState) -> f64 {
    state
        .gtilde
        .iter()
        .enumerate()
        .map(|(i, g)| g * sine_mean(i + 1))
        .sum()
}

/// Neumaier-compensated sum.
fn compensated_sum(values: impl Iterator<Item = f64>) -> f64 {
    let (mut sum, mut c) = (0.0f64, 0.0f64);
    for v in values {
        let t = sum + v;
        if sum.abs() >= v.abs() {
            c += (sum - t) + v;
        } else {
            c += (v - t) + sum;
        }
        sum = t;
    }
    sum + c
}

/// `int G(1/xi)` by the projection Gauss rule.
pub fn internal_energy(system: &Galerkin, state: &GalerkinState) -> Result<f64> {
    let p = system.params();
    let mut xi = Vec::new();
    system.xi_at_gauss(&state.gtilde, state.pi(), &mut xi);
    let w = &system.tables().gauss.weights;
    for x in &xi {
        check_floor(*x, p, state.t)?;
    }
    Ok(compensated_sum(
        xi.iter().zip(w).map(|(x, w)| w * big_g_unchecked(1.0 / x, p.a, p.gamma)),
    ))
}

fn check_floor(xi: f64, p: &ModelParams, t: f64) -> Result<()> {
    if xi >= p.xi_floor {
        Ok(())
    } else {
        Err(Error::VacuumApproach {
            xi,
            floor: p.xi_floor,
            t,
        })
    }
}

pub fn energy(system: &Galerkin, state: &GalerkinState) -> Result<Energy> {
    let xi = system.reconstruct_xi(state, system.params().grid);
    for x in xi.values() {
        check_floor(*x, system.params(), state.t)?;
    }
    let kinetic = kinetic_energy(system, state)?;
    let internal = internal_energy(system, state)?;
    let pv = system.params().p_ext * volume(state);
    Ok(Energy {
        kinetic,
        internal,
        pv,
        total: kinetic + internal + pv,
    })
}

/// `mu sum_{k > R} pi^2 k^2 alpha_k^2`, using the rates of `system`.
pub fn dissipation_rate(system: &Galerkin, state: &GalerkinState) -> f64 {
    state
        .alpha
        .iter()
        .enumerate()
        .map(|(i, a)| system.viscous_rate(i + 1) * a * a)
        .sum()
}

/// `f = mu (1 - T) v_xx = -mu sum_{k <= R} pi^2 k^2 alpha_k w_k` on the grid,
/// and its L2 norm by Parseval.
pub fn forcing_f(system: &Galerkin, state: &GalerkinState, m: usize) -> (GridField, f64) {
    let p = system.params();
    let r = p.undamped.min(p.modes);
    let coef: Vec<f64> = (1..=r)
        .map(|k| -p.mu * (PI * k as f64).powi(2) * state.alpha[k - 1])
        .collect();
    let field = system.eval_grid(m, |_, cos, _| coef.iter().zip(&cos[1..]).map(|(c, w)| c * w).sum());
    (field, forcing_norm(p, state))
}

pub fn forcing_norm(p: &ModelParams, state: &GalerkinState) -> f64 {
    let r = p.undamped.min(p.modes);
    let s: f64 = (1..=r)
        .map(|k| ((PI * k as f64).powi(2) * state.alpha[k - 1]).powi(2))
        .sum();
    p.mu * s.sqrt()
}

/// `int xi_x^2 = sum pi^2 k^2 g_k^2`.
fn xi_x_squared(state: &GalerkinState) -> f64 {
    state
        .gtilde
        .iter()
        .enumerate()
        .map(|(i, g)| (PI * (i + 1) as f64 * g).powi(2))
        .sum()
}

/// `int v xi_x = sum pi k g_k (alpha_k + pi_t c_k)`.
fn v_xi_x(system: &Galerkin, state: &GalerkinState, pi_t: f64) -> f64 {
    state
        .gtilde
        .iter()
        .zip(&state.alpha)
        .enumerate()
        .map(|(i, (g, a))| PI * (i + 1) as f64 * g * (a + pi_t * system.x_moment(i + 1)))
        .sum()
}

/// The second-energy functional
/// `int (mu/2 xi_x^2 + 2/mu v^2 - v xi_x + 4/mu G) + 4/mu P V`.
pub fn eta_functional(system: &Galerkin, state: &GalerkinState) -> Result<f64> {
    let p = system.params();
    let pi_t = boundary_rhs(state.pi(), p)?;
    let g = internal_energy(system, state)?;
    Ok(0.5 * p.mu * xi_x_squared(state) + 2.0 / p.mu * l2_squared_v(system, state, pi_t) - v_xi_x(system, state, pi_t)
        + 4.0 / p.mu * g
        + 4.0 / p.mu * p.p_ext * volume(state))
}

/// Cauchy lower bound `int (mu/4 xi_x^2 + v^2/mu + 4/mu G) + 4/mu P V` of eta.
pub fn eta_lower_bound(system: &Galerkin, state: &GalerkinState) -> Result<f64> {
    let p = system.params();
    let pi_t = boundary_rhs(state.pi(), p)?;
    let g = internal_energy(system, state)?;
    Ok(0.25 * p.mu * xi_x_squared(state)
        + l2_squared_v(system, state, pi_t) / p.mu
        + 4.0 / p.mu * g
        + 4.0 / p.mu * p.p_ext * volume(state))
}

/// `chi = 5/mu ||f||^2 + pi_t^2 / 4`.
pub fn chi(p: &ModelParams, state: &GalerkinState) -> Result<f64> {
    let pi_t = boundary_rhs(state.pi(), p)?;
    Ok(5.0 / p.mu * forcing_norm(p, state).powi(2) + 0.25 * pi_t * pi_t)
}

/// Poincare constant used in the global second-energy bound.
pub const POINCARE: f64 = 1.0 / (PI * PI);

/// `(1/mu + 1)||f||^2 + pi_t^2/4 + (2/C_P - 4/mu) int v^2 + 4/mu int G + 4 P V / mu`.
pub fn gronwall_rhs(system: &Galerkin, state: &GalerkinState) -> Result<f64> {
    let p = system.params();
    let pi_t = boundary_rhs(state.pi(), p)?;
    let f2 = forcing_norm(p, state).powi(2);
    let v2 = l2_squared_v(system, state, pi_t);
    let g = internal_energy(system, state)?;
    Ok((1.0 / p.mu + 1.0) * f2 + 0.25 * pi_t * pi_t + (2.0 / POINCARE - 4.0 / p.mu) * v2
        + 4.0 / p.mu * g
        + 4.0 / p.mu * p.p_ext * volume(state))
}

/// Eulerian coordinate `r(x) = int_0^x xi` on the grid (closed form from the
/// coefficients) and `S = r(1)`.
pub fn eulerian_map(system: &Galerkin, state: &GalerkinState, m: usize) -> Result<(GridField, f64)> {
    let pi = state.pi();
    let r = system.eval_grid(m, |x, cos, _| {
        pi * x
            + state
                .gtilde
                .iter()
                .zip(&cos[1..])
                .enumerate()
                .map(|(i, (g, c))| g * (std::f64::consts::SQRT_2 - c) / (PI * (i + 1) as f64))
                .sum::<f64>()
    });
    if let Some(index) = r.values().windows(2).position(|w| !(w[1] > w[0])) {
        return Err(Error::NonMonotoneMap { index });
    }
    let s = *r.values().last().unwrap();
    Ok((r, s))
}

/// `U(x) = int_0^x v` on the grid, in closed form.
pub fn velocity_potential(system: &Galerkin, state: &GalerkinState, m: usize) -> Result<GridField> {
    let pi_t = boundary_rhs(state.pi(), system.params())?;
    Ok(system.eval_grid(m, |x, _, sin| {
        0.5 * pi_t * (x * x - x)
            + state
                .alpha
                .iter()
                .zip(&sin[1..])
                .enumerate()
                .map(|(i, (a, s))| a * s / (PI * (i + 1) as f64))
                .sum::<f64>()
    }))
}

/// L2 norm of `d/dx (a xi^-gamma) = -a gamma xi^(-gamma-1) xi_x`, by Gauss
/// quadrature.
pub fn pressure_h1_seminorm(system: &Galerkin, state: &GalerkinState) -> Result<f64> {
    let p = system.params();
    let tables = system.tables();
    let mut xi = Vec::new();
    system.xi_at_gauss(&state.gtilde, state.pi(), &mut xi);
    let mut sum = 0.0;
    for (i, x) in xi.iter().enumerate() {
        check_floor(*x, p, state.t)?;
        let row = tables.gauss_row_cos(i);
        let xi_x: f64 = state
            .gtilde
            .iter()
            .zip(&row[1..])
            .enumerate()
            .map(|(k, (g, c))| PI * (k + 1) as f64 * g * c)
            .sum();
        let d = p.a * p.gamma * x.powf(-p.gamma - 1.0) * xi_x;
        sum += tables.gauss.weights[i] * d * d;
    }
    Ok(sum.sqrt())
}

/// Column names of the trajectory table, in file order.
pub const TRAJECTORY_COLUMNS: [&str; 19] = [
    "t",
    "kinetic",
    "internal",
    "pv",
    "total_energy",
    "dissipation_rate",
    "dissipation_cum",
    "energy_residual",
    "eta",
    "chi",
    "volume",
    "S",
    "pi",
    "pi_t",
    "xi_min",
    "xi_max",
    "mean_v_residual",
    "f_norm",
    "M_U",
];

impl DiagnosticsRecord {
    /// Values in the order of [`TRAJECTORY_COLUMNS`].
    pub fn table_row(&self) -> [f64; 19] {
        [
            self.t,
            self.kinetic,
            self.internal,
            self.pv,
            self.total_energy,
            self.dissipation_rate,
            self.dissipation_cum,
            self.energy_residual,
            self.eta,
            self.chi,
            self.volume,
            self.s_boundary,
            self.pi,
            self.pi_t,
            self.xi_min,
            self.xi_max,
            self.mean_v_residual,
            self.f_norm,
            self.m_u,
        ]
    }

    /// Evaluates every diagnostic at `state`. `initial` is the record of
    /// the initial state; `None` means `state` is the initial state.
    ///
    /// The energy residual is accumulated component by component,
    /// `(K - K0) + (I - I0) + P (V - V0) + int D`, which keeps it well above
    /// the rounding level of the total energy.
    pub fn evaluate(system: &Galerkin, state: &GalerkinState, initial: Option<&DiagnosticsRecord>) -> Result<Self> {
        let p = system.params();
        let m = p.grid;
        let pi = state.pi();
        let pi_t = boundary_rhs(pi, p)?;

        let xi = system.reconstruct_xi(state, m);
        let xi_min = xi.min();
        let xi_max = xi.max();
        check_floor(xi_min, p, state.t)?;
        let en = energy(system, state)?;
        let volume_fluct = volume_fluctuation(state);
        let energy_residual = match initial {
            Some(r0) => {
                let dv = (pi - r0.pi) + (volume_fluct - r0.volume_fluct);
                compensated_sum(
                    [
                        en.kinetic - r0.kinetic,
                        en.internal - r0.internal,
                        p.p_ext * dv,
                        state.dissipation_cum - r0.dissipation_cum,
                    ]
                    .into_iter(),
                )
            }
            None => 0.0,
        };

        let v = system.reconstruct_v(state, m)?;
        let v_x = system.reconstruct_v_x(state, m)?;
        let u = velocity_potential(system, state, m)?;
        let (r, s_boundary) = eulerian_map(system, state, m)?;

        let r_low = p.undamped.min(p.modes);
        let low_xi_t_sup = system
            .eval_grid(m, |_, _, sin| {
                pi_t - (1..=r_low)
                    .map(|k| PI * k as f64 * state.alpha[k - 1] * sin[k])
                    .sum::<f64>()
            })
            .max_abs();
        let xi_plus_u_sup = xi
            .values()
            .iter()
            .zip(u.values())
            .map(|(x, u)| x + u / p.mu)
            .fold(f64::NEG_INFINITY, f64::max);

        let first = xi.values()[0];
        let last = *xi.values().last().unwrap();
        let min_increment = r
            .values()
            .windows(2)
            .map(|w| w[1] - w[0])
            .fold(f64::INFINITY, f64::min);

        let rec = Self {
            t: state.t,
            kinetic: en.kinetic,
            internal: en.internal,
            pv: en.pv,
            total_energy: en.total,
            dissipation_rate: dissipation_rate(system, state),
            dissipation_cum: state.dissipation_cum,
            energy_residual,
            eta: eta_functional(system, state)?,
            chi: chi(p, state)?,
            chi_cum: state.chi_cum,
            volume: volume(state),
            volume_fluct,
            s_boundary,
            pi,
            pi_t,
            xi_min,
            xi_max,
            mean_v_residual: v.integrate().abs(),
            f_norm: forcing_norm(p, state),
            m_u: u.max_abs(),
            endpoint_mismatch: (first - pi).abs().max((last - pi).abs()),
            u_end: u.values().last().unwrap().abs(),
            xi_t_sup: v_x.max_abs(),
            low_xi_t_sup,
            xi_plus_u_sup,
            gronwall_rhs: gronwall_rhs(system, state)?,
            pressure_h1: pressure_h1_seminorm(system, state)?,
            min_increment,
            boundary_substeps: state.boundary.substeps,
        };
        if !rec.all_finite() {
            return Err(Error::NonFinite { t: state.t });
        }
        Ok(rec)
    }

    fn all_finite(&self) -> bool {
        [
            self.kinetic,
            self.internal,
            self.pv,
            self.total_energy,
            self.dissipation_rate,
            self.dissipation_cum,
            self.energy_residual,
            self.eta,
            self.chi,
            self.volume,
            self.s_boundary,
            self.pi,
            self.pi_t,
            self.xi_min,
            self.xi_max,
            self.mean_v_residual,
            self.f_norm,
            self.m_u,
        ]
        .iter()
        .all(|v| v.is_finite())
    }
}

/// Which monitors abort a run, and their tolerances.
#[derive(Debug, Clone, PartialEq)]
pub struct MonitorSettings {
    /// Bound on `|int v|`, relative to `max(1, int |v|)` scale.
    pub mean_v_tol: f64,
    /// Hard bound on `|energy_residual| / max(1, |E(0)|)`. Only enforced
    /// while the boundary sits at equilibrium, where the discrete balance
    /// is exact up to time-stepping error.
    pub energy_tol: Option<f64>,
    /// Require `xi(0) = xi(1) = pi` bit-exactly.
    pub exact_endpoints: bool,
    /// Bound on `|U(1, t)|`.
    pub u_end_tol: f64,
}

impl Default for MonitorSettings {
    fn default() -> Self {
        Self {
            mean_v_tol: 1e-12,
            energy_tol: Some(1e-6),
            exact_endpoints: true,
            u_end_tol: 1e-10,
        }
    }
}

impl MonitorSettings {
    /// No hard monitors beyond finiteness and positivity.
    pub fn relaxed() -> Self {
        Self {
            mean_v_tol: f64::INFINITY,
            energy_tol: None,
            exact_endpoints: false,
            u_end_tol: f64::INFINITY,
        }
    }

    pub fn check(&self, rec: &DiagnosticsRecord, e0: f64, boundary_static: bool) -> Result<()> {
        let fail = |name: &str, magnitude: f64| {
            Err(Error::MonitorViolation {
                name: name.to_string(),
                magnitude,
                t: rec.t,
            })
        };
        if rec.dissipation_rate < 0.0 {
            return fail("dissipation_rate", rec.dissipation_rate);
        }
        if rec.volume <= 0.0 {
            return fail("volume", rec.volume);
        }
        if rec.eta < 0.0 {
            return fail("eta", rec.eta);
        }
        if rec.mean_v_residual > self.mean_v_tol {
            return fail("mean_v_residual", rec.mean_v_residual);
        }
        if self.exact_endpoints && rec.endpoint_mismatch != 0.0 {
            return fail("endpoint", rec.endpoint_mismatch);
        }
        if rec.u_end > self.u_end_tol {
            return fail("u_end", rec.u_end);
        }
        if let Some(tol) = self.energy_tol {
            let rel = rec.energy_residual.abs() / e0.abs().max(1.0);
            if boundary_static && rel > tol {
                return fail("energy_residual", rel);
            }
        }
        Ok(())
    }
}

/// Outcome of the two Gronwall-type checks on the second energy functional.
#[derive(Debug, Clone, PartialEq)]
pub struct GronwallReport {
    /// `min_t (e^t (eta(0) + int chi) - eta(t))`, relative to the bound.
    pub local_margin: f64,
    pub local_ok: bool,
    /// Whether `mu <= a gamma / xi_+^(gamma+1)` holds for the run.
    pub global_applicable: bool,
    /// `sup_t` of the global right-hand side.
    pub m_bound: f64,
    pub global_margin: f64,
    pub global_ok: bool,
}

/// Checks `eta(t) <= e^t (eta(0) + int_0^t chi)` and, when the smallness
/// condition holds, `eta(t) <= eta(0) e^-t + M (1 + e^-t)` with `M` the
/// running supremum of the recorded right-hand side. Both are checked with
/// `rel_slack` relative slack.
pub fn gronwall_monitor(traj: &Trajectory, params: &ModelParams, rel_slack: f64) -> GronwallReport {
    let recs = &traj.records;
    let Some(first) = recs.first() else {
        return GronwallReport {
            local_margin: 0.0,
            local_ok: true,
            global_applicable: false,
            m_bound: 0.0,
            global_margin: 0.0,
            global_ok: true,
        };
    };
    let eta0 = first.eta;
    let t0 = first.t;
    let xi_plus = recs.iter().map(|r| r.xi_max).fold(f64::NEG_INFINITY, f64::max);
    let global_applicable = params.mu <= params.smallness_threshold(xi_plus);

    let mut local_margin = f64::INFINITY;
    let mut global_margin = f64::INFINITY;
    let mut m = f64::NEG_INFINITY;
    for r in recs {
        let dt = r.t - t0;
        let bound = dt.exp() * (eta0 + r.chi_cum);
        local_margin = local_margin.min((bound - r.eta) / bound.abs().max(f64::MIN_POSITIVE));
        m = m.max(r.gronwall_rhs);
        let gbound = eta0 * (-dt).exp() + m * (1.0 + (-dt).exp());
        global_margin = global_margin.min((gbound - r.eta) / gbound.abs().max(f64::MIN_POSITIVE));
    }
    GronwallReport {
        local_margin,
        local_ok: local_margin >= -rel_slack,
        global_applicable,
        m_bound: m,
        global_margin,
        global_ok: !global_applicable || global_margin >= -rel_slack,
    }
}

/// Running evaluation of the a priori upper bound on xi along a trajectory.
#[derive(Debug, Clone, PartialEq)]
pub struct XiBoundReport {
    /// Threshold `xi_min` with `p(1/xi_min) < P/4`.
    pub xi_threshold: f64,
    /// `sup_t M_U` over the run.
    pub m_u: f64,
    /// `sup_t ||(1 - T) xi_t||_inf` over the run.
    pub low_xi_t_sup: f64,
    /// Whether the measured `(1 - T) xi_t` satisfies `<= P / (2 mu)`.
    pub hypothesis_holds: bool,
    /// `(t, bound(t), xi_max(t))` per record.
    pub envelope: Vec<(f64, f64, f64)>,
    /// `xi_max <= bound` at every record.
    pub bound_holds: bool,
    pub floor_ok: bool,
    pub u_end_max: f64,
    pub lower_bound_applies: bool,
}

/// Threshold `(4a/P)^(1/gamma) (1 + 1e-6)`, just above the level where the
/// pressure equals `P/4`.
pub fn xi_threshold(params: &ModelParams) -> f64 {
    (4.0 * params.a / params.p_ext).powf(1.0 / params.gamma) * (1.0 + 1e-6)
}

pub fn xi_bound_monitor(traj: &Trajectory, params: &ModelParams) -> XiBoundReport {
    let recs = &traj.records;
    let thr = xi_threshold(params);
    let m_u = recs.iter().map(|r| r.m_u).fold(0.0, f64::max);
    let low = recs.iter().map(|r| r.low_xi_t_sup).fold(0.0, f64::max);
    let start = recs.first().map(|r| r.xi_plus_u_sup).unwrap_or(0.0);
    let t0 = recs.first().map(|r| r.t).unwrap_or(0.0);
    let envelope: Vec<_> = recs
        .iter()
        .map(|r| {
            let b = thr.max(start + m_u / params.mu - (r.t - t0) * params.p_ext / (4.0 * params.mu));
            (r.t, b, r.xi_max)
        })
        .collect();
    XiBoundReport {
        xi_threshold: thr,
        m_u,
        low_xi_t_sup: low,
        hypothesis_holds: low <= params.p_ext / (2.0 * params.mu),
        bound_holds: envelope.iter().all(|(_, b, x)| x <= b),
        envelope,
        floor_ok: recs.iter().all(|r| r.xi_min >= params.xi_floor),
        u_end_max: recs.iter().map(|r| r.u_end).fold(0.0, f64::max),
        lower_bound_applies: params.gamma > 3.0,
    }
}
