//! The finite-dimensional Galerkin system and its time integration.
//!
//! Unknowns, for `k = 1..=N`:
//!
//! ```text
//! v_N(x, t)  = pi_t (x - 1/2) + sum_k alpha_k(t) w_k(x)
//! xi_N(x, t) = pi(t)          + sum_k g_k(t) s_k(x)
//! ```
//!
//! with `w_k = sqrt(2) cos(pi k x)`, `s_k = sqrt(2) sin(pi k x)` and `pi(t)`
//! the boundary value driven by [`crate::boundary`]. The sine coefficients
//! `g_k` are the orthonormal rescaling `g_k = -pi k beta_k` of an expansion
//! in `w_k'`. Testing the momentum equation against `w_k` gives
//!
//! ```text
//! alpha_k' = -pi_tt c_k + b_k - [k > R] mu pi^2 k^2 alpha_k
//! g_k'     = -pi k alpha_k
//! ```
//!
//! where `c_k = (x, w_k)` and `b_k = (a xi_N^-gamma - P, w_k')`. The
//! pressure pairing is projected with a Gauss-Legendre rule; the viscous
//! term is diagonal and is removed exactly by an integrating factor.

use std::f64::consts::PI;
use std::sync::Arc;

use crate::boundary::{advance_pi, boundary_rhs, pi_second_derivative, BoundaryState};
use crate::diagnostics::{DiagnosticsRecord, MonitorSettings};
use crate::error::{Error, Result};
use crate::model::{pressure_unchecked, validate_initial_data, InitialData, ModelParams};
use crate::spectral::{
    cosine_analyze, grid_x, sine_analyze, x_cosine_moment, Basis, CoeffVector, GridField, SpectralTables,
};

/// Right-hand side variants. Everything but `Faithful` is a deliberately
/// broken operator used to check that the verification suite catches it.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum RhsVariant {
    #[default]
    Faithful,
    /// Pressure pairing `b_k` with the wrong sign.
    FlippedPressure,
    /// Viscosity applied to every mode (projector disabled).
    NoTruncation,
}

/// Evolving unknowns of one Galerkin run.
#[derive(Debug, Clone, PartialEq)]
pub struct GalerkinState {
    /// Velocity fluctuation coefficients `alpha_k`, index `k - 1`.
    pub alpha: Vec<f64>,
    /// Specific-volume sine coefficients `g_k`, index `k - 1`.
    pub gtilde: Vec<f64>,
    pub boundary: BoundaryState,
    pub t: f64,
    /// Time integral of the dissipation rate.
    pub dissipation_cum: f64,
    /// Time integral of the forcing functional `chi`.
    pub chi_cum: f64,
}

impl GalerkinState {
    pub fn pi(&self) -> f64 {
        self.boundary.pi
    }

    pub fn modes(&self) -> usize {
        self.alpha.len()
    }

    pub fn alpha_coeffs(&self) -> CoeffVector {
        CoeffVector::from_coeffs(Basis::Cosine, std::iter::once(0.0).chain(self.alpha.iter().copied()).collect())
    }

    pub fn gtilde_coeffs(&self) -> CoeffVector {
        CoeffVector::from_coeffs(Basis::Sine, self.gtilde.clone())
    }

    /// The primitive-form coefficients `beta_k = -g_k / (pi k)`.
    pub fn beta(&self) -> Vec<f64> {
        self.gtilde
            .iter()
            .enumerate()
            .map(|(i, g)| -g / (PI * (i + 1) as f64))
            .collect()
    }

    fn is_finite(&self) -> bool {
        self.alpha.iter().chain(&self.gtilde).all(|v| v.is_finite()) && self.boundary.pi.is_finite()
    }
}

/// Time derivatives of the unknowns.
#[derive(Debug, Clone, PartialEq)]
pub struct Rhs {
    pub dalpha: Vec<f64>,
    pub dgtilde: Vec<f64>,
    pub dpi: f64,
}

/// The Galerkin system: parameters, basis tables and precomputed constants.
#[derive(Debug, Clone)]
pub struct Galerkin {
    params: ModelParams,
    tables: Arc<SpectralTables>,
    /// `c_k = (x, w_k)`, index `k - 1`.
    c: Vec<f64>,
    /// Diagonal viscous rates, index `k - 1`.
    visc: Vec<f64>,
    variant: RhsVariant,
}

impl Galerkin {
    pub fn new(params: ModelParams) -> Result<Self> {
        Self::with_variant(params, RhsVariant::Faithful)
    }

    pub fn with_variant(params: ModelParams, variant: RhsVariant) -> Result<Self> {
        params.validate()?;
        let n = params.modes;
        let tables = Arc::new(SpectralTables::new(n, params.grid));
        let c: Vec<f64> = (1..=n).map(x_cosine_moment).collect();
        // Fail fast if the quadrature and the closed-form moments disagree.
        for (i, ck) in c.iter().enumerate() {
            let q: f64 = (0..tables.gauss.len())
                .map(|j| tables.gauss.weights[j] * tables.gauss.nodes[j] * tables.gauss_row_cos(j)[i + 1])
                .sum();
            if (q - ck).abs() > 1e-10 {
                return Err(Error::InvalidParams {
                    field: "M",
                    reason: format!("basis moment check failed for k = {}: {q} vs {ck}", i + 1),
                });
            }
        }
        let visc = (1..=n)
            .map(|k| {
                let damped = k > params.undamped || variant == RhsVariant::NoTruncation;
                if damped {
                    params.mu * (PI * k as f64).powi(2)
                } else {
                    0.0
                }
            })
            .collect();
        Ok(Self {
            params,
            tables,
            c,
            visc,
            variant,
        })
    }

    pub fn params(&self) -> &ModelParams {
        &self.params
    }

    pub fn tables(&self) -> &SpectralTables {
        &self.tables
    }

    pub fn variant(&self) -> RhsVariant {
        self.variant
    }

    /// Viscous decay rate applied to mode `k` by this system.
    pub fn viscous_rate(&self, k: usize) -> f64 {
        self.visc[k - 1]
    }

    pub fn x_moment(&self, k: usize) -> f64 {
        self.c[k - 1]
    }

    /// Projects the initial data onto the Galerkin space.
    ///
    /// `pi(0) = xi0(0)`; `alpha_k(0) = (v0, w_k) - pi_t(0) c_k`, which is
    /// `(v0 - (x - 1/2) pi_t(0), w_k)` with the affine moment in closed form;
    /// `g_k(0) = (xi0 - pi(0), s_k)`.
    pub fn initial_state(&self, init: &InitialData) -> Result<GalerkinState> {
        let hard: Vec<_> = validate_initial_data(init, &self.params)
            .into_iter()
            .filter(|v| !v.is_warning())
            .collect();
        if !hard.is_empty() {
            return Err(Error::InvalidInitialData(hard));
        }
        let n = self.params.modes;
        let v0 = init.v0.sample(self.params.grid);
        let xi0 = init.xi0.sample(self.params.grid);
        let pi0 = xi0.values()[0];
        let pi_t0 = boundary_rhs(pi0, &self.params)?;

        let vc = cosine_analyze(&v0, n)?;
        let alpha = (1..=n).map(|k| vc.get(k) - pi_t0 * self.c[k - 1]).collect();

        let fluct = GridField::from_values(xi0.values().iter().map(|x| x - pi0).collect());
        let gtilde = sine_analyze(&fluct, n)?.as_slice().to_vec();

        Ok(GalerkinState {
            alpha,
            gtilde,
            boundary: BoundaryState::new(pi0, 0.0),
            t: 0.0,
            dissipation_cum: 0.0,
            chi_cum: 0.0,
        })
    }

    /// Builds a state directly from coefficients.
    pub fn state_from_coeffs(&self, alpha: Vec<f64>, gtilde: Vec<f64>, pi: f64) -> GalerkinState {
        assert_eq!(alpha.len(), self.params.modes);
        assert_eq!(gtilde.len(), self.params.modes);
        GalerkinState {
            alpha,
            gtilde,
            boundary: BoundaryState::new(pi, 0.0),
            t: 0.0,
            dissipation_cum: 0.0,
            chi_cum: 0.0,
        }
    }

    /// `v_N` on the closed uniform grid of `m` points.
    pub fn reconstruct_v(&self, state: &GalerkinState, m: usize) -> Result<GridField> {
        let pi_t = boundary_rhs(state.pi(), &self.params)?;
        Ok(self.eval_grid(m, |x, cos, _| {
            pi_t * (x - 0.5) + state.alpha.iter().zip(&cos[1..]).map(|(a, c)| a * c).sum::<f64>()
        }))
    }

    /// `xi_N` on the closed uniform grid of `m` points. Endpoint values are
    /// exactly `pi`.
    pub fn reconstruct_xi(&self, state: &GalerkinState, m: usize) -> GridField {
        let pi = state.pi();
        self.eval_grid(m, |_, _, sin| {
            pi + state.gtilde.iter().zip(&sin[1..]).map(|(g, s)| g * s).sum::<f64>()
        })
    }

    /// `v_N,x = pi_t - sum_k pi k alpha_k s_k`.
    pub fn reconstruct_v_x(&self, state: &GalerkinState, m: usize) -> Result<GridField> {
        let pi_t = boundary_rhs(state.pi(), &self.params)?;
        Ok(self.eval_grid(m, |_, _, sin| {
            pi_t - state
                .alpha
                .iter()
                .zip(&sin[1..])
                .enumerate()
                .map(|(i, (a, s))| PI * (i + 1) as f64 * a * s)
                .sum::<f64>()
        }))
    }

    /// `xi_N,x = sum_k pi k g_k w_k`.
    pub fn reconstruct_xi_x(&self, state: &GalerkinState, m: usize) -> GridField {
        self.eval_grid(m, |_, cos, _| {
            state
                .gtilde
                .iter()
                .zip(&cos[1..])
                .enumerate()
                .map(|(i, (g, c))| PI * (i + 1) as f64 * g * c)
                .sum::<f64>()
        })
    }

    /// Evaluates `f(x, cos_row, sin_row)` on the grid, reusing the tables
    /// when `m` is the system grid.
    pub(crate) fn eval_grid(&self, m: usize, f: impl Fn(f64, &[f64], &[f64]) -> f64) -> GridField {
        if m == self.tables.grid {
            GridField::from_values(
                (0..m)
                    .map(|j| f(grid_x(j, m), self.tables.grid_row_cos(j), self.tables.grid_row_sin(j)))
                    .collect(),
            )
        } else {
            let other = SpectralTables::new(self.params.modes, m);
            GridField::from_values(
                (0..m)
                    .map(|j| f(grid_x(j, m), other.grid_row_cos(j), other.grid_row_sin(j)))
                    .collect(),
            )
        }
    }

    /// `xi_N` at the Gauss nodes.
    pub(crate) fn xi_at_gauss(&self, gtilde: &[f64], pi: f64, out: &mut Vec<f64>) {
        let q = self.tables.gauss.len();
        out.clear();
        out.extend((0..q).map(|i| {
            let row = self.tables.gauss_row_sin(i);
            pi + gtilde.iter().zip(&row[1..]).map(|(g, s)| g * s).sum::<f64>()
        }));
    }

    /// The full right-hand side at the state's time.
    pub fn assemble_rhs(&self, state: &GalerkinState) -> Result<Rhs> {
        let n = self.params.modes;
        let mut y = Vec::with_capacity(2 * n + 2);
        y.extend_from_slice(&state.alpha);
        y.extend_from_slice(&state.gtilde);
        y.extend([0.0, 0.0]);
        let mut out = vec![0.0; y.len()];
        self.nonlinear(&y, state.pi(), state.t, &mut out)?;
        for k in 1..=n {
            out[k - 1] -= self.visc[k - 1] * y[k - 1];
        }
        Ok(Rhs {
            dalpha: out[..n].to_vec(),
            dgtilde: out[n..2 * n].to_vec(),
            dpi: boundary_rhs(state.pi(), &self.params)?,
        })
    }

    /// Pressure pairings `b_k = (a xi^-gamma - P, w_k')`, index `k - 1`.
    pub fn pressure_pairing(&self, gtilde: &[f64], pi: f64, t: f64) -> Result<Vec<f64>> {
        let mut xi = Vec::new();
        self.xi_at_gauss(gtilde, pi, &mut xi);
        let mut b = vec![0.0; self.params.modes];
        self.pairing_from_xi(&xi, t, &mut b)?;
        Ok(b)
    }

    fn pairing_from_xi(&self, xi: &[f64], t: f64, b: &mut [f64]) -> Result<()> {
        let p = &self.params;
        b.iter_mut().for_each(|v| *v = 0.0);
        for (i, &x) in xi.iter().enumerate() {
            if !(x >= p.xi_floor) {
                return Err(Error::VacuumApproach {
                    xi: x,
                    floor: p.xi_floor,
                    t,
                });
            }
            let g = self.tables.gauss.weights[i] * (pressure_unchecked(x, p.a, p.gamma) - p.p_ext);
            let row = self.tables.gauss_row_sin(i);
            for (bk, s) in b.iter_mut().zip(&row[1..]) {
                *bk += g * s;
            }
        }
        for (i, bk) in b.iter_mut().enumerate() {
            *bk *= -PI * (i + 1) as f64;
        }
        Ok(())
    }

    /// Everything except the diagonal viscous term, for the packed vector
    /// `[alpha, g, dissipation_cum, chi_cum]`.
    fn nonlinear(&self, y: &[f64], pi: f64, t: f64, out: &mut [f64]) -> Result<()> {
        let n = self.params.modes;
        let p = &self.params;
        let (alpha, g) = (&y[..n], &y[n..2 * n]);
        let pi_t = boundary_rhs(pi, p)?;
        let pi_tt = pi_second_derivative(pi, p)?;

        let mut xi = Vec::with_capacity(self.tables.gauss.len());
        self.xi_at_gauss(g, pi, &mut xi);
        let (dalpha, rest) = out.split_at_mut(n);
        self.pairing_from_xi(&xi, t, dalpha)?;
        let sign = if self.variant == RhsVariant::FlippedPressure { -1.0 } else { 1.0 };
        for k in 1..=n {
            dalpha[k - 1] = sign * dalpha[k - 1] - pi_tt * self.c[k - 1];
            rest[k - 1] = -PI * k as f64 * alpha[k - 1];
        }
        rest[n] = alpha.iter().zip(&self.visc).map(|(a, d)| d * a * a).sum();
        let f2: f64 = alpha
            .iter()
            .take(p.undamped)
            .enumerate()
            .map(|(i, a)| {
                let pk2 = (PI * (i + 1) as f64).powi(2);
                (p.mu * pk2 * a).powi(2)
            })
            .sum();
        rest[n + 1] = 5.0 / p.mu * f2 + 0.25 * pi_t * pi_t;
        Ok(())
    }

    fn pack(state: &GalerkinState) -> Vec<f64> {
        let mut y = Vec::with_capacity(2 * state.alpha.len() + 2);
        y.extend_from_slice(&state.alpha);
        y.extend_from_slice(&state.gtilde);
        y.push(state.dissipation_cum);
        y.push(state.chi_cum);
        y
    }

    fn unpack(&self, y: &[f64], boundary: BoundaryState, t: f64) -> GalerkinState {
        let n = self.params.modes;
        GalerkinState {
            alpha: y[..n].to_vec(),
            gtilde: y[n..2 * n].to_vec(),
            boundary,
            t,
            dissipation_cum: y[2 * n],
            chi_cum: y[2 * n + 1],
        }
    }

    /// Multiplies the alpha block by `exp(-visc h)`.
    fn apply_factor(&self, y: &mut [f64], h: f64) {
        for (v, d) in y.iter_mut().zip(&self.visc) {
            if *d != 0.0 {
                *v *= (-d * h).exp();
            }
        }
    }

    /// One integrating-factor (Lawson) RK4 step of size `h`, given the
    /// boundary values at `t`, `t + h/2` and `t + h`.
    fn lawson_rk4(&self, state: &GalerkinState, h: f64, pis: [f64; 3]) -> Result<Vec<f64>> {
        let t = state.t;
        let y0 = Self::pack(state);
        let len = y0.len();
        let mut n1 = vec![0.0; len];
        let mut n2 = vec![0.0; len];
        let mut n3 = vec![0.0; len];
        let mut n4 = vec![0.0; len];
        let mut u = vec![0.0; len];

        self.nonlinear(&y0, pis[0], t, &mut n1)?;

        // U2 = E(h/2)(y0 + h/2 n1)
        for i in 0..len {
            u[i] = y0[i] + 0.5 * h * n1[i];
        }
        self.apply_factor(&mut u, 0.5 * h);
        self.nonlinear(&u, pis[1], t + 0.5 * h, &mut n2)?;

        // U3 = E(h/2) y0 + h/2 n2
        let mut e_half_y0 = y0.clone();
        self.apply_factor(&mut e_half_y0, 0.5 * h);
        for i in 0..len {
            u[i] = e_half_y0[i] + 0.5 * h * n2[i];
        }
        self.nonlinear(&u, pis[1], t + 0.5 * h, &mut n3)?;

        // U4 = E(h) y0 + h E(h/2) n3
        let mut e_full_y0 = y0.clone();
        self.apply_factor(&mut e_full_y0, h);
        let mut e_half_n3 = n3.clone();
        self.apply_factor(&mut e_half_n3, 0.5 * h);
        for i in 0..len {
            u[i] = e_full_y0[i] + h * e_half_n3[i];
        }
        self.nonlinear(&u, pis[2], t + h, &mut n4)?;

        // y1 = E(h) y0 + h/6 (E(h) n1 + 2 E(h/2)(n2 + n3) + n4)
        self.apply_factor(&mut n1, h);
        let mut mid: Vec<f64> = n2.iter().zip(&n3).map(|(a, b)| a + b).collect();
        self.apply_factor(&mut mid, 0.5 * h);
        let y1 = (0..len)
            .map(|i| e_full_y0[i] + h / 6.0 * (n1[i] + 2.0 * mid[i] + n4[i]))
            .collect();
        Ok(y1)
    }

    /// One fixed step of size `dt`. The boundary value is sub-stepped by its
    /// own controller to the stage times.
    pub fn step(&self, state: &GalerkinState, dt: f64) -> Result<GalerkinState> {
        assert!(dt > 0.0, "step needs dt > 0");
        let b_half = advance_pi(state.boundary, 0.5 * dt, &self.params)?;
        let b_full = advance_pi(b_half, 0.5 * dt, &self.params)?;
        let y = self.lawson_rk4(state, dt, [state.pi(), b_half.pi, b_full.pi])?;
        let next = self.unpack(&y, b_full, state.t + dt);
        if !next.is_finite() {
            return Err(Error::NonFinite { t: next.t });
        }
        Ok(next)
    }

    /// One step-doubling attempt of size `h`: returns the two-half-step
    /// solution and the scaled error estimate.
    fn try_adaptive(&self, state: &GalerkinState, h: f64) -> Result<(GalerkinState, f64)> {
        let q = 0.25 * h;
        let b1 = advance_pi(state.boundary, q, &self.params)?;
        let b2 = advance_pi(b1, q, &self.params)?;
        let b3 = advance_pi(b2, q, &self.params)?;
        let b4 = advance_pi(b3, q, &self.params)?;
        let full = self.lawson_rk4(state, h, [state.pi(), b2.pi, b4.pi])?;
        let first = self.unpack(&self.lawson_rk4(state, 0.5 * h, [state.pi(), b1.pi, b2.pi])?, b2, state.t + 0.5 * h);
        let second = self.lawson_rk4(&first, 0.5 * h, [b2.pi, b3.pi, b4.pi])?;
        let tol = self.params.tol_ode;
        let n2 = 2 * self.params.modes;
        // Error on the dynamical unknowns; the running integrals follow.
        let err = second[..n2]
            .iter()
            .zip(&full[..n2])
            .map(|(a, b)| (a - b).abs() / 15.0 / (tol * (1.0 + a.abs())))
            .fold(0.0, f64::max);
        let next = self.unpack(&second, b4, state.t + h);
        if !next.is_finite() {
            return Ok((next, f64::INFINITY));
        }
        Ok((next, err))
    }

    /// Integrates from `state` to `t_end` with error control, returning the
    /// final state and the last accepted step size.
    pub fn advance_adaptive(&self, state: &GalerkinState, t_end: f64, h0: f64, ctrl: &mut StepController) -> Result<GalerkinState> {
        let mut s = state.clone();
        let mut h = if ctrl.h > 0.0 { ctrl.h } else { h0 };
        while s.t < t_end {
            let remaining = t_end - s.t;
            let last = h >= remaining;
            let step = if last { remaining } else { h };
            if step < 1e-14 * (1.0 + s.t.abs()) {
                if last {
                    s.t = t_end;
                    break;
                }
                return Err(Error::StepSizeUnderflow { t: s.t, h: step });
            }
            let attempt = self.try_adaptive(&s, step);
            let (next, err) = match attempt {
                Ok(v) => v,
                Err(Error::VacuumApproach { .. }) | Err(Error::NonFinite { .. }) if step > 1e-10 => {
                    // Retry smaller before declaring failure.
                    ctrl.rejected += 1;
                    h = step * 0.25;
                    if h < 1e-12 {
                        return attempt.map(|(s, _)| s);
                    }
                    continue;
                }
                Err(e) => return Err(e),
            };
            if err <= 1.0 {
                ctrl.accepted += 1;
                let fac = ctrl.factor(err);
                s = next;
                if last {
                    s.t = t_end;
                } else {
                    h = step * fac;
                }
                ctrl.err_prev = err.max(1e-4);
                ctrl.h = h;
            } else {
                ctrl.rejected += 1;
                let fac = if err.is_finite() { (0.9 * err.powf(-0.2)).clamp(0.1, 0.9) } else { 0.1 };
                h = step * fac;
            }
        }
        Ok(s)
    }

    /// Integrates to `t_end` with fixed steps no larger than `dt`, landing
    /// exactly on `t_end`.
    pub fn advance_fixed(&self, state: &GalerkinState, t_end: f64, dt: f64) -> Result<GalerkinState> {
        let remaining = t_end - state.t;
        if remaining <= 0.0 {
            return Ok(state.clone());
        }
        let n = (remaining / dt - 1e-9).ceil().max(1.0) as usize;
        let h = remaining / n as f64;
        let mut s = state.clone();
        for i in 0..n {
            s = self.step(&s, h)?;
            if i + 1 == n {
                s.t = t_end;
            }
        }
        Ok(s)
    }
}

/// PI step-size controller state for [`Galerkin::advance_adaptive`].
#[derive(Debug, Clone)]
pub struct StepController {
    pub h: f64,
    pub err_prev: f64,
    pub accepted: u64,
    pub rejected: u64,
    pub h_max: f64,
}

impl StepController {
    pub fn new(h_max: f64) -> Self {
        Self {
            h: 0.0,
            err_prev: 1.0,
            accepted: 0,
            rejected: 0,
            h_max,
        }
    }

    fn factor(&self, err: f64) -> f64 {
        // Exponents for a 4th-order local error estimate.
        let e = err.max(1e-10);
        let fac = 0.9 * e.powf(-0.7 / 5.0) * self.err_prev.powf(0.4 / 5.0);
        fac.clamp(0.2, 5.0).min(self.h_max / self.h.max(f64::MIN_POSITIVE).max(1e-300)).max(0.2)
    }
}

/// Time-stepping strategy for [`run`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Stepping {
    Fixed { dt: f64 },
    Adaptive { h0: f64, h_max: f64 },
}

/// Options for [`run`].
#[derive(Debug, Clone)]
pub struct RunOptions {
    pub stepping: Stepping,
    pub monitors: MonitorSettings,
    pub variant: RhsVariant,
}

impl Default for RunOptions {
    fn default() -> Self {
        Self {
            stepping: Stepping::Adaptive { h0: 1e-3, h_max: 0.05 },
            monitors: MonitorSettings::default(),
            variant: RhsVariant::Faithful,
        }
    }
}

/// States and diagnostics at the output times.
#[derive(Debug, Clone, Default)]
pub struct Trajectory {
    pub states: Vec<GalerkinState>,
    pub records: Vec<DiagnosticsRecord>,
    pub accepted_steps: u64,
    pub rejected_steps: u64,
}

impl Trajectory {
    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    pub fn last_state(&self) -> Option<&GalerkinState> {
        self.states.last()
    }

    pub fn times(&self) -> Vec<f64> {
        self.records.iter().map(|r| r.t).collect()
    }
}

/// A run that stopped early, with everything recorded up to the failure.
#[derive(Debug, Clone)]
pub struct RunAbort {
    pub error: Error,
    pub partial: Trajectory,
}

impl std::fmt::Display for RunAbort {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{} (after {} records)", self.error, self.partial.len())
    }
}

impl std::error::Error for RunAbort {}

impl From<Error> for RunAbort {
    fn from(error: Error) -> Self {
        Self {
            error,
            partial: Trajectory::default(),
        }
    }
}

/// Integrates from the projected initial data to `t_end`, recording a
/// state and a diagnostics record at `t = 0` and at every output time in
/// `(0, t_end]`. Hard monitor failures abort the run.
pub fn run(
    init: &InitialData,
    params: &ModelParams,
    t_end: f64,
    output_times: &[f64],
    options: &RunOptions,
) -> std::result::Result<Trajectory, RunAbort> {
    let system = Galerkin::with_variant(params.clone(), options.variant)?;
    let state = system.initial_state(init)?;
    run_from(&system, state, t_end, output_times, options)
}

/// [`run`] starting from an explicit state.
pub fn run_from(
    system: &Galerkin,
    state: GalerkinState,
    t_end: f64,
    output_times: &[f64],
    options: &RunOptions,
) -> std::result::Result<Trajectory, RunAbort> {
    if !(t_end > state.t) {
        return Err(Error::InvalidParams {
            field: "t_end",
            reason: format!("must exceed the start time {}", state.t),
        }
        .into());
    }
    let mut times: Vec<f64> = output_times
        .iter()
        .copied()
        .filter(|&t| t > state.t && t <= t_end)
        .collect();
    times.sort_by(f64::total_cmp);
    times.dedup();
    if times.last() != Some(&t_end) {
        times.push(t_end);
    }

    let mut traj = Trajectory::default();
    let first = match DiagnosticsRecord::evaluate(system, &state, None) {
        Ok(r) => r,
        Err(error) => return Err(RunAbort { error, partial: traj }),
    };
    let e0 = first.total_energy;
    let reference = first.clone();
    let boundary_static = crate::boundary::boundary_rhs(state.pi(), system.params())
        .map(|v| v == 0.0)
        .unwrap_or(false);
    if let Err(error) = options.monitors.check(&first, e0, boundary_static) {
        traj.records.push(first);
        traj.states.push(state);
        return Err(RunAbort { error, partial: traj });
    }
    traj.records.push(first);
    traj.states.push(state.clone());

    let mut ctrl = match options.stepping {
        Stepping::Adaptive { h_max, .. } => StepController::new(h_max),
        Stepping::Fixed { .. } => StepController::new(f64::INFINITY),
    };
    let mut s = state;
    for &t_out in &times {
        let next = match options.stepping {
            Stepping::Fixed { dt } => {
                let n = ((t_out - s.t) / dt - 1e-9).ceil().max(1.0) as u64;
                ctrl.accepted += n;
                system.advance_fixed(&s, t_out, dt)
            }
            Stepping::Adaptive { h0, .. } => system.advance_adaptive(&s, t_out, h0, &mut ctrl),
        };
        s = match next {
            Ok(v) => v,
            Err(error) => {
                traj.accepted_steps = ctrl.accepted;
                traj.rejected_steps = ctrl.rejected;
                return Err(RunAbort { error, partial: traj });
            }
        };
        let rec = match DiagnosticsRecord::evaluate(system, &s, Some(&reference)) {
            Ok(r) => r,
            Err(error) => return Err(RunAbort { error, partial: traj }),
        };
        let check = options.monitors.check(&rec, e0, boundary_static);
        traj.records.push(rec);
        traj.states.push(s.clone());
        if let Err(error) = check {
            traj.accepted_steps = ctrl.accepted;
            traj.rejected_steps = ctrl.rejected;
            return Err(RunAbort { error, partial: traj });
        }
    }
    traj.accepted_steps = ctrl.accepted;
    traj.rejected_steps = ctrl.rejected;
    Ok(traj)
}

/// Evenly spaced output times `dt, 2 dt, ..` up to and including `t_end`.
pub fn output_grid(t_end: f64, dt: f64) -> Vec<f64> {
    let n = (t_end / dt - 1e-9).ceil().max(1.0) as usize;
    (1..=n).map(|i| (i as f64 * t_end / n as f64).min(t_end)).collect()
}
