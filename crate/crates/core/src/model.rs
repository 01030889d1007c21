//! Physical constants, the constitutive law and admissibility of initial data.
//!
//! The pressure law is `p(rho) = a rho^gamma`. Written in the specific
//! volume `xi = 1/rho` this is `a / xi^gamma`, and the potential `G` with
//! `p(s) = G'(s) s^2` is `G(s) = a s^(gamma-1) / (gamma-1)`.

use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::spectral::GridField;

/// Physical and discretization constants for one run.
#[derive(Debug, Clone, PartialEq)]
pub struct ModelParams {
    /// Pressure coefficient `a`.
    pub a: f64,
    /// Adiabatic exponent, `> 1`.
    pub gamma: f64,
    /// Viscosity coefficient.
    pub mu: f64,
    /// External pressure `P` acting on the free boundary.
    pub p_ext: f64,
    /// Number of undamped modes `R`; the viscous projector keeps `k > R`.
    pub undamped: usize,
    /// Galerkin truncation `N`.
    pub modes: usize,
    /// Uniform grid size `M` (also the Gauss node count of the projections).
    pub grid: usize,
    pub oversample: usize,
    /// Vacuum-detection threshold for `xi`.
    pub xi_floor: f64,
    /// Local error tolerance of the time integrators.
    pub tol_ode: f64,
}

impl Default for ModelParams {
    fn default() -> Self {
        Self::new(1.0, 5.0, 0.1, 1.0, 2, 32).expect("default parameters are valid")
    }
}

impl ModelParams {
    /// Builds a validated parameter set with oversampling factor 4 and the
    /// default floor and tolerance.
    pub fn new(a: f64, gamma: f64, mu: f64, p_ext: f64, undamped: usize, modes: usize) -> Result<Self> {
        let p = Self {
            a,
            gamma,
            mu,
            p_ext,
            undamped,
            modes,
            grid: 4 * modes + 1,
            oversample: 4,
            xi_floor: 1e-8,
            tol_ode: 1e-10,
        };
        p.validate()?;
        Ok(p)
    }

    pub fn with_oversample(mut self, oversample: usize) -> Result<Self> {
        self.oversample = oversample;
        self.grid = oversample * self.modes + 1;
        self.validate()?;
        Ok(self)
    }

    pub fn with_tol_ode(mut self, tol: f64) -> Result<Self> {
        self.tol_ode = tol;
        self.validate()?;
        Ok(self)
    }

    pub fn with_xi_floor(mut self, floor: f64) -> Result<Self> {
        self.xi_floor = floor;
        self.validate()?;
        Ok(self)
    }

    pub fn with_modes(mut self, modes: usize) -> Result<Self> {
        self.modes = modes;
        self.grid = self.oversample * modes + 1;
        self.validate()?;
        Ok(self)
    }

    pub fn with_undamped(mut self, undamped: usize) -> Result<Self> {
        self.undamped = undamped;
        self.validate()?;
        Ok(self)
    }

    pub fn with_mu(mut self, mu: f64) -> Result<Self> {
        self.mu = mu;
        self.validate()?;
        Ok(self)
    }

    pub fn validate(&self) -> Result<()> {
        fn bad(field: &'static str, reason: impl Into<String>) -> Result<()> {
            Err(Error::InvalidParams {
                field,
                reason: reason.into(),
            })
        }
        if !(self.p_ext > 0.0) || !self.p_ext.is_finite() {
            return bad("P", format!("assumption A1 requires P > 0, got {}", self.p_ext));
        }
        if !(self.gamma > 1.0) || !self.gamma.is_finite() {
            return bad("gamma", format!("must exceed 1, got {}", self.gamma));
        }
        if !(self.a > 0.0) || !self.a.is_finite() {
            return bad("a", format!("must be positive, got {}", self.a));
        }
        if !(self.mu > 0.0) || !self.mu.is_finite() {
            return bad("mu", format!("must be positive, got {}", self.mu));
        }
        if self.modes == 0 {
            return bad("N", "must be positive");
        }
        if self.undamped >= self.modes {
            return bad(
                "R",
                format!("need R < N so that damped modes exist (R = {}, N = {})", self.undamped, self.modes),
            );
        }
        if self.oversample < 2 {
            return bad("oversample", format!("must be at least 2, got {}", self.oversample));
        }
        if self.grid < 2 * self.modes + 1 {
            return bad(
                "M",
                format!("grid of {} points is below 2N+1 = {}", self.grid, 2 * self.modes + 1),
            );
        }
        if !(self.xi_floor > 0.0) {
            return bad("xi_floor", "must be positive");
        }
        if !(self.tol_ode > 0.0) {
            return bad("tol_ode", "must be positive");
        }
        Ok(())
    }

    /// Whether the lower-bound cut-off argument applies (`gamma > 3`).
    pub fn cutoff_applies(&self) -> bool {
        self.gamma > 3.0
    }

    /// Smallness threshold `a gamma / xi_plus^(gamma+1)` on `mu` for the
    /// uniform-in-time H^1 bound.
    pub fn smallness_threshold(&self, xi_plus: f64) -> f64 {
        self.a * self.gamma / xi_plus.powf(self.gamma + 1.0)
    }
}

/// Pressure as a function of specific volume, `a xi^(-gamma)`.
pub fn pressure(xi: f64, params: &ModelParams) -> Result<f64> {
    if !(xi >= params.xi_floor) {
        return Err(Error::VacuumApproach {
            xi,
            floor: params.xi_floor,
            t: f64::NAN,
        });
    }
    Ok(pressure_unchecked(xi, params.a, params.gamma))
}

#[inline]
pub(crate) fn pressure_unchecked(xi: f64, a: f64, gamma: f64) -> f64 {
    a * xi.powf(-gamma)
}

/// The potential `G(s) = a s^(gamma-1)/(gamma-1)` evaluated at density `s`.
pub fn big_g(s: f64, params: &ModelParams) -> Result<f64> {
    if !(s > 0.0) || !s.is_finite() {
        return Err(Error::Domain { what: "G", value: s });
    }
    Ok(big_g_unchecked(s, params.a, params.gamma))
}

#[inline]
pub(crate) fn big_g_unchecked(s: f64, a: f64, gamma: f64) -> f64 {
    a * s.powf(gamma - 1.0) / (gamma - 1.0)
}

/// Equilibrium specific volume `(a/P)^(1/gamma)`, where `p = P`.
pub fn stationary_xi(params: &ModelParams) -> f64 {
    (params.a / params.p_ext).powf(1.0 / params.gamma)
}

/// A function of `x` on `[0, 1]`, either analytic or sampled.
#[derive(Clone)]
pub enum Profile {
    Constant(f64),
    Function(Arc<dyn Fn(f64) -> f64 + Send + Sync>),
    Sampled(GridField),
}

impl fmt::Debug for Profile {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Profile::Constant(c) => write!(f, "Constant({c})"),
            Profile::Function(_) => write!(f, "Function(..)"),
            Profile::Sampled(g) => write!(f, "Sampled({} points)", g.len()),
        }
    }
}

impl Profile {
    pub fn function(f: impl Fn(f64) -> f64 + Send + Sync + 'static) -> Self {
        Profile::Function(Arc::new(f))
    }

    /// Samples on the closed uniform grid of `m` points. Sampled profiles
    /// are returned as they are, whatever their size.
    pub fn sample(&self, m: usize) -> GridField {
        match self {
            Profile::Constant(c) => GridField::from_fn(m, |_| *c),
            Profile::Function(f) => GridField::from_fn(m, |x| f(x)),
            Profile::Sampled(g) => g.clone(),
        }
    }
}

/// Initial velocity and specific volume.
#[derive(Debug, Clone)]
pub struct InitialData {
    pub v0: Profile,
    pub xi0: Profile,
}

/// A failed admissibility condition on the initial data.
#[derive(Debug, Clone, PartialEq)]
pub enum Violation {
    /// `int v0 dx != 0`.
    MeanVelocity { mean: f64 },
    /// `xi0 <= 0` somewhere.
    NonPositiveVolume { min: f64 },
    /// `xi0(0) != xi0(1)`.
    UnequalEndpoints { left: f64, right: f64 },
    /// `int 1/xi0 dx != 1`. Only a warning: unit mass is a normalization.
    MassNotUnit { mass: f64 },
    NonFinite,
}

impl Violation {
    pub fn is_warning(&self) -> bool {
        matches!(self, Violation::MassNotUnit { .. })
    }
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::MeanVelocity { mean } => {
                write!(f, "A2 mean-zero velocity: int v0 dx = {mean:e}")
            }
            Violation::NonPositiveVolume { min } => {
                write!(f, "A2 positivity: min xi0 = {min:e}")
            }
            Violation::UnequalEndpoints { left, right } => {
                write!(f, "A2 equal endpoints: xi0(0) = {left}, xi0(1) = {right}")
            }
            Violation::MassNotUnit { mass } => {
                write!(f, "A2 unit mass (warning): int 1/xi0 dx = {mass}")
            }
            Violation::NonFinite => write!(f, "initial data contains non-finite samples"),
        }
    }
}

/// Checks the admissibility conditions on the initial data. Returns every
/// violation found, warnings included.
pub fn validate_initial_data(init: &InitialData, params: &ModelParams) -> Vec<Violation> {
    let mut out = Vec::new();
    let v0 = init.v0.sample(params.grid);
    let xi0 = init.xi0.sample(params.grid);
    if !v0.values().iter().chain(xi0.values()).all(|x| x.is_finite()) {
        out.push(Violation::NonFinite);
        return out;
    }

    let vmax = v0.values().iter().fold(1.0_f64, |m, x| m.max(x.abs()));
    let mean = v0.integrate();
    if mean.abs() > 1e-9 * vmax {
        out.push(Violation::MeanVelocity { mean });
    }

    let min = xi0.values().iter().copied().fold(f64::INFINITY, f64::min);
    if !(min > 0.0) {
        out.push(Violation::NonPositiveVolume { min });
    }

    let (left, right) = (xi0.values()[0], *xi0.values().last().unwrap());
    if (left - right).abs() > 1e-12 * left.abs().max(1.0) {
        out.push(Violation::UnequalEndpoints { left, right });
    }

    if min > 0.0 {
        let rho = GridField::from_values(xi0.values().iter().map(|x| 1.0 / x).collect());
        let mass = rho.integrate();
        if (mass - 1.0).abs() > 1e-6 {
            out.push(Violation::MassNotUnit { mass });
        }
    }
    out
}
