//! Spectral Galerkin simulation of the one-dimensional barotropic
//! compressible Navier-Stokes equations with a free boundary, in Lagrangian
//! mass coordinates on `(0, 1)`:
//!
//! ```text
//! v_t + p(1/xi)_x = mu (T v_x)_x,   xi_t = v_x,   p(1/xi) = a xi^-gamma
//! ```
//!
//! where `T` removes the lowest `R` cosine modes from the viscous term and
//! the boundary carries an external pressure `P`.

pub mod boundary;
pub mod config;
pub mod diagnostics;
pub mod error;
pub mod galerkin;
pub mod model;
pub mod oracle;
pub mod quadrature;
pub mod spectral;
pub mod verify;

pub use boundary::{advance_pi, boundary_rhs, pi_bounds, BoundaryState};
pub use diagnostics::{DiagnosticsRecord, MonitorSettings};
pub use error::{Error, Result};
pub use galerkin::{run, run_from, Galerkin, GalerkinState, RhsVariant, RunAbort, RunOptions, Stepping, Trajectory};
pub use model::{stationary_xi, InitialData, ModelParams, Profile};
pub use spectral::{Basis, CoeffVector, GridField};
