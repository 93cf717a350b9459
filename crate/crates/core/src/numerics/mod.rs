//! Self-contained numerical kernel: bracketed root finding, quadrature with
//! inverse-square-root endpoint singularities, an embedded Runge-Kutta
//! integrator, and finite-difference weights on arbitrary grids.

pub mod fd;
pub mod ode;
pub mod quad;
pub mod root;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub use fd::{derivative_on_grid, fornberg_weights};
pub use ode::{solve_ivp, solve_ivp_at, IvpError, IvpOptions, StopPredicate, StopReason, Trajectory};
pub use quad::{integrate_endpoint_singular, SingularEnd};
pub use root::find_root_bracketed;

/// Tolerance profile shared by every computation. Values are stated at
/// `M = 1` scale.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct Tolerances {
    /// Relative tolerance for bracketed roots.
    pub tol_root: f64,
    /// Absolute tolerance for quadrature.
    pub tol_quad: f64,
    /// Per-step relative tolerance for the IVP integrator.
    pub tol_ode: f64,
    /// Coordinate consistency tolerance.
    pub tol_coord: f64,
    /// CMC residual tolerance.
    pub tol_resid: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            tol_root: 1e-12,
            tol_quad: 1e-9,
            tol_ode: 1e-9,
            tol_coord: 1e-8,
            tol_resid: 1e-6,
        }
    }
}

impl Tolerances {
    pub fn validate(&self) -> Result<()> {
        let all = [
            ("tol_root", self.tol_root),
            ("tol_quad", self.tol_quad),
            ("tol_ode", self.tol_ode),
            ("tol_coord", self.tol_coord),
            ("tol_resid", self.tol_resid),
        ];
        for (name, v) in all {
            if !(v.is_finite() && v > 0.0) {
                return Err(Error::Config(format!("{name} must be positive, got {v}")));
            }
        }
        if self.tol_resid < self.tol_ode {
            return Err(Error::Config(format!(
                "tol_resid ({}) must not be smaller than tol_ode ({})",
                self.tol_resid, self.tol_ode
            )));
        }
        Ok(())
    }
}
