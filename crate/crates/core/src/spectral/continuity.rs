//! Two-sided continuity of the least eigenvalue under `L^p`-small changes of
//! the connection, `p` the real dimension:
//!
//! ```text
//! (1 - c s) λ(A₀) - c s ≤ λ(A₀ + a) ≤ (1 - c s)⁻¹ (λ(A₀) + c s),   s = ‖a‖_{L^p}
//! ```
//!
//! The constant `c` bundles Sobolev constants and is calibrated empirically.

use super::eigen::{least_eigenvalue, EigenOptions};
use crate::bundle::Connection;
use crate::error::{Error, Result};
use crate::geometry::TorusGeometry;
use serde::{Deserialize, Serialize};

/// Absolute slack granted to the eigen-solver when testing the inequalities.
pub const SOLVER_SLACK: f64 = 1e-9;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ContinuityReport {
    /// `‖a‖_{L^p}`
    pub a_norm: f64,
    pub lambda0: f64,
    pub lambda: f64,
    pub c: f64,
    pub lower: f64,
    pub upper: f64,
    pub lower_holds: bool,
    pub upper_holds: bool,
    /// smallest `c` for which both inequalities hold
    pub c_required: f64,
}

/// `(∫ (Σ_a |a_a|²)^{p/2})^{1/p}`.
pub fn connection_lp_norm(geom: &TorusGeometry, a: &Connection, p: f64) -> f64 {
    let mut dens = vec![0.0; geom.npts()];
    for c in a.comps() {
        dens.iter_mut().zip(c.frob_sq()).for_each(|(d, x)| *d += x);
    }
    let powered: Vec<f64> = dens.iter().map(|d| d.sqrt().powf(p)).collect();
    geom.integrate_real(&powered).powf(1.0 / p)
}

/// `(lower, upper)` for given `λ(A₀)`, `s = ‖a‖` and `c`.
pub fn continuity_bounds(lambda0: f64, s: f64, c: f64) -> (f64, f64) {
    let cs = c * s;
    ((1.0 - cs) * lambda0 - cs, (lambda0 + cs) / (1.0 - cs))
}

/// Smallest `c ≥ 0` with both inequalities satisfied.
pub fn required_constant(lambda0: f64, lambda: f64, s: f64) -> f64 {
    if s <= 0.0 {
        return if (lambda - lambda0).abs() <= SOLVER_SLACK { 0.0 } else { f64::INFINITY };
    }
    let up = (lambda - lambda0) / (s * (1.0 + lambda));
    let down = (lambda0 - lambda) / (s * (1.0 + lambda0));
    up.max(down).max(0.0)
}

/// `safety · max c_required` over `(λ(A₀), λ(A), s)` samples.
pub fn calibrate_constant(samples: &[(f64, f64, f64)], safety: f64) -> f64 {
    safety * samples.iter().map(|&(l0, l, s)| required_constant(l0, l, s)).fold(0.0, f64::max)
}

pub fn eigen_continuity_check(
    geom: &TorusGeometry,
    a0: &Connection,
    a: &Connection,
    c: f64,
    opts: &EigenOptions,
) -> Result<ContinuityReport> {
    let s = connection_lp_norm(geom, a, geom.real_dim() as f64);
    if !(c >= 0.0) || c * s > 0.5 {
        return Err(Error::InvalidArgument(format!("perturbation too large: c·‖a‖ = {} > 1/2", c * s)));
    }
    let lambda0 = least_eigenvalue(geom, a0, opts).lambda_hat;
    let sum: Vec<_> = a0.comps().iter().zip(a.comps()).map(|(x, y)| x.add(y)).collect();
    let lambda = least_eigenvalue(geom, &Connection::from_components_unchecked(sum), opts).lambda_hat;
    let (lower, upper) = continuity_bounds(lambda0, s, c);
    Ok(ContinuityReport {
        a_norm: s,
        lambda0,
        lambda,
        c,
        lower,
        upper,
        lower_holds: lambda >= lower - SOLVER_SLACK,
        upper_holds: lambda <= upper + SOLVER_SLACK,
        c_required: required_constant(lambda0, lambda, s),
    })
}
