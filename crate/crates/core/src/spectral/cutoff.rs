//! Logarithmic cutoff `β(x) = ψ(log(N|x|/R) / log N)` with the quintic
//! smoothstep transition `ψ(s) = 1 - (10s³ - 15s⁴ + 6s⁵)` on `[0, 1]`.
//!
//! In four real dimensions the substitution `s = log(N r/R)/log N` turns the
//! radial integrals into integrals over `s ∈ [0, 1]`:
//!
//! ```text
//! ‖∇β‖⁴_{L⁴}  = 2π² ∫ ψ'⁴ ds / log³N
//! ‖∇²β‖²_{L²} = 2π² ∫ ((ψ'' - ψ' log N)² + 3 ψ'² log²N) ds / log³N
//! ```
//!
//! using `|∇²β|² = β''² + 3 (β'/r)²` for radial functions on `ℝ⁴`.

use crate::error::{Error, Result};
use crate::field::ScalarField;
use crate::geometry::TorusGeometry;
use crate::linalg::C64;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

/// `(ψ, ψ', ψ'')` at `s`.
pub fn cutoff_profile(s: f64) -> (f64, f64, f64) {
    if s <= 0.0 {
        (1.0, 0.0, 0.0)
    } else if s >= 1.0 {
        (0.0, 0.0, 0.0)
    } else {
        let s2 = s * s;
        let t = 1.0 - s;
        (1.0 - s2 * s * (10.0 - 15.0 * s + 6.0 * s2), -30.0 * s2 * t * t, -60.0 * s * t * (1.0 - 2.0 * s))
    }
}

fn validate(n_ratio: f64, r: f64) -> Result<()> {
    if !(n_ratio >= 2.0 && n_ratio.is_finite()) {
        return Err(Error::InvalidArgument(format!("cutoff ratio N = {n_ratio} must be at least 2")));
    }
    if !(r > 0.0 && r.is_finite()) {
        return Err(Error::InvalidArgument(format!("cutoff radius R = {r} must be positive")));
    }
    Ok(())
}

/// `β` sampled on the grid around `center`, using periodic distance.
pub fn log_cutoff(geom: &TorusGeometry, n_ratio: f64, r: f64, center: &[f64]) -> Result<ScalarField> {
    validate(n_ratio, r)?;
    let half = 0.5 * geom.sides().iter().cloned().fold(f64::INFINITY, f64::min);
    if r >= half {
        return Err(Error::InvalidArgument(format!("cutoff radius {r} must be below half the shortest period {half}")));
    }
    let h = geom.sides().iter().zip(geom.grid()).map(|(l, &n)| l / n as f64).fold(0.0, f64::max);
    if r / n_ratio < h {
        return Err(Error::InvalidArgument(format!(
            "inner radius R/N = {} is below the grid spacing {h}",
            r / n_ratio
        )));
    }
    let log_n = n_ratio.ln();
    Ok(geom.sample(|x| {
        let dist = geom.periodic_distance(x, center);
        let s = if dist > 0.0 { (n_ratio * dist / r).ln() / log_n } else { f64::NEG_INFINITY };
        C64::new(cutoff_profile(s).0, 0.0)
    }))
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CutoffNorms {
    pub n_ratio: f64,
    /// `‖∇β‖_{L⁴}`
    pub grad_l4: f64,
    /// `‖∇²β‖_{L²}`
    pub hess_l2: f64,
    /// `grad_l4 + hess_l2`
    pub sum: f64,
    /// `√(log N) · sum`
    pub scaled_sum: f64,
}

/// Panels of the composite Gauss–Legendre rule on `[0, 1]`.
const PANELS: usize = 256;

/// Radial quadrature of the cutoff norms on `ℝ⁴`.
pub fn cutoff_norms(n_ratio: f64, r: f64) -> Result<CutoffNorms> {
    validate(n_ratio, r)?;
    let log_n = n_ratio.ln();
    // 5-point Gauss–Legendre nodes and weights on [-1, 1]
    let nodes = [0.0, 0.538_469_310_105_683_1, -0.538_469_310_105_683_1, 0.906_179_845_938_664, -0.906_179_845_938_664];
    let weights = [
        0.568_888_888_888_888_9,
        0.478_628_670_499_366_5,
        0.478_628_670_499_366_5,
        0.236_926_885_056_189_1,
        0.236_926_885_056_189_1,
    ];
    let (mut g4, mut h2) = (0.0, 0.0);
    let width = 1.0 / PANELS as f64;
    for panel in 0..PANELS {
        let mid = (panel as f64 + 0.5) * width;
        for (x, w) in nodes.iter().zip(weights) {
            let s = mid + 0.5 * width * x;
            let (_, d1, d2) = cutoff_profile(s);
            let ww = 0.5 * width * w;
            g4 += ww * d1.powi(4);
            h2 += ww * ((d2 - d1 * log_n).powi(2) + 3.0 * d1 * d1 * log_n * log_n);
        }
    }
    let area = 2.0 * PI * PI;
    let grad_l4 = (area * g4 / log_n.powi(3)).powf(0.25);
    let hess_l2 = (area * h2 / log_n.powi(3)).sqrt();
    let sum = grad_l4 + hess_l2;
    Ok(CutoffNorms { n_ratio, grad_l4, hess_l2, sum, scaled_sum: log_n.sqrt() * sum })
}
