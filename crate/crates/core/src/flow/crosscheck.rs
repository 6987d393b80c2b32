//! Pointwise comparison of the residual norms produced by the two flows.
//!
//! If `A(t) = σ(A₀)` with `h = σ^H σ`, then `Θ(A(t)) = σ K_h σ⁻¹`, hence
//! `|Θ(A(t))|²_{H₀} = tr(K_h h⁻¹ K_h^H h)`.

use super::metric::{metric_tendency, MetricState};
use super::HiggsState;
use crate::error::{Error, Result};
use crate::functionals::he_residual;
use crate::geometry::TorusGeometry;
use crate::linalg::{self, C64};
use serde::{Deserialize, Serialize};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GapReport {
    pub t: f64,
    /// `‖ |Θ_conn| - |Θ_metric| ‖_{L²}`
    pub l2_gap: f64,
    /// `max | |Θ_conn| - |Θ_metric| |`
    pub sup_gap: f64,
    pub connection_l2: f64,
    pub metric_l2: f64,
}

/// Pointwise `|K_h - λ|_H` of a metric-flow state.
pub fn metric_residual_norms(geom: &TorusGeometry, ms: &MetricState) -> Result<Vec<f64>> {
    let (_, k) = metric_tendency(geom, ms, &ms.h)?;
    let h_inv = ms.h.inverse().ok_or(Error::MetricPositivity { point: 0, t: ms.t, pivot: 0.0 })?;
    let r = k.rank();
    let mut a = vec![C64::new(0.0, 0.0); r * r];
    let mut b = vec![C64::new(0.0, 0.0); r * r];
    let mut kh = vec![C64::new(0.0, 0.0); r * r];
    Ok((0..geom.npts())
        .map(|p| {
            linalg::matmul(k.at(p), h_inv.at(p), &mut a, r);
            linalg::adjoint(k.at(p), &mut kh, r);
            linalg::matmul(&kh, ms.h.at(p), &mut b, r);
            linalg::matmul(&a, &b, &mut kh, r);
            linalg::trace(&kh, r).re.max(0.0).sqrt()
        })
        .collect())
}

pub fn cross_check_residuals(geom: &TorusGeometry, conn: &HiggsState, metric: &MetricState) -> Result<GapReport> {
    if (conn.t - metric.t).abs() > 1e-12 * conn.t.abs().max(1.0) {
        return Err(Error::TimeMismatch(conn.t, metric.t));
    }
    let c: Vec<f64> = he_residual(geom, &conn.a, &conn.theta).field.frob_sq().into_iter().map(f64::sqrt).collect();
    let m = metric_residual_norms(geom, metric)?;
    let diff: Vec<f64> = c.iter().zip(&m).map(|(x, y)| (x - y) * (x - y)).collect();
    Ok(GapReport {
        t: conn.t,
        l2_gap: geom.integrate_real(&diff).sqrt(),
        sup_gap: diff.iter().cloned().fold(0.0, f64::max).sqrt(),
        connection_l2: geom.integrate_real(&c.iter().map(|x| x * x).collect::<Vec<_>>()).sqrt(),
        metric_l2: geom.integrate_real(&m.iter().map(|x| x * x).collect::<Vec<_>>()).sqrt(),
    })
}
