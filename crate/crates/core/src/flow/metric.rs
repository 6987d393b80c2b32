//! Heat flow of the Hermitian metric at a frozen Higgs pair `(A₀, θ₀)`:
//!
//! ```text
//! ∂h/∂t = -2 h K_h + 2 λ h,
//! K_h = √−1 Λ_ω(F_{A₀} + ∂̄_{A₀}(h⁻¹ ∂_{A₀} h) + [θ₀, h⁻¹ θ₀^H h])
//!     = √−1 Λ_ω F_{A₀} - 2 Σ_k D_{z̄_k}(h⁻¹ D_{z_k} h) + 2 Σ_k [θ_k, h⁻¹ θ_k^H h]
//! ```
//!
//! The linear part of the right-hand side is `Δh`, which ETDRK4 treats exactly.

use super::etd::EtdCoeffs;
use crate::bundle::{complex_derivatives, Connection, HiggsField};
use crate::error::{Error, Result};
use crate::field::MatrixField;
use crate::functionals::{einstein_constant, i_lambda_f};
use crate::geometry::TorusGeometry;
use crate::linalg::{self, C64};
use serde::{Deserialize, Serialize};

#[derive(Clone, Debug)]
pub struct MetricState {
    pub h: MatrixField,
    pub a0: Connection,
    pub theta0: HiggsField,
    pub t: f64,
    i_lambda_f0: MatrixField,
    lambda: f64,
}

impl MetricState {
    /// Starts at `h = Id`.
    pub fn new(geom: &TorusGeometry, a0: Connection, theta0: HiggsField) -> Self {
        let i_lambda_f0 = i_lambda_f(geom, &a0);
        let lambda = einstein_constant(geom, &a0);
        let h = MatrixField::identity(geom.npts(), a0.rank());
        Self { h, a0, theta0, t: 0.0, i_lambda_f0, lambda }
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    fn with_h(&self, h: MatrixField, t: f64) -> Self {
        Self { h, t, ..self.clone() }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct MetricFlowConfig {
    pub dt: f64,
    pub t_max: f64,
    /// abort if `det h` leaves `[det_min, det_max]`
    pub det_min: f64,
    pub det_max: f64,
}

impl Default for MetricFlowConfig {
    fn default() -> Self {
        Self { dt: 1e-3, t_max: 1.0, det_min: 1e-8, det_max: 1e8 }
    }
}

/// `(∂h/∂t, K_h - λ Id)` at metric `h`.
pub fn metric_tendency(geom: &TorusGeometry, ms: &MetricState, h: &MatrixField) -> Result<(MatrixField, MatrixField)> {
    let r = h.rank();
    let h_inv = h.inverse().ok_or(Error::MetricPositivity { point: 0, t: ms.t, pivot: 0.0 })?;
    let (dz, _) = complex_derivatives(geom, &ms.a0, h);
    let mut k = ms.i_lambda_f0.clone();
    for (kk, d) in dz.iter().enumerate() {
        let x = h_inv.mul(d);
        let (_, dzb) = complex_derivatives(geom, &ms.a0, &x);
        k.axpy(C64::new(-2.0, 0.0), &dzb[kk]);
    }
    let mut tmp = vec![C64::new(0.0, 0.0); r * r];
    let mut adj_h = vec![C64::new(0.0, 0.0); r * r];
    let mut conj = vec![C64::new(0.0, 0.0); r * r];
    for t in ms.theta0.comps() {
        for p in 0..geom.npts() {
            // h⁻¹ θ^H h
            linalg::adjoint(t.at(p), &mut tmp, r);
            linalg::matmul(&tmp, h.at(p), &mut adj_h, r);
            linalg::matmul(h_inv.at(p), &adj_h, &mut conj, r);
            linalg::matmul(t.at(p), &conj, &mut tmp, r);
            let kp = k.at_mut(p);
            for (i, x) in kp.iter_mut().enumerate() {
                *x += 2.0 * tmp[i];
            }
            linalg::matmul(&conj, t.at(p), &mut tmp, r);
            for (i, x) in kp.iter_mut().enumerate() {
                *x -= 2.0 * tmp[i];
            }
        }
    }
    for p in 0..geom.npts() {
        let kp = k.at_mut(p);
        for i in 0..r {
            kp[i * r + i] -= ms.lambda;
        }
    }
    let dh = h.mul(&k).scaled(C64::new(-2.0, 0.0));
    Ok((dh, k))
}

fn nonlinear(geom: &TorusGeometry, ms: &MetricState, h_hat: &[C64], rank: usize) -> Result<Vec<C64>> {
    let rr = rank * rank;
    let h = geom.from_spectral(h_hat.to_vec(), rank);
    let (dh, _) = metric_tendency(geom, ms, &h)?;
    let mut n = geom.to_spectral(&dh);
    let mask = geom.dealias_mask();
    for p in 0..geom.npts() {
        let ksq = geom.wavenumber_sq(p);
        for c in 0..rr {
            let idx = p * rr + c;
            n[idx] = if mask[p] { n[idx] + ksq * h_hat[idx] } else { C64::new(0.0, 0.0) };
        }
    }
    Ok(n)
}

/// One ETDRK4 step, followed by symmetrization and a positivity check.
pub fn metric_flow_step(geom: &TorusGeometry, ms: &MetricState, dt: f64, cfg: &MetricFlowConfig) -> Result<MetricState> {
    let rank = ms.h.rank();
    let rr = rank * rank;
    let coeffs: Vec<EtdCoeffs> = (0..geom.npts()).map(|p| EtdCoeffs::new(-geom.wavenumber_sq(p), dt)).collect();
    let mask = geom.dealias_mask();
    let u = geom.to_spectral(&ms.h);
    let combine = |terms: &[(fn(&EtdCoeffs) -> f64, f64, &[C64])]| {
        let mut out = vec![C64::new(0.0, 0.0); u.len()];
        for p in 0..geom.npts() {
            for c in 0..rr {
                let idx = p * rr + c;
                out[idx] = if mask[p] {
                    terms.iter().map(|(sel, s, v)| sel(&coeffs[p]) * s * v[idx]).sum()
                } else {
                    u[idx]
                };
            }
        }
        out
    };
    let nu = nonlinear(geom, ms, &u, rank)?;
    let a = combine(&[(|c| c.e2, 1.0, &u), (|c| c.q, 1.0, &nu)]);
    let na = nonlinear(geom, ms, &a, rank)?;
    let b = combine(&[(|c| c.e2, 1.0, &u), (|c| c.q, 1.0, &na)]);
    let nb = nonlinear(geom, ms, &b, rank)?;
    let mix: Vec<C64> = nb.iter().zip(&nu).map(|(x, y)| 2.0 * x - y).collect();
    let c = combine(&[(|c| c.e2, 1.0, &a), (|c| c.q, 1.0, &mix)]);
    let nc = nonlinear(geom, ms, &c, rank)?;
    let next = combine(&[
        (|c| c.e, 1.0, &u),
        (|c| c.f1, 1.0, &nu),
        (|c| c.f2, 2.0, &na),
        (|c| c.f2, 2.0, &nb),
        (|c| c.f3, 1.0, &nc),
    ]);
    let mut h = geom.from_spectral(next, rank);
    h.symmetrize();
    let t = ms.t + dt;
    check_metric(&h, t, cfg)?;
    Ok(ms.with_h(h, t))
}

fn check_metric(h: &MatrixField, t: f64, cfg: &MetricFlowConfig) -> Result<()> {
    for p in 0..h.npts() {
        let (pivot, det) = linalg::cholesky_pivots(h.at(p), h.rank());
        if !(pivot > 0.0) || !(det >= cfg.det_min && det <= cfg.det_max) {
            return Err(Error::MetricPositivity { point: p, t, pivot });
        }
    }
    Ok(())
}

/// Fixed-step integration to `cfg.t_max`.
pub fn run_metric_flow(geom: &TorusGeometry, mut ms: MetricState, cfg: &MetricFlowConfig) -> Result<MetricState> {
    if !(cfg.dt > 0.0) {
        return Err(Error::InvalidArgument(format!("metric flow dt must be positive, got {}", cfg.dt)));
    }
    let steps = ((cfg.t_max - ms.t) / cfg.dt).round().max(0.0) as usize;
    let t0 = ms.t;
    for i in 0..steps {
        let target = t0 + (i + 1) as f64 * (cfg.t_max - t0) / steps as f64;
        ms = metric_flow_step(geom, &ms, target - ms.t, cfg)?;
        ms.t = target;
    }
    Ok(ms)
}
