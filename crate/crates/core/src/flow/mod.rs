//! Yang–Mills–Higgs flow and the Hermitian-metric heat flow.
//!
//! With `K = √−1 Λ_ω(F_A + [θ,θ*]) - λ Id` the connection flow is
//!
//! ```text
//! ∂A_{2k}/∂t   =  i D_{2k+1} K
//! ∂A_{2k+1}/∂t = -i D_{2k} K
//! ∂θ_k/∂t      = -[K, θ_k]
//! ```
//!
//! i.e. `∂A^{0,1}/∂t = ∂̄_A K`, `∂A^{1,0}/∂t = -∂_A K`: motion along the complex
//! gauge orbit with generator `-K`. For `n = 1` the `A` equation is `-d_A^* F_A`
//! plus the Higgs term, and the sign is the one for which the energy decreases.
//!
//! Time stepping is ETDRK4 with the linearized curl-curl part of the `A`
//! equation treated exactly; nonlinear tendencies are truncated to the 2/3-rule
//! band and modes outside it are frozen.

mod checkpoint;
mod crosscheck;
mod etd;
mod metric;

pub use checkpoint::{read_checkpoint, write_checkpoint, Checkpoint};
pub use crosscheck::{cross_check_residuals, metric_residual_norms, GapReport};
pub use etd::EtdCoeffs;
pub use metric::{metric_flow_step, metric_tendency, run_metric_flow, MetricFlowConfig, MetricState};

use crate::bundle::{covariant_derivatives, dbar_higgs, nabla_higgs_norm_sq, wedge_square, Connection, HiggsField};
use crate::error::{Error, Result};
use crate::field::MatrixField;
use crate::functionals::{energy_density, he_residual, DensitySnapshot, EnergyReport};
use crate::geometry::TorusGeometry;
use crate::linalg::{C64, I};
use serde::{Deserialize, Serialize};

/// A Higgs pair at flow time `t`.
#[derive(Clone, Debug, PartialEq)]
pub struct HiggsState {
    pub a: Connection,
    pub theta: HiggsField,
    pub t: f64,
    pub cached: Option<EnergyReport>,
}

impl HiggsState {
    pub fn new(a: Connection, theta: HiggsField) -> Self {
        Self { a, theta, t: 0.0, cached: None }
    }

    pub fn is_finite(&self) -> bool {
        self.a.is_finite() && self.theta.is_finite()
    }

    /// Constant conjugation `g (A, θ) g⁻¹`.
    pub fn conjugate_const(&self, g: &[C64], g_inv: &[C64]) -> Self {
        Self {
            a: self.a.conjugate_const(g, g_inv),
            theta: self.theta.conjugate_const(g, g_inv),
            t: self.t,
            cached: None,
        }
    }
}

/// Time derivatives of `(A, θ)`.
#[derive(Clone, Debug)]
pub struct Tendency {
    pub da: Vec<MatrixField>,
    pub dtheta: Vec<MatrixField>,
}

impl Tendency {
    /// `‖Ȧ‖² + 2‖θ̇‖²` with the form norms (`|dz|² = 2`); the energy
    /// decreases at twice this rate.
    pub fn norm_sq(&self, geom: &TorusGeometry) -> f64 {
        self.da.iter().map(|d| geom.l2_norm_sq(d)).sum::<f64>()
            + 4.0 * self.dtheta.iter().map(|d| geom.l2_norm_sq(d)).sum::<f64>()
    }
}

/// Right-hand side of the flow.
pub fn ymh_gradient(geom: &TorusGeometry, a: &Connection, theta: &HiggsField) -> Tendency {
    let k = he_residual(geom, a, theta).field;
    tendency_from_generator(geom, a, theta, &k)
}

fn tendency_from_generator(geom: &TorusGeometry, a: &Connection, theta: &HiggsField, k: &MatrixField) -> Tendency {
    let dk = covariant_derivatives(geom, a, k);
    let mut da = Vec::with_capacity(dk.len());
    for j in 0..geom.n() {
        da.push(dk[2 * j + 1].scaled(I));
        da.push(dk[2 * j].scaled(-I));
    }
    let dtheta = theta.comps().iter().map(|t| k.commutator(t).scaled(C64::new(-1.0, 0.0))).collect();
    Tendency { da, dtheta }
}

/// One forward-Euler step; the reference integrator for tests.
pub fn euler_step(geom: &TorusGeometry, state: &HiggsState, dt: f64) -> HiggsState {
    let tend = ymh_gradient(geom, &state.a, &state.theta);
    let mut a = state.a.clone().into_components();
    let mut th = state.theta.clone().into_components();
    for (x, d) in a.iter_mut().zip(&tend.da) {
        x.axpy(C64::new(dt, 0.0), d);
    }
    for (x, d) in th.iter_mut().zip(&tend.dtheta) {
        x.axpy(C64::new(dt, 0.0), d);
    }
    HiggsState {
        a: Connection::from_components_unchecked(a),
        theta: HiggsField::from_components_unchecked(th),
        t: state.t + dt,
        cached: None,
    }
}

/// Stacked spectral coefficients: `2n` connection components then `n` Higgs components.
type Spectral = Vec<Vec<C64>>;

struct EtdPlan {
    /// unit vector `w/|w|` per mode, `2n` entries per mode
    what: Vec<f64>,
    /// coefficients along `w` per mode
    coeffs: Vec<EtdCoeffs>,
    zero: EtdCoeffs,
}

impl EtdPlan {
    fn new(geom: &TorusGeometry, h: f64) -> Self {
        let d = geom.real_dim();
        let mut what = vec![0.0; geom.npts() * d];
        let mut coeffs = Vec::with_capacity(geom.npts());
        for p in 0..geom.npts() {
            let k = geom.wavevector(p);
            let ksq = geom.wavenumber_sq(p);
            if ksq > 0.0 {
                let norm = ksq.sqrt();
                for j in 0..d / 2 {
                    what[p * d + 2 * j] = -k[2 * j + 1] / norm;
                    what[p * d + 2 * j + 1] = k[2 * j] / norm;
                }
            }
            coeffs.push(EtdCoeffs::new(-ksq, h));
        }
        Self { what, coeffs, zero: EtdCoeffs::zero(h) }
    }

    /// `out += g(hL) v` for the coefficient selected by `sel`, scaled by `s`.
    fn accumulate(&self, geom: &TorusGeometry, sel: fn(&EtdCoeffs) -> f64, s: f64, v: &Spectral, out: &mut Spectral, rr: usize) {
        let d = geom.real_dim();
        let g0 = sel(&self.zero) * s;
        for p in 0..geom.npts() {
            let gz = sel(&self.coeffs[p]) * s;
            let w = &self.what[p * d..(p + 1) * d];
            for c in 0..rr {
                let idx = p * rr + c;
                let proj: C64 = (0..d).map(|a| w[a] * v[a][idx]).sum();
                for a in 0..d {
                    out[a][idx] += g0 * v[a][idx] + (gz - g0) * w[a] * proj;
                }
            }
        }
        for comp in d..v.len() {
            for (o, x) in out[comp].iter_mut().zip(&v[comp]) {
                *o += g0 * x;
            }
        }
    }

    /// `L v`: `-w (w·v)` on the connection part.
    fn apply_linear(&self, geom: &TorusGeometry, v: &Spectral, out: &mut Spectral, rr: usize) {
        let d = geom.real_dim();
        for p in 0..geom.npts() {
            let ksq = geom.wavenumber_sq(p);
            let w = &self.what[p * d..(p + 1) * d];
            for c in 0..rr {
                let idx = p * rr + c;
                let proj: C64 = (0..d).map(|a| w[a] * v[a][idx]).sum();
                for a in 0..d {
                    out[a][idx] = -ksq * w[a] * proj;
                }
            }
        }
    }
}

fn to_spectral(geom: &TorusGeometry, a: &Connection, theta: &HiggsField) -> Spectral {
    a.comps().iter().chain(theta.comps()).map(|c| geom.to_spectral(c)).collect()
}

fn to_physical(geom: &TorusGeometry, s: &Spectral, rank: usize) -> (Connection, HiggsField) {
    let d = geom.real_dim();
    let mut fields: Vec<MatrixField> = s.iter().map(|c| geom.from_spectral(c.clone(), rank)).collect();
    let th = fields.split_off(d);
    (Connection::from_components_unchecked(fields), HiggsField::from_components_unchecked(th))
}

fn zeros_like(s: &Spectral) -> Spectral {
    s.iter().map(|c| vec![C64::new(0.0, 0.0); c.len()]).collect()
}

/// Masked nonlinear part `N = T - L u` in spectral space.
fn nonlinear(geom: &TorusGeometry, plan: &EtdPlan, u_hat: &Spectral, rank: usize) -> Spectral {
    let (a, theta) = to_physical(geom, u_hat, rank);
    let tend = ymh_gradient(geom, &a, &theta);
    let mut n: Spectral = tend.da.iter().chain(&tend.dtheta).map(|c| geom.to_spectral(c)).collect();
    let rr = rank * rank;
    let mut lu = zeros_like(u_hat);
    plan.apply_linear(geom, u_hat, &mut lu, rr);
    let mask = geom.dealias_mask();
    for (nc, lc) in n.iter_mut().zip(&lu) {
        for p in 0..geom.npts() {
            for c in 0..rr {
                let idx = p * rr + c;
                nc[idx] = if mask[p] { nc[idx] - lc[idx] } else { C64::new(0.0, 0.0) };
            }
        }
    }
    n
}

/// Restores the frozen (dealiased-away) modes of `u` into `v`.
fn freeze_unresolved(geom: &TorusGeometry, u: &Spectral, v: &mut Spectral, rr: usize) {
    let mask = geom.dealias_mask();
    for (vc, uc) in v.iter_mut().zip(u) {
        for p in (0..geom.npts()).filter(|&p| !mask[p]) {
            vc[p * rr..(p + 1) * rr].copy_from_slice(&uc[p * rr..(p + 1) * rr]);
        }
    }
}

/// One unconditional ETDRK4 step of size `dt`.
pub fn etd_step(geom: &TorusGeometry, state: &HiggsState, dt: f64) -> HiggsState {
    let rank = state.a.rank();
    let rr = rank * rank;
    let plan = EtdPlan::new(geom, dt);
    let u = to_spectral(geom, &state.a, &state.theta);
    let nu = nonlinear(geom, &plan, &u, rank);

    let stage = |base: &Spectral, n: &Spectral| {
        let mut s = zeros_like(base);
        plan.accumulate(geom, |c| c.e2, 1.0, base, &mut s, rr);
        plan.accumulate(geom, |c| c.q, 1.0, n, &mut s, rr);
        freeze_unresolved(geom, &u, &mut s, rr);
        s
    };
    let sa = stage(&u, &nu);
    let na = nonlinear(geom, &plan, &sa, rank);
    let sb = stage(&u, &na);
    let nb = nonlinear(geom, &plan, &sb, rank);
    let combo: Spectral = nb.iter().zip(&nu).map(|(x, y)| x.iter().zip(y).map(|(p, q)| 2.0 * p - q).collect()).collect();
    let sc = stage(&sa, &combo);
    let nc = nonlinear(geom, &plan, &sc, rank);

    let mut out = zeros_like(&u);
    plan.accumulate(geom, |c| c.e, 1.0, &u, &mut out, rr);
    plan.accumulate(geom, |c| c.f1, 1.0, &nu, &mut out, rr);
    plan.accumulate(geom, |c| c.f2, 2.0, &na, &mut out, rr);
    plan.accumulate(geom, |c| c.f2, 2.0, &nb, &mut out, rr);
    plan.accumulate(geom, |c| c.f3, 1.0, &nc, &mut out, rr);
    freeze_unresolved(geom, &u, &mut out, rr);
    let (a, theta) = to_physical(geom, &out, rank);
    HiggsState { a, theta, t: state.t + dt, cached: None }
}

/// Step control and stopping rules.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FlowConfig {
    pub dt0: f64,
    pub dt_max: f64,
    /// growth factor applied after an accepted step
    pub dt_growth: f64,
    pub t_max: f64,
    /// stop once `sup|Θ|` is at or below this
    pub target_residual: f64,
    /// accept iff `ymh_new ≤ ymh_old (1 + descent_rtol) + descent_atol`
    pub descent_rtol: f64,
    pub descent_atol: f64,
    /// allowed per-step change of each constraint residual
    pub drift_budget: f64,
    pub max_halvings: u32,
    pub max_steps: usize,
    /// keep an energy-density snapshot every this many accepted steps (0 = never)
    pub snapshot_every: usize,
}

impl Default for FlowConfig {
    fn default() -> Self {
        Self {
            dt0: 1e-3,
            dt_max: 0.05,
            dt_growth: 1.2,
            t_max: 1.0,
            target_residual: 0.0,
            descent_rtol: 1e-12,
            descent_atol: 0.0,
            drift_budget: 1e-9,
            max_halvings: 20,
            max_steps: 1_000_000,
            snapshot_every: 0,
        }
    }
}

impl FlowConfig {
    pub fn validate(&self) -> Result<()> {
        let positive = [("dt0", self.dt0), ("dt_max", self.dt_max), ("drift_budget", self.drift_budget)];
        for (name, v) in positive {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::InvalidArgument(format!("{name} must be positive, got {v}")));
            }
        }
        if !(self.dt_growth >= 1.0) {
            return Err(Error::InvalidArgument(format!("dt_growth must be ≥ 1, got {}", self.dt_growth)));
        }
        if !(self.t_max >= 0.0) || self.descent_rtol < 0.0 || self.descent_atol < 0.0 || self.target_residual < 0.0 {
            return Err(Error::InvalidArgument("t_max and tolerances must be non-negative".into()));
        }
        Ok(())
    }
}

/// One time slice of scalar observables.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DiagnosticsRecord {
    pub t: f64,
    pub ymh: f64,
    pub theta_sup_residual: f64,
    pub theta_l2_residual: f64,
    /// `|‖∂̄_A θ‖(t) - ‖∂̄_A θ‖(0)|`
    pub dbar_drift: f64,
    /// `|‖θ∧θ‖(t) - ‖θ∧θ‖(0)|`
    pub wedge_drift: f64,
    pub theta_l2: f64,
    pub nabla_theta_l2: f64,
    pub lambda_est: Option<f64>,
    pub dt: f64,
    pub accepted: bool,
}

/// `(‖∂̄_A θ‖, ‖θ∧θ‖)`.
pub fn constraint_norms(geom: &TorusGeometry, a: &Connection, theta: &HiggsField) -> (f64, f64) {
    (
        geom.form_norm_sq(&dbar_higgs(geom, a, theta)).sqrt(),
        geom.form_norm_sq(&wedge_square(geom, theta)).sqrt(),
    )
}

struct Observed {
    ymh: f64,
    dbar: f64,
    wedge: f64,
}

fn observe(geom: &TorusGeometry, s: &HiggsState) -> Observed {
    let ymh = geom.integrate_real(&energy_density(geom, &s.a, &s.theta));
    let (dbar, wedge) = constraint_norms(geom, &s.a, &s.theta);
    Observed { ymh, dbar, wedge }
}

/// Result of one controlled step.
#[derive(Clone, Debug)]
pub struct StepOutcome {
    pub state: HiggsState,
    pub dt: f64,
    pub ymh: f64,
    /// `(dt, ymh)` of every rejected attempt, in order
    pub rejected: Vec<(f64, f64)>,
}

/// ETDRK4 step with descent and drift acceptance; halves `dt` on rejection.
pub fn flow_step(geom: &TorusGeometry, state: &HiggsState, dt: f64, cfg: &FlowConfig) -> Result<StepOutcome> {
    let old = observe(geom, state);
    controlled_step(geom, state, &old, dt, cfg)
}

fn controlled_step(
    geom: &TorusGeometry,
    state: &HiggsState,
    old: &Observed,
    mut dt: f64,
    cfg: &FlowConfig,
) -> Result<StepOutcome> {
    let mut rejected = Vec::new();
    let mut last_reason = String::new();
    for _ in 0..=cfg.max_halvings {
        let trial = etd_step(geom, state, dt);
        if !trial.is_finite() {
            rejected.push((dt, f64::NAN));
            last_reason = "non-finite fields".into();
            dt *= 0.5;
            continue;
        }
        let new = observe(geom, &trial);
        let descent = new.ymh <= old.ymh * (1.0 + cfg.descent_rtol) + cfg.descent_atol;
        let drift_ok =
            (new.dbar - old.dbar).abs() <= cfg.drift_budget && (new.wedge - old.wedge).abs() <= cfg.drift_budget;
        if descent && drift_ok {
            return Ok(StepOutcome { state: trial, dt, ymh: new.ymh, rejected });
        }
        last_reason = if descent {
            format!("constraint drift {:.3e}/{:.3e} over budget", new.dbar - old.dbar, new.wedge - old.wedge)
        } else {
            format!("energy increased from {:.17e} to {:.17e}", old.ymh, new.ymh)
        };
        rejected.push((dt, new.ymh));
        dt *= 0.5;
    }
    if last_reason == "non-finite fields" {
        return Err(Error::NonFinite { t: state.t });
    }
    Err(Error::StepFailure { t: state.t, reason: format!("{} after {} halvings", last_reason, cfg.max_halvings) })
}

/// Records and final state of a flow run.
#[derive(Clone, Debug)]
pub struct FlowRun {
    pub state: HiggsState,
    pub records: Vec<DiagnosticsRecord>,
    pub snapshots: Vec<DensitySnapshot>,
}

fn record(
    geom: &TorusGeometry,
    s: &HiggsState,
    obs: &Observed,
    initial: &Observed,
    dt: f64,
    accepted: bool,
) -> DiagnosticsRecord {
    let res = he_residual(geom, &s.a, &s.theta);
    DiagnosticsRecord {
        t: s.t,
        ymh: obs.ymh,
        theta_sup_residual: res.sup_norm,
        theta_l2_residual: res.l2_norm,
        dbar_drift: (obs.dbar - initial.dbar).abs(),
        wedge_drift: (obs.wedge - initial.wedge).abs(),
        theta_l2: s.theta.norm_sq(geom).sqrt(),
        nabla_theta_l2: nabla_higgs_norm_sq(geom, &s.a, &s.theta).sqrt(),
        lambda_est: None,
        dt,
        accepted,
    }
}

/// Integrates to `t_max` or until `sup|Θ| ≤ target_residual`, passing every
/// record (rejected attempts included) to `sink` as it is produced.
pub fn run_flow(
    geom: &TorusGeometry,
    initial: HiggsState,
    cfg: &FlowConfig,
    mut sink: impl FnMut(&DiagnosticsRecord) -> Result<()>,
) -> Result<FlowRun> {
    run_flow_observed(geom, initial, cfg, |r, _| sink(r))
}

/// As [`run_flow`], also handing the sink the state each record describes
/// (the unchanged state for rejected attempts).
pub fn run_flow_observed(
    geom: &TorusGeometry,
    initial: HiggsState,
    cfg: &FlowConfig,
    mut sink: impl FnMut(&DiagnosticsRecord, &HiggsState) -> Result<()>,
) -> Result<FlowRun> {
    cfg.validate()?;
    let mut state = initial;
    let first = observe(geom, &state);
    let init_obs = Observed { ymh: first.ymh, dbar: first.dbar, wedge: first.wedge };
    let mut records = Vec::new();
    let mut snapshots = Vec::new();
    let rec = record(geom, &state, &first, &init_obs, 0.0, true);
    sink(&rec, &state)?;
    let mut done = rec.theta_sup_residual <= cfg.target_residual || state.t >= cfg.t_max;
    records.push(rec);
    if cfg.snapshot_every > 0 {
        snapshots.push(DensitySnapshot { t: state.t, density: energy_density(geom, &state.a, &state.theta) });
    }
    let mut current = first;
    let mut dt = cfg.dt0.min(cfg.dt_max);
    let mut steps = 0;
    while !done {
        if steps >= cfg.max_steps {
            return Err(Error::StepFailure { t: state.t, reason: format!("step limit {} reached", cfg.max_steps) });
        }
        let remaining = cfg.t_max - state.t;
        let trial_dt = dt.min(remaining);
        let out = controlled_step(geom, &state, &current, trial_dt, cfg)?;
        for &(rdt, rymh) in &out.rejected {
            let rej = DiagnosticsRecord { t: state.t + rdt, ymh: rymh, accepted: false, dt: rdt, ..records.last().cloned().expect("initial record") };
            sink(&rej, &state)?;
            records.push(rej);
        }
        let truncated = out.rejected.is_empty() && trial_dt < dt;
        state = out.state;
        if cfg.t_max - state.t < 1e-12 * cfg.t_max.max(1.0) {
            state.t = cfg.t_max;
        }
        current = observe(geom, &state);
        let rec = record(geom, &state, &current, &init_obs, out.dt, true);
        sink(&rec, &state)?;
        done = rec.theta_sup_residual <= cfg.target_residual || state.t >= cfg.t_max;
        records.push(rec);
        steps += 1;
        if cfg.snapshot_every > 0 && steps % cfg.snapshot_every == 0 {
            snapshots.push(DensitySnapshot { t: state.t, density: energy_density(geom, &state.a, &state.theta) });
        }
        if !truncated {
            dt = if out.rejected.is_empty() { (out.dt * cfg.dt_growth).min(cfg.dt_max) } else { out.dt };
        }
    }
    state.cached = Some(crate::functionals::energy_report(geom, &state.a, &state.theta));
    Ok(FlowRun { state, records, snapshots })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg;

    #[test]
    fn e12_gradient_is_four_theta() {
        let g = TorusGeometry::unit(1, 8).unwrap();
        let theta = HiggsField::constant(&g, &[linalg::unit(2, 0, 1)]).unwrap();
        let tend = ymh_gradient(&g, &Connection::zero(&g, 2), &theta);
        let expect = theta.comps()[0].scaled(C64::new(-4.0, 0.0));
        assert!(tend.dtheta[0].sub(&expect).max_abs_entry() < 1e-14);
        assert!(tend.da.iter().all(|d| d.max_abs_entry() < 1e-14));
    }

    #[test]
    fn stationary_state_is_fixed() {
        let g = TorusGeometry::unit(1, 8).unwrap();
        let d = vec![C64::new(1.0, 0.0), C64::new(0.0, 0.0), C64::new(0.0, 0.0), C64::new(-1.0, 0.0)];
        let s = HiggsState::new(Connection::zero(&g, 2), HiggsField::constant(&g, &[d]).unwrap());
        let out = flow_step(&g, &s, 0.1, &FlowConfig::default()).unwrap();
        assert!(out.rejected.is_empty());
        assert!(out.state.theta.comps()[0].sub(&s.theta.comps()[0]).max_abs_entry() < 1e-15);
    }

    #[test]
    fn nilpotent_step_shrinks_theta() {
        let g = TorusGeometry::unit(1, 8).unwrap();
        let s = HiggsState::new(Connection::zero(&g, 2), HiggsField::constant(&g, &[linalg::unit(2, 0, 1)]).unwrap());
        let out = flow_step(&g, &s, 0.01, &FlowConfig::default()).unwrap();
        assert!(out.ymh < 8.0);
        assert!(out.state.theta.norm_sq(&g) < 2.0);
    }

    #[test]
    fn zero_data_stops_immediately() {
        let g = TorusGeometry::unit(1, 8).unwrap();
        let s = HiggsState::new(Connection::zero(&g, 2), HiggsField::zero(&g, 2));
        let mut lines = 0;
        let run = run_flow(&g, s, &FlowConfig::default(), |_| {
            lines += 1;
            Ok(())
        })
        .unwrap();
        assert_eq!(lines, 1);
        assert_eq!(run.records[0].theta_sup_residual, 0.0);
    }
}
