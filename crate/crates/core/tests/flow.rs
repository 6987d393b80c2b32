//! Connection flow, metric flow, their cross-check and checkpoints.

use higgslab_core::bundle::*;
use higgslab_core::error::Error;
use higgslab_core::field::MatrixField;
use higgslab_core::flow::*;
use higgslab_core::functionals::{he_residual, ymh_energy};
use higgslab_core::geometry::TorusGeometry;
use higgslab_core::linalg::{self, C64};
use higgslab_core::spectral::weitzenbock_check;
use proptest::prelude::*;

fn nilpotent(g: &TorusGeometry) -> HiggsState {
    HiggsState::new(Connection::zero(g, 2), HiggsField::constant(g, &[linalg::unit(2, 0, 1)]).unwrap())
}

/// Exact `ymh(t)` for `θ(0) = e₁₂ dz` on the unit torus: `|c|² = 1/(1 + 8t)`, `ymh = 8|c|⁴`.
fn nilpotent_ymh(t: f64) -> f64 {
    8.0 / (1.0 + 8.0 * t).powi(2)
}

fn shifted(state: &HiggsState, tend: &Tendency, eps: f64) -> (Connection, HiggsField) {
    let a = state.a.comps().iter().zip(&tend.da).map(|(x, d)| x.add(&d.scaled(C64::new(eps, 0.0)))).collect();
    let t = state.theta.comps().iter().zip(&tend.dtheta).map(|(x, d)| x.add(&d.scaled(C64::new(eps, 0.0)))).collect();
    (Connection::from_components_unchecked(a), HiggsField::from_components_unchecked(t))
}

#[test]
fn energy_decreases_at_twice_the_squared_speed() {
    let g = TorusGeometry::unit(1, 32).unwrap();
    for seed in 0..3 {
        let (a, t) = random_higgs_pair(&g, &PairSpec::new(seed, 2, 2, 0.4)).unwrap();
        let s = HiggsState::new(a, t);
        let tend = ymh_gradient(&g, &s.a, &s.theta);
        let eps = 1e-5;
        let (ap, tp) = shifted(&s, &tend, eps);
        let (am, tm) = shifted(&s, &tend, -eps);
        let fd = (ymh_energy(&g, &ap, &tp) - ymh_energy(&g, &am, &tm)) / (2.0 * eps);
        let exact = -2.0 * tend.norm_sq(&g);
        assert!(fd < 0.0);
        assert!((fd - exact).abs() < 1e-6 * exact.abs(), "{fd} vs {exact}");
    }
}

#[test]
fn nilpotent_flow_matches_ode_reduction() {
    let g = TorusGeometry::unit(1, 8).unwrap();
    let cfg = FlowConfig { t_max: 1.0, dt_max: 0.05, ..Default::default() };
    let run = run_flow(&g, nilpotent(&g), &cfg, |_| Ok(())).unwrap();
    for r in run.records.iter().filter(|r| r.accepted) {
        assert!((r.ymh - nilpotent_ymh(r.t)).abs() < 1e-6, "t = {}: {} vs {}", r.t, r.ymh, nilpotent_ymh(r.t));
        assert!((r.theta_l2.powi(2) - 2.0 / (1.0 + 8.0 * r.t)).abs() < 1e-6);
    }
    assert_eq!(run.state.t, 1.0);
}

#[test]
fn single_step_matches_fine_explicit_euler() {
    let g = TorusGeometry::unit(1, 8).unwrap();
    let dt = 0.01;
    let s = nilpotent(&g);
    let step = etd_step(&g, &s, dt);
    let euler_gap = |substeps: usize| {
        let mut e = s.clone();
        for _ in 0..substeps {
            e = euler_step(&g, &e, dt / substeps as f64);
        }
        step.theta.comps()[0].sub(&e.theta.comps()[0]).max_abs_entry()
    };
    // the oracle's own first-order error dominates: dt²/100 · |θ''|/2
    let (g100, g1000) = (euler_gap(100), euler_gap(1000));
    assert!(g100 < 5e-5, "{g100}");
    assert!(g1000 < 0.2 * g100, "{g100} -> {g1000}");
    // local error of a fourth-order scheme is O(dt⁵)
    let local = |h: f64| (etd_step(&g, &s, h).theta.comps()[0].at(0)[1].re - (1.0f64 / (1.0 + 8.0 * h)).sqrt()).abs();
    let (e1, e2) = (local(dt), local(dt / 2.0));
    assert!(e1 < 1e-8 && e2 < e1 / 16.0, "{e1} -> {e2}");
}

#[test]
fn step_is_equivariant_under_constant_unitary_gauge() {
    let g = TorusGeometry::unit(1, 32).unwrap();
    let (a, t) = random_higgs_pair(&g, &PairSpec::new(4, 2, 2, 0.4)).unwrap();
    let s = HiggsState::new(a, t);
    let xi = vec![C64::new(0.0, 0.3), C64::new(0.5, 0.2), C64::new(-0.5, 0.2), C64::new(0.0, -0.3)];
    let u = linalg::expm(&xi, 2);
    let mut ui = vec![C64::new(0.0, 0.0); 4];
    linalg::adjoint(&u, &mut ui, 2);
    let lhs = etd_step(&g, &s.conjugate_const(&u, &ui), 0.01);
    let rhs = etd_step(&g, &s, 0.01).conjugate_const(&u, &ui);
    for (x, y) in lhs.a.comps().iter().zip(rhs.a.comps()).chain(lhs.theta.comps().iter().zip(rhs.theta.comps())) {
        assert!(x.sub(y).max_abs_entry() < 1e-9);
    }
}

#[test]
fn constraint_drift_is_small_per_unit_time() {
    let g = TorusGeometry::unit(1, 32).unwrap();
    let (a, t) = random_higgs_pair(&g, &PairSpec::new(1, 2, 2, 0.3)).unwrap();
    let cfg = FlowConfig { t_max: 1.0, dt_max: 0.1, ..Default::default() };
    let run = run_flow(&g, HiggsState::new(a, t), &cfg, |_| Ok(())).unwrap();
    let last = run.records.last().unwrap();
    assert!(last.dbar_drift < 1e-7 && last.wedge_drift < 1e-7, "{last:?}");
    let accepted: Vec<_> = run.records.iter().filter(|r| r.accepted).collect();
    for w in accepted.windows(2) {
        assert!(w[1].ymh <= w[0].ymh * (1.0 + 1e-12));
    }
}

#[test]
fn theta_norm_follows_weitzenbock_rate() {
    // d/dt ‖θ‖² = -2 Re ∫⟨[Θ, θ], θ⟩ = -2 (‖∇θ‖² + ‖[θ,θ*]‖²) ≥ -4 sup|Θ| ‖θ‖²
    let g = TorusGeometry::unit(1, 32).unwrap();
    let (a, t) = random_higgs_pair(&g, &PairSpec::new(2, 2, 2, 0.4)).unwrap();
    let mut s = HiggsState::new(a, t);
    for _ in 0..5 {
        let w = weitzenbock_check(&g, &s.a, &s.theta, 1e-6);
        let sup = he_residual(&g, &s.a, &s.theta).sup_norm;
        let tend = ymh_gradient(&g, &s.a, &s.theta);
        // ‖θ‖² = 2 Σ ∫|θ_k|²
        let rate: f64 = tend.dtheta.iter().zip(s.theta.comps()).map(|(d, x)| 4.0 * g.l2_inner(d, x).re).sum();
        let identity = -2.0 * (w.grad_term + w.bracket_term);
        assert!((rate - identity).abs() < 1e-6 * identity.abs(), "{rate} vs {identity}");
        assert!(rate <= 1.1 * 2.0 * sup * w.theta_norm_sq);
        assert!(-rate <= 1.1 * 4.0 * sup * w.theta_norm_sq);
        // the band-limited integrator follows the same rate up to truncation
        let h = 1e-4;
        let fd = (etd_step(&g, &s, h).theta.norm_sq(&g) - etd_step(&g, &s, -h).theta.norm_sq(&g)) / (2.0 * h);
        assert!((fd - rate).abs() < 1e-3 * rate.abs(), "{fd} vs {rate}");
        let cfg = FlowConfig { t_max: s.t + 0.05, ..Default::default() };
        s = run_flow(&g, s, &cfg, |_| Ok(())).unwrap().state;
    }
}

#[test]
fn step_failure_is_reported() {
    let g = TorusGeometry::unit(1, 16).unwrap();
    let (a, t) = random_higgs_pair(&g, &PairSpec::new(3, 2, 2, 0.5)).unwrap();
    let cfg = FlowConfig { max_halvings: 2, drift_budget: 1e-14, ..Default::default() };
    let err = flow_step(&g, &HiggsState::new(a, t), 0.1, &cfg).unwrap_err();
    assert!(matches!(err, Error::StepFailure { .. }), "{err}");
}

fn max_abs_log_det(ms: &MetricState) -> f64 {
    (0..ms.h.npts())
        .map(|p| {
            let h = ms.h.at(p);
            (h[0] * h[3] - h[1] * h[2]).re.ln().abs()
        })
        .fold(0.0, f64::max)
}

#[test]
fn metric_flow_keeps_log_det_fixed() {
    // tr log h obeys a heat equation with zero data; the defect is the integrator's
    let g = TorusGeometry::unit(1, 32).unwrap();
    let (a, t) = random_higgs_pair(&g, &PairSpec::new(6, 2, 2, 0.3)).unwrap();
    let ms0 = MetricState::new(&g, a, t);
    let cfg = MetricFlowConfig::default();
    let defects: Vec<f64> = [1e-3, 5e-4, 2.5e-4].iter().map(|&dt| max_abs_log_det(&metric_flow_step(&g, &ms0, dt, &cfg).unwrap())).collect();
    assert!(defects[1] < defects[0] / 8.0 && defects[2] < defects[1] / 8.0, "{defects:?}");
    let mut ms = ms0;
    let mut prev = 0.0;
    for _ in 0..10 {
        ms = metric_flow_step(&g, &ms, 2.5e-4, &cfg).unwrap();
        let now = max_abs_log_det(&ms);
        assert!((now - prev).abs() < 1e-10, "{prev} -> {now}");
        assert_eq!(ms.h.hermitian_defect(), 0.0);
        prev = now;
    }
}

#[test]
fn metric_step_matches_explicit_euler_direction() {
    let g = TorusGeometry::unit(1, 8).unwrap();
    let s = nilpotent(&g);
    let ms = MetricState::new(&g, s.a, s.theta);
    let dt = 1e-4;
    let next = metric_flow_step(&g, &ms, dt, &MetricFlowConfig::default()).unwrap();
    let (dh, _) = metric_tendency(&g, &ms, &ms.h).unwrap();
    let euler = MatrixField::identity(g.npts(), 2).add(&dh.scaled(C64::new(dt, 0.0)));
    assert!(next.h.sub(&euler).max_abs_entry() < 1e-6);
    // -2 h K with K = 2 diag(1, -1)
    assert!((dh.at(0)[0].re + 4.0).abs() < 1e-12 && (dh.at(0)[3].re - 4.0).abs() < 1e-12);
}

#[test]
fn cross_check_at_time_zero_and_stationary() {
    let g = TorusGeometry::unit(1, 16).unwrap();
    let (a, t) = random_higgs_pair(&g, &PairSpec::new(8, 2, 2, 0.4)).unwrap();
    let s = HiggsState::new(a.clone(), t.clone());
    let ms = MetricState::new(&g, a, t);
    let r = cross_check_residuals(&g, &s, &ms).unwrap();
    assert!(r.l2_gap < 1e-13 && r.sup_gap < 1e-13, "{r:?}");
    let mut later = s.clone();
    later.t = 0.5;
    assert!(matches!(cross_check_residuals(&g, &later, &ms), Err(Error::TimeMismatch(..))));

    let d = vec![C64::new(1.0, 0.0), C64::new(0.0, 0.0), C64::new(0.0, 0.0), C64::new(-1.0, 0.0)];
    let theta = HiggsField::constant(&g, &[d]).unwrap();
    let stat = HiggsState { t: 0.3, ..HiggsState::new(Connection::zero(&g, 2), theta.clone()) };
    let mcfg = MetricFlowConfig { dt: 0.1, t_max: 0.3, ..Default::default() };
    let ms = run_metric_flow(&g, MetricState::new(&g, Connection::zero(&g, 2), theta), &mcfg).unwrap();
    let r = cross_check_residuals(&g, &stat, &ms).unwrap();
    assert_eq!((r.l2_gap, r.sup_gap), (0.0, 0.0));
}

#[test]
fn nilpotent_cross_check_at_unit_time() {
    let g = TorusGeometry::unit(1, 32).unwrap();
    let mut s = nilpotent(&g);
    let dt = 1e-3;
    for _ in 0..1000 {
        s = etd_step(&g, &s, dt);
    }
    s.t = 1.0;
    let n = nilpotent(&g);
    let ms = run_metric_flow(&g, MetricState::new(&g, n.a, n.theta), &MetricFlowConfig { dt, t_max: 1.0, ..Default::default() }).unwrap();
    let r = cross_check_residuals(&g, &s, &ms).unwrap();
    assert!(r.l2_gap < 1e-5, "{r:?}");
}

#[test]
fn checkpoint_round_trips_through_a_file() {
    let g = TorusGeometry::new(2, &[1.0, 1.5, 1.0, 2.0], &[8, 8, 8, 8]).unwrap();
    let (a, t) = random_higgs_pair(&g, &PairSpec::new(9, 3, 1, 0.4)).unwrap();
    let state = HiggsState { t: 0.75, ..HiggsState::new(a, t) };
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("state.ymhf");
    write_checkpoint(std::fs::File::create(&path).unwrap(), &g, &state).unwrap();
    let ck = read_checkpoint(std::fs::File::open(&path).unwrap()).unwrap();
    let g2 = ck.geometry().unwrap();
    assert_eq!(g2.sides(), g.sides());
    let back = ck.into_state(&g2).unwrap();
    assert_eq!(back.t, 0.75);
    for (x, y) in back.a.comps().iter().zip(state.a.comps()).chain(back.theta.comps().iter().zip(state.theta.comps())) {
        assert!(x.data().iter().zip(y.data()).all(|(p, q)| p.re.to_bits() == q.re.to_bits() && p.im.to_bits() == q.im.to_bits()));
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(8))]

    #[test]
    fn accepted_steps_never_increase_energy(seed in 0u64..10_000, dt in 0.001f64..0.2) {
        let g = TorusGeometry::unit(1, 16).unwrap();
        let (a, t) = random_higgs_pair(&g, &PairSpec::new(seed, 2, 1, 0.3)).unwrap();
        let s = HiggsState::new(a, t);
        let before = ymh_energy(&g, &s.a, &s.theta);
        let cfg = FlowConfig { drift_budget: 1e-6, ..Default::default() };
        let out = flow_step(&g, &s, dt, &cfg).unwrap();
        prop_assert!(out.ymh <= before * (1.0 + 1e-12));
        prop_assert!(out.dt <= dt);
    }
}

#[test]
fn observed_states_match_their_records() {
    let g = TorusGeometry::unit(1, 16).unwrap();
    let cfg = FlowConfig { t_max: 0.3, dt_max: 0.05, ..Default::default() };
    let mut seen = Vec::new();
    let run = run_flow_observed(&g, nilpotent(&g), &cfg, |r, s| {
        if r.accepted {
            assert_eq!(r.t.to_bits(), s.t.to_bits());
            assert!((s.theta.norm_sq(&g).sqrt() - r.theta_l2).abs() < 1e-14);
            seen.push(s.clone());
        }
        Ok(())
    })
    .unwrap();
    assert_eq!(seen.len(), run.records.iter().filter(|r| r.accepted).count());
    assert_eq!(seen.last().unwrap().theta, run.state.theta);
}
