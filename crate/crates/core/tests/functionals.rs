//! Energy identity, Chern–Weil integrals, gauge invariance and the local
//! parabolic energy.

use higgslab_core::bundle::*;
use higgslab_core::field::MatrixField;
use higgslab_core::flow::{run_flow, FlowConfig, HiggsState};
use higgslab_core::functionals::*;
use higgslab_core::geometry::TorusGeometry;
use higgslab_core::linalg::{self, C64};
use proptest::prelude::*;

fn constant_unitary(seed: u64) -> (Vec<C64>, Vec<C64>) {
    let phase = seed as f64 * 0.37;
    let xi = vec![C64::new(0.0, 0.4), C64::new(phase.cos(), phase.sin()), C64::new(-phase.cos(), phase.sin()), C64::new(0.0, -0.4)];
    let u = linalg::expm(&xi, 2);
    let mut u_inv = vec![C64::new(0.0, 0.0); 4];
    linalg::adjoint(&u, &mut u_inv, 2);
    (u, u_inv)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn energy_identity_on_orbit_pairs(seed in 0u64..10_000) {
        let g = TorusGeometry::unit(1, 32).unwrap();
        let (a, t) = random_higgs_pair(&g, &PairSpec::new(seed, 2, 2, 0.5)).unwrap();
        let rep = energy_report(&g, &a, &t);
        prop_assert!(rep.identity_gap.abs() < 1e-8, "{:?}", rep);
        prop_assert!(rep.residual_term >= 0.0);
        prop_assert!(rep.ymh >= rep.constant_term + rep.topological_term - 1e-8);
    }

    #[test]
    fn density_integrates_to_energy(seed in 0u64..10_000) {
        let g = TorusGeometry::unit(1, 16).unwrap();
        let a = random_connection(&g, 2, seed, 0.6, 2);
        let (_, t) = random_higgs_pair(&g, &PairSpec::new(seed + 1, 2, 2, 0.5)).unwrap();
        let e = energy_density(&g, &a, &t);
        prop_assert!(e.iter().all(|&x| x >= 0.0));
        let y = ymh_energy(&g, &a, &t);
        prop_assert!((g.integrate_real(&e) - y).abs() < 1e-12 * y.max(1.0));
    }

    #[test]
    fn constant_unitary_gauge_invariance(seed in 0u64..10_000) {
        let g = TorusGeometry::unit(1, 16).unwrap();
        let a = random_connection(&g, 2, seed, 0.6, 2);
        let (_, t) = random_higgs_pair(&g, &PairSpec::new(seed + 1, 2, 2, 0.5)).unwrap();
        let (u, ui) = constant_unitary(seed);
        let (ga, gt) = (a.conjugate_const(&u, &ui), t.conjugate_const(&u, &ui));
        let (e0, e1) = (energy_density(&g, &a, &t), energy_density(&g, &ga, &gt));
        for (x, y) in e0.iter().zip(&e1) {
            prop_assert!((x - y).abs() < 1e-10 * x.max(1.0));
        }
        let (r0, r1) = (he_residual(&g, &a, &t), he_residual(&g, &ga, &gt));
        prop_assert!((r0.sup_norm - r1.sup_norm).abs() < 1e-10);
        prop_assert!((r0.l2_norm - r1.l2_norm).abs() < 1e-10);
        prop_assert!(r0.field.hermitian_defect() < 1e-12);
    }

    #[test]
    fn einstein_constant_vanishes_for_periodic_data(seed in 0u64..10_000) {
        let g = TorusGeometry::unit(1, 16).unwrap();
        let a = random_connection(&g, 2, seed, 1.0, 3);
        prop_assert!(einstein_constant(&g, &a).abs() < 1e-9);
    }
}

#[test]
fn chern_integrals_vanish_on_random_t4_connections() {
    let g = TorusGeometry::unit(2, 8).unwrap();
    for seed in 0..5 {
        let c = chern_numbers(&g, &random_connection(&g, 2, seed, 0.8, 1));
        assert!(c.c1_integral.abs() < 1e-8 && c.c2_combination_integral.abs() < 1e-8, "{c:?}");
    }
}

#[test]
fn chern_integrals_vanish_for_constant_nonabelian_connection() {
    let g = TorusGeometry::unit(2, 8).unwrap();
    let s = C64::new(1.0, 0.0);
    let x = vec![C64::new(0.0, 0.0), s, -s, C64::new(0.0, 0.0)];
    let y = vec![C64::new(0.0, 1.0), C64::new(0.0, 0.0), C64::new(0.0, 0.0), C64::new(0.0, -1.0)];
    let z = vec![C64::new(0.0, 0.0), C64::new(0.0, 1.0), C64::new(0.0, 1.0), C64::new(0.0, 0.0)];
    let w = vec![C64::new(0.0, 0.5), C64::new(0.3, 0.2), C64::new(-0.3, 0.2), C64::new(0.0, -0.5)];
    let a = Connection::constant(&g, &[x, y, z, w]).unwrap();
    assert!(g.form_norm_sq(&curvature(&g, &a).form) > 1.0);
    let c = chern_numbers(&g, &a);
    assert!(c.c1_integral.abs() < 1e-9 && c.c2_combination_integral.abs() < 1e-9, "{c:?}");
}

#[test]
fn energy_identity_on_t4_orbit_pairs() {
    let g = TorusGeometry::unit(2, 8).unwrap();
    for seed in 0..3 {
        let (a, t) = random_higgs_pair(&g, &PairSpec::new(seed, 2, 1, 0.3)).unwrap();
        let rep = energy_report(&g, &a, &t);
        assert!(rep.identity_gap.abs() < 1e-8, "{rep:?}");
    }
}

#[test]
fn local_parabolic_energy_matches_space_time_sum() {
    let g = TorusGeometry::unit(1, 32).unwrap();
    let a = Connection::zero(&g, 2);
    let theta = HiggsField::constant(&g, &[linalg::unit(2, 0, 1)]).unwrap();
    let dens = energy_density(&g, &a, &theta);
    let snaps: Vec<DensitySnapshot> = (0..=4).map(|k| DensitySnapshot { t: k as f64 * 0.25, density: dens.clone() }).collect();
    let (x0, t0, r) = ([0.3, 0.6], 0.5, 0.25);
    let got = local_parabolic_energy(&g, &snaps, &x0, t0, r).unwrap();
    // midpoint sum over time slices and grid cells of the cylinder
    let steps = 200;
    let dt = 2.0 * r * r / steps as f64;
    let mut oracle = 0.0;
    for _ in 0..steps {
        for p in 0..g.npts() {
            let x = g.coords(p);
            let d2: f64 = x.iter().zip(&x0).map(|(a, b)| {
                let d = (a - b).abs();
                d.min(1.0 - d).powi(2)
            }).sum();
            if d2 < r * r {
                oracle += 8.0 * g.cell_volume() * dt;
            }
        }
    }
    assert!((got - oracle).abs() < 1e-12 * oracle, "{got} vs {oracle}");
    let zero = vec![DensitySnapshot { t: 0.0, density: vec![0.0; g.npts()] }, DensitySnapshot { t: 1.0, density: vec![0.0; g.npts()] }];
    assert_eq!(local_parabolic_energy(&g, &zero, &x0, t0, r).unwrap(), 0.0);
}

#[test]
fn local_parabolic_energy_decreases_along_converging_flow() {
    let g = TorusGeometry::unit(1, 32).unwrap();
    let (a, t) = random_higgs_pair(&g, &PairSpec::new(1, 2, 2, 0.3)).unwrap();
    let cfg = FlowConfig { t_max: 1.0, dt_max: 0.02, snapshot_every: 1, ..Default::default() };
    let run = run_flow(&g, HiggsState::new(a, t), &cfg, |_| Ok(())).unwrap();
    let x0 = [0.5, 0.5];
    let early = local_parabolic_energy(&g, &run.snapshots, &x0, 0.1, 0.3).unwrap();
    let late = local_parabolic_energy(&g, &run.snapshots, &x0, 0.85, 0.3).unwrap();
    assert!(late < early, "{early} -> {late}");
}

#[test]
fn he_residual_of_nilpotent_pair() {
    let g = TorusGeometry::unit(1, 16).unwrap();
    let t = HiggsField::constant(&g, &[linalg::unit(2, 0, 1)]).unwrap();
    let r = he_residual(&g, &Connection::zero(&g, 2), &t);
    let expect = MatrixField::constant(g.npts(), &[C64::new(2.0, 0.0), C64::new(0.0, 0.0), C64::new(0.0, 0.0), C64::new(-2.0, 0.0)]);
    assert!(r.field.sub(&expect).max_abs_entry() < 1e-14);
}
