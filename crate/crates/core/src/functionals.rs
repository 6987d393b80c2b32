//! Yang–Mills–Higgs energy, Hermitian–Einstein residual and Chern–Weil integrals.
//!
//! Characteristic forms use `c₁ = (√−1/2π) tr F` and
//! `c₂ = (1/8π²)(tr(F∧F) - tr F ∧ tr F)`, so `4π²(2c₂ - c₁²) = tr(F∧F)`.

use crate::bundle::{curvature, del_higgs, i_lambda_theta_bracket, theta_bracket_real, Connection, HiggsField};
use crate::error::{Error, Result};
use crate::field::MatrixField;
use crate::geometry::{FormField, TorusGeometry};
use crate::linalg::{self, C64};
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

/// Terms of the energy identity
/// `YMH = ∫|Θ|² + λ² r vol + 4π² ∫(2c₂ - c₁²) ∧ ω^{n-2}/(n-2)!`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EnergyReport {
    pub ymh: f64,
    pub residual_term: f64,
    pub constant_term: f64,
    pub topological_term: f64,
    pub identity_gap: f64,
}

/// `Θ = √−1 Λ_ω(F_A + [θ, θ*]) - λ Id` with its norms.
#[derive(Clone, Debug)]
pub struct HeResidual {
    pub field: MatrixField,
    /// max over points of the Frobenius norm
    pub sup_norm: f64,
    pub l2_norm: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ChernNumbers {
    /// `∫ c₁ ∧ ω^{n-1}/(n-1)!`
    pub c1_integral: f64,
    /// `∫ (2c₂ - c₁²)`; zero by convention when `n = 1`
    pub c2_combination_integral: f64,
}

/// Pointwise `|F_A + [θ,θ*]|² + 2|∂_A θ|²`.
pub fn energy_density(geom: &TorusGeometry, a: &Connection, theta: &HiggsField) -> Vec<f64> {
    let f = curvature(geom, a).form;
    let b = theta_bracket_real(geom, theta);
    let sum = FormField { kind: f.kind, comps: f.comps.iter().zip(&b.comps).map(|(x, y)| x.add(y)).collect() };
    let mut e = sum.norm_sq_density();
    for (x, y) in e.iter_mut().zip(del_higgs(geom, a, theta).norm_sq_density()) {
        *x += 2.0 * y;
    }
    e
}

pub fn ymh_energy(geom: &TorusGeometry, a: &Connection, theta: &HiggsField) -> f64 {
    geom.integrate_real(&energy_density(geom, a, theta))
}

/// `λ = Re ∫ tr(√−1 Λ_ω F_A) / (r vol)`.
pub fn einstein_constant(geom: &TorusGeometry, a: &Connection) -> f64 {
    let f = curvature(geom, a).form;
    einstein_constant_from_curvature(geom, &f, a.rank())
}

fn einstein_constant_from_curvature(geom: &TorusGeometry, f: &FormField, rank: usize) -> f64 {
    let il = geom.i_lambda_contract(f).expect("real 2-form");
    geom.integrate(&il.trace()).re / (rank as f64 * geom.volume())
}

/// `√−1 Λ_ω F_A`.
pub fn i_lambda_f(geom: &TorusGeometry, a: &Connection) -> MatrixField {
    geom.i_lambda_contract(&curvature(geom, a).form).expect("real 2-form")
}

pub fn he_residual(geom: &TorusGeometry, a: &Connection, theta: &HiggsField) -> HeResidual {
    let f = curvature(geom, a).form;
    let lambda = einstein_constant_from_curvature(geom, &f, a.rank());
    let mut field = geom.i_lambda_contract(&f).expect("real 2-form");
    field.axpy(C64::new(1.0, 0.0), &i_lambda_theta_bracket(geom, theta));
    field.axpy(C64::new(-lambda, 0.0), &MatrixField::identity(geom.npts(), a.rank()));
    let dens = field.frob_sq();
    let sup_norm = dens.iter().cloned().fold(0.0, f64::max).sqrt();
    let l2_norm = geom.integrate_real(&dens).sqrt();
    HeResidual { field, sup_norm, l2_norm }
}

/// Chern–Weil integrals of the trivial bundle.
pub fn chern_numbers(geom: &TorusGeometry, a: &Connection) -> ChernNumbers {
    let f = curvature(geom, a).form;
    let il = geom.i_lambda_contract(&f).expect("real 2-form");
    let c1_integral = geom.integrate(&il.trace()).re / (2.0 * PI);
    let c2_combination_integral =
        if geom.n() == 2 { tr_f_wedge_f_integral(geom, &f) / (4.0 * PI * PI) } else { 0.0 };
    ChernNumbers { c1_integral, c2_combination_integral }
}

/// `∫ tr(F∧F)` on a real 4-torus: `(F∧F)_{0123} = 2(F01 F23 - F02 F13 + F03 F12)`.
fn tr_f_wedge_f_integral(geom: &TorusGeometry, f: &FormField) -> f64 {
    let r = f.comps[0].rank();
    let c = |i, j| &f.comps[geom.pair_index(i, j)];
    let terms = [(c(0, 1), c(2, 3), 1.0), (c(0, 2), c(1, 3), -1.0), (c(0, 3), c(1, 2), 1.0)];
    let mut tmp = vec![C64::new(0.0, 0.0); r * r];
    let mut total = C64::new(0.0, 0.0);
    for p in 0..geom.npts() {
        for (x, y, s) in &terms {
            linalg::matmul(x.at(p), y.at(p), &mut tmp, r);
            total += 2.0 * s * linalg::trace(&tmp, r);
        }
    }
    (total * geom.cell_volume()).re
}

pub fn energy_report(geom: &TorusGeometry, a: &Connection, theta: &HiggsField) -> EnergyReport {
    let ymh = ymh_energy(geom, a, theta);
    let res = he_residual(geom, a, theta);
    let lambda = einstein_constant(geom, a);
    let residual_term = res.l2_norm * res.l2_norm;
    let constant_term = lambda * lambda * a.rank() as f64 * geom.volume();
    let topological_term =
        if geom.n() == 2 { tr_f_wedge_f_integral(geom, &curvature(geom, a).form) } else { 0.0 };
    EnergyReport {
        ymh,
        residual_term,
        constant_term,
        topological_term,
        identity_gap: ymh - residual_term - constant_term - topological_term,
    }
}

/// Energy density sampled at one flow time.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DensitySnapshot {
    pub t: f64,
    pub density: Vec<f64>,
}

/// `r^{2-2n} ∫_{t₀-r²}^{t₀+r²} ∫_{B_r(x₀)} e dvol dt` by the trapezoid rule in time
/// over the stored snapshots, interpolating linearly at the window ends.
pub fn local_parabolic_energy(
    geom: &TorusGeometry,
    snapshots: &[DensitySnapshot],
    x0: &[f64],
    t0: f64,
    r: f64,
) -> Result<f64> {
    let min_side = geom.sides().iter().cloned().fold(f64::INFINITY, f64::min);
    if !(r > 0.0 && r <= 0.5 * min_side) {
        return Err(Error::InvalidArgument(format!("radius {r} must lie in (0, {}]", 0.5 * min_side)));
    }
    let (lo, hi) = (t0 - r * r, t0 + r * r);
    let covered = snapshots.first().is_some_and(|s| s.t <= lo) && snapshots.last().is_some_and(|s| s.t >= hi);
    if !covered {
        return Err(Error::InvalidArgument(format!("snapshots do not cover [{lo}, {hi}]")));
    }
    let ball: Vec<usize> =
        (0..geom.npts()).filter(|&p| geom.periodic_distance(&geom.coords(p), x0) < r).collect();
    let ball_energy =
        |s: &DensitySnapshot| ball.iter().map(|&p| s.density[p]).sum::<f64>() * geom.cell_volume();
    let values: Vec<(f64, f64)> = snapshots.iter().map(|s| (s.t, ball_energy(s))).collect();
    let interp = |t: f64| {
        let i = values.partition_point(|v| v.0 < t).clamp(1, values.len() - 1);
        let (t1, v1) = values[i - 1];
        let (t2, v2) = values[i];
        if t2 == t1 {
            v2
        } else {
            v1 + (v2 - v1) * (t - t1) / (t2 - t1)
        }
    };
    let mut knots = vec![(lo, interp(lo))];
    knots.extend(values.iter().filter(|v| v.0 > lo && v.0 < hi).cloned());
    knots.push((hi, interp(hi)));
    let integral: f64 = knots.windows(2).map(|w| 0.5 * (w[1].0 - w[0].0) * (w[0].1 + w[1].1)).sum();
    Ok(r.powi(2 - 2 * geom.n() as i32) * integral)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn e12_pair_values() {
        let g = TorusGeometry::unit(1, 16).unwrap();
        let a = Connection::zero(&g, 2);
        let theta = HiggsField::constant(&g, &[linalg::unit(2, 0, 1)]).unwrap();
        assert!((ymh_energy(&g, &a, &theta) - 8.0).abs() < 1e-12);
        assert!(energy_density(&g, &a, &theta).iter().all(|e| (e - 8.0).abs() < 1e-12));
        let res = he_residual(&g, &a, &theta);
        assert!((res.sup_norm - 2.0 * 2f64.sqrt()).abs() < 1e-12);
        assert!((res.l2_norm.powi(2) - 8.0).abs() < 1e-12);
        assert!(res.field.hermitian_defect() < 1e-15);
        assert_eq!(einstein_constant(&g, &a), 0.0);
        let rep = energy_report(&g, &a, &theta);
        assert!(rep.identity_gap.abs() < 1e-12);
    }

    #[test]
    fn diagonal_theta_is_stationary() {
        let g = TorusGeometry::unit(2, 8).unwrap();
        let d1 = vec![C64::new(1.0, 0.5), C64::new(0.0, 0.0), C64::new(0.0, 0.0), C64::new(-1.0, -0.5)];
        let d2 = vec![C64::new(0.3, 0.0), C64::new(0.0, 0.0), C64::new(0.0, 0.0), C64::new(-0.3, 0.0)];
        let theta = HiggsField::constant(&g, &[d1, d2]).unwrap();
        let a = Connection::zero(&g, 2);
        assert!(ymh_energy(&g, &a, &theta) < 1e-28);
        assert!(he_residual(&g, &a, &theta).sup_norm < 1e-14);
    }

    #[test]
    fn local_energy_window_checks() {
        let g = TorusGeometry::unit(1, 16).unwrap();
        let snaps = vec![
            DensitySnapshot { t: 0.0, density: vec![1.0; g.npts()] },
            DensitySnapshot { t: 1.0, density: vec![1.0; g.npts()] },
        ];
        assert!(local_parabolic_energy(&g, &snaps, &[0.5, 0.5], 0.5, 0.6).is_err());
        assert!(local_parabolic_energy(&g, &snaps, &[0.5, 0.5], 0.05, 0.25).is_err());
        let v = local_parabolic_energy(&g, &snaps, &[0.5, 0.5], 0.5, 0.25).unwrap();
        assert!(v > 0.0);
    }
}
