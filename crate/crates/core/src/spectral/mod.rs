//! Rough Laplacian on `End(E)`-valued `(1,0)`-forms, its constrained least
//! eigenvalue, the logarithmic cutoff, the Weitzenböck identity for Higgs
//! fields and the vanishing-certificate arithmetic.
//!
//! On a flat torus `∇_A` acts on `v = Σ_k v_k dz_k` componentwise, so
//! `∇*_A ∇_A v = -Σ_a D_a D_a v_k dz_k` with `D_a = ∂_a + [A_a, ·]`.

mod continuity;
mod cutoff;
mod eigen;

pub use continuity::{calibrate_constant, connection_lp_norm, continuity_bounds, eigen_continuity_check, required_constant, ContinuityReport, SOLVER_SLACK};
pub use cutoff::{cutoff_norms, cutoff_profile, log_cutoff, CutoffNorms};
pub use eigen::{least_eigenvalue, nyquist_modes, one_form_inner, rayleigh_quotient, EigenOptions, EigenResult};

use crate::bundle::{covariant_derivatives, i_lambda_curvature, i_lambda_theta_bracket, is_higgs_pair, nabla_higgs_norm_sq, theta_bracket_real, curvature, Connection, HiggsField};
use crate::field::MatrixField;
use crate::geometry::TorusGeometry;
use crate::linalg::C64;
use serde::{Deserialize, Serialize};

/// `∇*_A ∇_A v` for an `End(E)`-valued `(1,0)`-form `v`.
pub fn rough_laplacian(geom: &TorusGeometry, a: &Connection, v: &HiggsField) -> HiggsField {
    let comps = v.comps().iter().map(|vk| rough_laplacian_component(geom, a, vk)).collect();
    HiggsField::from_components_unchecked(comps)
}

/// `-Σ_a D_a D_a φ` for an `End(E)`-valued function.
pub fn rough_laplacian_component(geom: &TorusGeometry, a: &Connection, phi: &MatrixField) -> MatrixField {
    let mut out = MatrixField::zeros(geom.npts(), phi.rank());
    let d1 = covariant_derivatives(geom, a, phi);
    for (axis, d) in d1.iter().enumerate() {
        let mut dd = geom.derivative(d, axis);
        let r = phi.rank();
        for p in 0..geom.npts() {
            crate::linalg::add_commutator(a.comps()[axis].at(p), d.at(p), C64::new(1.0, 0.0), dd.at_mut(p), r);
        }
        out.axpy(C64::new(-1.0, 0.0), &dd);
    }
    out
}

/// Terms of `∫|∇_Aθ|² + ∫⟨Ric∘θ, θ⟩ + ∫|[θ,θ*]|² = Re ∫⟨[√−1Λ_ω(F_A + [θ,θ*]), θ], θ⟩`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct WeitzenbockReport {
    pub grad_term: f64,
    pub ricci_term: f64,
    pub bracket_term: f64,
    pub rhs_term: f64,
    pub residual: f64,
    /// `‖θ‖²_{L²}`
    pub theta_norm_sq: f64,
    /// set when `(A, θ)` fails the Higgs-pair check at the given tolerance
    pub warning: Option<String>,
}

pub fn weitzenbock_check(geom: &TorusGeometry, a: &Connection, theta: &HiggsField, tol: f64) -> WeitzenbockReport {
    let grad_term = nabla_higgs_norm_sq(geom, a, theta);
    let real = theta.real_components();
    let ric = geom.ricci();
    let d = geom.real_dim();
    let mut ricci_term = 0.0;
    for i in 0..d {
        for j in 0..d {
            if ric[i * d + j] != 0.0 {
                ricci_term += ric[i * d + j] * geom.l2_inner(&real[j], &real[i]).re;
            }
        }
    }
    let bracket_term = geom.form_norm_sq(&theta_bracket_real(geom, theta));
    let mut k = i_lambda_curvature(geom, &curvature(geom, a).form);
    k.axpy(C64::new(1.0, 0.0), &i_lambda_theta_bracket(geom, theta));
    let rhs_term: f64 = theta.comps().iter().map(|t| 2.0 * geom.l2_inner(&k.commutator(t), t).re).sum();
    let report = is_higgs_pair(geom, a, theta, tol);
    let warning = (!report.pass).then(|| {
        format!(
            "not a Higgs pair at tol {tol:e}: holomorphicity {:.3e}, wedge {:.3e}, integrability {:.3e}",
            report.holomorphicity, report.wedge, report.integrability
        )
    });
    WeitzenbockReport {
        grad_term,
        ricci_term,
        bracket_term,
        rhs_term,
        residual: (grad_term + ricci_term + bracket_term - rhs_term).abs(),
        theta_norm_sq: theta.norm_sq(geom),
        warning,
    }
}

/// Outcome of replaying the vanishing argument.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    /// `(ρ - 2 sup|Θ|) ‖θ‖² ≥ (ρ/2) ‖θ‖² > 0` contradicts the identity: θ must vanish.
    Vanishes,
    /// `ρ = 0` with `∇θ = 0` and `[θ,θ*] = 0`.
    ParallelCommuting,
    /// `sup|Θ| > ρ/4`
    HypothesisViolated,
    /// θ is already zero.
    Trivial,
    Inconclusive,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Certificate {
    pub fires: bool,
    pub verdict: Verdict,
    /// `(ρ - 2 sup|Θ|) ‖θ‖²`
    pub lower_bound: f64,
    /// `(ρ/2) ‖θ‖²`
    pub threshold: f64,
    pub message: String,
}

/// Relative size below which the gradient and bracket terms count as zero.
pub const PARALLEL_TOL: f64 = 1e-10;

pub fn vanishing_certificate(report: &WeitzenbockReport, ricci_lower: f64, sup_residual: f64) -> Certificate {
    let rho = ricci_lower;
    let norm = report.theta_norm_sq;
    let lower_bound = (rho - 2.0 * sup_residual) * norm;
    let threshold = 0.5 * rho * norm;
    let (verdict, message) = if norm <= 0.0 {
        (Verdict::Trivial, "θ = 0: nothing to certify".to_string())
    } else if rho > 0.0 && sup_residual > 0.25 * rho {
        (Verdict::HypothesisViolated, format!("sup|Θ| = {sup_residual} exceeds ρ/4 = {}", 0.25 * rho))
    } else if rho > 0.0 && lower_bound >= threshold {
        (
            Verdict::Vanishes,
            format!("(ρ - 2 sup|Θ|) = {} ≥ ρ/2 = {}: θ must vanish", rho - 2.0 * sup_residual, 0.5 * rho),
        )
    } else if rho == 0.0
        && report.grad_term <= PARALLEL_TOL * norm.max(1.0)
        && report.bracket_term <= PARALLEL_TOL * norm.max(1.0)
    {
        (
            Verdict::ParallelCommuting,
            "parallel commuting Higgs field: vanishing requires full holonomy, not verifiable on torus".to_string(),
        )
    } else {
        (Verdict::Inconclusive, "inequality chain does not close".to_string())
    };
    Certificate { fires: verdict == Verdict::Vanishes, verdict, lower_bound, threshold, message }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bundle::random_connection;
    use crate::linalg;
    use std::f64::consts::PI;

    #[test]
    fn flat_fourier_mode_is_eigenfunction() {
        let g = TorusGeometry::new(1, &[1.0, 2.0], &[16, 16]).unwrap();
        let m = linalg::unit(2, 0, 1);
        let prof: Vec<C64> = (0..g.npts()).map(|p| C64::from_polar(1.0, 2.0 * PI * g.coords(p)[1] / 2.0)).collect();
        let v = HiggsField::from_components_unchecked(vec![MatrixField::scalar_times(&prof, &m)]);
        let lv = rough_laplacian(&g, &Connection::zero(&g, 2), &v);
        let expect = v.comps()[0].scaled(C64::new(PI * PI, 0.0));
        assert!(lv.comps()[0].sub(&expect).max_abs_entry() < 1e-11);
    }

    #[test]
    fn laplacian_is_symmetric_and_matches_gradient_norm() {
        let g = TorusGeometry::unit(1, 16).unwrap();
        let a = random_connection(&g, 2, 4, 0.8, 3);
        let mut rng = <rand_chacha::ChaCha8Rng as rand::SeedableRng>::seed_from_u64(1);
        let v = HiggsField::from_components_unchecked(vec![crate::bundle::random_band_limited(&g, 2, 3, &mut rng)]);
        let w = HiggsField::from_components_unchecked(vec![crate::bundle::random_band_limited(&g, 2, 3, &mut rng)]);
        let lv = rough_laplacian(&g, &a, &v);
        let lw = rough_laplacian(&g, &a, &w);
        let x = one_form_inner(&g, &lv, &w);
        let y = one_form_inner(&g, &v, &lw);
        assert!((x - y).abs() < 1e-10 * x.abs().max(1.0));
        let q = one_form_inner(&g, &lv, &v);
        assert!((q - nabla_higgs_norm_sq(&g, &a, &v)).abs() < 1e-10 * q.max(1.0));
        assert!(q >= 0.0);
    }

    #[test]
    fn weitzenbock_nilpotent_terms() {
        let g = TorusGeometry::unit(1, 16).unwrap();
        let theta = HiggsField::constant(&g, &[linalg::unit(2, 0, 1)]).unwrap();
        let r = weitzenbock_check(&g, &Connection::zero(&g, 2), &theta, 1e-8);
        assert!(r.grad_term.abs() < 1e-12 && r.ricci_term == 0.0);
        assert!((r.bracket_term - 8.0).abs() < 1e-12 && (r.rhs_term - 8.0).abs() < 1e-12);
        assert!(r.residual < 1e-10 && r.warning.is_none());
    }

    #[test]
    fn certificate_examples() {
        let rep = WeitzenbockReport {
            grad_term: 0.0,
            ricci_term: 0.0,
            bracket_term: 0.0,
            rhs_term: 0.0,
            residual: 0.0,
            theta_norm_sq: 2.0,
            warning: None,
        };
        let c = vanishing_certificate(&rep, 1.0, 0.1);
        assert!(c.fires && c.verdict == Verdict::Vanishes);
        assert!((c.lower_bound - 1.6).abs() < 1e-15 && (c.threshold - 1.0).abs() < 1e-15);
        let c = vanishing_certificate(&rep, 1.0, 0.4);
        assert!(!c.fires && c.verdict == Verdict::HypothesisViolated);
        let c = vanishing_certificate(&rep, 0.0, 0.0);
        assert_eq!(c.verdict, Verdict::ParallelCommuting);
        assert!(c.message.contains("full holonomy"));
    }
}
