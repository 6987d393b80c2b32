//! Trivial rank-`r` Hermitian bundle over a flat torus.
//!
//! A connection is `d + Σ_a A_a dx_a` with anti-Hermitian `A_a`. Its type
//! components are `A_{z_k} = (A_{2k} - i A_{2k+1}) / 2` and
//! `A_{z̄_k} = (A_{2k} + i A_{2k+1}) / 2`. A Higgs field is `θ = Σ_k θ_k dz_k`;
//! adjoints are taken with respect to the identity metric `H₀`.

mod gauge;
mod random;

pub use gauge::{gauge_apply, GaugeFlavor, GaugeTransform};
pub use random::{model_higgs, random_band_limited, random_connection, random_higgs_pair, ModelKind, PairSpec};

use crate::error::{Error, Result};
use crate::field::MatrixField;
use crate::geometry::{FormField, FormKind, TorusGeometry};
use crate::linalg::{self, C64, I};
use serde::{Deserialize, Serialize};

const HALF: C64 = C64 { re: 0.5, im: 0.0 };

/// Unitary connection: one anti-Hermitian matrix field per real direction.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Connection {
    rank: usize,
    comps: Vec<MatrixField>,
}

impl Connection {
    pub fn zero(geom: &TorusGeometry, rank: usize) -> Self {
        Self { rank, comps: vec![MatrixField::zeros(geom.npts(), rank); geom.real_dim()] }
    }

    /// Validates shape and anti-Hermiticity (to `1e-10`).
    pub fn from_components(geom: &TorusGeometry, comps: Vec<MatrixField>) -> Result<Self> {
        let rank = check_components(geom, &comps, geom.real_dim(), "connection")?;
        if let Some(d) = comps.iter().map(|c| c.anti_hermitian_defect()).find(|&d| d > 1e-10) {
            return Err(Error::InvalidArgument(format!(
                "connection coefficient is not anti-Hermitian (defect {d:.3e})"
            )));
        }
        Ok(Self { rank, comps })
    }

    /// Skips validation; for flow updates that preserve the structure.
    pub fn from_components_unchecked(comps: Vec<MatrixField>) -> Self {
        Self { rank: comps[0].rank(), comps }
    }

    /// Spatially constant connection.
    pub fn constant(geom: &TorusGeometry, mats: &[Vec<C64>]) -> Result<Self> {
        Self::from_components(geom, mats.iter().map(|m| MatrixField::constant(geom.npts(), m)).collect())
    }

    pub fn rank(&self) -> usize {
        self.rank
    }

    pub fn comps(&self) -> &[MatrixField] {
        &self.comps
    }

    pub fn comps_mut(&mut self) -> &mut [MatrixField] {
        &mut self.comps
    }

    pub fn into_components(self) -> Vec<MatrixField> {
        self.comps
    }

    pub fn as_form(&self) -> FormField {
        FormField { kind: FormKind::Real1, comps: self.comps.clone() }
    }

    /// `(A_{z_k}, A_{z̄_k})` for each `k`.
    pub fn type_components(&self) -> (Vec<MatrixField>, Vec<MatrixField>) {
        let n = self.comps.len() / 2;
        let mut az = Vec::with_capacity(n);
        let mut azb = Vec::with_capacity(n);
        for k in 0..n {
            let (x, y) = (&self.comps[2 * k], &self.comps[2 * k + 1]);
            let mut a = x.scaled(HALF);
            a.axpy(-HALF * I, y);
            let mut b = x.scaled(HALF);
            b.axpy(HALF * I, y);
            az.push(a);
            azb.push(b);
        }
        (az, azb)
    }

    /// Inverse of [`Connection::type_components`].
    pub fn from_type_components(az: &[MatrixField], azb: &[MatrixField]) -> Self {
        let mut comps = Vec::with_capacity(2 * az.len());
        for (a, b) in az.iter().zip(azb) {
            comps.push(a.add(b));
            comps.push(a.sub(b).scaled(I));
        }
        Self::from_components_unchecked(comps)
    }

    pub fn is_finite(&self) -> bool {
        self.comps.iter().all(|c| c.is_finite())
    }

    pub fn conjugate_const(&self, g: &[C64], g_inv: &[C64]) -> Self {
        Self::from_components_unchecked(self.comps.iter().map(|c| c.conjugate_const(g, g_inv)).collect())
    }
}

/// Higgs field `θ = Σ_k θ_k dz_k`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct HiggsField {
    rank: usize,
    comps: Vec<MatrixField>,
}

impl HiggsField {
    pub fn zero(geom: &TorusGeometry, rank: usize) -> Self {
        Self { rank, comps: vec![MatrixField::zeros(geom.npts(), rank); geom.n()] }
    }

    pub fn from_components(geom: &TorusGeometry, comps: Vec<MatrixField>) -> Result<Self> {
        let rank = check_components(geom, &comps, geom.n(), "Higgs field")?;
        Ok(Self { rank, comps })
    }

    pub fn from_components_unchecked(comps: Vec<MatrixField>) -> Self {
        Self { rank: comps[0].rank(), comps }
    }

    pub fn constant(geom: &TorusGeometry, mats: &[Vec<C64>]) -> Result<Self> {
        Self::from_components(geom, mats.iter().map(|m| MatrixField::constant(geom.npts(), m)).collect())
    }

    pub fn rank(&self) -> usize {
        self.rank
    }

    pub fn comps(&self) -> &[MatrixField] {
        &self.comps
    }

    pub fn comps_mut(&mut self) -> &mut [MatrixField] {
        &mut self.comps
    }

    pub fn into_components(self) -> Vec<MatrixField> {
        self.comps
    }

    pub fn as_form(&self) -> FormField {
        FormField { kind: FormKind::OneZero, comps: self.comps.clone() }
    }

    /// Real components: `θ_{2k} = θ_k`, `θ_{2k+1} = i θ_k`.
    pub fn real_components(&self) -> Vec<MatrixField> {
        self.comps.iter().flat_map(|t| [t.clone(), t.scaled(I)]).collect()
    }

    /// `‖θ‖²_{L²}` with `|dz|² = 2`.
    pub fn norm_sq(&self, geom: &TorusGeometry) -> f64 {
        2.0 * self.comps.iter().map(|c| geom.l2_norm_sq(c)).sum::<f64>()
    }

    pub fn is_finite(&self) -> bool {
        self.comps.iter().all(|c| c.is_finite())
    }

    pub fn conjugate_const(&self, g: &[C64], g_inv: &[C64]) -> Self {
        Self::from_components_unchecked(self.comps.iter().map(|c| c.conjugate_const(g, g_inv)).collect())
    }
}

fn check_components(geom: &TorusGeometry, comps: &[MatrixField], want: usize, what: &str) -> Result<usize> {
    if comps.len() != want {
        return Err(Error::Shape(format!("{what} needs {want} components, got {}", comps.len())));
    }
    let rank = comps[0].rank();
    if comps.iter().any(|c| c.rank() != rank || c.npts() != geom.npts()) {
        return Err(Error::Shape(format!("{what} components disagree with the grid or each other")));
    }
    Ok(rank)
}

/// Curvature `F_A` as a real 2-form with its `(0,2)` part measured.
#[derive(Clone, Debug)]
pub struct Curvature {
    pub form: FormField,
    /// `‖F^{0,2}‖_{L²}`
    pub f02_l2: f64,
}

/// `F_ab = ∂_a A_b - ∂_b A_a + [A_a, A_b]`.
pub fn curvature(geom: &TorusGeometry, a: &Connection) -> Curvature {
    let d = geom.real_dim();
    let grads: Vec<Vec<MatrixField>> = a.comps.iter().map(|c| geom.gradient(c)).collect();
    let r = a.rank;
    let mut comps = Vec::with_capacity(d * (d - 1) / 2);
    for i in 0..d {
        for j in (i + 1)..d {
            let mut f = grads[j][i].sub(&grads[i][j]);
            for p in 0..geom.npts() {
                linalg::add_commutator(a.comps[i].at(p), a.comps[j].at(p), C64::new(1.0, 0.0), f.at_mut(p), r);
            }
            comps.push(f);
        }
    }
    let form = FormField { kind: FormKind::Real2, comps };
    let f02 = zero_two_part(geom, &form);
    let f02_l2 = geom.form_norm_sq(&f02).sqrt();
    Curvature { form, f02_l2 }
}

/// `(0,2)` component of a real 2-form.
pub fn zero_two_part(geom: &TorusGeometry, f: &FormField) -> FormField {
    let n = geom.n();
    let rank = f.comps[0].rank();
    let mut out = FormField::zeros(geom, FormKind::ZeroTwo, rank);
    let q = C64::new(0.25, 0.0);
    let mut idx = 0;
    for j in 0..n {
        for k in (j + 1)..n {
            let c = &mut out.comps[idx];
            c.axpy(q, &f.comps[geom.pair_index(2 * j, 2 * k)]);
            c.axpy(q * I, &f.comps[geom.pair_index(2 * j, 2 * k + 1)]);
            c.axpy(q * I, &f.comps[geom.pair_index(2 * j + 1, 2 * k)]);
            c.axpy(-q, &f.comps[geom.pair_index(2 * j + 1, 2 * k + 1)]);
            idx += 1;
        }
    }
    out
}

/// `(1,1)` components `Φ_{jk}` (of `dz_j ∧ dz̄_k`) of a real 2-form.
pub fn one_one_part(geom: &TorusGeometry, f: &FormField) -> FormField {
    let n = geom.n();
    let rank = f.comps[0].rank();
    let u = [C64::new(0.5, 0.0), C64::new(0.0, -0.5)];
    let v = [C64::new(0.5, 0.0), C64::new(0.0, 0.5)];
    let mut out = FormField::zeros(geom, FormKind::OneOne, rank);
    for j in 0..n {
        for k in 0..n {
            let c = &mut out.comps[j * n + k];
            for (s, us) in u.iter().enumerate() {
                for (t, vt) in v.iter().enumerate() {
                    let (a, b) = (2 * j + s, 2 * k + t);
                    if a < b {
                        c.axpy(us * vt, &f.comps[geom.pair_index(a, b)]);
                    } else if b < a {
                        c.axpy(-us * vt, &f.comps[geom.pair_index(b, a)]);
                    }
                }
            }
        }
    }
    out
}

/// All covariant derivatives `D_a φ = ∂_a φ + [A_a, φ]` of an End(E)-valued function.
pub fn covariant_derivatives(geom: &TorusGeometry, a: &Connection, phi: &MatrixField) -> Vec<MatrixField> {
    let mut grads = geom.gradient(phi);
    let r = phi.rank();
    for (axis, g) in grads.iter_mut().enumerate() {
        for p in 0..geom.npts() {
            linalg::add_commutator(a.comps[axis].at(p), phi.at(p), C64::new(1.0, 0.0), g.at_mut(p), r);
        }
    }
    grads
}

/// `(D_{z_k} φ, D_{z̄_k} φ)` for each `k`.
pub fn complex_derivatives(
    geom: &TorusGeometry,
    a: &Connection,
    phi: &MatrixField,
) -> (Vec<MatrixField>, Vec<MatrixField>) {
    let d = covariant_derivatives(geom, a, phi);
    let mut dz = Vec::with_capacity(geom.n());
    let mut dzb = Vec::with_capacity(geom.n());
    for k in 0..geom.n() {
        let mut x = d[2 * k].scaled(HALF);
        x.axpy(-HALF * I, &d[2 * k + 1]);
        let mut y = d[2 * k].scaled(HALF);
        y.axpy(HALF * I, &d[2 * k + 1]);
        dz.push(x);
        dzb.push(y);
    }
    (dz, dzb)
}

/// Which covariant operator to apply.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum CovariantOp {
    D,
    Del,
    Dbar,
    Nabla,
}

/// Covariant exterior operators on End(E)-valued forms of low degree.
pub fn covariant_derivative(
    geom: &TorusGeometry,
    a: &Connection,
    phi: &FormField,
    op: CovariantOp,
) -> Result<FormField> {
    let n = geom.n();
    let unsupported = || Error::FormType { expected: "a supported form type for this operator", got: format!("{:?} with {op:?}", phi.kind) };
    match (phi.kind, op) {
        (FormKind::Zero, CovariantOp::D | CovariantOp::Nabla) => {
            Ok(FormField { kind: FormKind::Real1, comps: covariant_derivatives(geom, a, &phi.comps[0]) })
        }
        (FormKind::Zero, CovariantOp::Del) => {
            Ok(FormField { kind: FormKind::OneZero, comps: complex_derivatives(geom, a, &phi.comps[0]).0 })
        }
        (FormKind::Zero, CovariantOp::Dbar) => {
            Ok(FormField { kind: FormKind::ZeroOne, comps: complex_derivatives(geom, a, &phi.comps[0]).1 })
        }
        (FormKind::Real1, CovariantOp::D) => {
            let d = geom.real_dim();
            let derivs: Vec<Vec<MatrixField>> =
                phi.comps.iter().map(|c| covariant_derivatives(geom, a, c)).collect();
            let mut comps = Vec::new();
            for i in 0..d {
                for j in (i + 1)..d {
                    comps.push(derivs[j][i].sub(&derivs[i][j]));
                }
            }
            Ok(FormField { kind: FormKind::Real2, comps })
        }
        (FormKind::OneZero, CovariantOp::Del) => {
            let theta = HiggsField::from_components_unchecked(phi.comps.clone());
            Ok(del_higgs(geom, a, &theta))
        }
        (FormKind::OneZero, CovariantOp::Dbar) => {
            let theta = HiggsField::from_components_unchecked(phi.comps.clone());
            Ok(dbar_higgs(geom, a, &theta))
        }
        (FormKind::ZeroOne, CovariantOp::Dbar) => {
            // Σ_{j,k} D_{z̄_j} β_k dz̄_j ∧ dz̄_k
            let dzb: Vec<Vec<MatrixField>> =
                phi.comps.iter().map(|c| complex_derivatives(geom, a, c).1).collect();
            let mut comps = Vec::new();
            for j in 0..n {
                for k in (j + 1)..n {
                    comps.push(dzb[k][j].sub(&dzb[j][k]));
                }
            }
            Ok(FormField { kind: FormKind::ZeroTwo, comps })
        }
        _ => Err(unsupported()),
    }
}

/// `∇_A θ` as `[a][k] = D_a θ_k`.
pub fn nabla_higgs(geom: &TorusGeometry, a: &Connection, theta: &HiggsField) -> Vec<Vec<MatrixField>> {
    let per_k: Vec<Vec<MatrixField>> =
        theta.comps.iter().map(|t| covariant_derivatives(geom, a, t)).collect();
    (0..geom.real_dim()).map(|ax| per_k.iter().map(|d| d[ax].clone()).collect()).collect()
}

/// `‖∇_A θ‖²_{L²} = Σ_a 2 Σ_k ‖D_a θ_k‖²`.
pub fn nabla_higgs_norm_sq(geom: &TorusGeometry, a: &Connection, theta: &HiggsField) -> f64 {
    theta
        .comps
        .iter()
        .flat_map(|t| covariant_derivatives(geom, a, t))
        .map(|d| 2.0 * geom.l2_norm_sq(&d))
        .sum()
}

/// `∂̄_A θ` as the `(1,1)`-form with `Φ_{kj} = -D_{z̄_j} θ_k`.
pub fn dbar_higgs(geom: &TorusGeometry, a: &Connection, theta: &HiggsField) -> FormField {
    let n = geom.n();
    let mut out = FormField::zeros(geom, FormKind::OneOne, theta.rank);
    for (k, t) in theta.comps.iter().enumerate() {
        let (_, dzb) = complex_derivatives(geom, a, t);
        for (j, d) in dzb.into_iter().enumerate() {
            out.comps[k * n + j] = d.scaled(C64::new(-1.0, 0.0));
        }
    }
    out
}

/// `∂_A θ = Σ_{j<k} (D_{z_j} θ_k - D_{z_k} θ_j) dz_j ∧ dz_k`; empty when `n = 1`.
pub fn del_higgs(geom: &TorusGeometry, a: &Connection, theta: &HiggsField) -> FormField {
    let n = geom.n();
    let dz: Vec<Vec<MatrixField>> = theta.comps.iter().map(|t| complex_derivatives(geom, a, t).0).collect();
    let mut comps = Vec::new();
    for j in 0..n {
        for k in (j + 1)..n {
            comps.push(dz[k][j].sub(&dz[j][k]));
        }
    }
    FormField { kind: FormKind::TwoZero, comps }
}

/// `θ ∧ θ = Σ_{j<k} [θ_j, θ_k] dz_j ∧ dz_k`.
pub fn wedge_square(geom: &TorusGeometry, theta: &HiggsField) -> FormField {
    let n = geom.n();
    let mut comps = Vec::new();
    for j in 0..n {
        for k in (j + 1)..n {
            comps.push(theta.comps[j].commutator(&theta.comps[k]));
        }
    }
    FormField { kind: FormKind::TwoZero, comps }
}

/// `[θ, θ*]` as a `(1,1)`-form, `Φ_{jk} = [θ_j, θ_k^H]`.
pub fn theta_bracket(geom: &TorusGeometry, theta: &HiggsField) -> FormField {
    let n = geom.n();
    let r = theta.rank;
    let mut out = FormField::zeros(geom, FormKind::OneOne, r);
    for j in 0..n {
        for k in 0..n {
            let c = &mut out.comps[j * n + k];
            for p in 0..geom.npts() {
                linalg::add_commutator_adj(theta.comps[j].at(p), theta.comps[k].at(p), C64::new(1.0, 0.0), c.at_mut(p), r);
            }
        }
    }
    out
}

/// `[θ, θ*]` as a real 2-form, `[θ_a, θ_b^H] - [θ_b, θ_a^H]`.
pub fn theta_bracket_real(geom: &TorusGeometry, theta: &HiggsField) -> FormField {
    let d = geom.real_dim();
    let r = theta.rank;
    let real = theta.real_components();
    let one = C64::new(1.0, 0.0);
    let mut comps = Vec::new();
    for i in 0..d {
        for j in (i + 1)..d {
            let mut c = MatrixField::zeros(geom.npts(), r);
            for p in 0..geom.npts() {
                linalg::add_commutator_adj(real[i].at(p), real[j].at(p), one, c.at_mut(p), r);
                linalg::add_commutator_adj(real[j].at(p), real[i].at(p), -one, c.at_mut(p), r);
            }
            comps.push(c);
        }
    }
    FormField { kind: FormKind::Real2, comps }
}

/// `√−1 Λ_ω [θ, θ*] = 2 Σ_k [θ_k, θ_k^H]`.
pub fn i_lambda_theta_bracket(geom: &TorusGeometry, theta: &HiggsField) -> MatrixField {
    let r = theta.rank;
    let mut out = MatrixField::zeros(geom.npts(), r);
    for t in &theta.comps {
        for p in 0..geom.npts() {
            linalg::add_commutator_adj(t.at(p), t.at(p), C64::new(2.0, 0.0), out.at_mut(p), r);
        }
    }
    out
}

/// `√−1 Λ_ω F_A = i Σ_k F_{2k,2k+1}`.
pub fn i_lambda_curvature(geom: &TorusGeometry, f: &FormField) -> MatrixField {
    geom.i_lambda_contract(f).expect("curvature is a real 2-form")
}

/// Higgs-pair constraint residuals.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConstraintReport {
    /// `‖∂̄_A θ‖_{L²}`
    pub holomorphicity: f64,
    /// `‖θ ∧ θ‖_{L²}`
    pub wedge: f64,
    /// `‖F_A^{0,2}‖_{L²}`
    pub integrability: f64,
    pub pass: bool,
}

pub fn is_higgs_pair(geom: &TorusGeometry, a: &Connection, theta: &HiggsField, tol: f64) -> ConstraintReport {
    let holomorphicity = geom.form_norm_sq(&dbar_higgs(geom, a, theta)).sqrt();
    let wedge = geom.form_norm_sq(&wedge_square(geom, theta)).sqrt();
    let integrability = curvature(geom, a).f02_l2;
    let pass = holomorphicity <= tol && wedge <= tol && integrability <= tol;
    ConstraintReport { holomorphicity, wedge, integrability, pass }
}

/// Max pointwise norm of `d_A F_A`, a 3-form; zero when `n = 1`.
pub fn bianchi_residual(geom: &TorusGeometry, a: &Connection, f: &FormField) -> f64 {
    let d = geom.real_dim();
    let derivs: Vec<Vec<MatrixField>> = f.comps.iter().map(|c| covariant_derivatives(geom, a, c)).collect();
    let comp = |i: usize, j: usize, ax: usize| &derivs[geom.pair_index(i, j)][ax];
    let mut worst: f64 = 0.0;
    for i in 0..d {
        for j in (i + 1)..d {
            for k in (j + 1)..d {
                let mut s = comp(j, k, i).clone();
                s.axpy(C64::new(-1.0, 0.0), comp(i, k, j));
                s.axpy(C64::new(1.0, 0.0), comp(i, j, k));
                worst = worst.max(s.frob_sq().into_iter().fold(0.0, f64::max).sqrt());
            }
        }
    }
    worst
}

/// `(Σ_{j ≤ k} ∫ |∇_A^j u|^p)^{1/p}` for `k ≤ 2`.
pub fn sobolev_norm(geom: &TorusGeometry, a: &Connection, u: &MatrixField, k: usize, p: f64) -> Result<f64> {
    if k > 2 {
        return Err(Error::InvalidArgument(format!("Sobolev order {k} > 2 is not supported")));
    }
    if !(p >= 1.0 && p.is_finite()) {
        return Err(Error::InvalidArgument(format!("Sobolev exponent {p} must lie in [1, ∞)")));
    }
    let lp = |dens: &[f64]| geom.integrate_real(&dens.iter().map(|s| s.sqrt().powf(p)).collect::<Vec<_>>());
    let mut total = lp(&u.frob_sq());
    if k >= 1 {
        let d1 = covariant_derivatives(geom, a, u);
        let mut dens = vec![0.0; geom.npts()];
        for d in &d1 {
            dens.iter_mut().zip(d.frob_sq()).for_each(|(s, v)| *s += v);
        }
        total += lp(&dens);
        if k == 2 {
            let mut dens = vec![0.0; geom.npts()];
            for d in &d1 {
                for dd in covariant_derivatives(geom, a, d) {
                    dens.iter_mut().zip(dd.frob_sq()).for_each(|(s, v)| *s += v);
                }
            }
            total += lp(&dens);
        }
    }
    Ok(total.powf(1.0 / p))
}
