//! Unitary and complex gauge transformations acting on Higgs pairs.

use super::{complex_derivatives, Connection, HiggsField};
use crate::error::{Error, Result};
use crate::field::MatrixField;
use crate::geometry::TorusGeometry;
use crate::linalg::{self, C64};
use serde::{Deserialize, Serialize};

/// Condition numbers above this are treated as singular.
pub const MAX_CONDITION: f64 = 1e8;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum GaugeFlavor {
    Unitary,
    Complex,
}

#[derive(Clone, Debug, PartialEq)]
pub struct GaugeTransform {
    values: MatrixField,
    flavor: GaugeFlavor,
}

impl GaugeTransform {
    pub fn identity(geom: &TorusGeometry, rank: usize) -> Self {
        Self { values: MatrixField::identity(geom.npts(), rank), flavor: GaugeFlavor::Unitary }
    }

    /// Requires `σ σ^H = Id` pointwise to `1e-10`.
    pub fn unitary(values: MatrixField) -> Result<Self> {
        let r = values.rank();
        let mut prod = vec![C64::new(0.0, 0.0); r * r];
        let mut adj = vec![C64::new(0.0, 0.0); r * r];
        let id = linalg::identity(r);
        for p in 0..values.npts() {
            linalg::adjoint(values.at(p), &mut adj, r);
            linalg::matmul(values.at(p), &adj, &mut prod, r);
            let defect: f64 = prod.iter().zip(&id).map(|(a, b)| (a - b).norm_sqr()).sum::<f64>().sqrt();
            if defect > 1e-10 {
                return Err(Error::InvalidArgument(format!(
                    "gauge transform is not unitary at point {p} (defect {defect:.3e})"
                )));
            }
        }
        Ok(Self { values, flavor: GaugeFlavor::Unitary })
    }

    /// Any pointwise invertible field; singularity is checked on application.
    pub fn complex(values: MatrixField) -> Self {
        Self { values, flavor: GaugeFlavor::Complex }
    }

    /// `σ = exp(φ)` pointwise. Unitary flavor requires anti-Hermitian `φ`.
    pub fn exp(phi: &MatrixField, flavor: GaugeFlavor) -> Result<Self> {
        let r = phi.rank();
        let mut values = MatrixField::zeros(phi.npts(), r);
        for p in 0..phi.npts() {
            values.at_mut(p).copy_from_slice(&linalg::expm(phi.at(p), r));
        }
        match flavor {
            GaugeFlavor::Unitary => Self::unitary(values),
            GaugeFlavor::Complex => Ok(Self::complex(values)),
        }
    }

    pub fn values(&self) -> &MatrixField {
        &self.values
    }

    pub fn flavor(&self) -> GaugeFlavor {
        self.flavor
    }

    /// `h = σ^H σ`.
    pub fn metric(&self) -> MatrixField {
        self.values.adjoint().mul(&self.values)
    }
}

/// Applies `σ` to `(A, θ)`:
/// `A'^{0,1} = A^{0,1} - (∂̄_A σ) σ⁻¹`, `A'^{1,0} = A^{1,0} + ((∂̄_A σ) σ⁻¹)^H`, `θ' = σ θ σ⁻¹`.
pub fn gauge_apply(
    geom: &TorusGeometry,
    g: &GaugeTransform,
    a: &Connection,
    theta: &HiggsField,
) -> Result<(Connection, HiggsField)> {
    let sigma = &g.values;
    let r = sigma.rank();
    if r != a.rank() || r != theta.rank() || sigma.npts() != geom.npts() {
        return Err(Error::Shape("gauge transform does not match the pair".into()));
    }
    for p in 0..geom.npts() {
        let cond = linalg::condition_number(sigma.at(p), r);
        if !(cond <= MAX_CONDITION) {
            return Err(Error::SingularGauge { point: p, cond });
        }
    }
    let sigma_inv = sigma.inverse().ok_or(Error::SingularGauge { point: 0, cond: f64::INFINITY })?;
    let (az, azb) = a.type_components();
    let (_, dzb) = complex_derivatives(geom, a, sigma);
    let mut new_az = Vec::with_capacity(az.len());
    let mut new_azb = Vec::with_capacity(az.len());
    for ((z, zb), d) in az.iter().zip(&azb).zip(&dzb) {
        let b = d.mul(&sigma_inv);
        new_azb.push(zb.sub(&b));
        new_az.push(z.add(&b.adjoint()));
    }
    let a_new = Connection::from_type_components(&new_az, &new_azb);
    let theta_new =
        HiggsField::from_components_unchecked(theta.comps().iter().map(|t| t.conjugate(sigma, &sigma_inv)).collect());
    Ok((a_new, theta_new))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bundle::{curvature, is_higgs_pair};
    use std::f64::consts::PI;

    #[test]
    fn identity_leaves_pair_unchanged() {
        let g = TorusGeometry::unit(1, 8).unwrap();
        let a = crate::bundle::random_connection(&g, 2, 1, 0.3, 2);
        let theta = HiggsField::constant(&g, &[linalg::unit(2, 0, 1)]).unwrap();
        let (a2, t2) = gauge_apply(&g, &GaugeTransform::identity(&g, 2), &a, &theta).unwrap();
        for (x, y) in a.comps().iter().zip(a2.comps()) {
            assert!(x.sub(y).max_abs_entry() < 1e-13);
        }
        assert!(t2.comps()[0].sub(&theta.comps()[0]).max_abs_entry() < 1e-15);
    }

    #[test]
    fn complex_sine_gauge_gives_higgs_pair() {
        let g = TorusGeometry::unit(1, 32).unwrap();
        let prof = g.sample(|x| C64::new(0.1 * (2.0 * PI * x[0]).sin(), 0.0));
        let phi = MatrixField::scalar_times(&prof.values, &linalg::unit(2, 0, 0));
        let sigma = GaugeTransform::exp(&phi, GaugeFlavor::Complex).unwrap();
        let theta = HiggsField::constant(&g, &[linalg::unit(2, 0, 1)]).unwrap();
        let (a2, t2) = gauge_apply(&g, &sigma, &Connection::zero(&g, 2), &theta).unwrap();
        let rep = is_higgs_pair(&g, &a2, &t2, 1e-8);
        assert!(rep.pass, "{rep:?}");
        assert!(a2.comps().iter().all(|c| c.anti_hermitian_defect() < 1e-14));
        assert!(curvature(&g, &a2).form.comps[0].max_abs_entry() > 1e-3);
    }

    #[test]
    fn singular_gauge_rejected() {
        let g = TorusGeometry::unit(1, 8).unwrap();
        let m = vec![C64::new(1.0, 0.0), C64::new(0.0, 0.0), C64::new(0.0, 0.0), C64::new(1e-12, 0.0)];
        let s = GaugeTransform::complex(MatrixField::constant(g.npts(), &m));
        let err = gauge_apply(&g, &s, &Connection::zero(&g, 2), &HiggsField::zero(&g, 2)).unwrap_err();
        assert!(matches!(err, Error::SingularGauge { .. }));
    }
}
