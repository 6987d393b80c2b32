//! Grid-sampled scalar and matrix fields.
//!
//! Storage is point-major: the `r x r` matrix at grid point `p` occupies
//! `data[p * r * r .. (p + 1) * r * r]` in row-major order.

use crate::linalg::{self, C64};
use serde::{Deserialize, Serialize};

/// Complex scalar samples on the grid.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScalarField {
    pub values: Vec<C64>,
}

impl ScalarField {
    pub fn zeros(npts: usize) -> Self {
        Self { values: vec![C64::new(0.0, 0.0); npts] }
    }

    pub fn from_real(values: impl IntoIterator<Item = f64>) -> Self {
        Self { values: values.into_iter().map(|v| C64::new(v, 0.0)).collect() }
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn real_parts(&self) -> Vec<f64> {
        self.values.iter().map(|v| v.re).collect()
    }

    /// View as a rank-1 matrix field.
    pub fn into_matrix(self) -> MatrixField {
        MatrixField { rank: 1, data: self.values }
    }
}

/// `r x r` complex matrices sampled on the grid.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MatrixField {
    rank: usize,
    data: Vec<C64>,
}

impl MatrixField {
    pub fn zeros(npts: usize, rank: usize) -> Self {
        Self { rank, data: vec![C64::new(0.0, 0.0); npts * rank * rank] }
    }

    pub fn from_data(rank: usize, data: Vec<C64>) -> Self {
        assert!(rank > 0 && data.len() % (rank * rank) == 0, "matrix field length mismatch");
        Self { rank, data }
    }

    /// The same matrix at every point.
    pub fn constant(npts: usize, m: &[C64]) -> Self {
        let rank = (m.len() as f64).sqrt().round() as usize;
        assert_eq!(rank * rank, m.len());
        let mut data = Vec::with_capacity(npts * m.len());
        for _ in 0..npts {
            data.extend_from_slice(m);
        }
        Self { rank, data }
    }

    pub fn identity(npts: usize, rank: usize) -> Self {
        Self::constant(npts, &linalg::identity(rank))
    }

    /// Scalar profile times a fixed matrix.
    pub fn scalar_times(profile: &[C64], m: &[C64]) -> Self {
        let rank = (m.len() as f64).sqrt().round() as usize;
        let mut data = Vec::with_capacity(profile.len() * m.len());
        for &s in profile {
            data.extend(m.iter().map(|x| s * x));
        }
        Self { rank, data }
    }

    pub fn rank(&self) -> usize {
        self.rank
    }

    pub fn npts(&self) -> usize {
        self.data.len() / (self.rank * self.rank)
    }

    pub fn data(&self) -> &[C64] {
        &self.data
    }

    pub fn data_mut(&mut self) -> &mut [C64] {
        &mut self.data
    }

    pub fn into_data(self) -> Vec<C64> {
        self.data
    }

    #[inline]
    pub fn at(&self, p: usize) -> &[C64] {
        let rr = self.rank * self.rank;
        &self.data[p * rr..(p + 1) * rr]
    }

    #[inline]
    pub fn at_mut(&mut self, p: usize) -> &mut [C64] {
        let rr = self.rank * self.rank;
        &mut self.data[p * rr..(p + 1) * rr]
    }

    pub fn scale(&mut self, c: C64) {
        self.data.iter_mut().for_each(|x| *x *= c);
    }

    pub fn scaled(&self, c: C64) -> Self {
        let mut out = self.clone();
        out.scale(c);
        out
    }

    /// `self += c * other`
    pub fn axpy(&mut self, c: C64, other: &MatrixField) {
        debug_assert_eq!(self.data.len(), other.data.len());
        for (x, y) in self.data.iter_mut().zip(&other.data) {
            *x += c * y;
        }
    }

    pub fn add(&self, other: &MatrixField) -> Self {
        let mut out = self.clone();
        out.axpy(C64::new(1.0, 0.0), other);
        out
    }

    pub fn sub(&self, other: &MatrixField) -> Self {
        let mut out = self.clone();
        out.axpy(C64::new(-1.0, 0.0), other);
        out
    }

    /// Pointwise conjugate transpose.
    pub fn adjoint(&self) -> Self {
        let r = self.rank;
        let mut out = Self::zeros(self.npts(), r);
        for p in 0..self.npts() {
            linalg::adjoint(self.at(p), out.at_mut(p), r);
        }
        out
    }

    /// Pointwise product `self * other`.
    pub fn mul(&self, other: &MatrixField) -> Self {
        let r = self.rank;
        let mut out = Self::zeros(self.npts(), r);
        for p in 0..self.npts() {
            linalg::matmul(self.at(p), other.at(p), out.at_mut(p), r);
        }
        out
    }

    /// Pointwise commutator `[self, other]`.
    pub fn commutator(&self, other: &MatrixField) -> Self {
        let r = self.rank;
        let mut out = Self::zeros(self.npts(), r);
        for p in 0..self.npts() {
            linalg::commutator(self.at(p), other.at(p), out.at_mut(p), r);
        }
        out
    }

    /// Pointwise inverse; `None` if any point is exactly singular.
    pub fn inverse(&self) -> Option<Self> {
        let r = self.rank;
        let mut out = Self::zeros(self.npts(), r);
        for p in 0..self.npts() {
            linalg::inverse(self.at(p), out.at_mut(p), r)?;
        }
        Some(out)
    }

    pub fn trace(&self) -> ScalarField {
        ScalarField {
            values: (0..self.npts()).map(|p| linalg::trace(self.at(p), self.rank)).collect(),
        }
    }

    /// Removes the trace part pointwise.
    pub fn project_traceless(&mut self) {
        let r = self.rank;
        for p in 0..self.npts() {
            let m = self.at_mut(p);
            let t = linalg::trace(m, r) / r as f64;
            for i in 0..r {
                m[i * r + i] -= t;
            }
        }
    }

    /// Pointwise squared Frobenius norm.
    pub fn frob_sq(&self) -> Vec<f64> {
        (0..self.npts()).map(|p| linalg::frob_sq(self.at(p))).collect()
    }

    /// Grid sum of `tr(self other^H)` (no volume factor).
    pub fn sum_inner(&self, other: &MatrixField) -> C64 {
        linalg::frob_inner(&self.data, &other.data)
    }

    pub fn sum_frob_sq(&self) -> f64 {
        linalg::frob_sq(&self.data)
    }

    pub fn max_abs_entry(&self) -> f64 {
        self.data.iter().map(|x| x.norm()).fold(0.0, f64::max)
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|x| x.re.is_finite() && x.im.is_finite())
    }

    /// Max over points of the Frobenius distance to the pointwise adjoint of `-self`.
    pub fn anti_hermitian_defect(&self) -> f64 {
        let r = self.rank;
        let mut worst: f64 = 0.0;
        for p in 0..self.npts() {
            let m = self.at(p);
            let mut s = 0.0;
            for i in 0..r {
                for j in 0..r {
                    s += (m[i * r + j] + m[j * r + i].conj()).norm_sqr();
                }
            }
            worst = worst.max(s.sqrt());
        }
        worst
    }

    /// Max over points of the Frobenius distance to the pointwise adjoint.
    pub fn hermitian_defect(&self) -> f64 {
        let r = self.rank;
        let mut worst: f64 = 0.0;
        for p in 0..self.npts() {
            let m = self.at(p);
            let mut s = 0.0;
            for i in 0..r {
                for j in 0..r {
                    s += (m[i * r + j] - m[j * r + i].conj()).norm_sqr();
                }
            }
            worst = worst.max(s.sqrt());
        }
        worst
    }

    /// Replaces every matrix by its Hermitian part.
    pub fn symmetrize(&mut self) {
        let r = self.rank;
        for p in 0..self.npts() {
            let m = self.at_mut(p);
            for i in 0..r {
                for j in i..r {
                    let a = 0.5 * (m[i * r + j] + m[j * r + i].conj());
                    m[i * r + j] = a;
                    m[j * r + i] = a.conj();
                }
            }
        }
    }

    /// Conjugation `g self g^{-1}` by a constant matrix pair.
    pub fn conjugate_const(&self, g: &[C64], g_inv: &[C64]) -> Self {
        let r = self.rank;
        let mut out = Self::zeros(self.npts(), r);
        let mut tmp = vec![C64::new(0.0, 0.0); r * r];
        for p in 0..self.npts() {
            linalg::matmul(g, self.at(p), &mut tmp, r);
            linalg::matmul(&tmp, g_inv, out.at_mut(p), r);
        }
        out
    }

    /// Conjugation `g self g^{-1}` pointwise.
    pub fn conjugate(&self, g: &MatrixField, g_inv: &MatrixField) -> Self {
        let r = self.rank;
        let mut out = Self::zeros(self.npts(), r);
        let mut tmp = vec![C64::new(0.0, 0.0); r * r];
        for p in 0..self.npts() {
            linalg::matmul(g.at(p), self.at(p), &mut tmp, r);
            linalg::matmul(&tmp, g_inv.at(p), out.at_mut(p), r);
        }
        out
    }
}
