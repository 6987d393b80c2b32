//! Flat Kähler tori with a periodic uniform grid and pseudo-spectral calculus.
//!
//! Real coordinates are `x_0 .. x_{2n-1}` with complex coordinates
//! `z_k = x_{2k} + i x_{2k+1}`. The metric is the identity and
//! `ω = Σ_k dx_{2k} ∧ dx_{2k+1} = (i/2) Σ_k dz_k ∧ dz̄_k`.
//!
//! Fields are stored point-major with the last real axis varying fastest.

use crate::error::{Error, Result};
use crate::field::{MatrixField, ScalarField};
use crate::linalg::{C64, I};
use rustfft::{Fft, FftPlanner};
use std::collections::HashMap;
use std::fmt;
use std::sync::Arc;

/// Degree and type label of a form-valued field.
#[derive(Clone, Copy, Debug, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
pub enum FormKind {
    Zero,
    /// components `θ_k` of `Σ θ_k dz_k`
    OneZero,
    /// components `β_k` of `Σ β_k dz̄_k`
    ZeroOne,
    /// components `Φ_{jk}` of `Σ Φ_{jk} dz_j ∧ dz̄_k`, index `j * n + k`
    OneOne,
    /// components of `Σ_{j<k} Φ_{jk} dz_j ∧ dz_k`
    TwoZero,
    /// components of `Σ_{j<k} Φ_{jk} dz̄_j ∧ dz̄_k`
    ZeroTwo,
    /// components along `dx_a`
    Real1,
    /// components along `dx_a ∧ dx_b`, `a < b`, lexicographic
    Real2,
}

impl FormKind {
    /// Number of stored components in complex dimension `n`.
    pub fn num_components(self, n: usize) -> usize {
        match self {
            FormKind::Zero => 1,
            FormKind::OneZero | FormKind::ZeroOne => n,
            FormKind::OneOne => n * n,
            FormKind::TwoZero | FormKind::ZeroTwo => n * (n - 1) / 2,
            FormKind::Real1 => 2 * n,
            FormKind::Real2 => n * (2 * n - 1),
        }
    }

    /// Squared pointwise norm of one basis element. `|dz|² = 2`.
    pub fn basis_norm_sq(self) -> f64 {
        match self {
            FormKind::Zero | FormKind::Real1 | FormKind::Real2 => 1.0,
            FormKind::OneZero | FormKind::ZeroOne => 2.0,
            FormKind::OneOne | FormKind::TwoZero | FormKind::ZeroTwo => 4.0,
        }
    }
}

/// An End(E)-valued form: one matrix field per independent component.
#[derive(Clone, Debug, PartialEq)]
pub struct FormField {
    pub kind: FormKind,
    pub comps: Vec<MatrixField>,
}

impl FormField {
    pub fn zeros(geom: &TorusGeometry, kind: FormKind, rank: usize) -> Self {
        let comps = (0..kind.num_components(geom.n()))
            .map(|_| MatrixField::zeros(geom.npts(), rank))
            .collect();
        Self { kind, comps }
    }

    /// Pointwise squared norm `Σ_c w |Φ_c|²`.
    pub fn norm_sq_density(&self) -> Vec<f64> {
        let w = self.kind.basis_norm_sq();
        let npts = self.comps.first().map_or(0, |c| c.npts());
        let mut out = vec![0.0; npts];
        for c in &self.comps {
            for (o, v) in out.iter_mut().zip(c.frob_sq()) {
                *o += w * v;
            }
        }
        out
    }

    /// Pointwise inner product `Σ_c w tr(Φ_c Ψ_c^H)`.
    pub fn inner_density(&self, other: &FormField) -> Vec<C64> {
        assert_eq!(self.kind, other.kind);
        let w = self.kind.basis_norm_sq();
        let npts = self.comps.first().map_or(0, |c| c.npts());
        let mut out = vec![C64::new(0.0, 0.0); npts];
        for (a, b) in self.comps.iter().zip(&other.comps) {
            for (p, o) in out.iter_mut().enumerate() {
                *o += w * crate::linalg::frob_inner(a.at(p), b.at(p));
            }
        }
        out
    }
}

/// Flat torus `R^{2n} / (L_0 Z × .. × L_{2n-1} Z)` sampled on a uniform grid.
#[derive(Clone)]
pub struct TorusGeometry {
    n: usize,
    sides: Vec<f64>,
    grid: Vec<usize>,
    npts: usize,
    strides: Vec<usize>,
    /// signed wavenumber per axis and index, Nyquist set to zero
    wavenumbers: Vec<Vec<f64>>,
    /// per-point tables: wavevectors (point-major), `|k|²`, dealias mask
    kvec: Vec<f64>,
    ksq: Vec<f64>,
    mask: Vec<bool>,
    forward: HashMap<usize, Arc<dyn Fft<f64>>>,
    inverse: HashMap<usize, Arc<dyn Fft<f64>>>,
}

impl fmt::Debug for TorusGeometry {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("TorusGeometry")
            .field("n", &self.n)
            .field("sides", &self.sides)
            .field("grid", &self.grid)
            .finish()
    }
}

impl PartialEq for TorusGeometry {
    fn eq(&self, other: &Self) -> bool {
        self.n == other.n && self.sides == other.sides && self.grid == other.grid
    }
}

impl TorusGeometry {
    pub fn new(n: usize, sides: &[f64], grid: &[usize]) -> Result<Self> {
        if !(1..=2).contains(&n) {
            return Err(Error::InvalidGeometry(format!("complex dimension {n} not in {{1, 2}}")));
        }
        let dim = 2 * n;
        if sides.len() != dim || grid.len() != dim {
            return Err(Error::InvalidGeometry(format!(
                "need {dim} side lengths and grid sizes, got {} and {}",
                sides.len(),
                grid.len()
            )));
        }
        if let Some(s) = sides.iter().find(|s| !(s.is_finite() && **s > 0.0)) {
            return Err(Error::InvalidGeometry(format!("side length {s} is not positive")));
        }
        if let Some(g) = grid.iter().find(|&&g| g % 2 != 0 || g < 8) {
            return Err(Error::InvalidGeometry(format!("grid size {g} must be even and at least 8")));
        }
        let mut strides = vec![1; dim];
        for a in (0..dim - 1).rev() {
            strides[a] = strides[a + 1] * grid[a + 1];
        }
        let npts = grid.iter().product();
        let mut wavenumbers = Vec::with_capacity(dim);
        let mut keep = Vec::with_capacity(dim);
        for a in 0..dim {
            let na = grid[a];
            let mut k = Vec::with_capacity(na);
            let mut kp = Vec::with_capacity(na);
            for m in 0..na {
                let s = signed_index(m, na);
                k.push(if 2 * m == na { 0.0 } else { 2.0 * std::f64::consts::PI * s as f64 / sides[a] });
                kp.push(3 * (s.unsigned_abs() as usize) < na);
            }
            wavenumbers.push(k);
            keep.push(kp);
        }
        let mut kvec = Vec::with_capacity(npts * dim);
        let mut ksq = Vec::with_capacity(npts);
        let mut mask = Vec::with_capacity(npts);
        for p in 0..npts {
            let mut s2 = 0.0;
            let mut kept = true;
            for a in 0..dim {
                let m = (p / strides[a]) % grid[a];
                let k = wavenumbers[a][m];
                kvec.push(k);
                s2 += k * k;
                kept &= keep[a][m];
            }
            ksq.push(s2);
            mask.push(kept);
        }
        let mut planner = FftPlanner::new();
        let mut forward = HashMap::new();
        let mut inverse = HashMap::new();
        for &g in grid {
            forward.entry(g).or_insert_with(|| planner.plan_fft_forward(g));
            inverse.entry(g).or_insert_with(|| planner.plan_fft_inverse(g));
        }
        Ok(Self {
            n,
            sides: sides.to_vec(),
            grid: grid.to_vec(),
            npts,
            strides,
            wavenumbers,
            kvec,
            ksq,
            mask,
            forward,
            inverse,
        })
    }

    /// Unit-period torus with `m` points per real direction.
    pub fn unit(n: usize, m: usize) -> Result<Self> {
        Self::new(n, &vec![1.0; 2 * n], &vec![m; 2 * n])
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// Number of real directions, `2n`.
    pub fn real_dim(&self) -> usize {
        2 * self.n
    }

    pub fn sides(&self) -> &[f64] {
        &self.sides
    }

    pub fn grid(&self) -> &[usize] {
        &self.grid
    }

    pub fn npts(&self) -> usize {
        self.npts
    }

    pub fn volume(&self) -> f64 {
        self.sides.iter().product()
    }

    /// Quadrature weight of one grid cell.
    pub fn cell_volume(&self) -> f64 {
        self.volume() / self.npts as f64
    }

    /// Metric coefficients `g_ab`; always the identity.
    pub fn metric(&self) -> Vec<f64> {
        let d = self.real_dim();
        let mut g = vec![0.0; d * d];
        for a in 0..d {
            g[a * d + a] = 1.0;
        }
        g
    }

    /// Coefficients of `ω` in the `Real2` basis.
    pub fn kahler_coefficients(&self) -> Vec<f64> {
        let d = self.real_dim();
        let mut out = Vec::new();
        for a in 0..d {
            for b in (a + 1)..d {
                out.push(if a % 2 == 0 && b == a + 1 { 1.0 } else { 0.0 });
            }
        }
        out
    }

    /// `ω ⊗ Id` as a matrix-valued real 2-form.
    pub fn kahler_form(&self, rank: usize) -> FormField {
        let comps = self
            .kahler_coefficients()
            .into_iter()
            .map(|c| MatrixField::identity(self.npts, rank).scaled(C64::new(c, 0.0)))
            .collect();
        FormField { kind: FormKind::Real2, comps }
    }

    /// Ricci form coefficients; identically zero on a flat torus.
    pub fn ricci(&self) -> Vec<f64> {
        vec![0.0; self.real_dim() * self.real_dim()]
    }

    /// Index of the `Real2` component `dx_a ∧ dx_b` for `a < b`.
    pub fn pair_index(&self, a: usize, b: usize) -> usize {
        debug_assert!(a < b && b < self.real_dim());
        let d = self.real_dim();
        a * d - a * (a + 1) / 2 + (b - a - 1)
    }

    /// Multi-index of a flat point index.
    pub fn multi_index(&self, mut p: usize) -> Vec<usize> {
        let mut idx = vec![0; self.real_dim()];
        for a in 0..self.real_dim() {
            idx[a] = p / self.strides[a];
            p %= self.strides[a];
        }
        idx
    }

    pub fn flat_index(&self, idx: &[usize]) -> usize {
        idx.iter().zip(&self.strides).map(|(i, s)| i * s).sum()
    }

    /// Real coordinates of a grid point.
    pub fn coords(&self, p: usize) -> Vec<f64> {
        self.multi_index(p)
            .iter()
            .enumerate()
            .map(|(a, &i)| i as f64 * self.sides[a] / self.grid[a] as f64)
            .collect()
    }

    /// Samples a function of the real coordinates.
    pub fn sample(&self, f: impl Fn(&[f64]) -> C64) -> ScalarField {
        ScalarField { values: (0..self.npts).map(|p| f(&self.coords(p))).collect() }
    }

    /// Euclidean distance on the torus.
    pub fn periodic_distance(&self, x: &[f64], y: &[f64]) -> f64 {
        x.iter()
            .zip(y)
            .zip(&self.sides)
            .map(|((a, b), l)| {
                let d = (a - b).rem_euclid(*l);
                d.min(l - d).powi(2)
            })
            .sum::<f64>()
            .sqrt()
    }

    /// Signed wavenumber vector of a Fourier mode (Nyquist components zero).
    pub fn wavevector(&self, p: usize) -> &[f64] {
        let d = self.real_dim();
        &self.kvec[p * d..(p + 1) * d]
    }

    pub fn wavenumbers(&self, axis: usize) -> &[f64] {
        &self.wavenumbers[axis]
    }

    /// `|k|²` of a Fourier mode with Nyquist components zeroed.
    pub fn wavenumber_sq(&self, p: usize) -> f64 {
        self.ksq[p]
    }

    /// 2/3-rule mask: true for modes that survive dealiasing.
    pub fn keep_mode(&self, p: usize) -> bool {
        self.mask[p]
    }

    /// Per-mode dealiasing mask.
    pub fn dealias_mask(&self) -> &[bool] {
        &self.mask
    }

    /// In-place unnormalized forward or normalized inverse DFT of `ncomp`
    /// interleaved components per point.
    pub fn fft(&self, data: &mut [C64], ncomp: usize, inverse: bool) {
        assert_eq!(data.len(), self.npts * ncomp, "fft buffer length");
        let mut buf = vec![C64::new(0.0, 0.0); data.len()];
        for a in 0..self.real_dim() {
            let na = self.grid[a];
            let stride = self.strides[a];
            let outer = self.npts / (na * stride);
            // gather lines into contiguous chunks of length na
            let mut pos = 0;
            for o in 0..outer {
                for s in 0..stride {
                    let base = o * na * stride + s;
                    for c in 0..ncomp {
                        for m in 0..na {
                            buf[pos + m] = data[(base + m * stride) * ncomp + c];
                        }
                        pos += na;
                    }
                }
            }
            let plan = if inverse { &self.inverse[&na] } else { &self.forward[&na] };
            plan.process(&mut buf);
            let mut pos = 0;
            for o in 0..outer {
                for s in 0..stride {
                    let base = o * na * stride + s;
                    for c in 0..ncomp {
                        for m in 0..na {
                            data[(base + m * stride) * ncomp + c] = buf[pos + m];
                        }
                        pos += na;
                    }
                }
            }
        }
        if inverse {
            let s = 1.0 / self.npts as f64;
            data.iter_mut().for_each(|x| *x *= s);
        }
    }

    /// Forward transform of a matrix field (unnormalized).
    pub fn to_spectral(&self, f: &MatrixField) -> Vec<C64> {
        let mut d = f.data().to_vec();
        self.fft(&mut d, f.rank() * f.rank(), false);
        d
    }

    pub fn from_spectral(&self, mut d: Vec<C64>, rank: usize) -> MatrixField {
        self.fft(&mut d, rank * rank, true);
        MatrixField::from_data(rank, d)
    }

    /// Multiplies each mode of spectral data by `m(p)`.
    pub fn apply_multiplier(&self, spec: &mut [C64], ncomp: usize, m: impl Fn(usize) -> C64) {
        for p in 0..self.npts {
            let f = m(p);
            spec[p * ncomp..(p + 1) * ncomp].iter_mut().for_each(|x| *x *= f);
        }
    }

    /// `∂f/∂x_axis`, exact for the trigonometric interpolant.
    pub fn derivative(&self, f: &MatrixField, axis: usize) -> MatrixField {
        self.derivatives(f, &[axis]).pop().expect("one axis")
    }

    /// Several first derivatives from a single forward transform.
    pub fn derivatives(&self, f: &MatrixField, axes: &[usize]) -> Vec<MatrixField> {
        let ncomp = f.rank() * f.rank();
        let spec = self.to_spectral(f);
        axes.iter()
            .map(|&axis| {
                let mut d = spec.clone();
                let d_real = self.real_dim();
                for p in 0..self.npts {
                    let f = I * self.kvec[p * d_real + axis];
                    d[p * ncomp..(p + 1) * ncomp].iter_mut().for_each(|x| *x *= f);
                }
                self.from_spectral(d, f.rank())
            })
            .collect()
    }

    /// All `2n` first derivatives.
    pub fn gradient(&self, f: &MatrixField) -> Vec<MatrixField> {
        let axes: Vec<usize> = (0..self.real_dim()).collect();
        self.derivatives(f, &axes)
    }

    /// Derivative of a scalar field.
    pub fn scalar_derivative(&self, f: &ScalarField, axis: usize) -> ScalarField {
        let m = self.derivative(&f.clone().into_matrix(), axis);
        ScalarField { values: m.into_data() }
    }

    /// Removes modes outside the 2/3-rule band.
    pub fn dealias(&self, f: &MatrixField) -> MatrixField {
        let ncomp = f.rank() * f.rank();
        let mut spec = self.to_spectral(f);
        for p in 0..self.npts {
            if !self.keep_mode(p) {
                spec[p * ncomp..(p + 1) * ncomp].iter_mut().for_each(|x| *x = C64::new(0.0, 0.0));
            }
        }
        self.from_spectral(spec, f.rank())
    }

    /// `∫ f dvol` by the periodic rectangle rule.
    pub fn integrate(&self, f: &ScalarField) -> C64 {
        f.values.iter().sum::<C64>() * self.cell_volume()
    }

    pub fn integrate_real(&self, f: &[f64]) -> f64 {
        f.iter().sum::<f64>() * self.cell_volume()
    }

    /// `∫ tr(a b^H) dvol`.
    pub fn l2_inner(&self, a: &MatrixField, b: &MatrixField) -> C64 {
        a.sum_inner(b) * self.cell_volume()
    }

    pub fn l2_norm_sq(&self, a: &MatrixField) -> f64 {
        a.sum_frob_sq() * self.cell_volume()
    }

    /// `L²` inner product of forms with the pointwise form metric.
    pub fn form_inner(&self, a: &FormField, b: &FormField) -> C64 {
        assert_eq!(a.kind, b.kind);
        let w = a.kind.basis_norm_sq();
        a.comps.iter().zip(&b.comps).map(|(x, y)| self.l2_inner(x, y)).sum::<C64>() * w
    }

    pub fn form_norm_sq(&self, a: &FormField) -> f64 {
        let w = a.kind.basis_norm_sq();
        a.comps.iter().map(|x| self.l2_norm_sq(x)).sum::<f64>() * w
    }

    /// `Λ_ω F` for a (1,1)-form or real 2-form; `Λ_ω ω = n`.
    pub fn lambda_contract(&self, f: &FormField) -> Result<MatrixField> {
        let n = self.n;
        let rank = f.comps.first().map(|c| c.rank()).unwrap_or(1);
        let mut out = MatrixField::zeros(self.npts, rank);
        match f.kind {
            FormKind::Real2 => {
                for k in 0..n {
                    out.axpy(C64::new(1.0, 0.0), &f.comps[self.pair_index(2 * k, 2 * k + 1)]);
                }
            }
            // Λ(dz_k ∧ dz̄_k) = -2i
            FormKind::OneOne => {
                for k in 0..n {
                    out.axpy(C64::new(0.0, -2.0), &f.comps[k * n + k]);
                }
            }
            other => {
                return Err(Error::FormType { expected: "(1,1) or real 2-form", got: format!("{other:?}") })
            }
        }
        Ok(out)
    }

    /// `√−1 Λ_ω F`; sends `H dz ∧ dz̄` to `2H`.
    pub fn i_lambda_contract(&self, f: &FormField) -> Result<MatrixField> {
        let mut out = self.lambda_contract(f)?;
        out.scale(I);
        Ok(out)
    }

    /// `φ ω` as a real 2-form, the adjoint of `Λ_ω`.
    pub fn wedge_omega(&self, phi: &MatrixField) -> FormField {
        let comps = self
            .kahler_coefficients()
            .into_iter()
            .map(|c| phi.scaled(C64::new(c, 0.0)))
            .collect();
        FormField { kind: FormKind::Real2, comps }
    }

    /// Exterior derivative of a matrix-valued real 1-form.
    pub fn d_real1(&self, a: &FormField) -> Result<FormField> {
        if a.kind != FormKind::Real1 {
            return Err(Error::FormType { expected: "real 1-form", got: format!("{:?}", a.kind) });
        }
        let d = self.real_dim();
        let grads: Vec<Vec<MatrixField>> = a.comps.iter().map(|c| self.gradient(c)).collect();
        let mut comps = Vec::new();
        for i in 0..d {
            for j in (i + 1)..d {
                comps.push(grads[j][i].sub(&grads[i][j]));
            }
        }
        Ok(FormField { kind: FormKind::Real2, comps })
    }

    /// `d*` of a matrix-valued real 1-form: `-Σ_a ∂_a α_a`.
    pub fn codifferential_real1(&self, a: &FormField) -> Result<MatrixField> {
        if a.kind != FormKind::Real1 {
            return Err(Error::FormType { expected: "real 1-form", got: format!("{:?}", a.kind) });
        }
        let rank = a.comps[0].rank();
        let mut out = MatrixField::zeros(self.npts, rank);
        for (axis, c) in a.comps.iter().enumerate() {
            out.axpy(C64::new(-1.0, 0.0), &self.derivative(c, axis));
        }
        Ok(out)
    }
}

fn signed_index(m: usize, n: usize) -> i64 {
    if 2 * m <= n {
        m as i64
    } else {
        m as i64 - n as i64
    }
}
