//! Least eigenvalue of `∇*_A ∇_A` on traceless `(1,0)`-forms with `v ∧ v = 0`.
//!
//! The cone constraint is relaxed to the scale-invariant penalty
//! `f_μ(v) = ⟨Lv, v⟩/‖v‖² + μ ‖v∧v‖²/‖v‖⁴`, minimized for an increasing
//! schedule of `μ` by preconditioned Polak–Ribière conjugate gradients with an
//! exact line search (`f_μ` restricted to a line is a rational function whose
//! coefficients are a handful of inner products). Nyquist modes are excluded
//! from the search space: the spectral derivative annihilates them, so they
//! would form a spurious discrete kernel.

use super::rough_laplacian_component;
use crate::bundle::{nabla_higgs_norm_sq, random_band_limited, Connection, HiggsField};
use crate::field::MatrixField;
use crate::geometry::{FormKind, TorusGeometry};
use crate::linalg::C64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EigenOptions {
    /// penalty weights, used in order
    pub penalties: Vec<f64>,
    /// iteration cap per penalty weight
    pub max_iter: usize,
    /// stop when the gradient norm falls below `tol · max(1, f)`
    pub tol: f64,
    pub seed: u64,
    /// also project out spatially constant fields
    pub mean_zero: bool,
    /// shift `s` of the preconditioner `(s + |k|²)⁻¹`
    pub shift: f64,
}

impl Default for EigenOptions {
    fn default() -> Self {
        Self { penalties: vec![1.0, 10.0, 100.0, 1e3, 1e4], max_iter: 5000, tol: 1e-9, seed: 0, mean_zero: false, shift: 1.0 }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EigenResult {
    /// `⟨∇*∇v, v⟩ / ‖v‖²` at the returned minimizer
    pub lambda_hat: f64,
    /// minimizer with `‖v‖_{L²} = 1`
    pub v: HiggsField,
    /// `‖v ∧ v‖_{L²}`
    pub wedge_feasibility: f64,
    /// `(μ, min f_μ)` for each penalty weight
    pub penalty_trace: Vec<(f64, f64)>,
    pub iterations: usize,
    pub converged: bool,
}

type Form = Vec<MatrixField>;

/// `Re ⟨v, w⟩_{L²}` for `(1,0)`-forms, `|dz|² = 2`.
pub fn one_form_inner(geom: &TorusGeometry, v: &HiggsField, w: &HiggsField) -> f64 {
    inner(geom, v.comps(), w.comps())
}

fn inner(geom: &TorusGeometry, v: &[MatrixField], w: &[MatrixField]) -> f64 {
    v.iter().zip(w).map(|(x, y)| 2.0 * geom.l2_inner(x, y).re).sum()
}

fn axpy(y: &mut Form, c: f64, x: &Form) {
    for (a, b) in y.iter_mut().zip(x) {
        a.axpy(C64::new(c, 0.0), b);
    }
}

fn scale(y: &mut Form, c: f64) {
    y.iter_mut().for_each(|a| a.scale(C64::new(c, 0.0)));
}

/// `⟨∇*∇v, v⟩ / ‖v‖²` evaluated through `‖∇_A v‖²`.
pub fn rayleigh_quotient(geom: &TorusGeometry, a: &Connection, v: &HiggsField) -> f64 {
    nabla_higgs_norm_sq(geom, a, v) / v.norm_sq(geom)
}

struct Problem<'a> {
    geom: &'a TorusGeometry,
    a: &'a Connection,
    mean_zero: bool,
    shift: f64,
    /// `|dz_0 ∧ dz_1|²`
    wedge_weight: f64,
    /// modes with a Nyquist index on some axis (spurious kernel of `∂`)
    nyquist: Vec<bool>,
}

/// Modes whose index equals `N_a/2` on some axis.
pub fn nyquist_modes(geom: &TorusGeometry) -> Vec<bool> {
    (0..geom.npts()).map(|p| geom.multi_index(p).iter().zip(geom.grid()).any(|(&i, &n)| 2 * i == n)).collect()
}

impl<'a> Problem<'a> {
    fn new(geom: &'a TorusGeometry, a: &'a Connection, mean_zero: bool, shift: f64) -> Self {
        let wedge_weight = FormKind::TwoZero.basis_norm_sq();
        Self { geom, a, mean_zero, shift, wedge_weight, nyquist: nyquist_modes(geom) }
    }
}

impl Problem<'_> {
    fn laplacian(&self, v: &Form) -> Form {
        v.iter().map(|c| rough_laplacian_component(self.geom, self.a, c)).collect()
    }

    /// Fourier multiplier `m` followed by the projection onto the search space.
    fn filtered(&self, v: &mut Form, m: impl Fn(usize) -> f64) {
        for c in v.iter_mut() {
            let r = c.rank();
            let mut s = self.geom.to_spectral(c);
            self.geom.apply_multiplier(&mut s, r * r, |p| {
                let drop = self.nyquist[p] || (self.mean_zero && p == 0);
                C64::new(if drop { 0.0 } else { m(p) }, 0.0)
            });
            *c = self.geom.from_spectral(s, r);
            c.project_traceless();
        }
    }

    fn project(&self, v: &mut Form) {
        self.filtered(v, |_| 1.0);
    }

    fn precondition(&self, g: &Form) -> Form {
        let mut out = g.clone();
        self.filtered(&mut out, |p| 1.0 / (self.shift + self.geom.wavenumber_sq(p)));
        out
    }

    /// `[x_0, y_1] + [y_0, x_1]`-type bilinear pieces of `v ∧ v`; empty for `n = 1`.
    fn wedge(&self, x: &Form, y: &Form) -> Option<MatrixField> {
        (x.len() == 2).then(|| x[0].commutator(&y[1]).add(&y[0].commutator(&x[1])))
    }

    fn wedge_sq(&self, v: &Form) -> f64 {
        match v.len() {
            2 => self.wedge_weight * self.geom.l2_norm_sq(&v[0].commutator(&v[1])),
            _ => 0.0,
        }
    }

    /// Value and gradient of `f_μ` at `v` given `Lv`.
    fn value_grad(&self, v: &Form, lv: &Form, mu: f64) -> (f64, Form) {
        let d = inner(self.geom, v, v);
        let n = inner(self.geom, lv, v);
        let q = n / d;
        let mut g: Form = lv.clone();
        axpy(&mut g, -q, v);
        scale(&mut g, 2.0 / d);
        let mut f = q;
        if v.len() == 2 && mu > 0.0 {
            let b = v[0].commutator(&v[1]);
            let w = self.wedge_weight * self.geom.l2_norm_sq(&b);
            f += mu * w / (d * d);
            // ∇W = c ([v₁^H, B] ↦ slot 0 with minus sign, [v₀^H, B] ↦ slot 1)
            let gw0 = v[1].adjoint().commutator(&b).scaled(C64::new(-self.wedge_weight, 0.0));
            let gw1 = v[0].adjoint().commutator(&b).scaled(C64::new(self.wedge_weight, 0.0));
            let gw = vec![gw0, gw1];
            axpy(&mut g, mu / (d * d), &gw);
            axpy(&mut g, -4.0 * mu * w / (d * d * d), v);
        }
        self.project(&mut g);
        (f, g)
    }
}

/// `f(α) = N(α)/D(α) + μ W(α)/D(α)²` along `v + α d`.
struct LineFn {
    n: [f64; 3],
    d: [f64; 3],
    w: [f64; 5],
    mu: f64,
}

fn poly(c: &[f64], x: f64) -> f64 {
    c.iter().rev().fold(0.0, |acc, &k| acc * x + k)
}

fn dpoly(c: &[f64], x: f64) -> f64 {
    c.iter().enumerate().skip(1).rev().fold(0.0, |acc, (i, &k)| acc * x + i as f64 * k)
}

impl LineFn {
    fn value(&self, x: f64) -> f64 {
        let d = poly(&self.d, x);
        poly(&self.n, x) / d + self.mu * poly(&self.w, x) / (d * d)
    }

    fn slope(&self, x: f64) -> f64 {
        let (n, dn) = (poly(&self.n, x), dpoly(&self.n, x));
        let (d, dd) = (poly(&self.d, x), dpoly(&self.d, x));
        let (w, dw) = (poly(&self.w, x), dpoly(&self.w, x));
        (dn * d - n * dd) / (d * d) + self.mu * (dw * d - 2.0 * w * dd) / (d * d * d)
    }

    /// First local minimizer along `α > 0`, assuming `slope(0) < 0`.
    fn minimize(&self, guess: f64) -> f64 {
        let mut lo = 0.0;
        let mut hi = guess.max(f64::MIN_POSITIVE);
        let mut grown = 0;
        while self.slope(hi) < 0.0 && grown < 200 {
            lo = hi;
            hi *= 2.0;
            grown += 1;
        }
        if self.slope(hi) < 0.0 {
            return hi;
        }
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if mid <= lo || mid >= hi {
                break;
            }
            if self.slope(mid) < 0.0 {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        let cand = 0.5 * (lo + hi);
        if self.value(cand) <= self.value(0.0) {
            cand
        } else {
            0.0
        }
    }
}

fn initial_vector(pb: &Problem, rank: usize, seed: u64) -> Form {
    let geom = pb.geom;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let rough = geom.grid().iter().map(|&g| (g - 1) / 3).min().unwrap_or(1).clamp(1, 2);
    let mut v: Form = (0..geom.n()).map(|_| random_band_limited(geom, rank, rough, &mut rng)).collect();
    pb.project(&mut v);
    v
}

/// Penalized Rayleigh-quotient minimization over traceless `(1,0)`-forms.
pub fn least_eigenvalue(geom: &TorusGeometry, a: &Connection, opts: &EigenOptions) -> EigenResult {
    let pb = Problem::new(geom, a, opts.mean_zero, opts.shift);
    let mut v = initial_vector(&pb, a.rank(), opts.seed);
    let nrm = inner(geom, &v, &v).sqrt();
    scale(&mut v, 1.0 / nrm);
    let mut lv = pb.laplacian(&v);
    let mut iterations = 0;
    let mut converged = true;
    let mut penalty_trace = Vec::new();
    let schedule = if opts.penalties.is_empty() { vec![0.0] } else { opts.penalties.clone() };
    for &mu in &schedule {
        let mut d: Option<Form> = None;
        let mut z_prev: Option<Form> = None;
        let mut rz_prev = 0.0;
        let mut step_guess = 1.0;
        let mut done = false;
        for it in 0..opts.max_iter {
            if it % 25 == 24 {
                lv = pb.laplacian(&v);
            }
            let (f, g) = pb.value_grad(&v, &lv, mu);
            let gnorm = inner(geom, &g, &g).sqrt();
            if gnorm <= opts.tol * f.abs().max(1.0) {
                done = true;
                break;
            }
            let z = pb.precondition(&g);
            let rz = inner(geom, &g, &z);
            let beta = match &z_prev {
                Some(zp) if rz_prev > 0.0 => ((rz - inner(geom, &g, zp)) / rz_prev).max(0.0),
                _ => 0.0,
            };
            let mut dir: Form = z.iter().map(|c| c.scaled(C64::new(-1.0, 0.0))).collect();
            if let Some(dp) = &d {
                axpy(&mut dir, beta, dp);
            }
            if inner(geom, &g, &dir) >= 0.0 {
                dir = z.iter().map(|c| c.scaled(C64::new(-1.0, 0.0))).collect();
            }
            let ld = pb.laplacian(&dir);
            let line = line_fn(&pb, &v, &lv, &dir, &ld, mu);
            let alpha = line.minimize(step_guess);
            iterations += 1;
            if alpha == 0.0 {
                // no representable decrease left along the preconditioned gradient
                done = true;
                break;
            }
            step_guess = alpha;
            axpy(&mut v, alpha, &dir);
            axpy(&mut lv, alpha, &ld);
            let nrm = inner(geom, &v, &v).sqrt();
            scale(&mut v, 1.0 / nrm);
            scale(&mut lv, 1.0 / nrm);
            scale(&mut dir, 1.0 / nrm);
            step_guess *= nrm;
            d = Some(dir);
            z_prev = Some(z);
            rz_prev = rz;
        }
        converged &= done;
        lv = pb.laplacian(&v);
        let (fv, _) = pb.value_grad(&v, &lv, mu);
        penalty_trace.push((mu, fv));
    }
    let lambda_hat = inner(geom, &lv, &v) / inner(geom, &v, &v);
    let wedge_feasibility = pb.wedge_sq(&v).sqrt();
    EigenResult {
        lambda_hat,
        v: HiggsField::from_components_unchecked(v),
        wedge_feasibility,
        penalty_trace,
        iterations,
        converged,
    }
}

fn line_fn(pb: &Problem, v: &Form, lv: &Form, d: &Form, ld: &Form, mu: f64) -> LineFn {
    let g = pb.geom;
    let n = [inner(g, lv, v), 2.0 * inner(g, lv, d), inner(g, ld, d)];
    let dd = [inner(g, v, v), 2.0 * inner(g, v, d), inner(g, d, d)];
    let mut w = [0.0; 5];
    if v.len() == 2 && mu > 0.0 {
        let p = [v[0].commutator(&v[1]), pb.wedge(v, d).expect("n = 2"), d[0].commutator(&d[1])];
        for i in 0..3 {
            for j in 0..3 {
                w[i + j] += pb.wedge_weight * g.l2_inner(&p[i], &p[j]).re;
            }
        }
    }
    LineFn { n, d: dd, w, mu }
}
