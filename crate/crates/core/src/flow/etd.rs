//! Exponential time differencing (Cox–Matthews ETDRK4) coefficients.
//!
//! For `u' = L u + N(u)` with `L` diagonal in some basis, one step is
//!
//! ```text
//! a  = E2 u + Q N(u)
//! b  = E2 u + Q N(a)
//! c  = E2 a + Q (2 N(b) - N(u))
//! u' = E u + f1 N(u) + 2 f2 (N(a) + N(b)) + f3 N(c)
//! ```
//!
//! which is classical RK4 when `L = 0`. The φ-type coefficients are evaluated
//! by a contour mean to avoid cancellation near `z = 0`.

use num_complex::Complex64;

/// ETDRK4 coefficients for one eigenvalue `z = L h`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct EtdCoeffs {
    pub e: f64,
    pub e2: f64,
    pub q: f64,
    pub f1: f64,
    pub f2: f64,
    pub f3: f64,
}

const CONTOUR_POINTS: usize = 32;

impl EtdCoeffs {
    /// Coefficients at `L = 0`: classical RK4 weights.
    pub fn zero(h: f64) -> Self {
        Self { e: 1.0, e2: 1.0, q: h / 2.0, f1: h / 6.0, f2: h / 6.0, f3: h / 6.0 }
    }

    pub fn new(lambda: f64, h: f64) -> Self {
        let z = lambda * h;
        if z == 0.0 {
            return Self::zero(h);
        }
        let mut q = 0.0;
        let mut f1 = 0.0;
        let mut f2 = 0.0;
        let mut f3 = 0.0;
        for j in 0..CONTOUR_POINTS {
            let ang = 2.0 * std::f64::consts::PI * (j as f64 + 0.5) / CONTOUR_POINTS as f64;
            let w = Complex64::new(z, 0.0) + Complex64::from_polar(1.0, ang);
            let ew = w.exp();
            let w3 = w * w * w;
            q += (((w / 2.0).exp() - 1.0) / w).re;
            f1 += ((-4.0 - w + ew * (4.0 - 3.0 * w + w * w)) / w3).re;
            f2 += ((2.0 + w + ew * (w - 2.0)) / w3).re;
            f3 += ((-4.0 - 3.0 * w - w * w + ew * (4.0 - w)) / w3).re;
        }
        let m = CONTOUR_POINTS as f64;
        Self { e: z.exp(), e2: (z / 2.0).exp(), q: h * q / m, f1: h * f1 / m, f2: h * f2 / m, f3: h * f3 / m }
    }
}
