//! Dense kernels on small row-major `r x r` complex matrices stored in slices.
//!
//! These run once per grid point inside every field operation, so they avoid
//! allocation and work directly on borrowed storage.

use nalgebra::DMatrix;
use num_complex::Complex64;

pub type C64 = Complex64;

pub const I: C64 = C64 { re: 0.0, im: 1.0 };

#[inline]
pub fn matmul(a: &[C64], b: &[C64], out: &mut [C64], r: usize) {
    for i in 0..r {
        for j in 0..r {
            let mut s = C64::new(0.0, 0.0);
            for k in 0..r {
                s += a[i * r + k] * b[k * r + j];
            }
            out[i * r + j] = s;
        }
    }
}

/// `out = a b - b a`
#[inline]
pub fn commutator(a: &[C64], b: &[C64], out: &mut [C64], r: usize) {
    for i in 0..r {
        for j in 0..r {
            let mut s = C64::new(0.0, 0.0);
            for k in 0..r {
                s += a[i * r + k] * b[k * r + j] - b[i * r + k] * a[k * r + j];
            }
            out[i * r + j] = s;
        }
    }
}

/// `out += c [a, b]`
#[inline]
pub fn add_commutator(a: &[C64], b: &[C64], c: C64, out: &mut [C64], r: usize) {
    for i in 0..r {
        for j in 0..r {
            let mut s = C64::new(0.0, 0.0);
            for k in 0..r {
                s += a[i * r + k] * b[k * r + j] - b[i * r + k] * a[k * r + j];
            }
            out[i * r + j] += c * s;
        }
    }
}

/// `out += c [a, b^H]`
#[inline]
pub fn add_commutator_adj(a: &[C64], b: &[C64], c: C64, out: &mut [C64], r: usize) {
    for i in 0..r {
        for j in 0..r {
            let mut s = C64::new(0.0, 0.0);
            for k in 0..r {
                s += a[i * r + k] * b[j * r + k].conj() - b[k * r + i].conj() * a[k * r + j];
            }
            out[i * r + j] += c * s;
        }
    }
}

#[inline]
pub fn adjoint(a: &[C64], out: &mut [C64], r: usize) {
    for i in 0..r {
        for j in 0..r {
            out[j * r + i] = a[i * r + j].conj();
        }
    }
}

#[inline]
pub fn trace(a: &[C64], r: usize) -> C64 {
    (0..r).map(|i| a[i * r + i]).sum()
}

/// `tr(a b^H)`, the Frobenius inner product.
#[inline]
pub fn frob_inner(a: &[C64], b: &[C64]) -> C64 {
    a.iter().zip(b).map(|(x, y)| x * y.conj()).sum()
}

#[inline]
pub fn frob_sq(a: &[C64]) -> f64 {
    a.iter().map(|x| x.norm_sqr()).sum()
}

pub fn identity(r: usize) -> Vec<C64> {
    let mut m = vec![C64::new(0.0, 0.0); r * r];
    for i in 0..r {
        m[i * r + i] = C64::new(1.0, 0.0);
    }
    m
}

/// Elementary matrix `e_ij` (zero-based).
pub fn unit(r: usize, i: usize, j: usize) -> Vec<C64> {
    let mut m = vec![C64::new(0.0, 0.0); r * r];
    m[i * r + j] = C64::new(1.0, 0.0);
    m
}

/// Gauss-Jordan inverse with partial pivoting. Returns `None` for an exactly
/// singular pivot.
pub fn inverse(a: &[C64], out: &mut [C64], r: usize) -> Option<()> {
    match r {
        1 => {
            if a[0] == C64::new(0.0, 0.0) {
                return None;
            }
            out[0] = a[0].inv();
            Some(())
        }
        2 => {
            let det = a[0] * a[3] - a[1] * a[2];
            if det == C64::new(0.0, 0.0) {
                return None;
            }
            let inv = det.inv();
            out[0] = a[3] * inv;
            out[1] = -a[1] * inv;
            out[2] = -a[2] * inv;
            out[3] = a[0] * inv;
            Some(())
        }
        _ => {
            let mut m = a.to_vec();
            out.copy_from_slice(&identity(r));
            for col in 0..r {
                let piv = (col..r)
                    .max_by(|&x, &y| m[x * r + col].norm().total_cmp(&m[y * r + col].norm()))?;
                if m[piv * r + col].norm() == 0.0 {
                    return None;
                }
                if piv != col {
                    for k in 0..r {
                        m.swap(piv * r + k, col * r + k);
                        out.swap(piv * r + k, col * r + k);
                    }
                }
                let p = m[col * r + col].inv();
                for k in 0..r {
                    m[col * r + k] *= p;
                    out[col * r + k] *= p;
                }
                for row in 0..r {
                    if row != col {
                        let f = m[row * r + col];
                        if f != C64::new(0.0, 0.0) {
                            for k in 0..r {
                                let mv = m[col * r + k];
                                let ov = out[col * r + k];
                                m[row * r + k] -= f * mv;
                                out[row * r + k] -= f * ov;
                            }
                        }
                    }
                }
            }
            Some(())
        }
    }
}

/// Cholesky pivots of a Hermitian matrix. Returns the smallest pivot `l_ii^2`
/// and the determinant; a non-positive pivot means `a` is not positive definite.
pub fn cholesky_pivots(a: &[C64], r: usize) -> (f64, f64) {
    let mut l = vec![C64::new(0.0, 0.0); r * r];
    let mut min_pivot = f64::INFINITY;
    let mut det = 1.0;
    for j in 0..r {
        let mut d = a[j * r + j].re;
        for k in 0..j {
            d -= l[j * r + k].norm_sqr();
        }
        min_pivot = min_pivot.min(d);
        if d <= 0.0 {
            return (d, 0.0);
        }
        det *= d;
        let ljj = d.sqrt();
        l[j * r + j] = C64::new(ljj, 0.0);
        for i in (j + 1)..r {
            let mut s = a[i * r + j];
            for k in 0..j {
                s -= l[i * r + k] * l[j * r + k].conj();
            }
            l[i * r + j] = s / ljj;
        }
    }
    (min_pivot, det)
}

pub fn to_dmatrix(a: &[C64], r: usize) -> DMatrix<C64> {
    DMatrix::from_row_slice(r, r, a)
}

pub fn from_dmatrix(m: &DMatrix<C64>, out: &mut [C64]) {
    let r = m.nrows();
    for i in 0..r {
        for j in 0..r {
            out[i * r + j] = m[(i, j)];
        }
    }
}

/// Matrix exponential.
pub fn expm(a: &[C64], r: usize) -> Vec<C64> {
    let m = to_dmatrix(a, r).exp();
    let mut out = vec![C64::new(0.0, 0.0); r * r];
    from_dmatrix(&m, &mut out);
    out
}

/// 2-norm condition number from singular values.
pub fn condition_number(a: &[C64], r: usize) -> f64 {
    let sv = to_dmatrix(a, r).singular_values();
    let max = sv.iter().cloned().fold(0.0_f64, f64::max);
    let min = sv.iter().cloned().fold(f64::INFINITY, f64::min);
    if min == 0.0 {
        f64::INFINITY
    } else {
        max / min
    }
}
