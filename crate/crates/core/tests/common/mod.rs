//! Brute-force oracles shared by the integration tests.

#![allow(dead_code)]

use higgslab_core::bundle::Connection;
use higgslab_core::geometry::TorusGeometry;
use higgslab_core::linalg::C64;
use nalgebra::DMatrix;
use std::f64::consts::PI;

/// Signed Fourier index of mode `m` on `n` points.
fn signed(m: usize, n: usize) -> f64 {
    if 2 * m < n { m as f64 } else { m as f64 - n as f64 }
}

/// Dense 1D matrices of the spectral derivative and the non-Nyquist projector,
/// written out from the DFT sums.
fn dense_1d(n: usize, side: f64) -> (DMatrix<C64>, DMatrix<C64>) {
    let mut d = DMatrix::from_element(n, n, C64::new(0.0, 0.0));
    let mut p = DMatrix::from_element(n, n, C64::new(0.0, 0.0));
    for j in 0..n {
        for l in 0..n {
            for m in (0..n).filter(|&m| 2 * m != n) {
                let ph = C64::from_polar(1.0, 2.0 * PI * (m as f64) * (j as f64 - l as f64) / n as f64) / n as f64;
                d[(j, l)] += C64::new(0.0, 2.0 * PI * signed(m, n) / side) * ph;
                p[(j, l)] += ph;
            }
        }
    }
    (d, p)
}

fn kron(a: &DMatrix<C64>, b: &DMatrix<C64>) -> DMatrix<C64> {
    a.kronecker(b)
}

fn eye(n: usize) -> DMatrix<C64> {
    DMatrix::identity(n, n)
}

/// Smallest eigenvalue of `Σ_a D_a^H D_a` on traceless, non-Nyquist
/// End(E)-valued functions of a 2-torus, by dense Hermitian eigensolve.
pub fn dense_least_eigenvalue(geom: &TorusGeometry, a: &Connection) -> f64 {
    assert_eq!(geom.real_dim(), 2);
    let r = a.rank();
    let rr = r * r;
    let (nx, ny) = (geom.grid()[0], geom.grid()[1]);
    let (dx, px) = dense_1d(nx, geom.sides()[0]);
    let (dy, py) = dense_1d(ny, geom.sides()[1]);
    let partial = [kron(&kron(&dx, &eye(ny)), &eye(rr)), kron(&kron(&eye(nx), &dy), &eye(rr))];
    let dim = geom.npts() * rr;
    let mut lap = DMatrix::from_element(dim, dim, C64::new(0.0, 0.0));
    for (axis, pd) in partial.iter().enumerate() {
        let mut d = pd.clone();
        for p in 0..geom.npts() {
            let x = a.comps()[axis].at(p);
            // [X, V]_{ij} = Σ_k X_ik V_kj - V_ik X_kj on row-major entries
            for i in 0..r {
                for j in 0..r {
                    for k in 0..r {
                        d[(p * rr + i * r + j, p * rr + k * r + j)] += x[i * r + k];
                        d[(p * rr + i * r + j, p * rr + i * r + k)] -= x[k * r + j];
                    }
                }
            }
        }
        lap += d.adjoint() * &d;
    }
    // projector onto traceless matrices
    let mut tl = eye(rr);
    for i in 0..r {
        for j in 0..r {
            tl[(i * r + i, j * r + j)] -= C64::new(1.0 / r as f64, 0.0);
        }
    }
    let proj = kron(&kron(&px, &py), &tl);
    let penalty = C64::new(1e6, 0.0);
    let m = &proj * lap * &proj + (eye(dim) - &proj) * penalty;
    let m = (&m + m.adjoint()) * C64::new(0.5, 0.0);
    m.symmetric_eigenvalues().iter().cloned().fold(f64::INFINITY, f64::min)
}
