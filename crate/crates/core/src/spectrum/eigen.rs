//! Cyclic Jacobi diagonalization of small dense Hermitian matrices.

use num_complex::Complex64 as C64;

use crate::error::{Error, Result};
use crate::simcore::ReducedDensityMatrix;

pub const MAX_SWEEPS: usize = 100;
pub const HERMITIAN_TOL: f64 = 1e-9;
pub const OFF_DIAGONAL_TOL: f64 = 1e-12;

/// Eigenvalues in ascending order with matching unit eigenvectors, stored as
/// the columns of a row-major `dim × dim` matrix.
#[derive(Clone, Debug)]
pub struct HermitianEigen {
    pub values: Vec<f64>,
    pub vectors: Vec<C64>,
    pub dim: usize,
}

impl HermitianEigen {
    /// `V diag(λ) V†`.
    pub fn reconstruct(&self) -> Vec<C64> {
        let d = self.dim;
        let mut out = vec![C64::new(0.0, 0.0); d * d];
        for i in 0..d {
            for j in 0..d {
                out[i * d + j] = (0..d)
                    .map(|k| {
                        self.vectors[i * d + k] * self.values[k] * self.vectors[j * d + k].conj()
                    })
                    .sum();
            }
        }
        out
    }
}

fn off_norm(a: &[C64], d: usize) -> f64 {
    let mut s = 0.0;
    for i in 0..d {
        for j in 0..d {
            if i != j {
                s += a[i * d + j].norm_sqr();
            }
        }
    }
    s.sqrt()
}

/// Full eigendecomposition; the input must be Hermitian within `1e-9` and is
/// symmetrized before iterating. Sweeps stop once the off-diagonal Frobenius
/// norm falls below `1e-12 · max(1, ‖M‖_F)`.
pub fn hermitian_eigen(m: &ReducedDensityMatrix) -> Result<HermitianEigen> {
    let dev = m.hermiticity_deviation();
    if !(dev <= HERMITIAN_TOL) {
        return Err(Error::NonHermitian(dev));
    }
    let d = m.dim();
    let mut a: Vec<C64> = vec![C64::new(0.0, 0.0); d * d];
    for i in 0..d {
        for j in 0..d {
            a[i * d + j] = (m.get(i, j) + m.get(j, i).conj()) * 0.5;
        }
    }
    let mut v = vec![C64::new(0.0, 0.0); d * d];
    (0..d).for_each(|i| v[i * d + i] = C64::new(1.0, 0.0));

    let scale = a.iter().map(|x| x.norm_sqr()).sum::<f64>().sqrt().max(1.0);
    let mut converged = off_norm(&a, d) < OFF_DIAGONAL_TOL * scale;
    let mut sweeps = 0;
    while !converged {
        if sweeps == MAX_SWEEPS {
            return Err(Error::NoConvergence(MAX_SWEEPS));
        }
        sweeps += 1;
        for p in 0..d {
            for q in p + 1..d {
                rotate(&mut a, &mut v, d, p, q);
            }
        }
        converged = off_norm(&a, d) < OFF_DIAGONAL_TOL * scale;
    }

    let mut order: Vec<usize> = (0..d).collect();
    order.sort_by(|&i, &j| a[i * d + i].re.total_cmp(&a[j * d + j].re));
    let values = order.iter().map(|&i| a[i * d + i].re).collect();
    let mut vectors = vec![C64::new(0.0, 0.0); d * d];
    for (col, &src) in order.iter().enumerate() {
        for row in 0..d {
            vectors[row * d + col] = v[row * d + src];
        }
    }
    Ok(HermitianEigen {
        values,
        vectors,
        dim: d,
    })
}

/// Zeroes `a[p][q]` with `a ← V† a V`, where `V = diag(1, e^{-iφ}) R(θ)` on
/// the `(p, q)` plane first makes the pivot real and then applies a real
/// Jacobi rotation.
fn rotate(a: &mut [C64], v: &mut [C64], d: usize, p: usize, q: usize) {
    let apq = a[p * d + q];
    let mag = apq.norm();
    if mag < 1e-300 {
        return;
    }
    let app = a[p * d + p].re;
    let aqq = a[q * d + q].re;
    let tau = (aqq - app) / (2.0 * mag);
    let t = if tau >= 0.0 {
        1.0 / (tau + (1.0 + tau * tau).sqrt())
    } else {
        -1.0 / (-tau + (1.0 + tau * tau).sqrt())
    };
    let c = 1.0 / (1.0 + t * t).sqrt();
    let s = t * c;
    let phase = (apq / mag).conj();
    let (vpp, vpq, vqp, vqq) = (C64::new(c, 0.0), C64::new(s, 0.0), phase * -s, phase * c);

    for k in 0..d {
        let (x, y) = (a[k * d + p], a[k * d + q]);
        a[k * d + p] = x * vpp + y * vqp;
        a[k * d + q] = x * vpq + y * vqq;
    }
    for k in 0..d {
        let (x, y) = (a[p * d + k], a[q * d + k]);
        a[p * d + k] = vpp.conj() * x + vqp.conj() * y;
        a[q * d + k] = vpq.conj() * x + vqq.conj() * y;
    }
    a[p * d + q] = C64::new(0.0, 0.0);
    a[q * d + p] = C64::new(0.0, 0.0);
    a[p * d + p] = C64::new(a[p * d + p].re, 0.0);
    a[q * d + q] = C64::new(a[q * d + q].re, 0.0);
    for k in 0..d {
        let (x, y) = (v[k * d + p], v[k * d + q]);
        v[k * d + p] = x * vpp + y * vqp;
        v[k * d + q] = x * vpq + y * vqq;
    }
}

/// Ascending eigenvalues of a Hermitian matrix.
pub fn eigenvalues_hermitian(m: &ReducedDensityMatrix) -> Result<Vec<f64>> {
    hermitian_eigen(m).map(|e| e.values)
}
