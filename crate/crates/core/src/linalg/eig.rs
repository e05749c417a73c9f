//! Cyclic Jacobi eigensolver for dense complex Hermitian matrices.
//!
//! Each rotation first removes the phase of the pivot `a_pq` with a diagonal
//! unitary and then applies a real Jacobi rotation, so the working matrix
//! stays Hermitian with a real diagonal throughout.

use super::matrix::{CMatrix, C64, ZERO};
use crate::error::{Error, Result};

pub const MAX_SWEEPS: usize = 100;
/// Off-diagonal Frobenius mass, relative to `‖M‖`, at which sweeping stops.
pub const OFF_DIAGONAL_TOL: f64 = 1e-13;
/// Relative Hermiticity defect accepted on input.
pub const HERMITIAN_TOL: f64 = 1e-12;

#[derive(Clone, Debug)]
pub struct EigenDecomposition {
    /// Ascending.
    pub eigenvalues: Vec<f64>,
    /// Orthonormal eigenvectors stored as columns, in eigenvalue order.
    pub eigenvectors: CMatrix,
}

impl EigenDecomposition {
    pub fn dim(&self) -> usize {
        self.eigenvalues.len()
    }

    pub fn vector(&self, k: usize) -> Vec<C64> {
        self.eigenvectors.col(k)
    }

    /// `V Λ V*`
    pub fn reconstruct(&self) -> CMatrix {
        let n = self.dim();
        let v = &self.eigenvectors;
        CMatrix::from_fn(n, n, |i, j| (0..n).map(|k| v[(i, k)] * self.eigenvalues[k] * v[(j, k)].conj()).sum())
    }

    /// Orthogonal projection onto the span of the given eigenvector columns.
    pub fn projection(&self, indices: &[usize]) -> CMatrix {
        let n = self.dim();
        let v = &self.eigenvectors;
        CMatrix::from_fn(n, n, |i, j| indices.iter().map(|&k| v[(i, k)] * v[(j, k)].conj()).sum())
    }

    /// Groups eigenvalue indices into clusters separated by gaps larger
    /// than `gap`. Clusters come out in ascending order.
    pub fn clusters(&self, gap: f64) -> Vec<Vec<usize>> {
        let mut out: Vec<Vec<usize>> = Vec::new();
        for (k, &lambda) in self.eigenvalues.iter().enumerate() {
            match out.last_mut() {
                Some(cluster) if lambda - self.eigenvalues[*cluster.last().unwrap()] <= gap => cluster.push(k),
                _ => out.push(vec![k]),
            }
        }
        out
    }

    pub fn spectral_width(&self) -> f64 {
        match (self.eigenvalues.first(), self.eigenvalues.last()) {
            (Some(lo), Some(hi)) => hi - lo,
            _ => 0.0,
        }
    }
}

fn off_diagonal_mass(a: &CMatrix) -> f64 {
    let n = a.rows();
    let mut s = 0.0;
    for i in 0..n {
        for j in 0..n {
            if i != j {
                s += a[(i, j)].norm_sqr();
            }
        }
    }
    s.sqrt()
}

/// Eigendecomposition of a Hermitian matrix.
pub fn hermitian_eig(m: &CMatrix) -> Result<EigenDecomposition> {
    if !m.is_square() {
        return Err(Error::NotHermitian { defect: f64::INFINITY });
    }
    let scale = m.norm();
    let defect = m.hermiticity_defect();
    if defect > HERMITIAN_TOL * scale.max(1.0) {
        return Err(Error::NotHermitian { defect });
    }
    let n = m.rows();
    let mut a = m.hermitian_part();
    for i in 0..n {
        a[(i, i)] = C64::new(a[(i, i)].re, 0.0);
    }
    let mut v = CMatrix::identity(n);

    let target = OFF_DIAGONAL_TOL * scale;
    let mut converged = false;
    for _sweep in 0..MAX_SWEEPS {
        if off_diagonal_mass(&a) <= target {
            converged = true;
            break;
        }
        for p in 0..n {
            for q in (p + 1)..n {
                rotate(&mut a, &mut v, p, q);
            }
        }
    }
    if !converged && off_diagonal_mass(&a) > target {
        return Err(Error::NoConvergence { sweeps: MAX_SWEEPS });
    }

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| a[(i, i)].re.total_cmp(&a[(j, j)].re).then(i.cmp(&j)));
    let eigenvalues = order.iter().map(|&k| a[(k, k)].re).collect();
    let mut eigenvectors = CMatrix::zeros(n, n);
    for (dst, &src) in order.iter().enumerate() {
        let mut col = v.col(src);
        fix_phase(&mut col);
        eigenvectors.set_col(dst, &col);
    }
    Ok(EigenDecomposition { eigenvalues, eigenvectors })
}

/// Rotates the largest-magnitude entry (first one on ties) onto the
/// positive real axis.
fn fix_phase(col: &mut [C64]) {
    let mut best = 0;
    let mut best_abs = 0.0;
    for (i, z) in col.iter().enumerate() {
        let r = z.norm();
        if r > best_abs * (1.0 + 1e-12) {
            best = i;
            best_abs = r;
        }
    }
    if best_abs == 0.0 {
        return;
    }
    let phase = col[best].conj() / best_abs;
    for z in col.iter_mut() {
        *z *= phase;
    }
    col[best] = C64::new(col[best].re, 0.0);
}

fn rotate(a: &mut CMatrix, v: &mut CMatrix, p: usize, q: usize) {
    let b = a[(p, q)];
    let b_abs = b.norm();
    if b_abs <= f64::MIN_POSITIVE {
        return;
    }
    let app = a[(p, p)].re;
    let aqq = a[(q, q)].re;
    // the pivot is already negligible against both diagonal entries
    if b_abs <= f64::EPSILON * 1e-3 * (app.abs() + aqq.abs()) {
        a[(p, q)] = ZERO;
        a[(q, p)] = ZERO;
        return;
    }
    let e = b / b_abs;
    let theta = (aqq - app) / (2.0 * b_abs);
    let t = if theta.is_infinite() {
        0.0
    } else {
        let sign = if theta >= 0.0 { 1.0 } else { -1.0 };
        sign / (theta.abs() + (theta * theta + 1.0).sqrt())
    };
    let c = 1.0 / (1.0 + t * t).sqrt();
    let s = t * c;
    let e_bar = e.conj();
    let n = a.rows();

    // A <- A G
    for k in 0..n {
        let akp = a[(k, p)];
        let akq = a[(k, q)];
        a[(k, p)] = akp * c - akq * e_bar * s;
        a[(k, q)] = akp * s + akq * e_bar * c;
    }
    // A <- G* A
    for k in 0..n {
        let apk = a[(p, k)];
        let aqk = a[(q, k)];
        a[(p, k)] = apk * c - aqk * e * s;
        a[(q, k)] = apk * s + aqk * e * c;
    }
    a[(p, q)] = ZERO;
    a[(q, p)] = ZERO;
    a[(p, p)] = C64::new(a[(p, p)].re, 0.0);
    a[(q, q)] = C64::new(a[(q, q)].re, 0.0);
    // V <- V G
    for k in 0..n {
        let vkp = v[(k, p)];
        let vkq = v[(k, q)];
        v[(k, p)] = vkp * c - vkq * e_bar * s;
        v[(k, q)] = vkp * s + vkq * e_bar * c;
    }
}
