//! Kernels and least-squares solves without forming normal equations.
//!
//! Rows of a linear map are streamed into an upper-triangular factor with
//! Givens rotations (so the map itself never has to be materialised), and
//! the kernel is read off a one-sided Jacobi orthogonalisation of that
//! factor. Small singular values come out with absolute accuracy about
//! `ε‖L‖`, which is what lets a relative rank tolerance of `1e-9` work.

use super::matrix::{CMatrix, C64, ZERO};
use crate::error::{Error, Result};

const JACOBI_SWEEPS: usize = 60;

/// Upper-triangular factor `R` with `R*R = L*L`, built one row of `L` at a time.
#[derive(Clone, Debug)]
pub struct RowCompressor {
    n: usize,
    r: Vec<C64>,
    rows_seen: usize,
}

impl RowCompressor {
    pub fn new(n: usize) -> Self {
        RowCompressor { n, r: vec![ZERO; n * n], rows_seen: 0 }
    }

    pub fn width(&self) -> usize {
        self.n
    }

    pub fn rows_seen(&self) -> usize {
        self.rows_seen
    }

    pub fn push_row(&mut self, row: &[C64]) {
        assert_eq!(row.len(), self.n, "row width mismatch");
        self.rows_seen += 1;
        let n = self.n;
        let mut w = row.to_vec();
        for k in 0..n {
            let b = w[k];
            if b == ZERO {
                continue;
            }
            let a = self.r[k * n + k];
            let a_abs = a.norm();
            if a_abs == 0.0 {
                for j in k..n {
                    let x = self.r[k * n + j];
                    self.r[k * n + j] = w[j];
                    w[j] = -x;
                }
                continue;
            }
            let rr = a_abs.hypot(b.norm());
            let c = a_abs / rr;
            let s = (a / a_abs) * b.conj() / rr;
            let s_bar = s.conj();
            for j in k..n {
                let x = self.r[k * n + j];
                let y = w[j];
                self.r[k * n + j] = x * c + s * y;
                w[j] = -s_bar * x + y * c;
            }
        }
    }

    pub fn push_matrix(&mut self, m: &CMatrix) {
        for i in 0..m.rows() {
            self.push_row(m.row(i));
        }
    }

    pub fn factor(&self) -> CMatrix {
        CMatrix::from_vec(self.n, self.n, self.r.clone()).expect("square factor")
    }

    pub fn svd(&self) -> Result<RightSingular> {
        right_singular(&self.factor())
    }

    /// Orthonormal kernel basis: right singular vectors whose singular value
    /// is at most `tol · σ_max`.
    pub fn kernel(&self, tol: f64) -> Result<Vec<Vec<C64>>> {
        Ok(self.svd()?.kernel(tol))
    }
}

/// Singular values and right singular vectors of a matrix.
#[derive(Clone, Debug)]
pub struct RightSingular {
    /// One value per column of `vectors`, unsorted.
    pub values: Vec<f64>,
    pub vectors: CMatrix,
}

impl RightSingular {
    pub fn max_value(&self) -> f64 {
        self.values.iter().copied().fold(0.0, f64::max)
    }

    pub fn kernel(&self, tol: f64) -> Vec<Vec<C64>> {
        self.kernel_with_floor(tol, 0.0)
    }

    /// Like [`RightSingular::kernel`] but never cuts below `floor`, for maps
    /// whose exact value may be zero and whose computed value is roundoff.
    pub fn kernel_with_floor(&self, tol: f64, floor: f64) -> Vec<Vec<C64>> {
        let cutoff = (tol * self.max_value()).max(floor);
        self.values.iter().enumerate().filter(|(_, &s)| s <= cutoff).map(|(j, _)| self.vectors.col(j)).collect()
    }
}

/// One-sided (Hestenes) Jacobi: orthogonalises the columns of `a` by
/// right-multiplication with plane rotations accumulated into `V`.
pub fn right_singular(a: &CMatrix) -> Result<RightSingular> {
    let n = a.cols();
    // column-major working copy
    let mut cols: Vec<Vec<C64>> = (0..n).map(|j| a.col(j)).collect();
    let mut v: Vec<Vec<C64>> = (0..n)
        .map(|j| {
            let mut e = vec![ZERO; n];
            e[j] = C64::new(1.0, 0.0);
            e
        })
        .collect();
    // columns at roundoff level are left alone: they belong to the kernel
    let floor = (4.0 * f64::EPSILON * a.norm()).powi(2);
    let mut converged = n < 2;
    for _ in 0..JACOBI_SWEEPS {
        let mut rotated = false;
        for p in 0..n {
            for q in (p + 1)..n {
                let alpha: f64 = cols[p].iter().map(|z| z.norm_sqr()).sum();
                let beta: f64 = cols[q].iter().map(|z| z.norm_sqr()).sum();
                if alpha <= floor || beta <= floor {
                    continue;
                }
                let gamma: C64 = cols[p].iter().zip(&cols[q]).map(|(x, y)| x.conj() * y).sum();
                let g_abs = gamma.norm();
                if g_abs <= 1e-15 * (alpha * beta).sqrt() {
                    continue;
                }
                rotated = true;
                let e = gamma / g_abs;
                let e_bar = e.conj();
                let theta = (beta - alpha) / (2.0 * g_abs);
                let sign = if theta >= 0.0 { 1.0 } else { -1.0 };
                let t = sign / (theta.abs() + (theta * theta + 1.0).sqrt());
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = t * c;
                let (left, right) = cols.split_at_mut(q);
                rotate_pair(&mut left[p], &mut right[0], c, s, e_bar);
                let (left, right) = v.split_at_mut(q);
                rotate_pair(&mut left[p], &mut right[0], c, s, e_bar);
            }
        }
        if !rotated {
            converged = true;
            break;
        }
    }
    if !converged {
        return Err(Error::NoConvergence { sweeps: JACOBI_SWEEPS });
    }
    let values = cols.iter().map(|c| c.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()).collect();
    let mut vectors = CMatrix::zeros(n, n);
    for (j, col) in v.iter().enumerate() {
        vectors.set_col(j, col);
    }
    Ok(RightSingular { values, vectors })
}

fn rotate_pair(xp: &mut [C64], xq: &mut [C64], c: f64, s: f64, e_bar: C64) {
    for (a, b) in xp.iter_mut().zip(xq.iter_mut()) {
        let (x, y) = (*a, *b);
        *a = x * c - y * e_bar * s;
        *b = x * s + y * e_bar * c;
    }
}

/// Orthonormal basis of `ker L`, with `tol` relative to the operator norm of `L`.
pub fn nullspace(l: &CMatrix, tol: f64) -> Result<Vec<Vec<C64>>> {
    if tol <= 0.0 {
        return Err(Error::InvalidArgument("nullspace tolerance must be positive".into()));
    }
    let mut rc = RowCompressor::new(l.cols());
    rc.push_matrix(l);
    rc.kernel(tol)
}

/// Kernel of a map acting on row-major vectorised `dim × dim` operators,
/// returned as operators (orthonormal in the Hilbert–Schmidt inner product).
pub fn operator_nullspace(l: &CMatrix, dim: usize, tol: f64) -> Result<Vec<CMatrix>> {
    if l.cols() != dim * dim {
        return Err(Error::DimensionMismatch { expected: dim * dim, found: l.cols() });
    }
    Ok(nullspace(l, tol)?.into_iter().map(|v| CMatrix::from_vec(dim, dim, v).expect("square reshape")).collect())
}

/// Matrix of `X ↦ bX − Xb` on row-major vectorised operators.
pub fn commutation_map(b: &CMatrix) -> CMatrix {
    let d = b.rows();
    let mut l = CMatrix::zeros(d * d, d * d);
    for r in 0..d {
        for c in 0..d {
            let row = r * d + c;
            for k in 0..d {
                l[(row, k * d + c)] += b[(r, k)];
                l[(row, r * d + k)] -= b[(k, c)];
            }
        }
    }
    l
}

/// Least-squares solution of `A x ≈ b` and the residual norm `‖Ax − b‖`.
/// Pivots below `1e-12·‖A‖` are treated as zero (basic solution).
pub fn least_squares(a: &CMatrix, b: &[C64]) -> Result<(Vec<C64>, f64)> {
    let (m, n) = a.shape();
    if b.len() != m {
        return Err(Error::DimensionMismatch { expected: m, found: b.len() });
    }
    let mut rc = RowCompressor::new(n + 1);
    let mut row = vec![ZERO; n + 1];
    for i in 0..m {
        row[..n].copy_from_slice(a.row(i));
        row[n] = b[i];
        rc.push_row(&row);
    }
    let r = rc.factor();
    let pivot_floor = 1e-12 * a.norm().max(f64::MIN_POSITIVE);
    let mut x = vec![ZERO; n];
    for k in (0..n).rev() {
        let pivot = r[(k, k)];
        if pivot.norm() <= pivot_floor {
            continue;
        }
        let mut acc = r[(k, n)];
        for j in (k + 1)..n {
            acc -= r[(k, j)] * x[j];
        }
        x[k] = acc / pivot;
    }
    let ax = a.matvec(&x);
    let residual = ax.iter().zip(b).map(|(p, q)| (p - q).norm_sqr()).sum::<f64>().sqrt();
    Ok((x, residual))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::matrix::{pauli_x, pauli_z};
    use crate::random::SeededRng;

    fn stack(maps: &[CMatrix]) -> CMatrix {
        let cols = maps[0].cols();
        let rows: usize = maps.iter().map(|m| m.rows()).sum();
        let mut out = CMatrix::zeros(rows, cols);
        let mut off = 0;
        for m in maps {
            for i in 0..m.rows() {
                for j in 0..cols {
                    out[(off + i, j)] = m[(i, j)];
                }
            }
            off += m.rows();
        }
        out
    }

    /// Rank by Gaussian elimination with partial pivoting on the real
    /// embedding; independent of the Givens/Jacobi path.
    fn brute_force_rank(m: &CMatrix) -> usize {
        let (r, c) = m.shape();
        let mut a = vec![vec![0.0; 2 * c]; 2 * r];
        for i in 0..r {
            for j in 0..c {
                let z = m[(i, j)];
                a[2 * i][2 * j] = z.re;
                a[2 * i][2 * j + 1] = -z.im;
                a[2 * i + 1][2 * j] = z.im;
                a[2 * i + 1][2 * j + 1] = z.re;
            }
        }
        let (rows, cols) = (2 * r, 2 * c);
        let mut rank = 0;
        for col in 0..cols {
            let pivot = (rank..rows).max_by(|&x, &y| a[x][col].abs().total_cmp(&a[y][col].abs()));
            let Some(p) = pivot else { break };
            if a[p][col].abs() < 1e-9 {
                continue;
            }
            a.swap(rank, p);
            for i in 0..rows {
                if i != rank {
                    let f = a[i][col] / a[rank][col];
                    for j in col..cols {
                        a[i][j] -= f * a[rank][j];
                    }
                }
            }
            rank += 1;
        }
        rank / 2
    }

    #[test]
    fn commutant_of_diag_is_diagonal() {
        let l = commutation_map(&CMatrix::diag_real(&[1.0, 2.0]));
        let k = operator_nullspace(&l, 2, 1e-9).unwrap();
        assert_eq!(k.len(), 2);
        for x in &k {
            assert!(x[(0, 1)].norm() < 1e-12 && x[(1, 0)].norm() < 1e-12);
        }
    }

    #[test]
    fn commutant_of_identity_is_everything() {
        let l = commutation_map(&CMatrix::identity(2));
        assert_eq!(operator_nullspace(&l, 2, 1e-9).unwrap().len(), 4);
    }

    #[test]
    fn joint_commutant_of_x_and_z_is_scalars() {
        let l = stack(&[commutation_map(&pauli_x()), commutation_map(&pauli_z())]);
        let oracle_dim = 4 - brute_force_rank(&l);
        assert_eq!(oracle_dim, 1);
        let k = operator_nullspace(&l, 2, 1e-9).unwrap();
        assert_eq!(k.len(), oracle_dim);
        // the kernel vector is proportional to the identity
        let x = &k[0];
        assert!((x[(0, 0)] - x[(1, 1)]).norm() < 1e-12);
        assert!((x.norm() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn kernel_vectors_are_annihilated_and_orthonormal() {
        let mut rng = SeededRng::new(99);
        // rank 3 map on C^6
        let a = rng.complex_matrix(3, 6);
        let b = rng.complex_matrix(5, 3);
        let l = &b * &a;
        let k = nullspace(&l, 1e-9).unwrap();
        assert_eq!(k.len(), 3);
        assert_eq!(k.len(), 6 - brute_force_rank(&l));
        let op_norm = right_singular(&l).unwrap().max_value();
        for (i, u) in k.iter().enumerate() {
            let lu = l.matvec(u);
            let n: f64 = lu.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
            assert!(n <= 1e-9 * op_norm, "‖Lv‖ = {n}");
            for (j, w) in k.iter().enumerate() {
                let ip: C64 = u.iter().zip(w).map(|(x, y)| x.conj() * y).sum();
                let expect = if i == j { 1.0 } else { 0.0 };
                assert!((ip - expect).norm() < 1e-12);
            }
        }
    }

    #[test]
    fn trivial_kernel_is_empty() {
        let mut rng = SeededRng::new(5);
        let l = rng.complex_matrix(6, 4);
        assert!(nullspace(&l, 1e-9).unwrap().is_empty());
    }

    #[test]
    fn nonpositive_tolerance_is_rejected() {
        assert!(nullspace(&CMatrix::identity(2), 0.0).is_err());
    }

    #[test]
    fn least_squares_recovers_consistent_solution() {
        let mut rng = SeededRng::new(11);
        let a = rng.complex_matrix(7, 4);
        let x: Vec<C64> = (0..4).map(|k| C64::new(k as f64, 1.0 - k as f64)).collect();
        let b = a.matvec(&x);
        let (sol, res) = least_squares(&a, &b).unwrap();
        assert!(res < 1e-12);
        for (p, q) in sol.iter().zip(&x) {
            assert!((p - q).norm() < 1e-10);
        }
    }

    #[test]
    fn least_squares_reports_inconsistency() {
        let a = CMatrix::from_real_rows(&[&[1.0], &[1.0]]);
        let b = [C64::new(1.0, 0.0), C64::new(-1.0, 0.0)];
        let (sol, res) = least_squares(&a, &b).unwrap();
        assert!(sol[0].norm() < 1e-15);
        assert!((res - 2f64.sqrt()).abs() < 1e-12);
    }
}
