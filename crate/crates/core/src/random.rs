//! Seeded fixture generators.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::linalg::{hermitian_eig, vec_norm, CMatrix, C64};

/// Deterministic generator for random matrices, states and PVMs.
pub struct SeededRng {
    seed: u64,
    rng: ChaCha8Rng,
}

impl SeededRng {
    pub fn new(seed: u64) -> Self {
        SeededRng { seed, rng: ChaCha8Rng::seed_from_u64(seed) }
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn normal(&mut self) -> f64 {
        self.rng.sample(StandardNormal)
    }

    pub fn uniform(&mut self) -> f64 {
        self.rng.random::<f64>()
    }

    pub fn index(&mut self, n: usize) -> usize {
        self.rng.random_range(0..n)
    }

    pub fn complex(&mut self) -> C64 {
        C64::new(self.normal(), self.normal())
    }

    pub fn complex_vector(&mut self, n: usize) -> Vec<C64> {
        (0..n).map(|_| self.complex()).collect()
    }

    pub fn complex_matrix(&mut self, rows: usize, cols: usize) -> CMatrix {
        CMatrix::from_fn(rows, cols, |_, _| self.complex())
    }

    pub fn hermitian(&mut self, n: usize) -> CMatrix {
        self.complex_matrix(n, n).hermitian_part()
    }

    pub fn unit_vector(&mut self, n: usize) -> Vec<C64> {
        let v = self.complex_vector(n);
        let norm = vec_norm(&v);
        v.into_iter().map(|z| z / norm).collect()
    }

    /// Full-rank density `G G* / tr(G G*)`.
    pub fn density(&mut self, n: usize) -> CMatrix {
        let g = self.complex_matrix(n, n);
        let rho = &g * &g.adjoint();
        let t = rho.trace().re;
        rho.scale_real(1.0 / t).hermitian_part()
    }

    /// Unitary from the eigenvectors of a random Hermitian matrix.
    pub fn unitary(&mut self, n: usize) -> CMatrix {
        let h = self.hermitian(n);
        hermitian_eig(&h).expect("random Hermitian matrix diagonalises").eigenvectors
    }

    /// Hermitian matrix with the given spectrum in a random eigenbasis.
    pub fn observable_with_spectrum(&mut self, spectrum: &[f64]) -> CMatrix {
        let u = self.unitary(spectrum.len());
        &(&u * &CMatrix::diag_real(spectrum)) * &u.adjoint()
    }
}
