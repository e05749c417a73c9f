#![allow(dead_code)]

use qsector::linalg::{kron, CMatrix, C64};
use qsector::random::SeededRng;
use qsector::{StarAlgebra, State};

/// `U (⊕_k M_{n_k} ⊗ 1_{m_k}) U*` for `blocks = [(n_k, m_k)]`.
pub fn rotated_blocks(rng: &mut SeededRng, blocks: &[(usize, usize)]) -> StarAlgebra {
    let d: usize = blocks.iter().map(|(n, m)| n * m).sum();
    let u = rng.unitary(d);
    let mut gens = Vec::new();
    let mut offset = 0;
    for &(n, m) in blocks {
        for i in 0..n {
            for j in 0..n {
                let local = kron(&CMatrix::unit(n, i, j), &CMatrix::identity(m));
                let mut g = CMatrix::zeros(d, d);
                for r in 0..n * m {
                    for c in 0..n * m {
                        g[(offset + r, offset + c)] = local[(r, c)];
                    }
                }
                gens.push(&(&u * &g) * &u.adjoint());
            }
        }
        offset += n * m;
    }
    StarAlgebra::generate(&gens, d).unwrap()
}

/// Expected dimension of [`rotated_blocks`].
pub fn block_dim(blocks: &[(usize, usize)]) -> usize {
    blocks.iter().map(|(n, _)| n * n).sum()
}

/// A seeded algebra of one of several shapes, ambient dimension ≤ 8.
pub fn random_algebra(rng: &mut SeededRng, kind: usize) -> StarAlgebra {
    match kind % 5 {
        0 => {
            let d = 2 + rng.index(5);
            StarAlgebra::generate(&[rng.hermitian(d)], d).unwrap()
        }
        1 => {
            let d = 2 + rng.index(3);
            StarAlgebra::generate(&[rng.complex_matrix(d, d)], d).unwrap()
        }
        2 => rotated_blocks(rng, &[(2, 1), (1, 2)]),
        3 => rotated_blocks(rng, &[(1, 1), (2, 2), (1, 1)]),
        _ => {
            let spectrum = [0.0, 0.0, 1.0, 2.0, 2.0, 2.0];
            StarAlgebra::generate(&[rng.observable_with_spectrum(&spectrum)], 6).unwrap()
        }
    }
}

pub fn random_state(rng: &mut SeededRng, d: usize, faithful: bool) -> State {
    if faithful {
        State::from_density(rng.density(d)).unwrap()
    } else {
        State::from_vector(&rng.unit_vector(d)).unwrap()
    }
}

pub fn real(x: f64) -> C64 {
    C64::new(x, 0.0)
}
