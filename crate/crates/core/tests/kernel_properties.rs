use proptest::prelude::*;
use qsector::linalg::{hermitian_eig, kron, nullspace, vec_norm, CMatrix};
use qsector::random::SeededRng;

fn config() -> ProptestConfig {
    ProptestConfig { cases: 48, ..ProptestConfig::default() }
}

proptest! {
    #![proptest_config(config())]

    #[test]
    fn spectral_reconstruction(seed in any::<u64>(), d in 1usize..9) {
        let mut rng = SeededRng::new(seed);
        let m = rng.hermitian(d);
        let eig = hermitian_eig(&m).unwrap();
        let mut sum = CMatrix::zeros(d, d);
        for k in 0..d {
            let p = eig.projection(&[k]);
            sum.axpy(qsector::C64::new(eig.eigenvalues[k], 0.0), &p);
        }
        prop_assert!(sum.distance(&m) <= 1e-10 * m.norm().max(1.0));
        for w in eig.eigenvalues.windows(2) {
            prop_assert!(w[0] <= w[1]);
        }
    }

    #[test]
    fn nullspace_vectors_are_annihilated(seed in any::<u64>(), n in 2usize..10, rank_cut in 0usize..9) {
        let mut rng = SeededRng::new(seed);
        let rank = rank_cut.min(n - 1);
        let l = &rng.complex_matrix(n + 2, rank) * &rng.complex_matrix(rank, n);
        let tol = 1e-9;
        let kernel = nullspace(&l, tol).unwrap();
        prop_assert_eq!(kernel.len(), n - rank);
        for v in &kernel {
            prop_assert!((vec_norm(v) - 1.0).abs() < 1e-10);
            prop_assert!(vec_norm(&l.matvec(v)) <= tol * l.norm().max(1.0));
        }
    }

    #[test]
    fn kron_is_associative(seed in any::<u64>(), a in 1usize..4, b in 1usize..4, c in 1usize..4) {
        // Gaussian-integer entries keep every product exact
        let mut rng = SeededRng::new(seed);
        let mut int = |r: usize, k: usize| {
            CMatrix::from_fn(r, k, |_, _| {
                qsector::C64::new(rng.index(7) as f64 - 3.0, rng.index(7) as f64 - 3.0)
            })
        };
        let x = int(a, b);
        let y = int(b, c);
        let z = int(c, a);
        prop_assert_eq!(kron(&kron(&x, &y), &z), kron(&x, &kron(&y, &z)));
    }
}
