mod common;

use common::{block_dim, random_algebra, random_state, rotated_blocks};
use proptest::prelude::*;
use qsector::linalg::{dot, CMatrix, C64};
use qsector::random::SeededRng;
use qsector::sector::{
    are_disjoint, are_quasi_equivalent, central_measure, commutant, subcentral_measure, SectorLabel,
};
use qsector::state::gram_matrix;
use qsector::{gns, StarAlgebra, State};

fn config(cases: u32) -> ProptestConfig {
    ProptestConfig { cases, ..ProptestConfig::default() }
}

fn mutual_containment(a: &StarAlgebra, b: &StarAlgebra) -> f64 {
    let ab = a.basis().iter().map(|x| b.residual(x).unwrap()).fold(0.0, f64::max);
    let ba = b.basis().iter().map(|x| a.residual(x).unwrap()).fold(0.0, f64::max);
    ab.max(ba)
}

proptest! {
    #![proptest_config(config(24))]

    #[test]
    fn regenerating_from_basis_is_idempotent(seed in any::<u64>(), kind in 0usize..5) {
        let mut rng = SeededRng::new(seed);
        let a = random_algebra(&mut rng, kind);
        let again = StarAlgebra::generate(a.basis(), a.ambient_dim()).unwrap();
        prop_assert_eq!(again.dim(), a.dim());
        prop_assert!(mutual_containment(&a, &again) <= 1e-9);
    }

    #[test]
    fn generators_are_contained(seed in any::<u64>(), d in 2usize..6, count in 1usize..3) {
        let mut rng = SeededRng::new(seed);
        let gens: Vec<CMatrix> = (0..count).map(|_| rng.complex_matrix(d, d)).collect();
        let a = StarAlgebra::generate(&gens, d).unwrap();
        for g in &gens {
            prop_assert!(a.contains(g).unwrap().0);
            prop_assert!(a.contains(&g.adjoint()).unwrap().0);
        }
    }

    #[test]
    fn tensor_dimension_multiplies(seed in any::<u64>(), k1 in 0usize..5, k2 in 0usize..2) {
        let mut rng = SeededRng::new(seed);
        let a = random_algebra(&mut rng, k1);
        let b = StarAlgebra::generate(&[rng.hermitian(2 + k2)], 2 + k2).unwrap();
        prop_assert_eq!(StarAlgebra::tensor(&a, &b).dim(), a.dim() * b.dim());
    }

    #[test]
    fn block_algebra_dimension(seed in any::<u64>()) {
        let mut rng = SeededRng::new(seed);
        let blocks = [(2, 1), (1, 3)];
        prop_assert_eq!(rotated_blocks(&mut rng, &blocks).dim(), block_dim(&blocks));
    }

    #[test]
    fn gns_reproduces_and_is_multiplicative(seed in any::<u64>(), kind in 0usize..5, faithful in any::<bool>()) {
        let mut rng = SeededRng::new(seed);
        let a = random_algebra(&mut rng, kind);
        let omega = random_state(&mut rng, a.ambient_dim(), faithful);
        let rep = gns(&a, &omega).unwrap();
        let cyc = rep.cyclic_vector();
        for (b, pb) in a.basis().iter().zip(rep.rep_matrices()) {
            let lhs = dot(cyc, &pb.matvec(cyc));
            prop_assert!((lhs - omega.eval(b)).norm() <= 1e-10);
            let adj = rep.transfer(&b.adjoint()).unwrap();
            prop_assert!(adj.distance(&pb.adjoint()) <= 1e-9);
        }
        for (i, bi) in a.basis().iter().enumerate() {
            for (j, bj) in a.basis().iter().enumerate() {
                let prod = rep.transfer(&(bi * bj)).unwrap();
                let pp = &rep.rep_matrices()[i] * &rep.rep_matrices()[j];
                prop_assert!(prod.distance(&pp) <= 1e-9);
            }
        }
    }

    #[test]
    fn gns_vectors_reproduce_gram_data(seed in any::<u64>(), kind in 0usize..5) {
        let mut rng = SeededRng::new(seed);
        let a = random_algebra(&mut rng, kind);
        let omega = random_state(&mut rng, a.ambient_dim(), seed % 2 == 0);
        let r1 = gns(&a, &omega).unwrap();
        let r2 = gns(&a, &omega).unwrap();
        let g = gram_matrix(&a, &omega);
        for rep in [&r1, &r2] {
            let vecs: Vec<Vec<C64>> = rep.rep_matrices().iter().map(|p| p.matvec(rep.cyclic_vector())).collect();
            for i in 0..a.dim() {
                for j in 0..a.dim() {
                    prop_assert!((dot(&vecs[i], &vecs[j]) - g[(i, j)]).norm() <= 1e-9);
                }
            }
        }
        prop_assert_eq!(r1.gns_dim(), r2.gns_dim());
    }
}

proptest! {
    #![proptest_config(config(12))]

    #[test]
    fn double_commutant_recovers_algebra(seed in any::<u64>(), kind in 0usize..5) {
        let mut rng = SeededRng::new(seed);
        let a = random_algebra(&mut rng, kind);
        let cc = commutant(&commutant(&a).unwrap()).unwrap();
        prop_assert_eq!(cc.dim(), a.dim());
        prop_assert!(mutual_containment(&a, &cc) <= 1e-8);
    }

    #[test]
    fn central_measure_barycenter(seed in any::<u64>(), kind in 0usize..5, faithful in any::<bool>()) {
        let mut rng = SeededRng::new(seed);
        let a = random_algebra(&mut rng, kind);
        let omega = random_state(&mut rng, a.ambient_dim(), faithful);
        let rep = gns(&a, &omega).unwrap();
        let mu = central_measure(&rep, &omega).unwrap();
        prop_assert!(mu.barycenter_residual(&omega) <= 1e-9);
        prop_assert!((mu.weights().iter().sum::<f64>() - 1.0).abs() <= 1e-10);
    }

    #[test]
    fn label_subsets_split_into_disjoint_states(seed in any::<u64>(), mask in any::<u8>()) {
        let mut rng = SeededRng::new(seed);
        let a = rotated_blocks(&mut rng, &[(1, 1), (2, 1), (1, 2)]);
        let omega = random_state(&mut rng, a.ambient_dim(), true);
        let rep = gns(&a, &omega).unwrap();
        let mu = central_measure(&rep, &omega).unwrap();
        prop_assert_eq!(mu.components.len(), 3);
        let delta: Vec<SectorLabel> =
            mu.labels().into_iter().enumerate().filter(|(k, _)| mask >> k & 1 == 1).map(|(_, l)| l).collect();
        if let (Some(inside), Some(outside)) = (mu.partial_barycenter(&delta, false), mu.partial_barycenter(&delta, true)) {
            prop_assert!(are_disjoint(&a, &inside, &outside).unwrap());
        }
    }

    #[test]
    fn coarse_measure_merges_fine_components(seed in any::<u64>(), pair in 0usize..3) {
        let mut rng = SeededRng::new(seed);
        let a = rotated_blocks(&mut rng, &[(1, 1), (2, 1), (1, 1)]);
        let omega = random_state(&mut rng, a.ambient_dim(), true);
        let rep = gns(&a, &omega).unwrap();
        let fine = central_measure(&rep, &omega).unwrap();
        prop_assert_eq!(fine.components.len(), 3);
        let (i, j) = [(0, 1), (0, 2), (1, 2)][pair];
        let merged = &fine.components[i].projection + &fine.components[j].projection;
        let coarse_alg = StarAlgebra::generate(std::slice::from_ref(&merged), rep.gns_dim()).unwrap();
        let coarse = subcentral_measure(&rep, &omega, &coarse_alg).unwrap();
        prop_assert_eq!(coarse.components.len(), 2);
        for c in &coarse.components {
            let parts: Vec<_> = fine
                .components
                .iter()
                .filter(|f| (&c.projection * &f.projection).distance(&f.projection) <= 1e-8)
                .collect();
            let w: f64 = parts.iter().map(|f| f.weight).sum();
            prop_assert!((w - c.weight).abs() <= 1e-10);
            let mut mix = CMatrix::zeros(a.ambient_dim(), a.ambient_dim());
            for f in &parts {
                mix.axpy(C64::new(f.weight / w, 0.0), f.state.density());
            }
            for b in a.basis() {
                prop_assert!((State::functional(mix.hermitian_part()).unwrap().eval(b) - c.state.eval(b)).norm() <= 1e-9);
            }
        }
    }

    #[test]
    fn factor_states_are_disjoint_or_equivalent(seed in any::<u64>(), b1 in 0usize..3, b2 in 0usize..3) {
        // pure states supported in one direct summand are factor states
        let blocks = [1usize, 2, 2];
        let a = StarAlgebra::direct_sum(&blocks).unwrap();
        let mut rng = SeededRng::new(seed);
        let offsets = [0usize, 1, 3];
        let mut block_state = |b: usize| {
            let v = rng.unit_vector(blocks[b]);
            let mut full = vec![C64::new(0.0, 0.0); 5];
            full[offsets[b]..offsets[b] + blocks[b]].copy_from_slice(&v);
            State::from_vector(&full).unwrap()
        };
        let s1 = block_state(b1);
        let s2 = block_state(b2);
        let disjoint = are_disjoint(&a, &s1, &s2).unwrap();
        let equivalent = are_quasi_equivalent(&a, &s1, &s2).unwrap();
        prop_assert!(disjoint != equivalent);
        prop_assert_eq!(equivalent, b1 == b2);
    }
}
