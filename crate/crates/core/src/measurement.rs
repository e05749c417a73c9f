//! Measurement processes: an interaction unitary on object ⊗ pointer plus an
//! apparatus state on the pointer.
//!
//! The pointer is the cyclic group `Z_n` with one position per outcome. The
//! coupling `U = Σ_j E_j ⊗ S^j` moves the pointer from position 0 to position
//! `j` when the object sits in the `j`-th eigenspace.

use crate::algebra::StarAlgebra;
use crate::error::{Error, Result};
use crate::linalg::{cyclic_shift, hermitian_eig, kron, partial_trace_first, CMatrix, C64, ONE, ZERO};
use crate::sector::{subcentral_measure, SectorLabel, SubcentralMeasure};
use crate::state::{gns, State};
use crate::tol::{CHECK_TOL, LABEL_TOL};

const UNITARY_TOL: f64 = 1e-10;
const INVARIANCE_TOL: f64 = 1e-8;

/// Projection-valued measure with finitely many real outcomes.
#[derive(Clone, Debug)]
pub struct Pvm {
    outcomes: Vec<f64>,
    projections: Vec<CMatrix>,
}

impl Pvm {
    /// Validates orthogonality, idempotence, self-adjointness and
    /// completeness. Outcomes must be strictly ascending.
    pub fn new(outcomes: Vec<f64>, projections: Vec<CMatrix>) -> Result<Self> {
        if outcomes.is_empty() || outcomes.len() != projections.len() {
            return Err(Error::InvalidArgument(format!(
                "{} outcomes for {} projections",
                outcomes.len(),
                projections.len()
            )));
        }
        if outcomes.windows(2).any(|w| !(w[1] - w[0] > LABEL_TOL * w[0].abs().max(w[1].abs()).max(1.0))) {
            return Err(Error::InvalidArgument("outcomes must be strictly ascending and distinguishable".into()));
        }
        let d = projections[0].rows();
        let mut total = CMatrix::zeros(d, d);
        for (i, p) in projections.iter().enumerate() {
            if p.shape() != (d, d) {
                return Err(Error::DimensionMismatch { expected: d, found: p.rows().max(p.cols()) });
            }
            let herm = p.hermiticity_defect();
            if herm > CHECK_TOL {
                return Err(Error::NotHermitian { defect: herm });
            }
            let idem = (p * p).distance(p);
            if idem > CHECK_TOL {
                return Err(Error::InvalidArgument(format!("projection {i} not idempotent ({idem:e})")));
            }
            for q in &projections[i + 1..] {
                let overlap = (p * q).norm();
                if overlap > CHECK_TOL {
                    return Err(Error::InvalidArgument(format!("projections overlap ({overlap:e})")));
                }
            }
            total += p;
        }
        let completeness = total.distance(&CMatrix::identity(d));
        if completeness > CHECK_TOL {
            return Err(Error::InvalidArgument(format!("projections sum to identity only within {completeness:e}")));
        }
        Ok(Pvm { outcomes, projections })
    }

    pub fn outcomes(&self) -> &[f64] {
        &self.outcomes
    }

    pub fn projections(&self) -> &[CMatrix] {
        &self.projections
    }

    pub fn len(&self) -> usize {
        self.outcomes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.outcomes.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.projections[0].rows()
    }

    /// Position of the outcome matching `value` within the label tolerance.
    pub fn index_of(&self, value: f64) -> Result<usize> {
        self.outcomes
            .iter()
            .position(|&a| (a - value).abs() <= LABEL_TOL * a.abs().max(1.0))
            .ok_or(Error::UnknownOutcome(value))
    }

    /// Sorted, deduplicated outcome indices for a set of outcome values.
    pub fn indices_of(&self, delta: &[f64]) -> Result<Vec<usize>> {
        let mut idx = delta.iter().map(|&v| self.index_of(v)).collect::<Result<Vec<_>>>()?;
        idx.sort_unstable();
        idx.dedup();
        Ok(idx)
    }

    /// `E(Δ) = Σ_{a_j ∈ Δ} E_j`
    pub fn projection_for(&self, delta: &[f64]) -> Result<CMatrix> {
        let d = self.dim();
        let mut out = CMatrix::zeros(d, d);
        for j in self.indices_of(delta)? {
            out += &self.projections[j];
        }
        Ok(out)
    }

    /// `Σ_j a_j E_j`
    pub fn observable(&self) -> CMatrix {
        let d = self.dim();
        let mut out = CMatrix::zeros(d, d);
        for (a, p) in self.outcomes.iter().zip(&self.projections) {
            out.axpy(C64::new(*a, 0.0), p);
        }
        out
    }

    /// The same outcomes with projections `E_j ⊗ 1_n`.
    pub fn tensor_identity(&self, n: usize) -> Pvm {
        let id = CMatrix::identity(n);
        Pvm { outcomes: self.outcomes.clone(), projections: self.projections.iter().map(|p| kron(p, &id)).collect() }
    }

    /// Indicator of `delta` as a function on outcome positions.
    pub fn indicator(&self, delta: &[f64]) -> Result<Vec<C64>> {
        let mut f = vec![ZERO; self.len()];
        for j in self.indices_of(delta)? {
            f[j] = ONE;
        }
        Ok(f)
    }
}

/// Spectral projections of a Hermitian matrix. Eigenvalues separated by more
/// than `cluster_tol` times the spectral width start a new outcome; each
/// outcome is labelled by the mean of its cluster.
///
/// The width is floored at the spectral radius so that a scalar matrix
/// carrying roundoff does not split into spurious outcomes.
pub fn pvm_from_observable(a: &CMatrix, cluster_tol: f64) -> Result<Pvm> {
    let eig = hermitian_eig(a)?;
    let radius = eig.eigenvalues.iter().fold(0.0_f64, |m, v| m.max(v.abs()));
    let gap = cluster_tol * eig.spectral_width().max(radius);
    let clusters = eig.clusters(gap);
    let outcomes =
        clusters.iter().map(|c| c.iter().map(|&k| eig.eigenvalues[k]).sum::<f64>() / c.len() as f64).collect();
    let projections = clusters.iter().map(|c| eig.projection(c)).collect();
    Pvm::new(outcomes, projections)
}

/// Diagonal algebra on the `n` points of the pointer.
pub fn pointer_algebra(n: usize) -> StarAlgebra {
    StarAlgebra::diagonal(n)
}

/// `Σ_j E_j ⊗ S^j` with `S` the cyclic shift on `ℂⁿ`.
pub fn kac_takesaki_unitary(pvm: &Pvm) -> CMatrix {
    coupling(pvm, &(0..pvm.len()).collect::<Vec<_>>())
}

/// `Σ_j E_{σ(j)} ⊗ S^j`
fn coupling(pvm: &Pvm, sigma: &[usize]) -> CMatrix {
    let n = pvm.len();
    let d = pvm.dim();
    let s = cyclic_shift(n);
    let mut u = CMatrix::zeros(d * n, d * n);
    let mut power = CMatrix::identity(n);
    for &k in sigma {
        u += &kron(&pvm.projections[k], &power);
        power = &s * &power;
    }
    u
}

/// Point mass at pointer position `k`.
pub fn pointer_position(n: usize, k: usize) -> State {
    State::from_trusted(CMatrix::unit(n, k, k))
}

#[derive(Clone, Debug)]
pub struct MeasurementProcess {
    unitary: CMatrix,
    apparatus: State,
    pvm: Pvm,
    object: StarAlgebra,
}

impl MeasurementProcess {
    /// Checks unitarity of `unitary` and that `Ad U` keeps the generators
    /// `E_j ⊗ 1` and `1 ⊗ e_kk` inside `object ⊗ D_n`.
    pub fn new(unitary: CMatrix, apparatus: State, pvm: Pvm, object: StarAlgebra) -> Result<Self> {
        let n = pvm.len();
        let d = pvm.dim();
        if object.ambient_dim() != d {
            return Err(Error::DimensionMismatch { expected: d, found: object.ambient_dim() });
        }
        if apparatus.dim() != n {
            return Err(Error::DimensionMismatch { expected: n, found: apparatus.dim() });
        }
        if unitary.shape() != (d * n, d * n) {
            return Err(Error::DimensionMismatch { expected: d * n, found: unitary.rows().max(unitary.cols()) });
        }
        for p in pvm.projections() {
            let (inside, residual) = object.contains(p)?;
            if !inside {
                return Err(Error::NotInAlgebra { residual });
            }
        }
        let defect = (&unitary.adjoint() * &unitary).distance(&CMatrix::identity(d * n));
        if defect > UNITARY_TOL {
            return Err(Error::NotUnitary { defect });
        }
        let process = MeasurementProcess { unitary, apparatus, pvm, object };
        let residual = process.invariance_residual()?;
        if residual > INVARIANCE_TOL {
            return Err(Error::NotInAlgebra { residual });
        }
        Ok(process)
    }

    pub fn unitary(&self) -> &CMatrix {
        &self.unitary
    }

    pub fn apparatus(&self) -> &State {
        &self.apparatus
    }

    pub fn pvm(&self) -> &Pvm {
        &self.pvm
    }

    pub fn object_algebra(&self) -> &StarAlgebra {
        &self.object
    }

    pub fn pointer_dim(&self) -> usize {
        self.pvm.len()
    }

    pub fn object_dim(&self) -> usize {
        self.pvm.dim()
    }

    pub fn composite_dim(&self) -> usize {
        self.object_dim() * self.pointer_dim()
    }

    /// `object ⊗ D_n`
    pub fn composite_algebra(&self) -> StarAlgebra {
        StarAlgebra::tensor(&self.object, &pointer_algebra(self.pointer_dim()))
    }

    /// `α(X) = U* X U`
    pub fn alpha(&self, x: &CMatrix) -> CMatrix {
        &(&self.unitary.adjoint() * x) * &self.unitary
    }

    /// Worst residual of `α` applied to the checked generating set.
    pub fn invariance_residual(&self) -> Result<f64> {
        let n = self.pointer_dim();
        let composite = self.composite_algebra();
        let mut probes: Vec<CMatrix> = self.pvm.tensor_identity(n).projections;
        let id = CMatrix::identity(self.object_dim());
        probes.extend((0..n).map(|k| kron(&id, &CMatrix::unit(n, k, k))));
        let mut worst: f64 = 0.0;
        for p in &probes {
            worst = worst.max(composite.residual(&self.alpha(p))?);
        }
        Ok(worst)
    }

    fn check_object_state(&self, phi: &State) -> Result<()> {
        if phi.dim() != self.object_dim() {
            return Err(Error::DimensionMismatch { expected: self.object_dim(), found: phi.dim() });
        }
        Ok(())
    }

    /// `φ̃ ⊗ ψ` on the composite, before the interaction.
    pub fn initial_state(&self, phi: &State) -> Result<State> {
        self.check_object_state(phi)?;
        Ok(phi.product(&self.apparatus))
    }

    /// `φ_𝔪(X) = (φ̃⊗ψ)(U* X U)`, as the density `U (ρ⊗σ) U*`.
    pub fn post_state(&self, phi: &State) -> Result<State> {
        let initial = self.initial_state(phi)?;
        let rho = &(&self.unitary * initial.density()) * &self.unitary.adjoint();
        Ok(State::from_trusted(rho.hermitian_part()))
    }

    /// `χ_Δ` on the pointer, with outcome `a_j` read at position `j`.
    pub fn pointer_indicator(&self, delta: &[f64]) -> Result<CMatrix> {
        let f = self.pvm.indicator(delta)?;
        Ok(CMatrix::diag(&f))
    }

    /// `(φ̃⊗ψ)(U*(1⊗χ_Δ)U)`
    pub fn generalized_born(&self, phi: &State, delta: &[f64]) -> Result<f64> {
        let chi = self.pointer_indicator(delta)?;
        let post = self.post_state(phi)?;
        Ok(post.eval(&kron(&CMatrix::identity(self.object_dim()), &chi)).re)
    }

    /// `Σ_j f(a_j) (φ̃⊗ψ)(U*(X̃⊗e_jj)U)` for `f` given per outcome position.
    pub fn instrument_functional_composite(&self, phi: &State, f: &[C64], x: &CMatrix) -> Result<C64> {
        let n = self.pointer_dim();
        if f.len() != n {
            return Err(Error::DimensionMismatch { expected: n, found: f.len() });
        }
        if x.shape() != (self.object_dim(), self.object_dim()) {
            return Err(Error::DimensionMismatch { expected: self.object_dim(), found: x.rows() });
        }
        let post = self.post_state(phi)?;
        Ok(post.eval(&kron(x, &CMatrix::diag(f))))
    }

    /// PVM `Δ ↦ U*(1⊗χ_Δ)U` on the composite, labelled by the outcomes.
    pub fn readout_pvm(&self) -> Pvm {
        let n = self.pointer_dim();
        let id = CMatrix::identity(self.object_dim());
        let projections = (0..n).map(|k| self.alpha(&kron(&id, &CMatrix::unit(n, k, k))).hermitian_part()).collect();
        Pvm { outcomes: self.pvm.outcomes.clone(), projections }
    }

    /// PVM `Δ ↦ E^A(Δ) ⊗ 1` on the composite.
    pub fn object_pvm(&self) -> Pvm {
        self.pvm.tensor_identity(self.pointer_dim())
    }

    /// Decomposition of the post-measurement state over `𝓑 = 1 ⊗ D_n`.
    pub fn pointer_sectors(&self, phi: &State) -> Result<PointerSectors> {
        let post = self.post_state(phi)?;
        let composite = self.composite_algebra();
        let rep = gns(&composite, &post)?;
        let n = self.pointer_dim();
        let d = self.object_dim();
        let id = CMatrix::identity(d);
        let mut gens = Vec::with_capacity(n);
        for k in 0..n {
            gens.push(rep.transfer(&kron(&id, &CMatrix::unit(n, k, k)))?);
        }
        let b = StarAlgebra::generate(&gens, rep.gns_dim())?;
        let measure = subcentral_measure(&rep, &post, &b)?;
        let mut positions = Vec::with_capacity(measure.components.len());
        for c in &measure.components {
            let marginal = partial_trace_first(c.state.density(), d, n);
            let (k, _) = (0..n).map(|k| (k, marginal[(k, k)].re)).fold((0, f64::NEG_INFINITY), |best, cur| {
                if cur.1 > best.1 {
                    cur
                } else {
                    best
                }
            });
            let purity_residual = marginal.distance(&CMatrix::unit(n, k, k));
            positions.push(PointerPosition {
                label: c.label.clone(),
                position: k,
                outcome: self.pvm.outcomes[k],
                purity_residual,
            });
        }
        Ok(PointerSectors { measure, positions })
    }
}

/// Ideal measurement: Kac–Takesaki coupling, pointer at position 0, object
/// algebra `B(H)`.
pub fn ideal_measurement(pvm: &Pvm) -> MeasurementProcess {
    let n = pvm.len();
    MeasurementProcess {
        unitary: kac_takesaki_unitary(pvm),
        apparatus: pointer_position(n, 0),
        object: StarAlgebra::full(pvm.dim()),
        pvm: pvm.clone(),
    }
}

/// Ideal measurement with a different apparatus state.
pub fn measurement_with_apparatus(pvm: &Pvm, apparatus: State) -> Result<MeasurementProcess> {
    MeasurementProcess::new(kac_takesaki_unitary(pvm), apparatus, pvm.clone(), StarAlgebra::full(pvm.dim()))
}

/// Coupling with the eigenspaces of outcomes `i` and `j` attached to each
/// other's pointer shifts. The result is a valid process whose pointer no
/// longer reads `A` faithfully.
pub fn swapped_coupling(pvm: &Pvm, i: usize, j: usize) -> Result<MeasurementProcess> {
    let n = pvm.len();
    if i >= n || j >= n {
        return Err(Error::InvalidArgument(format!("swap ({i}, {j}) out of range for {n} outcomes")));
    }
    let mut sigma: Vec<usize> = (0..n).collect();
    sigma.swap(i, j);
    MeasurementProcess::new(coupling(pvm, &sigma), pointer_position(n, 0), pvm.clone(), StarAlgebra::full(pvm.dim()))
}

/// Sector of the post-measurement state attached to a pointer reading.
#[derive(Clone, Debug)]
pub struct PointerPosition {
    pub label: SectorLabel,
    pub position: usize,
    pub outcome: f64,
    /// `‖Tr_obj ρ_k − e_γγ‖` for the sector state `ρ_k`.
    pub purity_residual: f64,
}

#[derive(Clone, Debug)]
pub struct PointerSectors {
    pub measure: SubcentralMeasure,
    pub positions: Vec<PointerPosition>,
}

impl PointerSectors {
    /// Sector probability of the pointer showing an outcome in `delta`.
    pub fn probability(&self, delta: &[usize]) -> f64 {
        self.positions
            .iter()
            .zip(&self.measure.components)
            .filter(|(p, _)| delta.contains(&p.position))
            .map(|(_, c)| c.weight)
            .sum()
    }

    pub fn max_purity_residual(&self) -> f64 {
        self.positions.iter().map(|p| p.purity_residual).fold(0.0, f64::max)
    }

    /// Sector-label form of a function on pointer positions.
    pub fn label_function(&self, f: &[C64]) -> Vec<(SectorLabel, C64)> {
        let mut out: Vec<(SectorLabel, C64)> =
            self.positions.iter().map(|p| (p.label.clone(), f[p.position])).collect();
        out.extend(self.measure.suppressed.iter().map(|(l, _)| (l.clone(), ZERO)));
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{pauli_x, pauli_z};
    use crate::random::SeededRng;

    fn plus() -> State {
        let h = std::f64::consts::FRAC_1_SQRT_2;
        State::from_vector(&[C64::new(h, 0.0), C64::new(h, 0.0)]).unwrap()
    }

    fn angle_state(theta: f64) -> State {
        State::from_vector(&[C64::new(theta.cos(), 0.0), C64::new(theta.sin(), 0.0)]).unwrap()
    }

    #[test]
    fn pvm_of_identity_is_single_outcome() {
        let p = pvm_from_observable(&CMatrix::identity(3), 1e-9).unwrap();
        assert_eq!(p.outcomes(), &[1.0]);
        assert!(p.projections()[0].distance(&CMatrix::identity(3)) < 1e-12);
    }

    #[test]
    fn pvm_of_pauli_z() {
        let p = pvm_from_observable(&pauli_z(), 1e-9).unwrap();
        assert_eq!(p.len(), 2);
        assert!((p.outcomes()[0] + 1.0).abs() < 1e-14);
        assert!((p.outcomes()[1] - 1.0).abs() < 1e-14);
        assert!(p.projections()[0].distance(&CMatrix::diag_real(&[0.0, 1.0])) < 1e-12);
        assert!(p.projections()[1].distance(&CMatrix::diag_real(&[1.0, 0.0])) < 1e-12);
    }

    #[test]
    fn near_degenerate_eigenvalues_merge() {
        let a = CMatrix::diag_real(&[0.0, 1e-12, 1.0]);
        let p = pvm_from_observable(&a, 1e-9).unwrap();
        assert_eq!(p.len(), 2);
        assert!(p.observable().distance(&a) < 1e-9);
    }

    #[test]
    fn perturbed_scalar_is_single_outcome() {
        let mut rng = SeededRng::new(14);
        let a = rng.observable_with_spectrum(&[0.7, 0.7, 0.7]);
        assert_eq!(pvm_from_observable(&a, 1e-9).unwrap().len(), 1);
    }

    #[test]
    fn non_hermitian_observable_rejected() {
        let a = CMatrix::unit(2, 0, 1);
        assert!(matches!(pvm_from_observable(&a, 1e-9), Err(Error::NotHermitian { .. })));
    }

    #[test]
    fn pvm_reconstructs_random_observable() {
        let mut rng = SeededRng::new(3);
        let a = rng.observable_with_spectrum(&[-1.0, 0.5, 0.5, 2.0]);
        let p = pvm_from_observable(&a, 1e-9).unwrap();
        assert_eq!(p.len(), 3);
        assert!(p.observable().distance(&a) < 1e-9);
    }

    #[test]
    fn invalid_pvm_rejected() {
        let e = CMatrix::diag_real(&[1.0, 0.0]);
        assert!(Pvm::new(vec![0.0, 1.0], vec![e.clone(), e.clone()]).is_err());
        assert!(Pvm::new(vec![1.0, 0.0], vec![e.clone(), CMatrix::diag_real(&[0.0, 1.0])]).is_err());
        assert!(Pvm::new(vec![0.0], vec![e]).is_err());
    }

    #[test]
    fn pointer_algebra_shapes() {
        assert_eq!(pointer_algebra(1).dim(), 1);
        assert_eq!(pointer_algebra(2).dim(), 2);
        let p = pointer_algebra(5);
        assert!(p.is_commutative());
        for x in p.basis() {
            for y in p.basis() {
                assert!(x.commutator(y).norm() < 1e-15);
            }
        }
    }

    #[test]
    fn single_outcome_coupling_is_identity() {
        let p = pvm_from_observable(&CMatrix::identity(2), 1e-9).unwrap();
        assert!(kac_takesaki_unitary(&p).distance(&CMatrix::identity(2)) < 1e-15);
        let m = ideal_measurement(&p);
        let phi = plus();
        let post = m.post_state(&phi).unwrap();
        assert!(post.density().distance(phi.density()) < 1e-15);
    }

    #[test]
    fn coupling_moves_pointer_per_eigenspace() {
        let p = pvm_from_observable(&pauli_z(), 1e-9).unwrap();
        let u = kac_takesaki_unitary(&p);
        for (j, v) in [[ZERO, ONE], [ONE, ZERO]].iter().enumerate() {
            let mut start = vec![ZERO; 2];
            start[0] = ONE;
            let input = crate::linalg::kron_vec(v, &start);
            let mut pos = vec![ZERO; 2];
            pos[j] = ONE;
            let expected = crate::linalg::kron_vec(v, &pos);
            let got = u.matvec(&input);
            let err: f64 = got.iter().zip(&expected).map(|(a, b)| (a - b).norm()).sum();
            assert!(err < 1e-15);
        }
    }

    #[test]
    fn random_coupling_is_unitary() {
        let mut rng = SeededRng::new(8);
        let a = rng.observable_with_spectrum(&[-2.0, -0.5, 0.5, 2.0]);
        let p = pvm_from_observable(&a, 1e-9).unwrap();
        let u = kac_takesaki_unitary(&p);
        assert!((&u.adjoint() * &u).distance(&CMatrix::identity(16)) < 1e-12);
    }

    #[test]
    fn pauli_z_on_zero_reads_position_one() {
        let p = pvm_from_observable(&pauli_z(), 1e-9).unwrap();
        let m = ideal_measurement(&p);
        let zero = State::from_vector(&[ONE, ZERO]).unwrap();
        let post = m.post_state(&zero).unwrap();
        let expected = kron(&CMatrix::unit(2, 0, 0), &CMatrix::unit(2, 1, 1));
        assert!(post.density().distance(&expected) < 1e-15);
    }

    #[test]
    fn pauli_z_on_plus_splits_pointer() {
        let p = pvm_from_observable(&pauli_z(), 1e-9).unwrap();
        let m = ideal_measurement(&p);
        let post = m.post_state(&plus()).unwrap();
        let marginal = partial_trace_first(post.density(), 2, 2);
        assert!(marginal.distance(&CMatrix::diag_real(&[0.5, 0.5])) < 1e-15);
        assert!((post.density().trace().re - 1.0).abs() < 1e-15);
        assert!((m.generalized_born(&plus(), &[1.0]).unwrap() - 0.5).abs() < 1e-15);
        assert!((m.generalized_born(&plus(), &[-1.0, 1.0]).unwrap() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn born_matches_trace_oracle() {
        let a = CMatrix::diag_real(&[0.0, 1.0]);
        let p = pvm_from_observable(&a, 1e-9).unwrap();
        let m = ideal_measurement(&p);
        for theta in [0.3, 0.7, 1.1] {
            let phi = angle_state(theta);
            let oracle = phi.density()[(1, 1)].re;
            let got = m.generalized_born(&phi, &[1.0]).unwrap();
            assert!((got - theta.sin().powi(2)).abs() < 1e-10);
            assert!((got - oracle).abs() < 1e-12);
        }
    }

    #[test]
    fn unknown_outcome_rejected() {
        let p = pvm_from_observable(&pauli_z(), 1e-9).unwrap();
        let m = ideal_measurement(&p);
        assert!(matches!(m.generalized_born(&plus(), &[0.0]), Err(Error::UnknownOutcome(_))));
    }

    #[test]
    fn instrument_composite_values() {
        let p = pvm_from_observable(&pauli_z(), 1e-9).unwrap();
        let m = ideal_measurement(&p);
        let one = CMatrix::identity(2);
        let all = vec![ONE; 2];
        assert!((m.instrument_functional_composite(&plus(), &all, &one).unwrap() - ONE).norm() < 1e-15);
        let chi = p.indicator(&[1.0]).unwrap();
        let v = m.instrument_functional_composite(&plus(), &chi, &pauli_z()).unwrap();
        assert!((v - C64::new(0.5, 0.0)).norm() < 1e-15);
        let born = m.generalized_born(&plus(), &[1.0]).unwrap();
        let w = m.instrument_functional_composite(&plus(), &chi, &one).unwrap();
        assert!((w.re - born).abs() < 1e-15);
    }

    #[test]
    fn pointer_sectors_match_born() {
        let mut rng = SeededRng::new(21);
        let a = rng.observable_with_spectrum(&[-1.0, 0.0, 1.0]);
        let p = pvm_from_observable(&a, 1e-9).unwrap();
        let m = ideal_measurement(&p);
        let phi = State::from_density(rng.density(3)).unwrap();
        let sectors = m.pointer_sectors(&phi).unwrap();
        assert_eq!(sectors.positions.len(), 3);
        for (k, &a_k) in p.outcomes().iter().enumerate() {
            let born = m.generalized_born(&phi, &[a_k]).unwrap();
            assert!((sectors.probability(&[k]) - born).abs() < 1e-10);
        }
        assert!(sectors.max_purity_residual() < 1e-9);
    }

    #[test]
    fn composite_instrument_agrees_with_sector_instrument() {
        let p = pvm_from_observable(&pauli_z(), 1e-9).unwrap();
        let m = ideal_measurement(&p);
        let phi = State::from_vector(&[C64::new(0.6, 0.0), C64::new(0.0, 0.8)]).unwrap();
        let sectors = m.pointer_sectors(&phi).unwrap();
        let f = vec![C64::new(0.3, -1.0), C64::new(2.0, 0.5)];
        for x in [pauli_x(), pauli_z(), CMatrix::identity(2)] {
            let direct = m.instrument_functional_composite(&phi, &f, &x).unwrap();
            let xt = kron(&x, &CMatrix::identity(2));
            let via = sectors.measure.instrument_functional(&sectors.label_function(&f), &xt).unwrap();
            assert!((direct - via).norm() < 1e-9);
        }
    }

    #[test]
    fn eigenstate_gives_one_pointer_sector() {
        let p = pvm_from_observable(&pauli_x(), 1e-9).unwrap();
        let m = ideal_measurement(&p);
        let sectors = m.pointer_sectors(&plus()).unwrap();
        assert_eq!(sectors.positions.len(), 1);
        assert_eq!(sectors.positions[0].position, 1);
        assert!((sectors.probability(&[1]) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn swapped_coupling_is_valid_but_wrong() {
        let p = pvm_from_observable(&pauli_z(), 1e-9).unwrap();
        let m = swapped_coupling(&p, 0, 1).unwrap();
        let zero = State::from_vector(&[ONE, ZERO]).unwrap();
        assert!((m.generalized_born(&zero, &[1.0]).unwrap()).abs() < 1e-15);
        assert!(m.invariance_residual().unwrap() < 1e-12);
    }

    #[test]
    fn non_unitary_coupling_rejected() {
        let p = pvm_from_observable(&pauli_z(), 1e-9).unwrap();
        let u = CMatrix::identity(4).scale_real(1.1);
        let r = MeasurementProcess::new(u, pointer_position(2, 0), p, StarAlgebra::full(2));
        assert!(matches!(r, Err(Error::NotUnitary { .. })));
    }

    #[test]
    fn repeated_ideal_measurement_agrees_on_eigenstates() {
        let mut rng = SeededRng::new(5);
        let a = rng.observable_with_spectrum(&[-1.0, 0.5, 2.0]);
        let p = pvm_from_observable(&a, 1e-9).unwrap();
        let n = p.len();
        let id = CMatrix::identity(n);
        let u1 = kron(&kac_takesaki_unitary(&p), &id);
        let s = cyclic_shift(n);
        let mut u2 = CMatrix::zeros(3 * n * n, 3 * n * n);
        let mut power = CMatrix::identity(n);
        for e in p.projections() {
            u2 += &kron(&kron(e, &id), &power);
            power = &s * &power;
        }
        let eig = hermitian_eig(&a).unwrap();
        for k in 0..3 {
            let v = eig.vector(k);
            let mut start = vec![ZERO; n * n];
            start[0] = ONE;
            let out = (&u2 * &u1).matvec(&crate::linalg::kron_vec(&v, &start));
            let rho = CMatrix::outer(&out, &out);
            let pointers = partial_trace_first(&rho, 3, n * n);
            for i in 0..n {
                let first: f64 = (0..n).map(|j| pointers[(i * n + j, i * n + j)].re).sum();
                let second: f64 = (0..n).map(|j| pointers[(j * n + i, j * n + i)].re).sum();
                assert!((first - second).abs() < 1e-12);
            }
            assert!((pointers[(k * n + k, k * n + k)].re - 1.0).abs() < 1e-12);
        }
    }
}
