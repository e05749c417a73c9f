//! States as density operators and the GNS construction.

use crate::algebra::StarAlgebra;
use crate::error::{Error, Result};
use crate::linalg::{dot, hermitian_eig, hs_inner, kron, least_squares, vec_norm, CMatrix, C64, ZERO};
use crate::tol::{CHECK_TOL, EPS_RANK, STATE_TOL};

/// A linear functional `X ↦ trace(ρ X)` with Hermitian `ρ`.
///
/// Constructors other than [`State::functional`] also enforce positivity
/// and unit trace.
#[derive(Clone, Debug, PartialEq)]
pub struct State {
    density: CMatrix,
}

impl State {
    pub fn from_density(density: CMatrix) -> Result<Self> {
        let s = State::functional(density)?;
        let t = s.density.trace();
        if (t.re - 1.0).abs() > STATE_TOL || t.im.abs() > STATE_TOL {
            return Err(Error::NotAState(format!("trace {t} is not 1")));
        }
        let min = hermitian_eig(&s.density)?.eigenvalues[0];
        if min < -STATE_TOL {
            return Err(Error::NotAState(format!("negative eigenvalue {min:e}")));
        }
        Ok(s)
    }

    /// Hermitian functional that may fail positivity or normalisation.
    pub fn functional(density: CMatrix) -> Result<Self> {
        if !density.is_square() {
            return Err(Error::ShapeMismatch { expected: (density.rows(), density.rows()), found: density.shape() });
        }
        let defect = density.hermiticity_defect();
        if defect > STATE_TOL * density.norm().max(1.0) {
            return Err(Error::NotHermitian { defect });
        }
        Ok(State { density: density.hermitian_part() })
    }

    /// Vector state `v v*` for a unit vector.
    pub fn from_vector(v: &[C64]) -> Result<Self> {
        let norm = vec_norm(v);
        if (norm - 1.0).abs() > STATE_TOL {
            return Err(Error::NotNormalized { norm });
        }
        Ok(State { density: CMatrix::outer(v, v) })
    }

    /// Normalises `v` first.
    pub fn from_unnormalized_vector(v: &[C64]) -> Result<Self> {
        let norm = vec_norm(v);
        if norm == 0.0 {
            return Err(Error::NotNormalized { norm });
        }
        let u: Vec<C64> = v.iter().map(|z| z / norm).collect();
        Ok(State { density: CMatrix::outer(&u, &u) })
    }

    pub fn maximally_mixed(n: usize) -> Self {
        State { density: CMatrix::identity(n).scale_real(1.0 / n as f64) }
    }

    /// Convex combination; weights must be non-negative and sum to 1.
    pub fn mixture(parts: &[(f64, &State)]) -> Result<Self> {
        let Some((_, first)) = parts.first() else {
            return Err(Error::InvalidArgument("empty mixture".into()));
        };
        let n = first.dim();
        let mut rho = CMatrix::zeros(n, n);
        let mut total = 0.0;
        for (w, s) in parts {
            if *w < 0.0 {
                return Err(Error::InvalidArgument(format!("negative mixture weight {w}")));
            }
            if s.dim() != n {
                return Err(Error::DimensionMismatch { expected: n, found: s.dim() });
            }
            rho.axpy(C64::new(*w, 0.0), &s.density);
            total += w;
        }
        if (total - 1.0).abs() > STATE_TOL {
            return Err(Error::InvalidArgument(format!("mixture weights sum to {total}")));
        }
        Ok(State { density: rho })
    }

    /// Trusted constructor for densities produced by this crate.
    pub(crate) fn from_trusted(density: CMatrix) -> Self {
        State { density: density.hermitian_part() }
    }

    pub fn dim(&self) -> usize {
        self.density.rows()
    }

    pub fn density(&self) -> &CMatrix {
        &self.density
    }

    /// `trace(ρ X)`
    pub fn eval(&self, x: &CMatrix) -> C64 {
        // trace(ρX) = ⟨ρ*, X⟩ = ⟨ρ, X⟩ for Hermitian ρ
        hs_inner(&self.density, x).expect("state and operator dimensions agree")
    }

    pub fn try_eval(&self, x: &CMatrix) -> Result<C64> {
        if x.shape() != self.density.shape() {
            return Err(Error::DimensionMismatch { expected: self.dim(), found: x.rows() });
        }
        Ok(self.eval(x))
    }

    /// Product state `self ⊗ other`.
    pub fn product(&self, other: &State) -> State {
        State { density: kron(&self.density, &other.density) }
    }

    /// Unit vector `ξ` in `H ⊗ H` with `⟨ξ, (X ⊗ 1) ξ⟩ = trace(ρX)`.
    pub fn purification(&self) -> Result<Vec<C64>> {
        let e = hermitian_eig(&self.density)?;
        let n = self.dim();
        let mut xi = vec![ZERO; n * n];
        for k in 0..n {
            let w = e.eigenvalues[k].max(0.0).sqrt();
            if w == 0.0 {
                continue;
            }
            let v = e.vector(k);
            for i in 0..n {
                for j in 0..n {
                    xi[i * n + j] += v[i] * v[j].conj() * w;
                }
            }
        }
        Ok(xi)
    }
}

/// Density in `alg` representing the restriction of `values` (the state's
/// values on the basis) to the algebra: `Σ_i conj(φ(b_i)) b_i`.
pub fn density_in_algebra(alg: &StarAlgebra, values: &[C64]) -> CMatrix {
    let conj: Vec<C64> = values.iter().map(|z| z.conj()).collect();
    alg.from_coordinates(&conj).hermitian_part()
}

/// `G_ij = ω(b_i* b_j)` over the algebra basis.
pub fn gram_matrix(alg: &StarAlgebra, omega: &State) -> CMatrix {
    let m = alg.dim();
    let rho = omega.density();
    let right: Vec<CMatrix> = alg.basis().iter().map(|b| b * rho).collect();
    let mut g = CMatrix::from_fn(m, m, |i, j| hs_inner(&alg.basis()[i], &right[j]).expect("shapes agree"));
    g = g.hermitian_part();
    g
}

/// True iff `ω` restricted to `alg` is positive and unital.
pub fn is_state(alg: &StarAlgebra, omega: &State) -> Result<bool> {
    if omega.dim() != alg.ambient_dim() {
        return Err(Error::DimensionMismatch { expected: alg.ambient_dim(), found: omega.dim() });
    }
    let unit = omega.eval(&CMatrix::identity(alg.ambient_dim()));
    if (unit - C64::new(1.0, 0.0)).norm() > 1e-10 {
        return Ok(false);
    }
    let e = hermitian_eig(&gram_matrix(alg, omega))?;
    Ok(e.eigenvalues[0] >= -EPS_RANK)
}

/// The GNS triple `(π_ω, H_ω, Ω_ω)` realised on `ℂ^{gns_dim}`.
#[derive(Clone, Debug)]
pub struct GnsRepresentation {
    algebra: StarAlgebra,
    state: State,
    rep_matrices: Vec<CMatrix>,
    cyclic_vector: Vec<C64>,
    image: StarAlgebra,
}

/// GNS construction by quotienting the algebra by the null space of the
/// Gram form.
pub fn gns(alg: &StarAlgebra, omega: &State) -> Result<GnsRepresentation> {
    if !is_state(alg, omega)? {
        return Err(Error::NotAState("functional is not positive and unital on the algebra".into()));
    }
    let m = alg.dim();
    let e = hermitian_eig(&gram_matrix(alg, omega))?;
    let lambda_max = *e.eigenvalues.last().expect("algebra contains the identity");
    let kept: Vec<usize> = (0..m).filter(|&k| e.eigenvalues[k] > EPS_RANK * lambda_max).collect();
    let g = kept.len();

    // W: algebra coordinates → H_ω, with W*W = Gram; W⁺ is a right inverse.
    let w = CMatrix::from_fn(g, m, |r, j| e.eigenvectors[(j, kept[r])].conj() * e.eigenvalues[kept[r]].sqrt());
    let w_pinv = CMatrix::from_fn(m, g, |j, r| e.eigenvectors[(j, kept[r])] / e.eigenvalues[kept[r]].sqrt());

    let sc = alg.structure_constants();
    let rep_matrices: Vec<CMatrix> = (0..m).map(|i| &(&w * &sc.left_multiplication(i)) * &w_pinv).collect();
    let unit_coords = alg.coordinates(&CMatrix::identity(alg.ambient_dim()))?;
    let cyclic_vector = w.matvec(&unit_coords);
    let image = StarAlgebra::from_closed_span(g, &rep_matrices);
    Ok(GnsRepresentation { algebra: alg.clone(), state: omega.clone(), rep_matrices, cyclic_vector, image })
}

impl GnsRepresentation {
    pub fn algebra(&self) -> &StarAlgebra {
        &self.algebra
    }

    pub fn state(&self) -> &State {
        &self.state
    }

    pub fn source_dim(&self) -> usize {
        self.algebra.dim()
    }

    pub fn gns_dim(&self) -> usize {
        self.cyclic_vector.len()
    }

    /// `π_ω(b_i)` for each basis element.
    pub fn rep_matrices(&self) -> &[CMatrix] {
        &self.rep_matrices
    }

    pub fn cyclic_vector(&self) -> &[C64] {
        &self.cyclic_vector
    }

    /// `π_ω(𝒜)` (= `π_ω(𝒜)″` in finite dimension) as an algebra on `H_ω`.
    pub fn image(&self) -> &StarAlgebra {
        &self.image
    }

    /// `π_ω(X)` for an element of the algebra.
    pub fn transfer(&self, x: &CMatrix) -> Result<CMatrix> {
        let coords = self.algebra.coordinates(x)?;
        let approx = self.algebra.from_coordinates(&coords);
        let residual = x.distance(&approx);
        if residual > EPS_RANK * x.norm().max(1.0) {
            return Err(Error::NotInAlgebra { residual });
        }
        Ok(self.transfer_coordinates(&coords))
    }

    pub fn transfer_coordinates(&self, coords: &[C64]) -> CMatrix {
        let g = self.gns_dim();
        let mut out = CMatrix::zeros(g, g);
        for (c, p) in coords.iter().zip(&self.rep_matrices) {
            if *c != ZERO {
                out.axpy(*c, p);
            }
        }
        out
    }

    /// `⟨Ω, Y Ω⟩`
    pub fn expectation(&self, y: &CMatrix) -> C64 {
        dot(&self.cyclic_vector, &y.matvec(&self.cyclic_vector))
    }

    /// Vector state of `Ω` on `H_ω`.
    pub fn vector_state(&self) -> State {
        State::from_trusted(CMatrix::outer(&self.cyclic_vector, &self.cyclic_vector))
    }

    /// `max_b |⟨Ω, π(b) Ω⟩ − ω(b)|`
    pub fn reproduction_residual(&self) -> f64 {
        self.algebra
            .basis()
            .iter()
            .zip(&self.rep_matrices)
            .map(|(b, p)| (self.expectation(p) - self.state.eval(b)).norm())
            .fold(0.0, f64::max)
    }

    /// Worst of `‖π(b_i)π(b_j) − π(b_i b_j)‖` and `‖π(b_i*) − π(b_i)*‖`.
    pub fn morphism_residual(&self) -> f64 {
        let sc = self.algebra.structure_constants();
        let m = self.source_dim();
        let mut worst: f64 = 0.0;
        for i in 0..m {
            for j in 0..m {
                let lhs = &self.rep_matrices[i] * &self.rep_matrices[j];
                let rhs = self.transfer_coordinates(sc.product(i, j));
                worst = worst.max(lhs.distance(&rhs));
            }
            let adj_coords = self.algebra.coordinates_unchecked(&self.algebra.basis()[i].adjoint());
            let rhs = self.transfer_coordinates(&adj_coords);
            worst = worst.max(self.rep_matrices[i].adjoint().distance(&rhs));
        }
        worst
    }

    /// Rank of `{π(b)Ω}`; equals `gns_dim` for a cyclic vector.
    pub fn cyclic_rank(&self) -> usize {
        let vectors: Vec<CMatrix> =
            self.rep_matrices.iter().map(|p| CMatrix::column(&p.matvec(&self.cyclic_vector))).collect();
        let mut basis: Vec<CMatrix> = Vec::new();
        for v in &vectors {
            let mut r = v.clone();
            for _ in 0..2 {
                for b in &basis {
                    let c = hs_inner(b, &r).expect("same shape");
                    r.axpy(-c, b);
                }
            }
            let n = r.norm();
            if n > EPS_RANK * v.norm().max(1.0) {
                basis.push(r.scale_real(1.0 / n));
            }
        }
        basis.len()
    }
}

/// Lift of `φ` on `𝒜` to a density `φ̃` on `H_ω` with `φ̃(π_ω(b)) = φ(b)`.
///
/// The lift is the unique density inside `π_ω(𝒜)`; it exists as a state
/// exactly when `φ` vanishes on the kernel of `π_ω` and the resulting
/// functional is positive.
pub fn normal_lift(rep: &GnsRepresentation, phi: &State) -> Result<State> {
    let alg = rep.algebra();
    if phi.dim() != alg.ambient_dim() {
        return Err(Error::DimensionMismatch { expected: alg.ambient_dim(), found: phi.dim() });
    }
    let values: Vec<C64> = alg.basis().iter().map(|b| phi.eval(b)).collect();
    let image = rep.image();
    let r = image.dim();
    let p = CMatrix::from_fn(alg.dim(), r, |i, l| {
        hs_inner(&image.basis()[l], &rep.rep_matrices()[i]).expect("shapes agree")
    });
    let (t, residual) = least_squares(&p, &values)?;
    let scale = vec_norm(&values).max(1.0);
    if residual > CHECK_TOL * scale {
        return Err(Error::NotPiNormal { residual });
    }
    let lifted = density_in_algebra(image, &t);
    let min = hermitian_eig(&lifted)?.eigenvalues[0];
    if min < -CHECK_TOL {
        return Err(Error::NotPiNormal { residual: -min });
    }
    Ok(State::from_trusted(lifted))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{pauli_x, pauli_z, ONE};
    use crate::random::SeededRng;

    fn e(n: usize, k: usize) -> Vec<C64> {
        let mut v = vec![ZERO; n];
        v[k] = ONE;
        v
    }

    #[test]
    fn vector_states() {
        let s = State::from_vector(&e(2, 0)).unwrap();
        assert_eq!(s.density(), &CMatrix::diag_real(&[1.0, 0.0]));
        let h = std::f64::consts::FRAC_1_SQRT_2;
        let plus = State::from_vector(&[C64::new(h, 0.0), C64::new(h, 0.0)]).unwrap();
        for z in plus.density().as_slice() {
            assert!((z - C64::new(0.5, 0.0)).norm() < 1e-15);
        }
        let mut rng = SeededRng::new(3);
        let v = rng.unit_vector(5);
        let s = State::from_vector(&v).unwrap();
        assert!((s.density().trace().re - 1.0).abs() < 1e-12);
        let ev = hermitian_eig(s.density()).unwrap().eigenvalues;
        assert_eq!(ev.iter().filter(|x| x.abs() > 1e-12).count(), 1);
        assert!(matches!(State::from_vector(&[ONE, ONE]), Err(Error::NotNormalized { .. })));
    }

    #[test]
    fn from_density_validates() {
        assert!(State::from_density(CMatrix::diag_real(&[2.0, -1.0])).is_err());
        assert!(State::from_density(CMatrix::diag_real(&[0.5, 0.25])).is_err());
        assert!(State::from_density(CMatrix::diag_real(&[0.5, 0.5])).is_ok());
    }

    #[test]
    fn is_state_examples() {
        let full = StarAlgebra::full(2);
        let mut rng = SeededRng::new(4);
        let rho = State::from_density(rng.density(2)).unwrap();
        assert!(is_state(&full, &rho).unwrap());

        let bad = State::functional(CMatrix::diag_real(&[2.0, -1.0])).unwrap();
        assert!(!is_state(&full, &bad).unwrap());
        assert!(!is_state(&StarAlgebra::diagonal(2), &bad).unwrap());

        // restriction to a subalgebra: Gram eigenvalues computed directly
        let rho3 = State::from_density(rng.density(3)).unwrap();
        let sub = StarAlgebra::direct_sum(&[1, 2]).unwrap();
        let g = gram_matrix(&sub, &rho3);
        assert!(hermitian_eig(&g).unwrap().eigenvalues[0] > -1e-12);
        assert!(is_state(&sub, &rho3).unwrap());

        assert!(is_state(&full, &State::maximally_mixed(3)).is_err());
    }

    #[test]
    fn scalar_algebra_has_one_dimensional_gns() {
        let alg = StarAlgebra::scalars(3);
        let mut rng = SeededRng::new(5);
        let rep = gns(&alg, &State::from_density(rng.density(3)).unwrap()).unwrap();
        assert_eq!(rep.gns_dim(), 1);
        let pi_one = rep.transfer(&CMatrix::identity(3)).unwrap();
        assert!(pi_one.distance(&CMatrix::identity(1)) < 1e-12);
    }

    #[test]
    fn full_algebra_vector_state_gns_dim_two() {
        let alg = StarAlgebra::full(2);
        let omega = State::from_vector(&e(2, 0)).unwrap();
        // oracle: Gram rank by direct eigenvalue count
        let g = gram_matrix(&alg, &omega);
        let ev = hermitian_eig(&g).unwrap().eigenvalues;
        let rank = ev.iter().filter(|&&x| x > 1e-9 * ev[3]).count();
        assert_eq!(rank, 2);
        let rep = gns(&alg, &omega).unwrap();
        assert_eq!(rep.gns_dim(), 2);
        assert!(rep.reproduction_residual() < 1e-10);
        assert!(rep.morphism_residual() < 1e-9);
        assert_eq!(rep.cyclic_rank(), 2);
    }

    #[test]
    fn diagonal_faithful_state_gns_dim_three() {
        let alg = StarAlgebra::diagonal(3);
        let omega = State::from_density(CMatrix::diag_real(&[0.5, 1.0 / 3.0, 1.0 / 6.0])).unwrap();
        let g = gram_matrix(&alg, &omega);
        let ev = hermitian_eig(&g).unwrap().eigenvalues;
        assert!(ev[0] > 1e-3);
        let rep = gns(&alg, &omega).unwrap();
        assert_eq!(rep.gns_dim(), 3);
        assert!(rep.reproduction_residual() < 1e-10);
    }

    #[test]
    fn gns_rejects_non_states() {
        let bad = State::functional(CMatrix::diag_real(&[2.0, -1.0])).unwrap();
        assert!(matches!(gns(&StarAlgebra::full(2), &bad), Err(Error::NotAState(_))));
    }

    #[test]
    fn transfer_rejects_outside_elements() {
        let alg = StarAlgebra::diagonal(2);
        let rep = gns(&alg, &State::maximally_mixed(2)).unwrap();
        assert!(matches!(rep.transfer(&pauli_x()), Err(Error::NotInAlgebra { .. })));
        assert!(rep.transfer(&pauli_z()).is_ok());
    }

    #[test]
    fn lift_of_defining_state_is_the_vector_state() {
        let alg = StarAlgebra::diagonal(3);
        let omega = State::from_density(CMatrix::diag_real(&[0.5, 0.3, 0.2])).unwrap();
        let rep = gns(&alg, &omega).unwrap();
        let lifted = normal_lift(&rep, &omega).unwrap();
        let vs = rep.vector_state();
        for p in rep.image().basis() {
            assert!((lifted.eval(p) - vs.eval(p)).norm() < 1e-10);
        }
    }

    #[test]
    fn faithful_state_lifts_everything() {
        let alg = StarAlgebra::full(2);
        let mut rng = SeededRng::new(6);
        let omega = State::from_density(rng.density(2)).unwrap();
        let rep = gns(&alg, &omega).unwrap();
        assert_eq!(rep.gns_dim(), 4);
        let phi = State::from_vector(&rng.unit_vector(2)).unwrap();
        let lifted = normal_lift(&rep, &phi).unwrap();
        for (b, p) in alg.basis().iter().zip(rep.rep_matrices()) {
            assert!((lifted.eval(p) - phi.eval(b)).norm() < 1e-9);
        }
    }

    #[test]
    fn disjoint_block_state_is_not_liftable() {
        let alg = StarAlgebra::direct_sum(&[2, 2]).unwrap();
        let omega = State::from_vector(&e(4, 0)).unwrap();
        let phi = State::from_vector(&e(4, 3)).unwrap();
        let rep = gns(&alg, &omega).unwrap();
        assert!(matches!(normal_lift(&rep, &phi), Err(Error::NotPiNormal { .. })));
    }

    #[test]
    fn purification_reproduces_expectations() {
        let mut rng = SeededRng::new(8);
        let rho = State::from_density(rng.density(3)).unwrap();
        let xi = rho.purification().unwrap();
        let x = rng.hermitian(3);
        let lifted = kron(&x, &CMatrix::identity(3));
        let lhs = dot(&xi, &lifted.matvec(&xi));
        assert!((lhs - rho.eval(&x)).norm() < 1e-12);
    }
}
