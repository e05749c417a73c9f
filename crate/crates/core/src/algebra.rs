//! Finite-dimensional unital *-algebras realised inside `M_d(ℂ)`.

use std::sync::{Arc, OnceLock};

use crate::error::{Error, Result};
use crate::exec::Exec;
use crate::linalg::{hs_inner, kron, CMatrix, C64, ZERO};
use crate::tol::EPS_RANK;

/// A unital *-closed subspace of `M_d(ℂ)` given by a Hilbert–Schmidt
/// orthonormal basis whose first element is `1/√d`.
#[derive(Clone, Debug)]
pub struct StarAlgebra {
    ambient_dim: usize,
    basis: Vec<CMatrix>,
    generators: Vec<CMatrix>,
    structure: OnceLock<Arc<StructureConstants>>,
}

/// Coordinates of every basis product `b_i b_j` in the basis.
#[derive(Clone, Debug)]
pub struct StructureConstants {
    dim: usize,
    coeffs: Vec<C64>,
}

impl StructureConstants {
    pub fn compute(alg: &StarAlgebra, exec: Exec) -> Self {
        let m = alg.dim();
        let rows = exec.map_range(m, |i| {
            let mut out = Vec::with_capacity(m * m);
            for j in 0..m {
                let prod = &alg.basis[i] * &alg.basis[j];
                out.extend(alg.coordinates_unchecked(&prod));
            }
            out
        });
        StructureConstants { dim: m, coeffs: rows.concat() }
    }

    /// Coordinates of `b_i b_j`.
    pub fn product(&self, i: usize, j: usize) -> &[C64] {
        let m = self.dim;
        let start = (i * m + j) * m;
        &self.coeffs[start..start + m]
    }

    /// Matrix of left multiplication by `b_i` in basis coordinates.
    pub fn left_multiplication(&self, i: usize) -> CMatrix {
        let m = self.dim;
        CMatrix::from_fn(m, m, |l, j| self.product(i, j)[l])
    }
}

/// Adds `candidate` to an orthonormal list if it is independent of it.
/// Returns whether the candidate was accepted.
/// Gram–Schmidt step that rejects anything at or below `EPS_RANK * scale`.
fn try_extend(basis: &mut Vec<CMatrix>, candidate: &CMatrix, scale: f64) -> bool {
    let norm = candidate.norm();
    if norm == 0.0 {
        return false;
    }
    let mut v = candidate.clone();
    // classical Gram–Schmidt, applied twice
    for _ in 0..2 {
        for b in basis.iter() {
            let c = hs_inner(b, &v).expect("shapes agree");
            v.axpy(-c, b);
        }
    }
    let residual = v.norm();
    if residual > EPS_RANK * scale.max(norm) {
        basis.push(v.scale_real(1.0 / residual));
        true
    } else {
        false
    }
}

fn check_square(m: &CMatrix, d: usize) -> Result<()> {
    if m.shape() != (d, d) {
        return Err(Error::DimensionMismatch { expected: d, found: m.rows().max(m.cols()) });
    }
    Ok(())
}

impl StarAlgebra {
    /// Smallest unital *-algebra containing `generators`.
    ///
    /// The span is grown by right-multiplying accepted elements with the
    /// generators and their adjoints until no new direction appears.
    pub fn generate(generators: &[CMatrix], ambient_dim: usize) -> Result<Self> {
        if ambient_dim == 0 {
            return Err(Error::InvalidArgument("ambient dimension must be positive".into()));
        }
        for g in generators {
            check_square(g, ambient_dim)?;
        }
        let mut multipliers: Vec<CMatrix> = Vec::with_capacity(2 * generators.len());
        for g in generators {
            multipliers.push(g.clone());
            if g.hermiticity_defect() > EPS_RANK * g.norm() {
                multipliers.push(g.adjoint());
            }
        }
        // basis elements have unit norm, so ‖current·g‖ ≤ ‖g‖
        let scale = multipliers.iter().map(CMatrix::norm).fold(0.0, f64::max);
        let mut basis = vec![identity_direction(ambient_dim)];
        let mut next = 0;
        while next < basis.len() {
            let current = basis[next].clone();
            for g in &multipliers {
                try_extend(&mut basis, &(&current * g), scale);
            }
            next += 1;
        }
        Ok(StarAlgebra { ambient_dim, basis, generators: multipliers, structure: OnceLock::new() })
    }

    /// Span of the identity and `elements`, which must already be closed
    /// under products and adjoints.
    /// Directions below `EPS_RANK` times the largest element are dropped.
    pub(crate) fn from_closed_span(ambient_dim: usize, elements: &[CMatrix]) -> Self {
        let scale = elements.iter().map(CMatrix::norm).fold(0.0, f64::max);
        let mut basis = vec![identity_direction(ambient_dim)];
        for e in elements {
            try_extend(&mut basis, e, scale);
        }
        let generators = basis[1..].to_vec();
        StarAlgebra { ambient_dim, basis, generators, structure: OnceLock::new() }
    }

    pub fn scalars(n: usize) -> Self {
        StarAlgebra::from_closed_span(n, &[])
    }

    pub fn full(n: usize) -> Self {
        let units: Vec<CMatrix> = (0..n).flat_map(|r| (0..n).map(move |c| CMatrix::unit(n, r, c))).collect();
        StarAlgebra::from_closed_span(n, &units)
    }

    pub fn diagonal(n: usize) -> Self {
        let units: Vec<CMatrix> = (0..n).map(|k| CMatrix::unit(n, k, k)).collect();
        StarAlgebra::from_closed_span(n, &units)
    }

    /// Block-diagonal `M_{n1} ⊕ … ⊕ M_{nk}`.
    pub fn direct_sum(blocks: &[usize]) -> Result<Self> {
        if blocks.is_empty() || blocks.contains(&0) {
            return Err(Error::InvalidArgument("block sizes must be at least 1".into()));
        }
        let d: usize = blocks.iter().sum();
        let mut units = Vec::new();
        let mut offset = 0;
        for &n in blocks {
            for r in 0..n {
                for c in 0..n {
                    units.push(CMatrix::unit(d, offset + r, offset + c));
                }
            }
            offset += n;
        }
        Ok(StarAlgebra::from_closed_span(d, &units))
    }

    /// `A ⊗ B` on the product space; Kronecker products of orthonormal bases
    /// are already orthonormal.
    pub fn tensor(a: &StarAlgebra, b: &StarAlgebra) -> Self {
        let basis: Vec<CMatrix> = a.basis.iter().flat_map(|x| b.basis.iter().map(move |y| kron(x, y))).collect();
        let ia = CMatrix::identity(a.ambient_dim);
        let ib = CMatrix::identity(b.ambient_dim);
        let mut generators: Vec<CMatrix> = a.generators.iter().map(|g| kron(g, &ib)).collect();
        generators.extend(b.generators.iter().map(|h| kron(&ia, h)));
        StarAlgebra { ambient_dim: a.ambient_dim * b.ambient_dim, basis, generators, structure: OnceLock::new() }
    }

    pub fn ambient_dim(&self) -> usize {
        self.ambient_dim
    }

    pub fn dim(&self) -> usize {
        self.basis.len()
    }

    pub fn basis(&self) -> &[CMatrix] {
        &self.basis
    }

    /// A generating set closed under adjoints (up to Hermitian elements).
    pub fn generators(&self) -> &[CMatrix] {
        &self.generators
    }

    pub fn structure_constants(&self) -> &StructureConstants {
        self.structure.get_or_init(|| Arc::new(StructureConstants::compute(self, Exec::default())))
    }

    pub(crate) fn coordinates_unchecked(&self, x: &CMatrix) -> Vec<C64> {
        self.basis.iter().map(|b| hs_inner(b, x).expect("shapes agree")).collect()
    }

    /// Basis coordinates of the orthogonal projection of `x` onto the span.
    pub fn coordinates(&self, x: &CMatrix) -> Result<Vec<C64>> {
        check_square(x, self.ambient_dim)?;
        Ok(self.coordinates_unchecked(x))
    }

    pub fn from_coordinates(&self, coords: &[C64]) -> CMatrix {
        let mut out = CMatrix::zeros(self.ambient_dim, self.ambient_dim);
        for (c, b) in coords.iter().zip(&self.basis) {
            if *c != ZERO {
                out.axpy(*c, b);
            }
        }
        out
    }

    pub fn project(&self, x: &CMatrix) -> Result<CMatrix> {
        Ok(self.from_coordinates(&self.coordinates(x)?))
    }

    /// Hilbert–Schmidt distance from `x` to the algebra.
    pub fn residual(&self, x: &CMatrix) -> Result<f64> {
        Ok(x.distance(&self.project(x)?))
    }

    /// Membership test with residual `‖x − P x‖ ≤ ε_rank·max(1, ‖x‖)`.
    pub fn contains(&self, x: &CMatrix) -> Result<(bool, f64)> {
        let r = self.residual(x)?;
        Ok((r <= EPS_RANK * x.norm().max(1.0), r))
    }

    /// Largest residual of mutual containment of the two spans.
    pub fn span_distance(&self, other: &StarAlgebra) -> Result<f64> {
        let mut worst: f64 = 0.0;
        for b in &other.basis {
            worst = worst.max(self.residual(b)?);
        }
        for b in &self.basis {
            worst = worst.max(other.residual(b)?);
        }
        Ok(worst)
    }

    pub fn is_commutative(&self) -> bool {
        let scale = 1.0 / self.ambient_dim as f64;
        self.basis
            .iter()
            .enumerate()
            .all(|(i, a)| self.basis[i + 1..].iter().all(|b| a.commutator(b).norm() <= EPS_RANK * scale.max(1.0)))
    }

    /// Worst violation of the defining invariants: identity membership,
    /// closure under products and adjoints, basis orthonormality.
    pub fn closure_defect(&self) -> f64 {
        let mut worst = self.residual(&CMatrix::identity(self.ambient_dim)).unwrap_or(f64::INFINITY);
        for (i, a) in self.basis.iter().enumerate() {
            worst = worst.max(self.residual(&a.adjoint()).unwrap_or(f64::INFINITY));
            for (j, b) in self.basis.iter().enumerate() {
                worst = worst.max(self.residual(&(a * b)).unwrap_or(f64::INFINITY));
                let g = hs_inner(a, b).expect("shapes agree");
                let expect = if i == j { 1.0 } else { 0.0 };
                worst = worst.max((g - expect).norm());
            }
        }
        worst
    }
}

fn identity_direction(d: usize) -> CMatrix {
    CMatrix::identity(d).scale_real(1.0 / (d as f64).sqrt())
}
