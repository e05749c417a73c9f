//! Commutants, centers, sectors and central / subcentral measures.

use std::fmt;

use crate::algebra::StarAlgebra;
use crate::error::{Error, Result};
use crate::exec::Exec;
use crate::linalg::{commutation_map, hermitian_eig, CMatrix, RowCompressor, C64, ZERO};
use crate::state::{density_in_algebra, gns, is_state, normal_lift, GnsRepresentation, State};
use crate::tol::{CHECK_TOL, CLUSTER_GAP, EPS_RANK, NULL_WEIGHT};

/// Generators per compression task when building commutants.
const COMMUTANT_CHUNK: usize = 4;

/// `S′` for the algebra generated by `alg`'s generators.
pub fn commutant(alg: &StarAlgebra) -> Result<StarAlgebra> {
    commutant_with(alg, Exec::default())
}

pub fn commutant_with(alg: &StarAlgebra, exec: Exec) -> Result<StarAlgebra> {
    let d = alg.ambient_dim();
    let chunks: Vec<&[CMatrix]> = alg.generators().chunks(COMMUTANT_CHUNK).collect();
    let partial = exec.map(&chunks, |chunk| {
        let mut rc = RowCompressor::new(d * d);
        for g in chunk.iter() {
            rc.push_matrix(&commutation_map(g));
        }
        rc
    });
    let mut rc = RowCompressor::new(d * d);
    for p in &partial {
        rc.push_matrix(&p.factor());
    }
    let scale = alg.generators().iter().map(|g| g.norm()).fold(0.0, f64::max);
    let kernel: Vec<CMatrix> = rc
        .svd()?
        .kernel_with_floor(EPS_RANK, EPS_RANK * scale)
        .into_iter()
        .map(|v| CMatrix::from_vec(d, d, v).expect("square reshape"))
        .collect();
    Ok(StarAlgebra::from_closed_span(d, &kernel))
}

/// Stable identifier of a block of a commutative algebra: its position in
/// the canonical order plus the eigenvalues of the algebra's basis on it.
#[derive(Clone, Debug, PartialEq)]
pub struct SectorLabel {
    pub index: usize,
    pub signature: Vec<f64>,
}

impl fmt::Display for SectorLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "S{}", self.index)
    }
}

impl SectorLabel {
    /// Signature rounded to six decimals, e.g. `[0.447214,-0.2]`.
    pub fn signature_text(&self) -> String {
        let parts: Vec<String> = self
            .signature
            .iter()
            .map(|x| {
                let r = (x * 1e6).round() / 1e6 + 0.0;
                format!("{r}")
            })
            .collect();
        format!("[{}]", parts.join(","))
    }
}

/// One joint spectral block of a commuting family.
#[derive(Clone, Debug)]
pub struct SpectralBlock {
    pub projection: CMatrix,
    pub signature: Vec<f64>,
    /// Orthonormal basis of the block's range, as columns.
    range: CMatrix,
}

/// Minimal projections of the commutative *-algebra spanned by `elements`
/// by partition refinement: every block is split along the eigenvalue
/// clusters of each Hermitian part in turn.
pub fn minimal_projections(elements: &[CMatrix], dim: usize) -> Result<Vec<SpectralBlock>> {
    let mut blocks = vec![SpectralBlock {
        projection: CMatrix::identity(dim),
        signature: Vec::new(),
        range: CMatrix::identity(dim),
    }];
    let mut parts = Vec::with_capacity(2 * elements.len());
    for c in elements {
        parts.push(c.hermitian_part());
        parts.push((c - &c.adjoint()).scale(C64::new(0.0, -0.5)));
    }
    for h in &parts {
        let width = hermitian_eig(h)?.spectral_width();
        let gap = CLUSTER_GAP * width;
        let mut next = Vec::with_capacity(blocks.len());
        for b in &blocks {
            let q = &b.range;
            let compressed = &(&q.adjoint() * h) * q;
            let e = hermitian_eig(&compressed)?;
            let clusters =
                if width <= EPS_RANK * h.norm().max(1.0) { vec![(0..e.dim()).collect()] } else { e.clusters(gap) };
            for cluster in clusters {
                let mean = cluster.iter().map(|&k| e.eigenvalues[k]).sum::<f64>() / cluster.len() as f64;
                let sub = CMatrix::from_fn(q.cols(), cluster.len(), |i, j| e.eigenvectors[(i, cluster[j])]);
                let range = q * &sub;
                let mut signature = b.signature.clone();
                signature.push(mean);
                next.push(SpectralBlock { projection: &range * &range.adjoint(), signature, range });
            }
        }
        blocks = next;
    }
    Ok(blocks)
}

/// Center of `π_ω(𝒜)` with its minimal projections.
#[derive(Clone, Debug)]
pub struct CenterDecomposition {
    pub center_basis: Vec<CMatrix>,
    pub minimal_projections: Vec<CMatrix>,
    pub sector_labels: Vec<SectorLabel>,
}

impl CenterDecomposition {
    pub fn dim(&self) -> usize {
        self.center_basis.len()
    }

    pub fn algebra(&self) -> StarAlgebra {
        let g = self.minimal_projections.first().map_or(1, |p| p.rows());
        StarAlgebra::from_closed_span(g, &self.center_basis)
    }

    /// Worst violation of idempotence, orthogonality, completeness and
    /// centrality against `rep`.
    pub fn defect(&self, rep: &GnsRepresentation) -> f64 {
        let g = rep.gns_dim();
        let mut worst: f64 = 0.0;
        let mut sum = CMatrix::zeros(g, g);
        for (j, z) in self.minimal_projections.iter().enumerate() {
            worst = worst.max((z * z).distance(z)).max(z.hermiticity_defect());
            for w in &self.minimal_projections[j + 1..] {
                worst = worst.max((z * w).norm());
            }
            for p in rep.rep_matrices() {
                worst = worst.max(z.commutator(p).norm());
            }
            sum += z;
        }
        worst.max(sum.distance(&CMatrix::identity(g)))
    }
}

/// `Z_ω(𝒜) = π_ω(𝒜)″ ∩ π_ω(𝒜)′`.
pub fn center(rep: &GnsRepresentation) -> Result<CenterDecomposition> {
    let image = rep.image();
    let r = image.dim();
    let sc = image.structure_constants();
    // coefficients c with Σ_l c_l [q_j, q_l] = 0 for every basis element q_j
    let mut rc = RowCompressor::new(r);
    let mut row = vec![ZERO; r];
    for j in 1..r {
        for k in 0..r {
            for (l, slot) in row.iter_mut().enumerate() {
                *slot = sc.product(j, l)[k] - sc.product(l, j)[k];
            }
            rc.push_row(&row);
        }
    }
    // the basis is orthonormal, so structure constants are O(1)
    let kernel = rc.svd()?.kernel_with_floor(EPS_RANK, EPS_RANK);
    let center_basis: Vec<CMatrix> = kernel.iter().map(|c| image.from_coordinates(c)).collect();
    let blocks = ordered_blocks(rep, &center_basis)?;
    if blocks.len() != center_basis.len() {
        return Err(Error::InvalidArgument(format!(
            "center of dimension {} split into {} blocks",
            center_basis.len(),
            blocks.len()
        )));
    }
    let sector_labels =
        blocks.iter().enumerate().map(|(index, b)| SectorLabel { index, signature: b.signature.clone() }).collect();
    Ok(CenterDecomposition {
        center_basis,
        minimal_projections: blocks.into_iter().map(|b| b.projection).collect(),
        sector_labels,
    })
}

/// Minimal projections of `span(elements)` in canonical order: by the
/// ambient support of the corresponding conditional state of `ω`
/// (first non-negligible diagonal entry, then the diagonal profile).
fn ordered_blocks(rep: &GnsRepresentation, elements: &[CMatrix]) -> Result<Vec<SpectralBlock>> {
    let blocks = minimal_projections(elements, rep.gns_dim())?;
    let mut keyed: Vec<(Vec<f64>, SpectralBlock)> = blocks
        .into_iter()
        .map(|b| {
            let weight = rep.expectation(&b.projection).re;
            let values: Vec<C64> =
                rep.rep_matrices().iter().map(|p| rep.expectation(&(&b.projection * p)) / weight).collect();
            let d = density_in_algebra(rep.algebra(), &values);
            let diag: Vec<f64> = (0..d.rows()).map(|i| d[(i, i)].re).collect();
            let first = diag.iter().position(|&x| x > 1e-9).unwrap_or(diag.len());
            let mut key = vec![first as f64];
            key.extend(diag.iter().map(|x| -((x * 1e9).round() / 1e9)));
            (key, b)
        })
        .collect();
    keyed.sort_by(|a, b| {
        a.0.iter()
            .zip(&b.0)
            .map(|(x, y)| x.total_cmp(y))
            .find(|o| o.is_ne())
            .unwrap_or(std::cmp::Ordering::Equal)
            .then_with(|| {
                a.1.signature
                    .iter()
                    .zip(&b.1.signature)
                    .map(|(x, y)| x.total_cmp(y))
                    .find(|o| o.is_ne())
                    .unwrap_or(std::cmp::Ordering::Equal)
            })
    });
    Ok(keyed.into_iter().map(|(_, b)| b).collect())
}

pub fn is_factor_state(alg: &StarAlgebra, omega: &State) -> Result<bool> {
    let rep = gns(alg, omega)?;
    Ok(center(&rep)?.dim() == 1)
}

#[derive(Clone, Debug)]
pub struct SectorComponent {
    pub label: SectorLabel,
    pub weight: f64,
    /// Sector state on `𝒜`, as a density inside `𝒜`.
    pub state: State,
    /// Central projection on `H_ω`.
    pub projection: CMatrix,
}

/// Decomposition `d^𝓑φ` of a state over a subalgebra `𝓑` of the center.
#[derive(Clone, Debug)]
pub struct SubcentralMeasure {
    pub components: Vec<SectorComponent>,
    /// Blocks of `𝓑` carrying no weight, with their projections.
    pub suppressed: Vec<(SectorLabel, CMatrix)>,
    pub subalgebra: StarAlgebra,
    /// `φ̃` on `H_ω`.
    pub lifted: State,
    rep: GnsRepresentation,
}

fn lift(rep: &GnsRepresentation, phi: &State) -> Result<State> {
    if phi.density().distance(rep.state().density()) <= 1e-14 {
        Ok(rep.vector_state())
    } else {
        normal_lift(rep, phi)
    }
}

/// Worst distance of `b`'s basis from `Z_ω(𝒜)`.
fn subcentral_defect(rep: &GnsRepresentation, b: &StarAlgebra) -> Result<f64> {
    let image = rep.image();
    let mut worst: f64 = 0.0;
    for x in b.basis() {
        worst = worst.max(image.residual(x)?);
        for q in image.basis() {
            worst = worst.max(x.commutator(q).norm());
        }
    }
    Ok(worst)
}

pub fn subcentral_measure(rep: &GnsRepresentation, phi: &State, b: &StarAlgebra) -> Result<SubcentralMeasure> {
    if b.ambient_dim() != rep.gns_dim() {
        return Err(Error::DimensionMismatch { expected: rep.gns_dim(), found: b.ambient_dim() });
    }
    let defect = subcentral_defect(rep, b)?;
    if defect > 1e-8 {
        return Err(Error::NotSubcentral { residual: defect });
    }
    let lifted = lift(rep, phi)?;
    let blocks = ordered_blocks(rep, b.basis())?;
    let alg = rep.algebra();
    let mut components = Vec::new();
    let mut suppressed = Vec::new();
    for (index, block) in blocks.into_iter().enumerate() {
        let label = SectorLabel { index, signature: block.signature };
        let weight = lifted.eval(&block.projection).re;
        if weight <= NULL_WEIGHT {
            suppressed.push((label, block.projection));
            continue;
        }
        let values: Vec<C64> =
            rep.rep_matrices().iter().map(|p| lifted.eval(&(&block.projection * p)) / weight).collect();
        let state = State::from_trusted(density_in_algebra(alg, &values));
        components.push(SectorComponent { label, weight, state, projection: block.projection });
    }
    Ok(SubcentralMeasure { components, suppressed, subalgebra: b.clone(), lifted, rep: rep.clone() })
}

/// Subcentral measure over the full center.
pub fn central_measure(rep: &GnsRepresentation, phi: &State) -> Result<SubcentralMeasure> {
    let z = center(rep)?;
    subcentral_measure(rep, phi, &z.algebra())
}

impl SubcentralMeasure {
    pub fn representation(&self) -> &GnsRepresentation {
        &self.rep
    }

    pub fn labels(&self) -> Vec<SectorLabel> {
        let mut all: Vec<SectorLabel> = self.components.iter().map(|c| c.label.clone()).collect();
        all.extend(self.suppressed.iter().map(|(l, _)| l.clone()));
        all.sort_by_key(|l| l.index);
        all
    }

    pub fn weights(&self) -> Vec<f64> {
        self.components.iter().map(|c| c.weight).collect()
    }

    pub fn find(&self, label: &SectorLabel) -> Option<&SectorComponent> {
        self.components.iter().find(|c| &c.label == label)
    }

    fn known(&self, label: &SectorLabel) -> bool {
        self.find(label).is_some() || self.suppressed.iter().any(|(l, _)| l == label)
    }

    /// Label with the given canonical index.
    pub fn label(&self, index: usize) -> Result<SectorLabel> {
        self.labels().into_iter().find(|l| l.index == index).ok_or_else(|| Error::UnknownLabel(format!("S{index}")))
    }

    fn lookup(&self, f: &[(SectorLabel, C64)], label: &SectorLabel) -> Result<C64> {
        f.iter().find(|(l, _)| l == label).map(|(_, v)| *v).ok_or_else(|| Error::UnknownLabel(label.to_string()))
    }

    fn check_function(&self, f: &[(SectorLabel, C64)]) -> Result<()> {
        for (l, _) in f {
            if !self.known(l) {
                return Err(Error::UnknownLabel(l.to_string()));
            }
        }
        Ok(())
    }

    /// `Σ_{k∈Δ} μ_k`
    pub fn sector_probability(&self, delta: &[SectorLabel]) -> Result<f64> {
        let mut p = 0.0;
        for l in delta {
            if let Some(c) = self.find(l) {
                p += c.weight;
            } else if !self.known(l) {
                return Err(Error::UnknownLabel(l.to_string()));
            }
        }
        Ok(p)
    }

    /// `κ(f) = Σ_k f(k) z_k` over every block of `𝓑`.
    pub fn kappa_embed(&self, f: &[(SectorLabel, C64)]) -> Result<CMatrix> {
        self.check_function(f)?;
        let g = self.rep.gns_dim();
        let mut out = CMatrix::zeros(g, g);
        for c in &self.components {
            out.axpy(self.lookup(f, &c.label)?, &c.projection);
        }
        for (l, z) in &self.suppressed {
            out.axpy(self.lookup(f, l)?, z);
        }
        Ok(out)
    }

    /// `I(f; d^𝓑φ)(X) = Σ_k μ_k f(k) ρ_k(X)`
    pub fn instrument_functional(&self, f: &[(SectorLabel, C64)], x: &CMatrix) -> Result<C64> {
        self.check_function(f)?;
        let (inside, residual) = self.rep.algebra().contains(x)?;
        if !inside {
            return Err(Error::NotInAlgebra { residual });
        }
        let mut total = ZERO;
        for c in &self.components {
            total += c.state.eval(x) * self.lookup(f, &c.label)? * c.weight;
        }
        Ok(total)
    }

    /// `φ̃(κ(f) π_ω(X))`, the right-hand side of the instrument identity.
    pub fn kappa_pairing(&self, f: &[(SectorLabel, C64)], x: &CMatrix) -> Result<C64> {
        let k = self.kappa_embed(f)?;
        let px = self.rep.transfer(x)?;
        Ok(self.lifted.eval(&(&k * &px)))
    }

    /// `max_b |Σ μ_k ρ_k(b) − φ(b)|` against the given state on `𝒜`.
    pub fn barycenter_residual(&self, phi: &State) -> f64 {
        self.rep
            .algebra()
            .basis()
            .iter()
            .map(|b| {
                let mix: C64 = self.components.iter().map(|c| c.state.eval(b) * c.weight).sum();
                (mix - phi.eval(b)).norm()
            })
            .fold(0.0, f64::max)
    }

    /// Barycenter of the components in `delta` (or in its complement).
    pub fn partial_barycenter(&self, delta: &[SectorLabel], complement: bool) -> Option<State> {
        let chosen: Vec<&SectorComponent> =
            self.components.iter().filter(|c| delta.contains(&c.label) != complement).collect();
        let total: f64 = chosen.iter().map(|c| c.weight).sum();
        if total <= NULL_WEIGHT {
            return None;
        }
        let n = chosen[0].state.dim();
        let mut rho = CMatrix::zeros(n, n);
        for c in chosen {
            rho.axpy(C64::new(c.weight / total, 0.0), c.state.density());
        }
        Some(State::from_trusted(rho))
    }
}

/// Two states are disjoint when a central projection of the GNS
/// representation of their average carries all of one and none of the other.
pub fn are_disjoint(alg: &StarAlgebra, omega1: &State, omega2: &State) -> Result<bool> {
    for w in [omega1, omega2] {
        if !is_state(alg, w)? {
            return Err(Error::NotAState("argument is not a state on the algebra".into()));
        }
    }
    let avg = State::from_trusted(&omega1.density().scale_real(0.5) + &omega2.density().scale_real(0.5));
    let rep = gns(alg, &avg)?;
    let z = center(&rep)?;
    let l1 = normal_lift(&rep, omega1)?;
    let l2 = normal_lift(&rep, omega2)?;
    let mut carried = 0.0;
    for p in &z.minimal_projections {
        if l2.eval(p).re <= CHECK_TOL {
            carried += l1.eval(p).re;
        }
    }
    Ok(carried >= 1.0 - CHECK_TOL)
}

/// Quasi-equivalence of factor states via the factor dichotomy.
pub fn are_quasi_equivalent(alg: &StarAlgebra, omega1: &State, omega2: &State) -> Result<bool> {
    for w in [omega1, omega2] {
        let rep = gns(alg, w)?;
        let center_dim = center(&rep)?.dim();
        if center_dim != 1 {
            return Err(Error::NotFactorState { center_dim });
        }
    }
    Ok(!are_disjoint(alg, omega1, omega2)?)
}
