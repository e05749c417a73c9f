//! Spectral equivalence of PVMs on a family of states, joint distributions,
//! the measurement-process condition and the Born rule.

use crate::error::{Error, Result};
use crate::exec::Exec;
use crate::linalg::{kron, vec_norm, CMatrix, C64};
use crate::measurement::{MeasurementProcess, Pvm};
use crate::state::State;
use crate::tol::LABEL_TOL;

/// Default absolute tolerance for every check in this module.
pub const EQUIV_TOL: f64 = 1e-9;

/// States on a common space, with a note on where they came from.
#[derive(Clone, Debug)]
pub struct StateFamily {
    members: Vec<State>,
    description: String,
}

impl StateFamily {
    pub fn new(members: Vec<State>, description: impl Into<String>) -> Result<Self> {
        if let Some(first) = members.first() {
            let d = first.dim();
            if let Some(bad) = members.iter().find(|s| s.dim() != d) {
                return Err(Error::DimensionMismatch { expected: d, found: bad.dim() });
            }
        }
        Ok(StateFamily { members, description: description.into() })
    }

    pub fn singleton(state: State) -> Self {
        StateFamily { members: vec![state], description: "singleton".into() }
    }

    pub fn members(&self) -> &[State] {
        &self.members
    }

    pub fn description(&self) -> &str {
        &self.description
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    pub fn dim(&self) -> Option<usize> {
        self.members.first().map(State::dim)
    }

    /// `{φ ⊗ ψ}` for every member `φ`.
    pub fn tensor_with(&self, psi: &State) -> StateFamily {
        StateFamily {
            members: self.members.iter().map(|m| m.product(psi)).collect(),
            description: format!("{} ⊗ apparatus", self.description),
        }
    }
}

/// Outcome shared by two PVMs after label alignment. A side with no matching
/// label contributes the zero projection.
#[derive(Clone, Debug, PartialEq)]
pub struct AlignedOutcome {
    pub value: f64,
    pub first: Option<usize>,
    pub second: Option<usize>,
}

fn labels_match(a: f64, b: f64) -> bool {
    (a - b).abs() <= LABEL_TOL * a.abs().max(b.abs()).max(1.0)
}

/// Greedy matching of outcome labels within the label tolerance.
pub fn align_outcomes(e1: &Pvm, e2: &Pvm) -> Result<Vec<AlignedOutcome>> {
    let mut taken = vec![false; e2.len()];
    let mut out = Vec::with_capacity(e1.len() + e2.len());
    for (i, &a) in e1.outcomes().iter().enumerate() {
        let hits: Vec<usize> = (0..e2.len()).filter(|&j| labels_match(a, e2.outcomes()[j])).collect();
        match hits.as_slice() {
            [] => out.push(AlignedOutcome { value: a, first: Some(i), second: None }),
            [j] if !taken[*j] => {
                taken[*j] = true;
                out.push(AlignedOutcome { value: a, first: Some(i), second: Some(*j) });
            }
            _ => return Err(Error::LabelMismatch(format!("outcome {a} matches ambiguously"))),
        }
    }
    for (j, &b) in e2.outcomes().iter().enumerate() {
        if !taken[j] {
            if e1.outcomes().iter().filter(|&&a| labels_match(a, b)).count() > 0 {
                return Err(Error::LabelMismatch(format!("outcome {b} matches ambiguously")));
            }
            out.push(AlignedOutcome { value: b, first: None, second: Some(j) });
        }
    }
    out.sort_by(|x, y| x.value.total_cmp(&y.value));
    Ok(out)
}

fn check_dims(e1: &Pvm, e2: &Pvm) -> Result<()> {
    if e1.dim() != e2.dim() {
        return Err(Error::DimensionMismatch { expected: e1.dim(), found: e2.dim() });
    }
    Ok(())
}

fn side(pvm: &Pvm, idx: Option<usize>) -> Option<&CMatrix> {
    idx.map(|k| &pvm.projections()[k])
}

/// Worst violation of a spectral-equivalence check and where it occurred.
#[derive(Clone, Debug, PartialEq)]
pub struct EquivalenceCheck {
    pub holds: bool,
    pub worst: f64,
    /// `(member, Δ, Γ)` attaining the worst value.
    pub witness: Option<(usize, f64, f64)>,
    pub tol: f64,
}

/// `|φ(E₁(a)E₂(b))|` over atomic disjoint pairs `a ≠ b`.
fn member_violation(e1: &Pvm, e2: &Pvm, aligned: &[AlignedOutcome], phi: &State) -> (f64, Option<(f64, f64)>) {
    let mut worst = 0.0;
    let mut at = None;
    for (i, a) in aligned.iter().enumerate() {
        let Some(p) = side(e1, a.first) else { continue };
        for (j, b) in aligned.iter().enumerate() {
            if i == j {
                continue;
            }
            let Some(q) = side(e2, b.second) else { continue };
            let v = phi.eval(&(p * q)).norm();
            if v > worst || at.is_none() {
                worst = v;
                at = Some((a.value, b.value));
            }
        }
    }
    (worst, at)
}

pub fn spectrally_equivalent(e1: &Pvm, e2: &Pvm, family: &StateFamily, tol: f64) -> Result<EquivalenceCheck> {
    spectrally_equivalent_with(e1, e2, family, tol, Exec::default())
}

pub fn spectrally_equivalent_with(
    e1: &Pvm,
    e2: &Pvm,
    family: &StateFamily,
    tol: f64,
    exec: Exec,
) -> Result<EquivalenceCheck> {
    check_dims(e1, e2)?;
    if let Some(d) = family.dim() {
        if d != e1.dim() {
            return Err(Error::DimensionMismatch { expected: e1.dim(), found: d });
        }
    }
    let aligned = align_outcomes(e1, e2)?;
    let per_member = exec.map(family.members(), |phi| member_violation(e1, e2, &aligned, phi));
    let mut worst = 0.0;
    let mut witness = None;
    for (m, (v, at)) in per_member.into_iter().enumerate() {
        if let Some((a, b)) = at {
            if v > worst || witness.is_none() {
                worst = v;
                witness = Some((m, a, b));
            }
        }
    }
    Ok(EquivalenceCheck { holds: worst <= tol, worst, witness, tol })
}

/// `p(a, b) = φ(E₁(a)E₂(b))` on the aligned outcome grid.
#[derive(Clone, Debug)]
pub struct JointDistribution {
    pub labels: Vec<f64>,
    /// Real parts, indexed `[row][col]`.
    pub masses: Vec<Vec<f64>>,
    pub imaginary: Vec<Vec<f64>>,
}

impl JointDistribution {
    pub fn total(&self) -> f64 {
        self.masses.iter().flatten().sum()
    }

    pub fn off_diagonal_mass(&self) -> f64 {
        let mut s = 0.0;
        for (i, row) in self.masses.iter().enumerate() {
            for (j, p) in row.iter().enumerate() {
                if i != j {
                    s += p.hypot(self.imaginary[i][j]);
                }
            }
        }
        s
    }

    pub fn diagonal_support(&self, tol: f64) -> bool {
        self.off_diagonal_mass() <= tol
    }

    pub fn max_imaginary(&self) -> f64 {
        self.imaginary.iter().flatten().fold(0.0, |m, v| m.max(v.abs()))
    }

    pub fn min_mass(&self) -> f64 {
        self.masses.iter().flatten().fold(f64::INFINITY, |m, &v| m.min(v))
    }
}

pub fn joint_distribution(e1: &Pvm, e2: &Pvm, phi: &State) -> Result<JointDistribution> {
    check_dims(e1, e2)?;
    if phi.dim() != e1.dim() {
        return Err(Error::DimensionMismatch { expected: e1.dim(), found: phi.dim() });
    }
    let aligned = align_outcomes(e1, e2)?;
    let k = aligned.len();
    let mut masses = vec![vec![0.0; k]; k];
    let mut imaginary = vec![vec![0.0; k]; k];
    for (i, a) in aligned.iter().enumerate() {
        let Some(p) = side(e1, a.first) else { continue };
        for (j, b) in aligned.iter().enumerate() {
            let Some(q) = side(e2, b.second) else { continue };
            let v: C64 = phi.eval(&(p * q));
            masses[i][j] = v.re;
            imaginary[i][j] = v.im;
        }
    }
    Ok(JointDistribution { labels: aligned.iter().map(|a| a.value).collect(), masses, imaginary })
}

/// `max_Δ ‖((E₁(Δ) − E₂(Δ)) ⊗ 1) ξ‖` over atomic `Δ` for the purification `ξ`.
fn vector_residual(e1: &Pvm, e2: &Pvm, xi: &[C64]) -> Result<f64> {
    let aligned = align_outcomes(e1, e2)?;
    let d = e1.dim();
    let zero = CMatrix::zeros(d, d);
    let id = CMatrix::identity(d);
    let mut worst: f64 = 0.0;
    for a in &aligned {
        let p = side(e1, a.first).unwrap_or(&zero);
        let q = side(e2, a.second).unwrap_or(&zero);
        let diff = kron(&(p - q), &id);
        worst = worst.max(vec_norm(&diff.matvec(xi)));
    }
    Ok(worst)
}

#[derive(Clone, Debug)]
pub struct RelationReport {
    /// `residual[i][j]`: worst vector-criterion residual between PVMs `i`, `j`.
    pub residual: Vec<Vec<f64>>,
    pub related: Vec<Vec<bool>>,
    pub reflexive: bool,
    pub symmetric: bool,
    pub transitive: bool,
    /// `(i, j, k, residual(i, k))` with `i ~ j`, `j ~ k` but not `i ~ k`.
    pub counterexamples: Vec<(usize, usize, usize, f64)>,
    pub tol: f64,
}

impl RelationReport {
    pub fn passes(&self) -> bool {
        self.reflexive && self.symmetric && self.transitive
    }
}

/// Equivalence-relation properties of `=_𝒮` on `pvms`, using the vector
/// criterion on purifications of each family member.
pub fn equivalence_relation_check(pvms: &[Pvm], family: &StateFamily) -> Result<RelationReport> {
    let n = pvms.len();
    if let (Some(first), Some(d)) = (pvms.first(), family.dim()) {
        if first.dim() != d {
            return Err(Error::DimensionMismatch { expected: first.dim(), found: d });
        }
    }
    for p in pvms {
        if let Some(first) = pvms.first() {
            check_dims(first, p)?;
        }
    }
    let xis = family.members().iter().map(State::purification).collect::<Result<Vec<_>>>()?;
    let mut residual = vec![vec![0.0; n]; n];
    for i in 0..n {
        for j in 0..n {
            let mut worst: f64 = 0.0;
            for xi in &xis {
                worst = worst.max(vector_residual(&pvms[i], &pvms[j], xi)?);
            }
            residual[i][j] = worst;
        }
    }
    let tol = EQUIV_TOL;
    let related: Vec<Vec<bool>> = residual.iter().map(|r| r.iter().map(|&v| v <= tol).collect()).collect();
    let reflexive = (0..n).all(|i| related[i][i]);
    let symmetric = (0..n).all(|i| (0..n).all(|j| related[i][j] == related[j][i]));
    let mut counterexamples = Vec::new();
    for i in 0..n {
        for j in 0..n {
            if !related[i][j] {
                continue;
            }
            for k in 0..n {
                if related[j][k] && !related[i][k] {
                    counterexamples.push((i, j, k, residual[i][k]));
                }
            }
        }
    }
    Ok(RelationReport {
        residual,
        related,
        reflexive,
        symmetric,
        transitive: counterexamples.is_empty(),
        counterexamples,
        tol,
    })
}

/// Spectral equivalence of `Δ ↦ U*(1⊗χ_Δ)U` and `Δ ↦ E^A(Δ)⊗1` on
/// `{φ ⊗ ψ : φ ∈ family}` for a family of object states.
pub fn verify_mppc(process: &MeasurementProcess, family: &StateFamily) -> Result<EquivalenceCheck> {
    verify_mppc_with(process, family, Exec::default())
}

pub fn verify_mppc_with(process: &MeasurementProcess, family: &StateFamily, exec: Exec) -> Result<EquivalenceCheck> {
    if let Some(d) = family.dim() {
        if d != process.object_dim() {
            return Err(Error::DimensionMismatch { expected: process.object_dim(), found: d });
        }
    }
    let products = family.tensor_with(process.apparatus());
    spectrally_equivalent_with(&process.readout_pvm(), &process.object_pvm(), &products, EQUIV_TOL, exec)
}

#[derive(Clone, Debug, PartialEq)]
pub struct BornCheck {
    /// Generalized Born probability read off the pointer.
    pub lhs: f64,
    /// `φ̃(E^A(Δ))`
    pub rhs: f64,
    pub pass: bool,
    pub residual: f64,
    /// Violation of the measurement-process condition on `{φ̃ ⊗ ψ}`.
    pub mppc_violation: f64,
}

/// Classical Born rule, conditional on the measurement-process condition
/// holding for `φ̃`.
pub fn born_rule(process: &MeasurementProcess, phi: &State, delta: &[f64]) -> Result<BornCheck> {
    let mppc = verify_mppc_with(process, &StateFamily::singleton(phi.clone()), Exec::Sequential)?;
    if !mppc.holds {
        return Err(Error::MppcFailed { violation: mppc.worst });
    }
    let lhs = process.generalized_born(phi, delta)?;
    let rhs = phi.eval(&process.pvm().projection_for(delta)?).re;
    let residual = (lhs - rhs).abs();
    Ok(BornCheck { lhs, rhs, pass: residual <= EQUIV_TOL, residual, mppc_violation: mppc.worst })
}

/// Every subset of the outcomes, as outcome values, in binary-counter order.
pub fn outcome_subsets(pvm: &Pvm) -> Vec<Vec<f64>> {
    let n = pvm.len();
    (0u64..(1u64 << n))
        .map(|mask| (0..n).filter(|&j| mask >> j & 1 == 1).map(|j| pvm.outcomes()[j]).collect())
        .collect()
}

/// Born checks for every member and every outcome subset.
pub fn born_sweep(process: &MeasurementProcess, family: &StateFamily, exec: Exec) -> Result<Vec<Vec<BornCheck>>> {
    let subsets = outcome_subsets(process.pvm());
    exec.map(family.members(), |phi| {
        subsets.iter().map(|delta| born_rule(process, phi, delta)).collect::<Result<Vec<_>>>()
    })
    .into_iter()
    .collect()
}
