//! Seeded property battery across the toolkit, run by `qsector selftest`.

use qsector::equivalence::{joint_distribution, outcome_subsets, verify_mppc_with, StateFamily};
use qsector::measurement::swapped_coupling;
use qsector::random::SeededRng;
use qsector::sector::{central_measure, commutant_with};
use qsector::{gns, ideal_measurement, pvm_from_observable, CMatrix, Exec, StarAlgebra, State};

use crate::check::parse;
use crate::demos::CORPUS;
use crate::printer::print_scenario;
use crate::report::to_json;
use crate::runner::{run, RunOptions};

#[derive(Clone, Debug)]
pub struct Outcome {
    pub name: &'static str,
    pub worst: f64,
    pub tolerance: f64,
    pub pass: bool,
}

fn outcome(name: &'static str, worst: f64, tolerance: f64) -> Outcome {
    Outcome { name, worst, tolerance, pass: worst.is_finite() && worst <= tolerance }
}

/// Block algebra of the given sizes conjugated by a random unitary.
fn rotated_algebra(rng: &mut SeededRng, blocks: &[usize]) -> StarAlgebra {
    let base = StarAlgebra::direct_sum(blocks).expect("positive block sizes");
    let d = base.ambient_dim();
    let u = rng.unitary(d);
    let gens: Vec<CMatrix> = base.basis().iter().map(|b| &(&u * b) * &u.adjoint()).collect();
    StarAlgebra::generate(&gens, d).expect("conjugated basis closes")
}

fn shapes(rng: &mut SeededRng) -> Vec<usize> {
    let k = 1 + rng.index(3);
    (0..k).map(|_| 1 + rng.index(2)).collect()
}

fn gns_reproduction(seed: u64, exec: Exec) -> Vec<Outcome> {
    let mut rng = SeededRng::new(seed);
    let cases: Vec<(StarAlgebra, State)> = (0..20)
        .map(|_| {
            let blocks = shapes(&mut rng);
            let alg = rotated_algebra(&mut rng, &blocks);
            let s = State::from_density(rng.density(alg.ambient_dim())).expect("random density");
            (alg, s)
        })
        .collect();
    let res = exec.map(&cases, |(a, s)| {
        let rep = gns(a, s).expect("state on algebra");
        (rep.reproduction_residual(), rep.morphism_residual())
    });
    vec![
        outcome("gns reproduction", res.iter().map(|r| r.0).fold(0.0, f64::max), 1e-10),
        outcome("gns morphism", res.iter().map(|r| r.1).fold(0.0, f64::max), 1e-9),
    ]
}

fn double_commutant(seed: u64, exec: Exec) -> Outcome {
    let mut rng = SeededRng::new(seed ^ 0x2);
    let algs: Vec<StarAlgebra> = (0..10)
        .map(|_| {
            let blocks = shapes(&mut rng);
            rotated_algebra(&mut rng, &blocks)
        })
        .collect();
    let worst = exec
        .map(&algs, |a| {
            let c = commutant_with(a, Exec::Sequential).expect("commutant");
            let cc = commutant_with(&c, Exec::Sequential).expect("double commutant");
            cc.span_distance(a).expect("same ambient")
        })
        .into_iter()
        .fold(0.0, f64::max);
    outcome("double commutant", worst, 1e-8)
}

fn two_sector() -> Outcome {
    let alg = StarAlgebra::direct_sum(&[2, 3]).expect("blocks");
    let rho = State::from_density(CMatrix::diag_real(&[0.125, 0.125, 0.25, 0.25, 0.25])).expect("density");
    let rep = gns(&alg, &rho).expect("gns");
    let m = central_measure(&rep, &rho).expect("central measure");
    let w = m.weights();
    let worst = if w.len() == 2 { (w[0] - 0.25).abs().max((w[1] - 0.75).abs()) } else { f64::INFINITY };
    outcome("two-sector weights", worst.max(m.barycenter_residual(&rho)), 1e-10)
}

fn born_oracle(seed: u64, exec: Exec) -> Vec<Outcome> {
    let mut rng = SeededRng::new(seed ^ 0x5);
    let cases: Vec<(CMatrix, State)> = (0..20)
        .map(|k| {
            let n = 2 + k % 3;
            let spectrum: Vec<f64> = (0..n).map(|j| j as f64 * 1.5 - 1.0).collect();
            let d = n + rng.index(2);
            let mut full = spectrum.clone();
            full.resize(d, spectrum[0]);
            let a = rng.observable_with_spectrum(&full);
            (a, State::from_density(rng.density(d)).expect("density"))
        })
        .collect();
    let res = exec.map(&cases, |(a, phi)| {
        let pvm = pvm_from_observable(a, 1e-7).expect("observable");
        let m = ideal_measurement(&pvm);
        let sectors = m.pointer_sectors(phi).expect("pointer sectors");
        let mut born: f64 = 0.0;
        let mut sector: f64 = 0.0;
        for delta in outcome_subsets(&pvm) {
            let p = m.generalized_born(phi, &delta).expect("outcomes");
            let oracle = (phi.density() * &pvm.projection_for(&delta).expect("outcomes")).trace().re;
            born = born.max((p - oracle).abs());
            let idx = pvm.indices_of(&delta).expect("outcomes");
            sector = sector.max((sectors.probability(&idx) - p).abs());
        }
        (born, sector, sectors.max_purity_residual())
    });
    vec![
        outcome("generalized born", res.iter().map(|r| r.0).fold(0.0, f64::max), 1e-10),
        outcome("pointer sectors", res.iter().map(|r| r.1).fold(0.0, f64::max), 1e-10),
        outcome("pointer purity", res.iter().map(|r| r.2).fold(0.0, f64::max), 1e-9),
    ]
}

fn mppc(seed: u64, exec: Exec) -> Vec<Outcome> {
    let mut rng = SeededRng::new(seed ^ 0x7);
    let a = rng.observable_with_spectrum(&[-1.0, 0.5, 2.0]);
    let pvm = pvm_from_observable(&a, 1e-7).expect("observable");
    let m = ideal_measurement(&pvm);
    let members: Vec<State> = (0..5).map(|_| State::from_density(rng.density(3)).expect("density")).collect();
    let family = StateFamily::new(members, "random").expect("same dimension");
    let ideal = verify_mppc_with(&m, &family, exec).expect("mppc").worst;
    let mut off: f64 = 0.0;
    for phi in family.tensor_with(m.apparatus()).members() {
        off = off.max(joint_distribution(&m.readout_pvm(), &m.object_pvm(), phi).expect("aligned").off_diagonal_mass());
    }
    let bad = swapped_coupling(&pvm, 0, 2).expect("swap");
    let corrupted = verify_mppc_with(&bad, &family, exec).expect("mppc").worst;
    vec![
        outcome("mppc ideal", ideal, 1e-9),
        outcome("joint off-diagonal", off, 1e-10),
        Outcome { name: "mppc corrupted", worst: corrupted, tolerance: 0.1, pass: corrupted >= 0.1 },
    ]
}

fn corpus(seed: u64, exec: Exec) -> Vec<Outcome> {
    let mut round_trip = 0.0;
    let mut determinism = 0.0;
    for (_, src) in CORPUS {
        let Ok(p) = parse(src) else {
            round_trip = f64::INFINITY;
            continue;
        };
        if parse(&print_scenario(&p.scenario)).map(|q| q.scenario != p.scenario).unwrap_or(true) {
            round_trip += 1.0;
        }
        let opts = RunOptions { seed, exec, ..RunOptions::default() };
        if to_json(&run(&p, &opts)) != to_json(&run(&p, &opts)) {
            determinism += 1.0;
        }
    }
    vec![outcome("corpus round trip", round_trip, 0.0), outcome("report determinism", determinism, 0.0)]
}

/// Runs every property group.
pub fn run_all(seed: u64, exec: Exec) -> Vec<Outcome> {
    let mut out = gns_reproduction(seed, exec);
    out.push(double_commutant(seed, exec));
    out.push(two_sector());
    out.extend(born_oracle(seed, exec));
    out.extend(mppc(seed, exec));
    out.extend(corpus(seed, exec));
    out
}
