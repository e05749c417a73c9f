//! Query execution.

use std::panic::{self, AssertUnwindSafe};
use std::time::Instant;

use qsector::equivalence::{joint_distribution, spectrally_equivalent_with, verify_mppc_with, StateFamily};
use qsector::linalg::kron;
use qsector::sector::{central_measure, is_factor_state};
use qsector::tol::CLUSTER_GAP;
use qsector::{gns, pvm_from_observable, CMatrix, Exec, MeasurementProcess, Pvm, C64};
use serde_json::Value as Json;

use crate::ast::{Expr, Query};
use crate::check::Program;
use crate::eval::{Env, EvalResult, Value};
use crate::printer;
use crate::report::{complex, number, Check, QueryResult, Report, SectorRow};

pub const DEFAULT_TOL: f64 = 1e-9;
pub const TOL_ENV: &str = "QSECTOR_TOL";

#[derive(Clone, Copy, Debug)]
pub struct RunOptions {
    pub tol: f64,
    pub seed: u64,
    pub exec: Exec,
    /// Record wall-clock time per query. Reports with timings are not
    /// reproducible byte for byte.
    pub timings: bool,
}

impl Default for RunOptions {
    fn default() -> Self {
        RunOptions { tol: DEFAULT_TOL, seed: 1, exec: Exec::default(), timings: false }
    }
}

/// Executes every query. Results keep declaration order whatever the
/// execution order, and an error in one query never touches another.
pub fn run(program: &Program, opts: &RunOptions) -> Report {
    let env = Env::build(program, opts.seed);
    let queries: Vec<&Query> = program.scenario.queries().collect();
    let results = opts.exec.map_range(queries.len(), |i| {
        let q = queries[i];
        let start = Instant::now();
        let mut r = QueryResult::new(i, &q.kind.name, q.span.line, printer::query(q));
        let outcome = panic::catch_unwind(AssertUnwindSafe(|| {
            let mut partial = r.clone();
            let status = execute(&env, q, opts, &mut partial);
            match status {
                Ok(()) => Ok(partial),
                Err(e) => Err((partial, e)),
            }
        }));
        match outcome {
            Ok(Ok(done)) => r = done,
            Ok(Err((partial, e))) => {
                r = partial;
                r.error = Some(e);
            }
            Err(payload) => r.error = Some(format!("internal error: {}", panic_message(&payload))),
        }
        r.settle();
        if opts.timings {
            r.wall_ms = Some(start.elapsed().as_secs_f64() * 1e3);
        }
        r
    });
    let mut report = Report::new(program.scenario.name.clone(), opts.tol, opts.seed, results);
    report.warnings =
        env.failures().into_iter().map(|(name, e)| format!("`{name}` could not be evaluated: {e}")).collect();
    report
}

fn panic_message(payload: &Box<dyn std::any::Any + Send>) -> String {
    if let Some(s) = payload.downcast_ref::<&str>() {
        (*s).to_string()
    } else if let Some(s) = payload.downcast_ref::<String>() {
        s.clone()
    } else {
        "panic".into()
    }
}

fn execute(env: &Env, q: &Query, opts: &RunOptions, r: &mut QueryResult) -> EvalResult<()> {
    let args: Vec<&Expr> = q.positional().collect();
    let expect = q.named("expect").map(|e| env.expr(e)).transpose()?;
    let ctx = Ctx { env, tol: opts.tol, exec: opts.exec };
    match q.kind.name.as_str() {
        "gns" => ctx.gns(&args, r),
        "sectors" => ctx.sectors(&args, expect, r),
        "born" => ctx.born(&args, expect, r),
        "generalized_born" => ctx.generalized_born(&args, expect, r),
        "spectral_eq" => ctx.spectral_eq(&args, expect, r),
        "mppc" => ctx.mppc(&args, expect, r),
        "instrument" => ctx.instrument(&args, r),
        other => Err(format!("unknown query `{other}`")),
    }
}

struct Ctx<'a> {
    env: &'a Env<'a>,
    tol: f64,
    exec: Exec,
}

fn core(e: qsector::Error) -> String {
    e.to_string()
}

fn expected_bool(expect: Option<Value>) -> bool {
    !matches!(expect, Some(Value::Bool(false)))
}

fn expected_number(expect: Option<Value>) -> Option<f64> {
    match expect {
        Some(Value::Scalar(z)) => Some(z.re),
        _ => None,
    }
}

fn numbers(values: &[f64]) -> Json {
    Json::Array(values.iter().map(|&x| number(x)).collect())
}

impl Ctx<'_> {
    fn algebra(&self, e: &Expr) -> EvalResult<qsector::StarAlgebra> {
        match self.env.expr(e)? {
            Value::Algebra(a) => Ok(a),
            _ => Err("expected an algebra".into()),
        }
    }

    fn process(&self, e: &Expr) -> EvalResult<MeasurementProcess> {
        match self.env.expr(e)? {
            Value::Measurement(m) => Ok(*m),
            _ => Err("expected a measurement".into()),
        }
    }

    fn outcomes(&self, e: &Expr, pvm: &Pvm) -> EvalResult<Vec<f64>> {
        match self.env.expr(e)? {
            Value::Outcomes(o) => o.resolve(pvm),
            _ => Err("expected an outcome set".into()),
        }
    }

    fn family(&self, e: &Expr) -> EvalResult<StateFamily> {
        match self.env.expr(e)? {
            Value::Family(f) => Ok(f),
            Value::State(s) => Ok(StateFamily::singleton(s)),
            _ => Err("expected a state or family".into()),
        }
    }

    fn pvm(&self, e: &Expr) -> EvalResult<Pvm> {
        match self.env.expr(e)? {
            Value::Matrix(m) => pvm_from_observable(&m, CLUSTER_GAP).map_err(core),
            Value::Measurement(m) => Ok(m.pvm().clone()),
            _ => Err("expected an observable or measurement".into()),
        }
    }

    fn gns(&self, args: &[&Expr], r: &mut QueryResult) -> EvalResult<()> {
        let alg = self.algebra(args[0])?;
        let omega = self.env.state(args[1])?;
        let rep = gns(&alg, &omega).map_err(core)?;
        r.set("algebra_dim", rep.source_dim());
        r.set("gns_dim", rep.gns_dim());
        r.set("cyclic_rank", rep.cyclic_rank());
        r.check(Check::expect_within("reproduction", rep.reproduction_residual(), self.tol));
        r.check(Check::expect_within("morphism", rep.morphism_residual(), self.tol));
        r.check(Check::expect_within("cyclicity", (rep.gns_dim() - rep.cyclic_rank().min(rep.gns_dim())) as f64, 0.0));
        Ok(())
    }

    fn sectors(&self, args: &[&Expr], expect: Option<Value>, r: &mut QueryResult) -> EvalResult<()> {
        let alg = self.algebra(args[0])?;
        let phi = self.env.state(args[1])?;
        let rep = gns(&alg, &phi).map_err(core)?;
        let measure = central_measure(&rep, &phi).map_err(core)?;
        let weights = measure.weights();
        let mut rows = Vec::with_capacity(measure.components.len());
        for c in &measure.components {
            rows.push(SectorRow {
                label: c.label.to_string(),
                signature: c.label.signature.clone(),
                weight: c.weight,
                factor: is_factor_state(&alg, &c.state).map_err(core)?,
                position: None,
            });
        }
        r.set("components", weights.len());
        r.set("weights", numbers(&weights));
        r.check(Check::expect_within("barycenter", measure.barycenter_residual(&phi), self.tol));
        r.check(Check::expect_within("total weight", (weights.iter().sum::<f64>() - 1.0).abs(), self.tol));
        if let Some(Value::List(items)) = expect {
            let want: Vec<f64> =
                items.iter().filter_map(|v| if let Value::Scalar(z) = v { Some(z.re) } else { None }).collect();
            r.check(Check::expect_within("component count", want.len().abs_diff(weights.len()) as f64, 0.0));
            if want.len() == weights.len() {
                let worst = want.iter().zip(&weights).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
                r.check(Check::expect_within("expected weights", worst, self.tol));
            }
        }
        r.sectors = Some(rows);
        Ok(())
    }

    fn born(&self, args: &[&Expr], expect: Option<Value>, r: &mut QueryResult) -> EvalResult<()> {
        let m = self.process(args[0])?;
        let phi = self.env.state(args[1])?;
        let delta = self.outcomes(args[2], m.pvm())?;
        r.set("outcomes", numbers(&delta));
        let mppc = verify_mppc_with(&m, &StateFamily::singleton(phi.clone()), self.exec).map_err(core)?;
        r.check(Check::expect_within("mppc violation", mppc.worst, self.tol));
        if mppc.worst > self.tol {
            return Ok(());
        }
        let pointer = m.generalized_born(&phi, &delta).map_err(core)?;
        let object = phi.eval(&m.pvm().projection_for(&delta).map_err(core)?).re;
        r.number("probability", pointer);
        r.number("object_probability", object);
        r.check(Check::expect_within("born identity", (pointer - object).abs(), self.tol));
        if let Some(x) = expected_number(expect) {
            r.check(Check::expect_within("expected probability", (pointer - x).abs(), self.tol));
        }
        Ok(())
    }

    fn generalized_born(&self, args: &[&Expr], expect: Option<Value>, r: &mut QueryResult) -> EvalResult<()> {
        let m = self.process(args[0])?;
        let phi = self.env.state(args[1])?;
        let delta = self.outcomes(args[2], m.pvm())?;
        let positions = m.pvm().indices_of(&delta).map_err(core)?;
        r.set("outcomes", numbers(&delta));
        let p = m.generalized_born(&phi, &delta).map_err(core)?;
        r.number("probability", p);
        let sectors = m.pointer_sectors(&phi).map_err(core)?;
        let q = sectors.probability(&positions);
        r.number("sector_probability", q);
        r.check(Check::expect_within("sector consistency", (p - q).abs(), self.tol));
        r.check(Check::expect_within("pointer purity", sectors.max_purity_residual(), self.tol));
        if let Some(x) = expected_number(expect) {
            r.check(Check::expect_within("expected probability", (p - x).abs(), self.tol));
        }
        r.sectors = Some(
            sectors
                .positions
                .iter()
                .zip(&sectors.measure.components)
                .map(|(pos, c)| SectorRow {
                    label: pos.label.to_string(),
                    signature: pos.label.signature.clone(),
                    weight: c.weight,
                    factor: pos.purity_residual <= self.tol,
                    position: Some(pos.position),
                })
                .collect(),
        );
        Ok(())
    }

    fn spectral_eq(&self, args: &[&Expr], expect: Option<Value>, r: &mut QueryResult) -> EvalResult<()> {
        let e1 = self.pvm(args[0])?;
        let e2 = self.pvm(args[1])?;
        let family = self.family(args[2])?;
        let check = spectrally_equivalent_with(&e1, &e2, &family, self.tol, self.exec).map_err(core)?;
        let mut off = 0.0_f64;
        for phi in family.members() {
            off = off.max(joint_distribution(&e1, &e2, phi).map_err(core)?.off_diagonal_mass());
        }
        r.set("equivalent", check.holds);
        r.number("violation", check.worst);
        r.number("off_diagonal_mass", off);
        r.set("members", family.len());
        if let Some((member, a, b)) = check.witness {
            r.set("witness", serde_json::json!({ "member": member, "first": number(a), "second": number(b) }));
        }
        r.check(Check::expecting("violation", check.worst, self.tol, expected_bool(expect)));
        Ok(())
    }

    fn mppc(&self, args: &[&Expr], expect: Option<Value>, r: &mut QueryResult) -> EvalResult<()> {
        let m = self.process(args[0])?;
        let family = self.family(args[1])?;
        let check = verify_mppc_with(&m, &family, self.exec).map_err(core)?;
        r.number("violation", check.worst);
        r.set("members", family.len());
        if let Some((member, a, b)) = check.witness {
            r.set("witness", serde_json::json!({ "member": member, "first": number(a), "second": number(b) }));
        }
        r.check(Check::expecting("violation", check.worst, self.tol, expected_bool(expect)));
        Ok(())
    }

    fn instrument(&self, args: &[&Expr], r: &mut QueryResult) -> EvalResult<()> {
        let phi = self.env.state(args[1])?;
        let Value::List(items) = self.env.expr(args[2])? else { return Err("expected a list".into()) };
        let f: Vec<C64> = items.iter().filter_map(|v| if let Value::Scalar(z) = v { Some(*z) } else { None }).collect();
        let x = self.env.matrix(args[3])?;
        let (direct, other, name) = match self.env.expr(args[0])? {
            Value::Algebra(alg) => {
                let rep = gns(&alg, &phi).map_err(core)?;
                let measure = central_measure(&rep, &phi).map_err(core)?;
                let labels = measure.labels();
                if labels.len() != f.len() {
                    return Err(format!("{} sectors but {} function values", labels.len(), f.len()));
                }
                let lf: Vec<_> = labels.into_iter().zip(f.iter().copied()).collect();
                let i = measure.instrument_functional(&lf, &x).map_err(core)?;
                let k = measure.kappa_pairing(&lf, &x).map_err(core)?;
                (i, k, "kappa identity")
            }
            Value::Measurement(m) => {
                let composite = m.instrument_functional_composite(&phi, &f, &x).map_err(core)?;
                let sectors = m.pointer_sectors(&phi).map_err(core)?;
                let xt = kron(&x, &CMatrix::identity(m.pointer_dim()));
                let via = sectors.measure.instrument_functional(&sectors.label_function(&f), &xt).map_err(core)?;
                (composite, via, "sector instrument")
            }
            _ => return Err("expected an algebra or measurement".into()),
        };
        r.set("value", complex(direct));
        r.set("pairing", complex(other));
        r.check(Check::expect_within(name, (direct - other).norm(), self.tol));
        Ok(())
    }
}
