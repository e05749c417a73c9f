//! Runtime values and expression evaluation.

use std::collections::HashMap;

use qsector::equivalence::StateFamily;
use qsector::linalg::{cyclic_shift, fourier, kron, pauli_x, pauli_y, pauli_z};
use qsector::measurement::swapped_coupling;
use qsector::random::SeededRng;
use qsector::tol::CLUSTER_GAP;
use qsector::{ideal_measurement, pvm_from_observable, CMatrix, MeasurementProcess, Pvm, StarAlgebra, State, C64};

use crate::ast::*;
use crate::check::{as_count, as_index, scalar_binary, scalar_function, Program};

#[derive(Clone, Debug)]
pub enum Value {
    Scalar(C64),
    Bool(bool),
    Matrix(CMatrix),
    State(State),
    Family(StateFamily),
    Algebra(StarAlgebra),
    Measurement(Box<MeasurementProcess>),
    Outcomes(Outcomes),
    List(Vec<Value>),
}

/// Outcome set before it is matched against a PVM.
#[derive(Clone, Debug, PartialEq)]
pub enum Outcomes {
    Values(Vec<f64>),
    All,
    Complement(Box<Outcomes>),
}

impl Outcomes {
    /// Outcome values of `pvm` selected by this set.
    pub fn resolve(&self, pvm: &Pvm) -> Result<Vec<f64>, String> {
        let idx = self.indices(pvm)?;
        Ok(idx.into_iter().map(|j| pvm.outcomes()[j]).collect())
    }

    fn indices(&self, pvm: &Pvm) -> Result<Vec<usize>, String> {
        match self {
            Outcomes::Values(v) => pvm.indices_of(v).map_err(|e| format!("{e} (outcomes are {:?})", pvm.outcomes())),
            Outcomes::All => Ok((0..pvm.len()).collect()),
            Outcomes::Complement(inner) => {
                let inside = inner.indices(pvm)?;
                Ok((0..pvm.len()).filter(|j| !inside.contains(j)).collect())
            }
        }
    }
}

pub type EvalResult<T> = Result<T, String>;

/// Declared values. A declaration that failed at run time is kept as its
/// error so that only the queries using it are affected.
pub struct Env<'a> {
    program: &'a Program,
    seed: u64,
    values: HashMap<String, EvalResult<Value>>,
}

/// Seed for the `ordinal`-th random call of a scenario.
pub fn call_seed(seed: u64, ordinal: u64) -> u64 {
    let mut z = seed ^ ordinal.wrapping_add(1).wrapping_mul(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

impl<'a> Env<'a> {
    /// Evaluates every declaration in document order.
    pub fn build(program: &'a Program, seed: u64) -> Self {
        let mut env = Env { program, seed, values: HashMap::new() };
        for item in &program.scenario.items {
            let (name, value) = match item {
                Item::Let(l) => (&l.name.name, env.expr(&l.value)),
                Item::Algebra(b) => (&b.name.name, env.algebra(b)),
                Item::Measurement(b) => (&b.name.name, env.measurement(b)),
                Item::Query(_) => continue,
            };
            env.values.insert(name.clone(), value);
        }
        env
    }

    /// Run-time error of each failed declaration, in document order.
    pub fn failures(&self) -> Vec<(String, String)> {
        self.program
            .scenario
            .declarations()
            .filter_map(|item| {
                let name = match item {
                    Item::Let(l) => &l.name.name,
                    Item::Algebra(b) | Item::Measurement(b) => &b.name.name,
                    Item::Query(_) => return None,
                };
                match self.values.get(name) {
                    Some(Err(e)) => Some((name.clone(), e.clone())),
                    _ => None,
                }
            })
            .collect()
    }

    fn rng(&self, span: Span) -> SeededRng {
        let ordinal = self.program.random_calls.get(&(span.line, span.col)).copied().unwrap_or(u64::MAX);
        SeededRng::new(call_seed(self.seed, ordinal))
    }

    pub fn expr(&self, e: &Expr) -> EvalResult<Value> {
        match e {
            Expr::Number { value, imaginary, .. } => {
                Ok(Value::Scalar(if *imaginary { C64::new(0.0, *value) } else { C64::new(*value, 0.0) }))
            }
            Expr::Bool { value, .. } => Ok(Value::Bool(*value)),
            Expr::Name(id) => self.name(&id.name),
            Expr::Neg { expr, .. } => match self.expr(expr)? {
                Value::Scalar(z) => Ok(Value::Scalar(-z)),
                Value::Matrix(m) => Ok(Value::Matrix(-&m)),
                _ => Err("cannot negate this value".into()),
            },
            Expr::Binary { op, lhs, rhs, .. } => binary(*op, self.expr(lhs)?, self.expr(rhs)?),
            Expr::Matrix { rows, .. } => {
                let rows = rows
                    .iter()
                    .map(|r| r.iter().map(|x| self.scalar(x)).collect::<EvalResult<Vec<_>>>())
                    .collect::<EvalResult<Vec<_>>>()?;
                CMatrix::from_rows(&rows).map(Value::Matrix).map_err(|e| e.to_string())
            }
            Expr::List { items, .. } => Ok(Value::List(items.iter().map(|x| self.expr(x)).collect::<EvalResult<_>>()?)),
            Expr::Outcomes(set) => Ok(Value::Outcomes(self.outcomes(set)?)),
            Expr::Call { func, args, span } => self.call(&func.name, args, *span),
        }
    }

    fn name(&self, name: &str) -> EvalResult<Value> {
        match self.values.get(name) {
            Some(Ok(v)) => Ok(v.clone()),
            Some(Err(e)) => Err(format!("`{name}` could not be evaluated: {e}")),
            None => match name {
                "pi" => Ok(Value::Scalar(C64::new(std::f64::consts::PI, 0.0))),
                "pauli_x" => Ok(Value::Matrix(pauli_x())),
                "pauli_y" => Ok(Value::Matrix(pauli_y())),
                "pauli_z" => Ok(Value::Matrix(pauli_z())),
                _ => Err(format!("`{name}` is not declared")),
            },
        }
    }

    fn outcomes(&self, set: &OutcomeSet) -> EvalResult<Outcomes> {
        match set {
            OutcomeSet::Values { values, .. } => {
                Ok(Outcomes::Values(values.iter().map(|v| self.scalar(v).map(|z| z.re)).collect::<EvalResult<_>>()?))
            }
            OutcomeSet::All { .. } => Ok(Outcomes::All),
            OutcomeSet::Complement { inner, .. } => Ok(Outcomes::Complement(Box::new(self.outcomes(inner)?))),
        }
    }

    pub fn scalar(&self, e: &Expr) -> EvalResult<C64> {
        match self.expr(e)? {
            Value::Scalar(z) => Ok(z),
            _ => Err("expected a scalar".into()),
        }
    }

    fn count(&self, e: &Expr) -> EvalResult<usize> {
        as_count(self.scalar(e)?).ok_or_else(|| "expected a positive integer".into())
    }

    pub fn matrix(&self, e: &Expr) -> EvalResult<CMatrix> {
        match self.expr(e)? {
            Value::Matrix(m) => Ok(m),
            _ => Err("expected a matrix".into()),
        }
    }

    pub fn state(&self, e: &Expr) -> EvalResult<State> {
        match self.expr(e)? {
            Value::State(s) => Ok(s),
            _ => Err("expected a state".into()),
        }
    }

    fn call(&self, name: &str, args: &[Arg], span: Span) -> EvalResult<Value> {
        let a: Vec<&Expr> = args.iter().map(|a| &a.value).collect();
        let core = |e: qsector::Error| e.to_string();
        let reals = |a: &[&Expr]| a.iter().map(|x| self.scalar(x).map(|z| z.re)).collect::<EvalResult<Vec<f64>>>();
        Ok(match name {
            "pauli_x" => Value::Matrix(pauli_x()),
            "pauli_y" => Value::Matrix(pauli_y()),
            "pauli_z" => Value::Matrix(pauli_z()),
            "identity" => Value::Matrix(CMatrix::identity(self.count(a[0])?)),
            "fourier" => Value::Matrix(fourier(self.count(a[0])?)),
            "shift" => Value::Matrix(cyclic_shift(self.count(a[0])?)),
            "diag" => Value::Matrix(CMatrix::diag(&a.iter().map(|x| self.scalar(x)).collect::<EvalResult<Vec<_>>>()?)),
            "adjoint" => Value::Matrix(self.matrix(a[0])?.adjoint()),
            "kron" => {
                let vals = a.iter().map(|x| self.expr(x)).collect::<EvalResult<Vec<_>>>()?;
                match &vals[0] {
                    Value::Matrix(_) => {
                        let ms: Vec<&CMatrix> =
                            vals.iter().filter_map(|v| if let Value::Matrix(m) = v { Some(m) } else { None }).collect();
                        Value::Matrix(ms[1..].iter().fold(ms[0].clone(), |acc, m| kron(&acc, m)))
                    }
                    _ => {
                        let ss: Vec<&State> =
                            vals.iter().filter_map(|v| if let Value::State(s) = v { Some(s) } else { None }).collect();
                        Value::State(ss[1..].iter().fold(ss[0].clone(), |acc, s| acc.product(s)))
                    }
                }
            }
            "vector" => {
                let v = a.iter().map(|x| self.scalar(x)).collect::<EvalResult<Vec<_>>>()?;
                Value::State(State::from_unnormalized_vector(&v).map_err(core)?)
            }
            "density" => Value::State(State::from_density(self.matrix(a[0])?).map_err(core)?),
            "mixture" => {
                let mut parts = Vec::with_capacity(args.len());
                for arg in args {
                    let w = self.scalar(arg.weight.as_ref().ok_or("missing weight")?)?.re;
                    parts.push((w, self.state(&arg.value)?));
                }
                let refs: Vec<(f64, &State)> = parts.iter().map(|(w, s)| (*w, s)).collect();
                Value::State(State::mixture(&refs).map_err(core)?)
            }
            "maximally_mixed" => Value::State(State::maximally_mixed(self.count(a[0])?)),
            "family" => {
                let members = a.iter().map(|x| self.state(x)).collect::<EvalResult<Vec<_>>>()?;
                Value::Family(StateFamily::new(members, "declared family").map_err(core)?)
            }
            "random_state" => {
                Value::State(State::from_density(self.rng(span).density(self.count(a[0])?)).map_err(core)?)
            }
            "random_pure" => {
                let v = self.rng(span).unit_vector(self.count(a[0])?);
                Value::State(State::from_unnormalized_vector(&v).map_err(core)?)
            }
            "random_hermitian" => Value::Matrix(self.rng(span).hermitian(self.count(a[0])?)),
            "random_unitary" => Value::Matrix(self.rng(span).unitary(self.count(a[0])?)),
            "random_observable" => Value::Matrix(self.rng(span).observable_with_spectrum(&reals(&a)?)),
            "random_family" => {
                let (n, count) = (self.count(a[0])?, self.count(a[1])?);
                let mut rng = self.rng(span);
                let members = (0..count)
                    .map(|_| State::from_density(rng.density(n)).map_err(core))
                    .collect::<EvalResult<Vec<_>>>()?;
                Value::Family(StateFamily::new(members, format!("{count} random states")).map_err(core)?)
            }
            _ => match scalar_function(name, self.scalar(a[0])?) {
                Some(z) => Value::Scalar(z),
                None => return Err(format!("unknown function `{name}`")),
            },
        })
    }

    fn algebra(&self, b: &Block) -> EvalResult<Value> {
        let core = |e: qsector::Error| e.to_string();
        let shape = b.entries.iter().find(|e| e.key.name != "dim").ok_or("algebra without shape")?;
        let alg = match shape.key.name.as_str() {
            "full" => StarAlgebra::full(self.count(&shape.value)?),
            "diagonal" => StarAlgebra::diagonal(self.count(&shape.value)?),
            "direct_sum" => {
                let Value::List(items) = self.expr(&shape.value)? else { return Err("expected a list".into()) };
                let sizes = items
                    .iter()
                    .map(|v| match v {
                        Value::Scalar(z) => as_count(*z).ok_or_else(|| "block sizes are positive integers".to_string()),
                        _ => Err("block sizes are positive integers".into()),
                    })
                    .collect::<EvalResult<Vec<_>>>()?;
                StarAlgebra::direct_sum(&sizes).map_err(core)?
            }
            "tensor" => {
                let Value::List(items) = self.expr(&shape.value)? else { return Err("expected a list".into()) };
                let algs: Vec<&StarAlgebra> =
                    items.iter().filter_map(|v| if let Value::Algebra(a) = v { Some(a) } else { None }).collect();
                algs[1..].iter().fold(algs[0].clone(), |acc, a| StarAlgebra::tensor(&acc, a))
            }
            _ => {
                let Value::List(items) = self.expr(&shape.value)? else { return Err("expected a list".into()) };
                let gens: Vec<CMatrix> =
                    items.into_iter().filter_map(|v| if let Value::Matrix(m) = v { Some(m) } else { None }).collect();
                let d = match b.get("dim") {
                    Some(e) => self.count(&e.value)?,
                    None => gens[0].rows(),
                };
                StarAlgebra::generate(&gens, d).map_err(core)?
            }
        };
        Ok(Value::Algebra(alg))
    }

    fn measurement(&self, b: &Block) -> EvalResult<Value> {
        let core = |e: qsector::Error| e.to_string();
        let obs = self.matrix(&b.get("observable").ok_or("missing observable")?.value)?;
        let pvm = pvm_from_observable(&obs, CLUSTER_GAP).map_err(core)?;
        let base = match b.get("coupling").map(|e| &e.value) {
            Some(Expr::Call { args, .. }) => {
                let i = as_index(self.scalar(&args[0].value)?).ok_or("bad outcome position")?;
                let j = as_index(self.scalar(&args[1].value)?).ok_or("bad outcome position")?;
                swapped_coupling(&pvm, i, j).map_err(core)?
            }
            _ => ideal_measurement(&pvm),
        };
        let pointer = b.get("pointer").map(|e| self.state(&e.value)).transpose()?;
        let object = match b.get("algebra") {
            Some(e) => match self.expr(&e.value)? {
                Value::Algebra(a) => Some(a),
                _ => return Err("expected an algebra".into()),
            },
            None => None,
        };
        let process = if pointer.is_none() && object.is_none() {
            base
        } else {
            MeasurementProcess::new(
                base.unitary().clone(),
                pointer.unwrap_or_else(|| base.apparatus().clone()),
                pvm,
                object.unwrap_or_else(|| base.object_algebra().clone()),
            )
            .map_err(core)?
        };
        Ok(Value::Measurement(Box::new(process)))
    }
}

fn binary(op: BinOp, a: Value, b: Value) -> EvalResult<Value> {
    let m = match (a, b) {
        (Value::Scalar(x), Value::Scalar(y)) => return Ok(Value::Scalar(scalar_binary(op, x, y))),
        (Value::Matrix(x), Value::Matrix(y)) => match op {
            BinOp::Add => &x + &y,
            BinOp::Sub => &x - &y,
            BinOp::Mul => &x * &y,
            BinOp::Div => return Err("cannot divide by a matrix".into()),
        },
        (Value::Scalar(s), Value::Matrix(x)) if op == BinOp::Mul => x.scale(s),
        (Value::Matrix(x), Value::Scalar(s)) if op == BinOp::Mul => x.scale(s),
        (Value::Matrix(x), Value::Scalar(s)) if op == BinOp::Div => x.scale(C64::new(1.0, 0.0) / s),
        _ => return Err(format!("cannot apply `{}` to these values", op.symbol())),
    };
    Ok(Value::Matrix(m))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::check::parse;

    fn env_value(src: &str, name: &str) -> EvalResult<Value> {
        let p = parse(src).unwrap();
        let env = Env::build(&p, 7);
        env.name(name)
    }

    #[test]
    fn arithmetic_on_matrices() {
        let Value::Matrix(m) = env_value("let a = 2 * pauli_x * pauli_x - identity(2) / 2", "a").unwrap() else {
            panic!()
        };
        assert!(m.distance(&CMatrix::identity(2).scale_real(1.5)) < 1e-15);
    }

    #[test]
    fn vector_normalises() {
        let Value::State(s) = env_value("let s = vector(1, 1i)", "s").unwrap() else { panic!() };
        assert!((s.density()[(0, 1)] - C64::new(0.0, -0.5)).norm() < 1e-15);
    }

    #[test]
    fn runtime_failure_is_contained() {
        let p = parse("let s = vector(0, 0)\nlet t = vector(1, 0)").unwrap();
        let env = Env::build(&p, 1);
        assert!(env.name("t").is_ok());
        let err = env.name("s").unwrap_err();
        assert!(err.contains("`s`"), "{err}");
        assert_eq!(env.failures().len(), 1);
    }

    #[test]
    fn random_calls_depend_on_position_and_seed() {
        let src = "let a = random_hermitian(3)\nlet b = random_hermitian(3)";
        let p = parse(src).unwrap();
        let get = |seed, n: &str| match Env::build(&p, seed).name(n).unwrap() {
            Value::Matrix(m) => m,
            _ => panic!(),
        };
        assert_eq!(get(3, "a"), get(3, "a"));
        assert_ne!(get(3, "a"), get(3, "b"));
        assert_ne!(get(3, "a"), get(4, "a"));
    }

    #[test]
    fn outcome_sets_resolve() {
        let pvm = pvm_from_observable(&CMatrix::diag_real(&[-1.0, 0.0, 2.0]), 1e-9).unwrap();
        let c = Outcomes::Complement(Box::new(Outcomes::Values(vec![0.0])));
        assert_eq!(c.resolve(&pvm).unwrap(), vec![-1.0, 2.0]);
        assert_eq!(Outcomes::All.resolve(&pvm).unwrap().len(), 3);
        assert!(Outcomes::Values(vec![5.0]).resolve(&pvm).is_err());
    }

    #[test]
    fn measurement_with_pointer() {
        let src = "let z = pauli_z\nmeasurement M { observable = z, pointer = vector(1, 0) }";
        let Value::Measurement(m) = env_value(src, "M").unwrap() else { panic!() };
        assert_eq!(m.pointer_dim(), 2);
    }
}
