//! Name resolution, type and dimension inference. Everything that can be
//! decided without numerical work is decided here, before execution.

use std::collections::HashMap;
use std::fmt;

use num_complex::Complex64 as C64;

use crate::ast::*;
use crate::error::ScenarioError;
use crate::parser::parse_syntax;

#[derive(Clone, Debug, PartialEq)]
pub enum Ty {
    Scalar(C64),
    Bool,
    Matrix(usize, usize),
    State(usize),
    Family(usize),
    Algebra(usize),
    Measurement(usize),
    Outcomes,
    List(Vec<Ty>),
}

impl fmt::Display for Ty {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Ty::Scalar(_) => f.write_str("scalar"),
            Ty::Bool => f.write_str("boolean"),
            Ty::Matrix(r, c) => write!(f, "{r}x{c} matrix"),
            Ty::State(d) => write!(f, "state on dimension {d}"),
            Ty::Family(d) => write!(f, "state family on dimension {d}"),
            Ty::Algebra(d) => write!(f, "algebra on dimension {d}"),
            Ty::Measurement(d) => write!(f, "measurement on dimension {d}"),
            Ty::Outcomes => f.write_str("outcome set"),
            Ty::List(items) => write!(f, "list of {}", items.len()),
        }
    }
}

pub const QUERY_KINDS: &[&str] = &["gns", "sectors", "born", "generalized_born", "spectral_eq", "mppc", "instrument"];

/// Builtins that draw from the scenario seed.
pub const RANDOM_BUILTINS: &[&str] =
    &["random_state", "random_pure", "random_hermitian", "random_unitary", "random_observable", "random_family"];

const BUILTINS: &[&str] = &[
    "pauli_x",
    "pauli_y",
    "pauli_z",
    "identity",
    "fourier",
    "shift",
    "diag",
    "kron",
    "adjoint",
    "vector",
    "density",
    "mixture",
    "maximally_mixed",
    "family",
    "sqrt",
    "sin",
    "cos",
    "exp",
    "conj",
    "pi",
    "random_state",
    "random_pure",
    "random_hermitian",
    "random_unitary",
    "random_observable",
    "random_family",
];

/// A scenario that passed every static check.
#[derive(Clone, Debug)]
pub struct Program {
    pub scenario: Scenario,
    pub types: HashMap<String, Ty>,
    /// Document-order index of each random builtin call, keyed by position.
    pub random_calls: HashMap<(usize, usize), u64>,
}

impl Program {
    pub fn declaration_count(&self) -> usize {
        self.scenario.declarations().count()
    }

    pub fn query_count(&self) -> usize {
        self.scenario.queries().count()
    }
}

/// Parses and checks a scenario.
pub fn parse(src: &str) -> Result<Program, ScenarioError> {
    check(parse_syntax(src)?)
}

pub fn check(scenario: Scenario) -> Result<Program, ScenarioError> {
    let mut c = Checker { types: HashMap::new(), random_calls: HashMap::new() };
    for item in &scenario.items {
        match item {
            Item::Let(l) => {
                let ty = c.expr(&l.value)?;
                c.declare(&l.name, ty)?;
            }
            Item::Algebra(b) => {
                let ty = c.algebra(b)?;
                c.declare(&b.name, ty)?;
            }
            Item::Measurement(b) => {
                let ty = c.measurement(b)?;
                c.declare(&b.name, ty)?;
            }
            Item::Query(q) => c.query(q)?,
        }
    }
    Ok(Program { scenario, types: c.types, random_calls: c.random_calls })
}

struct Checker {
    types: HashMap<String, Ty>,
    random_calls: HashMap<(usize, usize), u64>,
}

fn err<T>(span: Span, msg: impl Into<String>) -> Result<T, ScenarioError> {
    Err(ScenarioError::semantic(span, msg))
}

/// Positive integer from a folded scalar.
pub fn as_count(z: C64) -> Option<usize> {
    (z.im == 0.0 && z.re >= 1.0 && z.re.fract() == 0.0 && z.re <= 1e6).then_some(z.re as usize)
}

/// Non-negative integer from a folded scalar.
pub fn as_index(z: C64) -> Option<usize> {
    (z.im == 0.0 && z.re >= 0.0 && z.re.fract() == 0.0 && z.re <= 1e6).then_some(z.re as usize)
}

pub fn scalar_binary(op: BinOp, a: C64, b: C64) -> C64 {
    match op {
        BinOp::Add => a + b,
        BinOp::Sub => a - b,
        BinOp::Mul => a * b,
        BinOp::Div => a / b,
    }
}

pub fn scalar_function(name: &str, z: C64) -> Option<C64> {
    Some(match name {
        "sqrt" => z.sqrt(),
        "sin" => z.sin(),
        "cos" => z.cos(),
        "exp" => z.exp(),
        "conj" => z.conj(),
        _ => return None,
    })
}

impl Checker {
    fn declare(&mut self, name: &Ident, ty: Ty) -> Result<(), ScenarioError> {
        if BUILTINS.contains(&name.name.as_str()) {
            return err(name.span, format!("`{}` is a builtin and cannot be redeclared", name.name));
        }
        if self.types.contains_key(&name.name) {
            return err(name.span, format!("`{}` is already declared", name.name));
        }
        self.types.insert(name.name.clone(), ty);
        Ok(())
    }

    fn lookup(&self, id: &Ident) -> Result<Ty, ScenarioError> {
        if let Some(t) = self.types.get(&id.name) {
            return Ok(t.clone());
        }
        match id.name.as_str() {
            "pi" => Ok(Ty::Scalar(C64::new(std::f64::consts::PI, 0.0))),
            "pauli_x" | "pauli_y" | "pauli_z" => Ok(Ty::Matrix(2, 2)),
            _ => err(id.span, format!("undeclared name `{}`", id.name)),
        }
    }

    fn scalar(&mut self, e: &Expr) -> Result<C64, ScenarioError> {
        match self.expr(e)? {
            Ty::Scalar(z) => Ok(z),
            other => err(e.span(), format!("expected a scalar, found {other}")),
        }
    }

    fn count(&mut self, e: &Expr) -> Result<usize, ScenarioError> {
        let z = self.scalar(e)?;
        as_count(z).ok_or_else(|| ScenarioError::semantic(e.span(), "expected a positive integer"))
    }

    fn expr(&mut self, e: &Expr) -> Result<Ty, ScenarioError> {
        match e {
            Expr::Number { value, imaginary, .. } => {
                Ok(Ty::Scalar(if *imaginary { C64::new(0.0, *value) } else { C64::new(*value, 0.0) }))
            }
            Expr::Bool { .. } => Ok(Ty::Bool),
            Expr::Name(id) => self.lookup(id),
            Expr::Neg { expr, span } => match self.expr(expr)? {
                Ty::Scalar(z) => Ok(Ty::Scalar(-z)),
                m @ Ty::Matrix(..) => Ok(m),
                other => err(*span, format!("cannot negate a {other}")),
            },
            Expr::Binary { op, lhs, rhs, span } => {
                let (a, b) = (self.expr(lhs)?, self.expr(rhs)?);
                binary_type(*op, &a, &b).ok_or_else(|| {
                    ScenarioError::semantic(*span, format!("cannot apply `{}` to {a} and {b}", op.symbol()))
                })
            }
            Expr::Matrix { rows, span } => {
                let cols = rows[0].len();
                for row in rows {
                    if row.len() != cols {
                        return err(*span, format!("matrix rows have lengths {} and {}", cols, row.len()));
                    }
                    for x in row {
                        self.scalar(x)?;
                    }
                }
                if cols == 0 {
                    return err(*span, "empty matrix literal");
                }
                Ok(Ty::Matrix(rows.len(), cols))
            }
            Expr::List { items, .. } => Ok(Ty::List(items.iter().map(|x| self.expr(x)).collect::<Result<_, _>>()?)),
            Expr::Outcomes(set) => {
                self.outcomes(set)?;
                Ok(Ty::Outcomes)
            }
            Expr::Call { func, args, span } => self.call(func, args, *span),
        }
    }

    fn outcomes(&mut self, set: &OutcomeSet) -> Result<(), ScenarioError> {
        match set {
            OutcomeSet::Values { values, .. } => {
                for v in values {
                    let z = self.scalar(v)?;
                    if z.im != 0.0 {
                        return err(v.span(), "outcome values are real");
                    }
                }
                Ok(())
            }
            OutcomeSet::All { .. } => Ok(()),
            OutcomeSet::Complement { inner, .. } => self.outcomes(inner),
        }
    }

    fn plain_args<'a>(&self, func: &Ident, args: &'a [Arg]) -> Result<Vec<&'a Expr>, ScenarioError> {
        for a in args {
            if a.name.is_some() || a.weight.is_some() {
                return err(a.value.span(), format!("`{}` takes plain arguments", func.name));
            }
        }
        Ok(args.iter().map(|a| &a.value).collect())
    }

    fn arity(func: &Ident, args: &[&Expr], n: usize) -> Result<(), ScenarioError> {
        if args.len() != n {
            return err(func.span, format!("`{}` takes {n} argument(s), found {}", func.name, args.len()));
        }
        Ok(())
    }

    fn call(&mut self, func: &Ident, args: &[Arg], span: Span) -> Result<Ty, ScenarioError> {
        let name = func.name.as_str();
        if self.types.contains_key(name) {
            return err(func.span, format!("`{name}` is not a function"));
        }
        if RANDOM_BUILTINS.contains(&name) {
            let next = self.random_calls.len() as u64;
            self.random_calls.insert((span.line, span.col), next);
        }
        if name == "mixture" {
            return self.mixture(func, args);
        }
        let a = self.plain_args(func, args)?;
        match name {
            "pauli_x" | "pauli_y" | "pauli_z" => {
                Self::arity(func, &a, 0)?;
                Ok(Ty::Matrix(2, 2))
            }
            "identity" | "fourier" | "shift" | "random_hermitian" | "random_unitary" => {
                Self::arity(func, &a, 1)?;
                let n = self.count(a[0])?;
                Ok(Ty::Matrix(n, n))
            }
            "maximally_mixed" | "random_state" | "random_pure" => {
                Self::arity(func, &a, 1)?;
                Ok(Ty::State(self.count(a[0])?))
            }
            "random_family" => {
                Self::arity(func, &a, 2)?;
                let n = self.count(a[0])?;
                self.count(a[1])?;
                Ok(Ty::Family(n))
            }
            "diag" | "random_observable" | "vector" => {
                if a.is_empty() {
                    return err(func.span, format!("`{name}` needs at least one entry"));
                }
                for x in &a {
                    let z = self.scalar(x)?;
                    if name == "random_observable" && z.im != 0.0 {
                        return err(x.span(), "spectrum values are real");
                    }
                }
                Ok(if name == "vector" { Ty::State(a.len()) } else { Ty::Matrix(a.len(), a.len()) })
            }
            "kron" => {
                if a.len() < 2 {
                    return err(func.span, "`kron` takes at least two arguments");
                }
                let tys = a.iter().map(|x| self.expr(x)).collect::<Result<Vec<_>, _>>()?;
                if tys.iter().all(|t| matches!(t, Ty::Matrix(..))) {
                    let (mut r, mut c) = (1, 1);
                    for t in &tys {
                        if let Ty::Matrix(tr, tc) = t {
                            r *= tr;
                            c *= tc;
                        }
                    }
                    Ok(Ty::Matrix(r, c))
                } else if tys.iter().all(|t| matches!(t, Ty::State(_))) {
                    Ok(Ty::State(tys.iter().map(|t| if let Ty::State(d) = t { *d } else { 1 }).product()))
                } else {
                    err(func.span, "`kron` takes all matrices or all states")
                }
            }
            "adjoint" => {
                Self::arity(func, &a, 1)?;
                match self.expr(a[0])? {
                    Ty::Matrix(r, c) => Ok(Ty::Matrix(c, r)),
                    other => err(a[0].span(), format!("expected a matrix, found {other}")),
                }
            }
            "density" => {
                Self::arity(func, &a, 1)?;
                match self.expr(a[0])? {
                    Ty::Matrix(r, c) if r == c => Ok(Ty::State(r)),
                    other => err(a[0].span(), format!("expected a square matrix, found {other}")),
                }
            }
            "family" => {
                if a.is_empty() {
                    return err(func.span, "`family` needs at least one state");
                }
                let mut dim = None;
                for x in &a {
                    match self.expr(x)? {
                        Ty::State(d) if dim.is_none_or(|e| e == d) => dim = Some(d),
                        other => {
                            return err(
                                x.span(),
                                format!("family members must be states of one dimension, found {other}"),
                            )
                        }
                    }
                }
                Ok(Ty::Family(dim.unwrap_or(0)))
            }
            "sqrt" | "sin" | "cos" | "exp" | "conj" => {
                Self::arity(func, &a, 1)?;
                let z = self.scalar(a[0])?;
                Ok(Ty::Scalar(scalar_function(name, z).expect("listed scalar function")))
            }
            _ => err(func.span, format!("unknown function `{name}`")),
        }
    }

    fn mixture(&mut self, func: &Ident, args: &[Arg]) -> Result<Ty, ScenarioError> {
        if args.is_empty() {
            return err(func.span, "`mixture` needs at least one `weight: state` pair");
        }
        let mut dim = None;
        for a in args {
            let Some(w) = &a.weight else {
                return err(a.value.span(), "`mixture` arguments are written `weight: state`");
            };
            let z = self.scalar(w)?;
            if z.im != 0.0 || z.re < 0.0 {
                return err(w.span(), "mixture weights are non-negative reals");
            }
            match self.expr(&a.value)? {
                Ty::State(d) if dim.is_none_or(|e| e == d) => dim = Some(d),
                other => return err(a.value.span(), format!("expected a state of matching dimension, found {other}")),
            }
        }
        Ok(Ty::State(dim.unwrap_or(0)))
    }

    fn entry(&self, b: &Block, allowed: &[&str]) -> Result<(), ScenarioError> {
        for (i, e) in b.entries.iter().enumerate() {
            if !allowed.contains(&e.key.name.as_str()) {
                return err(
                    e.key.span,
                    format!("unknown key `{}` (expected one of {})", e.key.name, allowed.join(", ")),
                );
            }
            if b.entries[..i].iter().any(|p| p.key.name == e.key.name) {
                return err(e.key.span, format!("duplicate key `{}`", e.key.name));
            }
        }
        Ok(())
    }

    fn algebra(&mut self, b: &Block) -> Result<Ty, ScenarioError> {
        const SHAPES: &[&str] = &["generators", "direct_sum", "full", "diagonal", "tensor"];
        self.entry(b, &["generators", "dim", "direct_sum", "full", "diagonal", "tensor"])?;
        let shapes: Vec<&Entry> = b.entries.iter().filter(|e| SHAPES.contains(&e.key.name.as_str())).collect();
        if shapes.len() != 1 {
            return err(b.span, format!("algebra `{}` needs exactly one of {}", b.name.name, SHAPES.join(", ")));
        }
        let shape = shapes[0];
        let dim = match b.get("dim") {
            Some(e) if shape.key.name != "generators" => return err(e.key.span, "`dim` only applies to `generators`"),
            Some(e) => Some(self.count(&e.value)?),
            None => None,
        };
        match shape.key.name.as_str() {
            "full" | "diagonal" => Ok(Ty::Algebra(self.count(&shape.value)?)),
            "direct_sum" => {
                let Expr::List { items, .. } = &shape.value else {
                    return err(shape.value.span(), "`direct_sum` takes a list of block sizes");
                };
                if items.is_empty() {
                    return err(shape.value.span(), "`direct_sum` needs at least one block");
                }
                let mut d = 0;
                for x in items {
                    d += self.count(x)?;
                }
                Ok(Ty::Algebra(d))
            }
            "tensor" => {
                let Expr::List { items, .. } = &shape.value else {
                    return err(shape.value.span(), "`tensor` takes a list of algebras");
                };
                if items.len() < 2 {
                    return err(shape.value.span(), "`tensor` needs at least two algebras");
                }
                let mut d = 1;
                for x in items {
                    match self.expr(x)? {
                        Ty::Algebra(k) if matches!(x, Expr::Name(_)) => d *= k,
                        other => return err(x.span(), format!("expected an algebra name, found {other}")),
                    }
                }
                Ok(Ty::Algebra(d))
            }
            _ => {
                let Expr::List { items, .. } = &shape.value else {
                    return err(shape.value.span(), "`generators` takes a list of matrices");
                };
                let mut d = dim;
                for x in items {
                    match self.expr(x)? {
                        Ty::Matrix(r, c) if r == c && d.is_none_or(|k| k == r) => d = Some(r),
                        other => {
                            return err(
                                x.span(),
                                format!("generators must be square matrices of one size, found {other}"),
                            )
                        }
                    }
                }
                d.map(Ty::Algebra).ok_or_else(|| ScenarioError::semantic(b.span, "an empty generator list needs `dim`"))
            }
        }
    }

    fn measurement(&mut self, b: &Block) -> Result<Ty, ScenarioError> {
        self.entry(b, &["observable", "coupling", "pointer", "algebra"])?;
        let Some(obs) = b.get("observable") else {
            return err(b.span, format!("measurement `{}` needs an `observable`", b.name.name));
        };
        let d = match self.expr(&obs.value)? {
            Ty::Matrix(r, c) if r == c => r,
            other => return err(obs.value.span(), format!("observable must be a square matrix, found {other}")),
        };
        if let Some(c) = b.get("coupling") {
            match &c.value {
                Expr::Name(id) if id.name == "ideal" => {}
                Expr::Call { func, args, .. } if func.name == "swapped" => {
                    let a = self.plain_args(func, args)?;
                    Self::arity(func, &a, 2)?;
                    for x in a {
                        let z = self.scalar(x)?;
                        if as_index(z).is_none() {
                            return err(x.span(), "outcome positions are non-negative integers");
                        }
                    }
                }
                other => return err(other.span(), "coupling is `ideal` or `swapped(i, j)`"),
            }
        }
        if let Some(p) = b.get("pointer") {
            let ty = self.expr(&p.value)?;
            if !matches!(ty, Ty::State(_)) {
                return err(p.value.span(), format!("pointer must be a state, found {ty}"));
            }
        }
        if let Some(a) = b.get("algebra") {
            match (&a.value, self.expr(&a.value)?) {
                (Expr::Name(_), Ty::Algebra(k)) if k == d => {}
                (_, other) => {
                    return err(a.value.span(), format!("expected an algebra on dimension {d}, found {other}"))
                }
            }
        }
        Ok(Ty::Measurement(d))
    }

    fn query(&mut self, q: &Query) -> Result<(), ScenarioError> {
        let kind = q.kind.name.as_str();
        if !QUERY_KINDS.contains(&kind) {
            return err(q.kind.span, format!("unknown query `{kind}` (expected one of {})", QUERY_KINDS.join(", ")));
        }
        for a in &q.args {
            if a.weight.is_some() {
                return err(a.value.span(), "query arguments cannot carry weights");
            }
            if let Some(n) = &a.name {
                if n.name != "expect" {
                    return err(n.span, format!("unknown query option `{}`", n.name));
                }
            }
        }
        let args: Vec<&Expr> = q.positional().collect();
        let tys = args.iter().map(|x| self.expr(x)).collect::<Result<Vec<_>, _>>()?;
        let expect = q.named("expect").map(|e| self.expr(e).map(|t| (e, t))).transpose()?;
        let want = |n: usize| -> Result<(), ScenarioError> {
            if args.len() != n {
                return err(q.kind.span, format!("`{kind}` takes {n} positional argument(s), found {}", args.len()));
            }
            Ok(())
        };
        let mismatch = |i: usize, what: &str| -> Result<(), ScenarioError> {
            err(args[i].span(), format!("argument {} of `{kind}`: expected {what}, found {}", i + 1, tys[i]))
        };
        let dim_of = |t: &Ty| match t {
            Ty::Algebra(d) | Ty::Measurement(d) | Ty::State(d) | Ty::Family(d) => Some(*d),
            Ty::Matrix(r, c) if r == c => Some(*r),
            _ => None,
        };
        let same_dim = |i: usize, j: usize| -> Result<(), ScenarioError> {
            let (a, b) = (dim_of(&tys[i]), dim_of(&tys[j]));
            if a != b {
                return err(args[j].span(), format!("dimension mismatch: {} vs {}", tys[i], tys[j]));
            }
            Ok(())
        };
        let expect_ty = |want: &str, ok: bool| -> Result<(), ScenarioError> {
            match &expect {
                Some((e, t)) if !ok => err(e.span(), format!("`expect` of `{kind}` must be {want}, found {t}")),
                _ => Ok(()),
            }
        };
        let expect_is = |f: &dyn Fn(&Ty) -> bool| expect.as_ref().is_none_or(|(_, t)| f(t));
        match kind {
            "gns" | "sectors" => {
                want(2)?;
                if !matches!(tys[0], Ty::Algebra(_)) {
                    return mismatch(0, "an algebra");
                }
                if !matches!(tys[1], Ty::State(_)) {
                    return mismatch(1, "a state");
                }
                same_dim(0, 1)?;
                if kind == "gns" {
                    expect_ty("absent", expect.is_none())?;
                } else {
                    let ok = expect_is(
                        &|t| matches!(t, Ty::List(items) if items.iter().all(|i| matches!(i, Ty::Scalar(_)))),
                    );
                    expect_ty("a list of weights", ok)?;
                }
            }
            "born" | "generalized_born" => {
                want(3)?;
                if !matches!(tys[0], Ty::Measurement(_)) {
                    return mismatch(0, "a measurement");
                }
                if !matches!(tys[1], Ty::State(_)) {
                    return mismatch(1, "a state");
                }
                if !matches!(tys[2], Ty::Outcomes) {
                    return mismatch(2, "an outcome set");
                }
                same_dim(0, 1)?;
                expect_ty("a number", expect_is(&|t| matches!(t, Ty::Scalar(_))))?;
            }
            "spectral_eq" => {
                want(3)?;
                for i in 0..2 {
                    if !matches!(tys[i], Ty::Measurement(_)) && !matches!(tys[i], Ty::Matrix(r, c) if r == c) {
                        return mismatch(i, "an observable or measurement");
                    }
                }
                if !matches!(tys[2], Ty::State(_) | Ty::Family(_)) {
                    return mismatch(2, "a state or family");
                }
                same_dim(0, 1)?;
                same_dim(0, 2)?;
                expect_ty("a boolean", expect_is(&|t| matches!(t, Ty::Bool)))?;
            }
            "mppc" => {
                want(2)?;
                if !matches!(tys[0], Ty::Measurement(_)) {
                    return mismatch(0, "a measurement");
                }
                if !matches!(tys[1], Ty::State(_) | Ty::Family(_)) {
                    return mismatch(1, "a state or family");
                }
                same_dim(0, 1)?;
                expect_ty("a boolean", expect_is(&|t| matches!(t, Ty::Bool)))?;
            }
            _ => {
                want(4)?;
                if !matches!(tys[0], Ty::Algebra(_) | Ty::Measurement(_)) {
                    return mismatch(0, "an algebra or measurement");
                }
                if !matches!(tys[1], Ty::State(_)) {
                    return mismatch(1, "a state");
                }
                if !matches!(&tys[2], Ty::List(items) if items.iter().all(|i| matches!(i, Ty::Scalar(_)))) {
                    return mismatch(2, "a list of numbers");
                }
                if !matches!(tys[3], Ty::Matrix(r, c) if r == c) {
                    return mismatch(3, "a square matrix");
                }
                same_dim(0, 1)?;
                same_dim(0, 3)?;
                expect_ty("absent", expect.is_none())?;
            }
        }
        Ok(())
    }
}

fn binary_type(op: BinOp, a: &Ty, b: &Ty) -> Option<Ty> {
    match (a, b) {
        (Ty::Scalar(x), Ty::Scalar(y)) => Some(Ty::Scalar(scalar_binary(op, *x, *y))),
        (Ty::Matrix(r1, c1), Ty::Matrix(r2, c2)) => match op {
            BinOp::Add | BinOp::Sub if (r1, c1) == (r2, c2) => Some(Ty::Matrix(*r1, *c1)),
            BinOp::Mul if c1 == r2 => Some(Ty::Matrix(*r1, *c2)),
            _ => None,
        },
        (Ty::Scalar(_), Ty::Matrix(r, c)) if op == BinOp::Mul => Some(Ty::Matrix(*r, *c)),
        (Ty::Matrix(r, c), Ty::Scalar(_)) if matches!(op, BinOp::Mul | BinOp::Div) => Some(Ty::Matrix(*r, *c)),
        _ => None,
    }
}
