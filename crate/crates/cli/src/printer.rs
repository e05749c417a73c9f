//! Canonical text for a scenario. Parsing the output gives back the same tree.

use std::fmt::Write;

use crate::ast::*;

pub fn print_scenario(s: &Scenario) -> String {
    let mut out = String::new();
    if let Some(name) = &s.name {
        let _ = writeln!(out, "scenario \"{name}\"");
        if !s.items.is_empty() {
            out.push('\n');
        }
    }
    for item in &s.items {
        match item {
            Item::Let(l) => {
                let _ = writeln!(out, "let {} = {}", l.name.name, expr(&l.value));
            }
            Item::Algebra(b) => block(&mut out, "algebra", b),
            Item::Measurement(b) => block(&mut out, "measurement", b),
            Item::Query(q) => {
                let _ = writeln!(out, "{}", query(q));
            }
        }
    }
    out
}

fn block(out: &mut String, keyword: &str, b: &Block) {
    let _ = writeln!(out, "{keyword} {} {{", b.name.name);
    for e in &b.entries {
        let _ = writeln!(out, "    {} = {}", e.key.name, expr(&e.value));
    }
    out.push_str("}\n");
}

pub fn query(q: &Query) -> String {
    format!("query {}({})", q.kind.name, args(&q.args))
}

fn args(args: &[Arg]) -> String {
    args.iter()
        .map(|a| match (&a.name, &a.weight) {
            (Some(n), _) => format!("{} = {}", n.name, expr(&a.value)),
            (None, Some(w)) => format!("{}: {}", expr(w), expr(&a.value)),
            (None, None) => expr(&a.value),
        })
        .collect::<Vec<_>>()
        .join(", ")
}

fn list(items: &[Expr]) -> String {
    items.iter().map(expr).collect::<Vec<_>>().join(", ")
}

pub fn expr(e: &Expr) -> String {
    match e {
        Expr::Number { value, imaginary, .. } => format!("{value}{}", if *imaginary { "i" } else { "" }),
        Expr::Bool { value, .. } => value.to_string(),
        Expr::Name(id) => id.name.clone(),
        Expr::Call { func, args: a, .. } => format!("{}({})", func.name, args(a)),
        Expr::Neg { expr: inner, .. } => match **inner {
            Expr::Binary { .. } => format!("-({})", expr(inner)),
            _ => format!("-{}", expr(inner)),
        },
        Expr::Binary { op, lhs, rhs, .. } => {
            let wrap = |child: &Expr, strict: bool| match child {
                Expr::Binary { op: inner, .. }
                    if inner.precedence() < op.precedence() || (strict && inner.precedence() == op.precedence()) =>
                {
                    format!("({})", expr(child))
                }
                _ => expr(child),
            };
            format!("{} {} {}", wrap(lhs, false), op.symbol(), wrap(rhs, true))
        }
        Expr::Matrix { rows, .. } => {
            let rows: Vec<String> = rows.iter().map(|r| format!("[{}]", list(r))).collect();
            format!("[{}]", rows.join(", "))
        }
        Expr::List { items, .. } => format!("[{}]", list(items)),
        Expr::Outcomes(set) => outcomes(set),
    }
}

pub fn outcomes(set: &OutcomeSet) -> String {
    match set {
        OutcomeSet::Values { values, .. } => format!("{{{}}}", list(values)),
        OutcomeSet::All { .. } => "all".into(),
        OutcomeSet::Complement { inner, .. } => format!("complement({})", outcomes(inner)),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::parser::parse_syntax;

    fn round_trip(src: &str) {
        let a = parse_syntax(src).unwrap();
        let printed = print_scenario(&a);
        let b = parse_syntax(&printed).unwrap_or_else(|e| panic!("{e}\n{printed}"));
        assert_eq!(a, b, "{printed}");
    }

    #[test]
    fn parenthesisation_survives() {
        round_trip("let a = (1 - 2) - (3 - 4) * -(5 + 6i) / 7");
        round_trip("let b = 1 - -2");
        round_trip("let c = --0.1");
    }

    #[test]
    fn all_constructs_survive() {
        round_trip(
            "scenario \"x\"\nlet m = [[1, 2i], [-2i, 1]]\nlet l = [[[1, 0], [0, 0]]]\nalgebra A { generators = [m], dim = 2 }\n\
             measurement M { observable = m, coupling = ideal }\nquery born(M, mixture(0.5: s, 0.5: t), complement({1e-3}), expect = true)",
        );
    }

    #[test]
    fn exact_float_text() {
        round_trip("let x = 0.1 + 0.2 * 1e-300 + 123456789.123456789");
    }
}
