//! Syntax tree for scenario files.

use std::fmt;

/// Source position. Positions never take part in equality so that a
/// pretty-printed and re-parsed tree compares equal to the original.
#[derive(Clone, Copy, Debug, Default)]
pub struct Span {
    pub line: usize,
    pub col: usize,
}

impl PartialEq for Span {
    fn eq(&self, _: &Span) -> bool {
        true
    }
}

impl fmt::Display for Span {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}", self.line, self.col)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Ident {
    pub name: String,
    pub span: Span,
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct Scenario {
    pub name: Option<String>,
    pub items: Vec<Item>,
}

impl Scenario {
    pub fn declarations(&self) -> impl Iterator<Item = &Item> {
        self.items.iter().filter(|i| !matches!(i, Item::Query(_)))
    }

    pub fn queries(&self) -> impl Iterator<Item = &Query> {
        self.items.iter().filter_map(|i| match i {
            Item::Query(q) => Some(q),
            _ => None,
        })
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum Item {
    Let(Let),
    Algebra(Block),
    Measurement(Block),
    Query(Query),
}

#[derive(Clone, Debug, PartialEq)]
pub struct Let {
    pub name: Ident,
    pub value: Expr,
}

/// `algebra NAME { key = value ... }` or `measurement NAME { ... }`.
#[derive(Clone, Debug, PartialEq)]
pub struct Block {
    pub name: Ident,
    pub entries: Vec<Entry>,
    pub span: Span,
}

impl Block {
    pub fn get(&self, key: &str) -> Option<&Entry> {
        self.entries.iter().find(|e| e.key.name == key)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Entry {
    pub key: Ident,
    pub value: Expr,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Query {
    pub kind: Ident,
    pub args: Vec<Arg>,
    pub span: Span,
}

impl Query {
    pub fn positional(&self) -> impl Iterator<Item = &Expr> {
        self.args.iter().filter(|a| a.name.is_none()).map(|a| &a.value)
    }

    pub fn named(&self, key: &str) -> Option<&Expr> {
        self.args.iter().find(|a| a.name.as_ref().is_some_and(|n| n.name == key)).map(|a| &a.value)
    }
}

/// Call argument: `value`, `weight: value` or `name = value`.
#[derive(Clone, Debug, PartialEq)]
pub struct Arg {
    pub name: Option<Ident>,
    pub weight: Option<Expr>,
    pub value: Expr,
}

impl Arg {
    pub fn plain(value: Expr) -> Self {
        Arg { name: None, weight: None, value }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum BinOp {
    Add,
    Sub,
    Mul,
    Div,
}

impl BinOp {
    pub fn symbol(self) -> &'static str {
        match self {
            BinOp::Add => "+",
            BinOp::Sub => "-",
            BinOp::Mul => "*",
            BinOp::Div => "/",
        }
    }

    pub fn precedence(self) -> u8 {
        match self {
            BinOp::Add | BinOp::Sub => 1,
            BinOp::Mul | BinOp::Div => 2,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum Expr {
    /// Real literal, or imaginary literal such as `2i`.
    Number {
        value: f64,
        imaginary: bool,
        span: Span,
    },
    Bool {
        value: bool,
        span: Span,
    },
    Name(Ident),
    Call {
        func: Ident,
        args: Vec<Arg>,
        span: Span,
    },
    Neg {
        expr: Box<Expr>,
        span: Span,
    },
    Binary {
        op: BinOp,
        lhs: Box<Expr>,
        rhs: Box<Expr>,
        span: Span,
    },
    /// `[[a, b], [c, d]]`
    Matrix {
        rows: Vec<Vec<Expr>>,
        span: Span,
    },
    /// `[a, b, c]`
    List {
        items: Vec<Expr>,
        span: Span,
    },
    Outcomes(OutcomeSet),
}

impl Expr {
    pub fn span(&self) -> Span {
        match self {
            Expr::Number { span, .. }
            | Expr::Bool { span, .. }
            | Expr::Call { span, .. }
            | Expr::Neg { span, .. }
            | Expr::Binary { span, .. }
            | Expr::Matrix { span, .. }
            | Expr::List { span, .. } => *span,
            Expr::Name(id) => id.span,
            Expr::Outcomes(set) => set.span(),
        }
    }
}

/// Outcome set `Δ`: an explicit list of eigenvalues, every outcome, or the
/// complement of another set.
#[derive(Clone, Debug, PartialEq)]
pub enum OutcomeSet {
    Values { values: Vec<Expr>, span: Span },
    All { span: Span },
    Complement { inner: Box<OutcomeSet>, span: Span },
}

impl OutcomeSet {
    pub fn span(&self) -> Span {
        match self {
            OutcomeSet::Values { span, .. } | OutcomeSet::All { span } | OutcomeSet::Complement { span, .. } => *span,
        }
    }
}
