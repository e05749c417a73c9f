//! Recursive-descent parser for scenario files.
//!
//! ```text
//! scenario := ("scenario" STRING)? item*
//! item     := "let" IDENT "=" expr
//!           | ("algebra" | "measurement") IDENT "{" (entry ","?)* "}"
//!           | "query" IDENT "(" args? ")"
//! entry    := WORD "=" expr          (keys may be keywords)
//! args     := arg ("," arg)*
//! arg      := IDENT "=" expr | expr (":" expr)?
//! expr     := term (("+" | "-") term)*
//! term     := unary (("*" | "/") unary)*
//! unary    := "-" unary | primary
//! primary  := NUMBER | "true" | "false" | IDENT ("(" args? ")")?
//!           | "(" expr ")" | "[" (expr ("," expr)*)? "]" | set
//! set      := "{" (expr ("," expr)*)? "}" | "all" | "complement" "(" set ")"
//! ```
//!
//! A bracketed list whose items are all lists is a matrix literal.

use crate::ast::*;
use crate::error::ScenarioError;
use crate::lexer::{tokenize, Tok, Token};

pub const KEYWORDS: &[&str] =
    &["let", "algebra", "measurement", "query", "scenario", "true", "false", "all", "complement"];

type PResult<T> = Result<T, ScenarioError>;

struct Parser {
    tokens: Vec<Token>,
    pos: usize,
}

/// Parses without semantic checks.
pub fn parse_syntax(src: &str) -> PResult<Scenario> {
    let mut p = Parser { tokens: tokenize(src)?, pos: 0 };
    p.scenario()
}

impl Parser {
    fn peek(&self) -> &Tok {
        &self.tokens[self.pos].tok
    }

    fn peek_at(&self, k: usize) -> &Tok {
        &self.tokens[(self.pos + k).min(self.tokens.len() - 1)].tok
    }

    fn span(&self) -> Span {
        self.tokens[self.pos].span
    }

    fn bump(&mut self) -> Token {
        let t = self.tokens[self.pos].clone();
        if self.pos + 1 < self.tokens.len() {
            self.pos += 1;
        }
        t
    }

    fn error<T>(&self, expected: &str) -> PResult<T> {
        Err(ScenarioError::syntax(self.span(), expected, self.peek().to_string()))
    }

    fn expect(&mut self, tok: Tok) -> PResult<Span> {
        if *self.peek() == tok {
            Ok(self.bump().span)
        } else {
            self.error(&tok.to_string())
        }
    }

    fn is_keyword(&self, kw: &str) -> bool {
        matches!(self.peek(), Tok::Ident(s) if s == kw)
    }

    fn ident(&mut self) -> PResult<Ident> {
        match self.peek().clone() {
            Tok::Ident(name) if !KEYWORDS.contains(&name.as_str()) => {
                let span = self.bump().span;
                Ok(Ident { name, span })
            }
            _ => self.error("an identifier"),
        }
    }

    /// Block key: any word, keywords included.
    fn key(&mut self) -> PResult<Ident> {
        match self.peek().clone() {
            Tok::Ident(name) => {
                let span = self.bump().span;
                Ok(Ident { name, span })
            }
            _ => self.error("a key or `}`"),
        }
    }

    fn scenario(&mut self) -> PResult<Scenario> {
        let mut scenario = Scenario::default();
        if self.is_keyword("scenario") {
            self.bump();
            match self.peek().clone() {
                Tok::Str(s) => {
                    self.bump();
                    scenario.name = Some(s);
                }
                _ => return self.error("a scenario name string"),
            }
        }
        while *self.peek() != Tok::Eof {
            scenario.items.push(self.item()?);
        }
        Ok(scenario)
    }

    fn item(&mut self) -> PResult<Item> {
        let Tok::Ident(kw) = self.peek().clone() else {
            return self.error("`let`, `algebra`, `measurement` or `query`");
        };
        match kw.as_str() {
            "let" => {
                self.bump();
                let name = self.ident()?;
                self.expect(Tok::Eq)?;
                Ok(Item::Let(Let { name, value: self.expr()? }))
            }
            "algebra" => {
                self.bump();
                Ok(Item::Algebra(self.block()?))
            }
            "measurement" => {
                self.bump();
                Ok(Item::Measurement(self.block()?))
            }
            "query" => {
                let span = self.bump().span;
                let kind = self.ident()?;
                self.expect(Tok::LParen)?;
                let args = self.args(Tok::RParen)?;
                Ok(Item::Query(Query { kind, args, span }))
            }
            _ => self.error("`let`, `algebra`, `measurement` or `query`"),
        }
    }

    fn block(&mut self) -> PResult<Block> {
        let name = self.ident()?;
        let span = name.span;
        self.expect(Tok::LBrace)?;
        let mut entries = Vec::new();
        while *self.peek() != Tok::RBrace {
            let key = self.key()?;
            self.expect(Tok::Eq)?;
            entries.push(Entry { key, value: self.expr()? });
            if *self.peek() == Tok::Comma {
                self.bump();
            }
        }
        self.bump();
        Ok(Block { name, entries, span })
    }

    /// Arguments up to and including `close`.
    fn args(&mut self, close: Tok) -> PResult<Vec<Arg>> {
        let mut args = Vec::new();
        if *self.peek() == close {
            self.bump();
            return Ok(args);
        }
        loop {
            args.push(self.arg()?);
            match self.peek() {
                Tok::Comma => {
                    self.bump();
                }
                t if *t == close => {
                    self.bump();
                    return Ok(args);
                }
                _ => return self.error(&format!("`,` or {close}")),
            }
        }
    }

    fn arg(&mut self) -> PResult<Arg> {
        if matches!(self.peek(), Tok::Ident(_)) && *self.peek_at(1) == Tok::Eq {
            let name = self.ident()?;
            self.bump();
            return Ok(Arg { name: Some(name), weight: None, value: self.expr()? });
        }
        let first = self.expr()?;
        if *self.peek() == Tok::Colon {
            self.bump();
            return Ok(Arg { name: None, weight: Some(first), value: self.expr()? });
        }
        Ok(Arg::plain(first))
    }

    fn expr(&mut self) -> PResult<Expr> {
        let mut lhs = self.term()?;
        loop {
            let op = match self.peek() {
                Tok::Plus => BinOp::Add,
                Tok::Minus => BinOp::Sub,
                _ => return Ok(lhs),
            };
            let span = self.bump().span;
            let rhs = self.term()?;
            lhs = Expr::Binary { op, lhs: Box::new(lhs), rhs: Box::new(rhs), span };
        }
    }

    fn term(&mut self) -> PResult<Expr> {
        let mut lhs = self.unary()?;
        loop {
            let op = match self.peek() {
                Tok::Star => BinOp::Mul,
                Tok::Slash => BinOp::Div,
                _ => return Ok(lhs),
            };
            let span = self.bump().span;
            let rhs = self.unary()?;
            lhs = Expr::Binary { op, lhs: Box::new(lhs), rhs: Box::new(rhs), span };
        }
    }

    fn unary(&mut self) -> PResult<Expr> {
        if *self.peek() == Tok::Minus {
            let span = self.bump().span;
            let inner = self.unary()?;
            return Ok(Expr::Neg { expr: Box::new(inner), span });
        }
        self.primary()
    }

    fn primary(&mut self) -> PResult<Expr> {
        let span = self.span();
        match self.peek().clone() {
            Tok::Number { value, imaginary } => {
                self.bump();
                Ok(Expr::Number { value, imaginary, span })
            }
            Tok::Ident(name) => match name.as_str() {
                "true" | "false" => {
                    self.bump();
                    Ok(Expr::Bool { value: name == "true", span })
                }
                "all" | "complement" => Ok(Expr::Outcomes(self.set()?)),
                _ => {
                    let func = self.ident()?;
                    if *self.peek() == Tok::LParen {
                        self.bump();
                        let args = self.args(Tok::RParen)?;
                        Ok(Expr::Call { func, args, span })
                    } else {
                        Ok(Expr::Name(func))
                    }
                }
            },
            Tok::LParen => {
                self.bump();
                let e = self.expr()?;
                self.expect(Tok::RParen)?;
                Ok(e)
            }
            Tok::LBracket => self.list(),
            Tok::LBrace => Ok(Expr::Outcomes(self.set()?)),
            _ => self.error("an expression"),
        }
    }

    fn list(&mut self) -> PResult<Expr> {
        let span = self.expect(Tok::LBracket)?;
        let mut items = Vec::new();
        if *self.peek() != Tok::RBracket {
            loop {
                items.push(self.expr()?);
                match self.peek() {
                    Tok::Comma => {
                        self.bump();
                    }
                    Tok::RBracket => break,
                    _ => return self.error("`,` or `]`"),
                }
            }
        }
        self.bump();
        if !items.is_empty() && items.iter().all(|e| matches!(e, Expr::List { .. })) {
            let rows = items
                .into_iter()
                .map(|e| match e {
                    Expr::List { items, .. } => items,
                    _ => unreachable!(),
                })
                .collect();
            return Ok(Expr::Matrix { rows, span });
        }
        Ok(Expr::List { items, span })
    }

    fn set(&mut self) -> PResult<OutcomeSet> {
        let span = self.span();
        if self.is_keyword("all") {
            self.bump();
            return Ok(OutcomeSet::All { span });
        }
        if self.is_keyword("complement") {
            self.bump();
            self.expect(Tok::LParen)?;
            let inner = self.set()?;
            self.expect(Tok::RParen)?;
            return Ok(OutcomeSet::Complement { inner: Box::new(inner), span });
        }
        self.expect(Tok::LBrace)?;
        let mut values = Vec::new();
        if *self.peek() != Tok::RBrace {
            loop {
                values.push(self.expr()?);
                match self.peek() {
                    Tok::Comma => {
                        self.bump();
                    }
                    Tok::RBrace => break,
                    _ => return self.error("`,` or `}`"),
                }
            }
        }
        self.bump();
        Ok(OutcomeSet::Values { values, span })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_source() {
        assert_eq!(parse_syntax("").unwrap(), Scenario::default());
        assert_eq!(parse_syntax("# only a comment\n").unwrap().items.len(), 0);
    }

    #[test]
    fn precedence_and_unary_minus() {
        let s = parse_syntax("let a = -1 + 2 * 3i").unwrap();
        let Item::Let(l) = &s.items[0] else { panic!() };
        let Expr::Binary { op: BinOp::Add, lhs, rhs, .. } = &l.value else { panic!() };
        assert!(matches!(**lhs, Expr::Neg { .. }));
        assert!(matches!(**rhs, Expr::Binary { op: BinOp::Mul, .. }));
    }

    #[test]
    fn matrix_literal_and_lists() {
        let s = parse_syntax("let m = [[1, 0], [0, -1]]\nlet l = [2, 3]").unwrap();
        let Item::Let(m) = &s.items[0] else { panic!() };
        assert!(matches!(&m.value, Expr::Matrix { rows, .. } if rows.len() == 2));
        let Item::Let(l) = &s.items[1] else { panic!() };
        assert!(matches!(&l.value, Expr::List { items, .. } if items.len() == 2));
    }

    #[test]
    fn blocks_and_queries() {
        let src = "scenario \"t\"\nalgebra A { direct_sum = [2, 3] }\nmeasurement M { observable = z, coupling = swapped(0, 1) }\nquery born(M, s, complement({1}), expect = 0.5)";
        let s = parse_syntax(src).unwrap();
        assert_eq!(s.name.as_deref(), Some("t"));
        assert_eq!(s.items.len(), 3);
        let Item::Query(q) = &s.items[2] else { panic!() };
        assert_eq!(q.kind.name, "born");
        assert_eq!(q.positional().count(), 3);
        assert!(q.named("expect").is_some());
    }

    #[test]
    fn weighted_arguments() {
        let s = parse_syntax("let m = mixture(0.25: a, 0.75: b)").unwrap();
        let Item::Let(l) = &s.items[0] else { panic!() };
        let Expr::Call { args, .. } = &l.value else { panic!() };
        assert!(args.iter().all(|a| a.weight.is_some()));
    }

    #[test]
    fn syntax_error_position() {
        let e = parse_syntax("let a = (1 + 2\nlet b = 3").unwrap_err();
        match e {
            ScenarioError::Syntax { line, col, expected, .. } => {
                assert_eq!((line, col), (2, 1));
                assert_eq!(expected, "`)`");
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn keyword_is_not_a_name() {
        assert!(parse_syntax("let query = 1").is_err());
    }
}
