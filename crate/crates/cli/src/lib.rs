//! Scenario language and verification reports for `qsector`.
//!
//! A scenario file declares matrices, states, algebras and measurement
//! setups, then asks queries about them. [`parse`] performs every static
//! check; [`run`] evaluates the queries and collects a [`Report`].

pub mod ast;
pub mod check;
pub mod demos;
pub mod error;
pub mod eval;
pub mod lexer;
pub mod parser;
pub mod printer;
pub mod report;
pub mod runner;
pub mod selftest;

pub use check::{parse, Program, Ty};
pub use error::ScenarioError;
pub use parser::parse_syntax;
pub use printer::print_scenario;
pub use report::{format_report, Mode, Report};
pub use runner::{run, RunOptions};
