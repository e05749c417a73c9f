use thiserror::Error;

use crate::ast::Span;

/// Problems found before anything is executed.
#[derive(Clone, Debug, Error, PartialEq, Eq)]
pub enum ScenarioError {
    #[error("{line}:{col}: syntax error: expected {expected}, found {found}")]
    Syntax { line: usize, col: usize, expected: String, found: String },
    #[error("{line}:{col}: {message}")]
    Semantic { line: usize, col: usize, message: String },
}

impl ScenarioError {
    pub fn syntax(span: Span, expected: impl Into<String>, found: impl Into<String>) -> Self {
        ScenarioError::Syntax { line: span.line, col: span.col, expected: expected.into(), found: found.into() }
    }

    pub fn semantic(span: Span, message: impl Into<String>) -> Self {
        ScenarioError::Semantic { line: span.line, col: span.col, message: message.into() }
    }

    pub fn position(&self) -> (usize, usize) {
        match self {
            ScenarioError::Syntax { line, col, .. } | ScenarioError::Semantic { line, col, .. } => (*line, *col),
        }
    }
}
