use std::fmt;

use qpl_core::eval::EvalError;
use qpl_core::folc::FolError;
use qpl_core::model::ModelError;
use qpl_core::search::{HierarchyError, SearchError};
use qpl_core::syntax::SyntaxError;

/// A failed command. Printed as one `error[kind]: message` line.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum CliError {
    Usage(String),
    Input(String),
    Parse(String),
    Validation(String),
    Budget(String),
    Internal(String),
}

impl CliError {
    pub fn kind(&self) -> &'static str {
        match self {
            CliError::Usage(_) => "usage",
            CliError::Input(_) => "input",
            CliError::Parse(_) => "parse",
            CliError::Validation(_) => "validation",
            CliError::Budget(_) => "budget",
            CliError::Internal(_) => "internal",
        }
    }

    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Budget(_) => 3,
            CliError::Internal(_) => 1,
            _ => 2,
        }
    }

    fn message(&self) -> &str {
        match self {
            CliError::Usage(m)
            | CliError::Input(m)
            | CliError::Parse(m)
            | CliError::Validation(m)
            | CliError::Budget(m)
            | CliError::Internal(m) => m,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let one_line = self.message().split_whitespace().collect::<Vec<_>>().join(" ");
        write!(f, "error[{}]: {one_line}", self.kind())
    }
}

impl From<SyntaxError> for CliError {
    fn from(e: SyntaxError) -> Self {
        CliError::Parse(e.to_string())
    }
}

impl From<ModelError> for CliError {
    fn from(e: ModelError) -> Self {
        CliError::Input(e.to_string())
    }
}

impl From<EvalError> for CliError {
    fn from(e: EvalError) -> Self {
        match e {
            EvalError::Symbol(s) => s.into(),
            EvalError::InvalidModel(_) => CliError::Validation(e.to_string()),
        }
    }
}

impl From<SearchError> for CliError {
    fn from(e: SearchError) -> Self {
        match e {
            SearchError::InvalidBounds(_) => CliError::Usage(e.to_string()),
            SearchError::Unsupported(_) => CliError::Input(e.to_string()),
            SearchError::BudgetExceeded { .. } => CliError::Budget(e.to_string()),
            SearchError::Syntax(s) => s.into(),
            SearchError::Internal(_) => CliError::Internal(e.to_string()),
        }
    }
}

impl From<FolError> for CliError {
    fn from(e: FolError) -> Self {
        match e {
            FolError::Syntax(s) => s.into(),
            FolError::Open(_) => CliError::Input(e.to_string()),
            FolError::InvalidModel(_) => CliError::Validation(e.to_string()),
            FolError::Unbound(_) | FolError::Uninterpreted(_) => CliError::Internal(e.to_string()),
        }
    }
}

impl From<HierarchyError> for CliError {
    fn from(e: HierarchyError) -> Self {
        match e {
            HierarchyError::Eval(inner) => inner.into(),
            HierarchyError::Precondition(_) | HierarchyError::Headroom { .. } => CliError::Input(e.to_string()),
            _ => CliError::Internal(e.to_string()),
        }
    }
}
