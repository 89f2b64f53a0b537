use thiserror::Error;

/// Errors raised by the analytic models.
///
/// Every variant names the offending parameter so front ends can report it
/// back to the user as a path into their configuration.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum ModelError {
    /// A configuration value violates its type invariant.
    #[error("invalid configuration `{param}`: {reason}")]
    Config { param: String, reason: String },

    /// An argument is outside the domain of the formula being evaluated.
    #[error("`{param}` out of domain: {reason}")]
    Domain { param: String, reason: String },

    /// The inputs are well formed but no operating point satisfies them.
    #[error("infeasible `{param}`: {reason}")]
    Infeasible { param: String, reason: String },
}

impl ModelError {
    pub fn config(param: impl Into<String>, reason: impl Into<String>) -> Self {
        Self::Config {
            param: param.into(),
            reason: reason.into(),
        }
    }

    pub fn domain(param: impl Into<String>, reason: impl Into<String>) -> Self {
        Self::Domain {
            param: param.into(),
            reason: reason.into(),
        }
    }

    pub fn infeasible(param: impl Into<String>, reason: impl Into<String>) -> Self {
        Self::Infeasible {
            param: param.into(),
            reason: reason.into(),
        }
    }

    /// The parameter path this error refers to.
    pub fn param(&self) -> &str {
        match self {
            Self::Config { param, .. } | Self::Domain { param, .. } | Self::Infeasible { param, .. } => param,
        }
    }

    pub fn is_infeasible(&self) -> bool {
        matches!(self, Self::Infeasible { .. })
    }

    /// Prefix the parameter path, e.g. `chip.page_size` -> `ssd.chip.page_size`.
    pub fn within(self, prefix: &str) -> Self {
        let join = |p: String| format!("{prefix}.{p}");
        match self {
            Self::Config { param, reason } => Self::Config { param: join(param), reason },
            Self::Domain { param, reason } => Self::Domain { param: join(param), reason },
            Self::Infeasible { param, reason } => Self::Infeasible { param: join(param), reason },
        }
    }
}

pub type Result<T> = std::result::Result<T, ModelError>;
