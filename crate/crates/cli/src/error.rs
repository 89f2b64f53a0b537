use thiserror::Error;
use tierline_core::ModelError;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{param}: {reason}")]
    Input { param: String, reason: String },

    #[error("{param}: infeasible: {reason}")]
    Infeasible { param: String, reason: String },
}

impl CliError {
    pub fn input(param: impl Into<String>, reason: impl Into<String>) -> Self {
        Self::Input {
            param: param.into(),
            reason: reason.into(),
        }
    }

    pub fn param(&self) -> &str {
        match self {
            Self::Input { param, .. } | Self::Infeasible { param, .. } => param,
        }
    }

    /// 1 for bad input, 2 for well-formed inputs with no feasible answer.
    pub fn exit_code(&self) -> i32 {
        match self {
            Self::Input { .. } => 1,
            Self::Infeasible { .. } => 2,
        }
    }
}

impl From<ModelError> for CliError {
    fn from(e: ModelError) -> Self {
        let param = e.param().to_string();
        match e {
            ModelError::Infeasible { reason, .. } => Self::Infeasible { param, reason },
            ModelError::Config { reason, .. } | ModelError::Domain { reason, .. } => Self::Input { param, reason },
        }
    }
}
