use std::path::PathBuf;

use thiserror::Error;

use porefill::lbmfill::LbmError;
use porefill::transport::TransportError;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("config error: {0}")]
    Config(String),
    #[error("stage {stage} failed: {message}")]
    Stage { stage: &'static str, message: String },
    #[error("stage {stage}: numeric failure: {message}")]
    Numeric { stage: &'static str, message: String },
    #[error("missing artifact: {}", .0.display())]
    MissingArtifact(PathBuf),
    #[error("RESULT_MISMATCH: final state hash differs between {0} and {1} workers")]
    ResultMismatch(usize, usize),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => 2,
            CliError::Stage { .. } | CliError::MissingArtifact(_) => 3,
            CliError::Numeric { .. } | CliError::ResultMismatch(..) => 4,
        }
    }

    pub fn stage(stage: &'static str, e: impl std::fmt::Display) -> Self {
        CliError::Stage {
            stage,
            message: e.to_string(),
        }
    }

    pub fn lbm(stage: &'static str, e: LbmError) -> Self {
        match e {
            LbmError::NumericBlowup { .. } | LbmError::NotConverged(_) => CliError::Numeric {
                stage,
                message: e.to_string(),
            },
            e => CliError::stage(stage, e),
        }
    }

    pub fn transport(stage: &'static str, e: TransportError) -> Self {
        match e {
            TransportError::NotConverged { .. } => CliError::Numeric {
                stage,
                message: e.to_string(),
            },
            e => CliError::stage(stage, e),
        }
    }
}

pub type Result<T> = std::result::Result<T, CliError>;
