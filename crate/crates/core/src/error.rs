use std::path::PathBuf;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

/// Broad failure class, used by the CLI to pick an exit code.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorClass {
    Config,
    Data,
    Numerical,
    Io,
}

impl ErrorClass {
    pub fn exit_code(self) -> i32 {
        match self {
            ErrorClass::Io => 1,
            ErrorClass::Config => 2,
            ErrorClass::Data => 3,
            ErrorClass::Numerical => 4,
        }
    }
}

#[derive(Debug, Error)]
pub enum Error {
    #[error("shape mismatch in {context}: expected {expected}, got {actual}")]
    Shape {
        context: String,
        expected: String,
        actual: String,
    },

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("feature '{name}' (column {index}) is constant; its correlation is undefined")]
    ConstantFeature { name: String, index: usize },

    #[error("cut at relative threshold {threshold} leaves a single cluster; choose a lower threshold or allow a unified model")]
    SingleCluster { threshold: f64 },

    #[error("invalid cluster spec: {0}")]
    ClusterSpec(String),

    #[error("input for cluster {cluster} has dimension {actual}, expected {expected}")]
    ClusterDimension {
        cluster: usize,
        expected: usize,
        actual: usize,
    },

    #[error("{path}: row {row}, column {column}: {message}")]
    Parse {
        path: String,
        row: usize,
        column: usize,
        message: String,
    },

    #[error("dataset '{name}': {message}")]
    Dataset { name: String, message: String },

    #[error("non-finite gradient in parameter block '{block}'")]
    NonFiniteGradient { block: String },

    #[error("non-finite loss at sample {sample}")]
    NonFiniteLoss { sample: usize },

    #[error("variance {value} at cluster {cluster} is not positive")]
    NonPositiveVariance { cluster: usize, value: f64 },

    #[error("training diverged (member {member}, epoch {epoch}): {source}")]
    Diverged {
        member: usize,
        epoch: usize,
        #[source]
        source: Box<Error>,
    },

    #[error("{0}")]
    Numerical(String),

    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("json error on {path}: {source}")]
    Json {
        path: PathBuf,
        #[source]
        source: serde_json::Error,
    },
}

impl Error {
    pub fn class(&self) -> ErrorClass {
        match self {
            Error::Shape { .. }
            | Error::Config(_)
            | Error::SingleCluster { .. }
            | Error::ClusterSpec(_)
            | Error::ClusterDimension { .. } => ErrorClass::Config,
            Error::ConstantFeature { .. } | Error::Parse { .. } | Error::Dataset { .. } => {
                ErrorClass::Data
            }
            Error::NonFiniteGradient { .. }
            | Error::NonFiniteLoss { .. }
            | Error::NonPositiveVariance { .. }
            | Error::Diverged { .. }
            | Error::Numerical(_) => ErrorClass::Numerical,
            Error::Io { .. } | Error::Json { .. } => ErrorClass::Io,
        }
    }

    pub(crate) fn shape(
        context: impl Into<String>,
        expected: impl ToString,
        actual: impl ToString,
    ) -> Self {
        Error::Shape {
            context: context.into(),
            expected: expected.to_string(),
            actual: actual.to_string(),
        }
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub(crate) fn json(path: impl Into<PathBuf>, source: serde_json::Error) -> Self {
        Error::Json {
            path: path.into(),
            source,
        }
    }
}
