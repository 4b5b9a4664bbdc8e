use thiserror::Error;

/// Crate-wide error type.
#[derive(Debug, Error)]
pub enum Error {
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),

    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),

    /// Bad configuration: invalid options, malformed registry, unsorted
    /// boundaries, unknown formats.
    #[error("configuration error: {0}")]
    Config(String),

    /// A column named in the schema is absent from the input header.
    #[error("missing column `{0}` in header")]
    MissingColumn(String),

    #[error("data error: {0}")]
    Data(String),

    #[error("unknown grade token `{0}`")]
    UnknownGrade(String),

    #[error("dimension error: {0}")]
    Dimension(String),

    /// The design matrix is (numerically) rank deficient.
    #[error("singular design matrix; offending columns: {}", columns.join(", "))]
    Singular { columns: Vec<String> },

    #[error("zero variance: {0}")]
    ZeroVariance(String),

    #[error("domain error: {0}")]
    Domain(String),
}

pub type Result<T> = std::result::Result<T, Error>;
