use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("config error{}: {message}", location(*line, section))]
    Config {
        line: Option<usize>,
        section: Option<String>,
        message: String,
    },

    #[error("click-stream format error: {0}")]
    Format(String),

    #[error("invalid click stream: {0}")]
    InvalidStream(String),

    #[error("insufficient data: {0}")]
    InsufficientData(String),

    #[error("degenerate data: {0}")]
    Degenerate(String),

    #[error("fit did not converge: {0}")]
    NotConverged(String),

    #[error("mismatched frequency grids: {0}")]
    MismatchedGrid(String),

    #[error("csv error: {0}")]
    Csv(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

fn location(line: Option<usize>, section: &Option<String>) -> String {
    match (line, section) {
        (Some(l), Some(s)) => format!(" at line {l} in [{s}]"),
        (Some(l), None) => format!(" at line {l}"),
        (None, Some(s)) => format!(" in [{s}]"),
        (None, None) => String::new(),
    }
}

impl Error {
    pub(crate) fn param(name: &'static str, reason: impl Into<String>) -> Self {
        Error::InvalidParameter {
            name,
            reason: reason.into(),
        }
    }
}

impl From<csv::Error> for Error {
    fn from(e: csv::Error) -> Self {
        Error::Csv(e.to_string())
    }
}
