use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error(transparent)]
    Library(#[from] immse::Error),
    #[error("i/o: {0}")]
    Io(#[from] std::io::Error),
    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
}

impl CliError {
    /// 2 for bad requests, 3 for numerical non-convergence.
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Library(immse::Error::NonConvergence { .. } | immse::Error::TailNotResolved { .. }) => 3,
            _ => 2,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exit_codes() {
        assert_eq!(CliError::Usage("x".into()).exit_code(), 2);
        assert_eq!(CliError::Library(immse::Error::InvalidLaw("x".into())).exit_code(), 2);
        let stalled = immse::Error::NonConvergence {
            what: "x",
            change: 1.0,
            target: 0.1,
        };
        assert_eq!(CliError::Library(stalled).exit_code(), 3);
        let tail = immse::Error::TailNotResolved {
            integrand: 1.0,
            threshold: 0.1,
        };
        assert_eq!(CliError::Library(tail).exit_code(), 3);
    }
}
