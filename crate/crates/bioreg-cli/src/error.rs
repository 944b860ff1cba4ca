//! CLI-level errors and their exit-code / category mapping.
//!
//! Every failure is reported to stderr as a single `Category: message` line.
//! Exit codes: 0 success, 1 usage, 2 data error, 3 numeric failure.

use bioreg_core::Error as CoreError;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    /// A BIOREG1 file (or report path) could not be parsed or constructed.
    #[error("{detail}")]
    Format { detail: String },
    /// Filesystem failure while reading or writing an artifact.
    #[error("{path}: {source}")]
    Io {
        path: String,
        source: std::io::Error,
    },
    /// An error bubbled up from the registration library.
    #[error(transparent)]
    Core(#[from] CoreError),
}

impl CliError {
    pub fn io(path: &std::path::Path, source: std::io::Error) -> Self {
        CliError::Io {
            path: path.display().to_string(),
            source,
        }
    }

    /// Stable machine-parsable category for the one-line error output.
    pub fn category(&self) -> &'static str {
        match self {
            CliError::Format { .. } => "ParseError",
            CliError::Io { .. } => "IoError",
            CliError::Core(e) => e.category(),
        }
    }

    /// Process exit code: 3 for numeric failures, 2 for everything else
    /// (usage errors exit 1 before a `CliError` exists).
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Core(CoreError::NonFiniteLoss { .. }) => 3,
            _ => 2,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn categories_and_exit_codes() {
        let parse = CliError::Format {
            detail: "bad header".into(),
        };
        assert_eq!(parse.category(), "ParseError");
        assert_eq!(parse.exit_code(), 2);

        let grid = CliError::from(CoreError::GridMismatch {
            expected: bioreg_core::Grid2D::new(4, 4, (1.0, 1.0)).unwrap(),
            actual: bioreg_core::Grid2D::new(4, 5, (1.0, 1.0)).unwrap(),
        });
        assert_eq!(grid.category(), "GridMismatch");
        assert_eq!(grid.exit_code(), 2);

        let numeric = CliError::from(CoreError::NonFiniteLoss {
            iteration: 3,
            history: Vec::new(),
        });
        assert_eq!(numeric.category(), "NonFiniteLoss");
        assert_eq!(numeric.exit_code(), 3);
    }

    #[test]
    fn messages_are_single_line() {
        let errors = [
            CliError::Format {
                detail: "x".into(),
            },
            CliError::from(CoreError::EmptyMask),
            CliError::from(CoreError::NonFiniteLoss {
                iteration: 1,
                history: Vec::new(),
            }),
        ];
        for e in errors {
            let line = format!("{}: {e}", e.category());
            assert!(!line.contains('\n'), "{line:?}");
        }
    }
}
