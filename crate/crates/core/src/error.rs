use std::io;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

/// Errors raised by the toolkit. Messages name the stage they come from.
#[derive(Debug, Error)]
pub enum Error {
    #[error("io: {0}")]
    Io(#[from] io::Error),

    #[error("conllu: line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("conllu: sentence {sentence}: {message}")]
    Validation { sentence: usize, message: String },

    #[error("usage: {0}")]
    Usage(String),

    #[error("store: {0}")]
    Store(String),

    #[error("store: unsupported version {found}, expected version {expected}")]
    VersionMismatch { expected: u32, found: u32 },

    #[error("json: {0}")]
    Json(#[from] serde_json::Error),

    #[error("reducer: sentence {sentence}: {message}")]
    Reduction { sentence: usize, message: String },

    #[error("reattacher: sentence {sentence}: {message}")]
    Consistency { sentence: usize, message: String },

    #[error("parser: {message}{}", fmt_diagnostics(.diagnostics))]
    Bridge { message: String, diagnostics: String },

    #[error("parser: training: {0}")]
    Training(String),

    #[error("eval: sentence {sentence}{}: {message}", fmt_token(.token))]
    Alignment {
        sentence: usize,
        token: Option<usize>,
        message: String,
    },
}

fn fmt_diagnostics(diagnostics: &str) -> String {
    if diagnostics.trim().is_empty() {
        String::new()
    } else {
        format!("\n--- diagnostics ---\n{}", diagnostics.trim_end())
    }
}

fn fmt_token(token: &Option<usize>) -> String {
    token.map(|t| format!(", token {t}")).unwrap_or_default()
}
