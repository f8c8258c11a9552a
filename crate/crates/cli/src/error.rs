use std::fmt;

/// Exit codes.
pub const USAGE: u8 = 1;
pub const NUMERIC: u8 = 2;
pub const IO: u8 = 3;

/// A failure reported as `ERR <module>.<op>: <detail>` with an exit code.
#[derive(Debug)]
pub struct CliError {
    pub code: u8,
    pub origin: String,
    pub detail: String,
}

impl CliError {
    pub fn new(code: u8, origin: &str, detail: impl Into<String>) -> Self {
        CliError {
            code,
            origin: origin.to_string(),
            detail: detail.into(),
        }
    }

    pub fn usage(origin: &str, detail: impl Into<String>) -> Self {
        Self::new(USAGE, origin, detail)
    }

    pub fn numeric(origin: &str, detail: impl Into<String>) -> Self {
        Self::new(NUMERIC, origin, detail)
    }

    pub fn io(origin: &str, detail: impl Into<String>) -> Self {
        Self::new(IO, origin, detail)
    }

    /// Single-line form printed on stderr.
    pub fn line(&self) -> String {
        let detail = self.detail.replace(['\n', '\r'], " ");
        format!("ERR {}: {}", self.origin, detail)
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.line())
    }
}

impl From<dtnlab::Error> for CliError {
    fn from(e: dtnlab::Error) -> Self {
        use dtnlab::Error as E;
        let origin = match e.origin() {
            "io" => "cli.io",
            o => o,
        };
        let code = match &e {
            E::Parameter(_) | E::Resolution { .. } | E::Tag { .. } | E::Range { .. } => USAGE,
            E::Parse { op, .. } if op.starts_with("cli.") => USAGE,
            E::Parse { .. } | E::InvalidMesh(_) | E::Io(_) => IO,
            _ => NUMERIC,
        };
        let text = e.to_string();
        let detail = text
            .strip_prefix(origin)
            .or_else(|| text.strip_prefix(e.origin()))
            .and_then(|s| s.strip_prefix(": "))
            .unwrap_or(&text)
            .to_string();
        CliError {
            code,
            origin: origin.to_string(),
            detail,
        }
    }
}

pub type CliResult<T> = std::result::Result<T, CliError>;
