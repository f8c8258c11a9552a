use thiserror::Error;

/// Errors raised across the crate. The `module.op` prefix in the display
/// string is what the command-line front end forwards on failure.
#[derive(Debug, Error)]
pub enum Error {
    #[error("mesh.build_domain: invalid parameter: {0}")]
    Parameter(String),

    #[error("mesh.build_domain: h_target too coarse to resolve {feature} (needs h <= {needed:.3e})")]
    Resolution { feature: String, needed: f64 },

    #[error("{op}: unknown boundary tag {tag}")]
    Tag { op: &'static str, tag: u32 },

    #[error("mesh.validate: {0}")]
    InvalidMesh(String),

    #[error("{op}: degenerate triangle {triangle} (signed area {area:e})")]
    DegenerateTriangle {
        op: &'static str,
        triangle: usize,
        area: f64,
    },

    #[error("linalg.factor: matrix not positive definite (pivot {pivot} = {value:e})")]
    NotPositiveDefinite { pivot: usize, value: f64 },

    #[error("dtn_core.build_dtn: mesh is not connected ({components} components)")]
    Disconnected { components: usize },

    #[error("{op}: precondition failed: {detail}")]
    Precondition { op: &'static str, detail: String },

    #[error("{op}: eigensolver did not converge after {iterations} iterations (worst residual {residual:e})")]
    NoConvergence {
        op: &'static str,
        iterations: usize,
        residual: f64,
    },

    #[error("{op}: {detail}")]
    Range { op: &'static str, detail: String },

    #[error("semigroup.evolve: truncated decomposition cannot represent {0}")]
    Truncation(String),

    #[error("robin.robin_solve: beta = {beta} lies in the diverging range")]
    DivergingBeta {
        beta: f64,
        report: Box<crate::robin::RobinReport>,
    },

    #[error("{op}: parse error at {line}:{column}: {detail}")]
    Parse {
        op: &'static str,
        line: usize,
        column: usize,
        detail: String,
    },

    #[error("io: {0}")]
    Io(#[from] std::io::Error),
}

impl Error {
    /// `module.op` identifier used for machine-readable failure lines.
    pub fn origin(&self) -> &'static str {
        match self {
            Error::Parameter(_) | Error::Resolution { .. } => "mesh.build_domain",
            Error::Tag { op, .. } => op,
            Error::InvalidMesh(_) => "mesh.validate",
            Error::DegenerateTriangle { op, .. } => op,
            Error::NotPositiveDefinite { .. } => "linalg.factor",
            Error::Disconnected { .. } => "dtn_core.build_dtn",
            Error::Precondition { op, .. } => op,
            Error::NoConvergence { op, .. } => op,
            Error::Range { op, .. } => op,
            Error::Truncation(_) => "semigroup.evolve",
            Error::DivergingBeta { .. } => "robin.robin_solve",
            Error::Parse { op, .. } => op,
            Error::Io(_) => "io",
        }
    }

    /// True for failures of the numerical machinery (as opposed to bad input).
    pub fn is_numeric(&self) -> bool {
        matches!(
            self,
            Error::NotPositiveDefinite { .. }
                | Error::NoConvergence { .. }
                | Error::DegenerateTriangle { .. }
                | Error::Precondition { .. }
                | Error::Truncation(_)
        )
    }
}

pub type Result<T> = std::result::Result<T, Error>;
