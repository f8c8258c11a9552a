use std::path::{Path, PathBuf};

use dtnlab::mesh::DomainSpec;
use dtnlab::spectral::Route;
use dtnlab::trend::TrendConfig;
use serde::{Deserialize, Serialize};

use crate::error::{CliError, CliResult};

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Precision {
    /// f64, or double-double for combs with more than `AUTO_DD_TEETH` teeth.
    #[default]
    Auto,
    F64,
    Dd,
}

/// Combs with more teeth than this are run in double-double under `Auto`.
pub const AUTO_DD_TEETH: usize = 8;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Tolerances {
    /// Largest accepted relative eigen-residual.
    pub residual: f64,
    /// `|λ₀| <= kernel * max(λ₁, 1)` counts as a zero eigenvalue.
    pub kernel: f64,
    /// Largest accepted deviation of the kernel vector from a constant.
    pub constant: f64,
    pub trend: TrendConfig,
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances {
            residual: 1e-8,
            kernel: dtnlab::spectral::KERNEL_TOL,
            constant: 1e-6,
            trend: TrendConfig::default(),
        }
    }
}

/// Effective settings of one run, echoed into every result bundle.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub domain: Option<String>,
    pub mesh: Option<PathBuf>,
    pub h: f64,
    /// Number of mesh levels, each halving the spacing of the previous one.
    pub refinements: usize,
    pub k: usize,
    pub times: Vec<f64>,
    pub betas: Vec<f64>,
    /// Tooth counts for comb-family sweeps.
    pub teeth: Vec<usize>,
    pub output: Option<PathBuf>,
    pub bundle: Option<PathBuf>,
    pub precision: Precision,
    pub route: Route,
    pub tolerances: Tolerances,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            domain: None,
            mesh: None,
            h: 0.1,
            refinements: 1,
            k: 8,
            times: vec![0.0, 0.25, 0.5, 1.0, 2.0, 4.0],
            betas: vec![0.5, 1.0, 2.0],
            teeth: Vec::new(),
            output: None,
            bundle: None,
            precision: Precision::Auto,
            route: Route::Auto,
            tolerances: Tolerances::default(),
        }
    }
}

/// Command-line values; `None` leaves the config file or default in place.
#[derive(Clone, Debug, Default)]
pub struct Overrides {
    pub domain: Option<String>,
    pub mesh: Option<PathBuf>,
    pub h: Option<f64>,
    pub refinements: Option<usize>,
    pub k: Option<usize>,
    pub times: Option<Vec<f64>>,
    pub betas: Option<Vec<f64>>,
    pub teeth: Option<Vec<usize>>,
    pub output: Option<PathBuf>,
    pub bundle: Option<PathBuf>,
    pub precision: Option<Precision>,
    pub route: Option<Route>,
}

impl RunConfig {
    /// Defaults, then the config file, then the command line.
    pub fn resolve(file: Option<&Path>, o: Overrides) -> CliResult<Self> {
        let mut cfg = match file {
            Some(p) => {
                let text = std::fs::read_to_string(p)
                    .map_err(|e| CliError::io("cli.config", format!("{}: {e}", p.display())))?;
                toml::from_str(&text).map_err(|e| CliError::io("cli.config", format!("{}: {e}", p.display())))?
            }
            None => RunConfig::default(),
        };
        macro_rules! set {
            ($($f:ident),*) => {$(
                if let Some(v) = o.$f {
                    cfg.$f = v;
                }
            )*};
        }
        macro_rules! set_opt {
            ($($f:ident),*) => {$(
                if o.$f.is_some() {
                    cfg.$f = o.$f;
                }
            )*};
        }
        // A geometry source on the command line replaces the file's.
        match (&o.domain, &o.mesh) {
            (Some(_), None) => cfg.mesh = None,
            (None, Some(_)) => cfg.domain = None,
            _ => {}
        }
        set!(h, refinements, k, times, betas, teeth, precision, route);
        set_opt!(domain, mesh, output, bundle);
        Ok(cfg)
    }

    pub fn domain_spec(&self) -> CliResult<Option<DomainSpec>> {
        match &self.domain {
            Some(s) => {
                let spec = DomainSpec::parse(s)?;
                spec.validate()?;
                Ok(Some(spec))
            }
            None => Ok(None),
        }
    }

    /// Checks shared by every subcommand, before any computation.
    pub fn validate(&self) -> CliResult<()> {
        let bad = |d: String| Err(CliError::usage("cli.config", d));
        if !(self.h.is_finite() && self.h > 0.0) {
            return bad(format!("h must be positive, got {}", self.h));
        }
        if self.refinements == 0 {
            return bad("refinements must be at least 1".into());
        }
        if self.k == 0 {
            return bad("k must be at least 1".into());
        }
        if self.times.iter().any(|t| !(t.is_finite() && *t >= 0.0)) {
            return bad("times must be finite and non-negative".into());
        }
        if self.betas.iter().any(|b| !(b.is_finite() && *b > 0.0)) {
            return bad("betas must be finite and positive".into());
        }
        if self.teeth.contains(&0) {
            return bad("tooth counts must be positive".into());
        }
        let t = &self.tolerances;
        if [t.residual, t.kernel, t.constant, t.trend.stable_tol].iter().any(|v| !(v.is_finite() && *v > 0.0))
            || t.trend.growth <= 1.0
            || t.trend.steps == 0
        {
            return bad("tolerances must be positive, trend growth above 1 and steps at least 1".into());
        }
        if self.domain.is_some() && self.mesh.is_some() {
            return bad("give either a domain or a mesh file, not both".into());
        }
        self.domain_spec()?;
        Ok(())
    }

    /// Scalar type for a run on `spec`.
    pub fn use_dd(&self, spec: Option<&DomainSpec>) -> bool {
        match self.precision {
            Precision::F64 => false,
            Precision::Dd => true,
            Precision::Auto => matches!(spec, Some(DomainSpec::Comb { teeth }) if *teeth > AUTO_DD_TEETH),
        }
    }
}
