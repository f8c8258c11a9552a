//! `dtnlab`: meshes, forms, Steklov spectra, semigroup evolution, trace
//! constants, Robin scans and closed-form tables from the command line.

mod bundle;
mod commands;
mod config;
mod error;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use dtnlab::spectral::Route;

use crate::config::{Overrides, Precision};
use crate::error::{CliError, CliResult};

#[derive(Parser, Debug)]
#[command(name = "dtnlab", version, about = "Dirichlet-to-Neumann laboratory on rough planar domains")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

/// Options shared by every computing subcommand.
#[derive(Args, Debug, Clone, Default)]
pub struct Common {
    /// TOML run configuration; flags override it.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Domain, e.g. `tooth(a=0.5)`, `comb(n=8)`, `cusp(eps=0.1)`.
    #[arg(long)]
    domain: Option<String>,
    /// `dtnmesh 1` file instead of a generated domain.
    #[arg(long, conflicts_with = "domain")]
    mesh: Option<PathBuf>,
    /// Target spacing of the coarsest mesh.
    #[arg(long)]
    h: Option<f64>,
    /// Number of mesh levels (each halves the spacing).
    #[arg(long)]
    refinements: Option<usize>,
    #[arg(long, value_enum)]
    precision: Option<Precision>,
    /// Primary output file (stdout when absent).
    #[arg(short, long)]
    output: Option<PathBuf>,
    /// Also write a result bundle (JSON) here.
    #[arg(long)]
    bundle: Option<PathBuf>,
}

impl Common {
    fn overrides(&self) -> Overrides {
        Overrides {
            domain: self.domain.clone(),
            mesh: self.mesh.clone(),
            h: self.h,
            refinements: self.refinements,
            precision: self.precision,
            output: self.output.clone(),
            bundle: self.bundle.clone(),
            ..Default::default()
        }
    }
}

fn route_arg(s: &str) -> Result<Route, String> {
    match s {
        "auto" => Ok(Route::Auto),
        "dense" => Ok(Route::Dense),
        "iterative" => Ok(Route::Iterative),
        _ => Err(format!("unknown route '{s}' (auto, dense, iterative)")),
    }
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Generate a mesh and write it as `dtnmesh 1`.
    Mesh(Common),
    /// Assemble K, M, B (and optionally S) in sym-coord format.
    Assemble {
        #[command(flatten)]
        common: Common,
        /// Directory receiving K.symc, M.symc, B.symc.
        #[arg(long, default_value = ".")]
        out_dir: PathBuf,
        /// Also write the Schur complement S and the boundary block of B.
        #[arg(long)]
        dtn: bool,
    },
    /// Smallest Steklov eigenpairs; exit 0 iff the spectrum invariants hold.
    Steklov {
        #[command(flatten)]
        common: Common,
        #[arg(short)]
        k: Option<usize>,
        #[arg(long, value_parser = route_arg)]
        route: Option<Route>,
        /// Also require a one-dimensional, constant kernel.
        #[arg(long)]
        check_kernel: bool,
        /// Count eigenvalues below this threshold.
        #[arg(long)]
        count_below: Option<f64>,
        /// Directory receiving one `dtnfield 1` file per eigenvector.
        #[arg(long)]
        vectors: Option<PathBuf>,
    },
    /// Evolve a boundary field under the semigroup; CSV time series.
    Evolve {
        #[command(flatten)]
        common: Common,
        /// Comma-separated times.
        #[arg(long, value_delimiter = ',')]
        times: Option<Vec<f64>>,
        /// mode:K, constant, x, y, indicator:component=C,
        /// indicator:segment=S or file:PATH.
        #[arg(long, default_value = "mode:1")]
        init: String,
        /// Write the field at the last time as `dtnfield 1`.
        #[arg(long)]
        field_out: Option<PathBuf>,
    },
    /// Trace, Poincaré or Maz'ya constants over a refinement sweep.
    TraceConst {
        #[command(flatten)]
        common: Common,
        /// Extra domains swept alongside `--domain`.
        #[arg(long = "also", value_name = "DOMAIN")]
        also: Vec<String>,
        #[arg(long, value_enum, default_value = "trace")]
        kind: commands::ConstantKind,
        /// Boundary segments carrying the trace (grounded kind).
        #[arg(long, value_delimiter = ',', default_value = "1,2")]
        select: Vec<u32>,
        /// Boundary segments where the field vanishes (grounded kind).
        #[arg(long, value_delimiter = ',', default_value = "0")]
        ground: Vec<u32>,
    },
    /// Scan the Robin lower-bound gap over a β grid and mesh levels.
    Robin {
        #[command(flatten)]
        common: Common,
        #[arg(long, value_delimiter = ',')]
        betas: Option<Vec<f64>>,
        /// Comb tooth counts used as the levels instead of refinements.
        #[arg(long, value_delimiter = ',')]
        teeth: Option<Vec<usize>>,
    },
    /// Closed-form tables (CSV).
    Examples {
        #[arg(long, value_enum, default_value = "forest")]
        kind: commands::ExampleKind,
        /// Range of m for the forest table, e.g. `3..10`.
        #[arg(long, default_value = "3..10")]
        m: String,
        /// Tooth heights for the tooth table.
        #[arg(long, value_delimiter = ',', default_value = "1,0.5,0.25,0.125")]
        a: Vec<f64>,
        /// Cusp parameters for the cusp table.
        #[arg(long, value_delimiter = ',', default_value = "0.2,0.1,0.05,0.025")]
        eps: Vec<f64>,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Merge result bundles and print verdict lines.
    Report {
        inputs: Vec<PathBuf>,
        /// Merged bundle (stdout when absent, verdict lines then go to stderr).
        #[arg(short, long)]
        output: Option<PathBuf>,
        #[arg(long)]
        config: Option<PathBuf>,
    },
}

fn init_threads() -> CliResult<()> {
    let Ok(v) = std::env::var("DTNLAB_THREADS") else {
        return Ok(());
    };
    let n: usize = v
        .trim()
        .parse()
        .ok()
        .filter(|&n| n > 0)
        .ok_or_else(|| CliError::usage("cli.threads", format!("DTNLAB_THREADS must be a positive integer, got '{v}'")))?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| CliError::usage("cli.threads", e.to_string()))
}

fn run(cli: Cli) -> CliResult<()> {
    init_threads()?;
    match cli.command {
        Command::Mesh(common) => commands::mesh(&common.config.clone(), common.overrides()),
        Command::Assemble { common, out_dir, dtn } => {
            commands::assemble(&common.config.clone(), common.overrides(), &out_dir, dtn)
        }
        Command::Steklov {
            common,
            k,
            route,
            check_kernel,
            count_below,
            vectors,
        } => {
            let o = Overrides {
                k,
                route,
                ..common.overrides()
            };
            commands::steklov(&common.config, o, check_kernel, count_below, vectors.as_deref())
        }
        Command::Evolve {
            common,
            times,
            init,
            field_out,
        } => {
            let o = Overrides {
                times,
                ..common.overrides()
            };
            commands::evolve(&common.config, o, &init, field_out.as_deref())
        }
        Command::TraceConst {
            common,
            also,
            kind,
            select,
            ground,
        } => commands::trace_const(&common.config, common.overrides(), &also, kind, &select, &ground),
        Command::Robin { common, betas, teeth } => {
            let o = Overrides {
                betas,
                teeth,
                ..common.overrides()
            };
            commands::robin(&common.config, o)
        }
        Command::Examples {
            kind,
            m,
            a,
            eps,
            output,
        } => commands::examples(kind, &m, &a, &eps, output.as_deref()),
        Command::Report { inputs, output, config } => commands::report(&inputs, output.as_deref(), config.as_deref()),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            use clap::error::ErrorKind;
            if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) {
                print!("{e}");
                return ExitCode::SUCCESS;
            }
            let first = e.to_string().lines().next().unwrap_or("").trim_start_matches("error: ").to_string();
            eprintln!("{}", CliError::usage("cli.args", first).line());
            return ExitCode::from(error::USAGE);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("{}", e.line());
            ExitCode::from(e.code)
        }
    }
}
