use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::time::Instant;

use dtnlab::analytic::{cusp_trace_integral, forest_norms, tooth_exact};
use dtnlab::assembly::{boundary_mass, Forms};
use dtnlab::dtn::{build_dtn_with, DtnMode, DtnOperator};
use dtnlab::mesh::io::{mesh_from_str, mesh_to_string};
use dtnlab::mesh::{BoundarySelector, DomainSpec, Mesh};
use dtnlab::robin::{beta_zero_scan, comb_meshes, forms_of, refinement_meshes};
use dtnlab::semigroup::SpectralSemigroup;
use dtnlab::spectral::{
    grounded_trace_quotient_with, mazya_constant_with, poincare_constant_with, read_field,
    seminorm_trace_constant_with, steklov_count, steklov_spectrum_with, trace_constant_with, write_field,
    ConstantReport, EigenOptions, Route, SteklovSpectrum,
};
use dtnlab::trend::verdict;
use dtnlab::{Real, DD};
use rayon::prelude::*;

use crate::bundle::{
    ConstantRecord, CountBelow, EvolveRow, MeshInfo, ResultBundle, RobinRecord, SemigroupRecord, SpectrumRecord,
};
use crate::config::{Overrides, RunConfig};
use crate::error::{CliError, CliResult};

#[derive(Clone, Copy, Debug, PartialEq, Eq, clap::ValueEnum)]
pub enum ConstantKind {
    /// `sup ‖u‖²_∂ / ‖u‖²_{H¹}`.
    Trace,
    /// `sup ‖u - ū‖²_∂ / ‖∇u‖²` over the boundary mean.
    Seminorm,
    Poincare,
    Mazya,
    /// Trace on `--select` segments of fields vanishing on `--ground` segments.
    Grounded,
}

impl ConstantKind {
    fn name(self) -> &'static str {
        match self {
            ConstantKind::Trace => "trace",
            ConstantKind::Seminorm => "seminorm",
            ConstantKind::Poincare => "poincare",
            ConstantKind::Mazya => "mazya",
            ConstantKind::Grounded => "grounded",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, clap::ValueEnum)]
pub enum ExampleKind {
    /// Degenerate trace sequence on the cylinder forest.
    Forest,
    /// Closed forms of `u = y` on the square tooth.
    Tooth,
    /// Trace integral of `u = 1/x` on the cusp.
    Cusp,
}

fn load(file: &Option<PathBuf>, o: Overrides) -> CliResult<RunConfig> {
    let cfg = RunConfig::resolve(file.as_deref(), o)?;
    cfg.validate()?;
    Ok(cfg)
}

fn read_text(path: &Path, origin: &str) -> CliResult<String> {
    std::fs::read_to_string(path).map_err(|e| CliError::io(origin, format!("{}: {e}", path.display())))
}

/// Write to `path`, or stdout when absent. Files are written in one call so
/// a failed computation never leaves a partial file.
fn emit(path: Option<&Path>, text: &str) -> CliResult<()> {
    match path {
        Some(p) => std::fs::write(p, text).map_err(|e| CliError::io("cli.write", format!("{}: {e}", p.display()))),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn write_bundle(cfg: &RunConfig, bundle: &ResultBundle) -> CliResult<()> {
    match &cfg.bundle {
        Some(p) => emit(Some(p), &bundle.to_json()),
        None => Ok(()),
    }
}

struct Clock(BTreeMap<String, f64>);

impl Clock {
    fn time<R>(&mut self, stage: &str, f: impl FnOnce() -> R) -> R {
        let t0 = Instant::now();
        let r = f();
        *self.0.entry(stage.to_string()).or_default() += t0.elapsed().as_secs_f64();
        r
    }
}

/// Mesh levels from the config: a mesh file and its uniform refinements, or
/// the domain at spacings `h / 2^l`.
fn meshes<T: Real>(cfg: &RunConfig) -> CliResult<Vec<Mesh<T>>> {
    if let Some(p) = &cfg.mesh {
        let m: Mesh<T> = mesh_from_str(&read_text(p, "cli.read_mesh")?)?;
        return Ok(m.refinements(cfg.refinements)?);
    }
    let spec = cfg
        .domain_spec()?
        .ok_or_else(|| CliError::usage("cli.args", "give --domain or --mesh"))?;
    Ok(refinement_meshes(&spec, cfg.h, cfg.refinements)?)
}

fn eigen_options(cfg: &RunConfig) -> EigenOptions {
    EigenOptions {
        route: cfg.route,
        ..Default::default()
    }
}

fn dtn_mode<T: Real>(route: Route, dim: usize) -> DtnMode {
    match route {
        Route::Dense => DtnMode::Dense,
        Route::Iterative => DtnMode::ApplyOnly,
        Route::Auto if dim <= T::DENSE_LIMIT => DtnMode::Dense,
        Route::Auto => DtnMode::ApplyOnly,
    }
}

fn operator<T: Real>(mesh: &Mesh<T>, route: Route) -> CliResult<(Forms<T>, DtnOperator<T>)> {
    let forms = Forms::new(mesh)?;
    let mode = dtn_mode::<T>(route, mesh.boundary_vertices().len());
    let op = build_dtn_with(mesh, &forms.k, &forms.b, mode)?;
    Ok((forms, op))
}

fn precision_name(dd: bool) -> &'static str {
    if dd {
        "dd"
    } else {
        "f64"
    }
}

/// Run `$f::<T>` with `T = DD` when the config asks for it, else `f64`.
macro_rules! dispatch {
    ($cfg:expr, $spec:expr, $f:ident ($($arg:expr),*)) => {
        if $cfg.use_dd($spec) {
            $f::<DD>($($arg),*)
        } else {
            $f::<f64>($($arg),*)
        }
    };
}

pub fn mesh(file: &Option<PathBuf>, o: Overrides) -> CliResult<()> {
    let cfg = load(file, o)?;
    let spec = cfg.domain_spec()?;
    dispatch!(cfg, spec.as_ref(), mesh_run(&cfg))
}

fn mesh_run<T: Real>(cfg: &RunConfig) -> CliResult<()> {
    let mut clock = Clock(BTreeMap::new());
    let levels = clock.time("mesh", || meshes::<T>(cfg))?;
    let m = levels.last().expect("at least one level");
    emit(cfg.output.as_deref(), &mesh_to_string(m))?;
    let summary = format!(
        "vertices {} triangles {} boundary_edges {} boundary_components {} h {:.6e}",
        m.num_vertices(),
        m.triangles.len(),
        m.boundary_edges.len(),
        m.component_tags().len(),
        m.h.f64()
    );
    if cfg.output.is_some() {
        println!("{summary}");
    } else {
        eprintln!("{summary}");
    }
    let mut b = ResultBundle::new("mesh", cfg);
    b.provenance.meshes = levels.iter().enumerate().map(|(l, m)| MeshInfo::of(m, l)).collect();
    b.provenance.timings = clock.0;
    write_bundle(cfg, &b)
}

pub fn assemble(file: &Option<PathBuf>, o: Overrides, out_dir: &Path, dtn: bool) -> CliResult<()> {
    let cfg = load(file, o)?;
    let spec = cfg.domain_spec()?;
    dispatch!(cfg, spec.as_ref(), assemble_run(&cfg, out_dir, dtn))
}

fn assemble_run<T: Real>(cfg: &RunConfig, out_dir: &Path, dtn: bool) -> CliResult<()> {
    let mut clock = Clock(BTreeMap::new());
    let levels = clock.time("mesh", || meshes::<T>(cfg))?;
    let m = levels.last().expect("at least one level");
    let forms = clock.time("assemble", || Forms::new(m))?;
    let mut files: Vec<(&str, Vec<u8>)> = Vec::new();
    for (name, a) in [("K.symc", &forms.k), ("M.symc", &forms.m), ("B.symc", &forms.b.consistent)] {
        let mut buf = Vec::new();
        a.write_sym_coord(&mut buf)?;
        files.push((name, buf));
    }
    if dtn {
        let op = clock.time("dtn", || build_dtn_with(m, &forms.k, &forms.b, DtnMode::Dense))?;
        let (mut s, mut bg) = (Vec::new(), Vec::new());
        op.export(&mut s, &mut bg)?;
        files.push(("S.symc", s));
        files.push(("Bgamma.symc", bg));
    }
    std::fs::create_dir_all(out_dir)
        .map_err(|e| CliError::io("cli.write", format!("{}: {e}", out_dir.display())))?;
    for (name, buf) in &files {
        let p = out_dir.join(name);
        std::fs::write(&p, buf).map_err(|e| CliError::io("cli.write", format!("{}: {e}", p.display())))?;
    }
    println!(
        "vertices {} boundary {} nnz K {} M {} B {}",
        m.num_vertices(),
        m.boundary_vertices().len(),
        forms.k.nnz(),
        forms.m.nnz(),
        forms.b.consistent.nnz()
    );
    let mut b = ResultBundle::new("assemble", cfg);
    b.provenance.meshes = vec![MeshInfo::of(m, levels.len() - 1)];
    b.provenance.timings = clock.0;
    write_bundle(cfg, &b)
}

pub fn steklov(
    file: &Option<PathBuf>,
    o: Overrides,
    check_kernel: bool,
    count_below: Option<f64>,
    vectors: Option<&Path>,
) -> CliResult<()> {
    let cfg = load(file, o)?;
    if let Some(t) = count_below {
        if !t.is_finite() {
            return Err(CliError::usage("cli.args", "count threshold must be finite"));
        }
    }
    let spec = cfg.domain_spec()?;
    let dd = cfg.use_dd(spec.as_ref());
    dispatch!(cfg, spec.as_ref(), steklov_run(&cfg, dd, check_kernel, count_below, vectors))
}

struct SteklovLevel {
    record: SpectrumRecord,
    spectrum: SteklovSpectrum,
    boundary: Vec<usize>,
    info: MeshInfo,
    seconds: f64,
}

fn steklov_run<T: Real>(
    cfg: &RunConfig,
    dd: bool,
    check_kernel: bool,
    count_below: Option<f64>,
    vectors: Option<&Path>,
) -> CliResult<()> {
    let mut clock = Clock(BTreeMap::new());
    let levels = clock.time("mesh", || meshes::<T>(cfg))?;
    let opts = eigen_options(cfg);
    let tol = &cfg.tolerances;
    let runs: Vec<SteklovLevel> = levels
        .par_iter()
        .enumerate()
        .map(|(l, m)| -> CliResult<SteklovLevel> {
            let t0 = Instant::now();
            let (_, op) = operator(m, cfg.route)?;
            let s = steklov_spectrum_with(&op, cfg.k.min(op.dim()), &opts)?;
            let count = match count_below {
                Some(thr) => Some(CountBelow {
                    threshold: thr,
                    count: steklov_count(&op, thr, &opts)?.0,
                }),
                None => None,
            };
            let mut check = s.check(&op);
            let l1 = s.eigenvalues.get(1).copied().unwrap_or(1.0).max(1.0);
            check.lambda0_ok = check.lambda0.abs() <= tol.kernel * l1;
            check.kernel_dimension = s.kernel_dimension(tol.kernel);
            Ok(SteklovLevel {
                record: SpectrumRecord {
                    domain: m.domain.to_string(),
                    level: l,
                    h: m.h.f64(),
                    precision: precision_name(dd).into(),
                    route: s.route,
                    tolerance: tol.residual,
                    entries: s.entries(),
                    check,
                    count_below: count,
                },
                spectrum: s,
                boundary: op.boundary.clone(),
                info: MeshInfo::of(m, l),
                seconds: t0.elapsed().as_secs_f64(),
            })
        })
        .collect::<CliResult<_>>()?;

    let last = runs.last().expect("at least one level");
    emit(cfg.output.as_deref(), &(last.spectrum.to_json() + "\n"))?;
    if let Some(dir) = vectors {
        std::fs::create_dir_all(dir).map_err(|e| CliError::io("cli.write", format!("{}: {e}", dir.display())))?;
        for (i, v) in last.spectrum.vectors.iter().enumerate() {
            let mut buf = Vec::new();
            write_field(&mut buf, &last.boundary, v)?;
            let p = dir.join(format!("vector_{i}.field"));
            std::fs::write(&p, buf).map_err(|e| CliError::io("cli.write", format!("{}: {e}", p.display())))?;
        }
    }
    if let Some(c) = last.record.count_below {
        eprintln!("count below {}: {}", c.threshold, c.count);
    }

    let mut b = ResultBundle::new("steklov", cfg);
    for (l, r) in runs.iter().enumerate() {
        b.provenance.timings.insert(format!("level{l}"), r.seconds);
    }
    b.provenance.timings.extend(clock.0);
    b.provenance.meshes = runs.iter().map(|r| r.info.clone()).collect();
    b.spectra = runs.iter().map(|r| r.record.clone()).collect();
    write_bundle(cfg, &b)?;

    for r in &runs {
        let c = &r.record.check;
        let mut failures = Vec::new();
        if c.max_relative_residual > tol.residual {
            failures.push(format!(
                "worst relative residual {:.3e} exceeds {:.1e}",
                c.max_relative_residual, tol.residual
            ));
        }
        if c.orthonormality > 1e-10 {
            failures.push(format!("B-orthonormality defect {:.3e}", c.orthonormality));
        }
        if check_kernel {
            if !c.lambda0_ok {
                failures.push(format!("lambda0 = {:.3e} is not zero", c.lambda0));
            }
            if c.constant_deviation > tol.constant {
                failures.push(format!("kernel vector deviates from a constant by {:.3e}", c.constant_deviation));
            }
            if c.kernel_dimension != 1 {
                failures.push(format!("kernel dimension {}", c.kernel_dimension));
            }
        }
        if !failures.is_empty() {
            let residuals = r
                .record
                .entries
                .iter()
                .map(|e| format!("{}:{:.3e}", e.index, e.residual))
                .collect::<Vec<_>>()
                .join(" ");
            return Err(CliError::numeric(
                "spectral.steklov_spectrum",
                format!("level {}: {}; residuals {residuals}", r.record.level, failures.join("; ")),
            ));
        }
    }
    Ok(())
}

pub fn evolve(file: &Option<PathBuf>, o: Overrides, init: &str, field_out: Option<&Path>) -> CliResult<()> {
    let cfg = load(file, o)?;
    let spec = cfg.domain_spec()?;
    dispatch!(cfg, spec.as_ref(), evolve_run(&cfg, init, field_out))
}

fn initial_field<T: Real>(init: &str, mesh: &Mesh<T>, boundary: &[usize], sg: &SpectralSemigroup) -> CliResult<Vec<f64>> {
    let bad = |d: String| CliError::usage("cli.init", d);
    let n = boundary.len();
    let (head, arg) = init.split_once(':').unwrap_or((init, ""));
    let indicator = |sel: BoundarySelector| -> CliResult<Vec<f64>> {
        mesh.check_selector(&sel, "cli.init")?;
        let on = mesh.selected_vertices(&sel);
        Ok(boundary.iter().map(|i| if on.binary_search(i).is_ok() { 1.0 } else { 0.0 }).collect())
    };
    match head {
        "constant" => Ok(vec![1.0; n]),
        "x" => Ok(boundary.iter().map(|&i| mesh.vertices[i].x.f64()).collect()),
        "y" => Ok(boundary.iter().map(|&i| mesh.vertices[i].y.f64()).collect()),
        "mode" => {
            let k: usize = arg.parse().map_err(|_| bad(format!("mode index '{arg}' is not an integer")))?;
            sg.spectrum
                .vectors
                .get(k)
                .cloned()
                .ok_or_else(|| bad(format!("mode {k} out of range (dimension {n})")))
        }
        "indicator" => {
            let (key, v) = arg.split_once('=').ok_or_else(|| bad(format!("expected key=value in '{arg}'")))?;
            let v: u32 = v.parse().map_err(|_| bad(format!("tag '{v}' is not an integer")))?;
            match key {
                "component" => indicator(BoundarySelector::Component(v)),
                "segment" => indicator(BoundarySelector::Segment(v)),
                _ => Err(bad(format!("unknown indicator key '{key}' (component, segment)"))),
            }
        }
        "file" => {
            let text = read_text(Path::new(arg), "cli.init")?;
            let (idx, val) = read_field(text.as_bytes())?;
            if idx != boundary {
                return Err(CliError::io(
                    "cli.init",
                    format!("{arg}: field indices do not match the {n} boundary vertices"),
                ));
            }
            Ok(val)
        }
        _ => Err(bad(format!(
            "unknown initial field '{init}' (mode:K, constant, x, y, indicator:component=C, indicator:segment=S, file:PATH)"
        ))),
    }
}

fn evolve_run<T: Real>(cfg: &RunConfig, init: &str, field_out: Option<&Path>) -> CliResult<()> {
    let mut clock = Clock(BTreeMap::new());
    let levels = clock.time("mesh", || meshes::<T>(cfg))?;
    let m = levels.last().expect("at least one level");
    // The full decomposition is needed for arbitrary fields.
    let route = match cfg.route {
        Route::Auto => Route::Dense,
        r => r,
    };
    let (_, op) = clock.time("dtn", || operator(m, route))?;
    let opts = EigenOptions {
        route,
        ..Default::default()
    };
    let s = clock.time("spectrum", || steklov_spectrum_with(&op, op.dim(), &opts))?;
    let sg = SpectralSemigroup::new(&op, s)?;
    let phi = initial_field(init, m, &op.boundary, &sg)?;
    let p = sg.equilibrium().apply(&phi);
    let l1 = sg.lambda1();
    let mut rows = Vec::with_capacity(cfg.times.len());
    let mut last = phi.clone();
    clock.time("evolve", || -> CliResult<()> {
        for &t in &cfg.times {
            let e = sg.evolve(t, &phi)?;
            let d: Vec<f64> = e.iter().zip(&p).map(|(a, b)| a - b).collect();
            let mk = sg.markov_diagnostics(t)?;
            rows.push(EvolveRow {
                t,
                gap_b_norm: sg.b_norm(&d),
                exp_decay: (-l1 * t).exp(),
                operator_gap: sg.operator_norm_gap(t)?,
                min_entry: mk.min_entry,
                row_sum_dev: mk.max_row_sum_deviation,
            });
            last = e;
        }
        Ok(())
    })?;
    let mut csv = String::from("t,gap_b_norm,exp_decay,min_entry,row_sum_dev\n");
    for r in &rows {
        let _ = writeln!(
            csv,
            "{:.16e},{:.16e},{:.16e},{:.16e},{:.16e}",
            r.t, r.gap_b_norm, r.exp_decay, r.min_entry, r.row_sum_dev
        );
    }
    emit(cfg.output.as_deref(), &csv)?;
    if let Some(path) = field_out {
        let mut buf = Vec::new();
        write_field(&mut buf, &op.boundary, &last)?;
        std::fs::write(path, buf).map_err(|e| CliError::io("cli.write", format!("{}: {e}", path.display())))?;
    }
    let mut b = ResultBundle::new("evolve", cfg);
    b.semigroup.push(SemigroupRecord {
        domain: m.domain.to_string(),
        init: init.to_string(),
        lambda1: l1,
        tolerance: dtnlab::semigroup::TAIL_TOL,
        rows,
    });
    b.provenance.meshes = vec![MeshInfo::of(m, levels.len() - 1)];
    b.provenance.timings = clock.0;
    write_bundle(cfg, &b)
}

pub fn trace_const(
    file: &Option<PathBuf>,
    o: Overrides,
    also: &[String],
    kind: ConstantKind,
    select: &[u32],
    ground: &[u32],
) -> CliResult<()> {
    let cfg = load(file, o)?;
    let mut specs: Vec<Option<DomainSpec>> = vec![cfg.domain_spec()?];
    for d in also {
        let s = DomainSpec::parse(d)?;
        s.validate()?;
        specs.push(Some(s));
    }
    if specs.iter().any(|s| cfg.use_dd(s.as_ref())) {
        trace_run::<DD>(&cfg, &specs, kind, select, ground)
    } else {
        trace_run::<f64>(&cfg, &specs, kind, select, ground)
    }
}

fn constant_of<T: Real>(
    mesh: &Mesh<T>,
    kind: ConstantKind,
    select: &[u32],
    ground: &[u32],
    opts: &EigenOptions,
) -> CliResult<ConstantReport> {
    let f = Forms::new(mesh)?;
    Ok(match kind {
        ConstantKind::Trace => trace_constant_with(&f.k, &f.m, &f.b, opts)?,
        ConstantKind::Seminorm => seminorm_trace_constant_with(&f.k, &f.b, opts)?,
        ConstantKind::Poincare => poincare_constant_with(&f.k, &f.m, opts)?,
        ConstantKind::Mazya => mazya_constant_with(&f.k, &f.m, &f.b, opts)?,
        ConstantKind::Grounded => {
            let sides = boundary_mass(mesh, &BoundarySelector::Segments(select.to_vec()))?;
            let g = BoundarySelector::Segments(ground.to_vec());
            mesh.check_selector(&g, "spectral.grounded_trace_quotient")?;
            grounded_trace_quotient_with(&f.k, &f.m, &sides, &mesh.selected_vertices(&g), opts)?
        }
    })
}

fn trace_run<T: Real>(
    cfg: &RunConfig,
    specs: &[Option<DomainSpec>],
    kind: ConstantKind,
    select: &[u32],
    ground: &[u32],
) -> CliResult<()> {
    let mut clock = Clock(BTreeMap::new());
    let families: Vec<Vec<Mesh<T>>> = clock.time("mesh", || {
        specs
            .iter()
            .map(|s| match s {
                Some(spec) => Ok(refinement_meshes(spec, cfg.h, cfg.refinements)?),
                None => meshes::<T>(cfg),
            })
            .collect::<CliResult<_>>()
    })?;
    let jobs: Vec<(usize, &Mesh<T>)> = families
        .iter()
        .flat_map(|f| f.iter().enumerate())
        .collect();
    let opts = eigen_options(cfg);
    let reports: Vec<(ConstantReport, f64)> = jobs
        .par_iter()
        .map(|(_, m)| {
            let t0 = Instant::now();
            constant_of(m, kind, select, ground, &opts).map(|r| (r, t0.elapsed().as_secs_f64()))
        })
        .collect::<CliResult<_>>()?;
    let records: Vec<ConstantRecord> = jobs
        .iter()
        .zip(&reports)
        .map(|((l, m), (r, _))| ConstantRecord {
            kind: kind.name().into(),
            domain: m.domain.to_string(),
            level: *l,
            h: m.h.f64(),
            value: r.value,
            residual: r.residual,
            route: r.route,
            tolerance: cfg.tolerances.residual,
        })
        .collect();

    let mut out = String::from("kind,domain,level,h,value,residual\n");
    for r in &records {
        let _ = writeln!(
            out,
            "{},\"{}\",{},{:.16e},{:.16e},{:.16e}",
            r.kind, r.domain, r.level, r.h, r.value, r.residual
        );
    }
    emit(cfg.output.as_deref(), &out)?;
    for fam in records.chunk_by(|a, b| a.domain == b.domain) {
        let values: Vec<f64> = fam.iter().map(|r| r.value).collect();
        if values.len() > 1 {
            let v = verdict(&values, &cfg.tolerances.trend);
            eprintln!("{} {}: {:?}", kind.name(), fam[0].domain, v);
        }
    }

    let mut b = ResultBundle::new("trace-const", cfg);
    b.provenance.meshes = jobs.iter().map(|(l, m)| MeshInfo::of(m, *l)).collect();
    for (i, (_, s)) in reports.iter().enumerate() {
        b.provenance.timings.insert(format!("job{i:03}"), *s);
    }
    b.provenance.timings.extend(clock.0);
    b.constants = records;
    write_bundle(cfg, &b)
}

pub fn robin(file: &Option<PathBuf>, o: Overrides) -> CliResult<()> {
    let cfg = load(file, o)?;
    if cfg.betas.is_empty() {
        return Err(CliError::usage("cli.args", "empty beta grid"));
    }
    let spec = cfg.domain_spec()?;
    let dd = match (&spec, cfg.teeth.iter().max()) {
        (_, Some(&n)) => cfg.use_dd(Some(&DomainSpec::Comb { teeth: n })),
        (s, None) => cfg.use_dd(s.as_ref()),
    };
    if dd {
        robin_run::<DD>(&cfg)
    } else {
        robin_run::<f64>(&cfg)
    }
}

fn robin_run<T: Real>(cfg: &RunConfig) -> CliResult<()> {
    let mut clock = Clock(BTreeMap::new());
    let (label, levels) = if cfg.teeth.is_empty() {
        let levels = clock.time("mesh", || meshes::<T>(cfg))?;
        (levels[0].domain.to_string(), levels)
    } else {
        let levels = clock.time("mesh", || comb_meshes::<T>(&cfg.teeth, cfg.h))?;
        let teeth: Vec<String> = cfg.teeth.iter().map(|n| n.to_string()).collect();
        (format!("comb(n in {})", teeth.join("/")), levels)
    };
    let forms = clock.time("assemble", || forms_of(&levels))?;
    let est = clock.time("scan", || {
        beta_zero_scan(&label, &forms, &cfg.betas, &cfg.tolerances.trend, &eigen_options(cfg))
    })?;
    emit(cfg.output.as_deref(), &(est.to_json() + "\n"))?;
    let mut b = ResultBundle::new("robin", cfg);
    b.provenance.meshes = levels.iter().enumerate().map(|(l, m)| MeshInfo::of(m, l)).collect();
    b.provenance.timings = clock.0;
    b.robin.push(RobinRecord {
        estimate: est,
        tolerance: cfg.tolerances.trend,
    });
    write_bundle(cfg, &b)
}

fn parse_range(s: &str) -> CliResult<(u32, u32)> {
    let bad = || CliError::usage("cli.args", format!("invalid range '{s}' (expected A..B)"));
    let (a, b) = s.split_once("..").ok_or_else(bad)?;
    let a: u32 = a.trim().parse().map_err(|_| bad())?;
    let b: u32 = b.trim().trim_start_matches('=').parse().map_err(|_| bad())?;
    if a > b {
        return Err(bad());
    }
    Ok((a, b))
}

pub fn examples(kind: ExampleKind, m: &str, a: &[f64], eps: &[f64], output: Option<&Path>) -> CliResult<()> {
    let mut out = String::new();
    match kind {
        ExampleKind::Forest => {
            let (lo, hi) = parse_range(m)?;
            out.push_str("m,h1_sq,paper_bound,boundary_sq\n");
            for m in lo..=hi {
                let f = forest_norms(m)?;
                let _ = writeln!(out, "{},{:.16e},{:.16e},{:.16e}", f.m, f.h1_sq, f.paper_bound, f.boundary_sq);
            }
        }
        ExampleKind::Tooth => {
            out.push_str("a,l2_sq,grad_sq,boundary_sq,quotient\n");
            for &a in a {
                let t = tooth_exact(a)?;
                let _ = writeln!(
                    out,
                    "{:.16e},{:.16e},{:.16e},{:.16e},{:.16e}",
                    t.a, t.l2_sq, t.grad_sq, t.boundary_sq, t.quotient
                );
            }
        }
        ExampleKind::Cusp => {
            out.push_str("eps,integral,error\n");
            for &e in eps {
                let q = cusp_trace_integral(e)?;
                let _ = writeln!(out, "{e:.16e},{:.16e},{:.16e}", q.value, q.error);
            }
        }
    }
    emit(output, &out)
}

pub fn report(inputs: &[PathBuf], output: Option<&Path>, config: Option<&Path>) -> CliResult<()> {
    if inputs.is_empty() {
        return Err(CliError::io("cli.report", "no input files"));
    }
    let cfg = RunConfig::resolve(config, Overrides::default())?;
    let parts = inputs
        .iter()
        .map(|p| ResultBundle::parse(&read_text(p, "cli.report")?, &p.display().to_string()))
        .collect::<CliResult<Vec<_>>>()?;
    let merged = ResultBundle::merge(parts, &cfg);
    let lines: String = merged.verdicts.iter().map(|v| v.line() + "\n").collect();
    match output {
        Some(p) => {
            emit(Some(p), &merged.to_json())?;
            print!("{lines}");
        }
        None => {
            eprint!("{lines}");
            print!("{}", merged.to_json());
        }
    }
    Ok(())
}
