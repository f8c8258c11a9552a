use std::collections::BTreeMap;

use dtnlab::mesh::{DomainSpec, Mesh};
use dtnlab::robin::BetaZeroEstimate;
use dtnlab::spectral::{Route, SpectrumCheck, SpectrumEntry};
use dtnlab::trend::{relative_changes, verdict, TrendConfig, Verdict};
use dtnlab::Real;
use serde::{Deserialize, Serialize};

use crate::config::RunConfig;
use crate::error::{CliError, CliResult};

pub const SCHEMA: &str = "dtnlab-bundle 1";

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct MeshInfo {
    pub domain: String,
    pub level: usize,
    /// Longest edge.
    pub h: f64,
    pub vertices: usize,
    pub triangles: usize,
    pub boundary_vertices: usize,
    pub checksum: String,
}

impl MeshInfo {
    pub fn of<T: Real>(mesh: &Mesh<T>, level: usize) -> Self {
        MeshInfo {
            domain: mesh.domain.to_string(),
            level,
            h: mesh.h.f64(),
            vertices: mesh.num_vertices(),
            triangles: mesh.triangles.len(),
            boundary_vertices: mesh.boundary_vertices().len(),
            checksum: format!("{:016x}", mesh.checksum()),
        }
    }
}

#[derive(Clone, Debug, Default, Serialize, Deserialize)]
pub struct Provenance {
    pub version: String,
    pub meshes: Vec<MeshInfo>,
    /// Wall-clock seconds per stage; the only nondeterministic block.
    pub timings: BTreeMap<String, f64>,
}

#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct CountBelow {
    pub threshold: f64,
    pub count: usize,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SpectrumRecord {
    pub domain: String,
    pub level: usize,
    pub h: f64,
    pub precision: String,
    pub route: Route,
    /// Relative residual tolerance the pairs were accepted under.
    pub tolerance: f64,
    pub entries: Vec<SpectrumEntry>,
    pub check: SpectrumCheck,
    pub count_below: Option<CountBelow>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ConstantRecord {
    pub kind: String,
    pub domain: String,
    pub level: usize,
    pub h: f64,
    pub value: f64,
    pub residual: f64,
    pub route: Route,
    /// Residual tolerance of the underlying eigensolve.
    pub tolerance: f64,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct EvolveRow {
    pub t: f64,
    /// `‖S_t φ - P φ‖_B`.
    pub gap_b_norm: f64,
    /// `exp(-λ₁ t)`.
    pub exp_decay: f64,
    /// `‖S_t - P‖_B`.
    pub operator_gap: f64,
    pub min_entry: f64,
    pub row_sum_dev: f64,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SemigroupRecord {
    pub domain: String,
    pub init: String,
    pub lambda1: f64,
    /// Spectral tail tolerance of the evolution.
    pub tolerance: f64,
    pub rows: Vec<EvolveRow>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct RobinRecord {
    pub estimate: BetaZeroEstimate,
    /// Trend thresholds behind the verdicts.
    pub tolerance: TrendConfig,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct VerdictLine {
    pub check: String,
    pub verdict: String,
    pub detail: String,
}

impl VerdictLine {
    pub fn line(&self) -> String {
        format!("{} {}: {}", self.verdict, self.check, self.detail)
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ResultBundle {
    pub schema: String,
    pub command: String,
    /// Effective configuration of every run merged into this bundle.
    pub config: Vec<RunConfig>,
    #[serde(default)]
    pub spectra: Vec<SpectrumRecord>,
    #[serde(default)]
    pub constants: Vec<ConstantRecord>,
    #[serde(default)]
    pub semigroup: Vec<SemigroupRecord>,
    #[serde(default)]
    pub robin: Vec<RobinRecord>,
    #[serde(default)]
    pub verdicts: Vec<VerdictLine>,
    pub provenance: Provenance,
}

impl ResultBundle {
    pub fn new(command: &str, config: &RunConfig) -> Self {
        ResultBundle {
            schema: SCHEMA.to_string(),
            command: command.to_string(),
            config: vec![config.clone()],
            spectra: Vec::new(),
            constants: Vec::new(),
            semigroup: Vec::new(),
            robin: Vec::new(),
            verdicts: Vec::new(),
            provenance: Provenance {
                version: env!("CARGO_PKG_VERSION").to_string(),
                ..Default::default()
            },
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("bundle serializes") + "\n"
    }

    pub fn parse(text: &str, source: &str) -> CliResult<Self> {
        let b: ResultBundle =
            serde_json::from_str(text).map_err(|e| CliError::io("cli.report", format!("{source}: {e}")))?;
        if b.schema != SCHEMA {
            return Err(CliError::io(
                "cli.report",
                format!("{source}: schema '{}' is not '{SCHEMA}'", b.schema),
            ));
        }
        Ok(b)
    }

    /// Concatenate `parts` in order; timings are keyed by input position.
    pub fn merge(parts: Vec<ResultBundle>, config: &RunConfig) -> Self {
        let mut out = ResultBundle::new("report", config);
        out.config.clear();
        for (i, p) in parts.into_iter().enumerate() {
            out.config.extend(p.config);
            out.spectra.extend(p.spectra);
            out.constants.extend(p.constants);
            out.semigroup.extend(p.semigroup);
            out.robin.extend(p.robin);
            out.provenance.meshes.extend(p.provenance.meshes);
            for (k, v) in p.provenance.timings {
                out.provenance.timings.insert(format!("{i}.{}.{k}", p.command), v);
            }
        }
        out.config.push(config.clone());
        out.verdicts = verdicts(&out, &config.tolerances.trend);
        out
    }
}

fn pass(ok: bool) -> String {
    if ok { "PASS" } else { "FAIL" }.to_string()
}

fn fmt_list(v: &[f64]) -> String {
    v.iter().map(|x| format!("{x:.6}")).collect::<Vec<_>>().join(", ")
}

/// Verdict lines for the checks the bundle's contents cover.
pub fn verdicts(b: &ResultBundle, trend: &TrendConfig) -> Vec<VerdictLine> {
    let mut out = Vec::new();
    let spec = |d: &str| DomainSpec::parse(d).ok();

    for s in &b.spectra {
        let c = &s.check;
        out.push(VerdictLine {
            check: format!("spectrum invariants {} level {}", s.domain, s.level),
            verdict: pass(c.lambda0_ok && c.kernel_dimension == 1 && c.max_relative_residual <= s.tolerance),
            detail: format!(
                "lambda0 {:.3e}, kernel dimension {}, constant deviation {:.3e}, worst residual {:.3e}",
                c.lambda0, c.kernel_dimension, c.constant_deviation, c.max_relative_residual
            ),
        });
        if let Some(DomainSpec::PolygonalDisk { radius, .. }) = spec(&s.domain) {
            let oracle = [0.0, 1.0, 1.0, 2.0, 2.0, 3.0, 3.0];
            let err = s
                .entries
                .iter()
                .zip(oracle)
                .map(|(e, o)| {
                    let o = o / radius;
                    if o == 0.0 {
                        e.eigenvalue.abs()
                    } else {
                        (e.eigenvalue - o).abs() / o
                    }
                })
                .fold(0.0, f64::max);
            let n = s.entries.len().min(oracle.len());
            out.push(VerdictLine {
                check: format!("disk oracle {} level {}", s.domain, s.level),
                verdict: pass(err <= 0.02),
                detail: format!("first {n} eigenvalues within {err:.3e} of 0, 1, 1, 2, 2, 3, 3 (scaled by 1/r)"),
            });
        }
    }

    let mut combs: Vec<(usize, usize)> = b
        .spectra
        .iter()
        .filter_map(|s| match (spec(&s.domain), s.count_below) {
            (Some(DomainSpec::Comb { teeth }), Some(c)) => Some((teeth, c.count)),
            _ => None,
        })
        .collect();
    combs.sort_unstable();
    combs.dedup_by_key(|c| c.0);
    if combs.len() >= 2 {
        let table = combs.iter().map(|(n, c)| format!("N={n}: {c}")).collect::<Vec<_>>().join(", ");
        let first = combs[0];
        let last = combs[combs.len() - 1];
        out.push(VerdictLine {
            check: "comb spectral count growth".into(),
            verdict: pass(last.1 >= first.1 + 8),
            detail: format!("{table}; growth {} from N={} to N={}", last.1 as i64 - first.1 as i64, first.0, last.0),
        });
    }

    // Constants: refinement trend per (kind, domain), then cusp growth per eps halving.
    let mut groups: BTreeMap<(String, String), Vec<(usize, f64)>> = BTreeMap::new();
    for c in &b.constants {
        groups
            .entry((c.kind.clone(), c.domain.clone()))
            .or_default()
            .push((c.level, c.value));
    }
    let mut finest: BTreeMap<String, Vec<(f64, f64)>> = BTreeMap::new();
    for ((kind, domain), mut v) in groups {
        v.sort_by_key(|x| x.0);
        let values: Vec<f64> = v.iter().map(|x| x.1).collect();
        if values.len() >= 2 {
            let changes = relative_changes(&values);
            out.push(VerdictLine {
                check: format!("{kind} refinement trend {domain}"),
                verdict: match verdict(&values, trend) {
                    Verdict::Stable => "PASS".into(),
                    Verdict::Diverging => "DIVERGING".into(),
                    Verdict::Inconclusive => "INCONCLUSIVE".into(),
                },
                detail: format!("values [{}], relative changes [{}]", fmt_list(&values), fmt_list(&changes)),
            });
        }
        if let Some(DomainSpec::Cusp { eps }) = spec(&domain) {
            finest.entry(kind).or_default().push((eps, *values.last().expect("nonempty group")));
        }
    }
    for (kind, mut v) in finest {
        if v.len() < 2 {
            continue;
        }
        v.sort_by(|a, b| b.0.total_cmp(&a.0));
        let factors: Vec<f64> = v.windows(2).map(|w| w[1].1 / w[0].1).collect();
        out.push(VerdictLine {
            check: format!("cusp {kind} growth"),
            verdict: pass(factors.iter().all(|&f| f >= 1.8)),
            detail: format!(
                "eps [{}], values [{}], growth factors [{}]",
                fmt_list(&v.iter().map(|x| x.0).collect::<Vec<_>>()),
                fmt_list(&v.iter().map(|x| x.1).collect::<Vec<_>>()),
                fmt_list(&factors)
            ),
        });
    }

    for s in &b.semigroup {
        let ratio = s
            .rows
            .iter()
            .filter(|r| r.exp_decay > 0.0)
            .map(|r| (r.operator_gap / r.exp_decay - 1.0).abs())
            .fold(0.0, f64::max);
        let rows = s.rows.iter().map(|r| r.row_sum_dev).fold(0.0, f64::max);
        out.push(VerdictLine {
            check: format!("semigroup rate {}", s.domain),
            verdict: pass(ratio <= 1e-8),
            detail: format!("max |gap / exp(-lambda1 t) - 1| = {ratio:.3e}, lambda1 = {:.6}", s.lambda1),
        });
        out.push(VerdictLine {
            check: format!("semigroup mass {}", s.domain),
            verdict: pass(rows <= 1e-10),
            detail: format!("max |S_t 1 - 1| = {rows:.3e}"),
        });
    }

    for r in &b.robin {
        let e = &r.estimate;
        let [lo, hi] = e.beta0_interval;
        let show = |x: Option<f64>, none: &str| x.map_or(none.to_string(), |v| v.to_string());
        out.push(VerdictLine {
            check: format!("robin threshold {}", e.domain),
            verdict: pass(e.verdicts_monotone()),
            detail: format!(
                "verdicts [{}], beta0 in [{}, {}]",
                e.grid
                    .iter()
                    .map(|p| format!("{}: {:?}", p.beta, p.verdict).to_lowercase())
                    .collect::<Vec<_>>()
                    .join(", "),
                show(lo, "0"),
                show(hi, "inf")
            ),
        });
    }
    out
}
