//! Robin forms `a_β = ℓ - β ∫_Γ u v`: lower-boundedness gaps, the
//! refinement scan for the threshold `β₀`, and Robin solves checked
//! through the weak normal derivative.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::assembly::{BoundaryMass, Forms};
use crate::dtn::weak_normal_derivative;
use crate::error::{Error, Result};
use crate::linalg::{SparseCholesky, SparseSym};
use crate::mesh::{build_domain, DomainSpec, Mesh};
use crate::scalar::{norm_inf, Real};
use crate::spectral::{smallest_eigenvalues, EigenOptions};
use crate::trend::{verdict, TrendConfig, Verdict};

/// `robin_solve` shifts whenever the smallest eigenvalue of the pencil is
/// at or below this value.
pub const SHIFT_MARGIN: f64 = 1e-6;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RobinReport {
    pub beta: f64,
    /// `γ_h(β) = max(0, -μ_min)` for the pencil `(K - βB, M)`.
    pub gap: f64,
    pub lambda_min: f64,
    pub level: usize,
    pub domain: String,
}

impl RobinReport {
    pub fn labelled(mut self, domain: &str, level: usize) -> Self {
        self.domain = domain.to_string();
        self.level = level;
        self
    }
}

pub fn lower_bound_gap<T: Real>(
    k: &SparseSym<T>,
    m: &SparseSym<T>,
    b: &BoundaryMass<T>,
    beta: f64,
) -> Result<RobinReport> {
    lower_bound_gap_with(k, m, b, beta, &EigenOptions::default())
}

pub fn lower_bound_gap_with<T: Real>(
    k: &SparseSym<T>,
    m: &SparseSym<T>,
    b: &BoundaryMass<T>,
    beta: f64,
    opts: &EigenOptions,
) -> Result<RobinReport> {
    let a = k.combine(T::one(), &b.consistent, -T::of(beta));
    let (values, _) = smallest_eigenvalues(&a, m, 1, opts)?;
    let lambda_min = values[0];
    // For β ≤ 0 the form is a sum of semidefinite terms.
    let gap = if beta <= 0.0 { 0.0 } else { (-lambda_min).max(0.0) };
    Ok(RobinReport {
        beta,
        gap,
        lambda_min,
        level: 0,
        domain: String::new(),
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GridPoint {
    pub beta: f64,
    /// `γ_h(β)` per level.
    pub gaps: Vec<f64>,
    pub verdict: Verdict,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BetaZeroEstimate {
    pub domain: String,
    pub grid: Vec<GridPoint>,
    /// `[largest stable β, smallest diverging β]`; `null` marks an open end.
    pub beta0_interval: [Option<f64>; 2],
}

impl BetaZeroEstimate {
    pub fn verdict(&self, beta: f64) -> Option<Verdict> {
        self.grid.iter().find(|g| g.beta == beta).map(|g| g.verdict)
    }

    /// Smallest diverging `β` on the grid.
    pub fn diverging_from(&self) -> Option<f64> {
        self.beta0_interval[1]
    }

    /// Every `β` above a diverging grid point is diverging too.
    pub fn verdicts_monotone(&self) -> bool {
        let mut sorted: Vec<&GridPoint> = self.grid.iter().collect();
        sorted.sort_by(|a, b| a.beta.total_cmp(&b.beta));
        let first = sorted.iter().position(|g| g.verdict == Verdict::Diverging);
        first.is_none_or(|i| sorted[i..].iter().all(|g| g.verdict == Verdict::Diverging))
    }

    /// At each level, `γ_h` is nondecreasing in `β`.
    pub fn gaps_monotone(&self) -> bool {
        let mut sorted: Vec<&GridPoint> = self.grid.iter().collect();
        sorted.sort_by(|a, b| a.beta.total_cmp(&b.beta));
        sorted.windows(2).all(|w| {
            w[0].gaps
                .iter()
                .zip(&w[1].gaps)
                .all(|(a, b)| *b >= *a - 1e-9 * a.abs().max(1.0))
        })
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("estimate serializes")
    }
}

/// Gap sequences over `levels` for every `β` in `grid`, with trend verdicts.
pub fn beta_zero_scan<T: Real>(
    domain: &str,
    levels: &[Forms<T>],
    grid: &[f64],
    cfg: &TrendConfig,
    opts: &EigenOptions,
) -> Result<BetaZeroEstimate> {
    let jobs: Vec<(usize, usize)> = (0..grid.len())
        .flat_map(|g| (0..levels.len()).map(move |l| (g, l)))
        .collect();
    let gaps: Vec<f64> = jobs
        .par_iter()
        .map(|&(g, l)| {
            let f = &levels[l];
            lower_bound_gap_with(&f.k, &f.m, &f.b, grid[g], opts).map(|r| r.gap)
        })
        .collect::<Result<_>>()?;
    let points: Vec<GridPoint> = grid
        .iter()
        .enumerate()
        .map(|(g, &beta)| {
            let seq = gaps[g * levels.len()..(g + 1) * levels.len()].to_vec();
            GridPoint {
                beta,
                verdict: verdict(&seq, cfg),
                gaps: seq,
            }
        })
        .collect();
    let upper = points
        .iter()
        .filter(|p| p.verdict == Verdict::Diverging)
        .map(|p| p.beta)
        .reduce(f64::min);
    let lower = points
        .iter()
        .filter(|p| p.verdict == Verdict::Stable && upper.is_none_or(|u| p.beta < u))
        .map(|p| p.beta)
        .reduce(f64::max);
    Ok(BetaZeroEstimate {
        domain: domain.to_string(),
        grid: points,
        beta0_interval: [lower, upper],
    })
}

/// Meshes of `spec` at spacings `h0 / 2^l`, `l < count`.
pub fn refinement_meshes<T: Real>(spec: &DomainSpec, h0: f64, count: usize) -> Result<Vec<Mesh<T>>> {
    (0..count)
        .into_par_iter()
        .map(|l| build_domain(spec, h0 / f64::powi(2.0, l as i32)))
        .collect()
}

/// Comb meshes with the given tooth counts at a common spacing.
pub fn comb_meshes<T: Real>(teeth: &[usize], h: f64) -> Result<Vec<Mesh<T>>> {
    teeth
        .par_iter()
        .map(|&n| build_domain(&DomainSpec::Comb { teeth: n }, h))
        .collect()
}

pub fn forms_of<T: Real>(meshes: &[Mesh<T>]) -> Result<Vec<Forms<T>>> {
    meshes.par_iter().map(Forms::new).collect()
}

/// Solution of `(K - βB + s M) u = M f`; `s = 0` unless the pencil has
/// an eigenvalue at or below `SHIFT_MARGIN`.
#[derive(Clone, Debug)]
pub struct RobinSolution<T> {
    pub u: Vec<T>,
    pub shift: f64,
    pub report: RobinReport,
}

impl<T: Real> RobinSolution<T> {
    /// `f - s u`: the source for which `u` solves the unshifted problem.
    pub fn effective_source(&self, f: &[T]) -> Vec<T> {
        let s = T::of(self.shift);
        f.iter().zip(&self.u).map(|(fi, ui)| *fi - s * *ui).collect()
    }
}

/// Robin solve, refused when `guard` flags `beta` as diverging.
pub fn robin_solve<T: Real>(
    k: &SparseSym<T>,
    m: &SparseSym<T>,
    b: &BoundaryMass<T>,
    beta: f64,
    f: &[T],
    guard: Option<&BetaZeroEstimate>,
) -> Result<RobinSolution<T>> {
    let report = lower_bound_gap(k, m, b, beta)?;
    if let Some(lim) = guard.and_then(|g| g.diverging_from()) {
        if beta >= lim {
            return Err(Error::DivergingBeta {
                beta,
                report: Box::new(report),
            });
        }
    }
    let shift = if report.lambda_min > SHIFT_MARGIN {
        0.0
    } else {
        1.0 + (-report.lambda_min).max(0.0)
    };
    let a = k.combine(T::one(), &b.consistent, -T::of(beta)).combine(T::one(), m, T::of(shift));
    let u = SparseCholesky::new(&a)?.solve(&m.matvec(f));
    Ok(RobinSolution { u, shift, report })
}

/// `‖ψ - β u|_Γ‖_∞ / (max(|β|, 1) ‖u|_Γ‖_∞)` where `ψ` is the weak normal
/// derivative of `u` with source `f`.
pub fn robin_boundary_defect<T: Real>(
    mesh: &Mesh<T>,
    forms: &Forms<T>,
    beta: f64,
    u: &[T],
    f: &[T],
) -> Result<f64> {
    let psi = weak_normal_derivative(mesh, &forms.k, &forms.m, &forms.b, u, f)?;
    let ub: Vec<T> = forms.b.support.iter().map(|&i| u[i]).collect();
    let d: Vec<T> = psi.iter().zip(&ub).map(|(p, x)| *p - T::of(beta) * *x).collect();
    let scale = norm_inf(&ub).f64() * beta.abs().max(1.0);
    Ok(if scale == 0.0 { norm_inf(&d).f64() } else { norm_inf(&d).f64() / scale })
}
