//! Generalized symmetric eigenproblems behind the Steklov spectrum and the
//! variational constants (trace, mean-zero trace, grounded tooth quotient,
//! Poincaré, Maz'ya).
//!
//! Every problem is reduced to the smallest eigenvalues of
//! `Schur_keep(A) x = λ B_keep x`, where `B` is supported on `keep`. Two
//! independent routes solve it: a dense route (static condensation plus the
//! Cholesky-reduced dense eigensolver) and an iterative route (block Lanczos
//! on the shift-invert operator, whose solves run in the scalar type `T`).

use std::io::{BufRead, Write};

use serde::{Deserialize, Serialize};

use crate::assembly::BoundaryMass;
use crate::dtn::{BoundaryField, DtnOperator};
use crate::error::{Error, Result};
use crate::linalg::{
    adjacency, dense::gen_sym_eigen, lanczos_largest, nested_dissection, Condensed, LanczosOptions, Mat,
    SparseCholesky, SparseSym,
};
use crate::scalar::{dot, norm_inf, Real};

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Route {
    /// Dense up to `Real::DENSE_LIMIT` kept unknowns, iterative beyond.
    #[default]
    Auto,
    Dense,
    Iterative,
}


#[derive(Clone, Debug, Default)]
pub struct EigenOptions {
    pub route: Route,
    pub lanczos: LanczosOptions,
}

impl EigenOptions {
    pub fn dense() -> Self {
        EigenOptions {
            route: Route::Dense,
            ..Default::default()
        }
    }

    pub fn iterative() -> Self {
        EigenOptions {
            route: Route::Iterative,
            ..Default::default()
        }
    }

    fn resolve<T: Real>(&self, dim: usize) -> Route {
        match self.route {
            Route::Auto if dim <= T::DENSE_LIMIT => Route::Dense,
            Route::Auto => Route::Iterative,
            r => r,
        }
    }
}

fn to_t<T: Real>(x: &[f64]) -> Vec<T> {
    x.iter().map(|&v| T::of(v)).collect()
}

fn to_f<T: Real>(x: &[T]) -> Vec<f64> {
    x.iter().map(|v| v.f64()).collect()
}

/// Flip the sign so the entry of largest magnitude is positive.
fn fix_sign<T: Real>(v: &mut [T]) {
    let mut best = T::zero();
    let mut sign = T::one();
    for &x in v.iter() {
        if x.abs() > best {
            best = x.abs();
            sign = x.signum();
        }
    }
    if sign < T::zero() {
        v.iter_mut().for_each(|x| *x = -*x);
    }
}

/// Factor `A - σB` for the largest σ ≤ `-1` (or a bisected value just below
/// the bottom of the pencil spectrum when `A` is indefinite) for which the
/// matrix is positive definite. Inertia is read off Cholesky success.
fn shifted_factor<T: Real>(a: &SparseSym<T>, b: &SparseSym<T>) -> Result<(f64, SparseCholesky<T>)> {
    let perm = nested_dissection(&adjacency(&a.combine(T::one(), b, T::one())));
    let try_at = |s: f64| SparseCholesky::with_order(&a.combine(T::one(), b, T::of(-s)), perm.clone());
    let mut good = -1.0;
    let mut bad: Option<f64> = None;
    let mut fac = None;
    for _ in 0..80 {
        match try_at(good) {
            Ok(f) => {
                fac = Some(f);
                break;
            }
            Err(Error::NotPositiveDefinite { .. }) => {
                bad = Some(good);
                good *= 4.0;
            }
            Err(e) => return Err(e),
        }
    }
    let Some(mut fac) = fac else {
        return Err(Error::NoConvergence {
            op: "spectral.shift",
            iterations: 80,
            residual: f64::NAN,
        });
    };
    if let Some(mut hi) = bad {
        for _ in 0..12 {
            let mid = 0.5 * (good + hi);
            match try_at(mid) {
                Ok(f) => {
                    good = mid;
                    fac = f;
                }
                Err(Error::NotPositiveDefinite { .. }) => hi = mid,
                Err(e) => return Err(e),
            }
        }
    }
    Ok((good, fac))
}

/// Smallest eigenpairs of `Schur_keep(A) x = λ B_keep x`, vectors on `keep`
/// and `B`-orthonormal.
struct Pencil<'a, T> {
    a: &'a SparseSym<T>,
    b: &'a SparseSym<T>,
    keep: &'a [usize],
}

struct Pairs<T> {
    values: Vec<f64>,
    vectors: Vec<Vec<T>>,
    applications: usize,
}

impl<'a, T: Real> Pencil<'a, T> {
    fn solve(&self, k: usize, opts: &EigenOptions) -> Result<Pairs<T>> {
        let nk = self.keep.len();
        if k > nk || k == 0 {
            return Err(Error::Range {
                op: "spectral.eigen",
                detail: format!("requested {k} eigenpairs of a {nk}-dimensional problem"),
            });
        }
        let b_kk = self.b.submatrix(self.keep);
        match opts.resolve::<T>(nk) {
            Route::Dense => {
                let s = if nk == self.a.n() {
                    let mut d = self.a.dense_block(self.keep, self.keep);
                    d.symmetrize();
                    d
                } else {
                    Condensed::new(self.a, self.keep)?.schur
                };
                let (vals, vecs) = gen_sym_eigen(&s, &b_kk.to_dense())?;
                let vectors = (0..k)
                    .map(|r| {
                        let mut v = vecs.row(r).to_vec();
                        fix_sign(&mut v);
                        v
                    })
                    .collect();
                Ok(Pairs {
                    values: vals[..k].iter().map(|v| v.f64()).collect(),
                    vectors,
                    applications: 0,
                })
            }
            _ => {
                let (sigma, fac) = shifted_factor(self.a, self.b)?;
                let n = self.a.n();
                let keep = self.keep;
                let b_f: SparseSym<f64> = b_kk.cast();
                let op = |y: &[f64]| -> Vec<f64> {
                    let by = b_kk.matvec(&to_t::<T>(y));
                    let mut rhs = vec![T::zero(); n];
                    for (&i, v) in keep.iter().zip(by) {
                        rhs[i] = v;
                    }
                    let z = fac.solve(&rhs);
                    keep.iter().map(|&i| z[i].f64()).collect()
                };
                let r = lanczos_largest(nk, k, op, |x: &[f64]| b_f.matvec(x), &opts.lanczos)?;
                let vectors = r
                    .vectors
                    .iter()
                    .map(|v| {
                        let mut v = to_t::<T>(v);
                        fix_sign(&mut v);
                        v
                    })
                    .collect();
                Ok(Pairs {
                    values: r.theta.iter().map(|t| sigma + 1.0 / t).collect(),
                    vectors,
                    applications: r.applications,
                })
            }
        }
    }

    /// Extension of `x` on `keep` with zero `A`-residual on the other rows.
    fn extend(&self, xs: &[Vec<T>]) -> Result<Vec<Vec<T>>> {
        let n = self.a.n();
        let mut mark = vec![false; n];
        for &i in self.keep {
            mark[i] = true;
        }
        let elim: Vec<usize> = (0..n).filter(|&i| !mark[i]).collect();
        let fac = if elim.is_empty() {
            None
        } else {
            Some(SparseCholesky::new(&self.a.submatrix(&elim))?)
        };
        Ok(xs
            .iter()
            .map(|x| {
                let mut u = vec![T::zero(); n];
                for (&i, &v) in self.keep.iter().zip(x) {
                    u[i] = v;
                }
                if let Some(f) = &fac {
                    let au = self.a.matvec(&u);
                    let rhs: Vec<T> = elim.iter().map(|&i| -au[i]).collect();
                    for (&i, v) in elim.iter().zip(f.solve(&rhs)) {
                        u[i] = v;
                    }
                }
                u
            })
            .collect())
    }
}

/// Ascending Steklov eigenpairs with `B`-orthonormal boundary eigenvectors.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SteklovSpectrum {
    pub eigenvalues: Vec<f64>,
    pub vectors: Vec<BoundaryField<f64>>,
    /// `‖S v - λ B v‖_∞` per pair.
    pub residuals: Vec<f64>,
    /// `max |S_ij|`; bounded by the largest boundary stiffness diagonal when
    /// `S` is not formed.
    pub s_norm: f64,
    /// True when every eigenpair of the boundary space is present.
    pub complete: bool,
    pub route: Route,
    pub applications: usize,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SpectrumEntry {
    pub index: usize,
    pub eigenvalue: f64,
    pub residual: f64,
}

/// Outcome of the checks every reported spectrum must pass.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SpectrumCheck {
    pub lambda0: f64,
    pub lambda0_ok: bool,
    /// `max |v₀ - mean| / |mean|` for the first eigenvector.
    pub constant_deviation: f64,
    pub max_relative_residual: f64,
    pub orthonormality: f64,
    pub kernel_dimension: usize,
}

impl SpectrumCheck {
    pub fn passed(&self) -> bool {
        self.lambda0_ok
            && self.constant_deviation <= 1e-6
            && self.max_relative_residual <= 1e-8
            && self.orthonormality <= 1e-10
            && self.kernel_dimension == 1
    }
}

/// Relative threshold for the numerical kernel.
pub const KERNEL_TOL: f64 = 1e-9;

impl SteklovSpectrum {
    pub fn len(&self) -> usize {
        self.eigenvalues.len()
    }

    pub fn is_empty(&self) -> bool {
        self.eigenvalues.is_empty()
    }

    /// Number of eigenvalues `≤ tol · max(λ₁, 1)`.
    pub fn kernel_dimension(&self, tol: f64) -> usize {
        let scale = self.eigenvalues.get(1).copied().unwrap_or(1.0).max(1.0);
        self.eigenvalues.iter().filter(|&&l| l <= tol * scale).count()
    }

    pub fn entries(&self) -> Vec<SpectrumEntry> {
        self.eigenvalues
            .iter()
            .zip(&self.residuals)
            .enumerate()
            .map(|(index, (&eigenvalue, &residual))| SpectrumEntry {
                index,
                eigenvalue,
                residual,
            })
            .collect()
    }

    /// JSON array of `{index, eigenvalue, residual}`.
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(&self.entries()).expect("plain numbers serialize")
    }

    pub fn check<T: Real>(&self, op: &DtnOperator<T>) -> SpectrumCheck {
        let b: SparseSym<f64> = op.b_block.cast();
        let lambda0 = self.eigenvalues.first().copied().unwrap_or(f64::NAN);
        let l1 = self.eigenvalues.get(1).copied().unwrap_or(1.0);
        let constant_deviation = self
            .vectors
            .first()
            .map(|v| {
                let mean = v.iter().sum::<f64>() / v.len() as f64;
                v.iter().map(|x| (x - mean).abs()).fold(0.0, f64::max) / mean.abs()
            })
            .unwrap_or(f64::NAN);
        let mut orth = 0.0f64;
        for (i, vi) in self.vectors.iter().enumerate() {
            let bv = b.matvec(vi);
            for (j, vj) in self.vectors.iter().enumerate().skip(i) {
                let g = dot(vj, &bv) - if i == j { 1.0 } else { 0.0 };
                orth = orth.max(g.abs());
            }
        }
        SpectrumCheck {
            lambda0,
            lambda0_ok: lambda0.abs() <= KERNEL_TOL * l1.max(1.0),
            constant_deviation,
            max_relative_residual: self.residuals.iter().cloned().fold(0.0, f64::max) / self.s_norm,
            orthonormality: orth,
            kernel_dimension: self.kernel_dimension(KERNEL_TOL),
        }
    }
}

pub fn steklov_spectrum<T: Real>(op: &DtnOperator<T>, k: usize) -> Result<SteklovSpectrum> {
    steklov_spectrum_with(op, k, &EigenOptions::default())
}

pub fn steklov_spectrum_with<T: Real>(op: &DtnOperator<T>, k: usize, opts: &EigenOptions) -> Result<SteklovSpectrum> {
    let nb = op.dim();
    let route = match (opts.route, &op.schur) {
        (Route::Auto, None) => Route::Iterative,
        _ => opts.resolve::<T>(nb),
    };
    let (values, vectors, applications) = match (route, &op.schur) {
        (Route::Dense, Some(s)) => {
            if k > nb || k == 0 {
                return Err(Error::Range {
                    op: "spectral.steklov_spectrum",
                    detail: format!("requested {k} eigenpairs of a {nb}-dimensional boundary space"),
                });
            }
            let (vals, vecs) = gen_sym_eigen(s, &op.b_dense())?;
            let vectors: Vec<Vec<T>> = (0..k)
                .map(|r| {
                    let mut v = vecs.row(r).to_vec();
                    fix_sign(&mut v);
                    v
                })
                .collect();
            (vals[..k].iter().map(|v| v.f64()).collect::<Vec<_>>(), vectors, 0)
        }
        _ => {
            let p = Pencil {
                a: op.stiffness(),
                b: &op.bmass.consistent,
                keep: &op.boundary,
            };
            let r = p.solve(k, &EigenOptions { route, ..opts.clone() })?;
            (r.values, r.vectors, r.applications)
        }
    };
    let residuals = values
        .iter()
        .zip(&vectors)
        .map(|(&l, v)| {
            let sv = op.schur_apply(v);
            let bv = op.b_apply(v);
            let r: Vec<T> = sv.iter().zip(&bv).map(|(a, b)| *a - T::of(l) * *b).collect();
            norm_inf(&r).f64()
        })
        .collect();
    let s_norm = match &op.schur {
        Some(s) => s.max_abs().f64(),
        None => {
            let d = op.stiffness().diagonal();
            op.boundary.iter().map(|&i| d[i].f64()).fold(0.0, f64::max)
        }
    };
    Ok(SteklovSpectrum {
        eigenvalues: values,
        vectors: vectors.iter().map(|v| to_f(v)).collect(),
        residuals,
        s_norm,
        complete: k == nb,
        route,
        applications,
    })
}

/// Number of eigenvalues `≤ threshold`.
pub fn spectral_count(spectrum: &SteklovSpectrum, threshold: f64) -> Result<usize> {
    let top = spectrum.eigenvalues.last().copied().unwrap_or(f64::NEG_INFINITY);
    if !spectrum.complete && top <= threshold {
        return Err(Error::Range {
            op: "spectral.spectral_count",
            detail: format!(
                "threshold {threshold} is not below the largest computed eigenvalue {top} ({} of an incomplete spectrum)",
                spectrum.len()
            ),
        });
    }
    Ok(spectrum.eigenvalues.iter().filter(|&&l| l <= threshold).count())
}

/// Grow the number of computed pairs until the spectrum passes `threshold`;
/// returns the count and the spectrum used.
pub fn steklov_count<T: Real>(op: &DtnOperator<T>, threshold: f64, opts: &EigenOptions) -> Result<(usize, SteklovSpectrum)> {
    let nb = op.dim();
    let mut k = 8.min(nb);
    loop {
        let s = steklov_spectrum_with(op, k, opts)?;
        match spectral_count(&s, threshold) {
            Ok(c) => return Ok((c, s)),
            Err(_) if k < nb => k = (2 * k).min(nb),
            Err(e) => return Err(e),
        }
    }
}

/// A variational constant with the vector that attains it.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ConstantReport {
    pub value: f64,
    /// Full nodal vector attaining the constant.
    pub vector: Vec<f64>,
    pub problem: String,
    pub level: usize,
    pub route: Route,
    /// `‖A x - λ B x‖_∞` of the underlying eigenpair.
    pub residual: f64,
}

impl ConstantReport {
    pub fn at_level(mut self, level: usize) -> Self {
        self.level = level;
        self
    }
}

/// `xᵀ N x / xᵀ D x` evaluated in `T`.
pub fn rayleigh_quotient<T: Real>(num: &SparseSym<T>, den: &SparseSym<T>, x: &[T]) -> f64 {
    (num.quad(x) / den.quad(x)).f64()
}

fn residual<T: Real>(a: &SparseSym<T>, b: &SparseSym<T>, rows: &[usize], lambda: f64, u: &[T]) -> f64 {
    let au = a.matvec(u);
    let bu = b.matvec(u);
    rows.iter()
        .map(|&i| (au[i] - T::of(lambda) * bu[i]).abs().f64())
        .fold(0.0, f64::max)
}

/// `sup ∫_Γ u² / (∫|∇u|² + ∫u²)`: the reciprocal of the smallest
/// eigenvalue of the `(K+M)`-Schur complement against `B` on the boundary.
pub fn trace_constant<T: Real>(k: &SparseSym<T>, m: &SparseSym<T>, b: &BoundaryMass<T>) -> Result<ConstantReport> {
    trace_constant_with(k, m, b, &EigenOptions::default())
}

pub fn trace_constant_with<T: Real>(
    k: &SparseSym<T>,
    m: &SparseSym<T>,
    b: &BoundaryMass<T>,
    opts: &EigenOptions,
) -> Result<ConstantReport> {
    let a = k.combine(T::one(), m, T::one());
    let p = Pencil {
        a: &a,
        b: &b.consistent,
        keep: &b.support,
    };
    let r = p.solve(1, opts)?;
    let u = p.extend(&r.vectors)?.pop().expect("one vector");
    Ok(ConstantReport {
        value: 1.0 / r.values[0],
        residual: residual(&a, &b.consistent, &b.support, r.values[0], &u),
        vector: to_f(&u),
        problem: "trace: sup B(u,u) / (K+M)(u,u)".into(),
        level: 0,
        route: opts.resolve::<T>(b.support.len()),
    })
}

/// `sup ∫_Γ u² / ∫|∇u|²` over `u` whose trace has zero boundary mean,
/// by explicit deflation of the constants. Equals `1/λ₁` of the Steklov
/// spectrum.
pub fn seminorm_trace_constant<T: Real>(k: &SparseSym<T>, b: &BoundaryMass<T>) -> Result<ConstantReport> {
    seminorm_trace_constant_with(k, b, &EigenOptions::default())
}

pub fn seminorm_trace_constant_with<T: Real>(
    k: &SparseSym<T>,
    b: &BoundaryMass<T>,
    opts: &EigenOptions,
) -> Result<ConstantReport> {
    let gamma = &b.support;
    let nb = gamma.len();
    if nb < 2 {
        return Err(Error::Range {
            op: "spectral.seminorm_trace_constant",
            detail: "boundary space has no mean-zero directions".into(),
        });
    }
    let b_kk = b.consistent.submatrix(gamma);
    let ones = vec![T::one(); nb];
    let b1 = b_kk.matvec(&ones);
    let total = crate::scalar::sum(b1.iter().copied());
    let route = opts.resolve::<T>(nb);
    let (lambda, x) = match route {
        Route::Dense => {
            // Basis z_j = e_j - (1ᵀ B e_j / σ(Γ)) 1, j < nb - 1, of the
            // B-orthogonal complement of the constants.
            let s = Condensed::new(k, gamma)?.schur;
            let z = Mat::from_fn(nb, nb - 1, |i, j| {
                let c = b1[j] / total;
                if i == j {
                    T::one() - c
                } else {
                    -c
                }
            });
            let zt = z.transpose();
            let sz = zt.matmul(&s).matmul(&z);
            let bz = zt.matmul(&b_kk.to_dense()).matmul(&z);
            let (vals, vecs) = gen_sym_eigen(&sz, &bz)?;
            let mut x = z.matvec(vecs.row(0));
            fix_sign(&mut x);
            (vals[0].f64(), x)
        }
        _ => {
            // Ground one boundary vertex, solve, then remove the boundary mean.
            let n = k.n();
            let g = gamma[0];
            let free: Vec<usize> = (0..n).filter(|&i| i != g).collect();
            let mut pos = vec![usize::MAX; n];
            for (p, &i) in free.iter().enumerate() {
                pos[i] = p;
            }
            let fac = SparseCholesky::new(&k.submatrix(&free))?;
            let project = |x: &mut Vec<T>| {
                let c = dot(&b1, x) / total;
                x.iter_mut().for_each(|v| *v -= c);
            };
            let solve_s = |r: &[T]| -> Vec<T> {
                let mut rhs = vec![T::zero(); n - 1];
                for (&i, &v) in gamma.iter().zip(r) {
                    if i != g {
                        rhs[pos[i]] = v;
                    }
                }
                let z = fac.solve(&rhs);
                let mut x: Vec<T> = gamma.iter().map(|&i| if i == g { T::zero() } else { z[pos[i]] }).collect();
                project(&mut x);
                x
            };
            let op = |y: &[f64]| -> Vec<f64> {
                let by = b_kk.matvec(&to_t::<T>(y));
                let c = crate::scalar::sum(by.iter().copied()) / total;
                let r: Vec<T> = by.iter().zip(&b1).map(|(v, w)| *v - c * *w).collect();
                to_f(&solve_s(&r))
            };
            let b_f: SparseSym<f64> = b_kk.cast();
            let r = lanczos_largest(nb, 1, op, |x: &[f64]| b_f.matvec(x), &opts.lanczos)?;
            let mut x = to_t::<T>(&r.vectors[0]);
            project(&mut x);
            fix_sign(&mut x);
            (1.0 / r.theta[0], x)
        }
    };
    let p = Pencil {
        a: k,
        b: &b.consistent,
        keep: gamma,
    };
    let u = p.extend(&[x])?.pop().expect("one vector");
    Ok(ConstantReport {
        value: 1.0 / lambda,
        residual: residual(k, &b.consistent, gamma, lambda, &u),
        vector: to_f(&u),
        problem: "mean-zero trace: sup B(u,u) / K(u,u), 1ᵀB u = 0".into(),
        level: 0,
        route,
    })
}

/// `sup B_sel(u,u) / (K+M)(u,u)` over `u` vanishing on `grounded`.
pub fn grounded_trace_quotient<T: Real>(
    k: &SparseSym<T>,
    m: &SparseSym<T>,
    b_sel: &BoundaryMass<T>,
    grounded: &[usize],
) -> Result<ConstantReport> {
    grounded_trace_quotient_with(k, m, b_sel, grounded, &EigenOptions::default())
}

pub fn grounded_trace_quotient_with<T: Real>(
    k: &SparseSym<T>,
    m: &SparseSym<T>,
    b_sel: &BoundaryMass<T>,
    grounded: &[usize],
    opts: &EigenOptions,
) -> Result<ConstantReport> {
    let n = k.n();
    let mut is_g = vec![false; n];
    for &g in grounded {
        is_g[g] = true;
    }
    let free: Vec<usize> = (0..n).filter(|&i| !is_g[i]).collect();
    if grounded.is_empty() || free.is_empty() {
        return Err(Error::Precondition {
            op: "spectral.grounded_trace_quotient",
            detail: "grounded set must be nonempty and proper".into(),
        });
    }
    let mut pos = vec![usize::MAX; n];
    for (p, &i) in free.iter().enumerate() {
        pos[i] = p;
    }
    let keep: Vec<usize> = b_sel.support.iter().filter(|&&i| !is_g[i]).map(|&i| pos[i]).collect();
    if keep.is_empty() {
        return Err(Error::Range {
            op: "spectral.grounded_trace_quotient",
            detail: "the selected boundary lies entirely in the grounded set".into(),
        });
    }
    let a = k.combine(T::one(), m, T::one()).submatrix(&free);
    let b = b_sel.consistent.submatrix(&free);
    let p = Pencil {
        a: &a,
        b: &b,
        keep: &keep,
    };
    let r = p.solve(1, opts)?;
    let ur = p.extend(&r.vectors)?.pop().expect("one vector");
    let res = residual(&a, &b, &keep, r.values[0], &ur);
    let mut u = vec![0.0; n];
    for (&i, v) in free.iter().zip(&ur) {
        u[i] = v.f64();
    }
    Ok(ConstantReport {
        value: 1.0 / r.values[0],
        vector: u,
        problem: "grounded trace: sup B_sel(u,u) / (K+M)(u,u), u = 0 on grounded set".into(),
        level: 0,
        route: opts.resolve::<T>(keep.len()),
        residual: res,
    })
}

fn full_pencil<T: Real>(
    a: &SparseSym<T>,
    m: &SparseSym<T>,
    k: usize,
    opts: &EigenOptions,
) -> Result<(Pairs<T>, Route)> {
    let all: Vec<usize> = (0..a.n()).collect();
    let p = Pencil { a, b: m, keep: &all };
    Ok((p.solve(k, opts)?, opts.resolve::<T>(a.n())))
}

/// Smallest eigenvalues of `A x = λ M x` on the whole vertex set.
pub fn smallest_eigenvalues<T: Real>(
    a: &SparseSym<T>,
    m: &SparseSym<T>,
    k: usize,
    opts: &EigenOptions,
) -> Result<(Vec<f64>, Vec<Vec<f64>>)> {
    let (r, _) = full_pencil(a, m, k, opts)?;
    Ok((r.values, r.vectors.iter().map(|v| to_f(v)).collect()))
}

/// `1/λ₁` of `K x = λ M x`: the best constant in
/// `∫|u - ⟨u⟩|² ≤ c ∫|∇u|²`.
pub fn poincare_constant<T: Real>(k: &SparseSym<T>, m: &SparseSym<T>) -> Result<ConstantReport> {
    poincare_constant_with(k, m, &EigenOptions::default())
}

pub fn poincare_constant_with<T: Real>(k: &SparseSym<T>, m: &SparseSym<T>, opts: &EigenOptions) -> Result<ConstantReport> {
    let (r, route) = full_pencil(k, m, 2, opts)?;
    let all: Vec<usize> = (0..k.n()).collect();
    Ok(ConstantReport {
        value: 1.0 / r.values[1],
        residual: residual(k, m, &all, r.values[1], &r.vectors[1]),
        vector: to_f(&r.vectors[1]),
        problem: "poincare: 1 / second eigenvalue of K versus M".into(),
        level: 0,
        route,
    })
}

/// `1/λ₀` of `(K+B) x = λ M x`: the best constant in
/// `∫u² ≤ c (∫|∇u|² + ∫_Γ u²)`.
pub fn mazya_constant<T: Real>(k: &SparseSym<T>, m: &SparseSym<T>, b: &BoundaryMass<T>) -> Result<ConstantReport> {
    mazya_constant_with(k, m, b, &EigenOptions::default())
}

pub fn mazya_constant_with<T: Real>(
    k: &SparseSym<T>,
    m: &SparseSym<T>,
    b: &BoundaryMass<T>,
    opts: &EigenOptions,
) -> Result<ConstantReport> {
    let a = k.combine(T::one(), &b.consistent, T::one());
    let (r, route) = full_pencil(&a, m, 1, opts)?;
    let all: Vec<usize> = (0..k.n()).collect();
    Ok(ConstantReport {
        value: 1.0 / r.values[0],
        residual: residual(&a, m, &all, r.values[0], &r.vectors[0]),
        vector: to_f(&r.vectors[0]),
        problem: "mazya: 1 / smallest eigenvalue of K+B versus M".into(),
        level: 0,
        route,
    })
}

/// Write a nodal or boundary field as `dtnfield 1` text: a header line, the
/// count, then `index value` per line.
pub fn write_field<W: Write>(mut w: W, indices: &[usize], values: &[f64]) -> Result<()> {
    assert_eq!(indices.len(), values.len());
    writeln!(w, "dtnfield 1")?;
    writeln!(w, "{}", values.len())?;
    for (i, v) in indices.iter().zip(values) {
        writeln!(w, "{i} {v:.16e}")?;
    }
    Ok(())
}

pub fn read_field<R: BufRead>(r: R) -> Result<(Vec<usize>, Vec<f64>)> {
    let parse_err = |line: usize, detail: &str| Error::Parse {
        op: "spectral.read_field",
        line,
        column: 1,
        detail: detail.into(),
    };
    let mut lines = r.lines();
    let mut next = |no: usize| -> Result<String> {
        lines.next().ok_or_else(|| parse_err(no, "unexpected end of file"))?.map_err(Error::from)
    };
    if next(1)?.trim() != "dtnfield 1" {
        return Err(parse_err(1, "expected header `dtnfield 1`"));
    }
    let count: usize = next(2)?.trim().parse().map_err(|_| parse_err(2, "bad count"))?;
    let mut idx = Vec::with_capacity(count);
    let mut val = Vec::with_capacity(count);
    for l in 0..count {
        let s = next(l + 3)?;
        let mut it = s.split_whitespace();
        let i = it.next().and_then(|t| t.parse().ok()).ok_or_else(|| parse_err(l + 3, "bad index"))?;
        let v = it.next().and_then(|t| t.parse().ok()).ok_or_else(|| parse_err(l + 3, "bad value"))?;
        idx.push(i);
        val.push(v);
    }
    Ok((idx, val))
}
