//! Closed-form and quadrature oracles: the cylinder-forest trace
//! degeneration, the cusp trace integral, the tooth constants, the
//! strip inequality and sampled Maz'ya-Sobolev ratios.

use std::num::NonZeroUsize;

use gauss_quad::legendre::GaussLegendre;
use serde::{Deserialize, Serialize};

use crate::assembly::{boundary_mass, stiffness};
use crate::error::{Error, Result};
use crate::mesh::{BoundarySelector, Mesh};
use crate::scalar::Real;

fn range(op: &'static str, detail: String) -> Error {
    Error::Range { op, detail }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ForestNorms {
    pub m: u32,
    pub h1_sq: f64,
    pub grad_sq: f64,
    pub l2_sq: f64,
    /// Integral of the squared clipped ramp over the accumulation square.
    pub boundary_sq: f64,
    /// `Σ_{n≥m} π n 16^{-n} (1 + 9^m)`.
    pub paper_bound: f64,
}

/// Exact norms of the clipped ramp `min(1, max(0, 3^m z))` restricted to the
/// cylinders with `x ≤ 2^{-m} + 4^{-m}`.
///
/// Level `n ≥ m` carries `n - 1` cylinders of radius `4^{-n}`, so the level
/// sums are `Σ (n-1) π 16^{-n}`, summed in closed form.
pub fn forest_norms(m: u32) -> Result<ForestNorms> {
    if m < 3 {
        return Err(range(
            "analytic.forest_norms",
            format!("m = {m}: the cut plane x = 2^-m + 4^-m crosses a cylinder for m < 3"),
        ));
    }
    let r: f64 = 1.0 / 16.0;
    let mf = m as f64;
    let rm = r.powi(m as i32);
    // Σ_{n≥m} n r^n and Σ_{n≥m} r^n.
    let s1 = rm * (mf - (mf - 1.0) * r) / ((1.0 - r) * (1.0 - r));
    let s0 = rm / (1.0 - r);
    let cross = std::f64::consts::PI * (s1 - s0);
    let three_m = 3f64.powi(m as i32);
    let ramp_sq = 1.0 - 2.0 / (3.0 * three_m);
    let l2_sq = cross * ramp_sq;
    let grad_sq = cross * three_m;
    Ok(ForestNorms {
        m,
        h1_sq: l2_sq + grad_sq,
        grad_sq,
        l2_sq,
        boundary_sq: ramp_sq,
        paper_bound: std::f64::consts::PI * s1 * (1.0 + three_m * three_m),
    })
}

/// A quadrature value with its error estimate.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Quadrature {
    pub value: f64,
    pub error: f64,
}

fn cusp_integrand(x: f64) -> f64 {
    (1.0 + 16.0 * x.powi(6)).sqrt() / (x * x)
}

/// `∫_ε^1 x^{-2} √(1 + 16 x^6) dx`: the squared trace of `1/x` along the
/// cusp `y = x^4`, by double-exponential quadrature.
pub fn cusp_trace_integral(eps: f64) -> Result<Quadrature> {
    if !(eps > 0.0 && eps < 1.0) {
        return Err(range("analytic.cusp_trace_integral", format!("eps = {eps} must lie in (0, 1)")));
    }
    // The integrand is smooth but scales like x^{-2}; integrate in t = ln x
    // where it is O(e^{-t}) uniformly.
    let g = |t: f64| {
        let x = t.exp();
        cusp_integrand(x) * x
    };
    let out = quadrature::double_exponential::integrate(g, eps.ln(), 0.0, 1e-13 / eps);
    let value = out.integral;
    if !(out.error_estimate <= 1e-10 * value) {
        return Err(Error::NoConvergence {
            op: "analytic.cusp_trace_integral",
            iterations: out.num_function_evaluations as usize,
            residual: out.error_estimate / value,
        });
    }
    Ok(Quadrature {
        value,
        error: out.error_estimate,
    })
}

/// Composite Gauss-Legendre on geometrically graded panels, with the
/// difference from the rule at half the resolution as error estimate.
pub fn cusp_trace_integral_gauss(eps: f64, panels: usize) -> Result<Quadrature> {
    if !(eps > 0.0 && eps < 1.0) || panels == 0 {
        return Err(range(
            "analytic.cusp_trace_integral",
            format!("eps = {eps}, panels = {panels}"),
        ));
    }
    let rule = GaussLegendre::new(NonZeroUsize::new(8).expect("nonzero"));
    let run = |p: usize| {
        let q = eps.powf(1.0 / p as f64);
        (0..p)
            .map(|i| {
                let a = eps / q.powi(i as i32);
                let b = (a / q).min(1.0);
                rule.integrate(a, b, cusp_integrand)
            })
            .sum::<f64>()
    };
    let fine = run(2 * panels);
    Ok(Quadrature {
        value: fine,
        error: (fine - run(panels)).abs(),
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ToothConstants {
    pub a: f64,
    pub l2_sq: f64,
    pub grad_sq: f64,
    pub boundary_sq: f64,
    /// `boundary_sq / (grad_sq + l2_sq)`.
    pub quotient: f64,
}

/// Norms of `u(x, y) = y` on the tooth of size `a`.
pub fn tooth_exact(a: f64) -> Result<ToothConstants> {
    if !(a > 0.0 && a <= 1.0) {
        return Err(range("analytic.tooth_exact", format!("a = {a} must lie in (0, 1]")));
    }
    let l2_sq = a.powi(5) / 6.0;
    let grad_sq = a.powi(3);
    let boundary_sq = 2.0 / 3.0 * a.powi(3) * (1.0 + a * a).sqrt();
    Ok(ToothConstants {
        a,
        l2_sq,
        grad_sq,
        boundary_sq,
        quotient: boundary_sq / (grad_sq + l2_sq),
    })
}

/// Polynomial in `(x, y)` as a list of `(i, j, c)` terms `c x^i y^j`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Poly2(pub Vec<(u32, u32, f64)>);

impl Poly2 {
    pub fn eval(&self, x: f64, y: f64) -> f64 {
        self.0.iter().map(|&(i, j, c)| c * x.powi(i as i32) * y.powi(j as i32)).sum()
    }

    pub fn grad(&self, x: f64, y: f64) -> [f64; 2] {
        let mut g = [0.0; 2];
        for &(i, j, c) in &self.0 {
            if i > 0 {
                g[0] += c * i as f64 * x.powi(i as i32 - 1) * y.powi(j as i32);
            }
            if j > 0 {
                g[1] += c * j as f64 * x.powi(i as i32) * y.powi(j as i32 - 1);
            }
        }
        g
    }

    pub fn degree(&self) -> u32 {
        self.0.iter().map(|&(i, j, _)| i + j).max().unwrap_or(0)
    }

    pub fn scaled(&self, s: f64) -> Poly2 {
        Poly2(self.0.iter().map(|&(i, j, c)| (i, j, s * c)).collect())
    }
}

/// Polynomials of degree at most 3 used by the strip check.
pub fn strip_samples() -> Vec<Poly2> {
    vec![
        Poly2(vec![(0, 0, 1.0)]),
        Poly2(vec![(1, 0, 1.0)]),
        Poly2(vec![(0, 1, 1.0)]),
        Poly2(vec![(0, 0, 1.0), (1, 0, -1.0), (0, 1, 2.0)]),
        Poly2(vec![(1, 1, 1.0)]),
        Poly2(vec![(2, 0, 1.0), (0, 2, -1.0)]),
        Poly2(vec![(0, 0, 1.0), (0, 1, -3.0), (0, 2, 3.0), (0, 3, -1.0)]),
        Poly2(vec![(3, 0, 1.0), (1, 2, -3.0)]),
        Poly2(vec![(0, 0, 2.0), (2, 1, 1.0), (0, 3, -0.5), (1, 0, 0.25)]),
    ]
}

/// Both sides of the strip inequality for one sample.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct StripSides {
    pub lhs: f64,
    pub rhs: f64,
}

fn check_strip(e1: [f64; 2], e2: [f64; 2], a: f64, b: f64) -> Result<f64> {
    let op = "analytic.strip_inequality_check";
    for e in [e1, e2] {
        if ((e[0] * e[0] + e[1] * e[1]).sqrt() - 1.0).abs() > 1e-12 {
            return Err(range(op, format!("{e:?} is not a unit vector")));
        }
    }
    if !(a > 0.0 && b > 0.0) {
        return Err(range(op, format!("side lengths a = {a}, b = {b} must be positive")));
    }
    let c = e1[0] * e2[0] + e1[1] * e2[1];
    if c.abs() >= 1.0 - 1e-12 {
        return Err(range(op, format!("directions are degenerate (cos = {c})")));
    }
    Ok(c)
}

/// `∫_0^a |u(s e1)|² ds` and `((2/b) ∫|u|² + b ∫|∇u|²) / √(1 - (e1·e2)²)`
/// over the parallelogram `{s e1 + t e2}`; exact for degree ≤ 3.
pub fn strip_sides(e1: [f64; 2], e2: [f64; 2], a: f64, b: f64, u: &Poly2) -> Result<StripSides> {
    let c = check_strip(e1, e2, a, b)?;
    if u.degree() > 3 {
        return Err(range(
            "analytic.strip_inequality_check",
            format!("sample of degree {} exceeds 3", u.degree()),
        ));
    }
    let rule = GaussLegendre::new(NonZeroUsize::new(4).expect("nonzero"));
    let jac = (e1[0] * e2[1] - e1[1] * e2[0]).abs();
    let at = |s: f64, t: f64| (s * e1[0] + t * e2[0], s * e1[1] + t * e2[1]);
    let lhs = rule.integrate(0.0, a, |s| {
        let (x, y) = at(s, 0.0);
        u.eval(x, y).powi(2)
    });
    let l2 = jac
        * rule.integrate(0.0, a, |s| {
            rule.integrate(0.0, b, |t| {
                let (x, y) = at(s, t);
                u.eval(x, y).powi(2)
            })
        });
    let g2 = jac
        * rule.integrate(0.0, a, |s| {
            rule.integrate(0.0, b, |t| {
                let (x, y) = at(s, t);
                let g = u.grad(x, y);
                g[0] * g[0] + g[1] * g[1]
            })
        });
    let rhs = (2.0 / b * l2 + b * g2) / (1.0 - c * c).sqrt();
    Ok(StripSides { lhs, rhs })
}

/// Largest `lhs / rhs` over the samples.
pub fn strip_inequality_check(e1: [f64; 2], e2: [f64; 2], a: f64, b: f64, samples: &[Poly2]) -> Result<f64> {
    check_strip(e1, e2, a, b)?;
    let mut worst = 0.0f64;
    for u in samples {
        let s = strip_sides(e1, e2, a, b, u)?;
        if s.rhs > 0.0 {
            worst = worst.max(s.lhs / s.rhs);
        }
    }
    Ok(worst)
}

/// `∫_T u⁴` for a linear `u` with vertex values `v`:
/// `|T|/15 · Σ_{i+j+k=4} v₁^i v₂^j v₃^k`.
pub fn triangle_quartic(area: f64, v: [f64; 3]) -> f64 {
    let mut h = 0.0;
    for i in 0..=4 {
        for j in 0..=4 - i {
            let k = 4 - i - j;
            h += v[0].powi(i) * v[1].powi(j) * v[2].powi(k);
        }
    }
    area / 15.0 * h
}

/// Exact `∫_Ω u⁴` of a P1 field.
pub fn l4_norm_pow4<T: Real>(mesh: &Mesh<T>, u: &[T]) -> f64 {
    mesh.triangles
        .iter()
        .map(|t| {
            let p = t.map(|i| mesh.vertices[i]);
            let area2 = (p[1].x - p[0].x) * (p[2].y - p[0].y) - (p[2].x - p[0].x) * (p[1].y - p[0].y);
            triangle_quartic(0.5 * area2.abs().f64(), t.map(|i| u[i].f64()))
        })
        .sum()
}

/// Largest `(∫u⁴)^{1/2} / (∫|∇u|² + ∫_Γ u²)` over nonzero samples.
pub fn mazya_sobolev_sample<T: Real>(mesh: &Mesh<T>, samples: &[Vec<T>]) -> Result<f64> {
    let k = stiffness(mesh)?;
    let b = boundary_mass(mesh, &BoundarySelector::All)?;
    let mut worst: Option<f64> = None;
    for u in samples {
        let l4 = l4_norm_pow4(mesh, u);
        if l4 == 0.0 {
            continue;
        }
        let den = (k.quad(u) + b.consistent.quad(u)).f64();
        let r = l4.sqrt() / den;
        worst = Some(worst.map_or(r, |w: f64| w.max(r)));
    }
    worst.ok_or_else(|| {
        range(
            "analytic.mazya_sobolev_sample",
            "every sample field vanishes".into(),
        )
    })
}

/// Interpolants of a fixed family of smooth fields, scaled to the bounding
/// box of the mesh so that the family is comparable across refinements.
pub fn sobolev_fields<T: Real>(mesh: &Mesh<T>) -> Vec<Vec<T>> {
    let (mut lo, mut hi) = ([f64::INFINITY; 2], [f64::NEG_INFINITY; 2]);
    for p in &mesh.vertices {
        lo = [lo[0].min(p.x.f64()), lo[1].min(p.y.f64())];
        hi = [hi[0].max(p.x.f64()), hi[1].max(p.y.f64())];
    }
    let fs: [fn(f64, f64) -> f64; 6] = [
        |_, _| 1.0,
        |x, _| x,
        |_, y| y,
        |x, y| (x - 0.5) * (y - 0.5),
        |x, y| (-(x * x + y * y)).exp(),
        |x, y| (std::f64::consts::PI * x).cos() * (std::f64::consts::PI * y).sin(),
    ];
    fs.iter()
        .map(|f| {
            mesh.vertices
                .iter()
                .map(|p| {
                    let x = (p.x.f64() - lo[0]) / (hi[0] - lo[0]);
                    let y = (p.y.f64() - lo[1]) / (hi[1] - lo[1]);
                    T::of(f(x, y))
                })
                .collect()
        })
        .collect()
}
