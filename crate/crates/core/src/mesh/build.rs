use super::domain::DomainSpec;
use super::quadtree::CombBox;
use super::{Mesh, Point2};
use crate::error::{Error, Result};
use crate::scalar::Real;

/// Build a conforming triangulation of `spec` with grid spacing at most
/// `h_target` away from graded features (cusp tip, comb teeth).
///
/// Structured templates: split rectangular grids for rectangles and
/// parallelograms, concentric zipped rings for disks and annuli, row
/// zippers for teeth, geometric columns for the cusp and a balanced
/// quadtree graded towards the tooth bases for the comb box.
pub fn build_domain<T: Real>(spec: &DomainSpec, h_target: f64) -> Result<Mesh<T>> {
    if !(h_target.is_finite() && h_target > 0.0) {
        return Err(Error::Parameter(format!("h_target must be positive, got {h_target}")));
    }
    spec.validate()?;
    match *spec {
        DomainSpec::Rectangle { width, height } => rectangle(spec, width, height, h_target),
        DomainSpec::PolygonalDisk { radius, sides } => disk(spec, radius, sides, h_target),
        DomainSpec::PolygonalAnnulus {
            r_inner,
            r_outer,
            sides,
        } => annulus(spec, r_inner, r_outer, sides, h_target),
        DomainSpec::Parallelogram { e1, e2, a, b } => parallelogram(spec, e1, e2, a, b, h_target),
        DomainSpec::Tooth { a } => tooth(spec, a, h_target),
        DomainSpec::Comb { teeth } => comb(spec, teeth, h_target),
        DomainSpec::Cusp { eps } => cusp(spec, eps, h_target),
        DomainSpec::Imported => Err(Error::Parameter("cannot build an imported domain".into())),
    }
}

fn too_coarse(feature: &str, needed: f64, h: f64) -> Result<()> {
    if h > needed {
        Err(Error::Resolution {
            feature: feature.into(),
            needed,
        })
    } else {
        Ok(())
    }
}

fn cells(len: f64, h: f64) -> usize {
    // Guard against 1.0000000000000002 style overshoot.
    ((len / h) - 1e-9).ceil().max(1.0) as usize
}

/// Triangulate the strip between two chains walked in the same direction,
/// `lower` having the strip on its left. Params order vertices along each
/// chain; `closed` chains wrap around.
fn zip(lower: &[usize], tl: &[f64], upper: &[usize], tu: &[f64], closed: bool, out: &mut Vec<[usize; 3]>) {
    let (mut l, mut lt, mut u, mut ut) = (lower.to_vec(), tl.to_vec(), upper.to_vec(), tu.to_vec());
    if closed {
        l.push(lower[0]);
        lt.push(tl[0] + 1.0);
        u.push(upper[0]);
        ut.push(tu[0] + 1.0);
    }
    let (mut a, mut b) = (0usize, 0usize);
    while a + 1 < l.len() || b + 1 < u.len() {
        let advance_lower = b + 1 == u.len() || (a + 1 < l.len() && lt[a + 1] <= ut[b + 1]);
        if advance_lower {
            out.push([l[a], l[a + 1], u[b]]);
            a += 1;
        } else {
            out.push([l[a], u[b + 1], u[b]]);
            b += 1;
        }
    }
}

fn rectangle<T: Real>(spec: &DomainSpec, w: f64, hh: f64, h: f64) -> Result<Mesh<T>> {
    too_coarse("rectangle side", w.min(hh), h)?;
    let (nx, ny) = (cells(w, h), cells(hh, h));
    let mut vertices = Vec::with_capacity((nx + 1) * (ny + 1));
    for j in 0..=ny {
        for i in 0..=nx {
            vertices.push(Point2::new(
                T::of(w) * T::of_usize(i) / T::of_usize(nx),
                T::of(hh) * T::of_usize(j) / T::of_usize(ny),
            ));
        }
    }
    let id = |i: usize, j: usize| j * (nx + 1) + i;
    let mut tris = Vec::with_capacity(2 * nx * ny);
    for j in 0..ny {
        for i in 0..nx {
            tris.push([id(i, j), id(i + 1, j), id(i + 1, j + 1)]);
            tris.push([id(i, j), id(i + 1, j + 1), id(i, j + 1)]);
        }
    }
    let tol = 1e-9 * w.max(hh);
    Mesh::from_triangles(vertices, tris, spec.clone(), move |p, q| {
        let m = p.midpoint(q);
        let (x, y) = (m.x.f64(), m.y.f64());
        if y.abs() < tol {
            0
        } else if (x - w).abs() < tol {
            1
        } else if (y - hh).abs() < tol {
            2
        } else {
            3
        }
    })
}

fn parallelogram<T: Real>(
    spec: &DomainSpec,
    e1: [f64; 2],
    e2: [f64; 2],
    a: f64,
    b: f64,
    h: f64,
) -> Result<Mesh<T>> {
    let det = e1[0] * e2[1] - e1[1] * e2[0];
    too_coarse("parallelogram width", a.min(b) * det.abs(), h)?;
    let (ns, nt) = (cells(a, h), cells(b, h));
    let mut vertices = Vec::new();
    for j in 0..=nt {
        for i in 0..=ns {
            let s = T::of(a) * T::of_usize(i) / T::of_usize(ns);
            let t = T::of(b) * T::of_usize(j) / T::of_usize(nt);
            vertices.push(Point2::new(
                s * T::of(e1[0]) + t * T::of(e2[0]),
                s * T::of(e1[1]) + t * T::of(e2[1]),
            ));
        }
    }
    let id = |i: usize, j: usize| j * (ns + 1) + i;
    // Split along the shorter cell diagonal.
    let c = e1[0] * e2[0] + e1[1] * e2[1];
    let main_diag_short = c <= 0.0;
    let mut tris = Vec::new();
    for j in 0..nt {
        for i in 0..ns {
            let (p00, p10, p11, p01) = (id(i, j), id(i + 1, j), id(i + 1, j + 1), id(i, j + 1));
            let (t1, t2) = if c.abs() < 1e-15 || !main_diag_short {
                ([p00, p10, p11], [p00, p11, p01])
            } else {
                ([p00, p10, p01], [p10, p11, p01])
            };
            if det > 0.0 {
                tris.push(t1);
                tris.push(t2);
            } else {
                tris.push([t1[0], t1[2], t1[1]]);
                tris.push([t2[0], t2[2], t2[1]]);
            }
        }
    }
    let tol = 1e-9 * a.max(b);
    Mesh::from_triangles(vertices, tris, spec.clone(), move |p, q| {
        let m = p.midpoint(q);
        let (x, y) = (m.x.f64(), m.y.f64());
        // Solve m = s e1 + t e2.
        let s = (x * e2[1] - y * e2[0]) / det;
        let t = (e1[0] * y - e1[1] * x) / det;
        if t.abs() < tol {
            0
        } else if (s - a).abs() < tol {
            1
        } else if (t - b).abs() < tol {
            2
        } else {
            3
        }
    })
}

/// Point at perimeter fraction `t` of the regular polygon with circumradius `r`.
fn polygon_point<T: Real>(r: f64, sides: usize, t: f64) -> Point2<T> {
    let pos = t * sides as f64;
    let s = (pos.floor() as usize).min(sides - 1);
    let f = pos - s as f64;
    let corner = |k: usize| {
        let th = T::TAU() * T::of_usize(k % sides) / T::of_usize(sides);
        Point2::new(T::of(r) * th.cos(), T::of(r) * th.sin())
    };
    let (c0, c1) = (corner(s), corner(s + 1));
    let f = T::of(f);
    Point2::new(c0.x + f * (c1.x - c0.x), c0.y + f * (c1.y - c0.y))
}

fn ring<T: Real>(r: f64, sides: usize, n: usize, vertices: &mut Vec<Point2<T>>) -> (Vec<usize>, Vec<f64>) {
    let mut idx = Vec::with_capacity(n);
    let mut par = Vec::with_capacity(n);
    for k in 0..n {
        let t = k as f64 / n as f64;
        idx.push(vertices.len());
        par.push(t);
        vertices.push(polygon_point(r, sides, t));
    }
    (idx, par)
}

fn disk<T: Real>(spec: &DomainSpec, radius: f64, sides: usize, h: f64) -> Result<Mesh<T>> {
    too_coarse("disk radius", radius, h)?;
    let side = 2.0 * radius * (std::f64::consts::PI / sides as f64).sin();
    let n_out = sides * cells(side, h);
    let rings_n = cells(radius, h);
    let mut vertices = vec![Point2::new(T::zero(), T::zero())];
    let mut tris = Vec::new();
    let mut prev: Option<(Vec<usize>, Vec<f64>)> = None;
    for j in 1..=rings_n {
        let n = if j == rings_n {
            n_out
        } else {
            ((n_out as f64 * j as f64 / rings_n as f64).round() as usize).max(6)
        };
        let cur = ring(radius * j as f64 / rings_n as f64, sides, n, &mut vertices);
        match &prev {
            None => {
                for k in 0..n {
                    tris.push([0, cur.0[k], cur.0[(k + 1) % n]]);
                }
            }
            Some((pi, pt)) => zip(&cur.0, &cur.1, pi, pt, true, &mut tris),
        }
        prev = Some(cur);
    }
    Mesh::from_triangles(vertices, tris, spec.clone(), |_, _| 0)
}

fn annulus<T: Real>(spec: &DomainSpec, r_in: f64, r_out: f64, sides: usize, h: f64) -> Result<Mesh<T>> {
    too_coarse("annulus width", r_out - r_in, h)?;
    let side = |r: f64| 2.0 * r * (std::f64::consts::PI / sides as f64).sin();
    let n_in = sides * cells(side(r_in), h);
    let n_out = sides * cells(side(r_out), h);
    let rings_n = cells(r_out - r_in, h);
    let mut vertices = Vec::new();
    let mut tris = Vec::new();
    let mut prev = ring(r_in, sides, n_in, &mut vertices);
    for j in 1..=rings_n {
        let f = j as f64 / rings_n as f64;
        let n = if j == rings_n {
            n_out
        } else {
            (n_in as f64 + (n_out - n_in) as f64 * f).round() as usize
        };
        let cur = ring(r_in + (r_out - r_in) * f, sides, n, &mut vertices);
        zip(&cur.0, &cur.1, &prev.0, &prev.1, true, &mut tris);
        prev = cur;
    }
    let mid = 0.5 * (r_in + r_out);
    Mesh::from_triangles(vertices, tris, spec.clone(), move |p, q| {
        let m = p.midpoint(q);
        if m.x.f64().hypot(m.y.f64()) > mid {
            0
        } else {
            1
        }
    })
}

/// Rows of a tooth `{0 < y < a, |x - xc| < a^2 - a y}` above a given base
/// row. Returns triangles appended to `tris`.
pub(super) struct ToothRows {
    pub layers: usize,
    pub min_across: usize,
    pub h: f64,
}

impl ToothRows {
    pub(super) fn build<T: Real>(
        &self,
        xc: T,
        a: T,
        base: &[usize],
        vertices: &mut Vec<Point2<T>>,
        tris: &mut Vec<[usize; 3]>,
    ) {
        let af = a.f64();
        let left = xc - a * a;
        let mut prev: Vec<usize> = base.to_vec();
        let mut prev_t: Vec<f64> = base
            .iter()
            .map(|&v| ((vertices[v].x - left) / (T::of(2.0) * a * a)).f64())
            .collect();
        for j in 1..=self.layers {
            let frac = j as f64 / self.layers as f64;
            let y = a * T::of(frac);
            let (idx, par) = if j == self.layers {
                vertices.push(Point2::new(xc, a));
                (vec![vertices.len() - 1], vec![0.5])
            } else {
                let w = a * a * T::of(1.0 - frac);
                let width = 2.0 * af * af * (1.0 - frac);
                let n = ((width / self.h).ceil() as usize).max(self.min_across);
                let mut idx = Vec::with_capacity(n + 1);
                let mut par = Vec::with_capacity(n + 1);
                for k in 0..=n {
                    let s = k as f64 / n as f64;
                    idx.push(vertices.len());
                    par.push(s);
                    vertices.push(Point2::new(xc + w * T::of(2.0 * s - 1.0), y));
                }
                (idx, par)
            };
            zip(&prev, &prev_t, &idx, &par, false, tris);
            prev = idx;
            prev_t = par;
        }
    }
}

fn tooth<T: Real>(spec: &DomainSpec, a: f64, h: f64) -> Result<Mesh<T>> {
    too_coarse("tooth height", a, h)?;
    let n0 = cells(2.0 * a * a, h).max(4);
    let at = T::of(a);
    let mut vertices = Vec::new();
    let mut base = Vec::new();
    for k in 0..=n0 {
        base.push(vertices.len());
        let s = T::of_usize(k) / T::of_usize(n0);
        vertices.push(Point2::new(at * at * (T::of(2.0) * s - T::one()), T::zero()));
    }
    let mut tris = Vec::new();
    ToothRows {
        layers: cells(a, h).max(2),
        min_across: 2,
        h,
    }
    .build(T::zero(), at, &base, &mut vertices, &mut tris);
    Mesh::from_triangles(vertices, tris, spec.clone(), |p, q| {
        let m = p.midpoint(q);
        if p.y == T::zero() && q.y == T::zero() {
            0
        } else if m.x < T::zero() {
            1
        } else {
            2
        }
    })
}

fn comb<T: Real>(spec: &DomainSpec, teeth: usize, h: f64) -> Result<Mesh<T>> {
    too_coarse("comb box height", 1.0, h)?;
    let cb = CombBox::new(teeth, h);
    let (mut vertices, mut tris) = cb.triangulate::<T>();
    let layers_min = ((0.25 / h).ceil() as usize).max(4);
    for n in 1..=teeth {
        let base = cb.tooth_base(n);
        let a = T::dyadic(1, -2 * n as i32);
        let xc = T::dyadic(1, -(n as i32));
        ToothRows {
            layers: cells(super::comb_height(n), h).max(layers_min),
            min_across: 2,
            h,
        }
        .build(xc, a, &base, &mut vertices, &mut tris);
    }
    Mesh::from_triangles(vertices, tris, spec.clone(), |p, q| {
        if p.y <= T::zero() && q.y <= T::zero() {
            0
        } else {
            let m = p.midpoint(q);
            (-m.x.f64().log2()).round() as u32
        }
    })
}

fn cusp<T: Real>(spec: &DomainSpec, eps: f64, h: f64) -> Result<Mesh<T>> {
    too_coarse("cusp length", 1.0 - eps, h)?;
    let ncol = ((1.0 / eps).ln() / (1.0 + h).ln()).ceil().max(1.0) as usize;
    let ratio = (1.0 / eps).powf(1.0 / ncol as f64);
    let mut vertices = Vec::new();
    let mut tris = Vec::new();
    let mut prev: Option<(Vec<usize>, Vec<f64>)> = None;
    for i in 0..=ncol {
        let x = if i == ncol { 1.0 } else { eps * ratio.powi(i as i32) };
        let local = h.min(x * (ratio - 1.0));
        let m = ((2.0 * x.powi(4) / local).ceil() as usize).max(2);
        let xt = T::of(x);
        let half = xt.powi(4);
        let mut idx = Vec::with_capacity(m + 1);
        let mut par = Vec::with_capacity(m + 1);
        for k in 0..=m {
            let s = k as f64 / m as f64;
            idx.push(vertices.len());
            par.push(s);
            vertices.push(Point2::new(xt, half * T::of(2.0 * s - 1.0)));
        }
        if let Some((pi, pt)) = &prev {
            zip(&idx, &par, pi, pt, false, &mut tris);
        }
        prev = Some((idx, par));
    }
    let (x0, x1) = (T::of(eps), T::one());
    Mesh::from_triangles(vertices, tris, spec.clone(), move |p, q| {
        if p.x == x0 && q.x == x0 {
            2
        } else if p.x == x1 && q.x == x1 {
            3
        } else if p.y + q.y > T::zero() {
            0
        } else {
            1
        }
    })
}

#[cfg(test)]
mod tests {
    use super::super::{comb_height, BoundarySelector};
    use super::*;

    fn rel(a: f64, b: f64) -> f64 {
        (a - b).abs() / b.abs()
    }

    fn all_specs() -> Vec<(DomainSpec, f64)> {
        vec![
            (DomainSpec::unit_square(), 0.125),
            (
                DomainSpec::Rectangle {
                    width: 2.0,
                    height: 0.5,
                },
                0.1,
            ),
            (
                DomainSpec::PolygonalDisk {
                    radius: 1.0,
                    sides: 32,
                },
                0.15,
            ),
            (
                DomainSpec::PolygonalAnnulus {
                    r_inner: 0.5,
                    r_outer: 1.0,
                    sides: 64,
                },
                0.1,
            ),
            (
                DomainSpec::Parallelogram {
                    e1: [1.0, 0.0],
                    e2: [0.9, (1.0f64 - 0.81).sqrt()],
                    a: 1.0,
                    b: 0.5,
                },
                0.1,
            ),
            (DomainSpec::Tooth { a: 1.0 }, 0.1),
            (DomainSpec::Tooth { a: 0.25 }, 0.05),
            (DomainSpec::Comb { teeth: 3 }, 0.125),
            (DomainSpec::Cusp { eps: 0.1 }, 0.1),
        ]
    }

    #[test]
    fn every_template_is_valid_and_area_exact() {
        for (spec, h) in all_specs() {
            let m: Mesh<f64> = build_domain(&spec, h).unwrap();
            m.validate().unwrap();
            let exact = spec.area().unwrap();
            if spec.straight_edged() {
                assert!(rel(m.area(), exact) < 1e-10, "{spec}: {} vs {exact}", m.area());
            }
            assert_eq!(m.connected_components(), 1, "{spec}");
        }
    }

    #[test]
    fn refine_preserves_invariants() {
        for (spec, h) in all_specs() {
            let m: Mesh<f64> = build_domain(&spec, h).unwrap();
            let r = m.refine().unwrap();
            r.validate().unwrap();
            assert_eq!(r.component_tags(), m.component_tags());
            assert_eq!(r.segment_tags(), m.segment_tags());
            assert!(rel(r.area(), m.area()) < 1e-12, "{spec}");
            if spec.straight_edged() {
                assert!(rel(r.h, m.h / 2.0) < 1e-12, "{spec}");
            }
        }
    }

    #[test]
    fn deterministic_construction() {
        for (spec, h) in all_specs() {
            let a: Mesh<f64> = build_domain(&spec, h).unwrap();
            let b: Mesh<f64> = build_domain(&spec, h).unwrap();
            assert_eq!(a.checksum(), b.checksum());
            assert_eq!(a, b);
        }
    }

    #[test]
    fn annulus_has_two_components_outer_first() {
        let spec = DomainSpec::PolygonalAnnulus {
            r_inner: 0.5,
            r_outer: 1.0,
            sides: 64,
        };
        for h in [0.3, 0.1] {
            let m: Mesh<f64> = build_domain(&spec, h).unwrap();
            assert_eq!(m.component_tags(), vec![0, 1]);
            let outer = m.boundary_length(&BoundarySelector::Component(0)).unwrap();
            let inner = m.boundary_length(&BoundarySelector::Component(1)).unwrap();
            assert!(outer > inner);
            assert!(rel(outer, 2.0 * inner) < 1e-12);
        }
    }

    #[test]
    fn tooth_vertices_and_lengths() {
        let m: Mesh<f64> = build_domain(&DomainSpec::Tooth { a: 1.0 }, 0.2).unwrap();
        for (x, y) in [(-1.0, 0.0), (1.0, 0.0), (0.0, 1.0)] {
            assert!(m.boundary_vertices().iter().any(|&v| m.vertices[v] == Point2::new(x, y)));
        }
        for a in [1.0, 0.5, 0.25] {
            let m: Mesh<f64> = build_domain(&DomainSpec::Tooth { a }, a / 8.0).unwrap();
            let slant = m.boundary_length(&BoundarySelector::Segments(vec![1, 2])).unwrap();
            let base = m.boundary_length(&BoundarySelector::Segment(0)).unwrap();
            assert!(rel(slant, 2.0 * a * (1.0 + a * a).sqrt()) < 1e-12);
            assert!(rel(base, 2.0 * a * a) < 1e-12);
            // at least four triangles touch the base
            let on_base = m
                .triangles
                .iter()
                .filter(|t| t.iter().filter(|&&v| m.vertices[v].y == 0.0).count() >= 2)
                .count();
            assert!(on_base >= 4);
        }
    }

    #[test]
    fn comb_geometry() {
        for teeth in [1usize, 2, 4] {
            let spec = DomainSpec::Comb { teeth };
            let m: Mesh<f64> = build_domain(&spec, 0.125).unwrap();
            assert_eq!(m.component_tags(), vec![0], "comb boundary is one loop");
            let total = m.boundary_length(&BoundarySelector::All).unwrap();
            // Independent sum: box perimeter minus tooth bases plus slants.
            let mut expect = 6.0;
            for n in 1..=teeth {
                let a = comb_height(n);
                expect += 2.0 * a * (1.0 + a * a).sqrt() - 2.0 * a * a;
            }
            assert!(rel(total, expect) < 1e-12, "{total} vs {expect}");
            for n in 1..=teeth {
                let base_tris = m
                    .triangles
                    .iter()
                    .filter(|t| {
                        t.iter()
                            .filter(|&&v| {
                                let p = m.vertices[v];
                                p.y == 0.0 && (p.x - 0.5f64.powi(n as i32)).abs() <= comb_height(n).powi(2)
                            })
                            .count()
                            >= 2
                    })
                    .count();
                assert!(base_tris >= 8, "tooth {n}: {base_tris} triangles on base");
            }
        }
    }

    #[test]
    fn comb_boundary_length_monotone_and_bounded() {
        let mut prev = 0.0;
        for teeth in 1..=6 {
            let m: Mesh<f64> = build_domain(&DomainSpec::Comb { teeth }, 0.25).unwrap();
            let len = m.boundary_length(&BoundarySelector::All).unwrap();
            assert!(len > prev);
            assert!(len < 6.0 + 2.0 * (1.0 / 3.0) * 1.1);
            prev = len;
        }
    }

    #[test]
    fn cusp_area_within_chord_bound() {
        for eps in [0.2, 0.1, 0.05] {
            let m: Mesh<f64> = build_domain(&DomainSpec::Cusp { eps }, 0.05).unwrap();
            // Trapezoid error of the chords: sum over columns of dx^3 * max|f''| / 12, both curves.
            let mut xs: Vec<f64> = m.vertices.iter().map(|p| p.x).collect();
            xs.sort_by(f64::total_cmp);
            xs.dedup();
            let bound: f64 = xs
                .windows(2)
                .map(|w| 2.0 * (w[1] - w[0]).powi(3) * 12.0 * w[1] * w[1] / 12.0)
                .sum();
            let exact = DomainSpec::Cusp { eps }.area().unwrap();
            assert!((m.area() - exact).abs() <= bound, "eps {eps}");
            assert!(m.area() > exact, "chords lie outside the convex curve x^4");
        }
    }

    #[test]
    fn disk_area_and_resolution_error() {
        let spec = DomainSpec::PolygonalDisk {
            radius: 1.0,
            sides: 256,
        };
        let m: Mesh<f64> = build_domain(&spec, 0.05).unwrap();
        assert!(rel(m.area(), spec.area().unwrap()) < 1e-10);
        assert!(m.h < 0.05 * 1.5);
        assert!(matches!(
            build_domain::<f64>(&spec, 2.0),
            Err(Error::Resolution { .. })
        ));
    }

    #[test]
    fn double_double_comb_is_exact() {
        let m: Mesh<twofloat::TwoFloat> = build_domain(&DomainSpec::Comb { teeth: 12 }, 0.25).unwrap();
        m.validate().unwrap();
        let area = m.area();
        let exact = 2.0 + (1..=12).map(|n| comb_height(n).powi(3)).sum::<f64>();
        assert!((area.f64() - exact).abs() < 1e-15);
    }
}
