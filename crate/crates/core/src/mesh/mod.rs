//! Triangulations of the planar domains used throughout the crate.
//!
//! Meshes are built from parametric templates (see [`build_domain`]) and are
//! immutable once constructed. Boundary edges carry two tags: a component
//! tag identifying the closed boundary loop (longest loop first) and a
//! segment tag naming the geometric piece (tooth side, cusp curve, ...).

mod build;
mod domain;
pub mod io;
mod quadtree;

use std::collections::{BTreeMap, HashMap};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::Real;

pub use build::build_domain;
pub use domain::{bundled, comb_height, Bundled, DomainSpec};

#[derive(Clone, Copy, Debug, PartialEq, Default)]
pub struct Point2<T> {
    pub x: T,
    pub y: T,
}

impl<T: Real> Point2<T> {
    pub fn new(x: T, y: T) -> Self {
        Self { x, y }
    }

    pub fn dist(&self, o: &Self) -> T {
        (self.x - o.x).hypot(self.y - o.y)
    }

    pub fn midpoint(&self, o: &Self) -> Self {
        let half = T::of(0.5);
        Self::new((self.x + o.x) * half, (self.y + o.y) * half)
    }
}

/// Twice the signed area of the triangle `(a, b, c)`.
pub fn orient2<T: Real>(a: &Point2<T>, b: &Point2<T>, c: &Point2<T>) -> T {
    (b.x - a.x) * (c.y - a.y) - (b.y - a.y) * (c.x - a.x)
}

/// Boundary edge `v[0] -> v[1]`, oriented with the domain on the left.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct BoundaryEdge {
    pub v: [usize; 2],
    pub component: u32,
    pub segment: u32,
}

/// Which boundary edges an integral runs over.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum BoundarySelector {
    All,
    Component(u32),
    Segment(u32),
    Segments(Vec<u32>),
}

impl BoundarySelector {
    pub fn matches(&self, e: &BoundaryEdge) -> bool {
        match self {
            BoundarySelector::All => true,
            BoundarySelector::Component(c) => e.component == *c,
            BoundarySelector::Segment(s) => e.segment == *s,
            BoundarySelector::Segments(s) => s.contains(&e.segment),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Mesh<T> {
    pub vertices: Vec<Point2<T>>,
    /// Counter-clockwise vertex triples.
    pub triangles: Vec<[usize; 3]>,
    pub boundary_edges: Vec<BoundaryEdge>,
    pub domain: DomainSpec,
    /// Longest edge.
    pub h: T,
}

impl<T: Real> Mesh<T> {
    /// Assemble a mesh from raw triangles. Boundary edges are the edges
    /// used by exactly one triangle; `segment_of` classifies each by its
    /// endpoints. Component tags are assigned by decreasing loop length.
    pub fn from_triangles(
        vertices: Vec<Point2<T>>,
        triangles: Vec<[usize; 3]>,
        domain: DomainSpec,
        segment_of: impl Fn(&Point2<T>, &Point2<T>) -> u32,
    ) -> Result<Self> {
        let mut count: HashMap<(usize, usize), (usize, [usize; 2])> = HashMap::new();
        for t in &triangles {
            for k in 0..3 {
                let (a, b) = (t[k], t[(k + 1) % 3]);
                let key = (a.min(b), a.max(b));
                count.entry(key).or_insert((0, [a, b])).0 += 1;
            }
        }
        let mut edges: Vec<[usize; 2]> = count
            .into_values()
            .filter(|(c, _)| *c == 1)
            .map(|(_, e)| e)
            .collect();
        edges.sort_unstable();
        let boundary_edges = edges
            .into_iter()
            .map(|v| BoundaryEdge {
                v,
                component: 0,
                segment: segment_of(&vertices[v[0]], &vertices[v[1]]),
            })
            .collect();
        let mut mesh = Mesh {
            vertices,
            triangles,
            boundary_edges,
            domain,
            h: T::zero(),
        };
        mesh.assign_components()?;
        mesh.h = mesh.max_edge();
        mesh.validate()?;
        Ok(mesh)
    }

    fn max_edge(&self) -> T {
        let mut h = T::zero();
        for t in &self.triangles {
            for k in 0..3 {
                h = h.max(self.vertices[t[k]].dist(&self.vertices[t[(k + 1) % 3]]));
            }
        }
        h
    }

    /// Boundary loops as ordered edge-index lists.
    fn loops(&self) -> Result<Vec<Vec<usize>>> {
        let mut out_edge: HashMap<usize, usize> = HashMap::new();
        for (i, e) in self.boundary_edges.iter().enumerate() {
            if out_edge.insert(e.v[0], i).is_some() {
                return Err(Error::InvalidMesh(format!(
                    "boundary vertex {} has two outgoing boundary edges",
                    e.v[0]
                )));
            }
        }
        let mut seen = vec![false; self.boundary_edges.len()];
        let mut loops = Vec::new();
        for start in 0..self.boundary_edges.len() {
            if seen[start] {
                continue;
            }
            let mut lp = Vec::new();
            let mut cur = start;
            loop {
                if seen[cur] {
                    if cur != start {
                        return Err(Error::InvalidMesh("boundary loop is not closed".into()));
                    }
                    break;
                }
                seen[cur] = true;
                lp.push(cur);
                let next_v = self.boundary_edges[cur].v[1];
                cur = *out_edge.get(&next_v).ok_or_else(|| {
                    Error::InvalidMesh(format!("boundary loop breaks at vertex {next_v}"))
                })?;
            }
            loops.push(lp);
        }
        Ok(loops)
    }

    fn assign_components(&mut self) -> Result<()> {
        let loops = self.loops()?;
        let mut with_len: Vec<(f64, usize, Vec<usize>)> = loops
            .into_iter()
            .map(|lp| {
                let len = lp
                    .iter()
                    .map(|&i| self.edge_length(i).f64())
                    .sum::<f64>();
                let first = lp.iter().copied().min().unwrap_or(0);
                (len, first, lp)
            })
            .collect();
        with_len.sort_by(|a, b| b.0.total_cmp(&a.0).then(a.1.cmp(&b.1)));
        for (tag, (_, _, lp)) in with_len.into_iter().enumerate() {
            for i in lp {
                self.boundary_edges[i].component = tag as u32;
            }
        }
        Ok(())
    }

    pub fn edge_length(&self, i: usize) -> T {
        let e = &self.boundary_edges[i];
        self.vertices[e.v[0]].dist(&self.vertices[e.v[1]])
    }

    /// Check every structural invariant.
    pub fn validate(&self) -> Result<()> {
        let n = self.vertices.len();
        for (i, p) in self.vertices.iter().enumerate() {
            if !(p.x.is_finite() && p.y.is_finite()) {
                return Err(Error::InvalidMesh(format!("vertex {i} is not finite")));
            }
        }
        let mut edge_use: HashMap<(usize, usize), (u8, [usize; 2])> = HashMap::new();
        for (ti, t) in self.triangles.iter().enumerate() {
            if t.iter().any(|&v| v >= n) || t[0] == t[1] || t[1] == t[2] || t[0] == t[2] {
                return Err(Error::InvalidMesh(format!("triangle {ti} has invalid vertices {t:?}")));
            }
            let area = orient2(&self.vertices[t[0]], &self.vertices[t[1]], &self.vertices[t[2]]);
            if !(area > T::zero()) {
                return Err(Error::InvalidMesh(format!(
                    "triangle {ti} is not counter-clockwise (2*area = {:e})",
                    area.f64()
                )));
            }
            for k in 0..3 {
                let (a, b) = (t[k], t[(k + 1) % 3]);
                let entry = edge_use.entry((a.min(b), a.max(b))).or_insert((0, [a, b]));
                entry.0 += 1;
                if entry.0 > 2 {
                    return Err(Error::InvalidMesh(format!("edge ({a},{b}) shared by three triangles")));
                }
            }
        }
        let mut boundary: HashMap<(usize, usize), [usize; 2]> = HashMap::new();
        for e in &self.boundary_edges {
            let [a, b] = e.v;
            if boundary.insert((a.min(b), a.max(b)), e.v).is_some() {
                return Err(Error::InvalidMesh(format!("duplicate boundary edge ({a},{b})")));
            }
        }
        for (key, (count, oriented)) in &edge_use {
            match (count, boundary.get(key)) {
                (1, Some(v)) if v == oriented => {}
                (1, Some(_)) => {
                    return Err(Error::InvalidMesh(format!(
                        "boundary edge {key:?} is oriented against its triangle"
                    )))
                }
                (1, None) => {
                    return Err(Error::InvalidMesh(format!("edge {key:?} has one triangle but is untagged")))
                }
                (2, Some(_)) => {
                    return Err(Error::InvalidMesh(format!("interior edge {key:?} tagged as boundary")))
                }
                _ => {}
            }
        }
        if boundary.len() != self.boundary_edges.len()
            || self.boundary_edges.iter().any(|e| {
                let k = (e.v[0].min(e.v[1]), e.v[0].max(e.v[1]));
                !edge_use.contains_key(&k)
            })
        {
            return Err(Error::InvalidMesh("boundary edge not in any triangle".into()));
        }
        for lp in self.loops()? {
            let c = self.boundary_edges[lp[0]].component;
            if lp.iter().any(|&i| self.boundary_edges[i].component != c) {
                return Err(Error::InvalidMesh("component tag changes along a loop".into()));
            }
        }
        Ok(())
    }

    pub fn num_vertices(&self) -> usize {
        self.vertices.len()
    }

    pub fn area(&self) -> T {
        let half = T::of(0.5);
        let mut a = T::zero();
        for t in &self.triangles {
            a += half * orient2(&self.vertices[t[0]], &self.vertices[t[1]], &self.vertices[t[2]]);
        }
        a
    }

    pub fn component_tags(&self) -> Vec<u32> {
        let mut tags: Vec<u32> = self.boundary_edges.iter().map(|e| e.component).collect();
        tags.sort_unstable();
        tags.dedup();
        tags
    }

    pub fn segment_tags(&self) -> Vec<u32> {
        let mut tags: Vec<u32> = self.boundary_edges.iter().map(|e| e.segment).collect();
        tags.sort_unstable();
        tags.dedup();
        tags
    }

    /// Fail with a tag error when the selector names no existing tag.
    pub fn check_selector(&self, sel: &BoundarySelector, op: &'static str) -> Result<()> {
        let missing = match sel {
            BoundarySelector::All => None,
            BoundarySelector::Component(c) => (!self.component_tags().contains(c)).then_some(*c),
            BoundarySelector::Segment(s) => (!self.segment_tags().contains(s)).then_some(*s),
            BoundarySelector::Segments(ss) => {
                let tags = self.segment_tags();
                ss.iter().copied().find(|s| !tags.contains(s))
            }
        };
        match missing {
            Some(tag) => Err(Error::Tag { op, tag }),
            None => Ok(()),
        }
    }

    pub fn boundary_length(&self, sel: &BoundarySelector) -> Result<T> {
        self.check_selector(sel, "mesh.boundary_length")?;
        let mut len = T::zero();
        for (i, e) in self.boundary_edges.iter().enumerate() {
            if sel.matches(e) {
                len += self.edge_length(i);
            }
        }
        Ok(len)
    }

    /// Sorted indices of all vertices on the boundary.
    pub fn boundary_vertices(&self) -> Vec<usize> {
        let mut v: Vec<usize> = self.boundary_edges.iter().flat_map(|e| e.v).collect();
        v.sort_unstable();
        v.dedup();
        v
    }

    /// Vertices touched by selected boundary edges.
    pub fn selected_vertices(&self, sel: &BoundarySelector) -> Vec<usize> {
        let mut v: Vec<usize> = self
            .boundary_edges
            .iter()
            .filter(|e| sel.matches(e))
            .flat_map(|e| e.v)
            .collect();
        v.sort_unstable();
        v.dedup();
        v
    }

    /// Number of connected components of the vertex graph.
    pub fn connected_components(&self) -> usize {
        let n = self.vertices.len();
        let mut parent: Vec<usize> = (0..n).collect();
        fn find(p: &mut [usize], mut i: usize) -> usize {
            while p[i] != i {
                p[i] = p[p[i]];
                i = p[i];
            }
            i
        }
        for t in &self.triangles {
            for k in 0..2 {
                let (a, b) = (find(&mut parent, t[k]), find(&mut parent, t[k + 1]));
                if a != b {
                    parent[a] = b;
                }
            }
        }
        let used: Vec<bool> = {
            let mut u = vec![false; n];
            for t in &self.triangles {
                for &v in t {
                    u[v] = true;
                }
            }
            u
        };
        (0..n)
            .filter(|&i| used[i] && find(&mut parent, i) == i)
            .count()
    }

    /// Split every triangle into four through its edge midpoints.
    pub fn refine(&self) -> Result<Self> {
        let mut vertices = self.vertices.clone();
        let mut mids: HashMap<(usize, usize), usize> = HashMap::new();
        let mut mid = |a: usize, b: usize, vertices: &mut Vec<Point2<T>>| -> usize {
            *mids.entry((a.min(b), a.max(b))).or_insert_with(|| {
                vertices.push(vertices[a].midpoint(&vertices[b]));
                vertices.len() - 1
            })
        };
        let mut triangles = Vec::with_capacity(4 * self.triangles.len());
        for &[a, b, c] in &self.triangles {
            let ab = mid(a, b, &mut vertices);
            let bc = mid(b, c, &mut vertices);
            let ca = mid(c, a, &mut vertices);
            triangles.push([a, ab, ca]);
            triangles.push([ab, b, bc]);
            triangles.push([ca, bc, c]);
            triangles.push([ab, bc, ca]);
        }
        let mut boundary_edges = Vec::with_capacity(2 * self.boundary_edges.len());
        for e in &self.boundary_edges {
            let m = mid(e.v[0], e.v[1], &mut vertices);
            boundary_edges.push(BoundaryEdge { v: [e.v[0], m], ..*e });
            boundary_edges.push(BoundaryEdge { v: [m, e.v[1]], ..*e });
        }
        let mut mesh = Mesh {
            vertices,
            triangles,
            boundary_edges,
            domain: self.domain.clone(),
            h: T::zero(),
        };
        mesh.h = mesh.max_edge();
        mesh.validate()?;
        Ok(mesh)
    }

    /// `levels` successive midpoint refinements, including `self` as level 0.
    pub fn refinements(&self, levels: usize) -> Result<Vec<Self>> {
        let mut out = vec![self.clone()];
        for _ in 1..levels {
            let next = out.last().expect("non-empty").refine()?;
            out.push(next);
        }
        Ok(out)
    }

    pub fn translated(&self, dx: T, dy: T) -> Self {
        let mut m = self.clone();
        for p in &mut m.vertices {
            p.x += dx;
            p.y += dy;
        }
        m
    }

    /// Scale about the origin by `s > 0`.
    pub fn scaled(&self, s: T) -> Self {
        let mut m = self.clone();
        for p in &mut m.vertices {
            p.x *= s;
            p.y *= s;
        }
        m.h *= s;
        m.domain = DomainSpec::Imported;
        m
    }

    /// Convert coordinates to another scalar type.
    pub fn cast<U: Real>(&self) -> Mesh<U> {
        let conv = |v: T| U::from_f64(v.f64()).expect("finite");
        Mesh {
            vertices: self
                .vertices
                .iter()
                .map(|p| Point2::new(conv(p.x), conv(p.y)))
                .collect(),
            triangles: self.triangles.clone(),
            boundary_edges: self.boundary_edges.clone(),
            domain: self.domain.clone(),
            h: conv(self.h),
        }
    }

    /// Number of boundary edges per segment tag.
    pub fn segment_histogram(&self) -> BTreeMap<u32, usize> {
        let mut m = BTreeMap::new();
        for e in &self.boundary_edges {
            *m.entry(e.segment).or_insert(0) += 1;
        }
        m
    }

    /// FNV-1a checksum over the `f64` images of coordinates and connectivity.
    pub fn checksum(&self) -> u64 {
        let mut h: u64 = 0xcbf29ce484222325;
        let mut eat = |x: u64| {
            for b in x.to_le_bytes() {
                h ^= b as u64;
                h = h.wrapping_mul(0x100000001b3);
            }
        };
        for p in &self.vertices {
            eat(p.x.f64().to_bits());
            eat(p.y.f64().to_bits());
        }
        for t in &self.triangles {
            t.iter().for_each(|&v| eat(v as u64));
        }
        for e in &self.boundary_edges {
            eat(e.v[0] as u64);
            eat(e.v[1] as u64);
            eat(((e.component as u64) << 32) | e.segment as u64);
        }
        h
    }
}
