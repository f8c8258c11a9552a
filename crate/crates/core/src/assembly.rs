//! Exact P1 element integrals assembled into symmetric sparse matrices:
//! Dirichlet form, domain mass, boundary mass and the Robin combination.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::linalg::{CooBuilder, SparseSym};
use crate::mesh::{orient2, BoundarySelector, Mesh};
use crate::scalar::Real;

const CHUNK: usize = 4096;

fn assemble<T: Real>(
    mesh: &Mesh<T>,
    element: impl Fn(usize, [usize; 3]) -> Result<[[T; 3]; 3]> + Sync,
) -> Result<SparseSym<T>> {
    let n = mesh.num_vertices();
    let parts: Vec<Result<CooBuilder<T>>> = mesh
        .triangles
        .par_chunks(CHUNK)
        .enumerate()
        .map(|(c, tris)| {
            let mut b = CooBuilder::new(n);
            for (k, t) in tris.iter().enumerate() {
                b.add_block(*t, element(c * CHUNK + k, *t)?);
            }
            Ok(b)
        })
        .collect();
    let mut all = CooBuilder::new(n);
    for p in parts {
        all.append(p?);
    }
    Ok(all.build())
}

fn signed_area2<T: Real>(mesh: &Mesh<T>, op: &'static str, k: usize, t: [usize; 3]) -> Result<T> {
    let v = &mesh.vertices;
    let a2 = orient2(&v[t[0]], &v[t[1]], &v[t[2]]);
    if !(a2 > T::zero()) || !a2.is_finite() {
        return Err(Error::DegenerateTriangle {
            op,
            triangle: k,
            area: a2.f64() / 2.0,
        });
    }
    Ok(a2)
}

/// Element stiffness of a P1 triangle: `K_ab = (e_a · e_b) / (4|T|)` with
/// `e_a` the edge opposite vertex `a`. Diagonals are minus the off-diagonal
/// row sums so constants are annihilated exactly.
pub fn element_stiffness<T: Real>(p: [crate::mesh::Point2<T>; 3], area2: T) -> [[T; 3]; 3] {
    let e = |a: usize| {
        let (b, c) = ((a + 1) % 3, (a + 2) % 3);
        (p[c].x - p[b].x, p[c].y - p[b].y)
    };
    let es = [e(0), e(1), e(2)];
    let den = T::of(2.0) * area2;
    let mut k = [[T::zero(); 3]; 3];
    for a in 0..3 {
        for b in a + 1..3 {
            let v = (es[a].0 * es[b].0 + es[a].1 * es[b].1) / den;
            k[a][b] = v;
            k[b][a] = v;
        }
    }
    for a in 0..3 {
        let (b, c) = ((a + 1) % 3, (a + 2) % 3);
        k[a][a] = -(k[a][b] + k[a][c]);
    }
    k
}

/// Stiffness matrix of `∫ ∇u·∇v`.
pub fn stiffness<T: Real>(mesh: &Mesh<T>) -> Result<SparseSym<T>> {
    assemble(mesh, |k, t| {
        let a2 = signed_area2(mesh, "assembly.stiffness", k, t)?;
        let v = &mesh.vertices;
        Ok(element_stiffness([v[t[0]], v[t[1]], v[t[2]]], a2))
    })
}

/// Consistent mass matrix of `∫ u v`.
pub fn mass<T: Real>(mesh: &Mesh<T>) -> Result<SparseSym<T>> {
    assemble(mesh, |k, t| {
        let a2 = signed_area2(mesh, "assembly.mass", k, t)?;
        let off = a2 / T::of(24.0);
        let d = off + off;
        Ok([[d, off, off], [off, d, off], [off, off, d]])
    })
}

/// Gram matrices of `∫_Γ u v dσ` over the selected boundary edges.
#[derive(Clone, Debug)]
pub struct BoundaryMass<T> {
    /// Edgewise `ℓ/6 [2 1; 1 2]` blocks; full-size, zero off the boundary.
    pub consistent: SparseSym<T>,
    /// Half the incident selected edge lengths per vertex; zero elsewhere.
    pub lumped: Vec<T>,
    /// Vertices touched by a selected edge, ascending.
    pub support: Vec<usize>,
    pub total: T,
    pub selector: BoundarySelector,
}

impl<T: Real> BoundaryMass<T> {
    /// Consistent block restricted to the support (support order).
    pub fn block(&self) -> crate::linalg::Mat<T> {
        self.consistent.dense_block(&self.support, &self.support)
    }
}

pub fn boundary_mass<T: Real>(mesh: &Mesh<T>, selector: &BoundarySelector) -> Result<BoundaryMass<T>> {
    mesh.check_selector(selector, "assembly.boundary_mass")?;
    let n = mesh.num_vertices();
    let mut b = CooBuilder::new(n);
    let mut lumped = vec![T::zero(); n];
    let mut total = T::zero();
    for (i, e) in mesh.boundary_edges.iter().enumerate() {
        if !selector.matches(e) {
            continue;
        }
        let len = mesh.edge_length(i);
        let off = len / T::of(6.0);
        let d = off + off;
        b.add_block(e.v, [[d, off], [off, d]]);
        let half = len / T::of(2.0);
        lumped[e.v[0]] += half;
        lumped[e.v[1]] += half;
        total += len;
    }
    let support = (0..n).filter(|&i| lumped[i] > T::zero()).collect();
    Ok(BoundaryMass {
        consistent: b.build(),
        lumped,
        support,
        total,
        selector: selector.clone(),
    })
}

/// `K - β B` for the whole boundary.
pub fn robin_form<T: Real>(mesh: &Mesh<T>, beta: T) -> Result<SparseSym<T>> {
    let k = stiffness(mesh)?;
    let b = boundary_mass(mesh, &BoundarySelector::All)?;
    Ok(k.combine(T::one(), &b.consistent, -beta))
}

/// Stiffness, mass and full boundary mass of one mesh.
#[derive(Clone, Debug)]
pub struct Forms<T> {
    pub k: SparseSym<T>,
    pub m: SparseSym<T>,
    pub b: BoundaryMass<T>,
}

impl<T: Real> Forms<T> {
    pub fn new(mesh: &Mesh<T>) -> Result<Self> {
        Ok(Forms {
            k: stiffness(mesh)?,
            m: mass(mesh)?,
            b: boundary_mass(mesh, &BoundarySelector::All)?,
        })
    }
}

/// Nodal interpolant of `f`.
pub fn interpolate<T: Real>(mesh: &Mesh<T>, f: impl Fn(T, T) -> T) -> Vec<T> {
    mesh.vertices.iter().map(|p| f(p.x, p.y)).collect()
}
