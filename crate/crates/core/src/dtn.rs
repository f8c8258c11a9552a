//! The Dirichlet-to-Neumann operator as the boundary Schur complement of the
//! stiffness matrix, harmonic extension, and the weak normal derivative.

use std::io::Write;

use crate::assembly::BoundaryMass;
use crate::error::{Error, Result};
use crate::linalg::{Condensed, Mat, SparseCholesky, SparseSym};
use crate::mesh::Mesh;
use crate::scalar::{norm_inf, Real};

/// Values at the boundary vertices of a mesh, in ascending vertex order
/// (the order of `DtnOperator::boundary`).
pub type BoundaryField<T> = Vec<T>;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum DtnMode {
    /// Form the dense Schur complement.
    Dense,
    /// Keep only the interior factorization; `S` is applied by solves.
    ApplyOnly,
}

/// `S = K_ΓΓ - K_ΓI K_II^{-1} K_IΓ` together with the boundary mass.
#[derive(Clone, Debug)]
pub struct DtnOperator<T> {
    pub boundary: Vec<usize>,
    pub interior: Vec<usize>,
    /// Present in dense mode.
    pub schur: Option<Mat<T>>,
    pub bmass: BoundaryMass<T>,
    /// Consistent boundary mass restricted to `boundary`.
    pub b_block: SparseSym<T>,
    k: SparseSym<T>,
    k_ii: Option<SparseCholesky<T>>,
    b_factor: SparseCholesky<T>,
}

fn check_boundary<T: Real>(mesh: &Mesh<T>, b: &BoundaryMass<T>) -> Result<Vec<usize>> {
    let boundary = mesh.boundary_vertices();
    if b.support != boundary {
        return Err(Error::Precondition {
            op: "dtn_core.build_dtn",
            detail: "boundary mass must cover the whole boundary".into(),
        });
    }
    Ok(boundary)
}

fn complement(n: usize, keep: &[usize]) -> Vec<usize> {
    let mut mark = vec![false; n];
    for &i in keep {
        mark[i] = true;
    }
    (0..n).filter(|&i| !mark[i]).collect()
}

pub fn build_dtn<T: Real>(mesh: &Mesh<T>, k: &SparseSym<T>, b: &BoundaryMass<T>) -> Result<DtnOperator<T>> {
    build_dtn_with(mesh, k, b, DtnMode::Dense)
}

pub fn build_dtn_with<T: Real>(
    mesh: &Mesh<T>,
    k: &SparseSym<T>,
    b: &BoundaryMass<T>,
    mode: DtnMode,
) -> Result<DtnOperator<T>> {
    let components = mesh.connected_components();
    if components != 1 {
        return Err(Error::Disconnected { components });
    }
    let boundary = check_boundary(mesh, b)?;
    let interior = complement(mesh.num_vertices(), &boundary);
    let (schur, k_ii) = match mode {
        DtnMode::Dense => {
            let c = Condensed::new(k, &boundary)?;
            let f = (!interior.is_empty()).then_some(c.factor);
            (Some(c.schur), f)
        }
        DtnMode::ApplyOnly => {
            let f = if interior.is_empty() {
                None
            } else {
                Some(SparseCholesky::new(&k.submatrix(&interior))?)
            };
            (None, f)
        }
    };
    let b_block = b.consistent.submatrix(&boundary);
    let b_factor = SparseCholesky::new(&b_block)?;
    Ok(DtnOperator {
        boundary,
        interior,
        schur,
        bmass: b.clone(),
        b_block,
        k: k.clone(),
        k_ii,
        b_factor,
    })
}

impl<T: Real> DtnOperator<T> {
    pub fn dim(&self) -> usize {
        self.boundary.len()
    }

    pub fn stiffness(&self) -> &SparseSym<T> {
        &self.k
    }

    /// Harmonic extension of `phi` to all vertices.
    pub fn extend(&self, phi: &[T]) -> Vec<T> {
        extend_with(&self.k, &self.boundary, &self.interior, self.k_ii.as_ref(), phi)
    }

    /// `S φ`.
    pub fn schur_apply(&self, phi: &[T]) -> Vec<T> {
        assert_eq!(phi.len(), self.dim());
        match &self.schur {
            Some(s) => s.matvec(phi),
            None => {
                let u = self.extend(phi);
                let ku = self.k.matvec(&u);
                self.boundary.iter().map(|&i| ku[i]).collect()
            }
        }
    }

    /// `B^{-1} S φ`.
    pub fn apply(&self, phi: &[T]) -> BoundaryField<T> {
        self.b_solve(&self.schur_apply(phi))
    }

    pub fn b_apply(&self, phi: &[T]) -> Vec<T> {
        self.b_block.matvec(phi)
    }

    pub fn b_solve(&self, r: &[T]) -> Vec<T> {
        self.b_factor.solve(r)
    }

    /// `⟨φ, χ⟩_B`.
    pub fn b_inner(&self, phi: &[T], chi: &[T]) -> T {
        self.b_block.bilinear(phi, chi)
    }

    /// `φᵀ S φ`.
    pub fn energy(&self, phi: &[T]) -> T {
        crate::scalar::dot(phi, &self.schur_apply(phi))
    }

    /// Dense `S`, formed column by column in apply-only mode.
    pub fn schur_dense(&self) -> Mat<T> {
        match &self.schur {
            Some(s) => s.clone(),
            None => {
                let n = self.dim();
                let cols: Vec<Vec<T>> = (0..n)
                    .map(|j| {
                        let mut e = vec![T::zero(); n];
                        e[j] = T::one();
                        self.schur_apply(&e)
                    })
                    .collect();
                let mut s = Mat::from_columns(&cols);
                s.symmetrize();
                s
            }
        }
    }

    pub fn b_dense(&self) -> Mat<T> {
        self.b_block.to_dense()
    }

    /// Restriction of a nodal vector to the boundary.
    pub fn restrict(&self, u: &[T]) -> BoundaryField<T> {
        self.boundary.iter().map(|&i| u[i]).collect()
    }

    /// Write `S` (full upper triangle) and `B` in sym-coord form.
    pub fn export<W1: Write, W2: Write>(&self, s_out: W1, b_out: W2) -> Result<()> {
        crate::linalg::sparse::write_dense_sym_coord(&self.schur_dense(), s_out)?;
        self.b_block.write_sym_coord(b_out)
    }
}

fn extend_with<T: Real>(
    k: &SparseSym<T>,
    boundary: &[usize],
    interior: &[usize],
    k_ii: Option<&SparseCholesky<T>>,
    phi: &[T],
) -> Vec<T> {
    assert_eq!(phi.len(), boundary.len());
    let mut u = vec![T::zero(); k.n()];
    for (&i, &v) in boundary.iter().zip(phi) {
        u[i] = v;
    }
    let Some(f) = k_ii else { return u };
    let ku = k.matvec(&u);
    let rhs: Vec<T> = interior.iter().map(|&i| -ku[i]).collect();
    for (&i, v) in interior.iter().zip(f.solve(&rhs)) {
        u[i] = v;
    }
    u
}

/// Harmonic extension of boundary data: `(K u)_i = 0` at interior vertices
/// and `u = φ` on the boundary.
pub fn harmonic_extension<T: Real>(mesh: &Mesh<T>, k: &SparseSym<T>, phi: &[T]) -> Result<Vec<T>> {
    let boundary = mesh.boundary_vertices();
    if phi.len() != boundary.len() {
        return Err(Error::Precondition {
            op: "dtn_core.harmonic_extension",
            detail: format!("field has {} values for {} boundary vertices", phi.len(), boundary.len()),
        });
    }
    let interior = complement(mesh.num_vertices(), &boundary);
    let f = if interior.is_empty() {
        None
    } else {
        Some(SparseCholesky::new(&k.submatrix(&interior))?)
    };
    Ok(extend_with(k, &boundary, &interior, f.as_ref(), phi))
}

/// `D₀φ = B^{-1} S φ`.
pub fn dtn_apply<T: Real>(op: &DtnOperator<T>, phi: &[T]) -> BoundaryField<T> {
    op.apply(phi)
}

/// Relative interior residual tolerated by `weak_normal_derivative`.
pub const GREEN_RESIDUAL_TOL: f64 = 1e-8;

/// Boundary flux `ψ = B^{-1} (K u - M f)|_Γ` of a discrete solution of
/// `K u = M f` at interior vertices, so that
/// `vᵀ K u = vᵀ M f + ⟨ψ, v|_Γ⟩_B` for every nodal `v`.
pub fn weak_normal_derivative<T: Real>(
    mesh: &Mesh<T>,
    k: &SparseSym<T>,
    m: &SparseSym<T>,
    b: &BoundaryMass<T>,
    u: &[T],
    f: &[T],
) -> Result<BoundaryField<T>> {
    let boundary = check_boundary(mesh, b)?;
    let ku = k.matvec(u);
    let mf = m.matvec(f);
    let r: Vec<T> = ku.iter().zip(&mf).map(|(a, c)| *a - *c).collect();
    let interior = complement(mesh.num_vertices(), &boundary);
    let ri: Vec<T> = interior.iter().map(|&i| r[i]).collect();
    let scale = (k.max_abs() * norm_inf(u)).max(m.max_abs() * norm_inf(f));
    let res = norm_inf(&ri);
    if res > T::of(GREEN_RESIDUAL_TOL) * scale {
        return Err(Error::Precondition {
            op: "dtn_core.weak_normal_derivative",
            detail: format!(
                "interior residual {:e} exceeds {:e} (relative to {:e})",
                res.f64(),
                GREEN_RESIDUAL_TOL,
                scale.f64()
            ),
        });
    }
    let rb: Vec<T> = boundary.iter().map(|&i| r[i]).collect();
    let bf = SparseCholesky::new(&b.consistent.submatrix(&boundary))?;
    Ok(bf.solve(&rb))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::assembly::{boundary_mass, stiffness, Forms};
    use crate::mesh::{build_domain, BoundarySelector, DomainSpec, Point2};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn setup(spec: &DomainSpec, h: f64) -> (Mesh<f64>, Forms<f64>, DtnOperator<f64>) {
        let mesh = build_domain(spec, h).unwrap();
        let f = Forms::new(&mesh).unwrap();
        let op = build_dtn(&mesh, &f.k, &f.b).unwrap();
        (mesh, f, op)
    }

    fn disk(sides: usize) -> DomainSpec {
        DomainSpec::PolygonalDisk { radius: 1.0, sides }
    }

    fn random(n: usize, seed: u64) -> Vec<f64> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect()
    }

    #[test]
    fn one_triangle_schur_is_element_stiffness() {
        let p = vec![Point2::new(0.0, 0.0), Point2::new(1.0, 0.0), Point2::new(0.0, 1.0)];
        let mesh = Mesh::from_triangles(p, vec![[0, 1, 2]], DomainSpec::Imported, |_, _| 0).unwrap();
        let k = stiffness(&mesh).unwrap();
        let b = boundary_mass(&mesh, &BoundarySelector::All).unwrap();
        let op = build_dtn(&mesh, &k, &b).unwrap();
        assert_eq!(op.schur.as_ref().unwrap(), &k.to_dense());
        let phi = vec![1.0, 2.0, 3.0];
        assert_eq!(harmonic_extension(&mesh, &k, &phi).unwrap(), phi);
    }

    #[test]
    fn constants_have_zero_flux() {
        for spec in [
            DomainSpec::unit_square(),
            DomainSpec::PolygonalAnnulus {
                r_inner: 0.5,
                r_outer: 1.0,
                sides: 32,
            },
            DomainSpec::Tooth { a: 0.5 },
        ] {
            let (mesh, f, op) = setup(&spec, 0.1);
            let s = op.schur.as_ref().unwrap();
            let ones = vec![1.0; op.dim()];
            assert!(norm_inf(&s.matvec(&ones)) <= 1e-10 * s.max_abs());
            assert!(norm_inf(&op.apply(&ones)) <= 1e-10 * s.max_abs());
            assert!(s.asymmetry() <= 1e-12 * s.max_abs());
            let u = harmonic_extension(&mesh, &f.k, &ones).unwrap();
            assert!(u.iter().all(|v| (v - 1.0).abs() < 1e-12));
        }
    }

    #[test]
    fn extension_is_discretely_harmonic_and_matches_r_cos() {
        let mut errs = Vec::new();
        for h in [0.2, 0.1, 0.05] {
            let sides = (2.0 * std::f64::consts::PI / h).ceil() as usize * 2;
            let (mesh, f, op) = setup(&disk(sides), h);
            let phi: Vec<f64> = op
                .boundary
                .iter()
                .map(|&i| {
                    let p = mesh.vertices[i];
                    p.y.atan2(p.x).cos()
                })
                .collect();
            let u = harmonic_extension(&mesh, &f.k, &phi).unwrap();
            let ku = f.k.matvec(&u);
            for &i in &op.interior {
                assert!(ku[i].abs() <= 1e-10 * f.k.max_abs() * norm_inf(&u));
            }
            assert_eq!(u, op.extend(&phi));
            let err = mesh
                .vertices
                .iter()
                .zip(&u)
                .map(|(p, v)| (v - p.x).abs())
                .fold(0.0, f64::max);
            errs.push(err);
        }
        // Boundary vertices lie on the circle, so cos θ samples are samples
        // of the linear field x, which P1 reproduces exactly.
        assert!(errs.iter().all(|e| *e < 1e-12), "{errs:?}");
    }

    #[test]
    fn disk_cos_modes() {
        let (mesh, _, op) = setup(&disk(256), 0.02);
        for (kk, tol) in [(1.0, 0.01), (2.0, 0.02)] {
            let phi: Vec<f64> = op
                .boundary
                .iter()
                .map(|&i| {
                    let p = mesh.vertices[i];
                    (kk * p.y.atan2(p.x)).cos()
                })
                .collect();
            let ratio = op.energy(&phi) / op.b_inner(&phi, &phi);
            assert!((ratio - kk).abs() < tol * kk, "{ratio}");
            let d = op.apply(&phi);
            let err: Vec<f64> = d.iter().zip(&phi).map(|(a, b)| a - kk * b).collect();
            assert!(op.b_inner(&err, &err).sqrt() < 0.05 * kk * op.b_inner(&phi, &phi).sqrt());
        }
    }

    #[test]
    fn self_adjoint_and_energy_identity() {
        let (_, f, op) = setup(&DomainSpec::Tooth { a: 1.0 }, 0.1);
        let n = op.dim();
        for seed in 0..5 {
            let phi = random(n, seed);
            let chi = random(n, seed + 100);
            let l = op.b_inner(&op.apply(&phi), &chi);
            let r = op.b_inner(&phi, &op.apply(&chi));
            assert!((l - r).abs() <= 1e-10 * l.abs().max(r.abs()));
            let e = op.energy(&phi);
            let u = op.extend(&phi);
            assert!((e - f.k.quad(&u)).abs() <= 1e-10 * e);
            assert!(e > 0.0);
        }
    }

    #[test]
    fn apply_only_agrees_with_dense() {
        let spec = DomainSpec::PolygonalAnnulus {
            r_inner: 0.5,
            r_outer: 1.0,
            sides: 32,
        };
        let mesh: Mesh<f64> = build_domain(&spec, 0.1).unwrap();
        let f = Forms::new(&mesh).unwrap();
        let d = build_dtn(&mesh, &f.k, &f.b).unwrap();
        let a = build_dtn_with(&mesh, &f.k, &f.b, DtnMode::ApplyOnly).unwrap();
        assert!(a.schur.is_none());
        let phi = random(d.dim(), 7);
        let x = d.apply(&phi);
        let y = a.apply(&phi);
        let diff: Vec<f64> = x.iter().zip(&y).map(|(p, q)| p - q).collect();
        assert!(norm_inf(&diff) <= 1e-10 * norm_inf(&x));
        let mut sd = a.schur_dense();
        sd.data.iter_mut().zip(&d.schur.as_ref().unwrap().data).for_each(|(p, q)| *p -= q);
        assert!(sd.max_abs() <= 1e-10 * d.schur.as_ref().unwrap().max_abs());
    }

    #[test]
    fn normal_derivative_of_extension_is_dtn() {
        let (mesh, f, op) = setup(&DomainSpec::unit_square(), 0.125);
        let zero = vec![0.0; mesh.num_vertices()];
        let ones = vec![1.0; mesh.num_vertices()];
        let psi = weak_normal_derivative(&mesh, &f.k, &f.m, &f.b, &ones, &zero).unwrap();
        assert!(norm_inf(&psi) < 1e-12);
        let phi = random(op.dim(), 3);
        let u = op.extend(&phi);
        let psi = weak_normal_derivative(&mesh, &f.k, &f.m, &f.b, &u, &zero).unwrap();
        let d = op.apply(&phi);
        for (a, b) in psi.iter().zip(&d) {
            assert!((a - b).abs() <= 1e-10 * norm_inf(&d));
        }
        // Green identity against an arbitrary nodal test function.
        let v = random(mesh.num_vertices(), 4);
        let lhs = f.k.bilinear(&v, &u);
        let rhs = op.b_inner(&psi, &op.restrict(&v));
        assert!((lhs - rhs).abs() <= 1e-10 * lhs.abs().max(1.0));
    }

    #[test]
    fn normal_derivative_rejects_non_solutions() {
        let (mesh, f, _) = setup(&DomainSpec::unit_square(), 0.125);
        let u = random(mesh.num_vertices(), 5);
        let zero = vec![0.0; mesh.num_vertices()];
        assert!(matches!(
            weak_normal_derivative(&mesh, &f.k, &f.m, &f.b, &u, &zero),
            Err(Error::Precondition { .. })
        ));
    }

    #[test]
    fn disconnected_mesh_is_rejected() {
        let p = vec![
            Point2::new(0.0, 0.0),
            Point2::new(1.0, 0.0),
            Point2::new(0.0, 1.0),
            Point2::new(3.0, 0.0),
            Point2::new(4.0, 0.0),
            Point2::new(3.0, 1.0),
        ];
        let mesh = Mesh::from_triangles(p, vec![[0, 1, 2], [3, 4, 5]], DomainSpec::Imported, |_, _| 0).unwrap();
        let k = stiffness(&mesh).unwrap();
        let b = boundary_mass(&mesh, &BoundarySelector::All).unwrap();
        assert!(matches!(build_dtn(&mesh, &k, &b), Err(Error::Disconnected { components: 2 })));
    }
}
