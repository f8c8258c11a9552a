//! The semigroup `S_t = exp(-t D₀)` by spectral calculus, the equilibrium
//! projection, and matrix-level Markov, irreducibility and contractivity
//! probes in the lumped-measure representation.

use petgraph::algo::tarjan_scc;
use petgraph::graph::DiGraph;
use serde::{Deserialize, Serialize};

use crate::dtn::{BoundaryField, DtnOperator};
use crate::error::{Error, Result};
use crate::linalg::dense::sym_eigen;
use crate::linalg::{Mat, SparseSym};
use crate::scalar::{dot, Real};
use crate::spectral::{SteklovSpectrum, KERNEL_TOL};

/// Relative tail bound accepted by `evolve` on a truncated decomposition.
pub const TAIL_TOL: f64 = 1e-8;

/// `P φ = (1ᵀ B φ / σ(Γ)) 1`.
#[derive(Clone, Debug)]
pub struct EquilibriumProjection {
    /// `B 1`.
    pub weights: Vec<f64>,
    pub total: f64,
}

impl EquilibriumProjection {
    pub fn mean(&self, phi: &[f64]) -> f64 {
        dot(&self.weights, phi) / self.total
    }

    pub fn apply(&self, phi: &[f64]) -> BoundaryField<f64> {
        vec![self.mean(phi); phi.len()]
    }
}

pub fn equilibrium(p: &EquilibriumProjection, phi: &[f64]) -> BoundaryField<f64> {
    p.apply(phi)
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct MarkovReport {
    pub t: f64,
    pub min_entry: f64,
    pub max_row_sum_deviation: f64,
    /// `max |D_i T_ij - D_j T_ji|` relative to the largest `D_i T_ij`.
    pub asymmetry: f64,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct Irreducibility {
    pub irreducible: bool,
    /// Strongly connected components in boundary-local indices, each sorted,
    /// ordered by smallest member.
    pub blocks: Vec<Vec<usize>>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct LpReport {
    pub t: f64,
    pub norm_1to1: f64,
    pub norm_inf_to_inf: f64,
}

/// Eigendecomposition-backed semigroup on the boundary space.
#[derive(Clone, Debug)]
pub struct SpectralSemigroup {
    pub spectrum: SteklovSpectrum,
    /// Consistent boundary mass.
    pub b: SparseSym<f64>,
    /// Lumped boundary weights.
    pub lumped: Vec<f64>,
    pub total: f64,
    /// Spectrum of `D^{-1/2} S D^{-1/2}` (ascending) and its orthonormal
    /// eigenvectors as rows; present when `S` was available.
    lumped_values: Vec<f64>,
    lumped_vectors: Option<Mat<f64>>,
}

impl SpectralSemigroup {
    pub fn new<T: Real>(op: &DtnOperator<T>, spectrum: SteklovSpectrum) -> Result<Self> {
        let b: SparseSym<f64> = op.b_block.cast();
        let lumped: Vec<f64> = op.boundary.iter().map(|&i| op.bmass.lumped[i].f64()).collect();
        let s: Mat<f64> = op.schur_dense().cast();
        Self::from_parts(spectrum, b, lumped, Some(&s))
    }

    pub fn from_parts(
        mut spectrum: SteklovSpectrum,
        b: SparseSym<f64>,
        lumped: Vec<f64>,
        s: Option<&Mat<f64>>,
    ) -> Result<Self> {
        let total = b.matvec(&vec![1.0; b.n()]).iter().sum();
        deflate_constants(&mut spectrum, &b, total);
        let (lumped_values, lumped_vectors) = match s {
            Some(s) => {
                let r: Vec<f64> = lumped.iter().map(|d| 1.0 / d.sqrt()).collect();
                let c = Mat::from_fn(s.rows, s.cols, |i, j| r[i] * s[(i, j)] * r[j]);
                let (v, u) = sym_eigen(&c)?;
                (v, Some(u))
            }
            None => (Vec::new(), None),
        };
        Ok(SpectralSemigroup {
            spectrum,
            b,
            lumped,
            total,
            lumped_values,
            lumped_vectors,
        })
    }

    pub fn dim(&self) -> usize {
        self.b.n()
    }

    pub fn complete(&self) -> bool {
        self.spectrum.complete
    }

    pub fn lambda1(&self) -> f64 {
        self.spectrum.eigenvalues[1]
    }

    pub fn equilibrium(&self) -> EquilibriumProjection {
        EquilibriumProjection {
            weights: self.b.matvec(&vec![1.0; self.dim()]),
            total: self.total,
        }
    }

    pub fn b_norm(&self, phi: &[f64]) -> f64 {
        self.b.quad(phi).max(0.0).sqrt()
    }

    /// `S_t φ` and a bound on the part of `φ` outside the computed
    /// eigenspaces after time `t` (zero for a complete decomposition).
    pub fn evolve_with_bound(&self, t: f64, phi: &[f64]) -> (BoundaryField<f64>, f64) {
        let bphi = self.b.matvec(phi);
        let mut out = vec![0.0; phi.len()];
        let mut captured = vec![0.0; phi.len()];
        for (l, v) in self.spectrum.eigenvalues.iter().zip(&self.spectrum.vectors) {
            let c = dot(v, &bphi);
            let e = (-l * t).exp();
            for ((o, p), x) in out.iter_mut().zip(captured.iter_mut()).zip(v) {
                *o += e * c * x;
                *p += c * x;
            }
        }
        if self.complete() {
            return (out, 0.0);
        }
        let tail: Vec<f64> = phi.iter().zip(&captured).map(|(a, b)| a - b).collect();
        let last = *self.spectrum.eigenvalues.last().expect("nonempty spectrum");
        (out, (-last * t).exp() * self.b_norm(&tail))
    }

    pub fn evolve(&self, t: f64, phi: &[f64]) -> Result<BoundaryField<f64>> {
        if t < 0.0 || !t.is_finite() {
            return Err(Error::Range {
                op: "semigroup.evolve",
                detail: format!("time {t} must be finite and nonnegative"),
            });
        }
        let (out, bound) = self.evolve_with_bound(t, phi);
        if bound > TAIL_TOL * self.b_norm(phi) {
            return Err(Error::Truncation(format!(
                "t = {t}: unresolved tail of size {bound:e} exceeds {TAIL_TOL:e} relative"
            )));
        }
        Ok(out)
    }

    fn require_complete(&self, what: &str) -> Result<()> {
        if self.complete() {
            Ok(())
        } else {
            Err(Error::Truncation(format!(
                "{what} needs all {} eigenpairs, {} computed",
                self.dim(),
                self.spectrum.len()
            )))
        }
    }

    /// `‖S_t - P‖` in the operator norm of `L₂(Γ, B)`, computed as the
    /// spectral norm of the symmetric matrix `Lᵀ (S_t - P) L^{-T}`,
    /// `B = L Lᵀ`, assembled from the decomposition.
    pub fn operator_norm_gap(&self, t: f64) -> Result<f64> {
        self.require_complete("operator_norm_gap")?;
        let n = self.dim();
        let bd = self.b.to_dense();
        let l = crate::linalg::dense::cholesky(&bd)?;
        let lt = l.transpose();
        // W = Lᵀ V (orthogonal), q = Lᵀ 1 / sqrt(σ).
        let w: Vec<Vec<f64>> = self.spectrum.vectors.iter().map(|v| lt.matvec(v)).collect();
        let s = 1.0 / self.total.sqrt();
        let q: Vec<f64> = lt.matvec(&vec![s; n]);
        let w0 = &w[0];
        let sign = if dot(w0, &q) < 0.0 { -1.0 } else { 1.0 };
        let d: Vec<f64> = w0.iter().zip(&q).map(|(a, b)| sign * a - b).collect();
        let p: Vec<f64> = w0.iter().zip(&q).map(|(a, b)| sign * a + b).collect();
        let e0 = (-self.spectrum.eigenvalues[0] * t).exp();
        let mut c = Mat::from_fn(n, n, |i, j| {
            // e0 w0 w0ᵀ - q qᵀ = (e0 - 1) w0 w0ᵀ + (w0 - q)(w0 + q)ᵀ sym.
            (e0 - 1.0) * w0[i] * w0[j] + 0.5 * (d[i] * p[j] + p[i] * d[j])
        });
        for (lam, wk) in self.spectrum.eigenvalues.iter().zip(&w).skip(1) {
            let e = (-lam * t).exp();
            for i in 0..n {
                let ei = e * wk[i];
                for (cij, wj) in c.row_mut(i).iter_mut().zip(wk) {
                    *cij += ei * wj;
                }
            }
        }
        c.symmetrize();
        let (vals, _) = sym_eigen(&c)?;
        Ok(vals.iter().map(|v| v.abs()).fold(0.0, f64::max))
    }

    /// `‖S_t - P‖ / e^{-λ₁ t}`.
    pub fn rate_ratio(&self, t: f64) -> Result<f64> {
        Ok(self.operator_norm_gap(t)? / (-self.lambda1() * t).exp())
    }

    /// Matrix of `S_t` acting on nodal values in the lumped measure
    /// `D`: `T = D^{-1/2} U e^{-tΛ} Uᵀ D^{1/2}`.
    pub fn lumped_matrix(&self, t: f64) -> Result<Mat<f64>> {
        let u = self.lumped_vectors.as_ref().ok_or_else(|| {
            Error::Truncation("the lumped representation needs the dense Schur complement".into())
        })?;
        let n = self.dim();
        let sq: Vec<f64> = self.lumped.iter().map(|d| d.sqrt()).collect();
        let e: Vec<f64> = self.lumped_values.iter().map(|l| (-l * t).exp()).collect();
        let mut m = Mat::zeros(n, n);
        for k in 0..n {
            let uk = u.row(k);
            for i in 0..n {
                let f = e[k] * uk[i];
                if f == 0.0 {
                    continue;
                }
                for (mij, ukj) in m.row_mut(i).iter_mut().zip(uk) {
                    *mij += f * ukj;
                }
            }
        }
        for i in 0..n {
            for j in 0..n {
                m[(i, j)] *= sq[j] / sq[i];
            }
        }
        Ok(m)
    }

    pub fn markov_diagnostics(&self, t: f64) -> Result<MarkovReport> {
        let m = self.lumped_matrix(t)?;
        let n = self.dim();
        let mut min_entry = f64::INFINITY;
        let mut dev = 0.0f64;
        let mut asym = 0.0f64;
        let mut scale = 0.0f64;
        for i in 0..n {
            let row = m.row(i);
            min_entry = row.iter().cloned().fold(min_entry, f64::min);
            dev = dev.max((row.iter().sum::<f64>() - 1.0).abs());
            for j in 0..n {
                let a = self.lumped[i] * m[(i, j)];
                scale = scale.max(a.abs());
                asym = asym.max((a - self.lumped[j] * m[(j, i)]).abs());
            }
        }
        Ok(MarkovReport {
            t,
            min_entry,
            max_row_sum_deviation: dev,
            asymmetry: asym / scale,
        })
    }

    /// Strong connectivity of the graph with an edge `i → j` wherever
    /// `|T_ij| > threshold`.
    pub fn irreducibility_probe(&self, t: f64, threshold: f64) -> Result<Irreducibility> {
        let m = self.lumped_matrix(t)?;
        Ok(irreducibility_of(&m, threshold))
    }

    pub fn lp_contractivity_check(&self, t: f64) -> Result<LpReport> {
        let m = self.lumped_matrix(t)?;
        Ok(lp_norms(&m, &self.lumped, t))
    }

    /// Dimension of the numerical kernel of the generator.
    pub fn kernel_dimension(&self) -> usize {
        self.spectrum.kernel_dimension(KERNEL_TOL)
    }

    /// Direct sum of two semigroups (boundary spaces concatenated); the
    /// result is reducible by construction.
    pub fn block_diagonal(a: &SpectralSemigroup, b: &SpectralSemigroup) -> Result<SpectralSemigroup> {
        let (na, nb) = (a.dim(), b.dim());
        let n = na + nb;
        let mut pairs: Vec<(f64, Vec<f64>, f64)> = Vec::new();
        for (((l, v), r), off) in a
            .spectrum
            .eigenvalues
            .iter()
            .zip(&a.spectrum.vectors)
            .zip(&a.spectrum.residuals)
            .map(|x| (x, 0))
            .chain(
                b.spectrum
                    .eigenvalues
                    .iter()
                    .zip(&b.spectrum.vectors)
                    .zip(&b.spectrum.residuals)
                    .map(|x| (x, na)),
            )
        {
            let mut full = vec![0.0; n];
            full[off..off + v.len()].copy_from_slice(v);
            pairs.push((*l, full, *r));
        }
        pairs.sort_by(|x, y| x.0.total_cmp(&y.0));
        let spectrum = SteklovSpectrum {
            eigenvalues: pairs.iter().map(|p| p.0).collect(),
            vectors: pairs.iter().map(|p| p.1.clone()).collect(),
            residuals: pairs.iter().map(|p| p.2).collect(),
            s_norm: a.spectrum.s_norm.max(b.spectrum.s_norm),
            complete: a.complete() && b.complete(),
            route: a.spectrum.route,
            applications: 0,
        };
        let mut coo = crate::linalg::CooBuilder::new(n);
        for (m, off) in [(&a.b, 0), (&b.b, na)] {
            for i in 0..m.n() {
                let (c, v) = m.row(i);
                for (j, x) in c.iter().zip(v) {
                    coo.push(i + off, j + off, *x);
                }
            }
        }
        let mut lumped = a.lumped.clone();
        lumped.extend_from_slice(&b.lumped);
        let lumped_values;
        let lumped_vectors = match (&a.lumped_vectors, &b.lumped_vectors) {
            (Some(ua), Some(ub)) => {
                let mut rows: Vec<(f64, Vec<f64>)> = Vec::new();
                for (k, l) in a.lumped_values.iter().enumerate() {
                    let mut r = vec![0.0; n];
                    r[..na].copy_from_slice(ua.row(k));
                    rows.push((*l, r));
                }
                for (k, l) in b.lumped_values.iter().enumerate() {
                    let mut r = vec![0.0; n];
                    r[na..].copy_from_slice(ub.row(k));
                    rows.push((*l, r));
                }
                rows.sort_by(|x, y| x.0.total_cmp(&y.0));
                lumped_values = rows.iter().map(|r| r.0).collect();
                let mut u = Mat::zeros(n, n);
                for (k, r) in rows.iter().enumerate() {
                    u.row_mut(k).copy_from_slice(&r.1);
                }
                Some(u)
            }
            _ => {
                lumped_values = Vec::new();
                None
            }
        };
        let bm = coo.build();
        let total = a.total + b.total;
        Ok(SpectralSemigroup {
            spectrum,
            b: bm,
            lumped,
            total,
            lumped_values,
            lumped_vectors,
        })
    }
}

/// Replace a computed one-dimensional, numerically constant kernel by the
/// exact one (`K 1 = 0` holds exactly) and B-orthogonalize the remaining
/// eigenvectors against it. Removes the `O(ε)` kernel error that would
/// otherwise dominate `S_t - P` at large `t`.
fn deflate_constants(spec: &mut SteklovSpectrum, b: &SparseSym<f64>, total: f64) {
    if spec.is_empty() || spec.kernel_dimension(KERNEL_TOL) != 1 {
        return;
    }
    let v0 = &spec.vectors[0];
    let mean = v0.iter().sum::<f64>() / v0.len() as f64;
    let dev = v0.iter().map(|x| (x - mean).abs()).fold(0.0, f64::max);
    if !(dev <= 1e-6 * mean.abs()) {
        return;
    }
    let c = mean.signum() / total.sqrt();
    spec.vectors[0] = vec![c; v0.len()];
    spec.eigenvalues[0] = 0.0;
    let w = b.matvec(&vec![1.0; b.n()]);
    for v in spec.vectors.iter_mut().skip(1) {
        let a = dot(&w, v) / total;
        v.iter_mut().for_each(|x| *x -= a);
        let n = b.quad(v).sqrt();
        v.iter_mut().for_each(|x| *x /= n);
    }
}

pub fn evolve(sg: &SpectralSemigroup, t: f64, phi: &[f64]) -> Result<BoundaryField<f64>> {
    sg.evolve(t, phi)
}

pub fn operator_norm_gap(sg: &SpectralSemigroup, t: f64) -> Result<f64> {
    sg.operator_norm_gap(t)
}

pub fn markov_diagnostics(sg: &SpectralSemigroup, t: f64) -> Result<MarkovReport> {
    sg.markov_diagnostics(t)
}

pub fn irreducibility_probe(sg: &SpectralSemigroup, t: f64, threshold: f64) -> Result<Irreducibility> {
    sg.irreducibility_probe(t, threshold)
}

pub fn lp_contractivity_check(sg: &SpectralSemigroup, t: f64) -> Result<LpReport> {
    sg.lp_contractivity_check(t)
}

/// Strongly connected components of the support graph of `m`.
pub fn irreducibility_of(m: &Mat<f64>, threshold: f64) -> Irreducibility {
    let n = m.rows;
    let mut g: DiGraph<(), ()> = DiGraph::with_capacity(n, 0);
    let nodes: Vec<_> = (0..n).map(|_| g.add_node(())).collect();
    for i in 0..n {
        for j in 0..n {
            if i != j && m[(i, j)].abs() > threshold {
                g.add_edge(nodes[i], nodes[j], ());
            }
        }
    }
    let mut blocks: Vec<Vec<usize>> = tarjan_scc(&g)
        .into_iter()
        .map(|c| {
            let mut v: Vec<usize> = c.into_iter().map(|x| x.index()).collect();
            v.sort_unstable();
            v
        })
        .collect();
    blocks.sort_by_key(|b| b[0]);
    Irreducibility {
        irreducible: blocks.len() == 1,
        blocks,
    }
}

/// Weighted `L₁(D) → L₁(D)` and `L∞ → L∞` norms of a matrix acting on
/// nodal values.
pub fn lp_norms(m: &Mat<f64>, d: &[f64], t: f64) -> LpReport {
    let n = m.rows;
    let norm_inf_to_inf = (0..n)
        .map(|i| m.row(i).iter().map(|x| x.abs()).sum::<f64>())
        .fold(0.0, f64::max);
    let norm_1to1 = (0..n)
        .map(|j| (0..n).map(|i| d[i] * m[(i, j)].abs()).sum::<f64>() / d[j])
        .fold(0.0, f64::max);
    LpReport {
        t,
        norm_1to1,
        norm_inf_to_inf,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::assembly::Forms;
    use crate::dtn::build_dtn;
    use crate::mesh::{build_domain, DomainSpec, Mesh};
    use crate::spectral::steklov_spectrum;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn semigroup(spec: &DomainSpec, h: f64) -> SpectralSemigroup {
        let mesh: Mesh<f64> = build_domain(spec, h).unwrap();
        let f = Forms::new(&mesh).unwrap();
        let op = build_dtn(&mesh, &f.k, &f.b).unwrap();
        let s = steklov_spectrum(&op, op.dim()).unwrap();
        SpectralSemigroup::new(&op, s).unwrap()
    }

    fn annulus() -> DomainSpec {
        DomainSpec::PolygonalAnnulus {
            r_inner: 0.5,
            r_outer: 1.0,
            sides: 32,
        }
    }

    fn random(n: usize, seed: u64) -> Vec<f64> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect()
    }

    fn dist(sg: &SpectralSemigroup, a: &[f64], b: &[f64]) -> f64 {
        let d: Vec<f64> = a.iter().zip(b).map(|(x, y)| x - y).collect();
        sg.b_norm(&d)
    }

    #[test]
    fn identity_constants_and_eigenvectors() {
        let sg = semigroup(&DomainSpec::unit_square(), 0.125);
        let n = sg.dim();
        let phi = random(n, 1);
        assert!(dist(&sg, &sg.evolve(0.0, &phi).unwrap(), &phi) < 1e-10 * sg.b_norm(&phi));
        let one = vec![1.0; n];
        for t in [0.5, 3.0, 40.0] {
            let e = sg.evolve(t, &one).unwrap();
            assert!(e.iter().all(|x| (x - 1.0).abs() < 1e-10));
        }
        let v1 = sg.spectrum.vectors[1].clone();
        let t = 0.7;
        let e = sg.evolve(t, &v1).unwrap();
        let s = (-sg.lambda1() * t).exp();
        let want: Vec<f64> = v1.iter().map(|x| s * x).collect();
        assert!(dist(&sg, &e, &want) < 1e-10);
        assert!(sg.evolve(-1.0, &one).is_err());
    }

    #[test]
    fn semigroup_law_mass_and_decay() {
        let sg = semigroup(&annulus(), 0.1);
        let p = sg.equilibrium();
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        for seed in 0..4 {
            let phi = random(sg.dim(), seed);
            let (t, s) = (rng.gen_range(0.01..10.0), rng.gen_range(0.01..10.0));
            let a = sg.evolve(t, &sg.evolve(s, &phi).unwrap()).unwrap();
            let b = sg.evolve(t + s, &phi).unwrap();
            assert!(dist(&sg, &a, &b) <= 1e-9 * sg.b_norm(&b).max(1e-300));
            let m0 = dot(&p.weights, &phi);
            assert!((dot(&p.weights, &b) - m0).abs() <= 1e-10 * sg.b_norm(&phi));
            let pphi = p.apply(&phi);
            let r0 = dist(&sg, &phi, &pphi);
            let mut last = f64::INFINITY;
            for t in [0.0, 0.1, 0.5, 1.0, 2.0, 5.0] {
                let d = dist(&sg, &sg.evolve(t, &phi).unwrap(), &pphi);
                assert!(d <= last * (1.0 + 1e-12));
                assert!(d <= (-sg.lambda1() * t).exp() * r0 * (1.0 + 1e-9));
                last = d;
            }
        }
    }

    #[test]
    fn equilibrium_projection() {
        let sg = semigroup(&DomainSpec::Tooth { a: 1.0 }, 0.2);
        let p = sg.equilibrium();
        let one = vec![1.0; sg.dim()];
        assert!(p.apply(&one).iter().all(|x| (x - 1.0).abs() < 1e-14));
        let phi = random(sg.dim(), 5);
        let pp = p.apply(&phi);
        let ppp = p.apply(&pp);
        assert!(pp.iter().zip(&ppp).all(|(a, b)| (a - b).abs() < 1e-12));
        let v2 = &sg.spectrum.vectors[2];
        assert!(p.mean(v2).abs() < 1e-10);
    }

    #[test]
    fn operator_norm_matches_rate() {
        let sg = semigroup(&DomainSpec::unit_square(), 0.125);
        for t in [0.1, 1.0, 10.0] {
            let r = sg.rate_ratio(t).unwrap();
            assert!((r - 1.0).abs() < 1e-8, "t={t}: {r}");
        }
        for t in [25.0, 60.0] {
            let r = sg.rate_ratio(t).unwrap();
            assert!((r - 1.0).abs() < 1e-8, "t={t}: {r}");
        }
    }

    #[test]
    fn lumped_markov_matrix_on_structured_square() {
        let sg = semigroup(&DomainSpec::unit_square(), 0.125);
        for t in [0.5, 1.0] {
            let m = sg.markov_diagnostics(t).unwrap();
            assert!(m.min_entry >= -1e-8, "{m:?}");
            assert!(m.max_row_sum_deviation <= 1e-10);
            assert!(m.asymmetry <= 1e-10);
            let lp = sg.lp_contractivity_check(t).unwrap();
            assert!(lp.norm_1to1 <= 1.0 + 1e-8 && lp.norm_inf_to_inf <= 1.0 + 1e-8, "{lp:?}");
            assert!((lp.norm_inf_to_inf - 1.0).abs() < 1e-8);
        }
        let a = sg.lumped_matrix(0.5).unwrap();
        let b = sg.lumped_matrix(0.25).unwrap();
        let c = sg.lumped_matrix(0.75).unwrap();
        let ab = a.matmul(&b);
        let x = lp_norms(&ab, &sg.lumped, 0.75);
        let y = lp_norms(&c, &sg.lumped, 0.75);
        assert!((x.norm_1to1 - y.norm_1to1).abs() < 1e-8);
        assert!((x.norm_inf_to_inf - y.norm_inf_to_inf).abs() < 1e-8);
    }

    #[test]
    fn annulus_irreducible_block_sum_reducible() {
        let sg = semigroup(&annulus(), 0.1);
        let v = sg.irreducibility_probe(1.0, 1e-12).unwrap();
        assert!(v.irreducible);
        assert_eq!(sg.kernel_dimension(), 1);
        let other = semigroup(&DomainSpec::unit_square(), 0.25);
        let bd = SpectralSemigroup::block_diagonal(&sg, &other).unwrap();
        let v = bd.irreducibility_probe(1.0, 1e-12).unwrap();
        assert!(!v.irreducible);
        assert_eq!(v.blocks.len(), 2);
        assert_eq!(v.blocks[0], (0..sg.dim()).collect::<Vec<_>>());
        assert_eq!(bd.kernel_dimension(), 2);
        let one = vec![1.0; bd.dim()];
        assert!(bd.evolve(2.0, &one).unwrap().iter().all(|x| (x - 1.0).abs() < 1e-10));
    }

    #[test]
    fn truncated_decomposition_reports_its_tail() {
        let mesh: Mesh<f64> = build_domain(&DomainSpec::unit_square(), 0.125).unwrap();
        let f = Forms::new(&mesh).unwrap();
        let op = build_dtn(&mesh, &f.k, &f.b).unwrap();
        let s = steklov_spectrum(&op, 5).unwrap();
        let sg = SpectralSemigroup::new(&op, s).unwrap();
        let phi = random(sg.dim(), 2);
        assert!(matches!(sg.evolve(0.0, &phi), Err(Error::Truncation(_))));
        assert!(sg.evolve(0.0, &sg.spectrum.vectors[3]).is_ok());
        assert!(sg.evolve(200.0, &phi).is_ok());
        assert!(matches!(sg.operator_norm_gap(1.0), Err(Error::Truncation(_))));
    }
}
