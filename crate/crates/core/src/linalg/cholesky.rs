//! Sparse Cholesky factorization (up-looking, elimination-tree driven) with a
//! nested-dissection fill-reducing order, plus static condensation onto a
//! chosen index set (the Schur complement).

use rayon::prelude::*;

use super::dense::Mat;
use super::sparse::SparseSym;
use crate::error::{Error, Result};
use crate::scalar::Real;

const NONE: usize = usize::MAX;

/// Adjacency lists of the matrix graph (diagonal excluded).
pub fn adjacency<T: Real>(a: &SparseSym<T>) -> Vec<Vec<usize>> {
    (0..a.n())
        .map(|i| a.row(i).0.iter().copied().filter(|&j| j != i).collect())
        .collect()
}

/// Nested dissection by BFS level structures: each connected piece is split
/// at the median level of a BFS from a pseudo-peripheral vertex, the two
/// halves are ordered recursively and the separating level goes last.
pub fn nested_dissection(adj: &[Vec<usize>]) -> Vec<usize> {
    let n = adj.len();
    let mut order = Vec::with_capacity(n);
    let mut in_set = vec![false; n];
    let mut level = vec![NONE; n];
    // Explicit stack: Part(vertices) to split, Emit(vertices) to append.
    enum Job {
        Part(Vec<usize>),
        Emit(Vec<usize>),
    }
    let mut stack = vec![Job::Part((0..n).collect())];
    while let Some(job) = stack.pop() {
        let verts = match job {
            Job::Emit(v) => {
                order.extend(v);
                continue;
            }
            Job::Part(v) => v,
        };
        if verts.len() <= 48 {
            order.extend(verts);
            continue;
        }
        for &v in &verts {
            in_set[v] = true;
        }
        // Split into connected components first.
        let mut comps: Vec<Vec<usize>> = Vec::new();
        for &s in &verts {
            if level[s] != NONE {
                continue;
            }
            let comp = bfs(adj, &in_set, &mut level, s);
            comps.push(comp);
        }
        for &v in &verts {
            level[v] = NONE;
        }
        if comps.len() > 1 {
            for &v in &verts {
                in_set[v] = false;
            }
            for c in comps.into_iter().rev() {
                stack.push(Job::Part(c));
            }
            continue;
        }
        // Pseudo-peripheral start: two sweeps.
        let first = bfs(adj, &in_set, &mut level, verts[0]);
        let far = *first.last().expect("nonempty component");
        for &v in &first {
            level[v] = NONE;
        }
        let lvl = bfs(adj, &in_set, &mut level, far);
        let depth = level[*lvl.last().expect("nonempty")];
        let split = if depth >= 2 {
            let mut counts = vec![0usize; depth + 1];
            for &v in &lvl {
                counts[level[v]] += 1;
            }
            let half = lvl.len() / 2;
            let mut acc = 0;
            let mut m = 1;
            for (l, c) in counts.iter().enumerate() {
                acc += c;
                if acc >= half {
                    m = l.clamp(1, depth - 1);
                    break;
                }
            }
            Some(m)
        } else {
            None
        };
        let (mut lo, mut sep, mut hi) = (Vec::new(), Vec::new(), Vec::new());
        if let Some(m) = split {
            for &v in &lvl {
                match level[v].cmp(&m) {
                    std::cmp::Ordering::Less => lo.push(v),
                    std::cmp::Ordering::Equal => sep.push(v),
                    std::cmp::Ordering::Greater => hi.push(v),
                }
            }
        }
        for &v in &verts {
            level[v] = NONE;
            in_set[v] = false;
        }
        match split {
            None => order.extend(lvl),
            Some(_) => {
                stack.push(Job::Emit(sep));
                stack.push(Job::Part(hi));
                stack.push(Job::Part(lo));
            }
        }
    }
    order
}

fn bfs(adj: &[Vec<usize>], in_set: &[bool], level: &mut [usize], s: usize) -> Vec<usize> {
    let mut out = vec![s];
    level[s] = 0;
    let mut head = 0;
    while head < out.len() {
        let v = out[head];
        head += 1;
        for &w in &adj[v] {
            if in_set[w] && level[w] == NONE {
                level[w] = level[v] + 1;
                out.push(w);
            }
        }
    }
    out
}

/// Cholesky factor `P A P^T = L L^T` of a symmetric positive definite matrix.
#[derive(Clone, Debug)]
pub struct SparseCholesky<T> {
    n: usize,
    /// position -> original index
    perm: Vec<usize>,
    /// original index -> position
    inv: Vec<usize>,
    parent: Vec<usize>,
    /// Column-compressed L; the diagonal is the first entry of each column.
    lp: Vec<usize>,
    li: Vec<usize>,
    lx: Vec<T>,
}

impl<T: Real> SparseCholesky<T> {
    /// Factor with a nested-dissection order.
    pub fn new(a: &SparseSym<T>) -> Result<Self> {
        let perm = nested_dissection(&adjacency(a));
        Self::with_order(a, perm)
    }

    pub fn with_order(a: &SparseSym<T>, perm: Vec<usize>) -> Result<Self> {
        let n = a.n();
        assert_eq!(perm.len(), n);
        let mut inv = vec![0; n];
        for (k, &p) in perm.iter().enumerate() {
            inv[p] = k;
        }
        // Lower-triangle rows of the permuted matrix: entries (j, v) with j <= k.
        let rows: Vec<Vec<(usize, T)>> = (0..n)
            .map(|k| {
                let (c, v) = a.row(perm[k]);
                let mut r: Vec<(usize, T)> = c
                    .iter()
                    .zip(v)
                    .map(|(&j, &x)| (inv[j], x))
                    .filter(|&(j, _)| j <= k)
                    .collect();
                r.sort_unstable_by_key(|e| e.0);
                r
            })
            .collect();
        // Elimination tree.
        let mut parent = vec![NONE; n];
        let mut ancestor = vec![NONE; n];
        for k in 0..n {
            for &(j, _) in &rows[k] {
                let mut i = j;
                while i != NONE && i < k {
                    let next = ancestor[i];
                    ancestor[i] = k;
                    if next == NONE {
                        parent[i] = k;
                    }
                    i = next;
                }
            }
        }
        // Column counts from row patterns.
        let mut mark = vec![NONE; n];
        let mut counts = vec![1usize; n];
        let mut pattern = Vec::new();
        for k in 0..n {
            ereach(&rows[k], k, &parent, &mut mark, &mut pattern);
            for &j in &pattern {
                counts[j] += 1;
            }
        }
        let mut lp = vec![0usize; n + 1];
        for j in 0..n {
            lp[j + 1] = lp[j] + counts[j];
        }
        let nnz = lp[n];
        let mut li = vec![0usize; nnz];
        let mut lx = vec![T::zero(); nnz];
        let mut next: Vec<usize> = lp[..n].to_vec();
        let mut x = vec![T::zero(); n];
        mark.iter_mut().for_each(|m| *m = NONE);
        for k in 0..n {
            ereach(&rows[k], k, &parent, &mut mark, &mut pattern);
            pattern.sort_unstable();
            let mut d = T::zero();
            for &(j, v) in &rows[k] {
                if j == k {
                    d = v;
                } else {
                    x[j] = v;
                }
            }
            for &j in &pattern {
                let lkj = x[j] / lx[lp[j]];
                x[j] = T::zero();
                for p in lp[j] + 1..next[j] {
                    let r = li[p];
                    x[r] -= lx[p] * lkj;
                }
                d -= lkj * lkj;
                li[next[j]] = k;
                lx[next[j]] = lkj;
                next[j] += 1;
            }
            if !(d > T::zero()) {
                return Err(Error::NotPositiveDefinite {
                    pivot: perm[k],
                    value: d.f64(),
                });
            }
            li[next[k]] = k;
            lx[next[k]] = d.sqrt();
            next[k] += 1;
        }
        Ok(SparseCholesky {
            n,
            perm,
            inv,
            parent,
            lp,
            li,
            lx,
        })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn nnz(&self) -> usize {
        self.lx.len()
    }

    /// Solve A x = b.
    pub fn solve(&self, b: &[T]) -> Vec<T> {
        let mut y: Vec<T> = self.perm.iter().map(|&p| b[p]).collect();
        self.lsolve(&mut y);
        self.ltsolve(&mut y);
        let mut x = vec![T::zero(); self.n];
        for (k, &p) in self.perm.iter().enumerate() {
            x[p] = y[k];
        }
        x
    }

    fn lsolve(&self, y: &mut [T]) {
        for j in 0..self.n {
            let yj = y[j] / self.lx[self.lp[j]];
            y[j] = yj;
            if yj == T::zero() {
                continue;
            }
            for p in self.lp[j] + 1..self.lp[j + 1] {
                y[self.li[p]] -= self.lx[p] * yj;
            }
        }
    }

    fn ltsolve(&self, y: &mut [T]) {
        for j in (0..self.n).rev() {
            let mut s = y[j];
            for p in self.lp[j] + 1..self.lp[j + 1] {
                s -= self.lx[p] * y[self.li[p]];
            }
            y[j] = s / self.lx[self.lp[j]];
        }
    }

    /// Sparse forward solve L w = P b for b given by (original index, value)
    /// pairs. Returns the nonzero pattern (positions, ascending) and values.
    fn sparse_lsolve(&self, b: &[(usize, T)], mark: &mut [bool], work: &mut [T]) -> Vec<(usize, T)> {
        let mut pat = Vec::new();
        for &(i, _) in b {
            let mut j = self.inv[i];
            while j != NONE && !mark[j] {
                mark[j] = true;
                pat.push(j);
                j = self.parent[j];
            }
        }
        pat.sort_unstable();
        for &(i, v) in b {
            work[self.inv[i]] += v;
        }
        let mut out = Vec::with_capacity(pat.len());
        for &j in &pat {
            let wj = work[j] / self.lx[self.lp[j]];
            work[j] = T::zero();
            mark[j] = false;
            if wj != T::zero() {
                for p in self.lp[j] + 1..self.lp[j + 1] {
                    work[self.li[p]] -= self.lx[p] * wj;
                }
                out.push((j, wj));
            }
        }
        out
    }
}

/// Pattern of row k of L: union of etree paths from the nonzeros of A(k, <k).
fn ereach<T>(row: &[(usize, T)], k: usize, parent: &[usize], mark: &mut [usize], out: &mut Vec<usize>) {
    out.clear();
    mark[k] = k;
    for &(j, _) in row {
        let mut i = j;
        while i != NONE && i < k && mark[i] != k {
            mark[i] = k;
            out.push(i);
            i = parent[i];
        }
    }
}

/// Static condensation of a symmetric matrix onto `keep`: the factor of the
/// eliminated block and the dense Schur complement
/// `A_kk - A_ke A_ee^{-1} A_ek`.
#[derive(Clone, Debug)]
pub struct Condensed<T> {
    pub keep: Vec<usize>,
    pub eliminated: Vec<usize>,
    /// Factor of A restricted to `eliminated` (local numbering).
    pub factor: SparseCholesky<T>,
    pub schur: Mat<T>,
}

impl<T: Real> Condensed<T> {
    pub fn new(a: &SparseSym<T>, keep: &[usize]) -> Result<Self> {
        let n = a.n();
        let mut is_keep = vec![usize::MAX; n];
        for (r, &k) in keep.iter().enumerate() {
            is_keep[k] = r;
        }
        let eliminated: Vec<usize> = (0..n).filter(|&i| is_keep[i] == usize::MAX).collect();
        let mut local = vec![usize::MAX; n];
        for (r, &i) in eliminated.iter().enumerate() {
            local[i] = r;
        }
        let a_ee = a.submatrix(&eliminated);
        let factor = SparseCholesky::new(&a_ee)?;
        let nk = keep.len();
        // Rows of W = L^-1 P A_ek, one per kept index.
        let w_rows: Vec<Vec<(usize, T)>> = keep
            .par_iter()
            .map_init(
                || (vec![false; eliminated.len()], vec![T::zero(); eliminated.len()]),
                |(mark, work), &k| {
                    let (c, v) = a.row(k);
                    let b: Vec<(usize, T)> = c
                        .iter()
                        .zip(v)
                        .filter(|(&j, _)| local[j] != usize::MAX)
                        .map(|(&j, &x)| (local[j], x))
                        .collect();
                    factor.sparse_lsolve(&b, mark, work)
                },
            )
            .collect();
        // Transpose: for each eliminated position, the kept rows touching it.
        let mut by_col: Vec<Vec<(usize, T)>> = vec![Vec::new(); eliminated.len()];
        for (r, row) in w_rows.iter().enumerate() {
            for &(j, v) in row {
                by_col[j].push((r, v));
            }
        }
        let mut schur = a.dense_block(keep, keep);
        schur
            .data
            .par_chunks_mut(nk.max(1))
            .zip(w_rows.par_iter())
            .for_each(|(srow, wrow)| {
                for &(j, wv) in wrow {
                    for &(c, wc) in &by_col[j] {
                        srow[c] -= wv * wc;
                    }
                }
            });
        schur.symmetrize();
        Ok(Condensed {
            keep: keep.to_vec(),
            eliminated,
            factor,
            schur,
        })
    }

    /// Extend values on `keep` to the full index set so that the eliminated
    /// rows of A x vanish.
    pub fn extend(&self, a: &SparseSym<T>, values: &[T]) -> Vec<T> {
        let n = a.n();
        let mut x = vec![T::zero(); n];
        for (&k, &v) in self.keep.iter().zip(values) {
            x[k] = v;
        }
        if self.eliminated.is_empty() {
            return x;
        }
        let ax = a.matvec(&x);
        let rhs: Vec<T> = self.eliminated.iter().map(|&i| -ax[i]).collect();
        let xe = self.factor.solve(&rhs);
        for (&i, &v) in self.eliminated.iter().zip(&xe) {
            x[i] = v;
        }
        x
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::dense::{cholesky, solve_lower, solve_lower_t};
    use crate::linalg::sparse::CooBuilder;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    /// 5-point Laplacian plus identity on an m x m grid.
    fn grid(m: usize) -> SparseSym<f64> {
        let id = |i: usize, j: usize| i * m + j;
        let mut b = CooBuilder::new(m * m);
        for i in 0..m {
            for j in 0..m {
                b.push(id(i, j), id(i, j), 5.0);
                if i + 1 < m {
                    b.push(id(i, j), id(i + 1, j), -1.0);
                    b.push(id(i + 1, j), id(i, j), -1.0);
                }
                if j + 1 < m {
                    b.push(id(i, j), id(i, j + 1), -1.0);
                    b.push(id(i, j + 1), id(i, j), -1.0);
                }
            }
        }
        b.build()
    }

    #[test]
    fn ordering_is_a_permutation() {
        let a = grid(30);
        let mut p = nested_dissection(&adjacency(&a));
        p.sort_unstable();
        assert_eq!(p, (0..900).collect::<Vec<_>>());
    }

    #[test]
    fn solve_matches_dense() {
        let a = grid(17);
        let f = SparseCholesky::new(&a).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let b: Vec<f64> = (0..a.n()).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let x = f.solve(&b);
        let r = a.matvec(&x);
        for (ri, bi) in r.iter().zip(&b) {
            assert!((ri - bi).abs() < 1e-12);
        }
        let l = cholesky(&a.to_dense()).unwrap();
        let mut y = b.clone();
        solve_lower(&l, &mut y);
        solve_lower_t(&l, &mut y);
        for (xi, yi) in x.iter().zip(&y) {
            assert!((xi - yi).abs() < 1e-12);
        }
        // nested dissection keeps fill well below the dense count
        assert!(f.nnz() < a.n() * a.n() / 8);
    }

    #[test]
    fn schur_matches_dense_formula() {
        let a = grid(9);
        let keep: Vec<usize> = (0..9).chain(72..81).collect();
        let c = Condensed::new(&a, &keep).unwrap();
        let d = a.to_dense();
        let el = &c.eliminated;
        let aee = Mat::from_fn(el.len(), el.len(), |i, j| d[(el[i], el[j])]);
        let l = cholesky(&aee).unwrap();
        for (r, &kr) in keep.iter().enumerate() {
            for (s, &ks) in keep.iter().enumerate() {
                let mut x: Vec<f64> = el.iter().map(|&i| d[(i, ks)]).collect();
                solve_lower(&l, &mut x);
                solve_lower_t(&l, &mut x);
                let corr: f64 = el.iter().zip(&x).map(|(&i, xi)| d[(kr, i)] * xi).sum();
                assert!((c.schur[(r, s)] - (d[(kr, ks)] - corr)).abs() < 1e-13);
            }
        }
        // extension zeroes the eliminated residual
        let vals: Vec<f64> = (0..keep.len()).map(|i| (i as f64).sin()).collect();
        let x = c.extend(&a, &vals);
        let ax = a.matvec(&x);
        for &i in el {
            assert!(ax[i].abs() < 1e-13);
        }
    }

    #[test]
    fn indefinite_reported_with_original_index() {
        let mut b = CooBuilder::new(3);
        b.push(0, 0, 1.0);
        b.push(1, 1, -1.0);
        b.push(2, 2, 1.0);
        match SparseCholesky::new(&b.build()) {
            Err(Error::NotPositiveDefinite { pivot, .. }) => assert_eq!(pivot, 1),
            r => panic!("{r:?}"),
        }
    }
}
