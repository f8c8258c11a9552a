//! Symmetric sparse matrices stored row-compressed with the full pattern.

use std::io::Write;

use super::dense::Mat;
use crate::error::Result;
use crate::scalar::Real;

/// Symmetric matrix in compressed-row form; both triangles are stored and
/// column indices within a row are sorted.
#[derive(Clone, Debug, PartialEq)]
pub struct SparseSym<T> {
    n: usize,
    row_ptr: Vec<usize>,
    col: Vec<usize>,
    val: Vec<T>,
}

/// Coordinate accumulator; duplicates are summed on compression.
#[derive(Clone, Debug, Default)]
pub struct CooBuilder<T> {
    n: usize,
    entries: Vec<(usize, usize, T)>,
}

impl<T: Real> CooBuilder<T> {
    pub fn new(n: usize) -> Self {
        CooBuilder {
            n,
            entries: Vec::new(),
        }
    }

    /// Add `v` at (i, j) only; callers add the mirrored entry themselves.
    pub fn push(&mut self, i: usize, j: usize, v: T) {
        debug_assert!(i < self.n && j < self.n);
        self.entries.push((i, j, v));
    }

    /// Add a symmetric element block on the given global indices.
    pub fn add_block<const K: usize>(&mut self, idx: [usize; K], block: [[T; K]; K]) {
        for a in 0..K {
            for b in 0..K {
                self.entries.push((idx[a], idx[b], block[a][b]));
            }
        }
    }

    pub fn append(&mut self, mut other: CooBuilder<T>) {
        self.entries.append(&mut other.entries);
    }

    pub fn build(mut self) -> SparseSym<T> {
        self.entries.sort_unstable_by(|a, b| (a.0, a.1).cmp(&(b.0, b.1)));
        let mut row_ptr = vec![0usize; self.n + 1];
        let mut col = Vec::with_capacity(self.entries.len());
        let mut val: Vec<T> = Vec::with_capacity(self.entries.len());
        let mut last: Option<(usize, usize)> = None;
        for (i, j, v) in self.entries {
            if last == Some((i, j)) {
                *val.last_mut().expect("entry present") += v;
            } else {
                col.push(j);
                val.push(v);
                row_ptr[i + 1] += 1;
                last = Some((i, j));
            }
        }
        for i in 0..self.n {
            row_ptr[i + 1] += row_ptr[i];
        }
        SparseSym {
            n: self.n,
            row_ptr,
            col,
            val,
        }
    }
}

impl<T: Real> SparseSym<T> {
    pub fn zeros(n: usize) -> Self {
        CooBuilder::new(n).build()
    }

    pub fn from_diagonal(d: &[T]) -> Self {
        let mut b = CooBuilder::new(d.len());
        for (i, &v) in d.iter().enumerate() {
            b.push(i, i, v);
        }
        b.build()
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn nnz(&self) -> usize {
        self.col.len()
    }

    pub fn row(&self, i: usize) -> (&[usize], &[T]) {
        let r = self.row_ptr[i]..self.row_ptr[i + 1];
        (&self.col[r.clone()], &self.val[r])
    }

    pub fn get(&self, i: usize, j: usize) -> T {
        let (c, v) = self.row(i);
        match c.binary_search(&j) {
            Ok(k) => v[k],
            Err(_) => T::zero(),
        }
    }

    pub fn matvec(&self, x: &[T]) -> Vec<T> {
        assert_eq!(x.len(), self.n);
        (0..self.n)
            .map(|i| {
                let (c, v) = self.row(i);
                let mut s = T::zero();
                for (j, a) in c.iter().zip(v) {
                    s += *a * x[*j];
                }
                s
            })
            .collect()
    }

    /// x^T A x
    pub fn quad(&self, x: &[T]) -> T {
        crate::scalar::dot(x, &self.matvec(x))
    }

    /// x^T A y
    pub fn bilinear(&self, x: &[T], y: &[T]) -> T {
        crate::scalar::dot(x, &self.matvec(y))
    }

    /// `alpha * self + beta * other` over the union pattern.
    pub fn combine(&self, alpha: T, other: &SparseSym<T>, beta: T) -> SparseSym<T> {
        assert_eq!(self.n, other.n);
        let mut b = CooBuilder::new(self.n);
        for i in 0..self.n {
            let (c, v) = self.row(i);
            for (j, a) in c.iter().zip(v) {
                b.push(i, *j, alpha * *a);
            }
            let (c, v) = other.row(i);
            for (j, a) in c.iter().zip(v) {
                b.push(i, *j, beta * *a);
            }
        }
        b.build()
    }

    pub fn scaled(&self, s: T) -> SparseSym<T> {
        let mut out = self.clone();
        for v in &mut out.val {
            *v *= s;
        }
        out
    }

    pub fn diagonal(&self) -> Vec<T> {
        (0..self.n).map(|i| self.get(i, i)).collect()
    }

    pub fn row_sums(&self) -> Vec<T> {
        (0..self.n)
            .map(|i| crate::scalar::sum(self.row(i).1.iter().copied()))
            .collect()
    }

    pub fn max_abs(&self) -> T {
        crate::scalar::norm_inf(&self.val)
    }

    /// Largest |A_ij - A_ji| over stored entries.
    pub fn asymmetry(&self) -> T {
        let mut m = T::zero();
        for i in 0..self.n {
            let (c, v) = self.row(i);
            for (j, a) in c.iter().zip(v) {
                m = m.max((*a - self.get(*j, i)).abs());
            }
        }
        m
    }

    /// Principal submatrix on `idx` (in that order).
    pub fn submatrix(&self, idx: &[usize]) -> SparseSym<T> {
        let mut pos = vec![usize::MAX; self.n];
        for (k, &i) in idx.iter().enumerate() {
            pos[i] = k;
        }
        let mut b = CooBuilder::new(idx.len());
        for (k, &i) in idx.iter().enumerate() {
            let (c, v) = self.row(i);
            for (j, a) in c.iter().zip(v) {
                if pos[*j] != usize::MAX {
                    b.push(k, pos[*j], *a);
                }
            }
        }
        b.build()
    }

    /// Dense block with rows `ri` and columns `ci`.
    pub fn dense_block(&self, ri: &[usize], ci: &[usize]) -> Mat<T> {
        let mut pos = vec![usize::MAX; self.n];
        for (k, &j) in ci.iter().enumerate() {
            pos[j] = k;
        }
        let mut m = Mat::zeros(ri.len(), ci.len());
        for (r, &i) in ri.iter().enumerate() {
            let (c, v) = self.row(i);
            for (j, a) in c.iter().zip(v) {
                if pos[*j] != usize::MAX {
                    m[(r, pos[*j])] = *a;
                }
            }
        }
        m
    }

    pub fn to_dense(&self) -> Mat<T> {
        let all: Vec<usize> = (0..self.n).collect();
        self.dense_block(&all, &all)
    }

    pub fn cast<U: Real>(&self) -> SparseSym<U> {
        SparseSym {
            n: self.n,
            row_ptr: self.row_ptr.clone(),
            col: self.col.clone(),
            val: self.val.iter().map(|v| U::of(v.f64())).collect(),
        }
    }

    /// Export in `%%sym-coord n nnz` form (upper triangle, 0-based).
    pub fn write_sym_coord<W: Write>(&self, mut w: W) -> Result<()> {
        let upper: usize = (0..self.n)
            .map(|i| self.row(i).0.iter().filter(|&&j| j >= i).count())
            .sum();
        writeln!(w, "%%sym-coord {} {}", self.n, upper)?;
        for i in 0..self.n {
            let (c, v) = self.row(i);
            for (j, a) in c.iter().zip(v) {
                if *j >= i {
                    writeln!(w, "{} {} {:.16e}", i, j, a.f64())?;
                }
            }
        }
        Ok(())
    }
}

/// Write a dense symmetric matrix in sym-coord form (full upper triangle).
pub fn write_dense_sym_coord<T: Real, W: Write>(m: &Mat<T>, mut w: W) -> Result<()> {
    let n = m.rows;
    writeln!(w, "%%sym-coord {} {}", n, n * (n + 1) / 2)?;
    for i in 0..n {
        for j in i..n {
            writeln!(w, "{} {} {:.16e}", i, j, m[(i, j)].f64())?;
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample() -> SparseSym<f64> {
        let mut b = CooBuilder::new(3);
        b.add_block([0, 1], [[2.0, -1.0], [-1.0, 2.0]]);
        b.add_block([1, 2], [[2.0, -1.0], [-1.0, 2.0]]);
        b.build()
    }

    #[test]
    fn duplicates_are_summed_and_sorted() {
        let a = sample();
        assert_eq!(a.get(1, 1), 4.0);
        assert_eq!(a.get(0, 2), 0.0);
        assert_eq!(a.nnz(), 7);
        assert_eq!(a.row(1).0, &[0, 1, 2]);
        assert_eq!(a.asymmetry(), 0.0);
    }

    #[test]
    fn combine_and_quad() {
        let a = sample();
        let i = SparseSym::from_diagonal(&[1.0, 1.0, 1.0]);
        let c = a.combine(2.0, &i, -1.0);
        assert_eq!(c.get(1, 1), 7.0);
        let x = [1.0, 2.0, 3.0];
        assert_eq!(c.quad(&x), 2.0 * a.quad(&x) - 14.0);
    }

    #[test]
    fn sym_coord_export() {
        let mut out = Vec::new();
        sample().write_sym_coord(&mut out).unwrap();
        let s = String::from_utf8(out).unwrap();
        let mut lines = s.lines();
        assert_eq!(lines.next(), Some("%%sym-coord 3 5"));
        assert_eq!(lines.next(), Some("0 0 2.0000000000000000e0"));
        let mut out = Vec::new();
        write_dense_sym_coord(&sample().to_dense(), &mut out).unwrap();
        assert!(String::from_utf8(out).unwrap().starts_with("%%sym-coord 3 6\n"));
    }

    #[test]
    fn submatrix_keeps_order() {
        let s = sample().submatrix(&[2, 0]);
        assert_eq!(s.get(0, 0), 2.0);
        assert_eq!(s.get(1, 1), 2.0);
        assert_eq!(s.get(0, 1), 0.0);
    }
}
