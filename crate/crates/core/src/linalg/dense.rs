//! Small dense kernels: Cholesky, triangular solves and the symmetric
//! eigensolver (Householder tridiagonalization followed by implicit QL).

use std::ops::{Index, IndexMut};

use crate::error::{Error, Result};
use crate::scalar::Real;

/// Row-major dense matrix.
#[derive(Clone, Debug, PartialEq)]
pub struct Mat<T> {
    pub rows: usize,
    pub cols: usize,
    pub data: Vec<T>,
}

impl<T: Real> Mat<T> {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Mat {
            rows,
            cols,
            data: vec![T::zero(); rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = T::one();
        }
        m
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> T) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                data.push(f(i, j));
            }
        }
        Mat { rows, cols, data }
    }

    /// Matrix whose columns are the given vectors.
    pub fn from_columns(cols: &[Vec<T>]) -> Self {
        let rows = cols.first().map_or(0, Vec::len);
        Self::from_fn(rows, cols.len(), |i, j| cols[j][i])
    }

    pub fn row(&self, i: usize) -> &[T] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn row_mut(&mut self, i: usize) -> &mut [T] {
        &mut self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn column(&self, j: usize) -> Vec<T> {
        (0..self.rows).map(|i| self[(i, j)]).collect()
    }

    pub fn transpose(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |i, j| self[(j, i)])
    }

    pub fn matvec(&self, x: &[T]) -> Vec<T> {
        assert_eq!(x.len(), self.cols);
        (0..self.rows).map(|i| crate::scalar::dot(self.row(i), x)).collect()
    }

    pub fn matmul(&self, other: &Self) -> Self {
        assert_eq!(self.cols, other.rows);
        let mut out = Self::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self[(i, k)];
                if a == T::zero() {
                    continue;
                }
                let (src, dst) = (other.row(k), &mut out.data[i * other.cols..(i + 1) * other.cols]);
                for (d, s) in dst.iter_mut().zip(src) {
                    *d += a * *s;
                }
            }
        }
        out
    }

    pub fn max_abs(&self) -> T {
        crate::scalar::norm_inf(&self.data)
    }

    /// Largest |A_ij - A_ji|.
    pub fn asymmetry(&self) -> T {
        let mut m = T::zero();
        for i in 0..self.rows {
            for j in 0..i {
                m = m.max((self[(i, j)] - self[(j, i)]).abs());
            }
        }
        m
    }

    pub fn symmetrize(&mut self) {
        let two = T::of(2.0);
        for i in 0..self.rows {
            for j in 0..i {
                let v = (self[(i, j)] + self[(j, i)]) / two;
                self[(i, j)] = v;
                self[(j, i)] = v;
            }
        }
    }

    pub fn cast<U: Real>(&self) -> Mat<U> {
        Mat {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|v| U::of(v.f64())).collect(),
        }
    }
}

impl<T> Index<(usize, usize)> for Mat<T> {
    type Output = T;
    fn index(&self, (i, j): (usize, usize)) -> &T {
        &self.data[i * self.cols + j]
    }
}

impl<T> IndexMut<(usize, usize)> for Mat<T> {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut T {
        &mut self.data[i * self.cols + j]
    }
}

/// Lower Cholesky factor of a symmetric positive definite matrix.
pub fn cholesky<T: Real>(a: &Mat<T>) -> Result<Mat<T>> {
    let n = a.rows;
    let mut l = Mat::zeros(n, n);
    for j in 0..n {
        let mut d = a[(j, j)];
        for k in 0..j {
            d -= l[(j, k)] * l[(j, k)];
        }
        if !(d > T::zero()) {
            return Err(Error::NotPositiveDefinite {
                pivot: j,
                value: d.f64(),
            });
        }
        let d = d.sqrt();
        l[(j, j)] = d;
        for i in j + 1..n {
            let mut s = a[(i, j)];
            let (ri, rj) = (&l.data[i * n..i * n + j], &l.data[j * n..j * n + j]);
            for k in 0..j {
                s -= ri[k] * rj[k];
            }
            l[(i, j)] = s / d;
        }
    }
    Ok(l)
}

/// Solve L x = b in place.
pub fn solve_lower<T: Real>(l: &Mat<T>, b: &mut [T]) {
    for i in 0..l.rows {
        let mut s = b[i];
        let row = l.row(i);
        for k in 0..i {
            s -= row[k] * b[k];
        }
        b[i] = s / row[i];
    }
}

/// Solve L^T x = b in place.
pub fn solve_lower_t<T: Real>(l: &Mat<T>, b: &mut [T]) {
    let n = l.rows;
    for i in (0..n).rev() {
        b[i] /= l[(i, i)];
        let bi = b[i];
        let row = l.row(i);
        for k in 0..i {
            b[k] -= row[k] * bi;
        }
    }
}

/// Eigen-decomposition of a symmetric matrix: ascending eigenvalues and
/// the matching orthonormal eigenvectors as the rows of the returned matrix.
pub fn sym_eigen<T: Real>(a: &Mat<T>) -> Result<(Vec<T>, Mat<T>)> {
    let n = a.rows;
    assert_eq!(n, a.cols);
    if n == 0 {
        return Ok((Vec::new(), Mat::zeros(0, 0)));
    }
    let mut v = a.clone();
    v.symmetrize();
    let mut d = vec![T::zero(); n];
    let mut e = vec![T::zero(); n];
    tred2(&mut v, &mut d, &mut e);
    let mut z = v.transpose();
    tql2(&mut z, &mut d, &mut e)?;
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| d[i].partial_cmp(&d[j]).unwrap_or(std::cmp::Ordering::Equal));
    let vals = order.iter().map(|&i| d[i]).collect();
    let mut vecs = Mat::zeros(n, n);
    for (r, &i) in order.iter().enumerate() {
        vecs.row_mut(r).copy_from_slice(z.row(i));
    }
    Ok((vals, vecs))
}

/// Householder reduction to tridiagonal form (EISPACK tred2 layout).
fn tred2<T: Real>(v: &mut Mat<T>, d: &mut [T], e: &mut [T]) {
    let n = v.rows;
    let zero = T::zero();
    for j in 0..n {
        d[j] = v[(n - 1, j)];
    }
    for i in (1..n).rev() {
        let mut scale = zero;
        let mut h = zero;
        for k in 0..i {
            scale += d[k].abs();
        }
        if scale == zero {
            e[i] = d[i - 1];
            for j in 0..i {
                d[j] = v[(i - 1, j)];
                v[(i, j)] = zero;
                v[(j, i)] = zero;
            }
        } else {
            for k in 0..i {
                d[k] /= scale;
                h += d[k] * d[k];
            }
            let mut f = d[i - 1];
            let mut g = h.sqrt();
            if f > zero {
                g = -g;
            }
            e[i] = scale * g;
            h -= f * g;
            d[i - 1] = f - g;
            for ej in e.iter_mut().take(i) {
                *ej = zero;
            }
            for j in 0..i {
                f = d[j];
                v[(j, i)] = f;
                g = e[j] + v[(j, j)] * f;
                for k in j + 1..i {
                    g += v[(k, j)] * d[k];
                    e[k] += v[(k, j)] * f;
                }
                e[j] = g;
            }
            f = zero;
            for j in 0..i {
                e[j] /= h;
                f += e[j] * d[j];
            }
            let hh = f / (h + h);
            for j in 0..i {
                e[j] -= hh * d[j];
            }
            for j in 0..i {
                f = d[j];
                g = e[j];
                for k in j..i {
                    let t = f * e[k] + g * d[k];
                    v[(k, j)] -= t;
                }
                d[j] = v[(i - 1, j)];
                v[(i, j)] = zero;
            }
        }
        d[i] = h;
    }
    for i in 0..n - 1 {
        v[(n - 1, i)] = v[(i, i)];
        v[(i, i)] = T::one();
        let h = d[i + 1];
        if h != zero {
            for k in 0..=i {
                d[k] = v[(k, i + 1)] / h;
            }
            for j in 0..=i {
                let mut g = zero;
                for k in 0..=i {
                    g += v[(k, i + 1)] * v[(k, j)];
                }
                for k in 0..=i {
                    let t = g * d[k];
                    v[(k, j)] -= t;
                }
            }
        }
        for k in 0..=i {
            v[(k, i + 1)] = zero;
        }
    }
    for j in 0..n {
        d[j] = v[(n - 1, j)];
        v[(n - 1, j)] = zero;
    }
    v[(n - 1, n - 1)] = T::one();
    e[0] = zero;
}

/// Implicit QL on the tridiagonal (d, e); `z` holds eigenvectors as rows.
fn tql2<T: Real>(z: &mut Mat<T>, d: &mut [T], e: &mut [T]) -> Result<()> {
    let n = d.len();
    let zero = T::zero();
    for i in 1..n {
        e[i - 1] = e[i];
    }
    e[n - 1] = zero;
    let mut f = zero;
    let mut tst1 = zero;
    let eps = T::eps();
    let max_iter = 60 * n.max(1);
    for l in 0..n {
        tst1 = tst1.max(d[l].abs() + e[l].abs());
        let mut m = l;
        while m < n - 1 && e[m].abs() > eps * tst1 {
            m += 1;
        }
        if m > l {
            let mut iter = 0;
            loop {
                iter += 1;
                if iter > max_iter {
                    return Err(Error::NoConvergence {
                        op: "spectral.dense_eigen",
                        iterations: iter,
                        residual: e[l].abs().f64(),
                    });
                }
                let g = d[l];
                let mut p = (d[l + 1] - g) / (T::of(2.0) * e[l]);
                let mut r = p.hypot(T::one());
                if p < zero {
                    r = -r;
                }
                d[l] = e[l] / (p + r);
                d[l + 1] = e[l] * (p + r);
                let dl1 = d[l + 1];
                let mut h = g - d[l];
                for di in d.iter_mut().skip(l + 2) {
                    *di -= h;
                }
                f += h;
                p = d[m];
                let mut c = T::one();
                let mut c2 = c;
                let mut c3 = c;
                let el1 = e[l + 1];
                let mut s = zero;
                let mut s2 = zero;
                for i in (l..m).rev() {
                    c3 = c2;
                    c2 = c;
                    s2 = s;
                    let g = c * e[i];
                    h = c * p;
                    r = p.hypot(e[i]);
                    e[i + 1] = s * r;
                    s = e[i] / r;
                    c = p / r;
                    p = c * d[i] - s * g;
                    d[i + 1] = h + s * (c * g + s * d[i]);
                    // rotate eigenvector rows i and i+1
                    let (lo, hi) = z.data.split_at_mut((i + 1) * n);
                    let zi = &mut lo[i * n..];
                    let zi1 = &mut hi[..n];
                    for k in 0..n {
                        let t = zi1[k];
                        zi1[k] = s * zi[k] + c * t;
                        zi[k] = c * zi[k] - s * t;
                    }
                }
                p = -s * s2 * c3 * el1 * e[l] / dl1;
                e[l] = s * p;
                d[l] = c * p;
                if e[l].abs() <= eps * tst1 {
                    break;
                }
            }
        }
        d[l] += f;
        e[l] = zero;
    }
    Ok(())
}

/// Generalized symmetric-definite eigenproblem A v = λ B v with B positive
/// definite. Returns ascending eigenvalues and B-orthonormal eigenvectors
/// (rows of the returned matrix).
pub fn gen_sym_eigen<T: Real>(a: &Mat<T>, b: &Mat<T>) -> Result<(Vec<T>, Mat<T>)> {
    let n = a.rows;
    let l = cholesky(b)?;
    // C = L^-1 A L^-T, built column by column.
    let mut w = Mat::zeros(n, n); // W = L^-1 A (rows of A are columns by symmetry)
    for j in 0..n {
        let mut col: Vec<T> = a.row(j).to_vec();
        solve_lower(&l, &mut col);
        for i in 0..n {
            w[(i, j)] = col[i];
        }
    }
    let mut c = Mat::zeros(n, n);
    for i in 0..n {
        let mut row: Vec<T> = w.row(i).to_vec();
        solve_lower(&l, &mut row);
        c.row_mut(i).copy_from_slice(&row);
    }
    let (vals, y) = sym_eigen(&c)?;
    let mut vecs = y;
    for r in 0..n {
        solve_lower_t(&l, vecs.row_mut(r));
    }
    Ok((vals, vecs))
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_spd(n: usize, seed: u64) -> Mat<f64> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let g = Mat::from_fn(n, n, |_, _| rng.gen_range(-1.0..1.0));
        let mut a = g.matmul(&g.transpose());
        for i in 0..n {
            a[(i, i)] += n as f64;
        }
        a
    }

    #[test]
    fn tridiagonal_toeplitz_spectrum() {
        // 2 on the diagonal, -1 off: eigenvalues 2 - 2 cos(k pi / (n+1)).
        let n = 12;
        let a = Mat::from_fn(n, n, |i, j| match i.abs_diff(j) {
            0 => 2.0,
            1 => -1.0,
            _ => 0.0,
        });
        let (vals, vecs) = sym_eigen(&a).unwrap();
        for (k, v) in vals.iter().enumerate() {
            let exact = 2.0 - 2.0 * ((k + 1) as f64 * std::f64::consts::PI / (n + 1) as f64).cos();
            assert!((v - exact).abs() < 1e-13);
        }
        let vt = vecs.transpose();
        let gram = vecs.matmul(&vt);
        for i in 0..n {
            for j in 0..n {
                let e = if i == j { 1.0 } else { 0.0 };
                assert!((gram[(i, j)] - e).abs() < 1e-13);
            }
        }
    }

    #[test]
    fn eigenpairs_satisfy_definition() {
        for (n, seed) in [(1, 1), (2, 2), (7, 3), (40, 4)] {
            let a = random_spd(n, seed);
            let (vals, vecs) = sym_eigen(&a).unwrap();
            for k in 0..n {
                let v = vecs.row(k);
                let av = a.matvec(v);
                for i in 0..n {
                    assert!((av[i] - vals[k] * v[i]).abs() < 1e-11 * n as f64);
                }
            }
            assert!(vals.windows(2).all(|w| w[0] <= w[1]));
        }
    }

    #[test]
    fn repeated_eigenvalues() {
        let mut a: Mat<f64> = Mat::identity(6);
        a[(5, 5)] = 3.0;
        let (vals, _) = sym_eigen(&a).unwrap();
        assert_eq!(&vals[..5], &[1.0; 5]);
        assert!((vals[5] - 3.0).abs() < 1e-15);
    }

    #[test]
    fn generalized_is_b_orthonormal() {
        let n = 25;
        let a = random_spd(n, 9);
        let b = random_spd(n, 10);
        let (vals, vecs) = gen_sym_eigen(&a, &b).unwrap();
        for k in 0..n {
            let v = vecs.row(k);
            let (av, bv) = (a.matvec(v), b.matvec(v));
            for i in 0..n {
                assert!((av[i] - vals[k] * bv[i]).abs() < 1e-10);
            }
            for j in 0..n {
                let g = crate::scalar::dot(vecs.row(j), &bv);
                let e = if j == k { 1.0 } else { 0.0 };
                assert!((g - e).abs() < 1e-11);
            }
        }
    }

    #[test]
    fn cholesky_rejects_indefinite() {
        let a = Mat::from_fn(2, 2, |i, j| if i == j { 1.0 } else { 2.0 });
        assert!(matches!(cholesky(&a), Err(Error::NotPositiveDefinite { pivot: 1, .. })));
    }

    #[test]
    fn double_double_eigen() {
        let n = 10;
        let a: Mat<twofloat::TwoFloat> = Mat::from_fn(n, n, |i, j| match i.abs_diff(j) {
            0 => twofloat::TwoFloat::from(2.0),
            1 => twofloat::TwoFloat::from(-1.0),
            _ => twofloat::TwoFloat::from(0.0),
        });
        let (vals, _) = sym_eigen(&a).unwrap();
        let exact = 2.0 - 2.0 * (std::f64::consts::PI / (n + 1) as f64).cos();
        assert!((vals[0].f64() - exact).abs() < 1e-15);
    }
}
