//! Dense linear algebra for Galerkin truncations.
//!
//! Mode counts stay small (at most a few dozen), so a plain row-major matrix
//! with partial-pivot LU covers every solve and determinant the degree and
//! continuation code needs. No attempt at blocking or SIMD; clarity wins at
//! this size.

use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Row-major dense matrix.
#[derive(Debug, Clone)]
pub struct Mat<R> {
    pub rows: usize,
    pub cols: usize,
    pub data: Vec<R>,
}

impl<R: Scalar> Mat<R> {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Mat {
            rows,
            cols,
            data: vec![R::zero(); rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = R::one();
        }
        m
    }

    pub fn from_rows(rows: Vec<Vec<R>>) -> Self {
        let r = rows.len();
        let c = if r == 0 { 0 } else { rows[0].len() };
        let mut data = Vec::with_capacity(r * c);
        for row in rows {
            assert_eq!(row.len(), c, "ragged rows");
            data.extend(row);
        }
        Mat { rows: r, cols: c, data }
    }

    /// y = self * x.
    pub fn matvec(&self, x: &[R]) -> Vec<R> {
        assert_eq!(x.len(), self.cols);
        let mut y = vec![R::zero(); self.rows];
        for i in 0..self.rows {
            let mut acc = R::zero();
            for j in 0..self.cols {
                acc = acc + self[(i, j)] * x[j];
            }
            y[i] = acc;
        }
        y
    }

    /// LU factorization with partial pivoting, in place. Returns the pivot
    /// permutation and its sign, or an error when a pivot column is exactly
    /// zero (the matrix is singular to working precision).
    fn lu_decompose(&mut self) -> Result<(Vec<usize>, i8)> {
        assert_eq!(self.rows, self.cols, "LU needs a square matrix");
        let n = self.rows;
        let mut perm: Vec<usize> = (0..n).collect();
        let mut sign: i8 = 1;
        for k in 0..n {
            let mut p = k;
            let mut best = self[(k, k)].abs();
            for i in (k + 1)..n {
                let v = self[(i, k)].abs();
                if v > best {
                    best = v;
                    p = i;
                }
            }
            if best == R::zero() {
                return Err(Error::Degenerate {
                    min_abs_det: 0.0,
                    threshold: 0.0,
                });
            }
            if p != k {
                for j in 0..n {
                    self.data.swap(k * n + j, p * n + j);
                }
                perm.swap(k, p);
                sign = -sign;
            }
            let pivot = self[(k, k)];
            for i in (k + 1)..n {
                let factor = self[(i, k)] / pivot;
                self[(i, k)] = factor;
                for j in (k + 1)..n {
                    let upd = self[(i, j)] - factor * self[(k, j)];
                    self[(i, j)] = upd;
                }
            }
        }
        Ok((perm, sign))
    }

    /// Determinant via LU. Zero for an exactly singular matrix.
    pub fn det(&self) -> R {
        let mut lu = self.clone();
        match lu.lu_decompose() {
            Ok((_, sign)) => {
                let mut d = if sign > 0 { R::one() } else { -R::one() };
                for k in 0..lu.rows {
                    d = d * lu[(k, k)];
                }
                d
            }
            Err(_) => R::zero(),
        }
    }

    /// Solves self * x = b. Fails on an exactly singular matrix.
    pub fn solve(&self, b: &[R]) -> Result<Vec<R>> {
        if b.len() != self.rows {
            return Err(Error::DimensionMismatch {
                expected: self.rows,
                got: b.len(),
            });
        }
        let n = self.rows;
        let mut lu = self.clone();
        let (perm, _) = lu.lu_decompose()?;
        let mut x: Vec<R> = perm.iter().map(|&pi| b[pi]).collect();
        for i in 1..n {
            let mut acc = x[i];
            for j in 0..i {
                acc = acc - lu[(i, j)] * x[j];
            }
            x[i] = acc;
        }
        for i in (0..n).rev() {
            let mut acc = x[i];
            for j in (i + 1)..n {
                acc = acc - lu[(i, j)] * x[j];
            }
            x[i] = acc / lu[(i, i)];
        }
        Ok(x)
    }
}

impl<R> std::ops::Index<(usize, usize)> for Mat<R> {
    type Output = R;
    #[inline]
    fn index(&self, (i, j): (usize, usize)) -> &R {
        &self.data[i * self.cols + j]
    }
}

impl<R> std::ops::IndexMut<(usize, usize)> for Mat<R> {
    #[inline]
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut R {
        &mut self.data[i * self.cols + j]
    }
}

/// Forward-difference Jacobian of `g` at `x` with per-call step
/// h = sqrt(eps) * (1 + |x|), the step every Jacobian in this crate uses.
pub fn fd_jacobian<R: Scalar>(
    g: &mut dyn FnMut(&[R]) -> Result<Vec<R>>,
    x: &[R],
    norm_x: R,
) -> Result<Mat<R>> {
    let n = x.len();
    let h = R::epsilon().sqrt() * (R::one() + norm_x);
    let gx = g(x)?;
    if gx.len() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            got: gx.len(),
        });
    }
    let mut jac = Mat::zeros(n, n);
    let mut xp = x.to_vec();
    for j in 0..n {
        let saved = xp[j];
        xp[j] = saved + h;
        let gp = g(&xp)?;
        xp[j] = saved;
        for i in 0..n {
            jac[(i, j)] = (gp[i] - gx[i]) / h;
        }
    }
    Ok(jac)
}

pub fn dot<R: Scalar>(a: &[R], b: &[R]) -> R {
    a.iter().zip(b).map(|(&x, &y)| x * y).sum()
}

pub fn norm2<R: Scalar>(a: &[R]) -> R {
    dot(a, a).sqrt()
}

pub fn axpy<R: Scalar>(alpha: R, x: &[R], y: &mut [R]) {
    for (yi, &xi) in y.iter_mut().zip(x) {
        *yi = *yi + alpha * xi;
    }
}
