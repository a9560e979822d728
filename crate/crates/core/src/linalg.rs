//! Dense linear algebra: a small generic matrix that works over jets, plus
//! rank, kernel and projector routines for complex matrices on top of
//! `nalgebra`'s SVD.

use std::ops::{Index, IndexMut};

use nalgebra::DMatrix;

use crate::jet::{Scalar, C64};

/// Row-major dense matrix over any [`Scalar`].
#[derive(Clone, Debug, PartialEq)]
pub struct Mat<S> {
    rows: usize,
    cols: usize,
    data: Vec<S>,
}

impl<S: Scalar> Mat<S> {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Mat {
            rows,
            cols,
            data: vec![S::zero(); rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = S::one();
        }
        m
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> S) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for r in 0..rows {
            for c in 0..cols {
                data.push(f(r, c));
            }
        }
        Mat { rows, cols, data }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn mul(&self, rhs: &Mat<S>) -> Mat<S> {
        assert_eq!(self.cols, rhs.rows, "matrix product shape");
        let mut out = Mat::zeros(self.rows, rhs.cols);
        for r in 0..self.rows {
            for k in 0..self.cols {
                let a = self[(r, k)];
                if a.is_exact_zero() {
                    continue;
                }
                for c in 0..rhs.cols {
                    let b = rhs[(k, c)];
                    out[(r, c)] += a * b;
                }
            }
        }
        out
    }

    pub fn mul_vec(&self, v: &[S]) -> Vec<S> {
        assert_eq!(self.cols, v.len(), "matrix-vector shape");
        (0..self.rows)
            .map(|r| {
                let mut acc = S::zero();
                for (c, &x) in v.iter().enumerate() {
                    acc += self[(r, c)] * x;
                }
                acc
            })
            .collect()
    }

    pub fn add(&self, rhs: &Mat<S>) -> Mat<S> {
        assert_eq!((self.rows, self.cols), (rhs.rows, rhs.cols));
        Mat {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().zip(&rhs.data).map(|(&a, &b)| a + b).collect(),
        }
    }

    pub fn sub(&self, rhs: &Mat<S>) -> Mat<S> {
        assert_eq!((self.rows, self.cols), (rhs.rows, rhs.cols));
        Mat {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().zip(&rhs.data).map(|(&a, &b)| a - b).collect(),
        }
    }

    pub fn scale(&self, c: S) -> Mat<S> {
        Mat {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|&a| c * a).collect(),
        }
    }

    pub fn trace(&self) -> S {
        let mut t = S::zero();
        for i in 0..self.rows.min(self.cols) {
            t += self[(i, i)];
        }
        t
    }

    /// Gauss-Jordan inverse with partial pivoting on the value part.
    pub fn inverse(&self) -> Option<Mat<S>> {
        assert_eq!(self.rows, self.cols, "inverse of a non-square matrix");
        let n = self.rows;
        let mut a = self.clone();
        let mut inv = Mat::identity(n);
        let scale = self.data.iter().map(|x| x.value().norm()).fold(0.0, f64::max);
        for col in 0..n {
            let pivot = (col..n)
                .max_by(|&i, &j| a[(i, col)].value().norm().total_cmp(&a[(j, col)].value().norm()))?;
            if a[(pivot, col)].value().norm() <= 1e-14 * scale.max(1.0) {
                return None;
            }
            if pivot != col {
                a.swap_rows(pivot, col);
                inv.swap_rows(pivot, col);
            }
            let d = a[(col, col)].recip();
            for c in 0..n {
                a[(col, c)] = a[(col, c)] * d;
                inv[(col, c)] = inv[(col, c)] * d;
            }
            for r in 0..n {
                if r == col {
                    continue;
                }
                let f = a[(r, col)];
                if f.is_exact_zero() {
                    continue;
                }
                for c in 0..n {
                    let ac = a[(col, c)];
                    let ic = inv[(col, c)];
                    a[(r, c)] -= f * ac;
                    inv[(r, c)] -= f * ic;
                }
            }
        }
        Some(inv)
    }

    fn swap_rows(&mut self, i: usize, j: usize) {
        for c in 0..self.cols {
            self.data.swap(i * self.cols + c, j * self.cols + c);
        }
    }

    /// Value part as an `nalgebra` matrix.
    pub fn values(&self) -> DMatrix<C64> {
        DMatrix::from_fn(self.rows, self.cols, |r, c| self[(r, c)].value())
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().map(|x| x.value().norm()).fold(0.0, f64::max)
    }
}

impl<S> Index<(usize, usize)> for Mat<S> {
    type Output = S;
    #[inline]
    fn index(&self, (r, c): (usize, usize)) -> &S {
        &self.data[r * self.cols + c]
    }
}

impl<S> IndexMut<(usize, usize)> for Mat<S> {
    #[inline]
    fn index_mut(&mut self, (r, c): (usize, usize)) -> &mut S {
        &mut self.data[r * self.cols + c]
    }
}

/// Default relative threshold for numerical rank decisions.
pub const RANK_TOL: f64 = 1e-9;

/// SVD with a convergence threshold tighter than `nalgebra`'s default,
/// which leaves residuals near `1e-10` on matrices with clustered
/// singular values.
pub fn svd(m: &DMatrix<C64>) -> nalgebra::linalg::SVD<C64, nalgebra::Dyn, nalgebra::Dyn> {
    m.clone()
        .try_svd(true, true, 1e-17, 100_000)
        .unwrap_or_else(|| m.clone().svd(true, true))
}

fn threshold(sv: &[f64], rel: f64) -> f64 {
    rel * sv.iter().copied().fold(1.0, f64::max)
}

/// Numerical rank of `m` from its singular values.
pub fn rank(m: &DMatrix<C64>, rel_tol: f64) -> usize {
    if m.nrows() == 0 || m.ncols() == 0 {
        return 0;
    }
    let sv = svd(m).singular_values;
    let t = threshold(sv.as_slice(), rel_tol);
    sv.iter().filter(|&&s| s > t).count()
}

/// Orthonormal basis (as columns) of the row space of `m`.
pub fn row_space(m: &DMatrix<C64>, rel_tol: f64) -> DMatrix<C64> {
    if m.nrows() == 0 || m.ncols() == 0 {
        return DMatrix::zeros(m.ncols(), 0);
    }
    let dec = svd(m);
    let v_t = dec.v_t.expect("requested V^T");
    let sv = dec.singular_values;
    let t = threshold(sv.as_slice(), rel_tol);
    let keep: Vec<usize> = (0..sv.len()).filter(|&i| sv[i] > t).collect();
    DMatrix::from_fn(m.ncols(), keep.len(), |r, c| v_t[(keep[c], r)].conj())
}

/// Orthonormal basis (as columns) of the kernel of `m`.
pub fn kernel(m: &DMatrix<C64>, rel_tol: f64) -> DMatrix<C64> {
    let n = m.ncols();
    // pad to a square so the SVD returns a full right factor
    let rows = m.nrows().max(n);
    let mut padded = DMatrix::<C64>::zeros(rows, n);
    padded.view_mut((0, 0), (m.nrows(), n)).copy_from(m);
    if n == 0 {
        return DMatrix::zeros(0, 0);
    }
    let dec = svd(&padded);
    let v_t = dec.v_t.expect("requested V^T");
    let sv = dec.singular_values;
    let t = threshold(sv.as_slice(), rel_tol);
    let null: Vec<usize> = (0..sv.len()).filter(|&i| sv[i] <= t).collect();
    DMatrix::from_fn(n, null.len(), |r, c| v_t[(null[c], r)].conj())
}

/// Orthogonal projector onto the kernel of `m`.
pub fn kernel_projector(m: &DMatrix<C64>, rel_tol: f64) -> DMatrix<C64> {
    let v = row_space(m, rel_tol);
    DMatrix::identity(m.ncols(), m.ncols()) - &v * v.adjoint()
}

/// Least-squares solution of `a x = b` through the pseudo-inverse.
pub fn solve_least_squares(a: &DMatrix<C64>, b: &[C64], rel_tol: f64) -> Vec<C64> {
    let dec = svd(a);
    let t = threshold(dec.singular_values.as_slice(), rel_tol);
    let rhs = nalgebra::DVector::from_column_slice(b);
    dec.solve(&rhs, t)
        .expect("SVD factors were requested")
        .iter()
        .copied()
        .collect()
}

pub fn max_abs(m: &DMatrix<C64>) -> f64 {
    m.iter().map(|x| x.norm()).fold(0.0, f64::max)
}

pub fn norm(v: &[C64]) -> f64 {
    v.iter().map(|x| x.norm_sqr()).sum::<f64>().sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::jet::Jet;

    fn c(x: f64, y: f64) -> C64 {
        C64::new(x, y)
    }

    #[test]
    fn inverse_round_trips() {
        let m = Mat::from_fn(3, 3, |r, cc| c((r * 3 + cc) as f64 % 5.0 + 0.3, (r as f64) - cc as f64));
        let inv = m.inverse().unwrap();
        let e = m.mul(&inv).sub(&Mat::identity(3));
        assert!(e.max_abs() < 1e-12);
    }

    #[test]
    fn singular_has_no_inverse() {
        let m = Mat::from_fn(2, 2, |_, _| c(1.0, 0.0));
        assert!(m.inverse().is_none());
    }

    #[test]
    fn jet_inverse_differentiates() {
        // d/dx of 1/(1+x) at x = 0.5 is -1/(1.5)^2
        let x = Jet::seed(&[0.5])[0];
        let m = Mat::from_fn(1, 1, |_, _| x + 1.0);
        let inv = m.inverse().unwrap();
        assert!((inv[(0, 0)].grad(0).re + 1.0 / 2.25).abs() < 1e-14);
    }

    #[test]
    fn rank_and_kernel_agree() {
        let m = DMatrix::from_row_slice(2, 3, &[c(1.0, 0.0), c(2.0, 0.0), c(3.0, 0.0), c(2.0, 0.0), c(4.0, 0.0), c(6.0, 0.0)]);
        assert_eq!(rank(&m, RANK_TOL), 1);
        let k = kernel(&m, RANK_TOL);
        assert_eq!(k.ncols(), 2);
        assert!(max_abs(&(&m * &k)) < 1e-12);
        let p = kernel_projector(&m, RANK_TOL);
        assert!(max_abs(&(&p * &p - &p)) < 1e-12);
        assert!(max_abs(&(&m * &p)) < 1e-12);
    }
}
