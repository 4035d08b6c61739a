//! Small dense matrices and the symmetric eigendecomposition.
//!
//! The statistical machinery only ever manipulates p×p matrices with p ≤ 10
//! (p = 2 for the shipped models), so a compact row-major implementation
//! with Gauss–Jordan inversion and cyclic Jacobi eigendecomposition is both
//! simpler and more predictable than a general linear-algebra dependency.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use crate::numerics::fmath;
use crate::{Error, Result};

/// Dense row-major matrix of `f64`.
#[derive(Debug, Clone, PartialEq)]
pub struct Mat {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl Mat {
    /// Zero matrix of the given shape.
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Mat { rows, cols, data: vec![0.0; rows * cols] }
    }

    /// Identity matrix of order `n`.
    pub fn identity(n: usize) -> Self {
        let mut m = Mat::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = 1.0;
        }
        m
    }

    /// Build from a row-major data vector.
    ///
    /// # Panics
    /// Panics if `data.len() != rows * cols`.
    pub fn from_vec(rows: usize, cols: usize, data: Vec<f64>) -> Self {
        assert_eq!(data.len(), rows * cols, "matrix data length mismatch");
        Mat { rows, cols, data }
    }

    /// Build from nested row slices.
    pub fn from_rows(rows: &[&[f64]]) -> Self {
        let r = rows.len();
        let c = if r == 0 { 0 } else { rows[0].len() };
        let mut data = Vec::with_capacity(r * c);
        for row in rows {
            assert_eq!(row.len(), c, "ragged rows");
            data.extend_from_slice(row);
        }
        Mat { rows: r, cols: c, data }
    }

    /// Diagonal matrix from a slice.
    pub fn diag(d: &[f64]) -> Self {
        let mut m = Mat::zeros(d.len(), d.len());
        for (i, &v) in d.iter().enumerate() {
            m[(i, i)] = v;
        }
        m
    }

    /// Column vector (n×1) from a slice.
    pub fn col_vec(v: &[f64]) -> Self {
        Mat { rows: v.len(), cols: 1, data: v.to_vec() }
    }

    /// Number of rows.
    pub fn rows(&self) -> usize {
        self.rows
    }

    /// Number of columns.
    pub fn cols(&self) -> usize {
        self.cols
    }

    /// Flat row-major data access.
    pub fn data(&self) -> &[f64] {
        &self.data
    }

    /// Transpose.
    pub fn t(&self) -> Mat {
        let mut out = Mat::zeros(self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                out[(j, i)] = self[(i, j)];
            }
        }
        out
    }

    /// Matrix product `self * other`.
    ///
    /// # Panics
    /// Panics on inner-dimension mismatch.
    pub fn matmul(&self, other: &Mat) -> Mat {
        assert_eq!(self.cols, other.rows, "matmul dimension mismatch");
        let mut out = Mat::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self[(i, k)];
                if a == 0.0 {
                    continue;
                }
                for j in 0..other.cols {
                    out[(i, j)] += a * other[(k, j)];
                }
            }
        }
        out
    }

    /// Matrix–vector product.
    pub fn matvec(&self, v: &[f64]) -> Vec<f64> {
        assert_eq!(self.cols, v.len(), "matvec dimension mismatch");
        let mut out = vec![0.0; self.rows];
        for i in 0..self.rows {
            let mut s = 0.0;
            for j in 0..self.cols {
                s += self[(i, j)] * v[j];
            }
            out[i] = s;
        }
        out
    }

    /// Entrywise sum.
    pub fn add(&self, other: &Mat) -> Mat {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        let data = self.data.iter().zip(&other.data).map(|(a, b)| a + b).collect();
        Mat { rows: self.rows, cols: self.cols, data }
    }

    /// Entrywise difference.
    pub fn sub(&self, other: &Mat) -> Mat {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        let data = self.data.iter().zip(&other.data).map(|(a, b)| a - b).collect();
        Mat { rows: self.rows, cols: self.cols, data }
    }

    /// Scalar multiple.
    pub fn scale(&self, s: f64) -> Mat {
        Mat { rows: self.rows, cols: self.cols, data: self.data.iter().map(|a| a * s).collect() }
    }

    /// Outer product u vᵀ.
    pub fn outer(u: &[f64], v: &[f64]) -> Mat {
        let mut out = Mat::zeros(u.len(), v.len());
        for i in 0..u.len() {
            for j in 0..v.len() {
                out[(i, j)] = u[i] * v[j];
            }
        }
        out
    }

    /// Column `j` as a vector.
    pub fn col(&self, j: usize) -> Vec<f64> {
        (0..self.rows).map(|i| self[(i, j)]).collect()
    }

    /// Largest absolute entry.
    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0, |m, &x| m.max(fmath::abs(x)))
    }

    /// Symmetrized copy (M + Mᵀ)/2; shape must be square.
    pub fn symmetrized(&self) -> Mat {
        assert_eq!(self.rows, self.cols);
        let mut out = self.clone();
        for i in 0..self.rows {
            for j in (i + 1)..self.cols {
                let v = 0.5 * (self[(i, j)] + self[(j, i)]);
                out[(i, j)] = v;
                out[(j, i)] = v;
            }
        }
        out
    }

    /// Quadratic form vᵀ M v.
    pub fn quad_form(&self, v: &[f64]) -> f64 {
        let mv = self.matvec(v);
        v.iter().zip(&mv).map(|(a, b)| a * b).sum()
    }

    /// Inverse by Gauss–Jordan elimination with partial pivoting.
    ///
    /// Returns [`Error::SingularMatrix`] when a pivot falls below
    /// `1e−13 · max_abs` of the input.
    pub fn inverse(&self) -> Result<Mat> {
        if self.rows != self.cols {
            return Err(Error::SingularMatrix { context: format!("non-square {}x{}", self.rows, self.cols) });
        }
        let n = self.rows;
        let scale = self.max_abs().max(f64::MIN_POSITIVE);
        let mut a = self.clone();
        let mut inv = Mat::identity(n);
        for col in 0..n {
            // Partial pivot.
            let mut piv = col;
            let mut best = fmath::abs(a[(col, col)]);
            for r in (col + 1)..n {
                let v = fmath::abs(a[(r, col)]);
                if v > best {
                    best = v;
                    piv = r;
                }
            }
            if best <= 1e-13 * scale {
                return Err(Error::SingularMatrix { context: format!("pivot {best:e} at column {col}") });
            }
            if piv != col {
                for j in 0..n {
                    self::swap(&mut a, piv, col, j);
                    self::swap(&mut inv, piv, col, j);
                }
            }
            let d = a[(col, col)];
            for j in 0..n {
                a[(col, j)] /= d;
                inv[(col, j)] /= d;
            }
            for r in 0..n {
                if r == col {
                    continue;
                }
                let factor = a[(r, col)];
                if factor == 0.0 {
                    continue;
                }
                for j in 0..n {
                    a[(r, j)] -= factor * a[(col, j)];
                    inv[(r, j)] -= factor * inv[(col, j)];
                }
            }
        }
        Ok(inv)
    }

    /// Maximum relative asymmetry max |M_ij − M_ji| / max_abs.
    pub fn asymmetry(&self) -> f64 {
        assert_eq!(self.rows, self.cols);
        let scale = self.max_abs();
        if scale == 0.0 {
            return 0.0;
        }
        let mut worst = 0.0f64;
        for i in 0..self.rows {
            for j in (i + 1)..self.cols {
                worst = worst.max(fmath::abs(self[(i, j)] - self[(j, i)]) / scale);
            }
        }
        worst
    }
}

fn swap(m: &mut Mat, r1: usize, r2: usize, j: usize) {
    let t = m[(r1, j)];
    m[(r1, j)] = m[(r2, j)];
    m[(r2, j)] = t;
}

impl core::ops::Index<(usize, usize)> for Mat {
    type Output = f64;
    #[inline]
    fn index(&self, (i, j): (usize, usize)) -> &f64 {
        &self.data[i * self.cols + j]
    }
}

impl core::ops::IndexMut<(usize, usize)> for Mat {
    #[inline]
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut f64 {
        &mut self.data[i * self.cols + j]
    }
}

/// Eigendecomposition of a symmetric matrix by the cyclic Jacobi method.
///
/// Returns eigenvalues in **descending** order together with the matrix of
/// orthonormal eigenvectors stored column-wise in the same order, so that
/// `M = V diag(λ) Vᵀ`.
///
/// # Errors
/// [`Error::NotSymmetric`] when the relative asymmetry exceeds `1e−10`.
pub fn symmetric_eigen(m: &Mat) -> Result<(Vec<f64>, Mat)> {
    if m.rows() != m.cols() {
        return Err(Error::NotSymmetric { max_asymmetry: f64::INFINITY });
    }
    let asym = m.asymmetry();
    if asym > 1e-10 {
        return Err(Error::NotSymmetric { max_asymmetry: asym });
    }
    let n = m.rows();
    let mut a = m.symmetrized();
    let mut v = Mat::identity(n);

    let off = |a: &Mat| -> f64 {
        let mut s = 0.0;
        for i in 0..n {
            for j in (i + 1)..n {
                s += a[(i, j)] * a[(i, j)];
            }
        }
        s
    };
    let scale = a.max_abs().max(f64::MIN_POSITIVE);
    let tol = (1e-15 * scale) * (1e-15 * scale) * (n * n) as f64;

    for _sweep in 0..100 {
        if off(&a) <= tol {
            break;
        }
        for p in 0..n {
            for q in (p + 1)..n {
                let apq = a[(p, q)];
                if fmath::abs(apq) <= 1e-300 {
                    continue;
                }
                let app = a[(p, p)];
                let aqq = a[(q, q)];
                let theta = 0.5 * (aqq - app) / apq;
                // tan of the rotation angle, stable formula.
                let t = if theta >= 0.0 {
                    1.0 / (theta + fmath::sqrt(1.0 + theta * theta))
                } else {
                    -1.0 / (-theta + fmath::sqrt(1.0 + theta * theta))
                };
                let c = 1.0 / fmath::sqrt(1.0 + t * t);
                let s = t * c;
                for k in 0..n {
                    let akp = a[(k, p)];
                    let akq = a[(k, q)];
                    a[(k, p)] = c * akp - s * akq;
                    a[(k, q)] = s * akp + c * akq;
                }
                for k in 0..n {
                    let apk = a[(p, k)];
                    let aqk = a[(q, k)];
                    a[(p, k)] = c * apk - s * aqk;
                    a[(q, k)] = s * apk + c * aqk;
                }
                for k in 0..n {
                    let vkp = v[(k, p)];
                    let vkq = v[(k, q)];
                    v[(k, p)] = c * vkp - s * vkq;
                    v[(k, q)] = s * vkp + c * vkq;
                }
            }
        }
    }

    let mut order: Vec<usize> = (0..n).collect();
    let eigs: Vec<f64> = (0..n).map(|i| a[(i, i)]).collect();
    order.sort_by(|&i, &j| eigs[j].partial_cmp(&eigs[i]).unwrap_or(core::cmp::Ordering::Equal));
    let sorted: Vec<f64> = order.iter().map(|&i| eigs[i]).collect();
    let mut vs = Mat::zeros(n, n);
    for (newcol, &oldcol) in order.iter().enumerate() {
        for r in 0..n {
            vs[(r, newcol)] = v[(r, oldcol)];
        }
    }
    Ok((sorted, vs))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::{assert_abs_diff_eq, assert_relative_eq};

    #[test]
    fn matmul_and_inverse_round_trip() {
        let m = Mat::from_rows(&[&[2.0, 1.0, 0.3], &[1.0, 3.0, -0.5], &[0.3, -0.5, 1.7]]);
        let inv = m.inverse().unwrap();
        let id = m.matmul(&inv);
        for i in 0..3 {
            for j in 0..3 {
                let expected = if i == j { 1.0 } else { 0.0 };
                assert_abs_diff_eq!(id[(i, j)], expected, epsilon = 1e-12);
            }
        }
    }

    #[test]
    fn inverse_rejects_singular() {
        let m = Mat::from_rows(&[&[1.0, 2.0], &[2.0, 4.0]]);
        assert!(matches!(m.inverse(), Err(Error::SingularMatrix { .. })));
    }

    #[test]
    fn eigen_identity_and_diag() {
        let (eigs, _) = symmetric_eigen(&Mat::identity(2)).unwrap();
        assert_eq!(eigs, alloc::vec![1.0, 1.0]);

        let (eigs, v) = symmetric_eigen(&Mat::diag(&[3.0, 0.0])).unwrap();
        assert_eq!(eigs, alloc::vec![3.0, 0.0]);
        assert_abs_diff_eq!(fmath::abs(v[(0, 0)]), 1.0, epsilon = 1e-14);
    }

    #[test]
    fn eigen_known_2x2() {
        // [[2,1],[1,2]] has eigenvalues 3 and 1.
        let (eigs, v) = symmetric_eigen(&Mat::from_rows(&[&[2.0, 1.0], &[1.0, 2.0]])).unwrap();
        assert_relative_eq!(eigs[0], 3.0, max_relative = 1e-12);
        assert_relative_eq!(eigs[1], 1.0, max_relative = 1e-12);
        // Eigenvector for 3 is (1,1)/√2 up to sign.
        assert_abs_diff_eq!(fmath::abs(v[(0, 0)]) - fmath::abs(v[(1, 0)]), 0.0, epsilon = 1e-12);
    }

    #[test]
    fn eigen_rejects_asymmetric() {
        let m = Mat::from_rows(&[&[1.0, 0.5], &[0.0, 1.0]]);
        assert!(matches!(symmetric_eigen(&m), Err(Error::NotSymmetric { .. })));
    }

    #[test]
    fn eigen_reconstructs() {
        let m = Mat::from_rows(&[
            &[4.0, 1.2, -0.8, 0.1],
            &[1.2, 3.0, 0.4, -0.2],
            &[-0.8, 0.4, 2.5, 0.9],
            &[0.1, -0.2, 0.9, 1.8],
        ]);
        let (eigs, v) = symmetric_eigen(&m).unwrap();
        let rec = v.matmul(&Mat::diag(&eigs)).matmul(&v.t());
        let err = rec.sub(&m).max_abs();
        assert!(err <= 1e-8 * m.max_abs(), "reconstruction error {err}");
        // Orthonormality.
        let vtv = v.t().matmul(&v);
        assert!(vtv.sub(&Mat::identity(4)).max_abs() < 1e-10);
        // Descending order.
        for w in eigs.windows(2) {
            assert!(w[0] >= w[1]);
        }
    }

    #[test]
    fn quad_form_and_outer() {
        let m = Mat::outer(&[1.0, 2.0], &[1.0, 2.0]);
        assert_abs_diff_eq!(m.quad_form(&[3.0, -1.0]), 1.0, epsilon = 1e-14); // (3-2)² = 1
    }
}
