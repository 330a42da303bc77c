//! Small dense matrices and the symmetric eigensolver.
//!
//! Everything in this crate works with matrices of side ≤ ~16 (spacetime
//! dimensions), so the kernel is a plain row-major `Vec<f64>` matrix with
//! unsophisticated O(d³) algorithms chosen for unconditional stability at these
//! sizes: LU with partial pivoting for determinants/inverses and cyclic Jacobi
//! rotations for the symmetric eigenproblem.
//!
//! Conventions used crate-wide:
//!
//! * `minkowski(d)` is the diagonal form `η = diag(−1, 1, …, 1)`;
//! * eigenvalues are returned ascending;
//! * eigenvectors are columns, deterministically sign-fixed: the component of
//!   largest magnitude is made positive, ties broken by the lowest index;
//! * `op_norm` is the spectral norm `sup_{|v|=1} |Av|`, computed from the
//!   eigenvalues of the matrix itself (symmetric case) or of `AᵀA`.

use crate::error::{Error, Result};
use serde::Serialize;
use std::ops::{Add, Index, IndexMut, Mul, Neg, Sub};

/// Dense row-major matrix of `f64`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Mat {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl Mat {
    /// Matrix of zeros.
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Mat {
            rows,
            cols,
            data: vec![0.0; rows * cols],
        }
    }

    /// Identity matrix of side `n`.
    pub fn identity(n: usize) -> Self {
        let mut m = Mat::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = 1.0;
        }
        m
    }

    /// Diagonal matrix from the given entries.
    pub fn diag(entries: &[f64]) -> Self {
        let mut m = Mat::zeros(entries.len(), entries.len());
        for (i, &e) in entries.iter().enumerate() {
            m[(i, i)] = e;
        }
        m
    }

    /// Build from nested rows; all rows must have equal length.
    pub fn from_rows(rows: &[Vec<f64>]) -> Self {
        let r = rows.len();
        let c = if r == 0 { 0 } else { rows[0].len() };
        let mut data = Vec::with_capacity(r * c);
        for row in rows {
            assert_eq!(row.len(), c, "ragged rows");
            data.extend_from_slice(row);
        }
        Mat { rows: r, cols: c, data }
    }

    /// Build entrywise from a closure `(row, col) -> value`.
    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> f64) -> Self {
        let mut m = Mat::zeros(rows, cols);
        for i in 0..rows {
            for j in 0..cols {
                m[(i, j)] = f(i, j);
            }
        }
        m
    }

    /// Column vector (d×1) from a slice.
    pub fn col_vec(v: &[f64]) -> Self {
        Mat {
            rows: v.len(),
            cols: 1,
            data: v.to_vec(),
        }
    }

    /// Number of rows.
    pub fn rows(&self) -> usize {
        self.rows
    }

    /// Number of columns.
    pub fn cols(&self) -> usize {
        self.cols
    }

    /// True for square matrices.
    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    /// Read-only view of the backing storage (row-major).
    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    /// Mutable view of the backing storage (row-major).
    pub fn as_mut_slice(&mut self) -> &mut [f64] {
        &mut self.data
    }

    /// Row `i` as a slice.
    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    /// Column `j` copied into a new vector.
    pub fn col(&self, j: usize) -> Vec<f64> {
        (0..self.rows).map(|i| self[(i, j)]).collect()
    }

    /// Overwrite column `j`.
    pub fn set_col(&mut self, j: usize, v: &[f64]) {
        assert_eq!(v.len(), self.rows);
        for (i, &x) in v.iter().enumerate() {
            self[(i, j)] = x;
        }
    }

    /// Transpose.
    pub fn t(&self) -> Mat {
        Mat::from_fn(self.cols, self.rows, |i, j| self[(j, i)])
    }

    /// Multiply by a scalar.
    pub fn scale(&self, s: f64) -> Mat {
        Mat {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|x| x * s).collect(),
        }
    }

    /// Matrix-vector product.
    pub fn mul_vec(&self, v: &[f64]) -> Vec<f64> {
        assert_eq!(v.len(), self.cols);
        (0..self.rows)
            .map(|i| self.row(i).iter().zip(v).map(|(a, b)| a * b).sum())
            .collect()
    }

    /// Largest absolute entry.
    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0, |m, x| m.max(x.abs()))
    }

    /// Largest absolute entrywise difference.
    pub fn max_abs_diff(&self, other: &Mat) -> f64 {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        self.data
            .iter()
            .zip(&other.data)
            .fold(0.0, |m, (a, b)| m.max((a - b).abs()))
    }

    /// Frobenius norm.
    pub fn frobenius(&self) -> f64 {
        self.data.iter().map(|x| x * x).sum::<f64>().sqrt()
    }

    /// True when every entry is finite.
    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|x| x.is_finite())
    }

    /// Largest absolute asymmetry `|a_ij − a_ji|`.
    pub fn max_asymmetry(&self) -> f64 {
        let mut worst = 0.0f64;
        for i in 0..self.rows {
            for j in (i + 1)..self.cols.min(self.rows) {
                worst = worst.max((self[(i, j)] - self[(j, i)]).abs());
            }
        }
        worst
    }

    /// Copy with the upper triangle mirrored from the lower one, restoring
    /// exact symmetry. The lower triangle is authoritative.
    pub fn mirror_lower(&self) -> Mat {
        assert!(self.is_square());
        Mat::from_fn(self.rows, self.cols, |i, j| {
            if j > i {
                self[(j, i)]
            } else {
                self[(i, j)]
            }
        })
    }

    /// Determinant via LU with partial pivoting. Returns 0.0 for singular input.
    pub fn det(&self) -> f64 {
        assert!(self.is_square());
        match lu_decompose(self) {
            Some(lu) => lu.det(),
            None => 0.0,
        }
    }

    /// Inverse via LU with partial pivoting; `None` when numerically singular.
    pub fn inverse(&self) -> Option<Mat> {
        assert!(self.is_square());
        let lu = lu_decompose(self)?;
        let n = self.rows;
        let mut inv = Mat::zeros(n, n);
        let mut e = vec![0.0; n];
        for j in 0..n {
            e.iter_mut().for_each(|x| *x = 0.0);
            e[j] = 1.0;
            let x = lu.solve(&e);
            for i in 0..n {
                inv[(i, j)] = x[i];
            }
        }
        Some(inv)
    }

    /// Solve `self · x = b`; `None` when numerically singular.
    pub fn solve(&self, b: &[f64]) -> Option<Vec<f64>> {
        assert!(self.is_square());
        assert_eq!(b.len(), self.rows);
        Some(lu_decompose(self)?.solve(b))
    }
}

impl Index<(usize, usize)> for Mat {
    type Output = f64;
    fn index(&self, (i, j): (usize, usize)) -> &f64 {
        &self.data[i * self.cols + j]
    }
}

impl IndexMut<(usize, usize)> for Mat {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut f64 {
        &mut self.data[i * self.cols + j]
    }
}

impl Add for &Mat {
    type Output = Mat;
    fn add(self, rhs: &Mat) -> Mat {
        assert_eq!((self.rows, self.cols), (rhs.rows, rhs.cols));
        Mat {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().zip(&rhs.data).map(|(a, b)| a + b).collect(),
        }
    }
}

impl Sub for &Mat {
    type Output = Mat;
    fn sub(self, rhs: &Mat) -> Mat {
        assert_eq!((self.rows, self.cols), (rhs.rows, rhs.cols));
        Mat {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().zip(&rhs.data).map(|(a, b)| a - b).collect(),
        }
    }
}

impl Neg for &Mat {
    type Output = Mat;
    fn neg(self) -> Mat {
        self.scale(-1.0)
    }
}

impl Mul for &Mat {
    type Output = Mat;
    fn mul(self, rhs: &Mat) -> Mat {
        assert_eq!(self.cols, rhs.rows, "inner dimensions must agree");
        let mut out = Mat::zeros(self.rows, rhs.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self[(i, k)];
                if a == 0.0 {
                    continue;
                }
                for j in 0..rhs.cols {
                    out[(i, j)] += a * rhs[(k, j)];
                }
            }
        }
        out
    }
}

/// The Minkowski form `η = diag(−1, 1, …, 1)` of side `d`.
pub fn minkowski(d: usize) -> Mat {
    let mut m = Mat::identity(d);
    m[(0, 0)] = -1.0;
    m
}

/// Dot product of two equally long slices.
pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Euclidean norm of a slice.
pub fn norm2(v: &[f64]) -> f64 {
    dot(v, v).sqrt()
}

// ---------------------------------------------------------------------------
// LU decomposition with partial pivoting
// ---------------------------------------------------------------------------

struct Lu {
    /// Combined L (unit lower, below diagonal) and U (upper) factors.
    lu: Mat,
    /// Row permutation applied during pivoting.
    perm: Vec<usize>,
    /// Sign of the permutation, for the determinant.
    sign: f64,
}

fn lu_decompose(a: &Mat) -> Option<Lu> {
    let n = a.rows();
    let mut lu = a.clone();
    let mut perm: Vec<usize> = (0..n).collect();
    let mut sign = 1.0;
    for k in 0..n {
        // Pivot: largest magnitude in column k at or below the diagonal.
        let mut p = k;
        for i in (k + 1)..n {
            if lu[(i, k)].abs() > lu[(p, k)].abs() {
                p = i;
            }
        }
        if lu[(p, k)] == 0.0 {
            return None;
        }
        if p != k {
            for j in 0..n {
                let tmp = lu[(k, j)];
                lu[(k, j)] = lu[(p, j)];
                lu[(p, j)] = tmp;
            }
            perm.swap(k, p);
            sign = -sign;
        }
        let pivot = lu[(k, k)];
        for i in (k + 1)..n {
            let m = lu[(i, k)] / pivot;
            lu[(i, k)] = m;
            for j in (k + 1)..n {
                let s = lu[(k, j)];
                lu[(i, j)] -= m * s;
            }
        }
    }
    Some(Lu { lu, perm, sign })
}

impl Lu {
    fn det(&self) -> f64 {
        let n = self.lu.rows();
        let mut d = self.sign;
        for i in 0..n {
            d *= self.lu[(i, i)];
        }
        d
    }

    fn solve(&self, b: &[f64]) -> Vec<f64> {
        let n = self.lu.rows();
        // Apply the permutation, then forward- and back-substitute.
        let mut x: Vec<f64> = self.perm.iter().map(|&i| b[i]).collect();
        for i in 1..n {
            for j in 0..i {
                x[i] -= self.lu[(i, j)] * x[j];
            }
        }
        for i in (0..n).rev() {
            for j in (i + 1)..n {
                x[i] -= self.lu[(i, j)] * x[j];
            }
            x[i] /= self.lu[(i, i)];
        }
        x
    }
}

// ---------------------------------------------------------------------------
// Symmetric eigendecomposition: cyclic Jacobi rotations
// ---------------------------------------------------------------------------

/// Result of [`sym_eigen`]: ascending eigenvalues and the matching orthonormal
/// eigenvector columns.
#[derive(Clone, Debug)]
pub struct SymEigen {
    /// Eigenvalues, ascending.
    pub values: Vec<f64>,
    /// Orthonormal eigenvectors as columns, in the order of `values`.
    pub vectors: Mat,
}

/// Convergence threshold: off-diagonal Frobenius mass relative to the input.
const JACOBI_REL_TOL: f64 = 1e-14;
/// Cyclic sweeps before giving up (quadratic convergence makes ~6 typical).
const JACOBI_MAX_SWEEPS: usize = 50;

/// Eigendecomposition of a symmetric matrix by cyclic Jacobi rotations.
///
/// The lower triangle is authoritative: the input is mirrored before work, and
/// asymmetry above `1e−12 · max(1, |S|_max)` is rejected. Sweeps run until the
/// off-diagonal Frobenius norm drops below `1e−14 · |S|_F`.
///
/// Output conventions (deterministic): eigenvalues ascending, ties keeping
/// their pre-sort order; each eigenvector's largest-magnitude component is made
/// positive, ties broken by the lowest index.
///
/// # Errors
///
/// `InvalidInput` for non-finite or asymmetric entries or a non-square matrix.
pub fn sym_eigen(s: &Mat) -> Result<SymEigen> {
    if !s.is_square() {
        return Err(Error::InvalidInput(format!(
            "eigendecomposition needs a square matrix, got {}x{}",
            s.rows(),
            s.cols()
        )));
    }
    if !s.is_finite() {
        return Err(Error::InvalidInput(
            "eigendecomposition input has non-finite entries".into(),
        ));
    }
    let scale = s.max_abs().max(1.0);
    if s.max_asymmetry() > 1e-12 * scale {
        return Err(Error::InvalidInput(format!(
            "matrix is not symmetric (asymmetry {:.3e})",
            s.max_asymmetry()
        )));
    }

    let n = s.rows();
    let mut a = s.mirror_lower();
    let mut v = Mat::identity(n);
    let target = JACOBI_REL_TOL * a.frobenius().max(f64::MIN_POSITIVE);

    let mut converged = false;
    for sweep in 0..JACOBI_MAX_SWEEPS {
        // Off-diagonal Frobenius norm (both triangles).
        let mut off = 0.0;
        for p in 0..n {
            for q in (p + 1)..n {
                off += 2.0 * a[(p, q)] * a[(p, q)];
            }
        }
        if off.sqrt() <= target {
            converged = true;
            break;
        }
        // During the first sweeps only annihilate entries above a threshold;
        // this is the classical schedule that guarantees global convergence.
        let threshold = if sweep < 3 {
            0.2 * off / ((n * n) as f64)
        } else {
            0.0
        };
        for p in 0..n {
            for q in (p + 1)..n {
                let apq = a[(p, q)];
                if apq * apq <= threshold {
                    continue;
                }
                let diff = a[(q, q)] - a[(p, p)];
                // tan of the rotation angle; the guarded form avoids overflow
                // when the off-diagonal entry dominates the diagonal gap.
                let t = if apq.abs() < diff.abs() * 1e-36 {
                    apq / diff
                } else {
                    let theta = 0.5 * diff / apq;
                    let mut t = 1.0 / (theta.abs() + (1.0 + theta * theta).sqrt());
                    if theta < 0.0 {
                        t = -t;
                    }
                    t
                };
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s_ = t * c;
                let tau = s_ / (1.0 + c);
                let h = t * apq;

                a[(p, p)] -= h;
                a[(q, q)] += h;
                a[(p, q)] = 0.0;
                a[(q, p)] = 0.0;
                // Rotate the remaining off-diagonal entries of rows/cols p, q.
                for i in 0..n {
                    if i != p && i != q {
                        let aip = a[(i, p)];
                        let aiq = a[(i, q)];
                        a[(i, p)] = aip - s_ * (aiq + tau * aip);
                        a[(i, q)] = aiq + s_ * (aip - tau * aiq);
                        a[(p, i)] = a[(i, p)];
                        a[(q, i)] = a[(i, q)];
                    }
                }
                // Accumulate the rotation into the eigenvector columns.
                for i in 0..n {
                    let vip = v[(i, p)];
                    let viq = v[(i, q)];
                    v[(i, p)] = vip - s_ * (viq + tau * vip);
                    v[(i, q)] = viq + s_ * (vip - tau * viq);
                }
            }
        }
    }
    if !converged {
        // Unreachable for finite symmetric input at these sizes; kept so the
        // library is total.
        return Err(Error::Numerical(
            "cyclic Jacobi failed to converge".into(),
        ));
    }

    // Sort ascending, stably, carrying the eigenvector columns along.
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| a[(i, i)].partial_cmp(&a[(j, j)]).unwrap());
    let values: Vec<f64> = order.iter().map(|&i| a[(i, i)]).collect();
    let mut vectors = Mat::zeros(n, n);
    for (new_j, &old_j) in order.iter().enumerate() {
        let mut col = v.col(old_j);
        // Deterministic sign: largest-magnitude component positive, ties by
        // lowest index (strict `>` keeps the earliest maximum).
        let mut lead = 0;
        for i in 1..n {
            if col[i].abs() > col[lead].abs() {
                lead = i;
            }
        }
        if col[lead] < 0.0 {
            col.iter_mut().for_each(|x| *x = -*x);
        }
        vectors.set_col(new_j, &col);
    }

    Ok(SymEigen { values, vectors })
}

/// Spectral norm `sup_{|v|=1} |Av|`.
///
/// Symmetric inputs use their own eigenvalues; general inputs go through the
/// symmetric eigendecomposition of `AᵀA`. Input must be finite.
pub fn op_norm(m: &Mat) -> f64 {
    debug_assert!(m.is_finite());
    if m.is_square() && m.max_asymmetry() == 0.0 {
        let eig = sym_eigen(m).expect("finite symmetric matrix");
        return eig.values.iter().fold(0.0, |a, &l| a.max(l.abs()));
    }
    let gram = &m.t() * m; // exactly symmetric: entry (i,j) and (j,i) run the same sums
    let eig = sym_eigen(&gram).expect("finite Gram matrix");
    eig.values.iter().fold(0.0f64, |a, &l| a.max(l.max(0.0))).sqrt()
}

/// Matrix exponential by scaling-and-squaring with a Taylor tail.
///
/// Accurate to machine precision for the moderate norms used here (isometry
/// generators); not intended for stiff or large-norm input.
pub fn mat_exp(x: &Mat) -> Mat {
    assert!(x.is_square());
    let n = x.rows();
    let norm = x.frobenius();
    // Scale so the series argument has norm ≤ 0.5, then square back.
    let s = if norm > 0.5 {
        (norm / 0.5).log2().ceil() as u32
    } else {
        0
    };
    let t = x.scale(0.5f64.powi(s as i32));
    let mut sum = Mat::identity(n);
    let mut term = Mat::identity(n);
    for k in 1..=20 {
        term = &term * &t;
        term = term.scale(1.0 / k as f64);
        sum = &sum + &term;
    }
    for _ in 0..s {
        sum = &sum * &sum;
    }
    sum
}
