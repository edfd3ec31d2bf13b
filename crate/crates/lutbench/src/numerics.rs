//! Dense linear-algebra kernels: row-major matrices, Cholesky and LU
//! factorizations, and a cyclic Jacobi eigensolver.
//!
//! Everything is `f64`; the error targets of the higher layers (1e-8
//! relative residuals and tighter) are out of reach in single precision.
//! The matrices involved are at most a few hundred rows for eigenproblems
//! and a couple of thousand for Gaussian-process kernels, so robustness is
//! preferred over asymptotic cleverness throughout.

use crate::error::{Error, Result};

/// Row-major dense matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct Matrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl Matrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Matrix {
            rows,
            cols,
            data: vec![0.0; rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Matrix::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = 1.0;
        }
        m
    }

    /// Builds a matrix from a flat row-major buffer, validating shape and
    /// finiteness.
    pub fn from_vec(rows: usize, cols: usize, data: Vec<f64>) -> Result<Self> {
        if data.len() != rows * cols {
            return Err(Error::DimensionMismatch(format!(
                "{rows}x{cols} matrix needs {} values, got {}",
                rows * cols,
                data.len()
            )));
        }
        if let Some(i) = data.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFiniteInput(format!(
                "matrix entry ({}, {})",
                i / cols.max(1),
                i % cols.max(1)
            )));
        }
        Ok(Matrix { rows, cols, data })
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let cols = rows.first().map_or(0, Vec::len);
        let mut data = Vec::with_capacity(rows.len() * cols);
        for r in rows {
            if r.len() != cols {
                return Err(Error::DimensionMismatch("ragged rows".into()));
            }
            data.extend_from_slice(r);
        }
        Matrix::from_vec(rows.len(), cols, data)
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> f64) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                data.push(f(i, j));
            }
        }
        Matrix { rows, cols, data }
    }

    #[inline]
    pub fn rows(&self) -> usize {
        self.rows
    }

    #[inline]
    pub fn cols(&self) -> usize {
        self.cols
    }

    #[inline]
    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    #[inline]
    pub fn row_mut(&mut self, i: usize) -> &mut [f64] {
        &mut self.data[i * self.cols..(i + 1) * self.cols]
    }

    #[inline]
    pub fn data(&self) -> &[f64] {
        &self.data
    }

    #[inline]
    pub fn data_mut(&mut self) -> &mut [f64] {
        &mut self.data
    }

    pub fn column(&self, j: usize) -> Vec<f64> {
        (0..self.rows).map(|i| self[(i, j)]).collect()
    }

    pub fn transpose(&self) -> Matrix {
        let mut t = Matrix::zeros(self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                t[(j, i)] = self[(i, j)];
            }
        }
        t
    }

    /// `self * other`, cache-friendly i-k-j loop order.
    pub fn matmul(&self, other: &Matrix) -> Result<Matrix> {
        if self.cols != other.rows {
            return Err(Error::DimensionMismatch(format!(
                "cannot multiply {}x{} by {}x{}",
                self.rows, self.cols, other.rows, other.cols
            )));
        }
        let mut out = Matrix::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            let a_row = self.row(i);
            for (k, &aik) in a_row.iter().enumerate() {
                if aik == 0.0 {
                    continue;
                }
                let b_row = other.row(k);
                let o_row = out.row_mut(i);
                for j in 0..b_row.len() {
                    o_row[j] += aik * b_row[j];
                }
            }
        }
        Ok(out)
    }

    /// `selfᵀ * other` without materializing the transpose.
    pub fn transpose_matmul(&self, other: &Matrix) -> Result<Matrix> {
        if self.rows != other.rows {
            return Err(Error::DimensionMismatch(format!(
                "cannot multiply ({}x{})ᵀ by {}x{}",
                self.rows, self.cols, other.rows, other.cols
            )));
        }
        let mut out = Matrix::zeros(self.cols, other.cols);
        for k in 0..self.rows {
            let a_row = self.row(k);
            let b_row = other.row(k);
            for (i, &aki) in a_row.iter().enumerate() {
                if aki == 0.0 {
                    continue;
                }
                let o_row = out.row_mut(i);
                for j in 0..b_row.len() {
                    o_row[j] += aki * b_row[j];
                }
            }
        }
        Ok(out)
    }

    /// `self * v` for a column vector.
    pub fn matvec(&self, v: &[f64]) -> Result<Vec<f64>> {
        if v.len() != self.cols {
            return Err(Error::DimensionMismatch(format!(
                "matvec: {}x{} by vector of length {}",
                self.rows,
                self.cols,
                v.len()
            )));
        }
        Ok((0..self.rows).map(|i| dot(self.row(i), v)).collect())
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }
}

impl std::ops::Index<(usize, usize)> for Matrix {
    type Output = f64;
    #[inline]
    fn index(&self, (i, j): (usize, usize)) -> &f64 {
        &self.data[i * self.cols + j]
    }
}

impl std::ops::IndexMut<(usize, usize)> for Matrix {
    #[inline]
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut f64 {
        &mut self.data[i * self.cols + j]
    }
}

#[inline]
pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    debug_assert_eq!(a.len(), b.len());
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Eigendecomposition of a symmetric matrix: eigenvalues sorted descending,
/// eigenvectors as the orthonormal columns of `vectors`.
#[derive(Debug, Clone)]
pub struct SymEigen {
    pub values: Vec<f64>,
    pub vectors: Matrix,
}

/// Lower-triangular Cholesky factor of a symmetric positive-definite matrix:
/// `L * Lᵀ = A`. Only the lower triangle of `a` is read.
///
/// Fails with [`Error::NotPositiveDefinite`] on a non-positive pivot, which
/// Gaussian-process callers use as the cue to raise their diagonal jitter.
pub fn cholesky(a: &Matrix) -> Result<Matrix> {
    if !a.is_square() {
        return Err(Error::DimensionMismatch(format!(
            "cholesky needs a square matrix, got {}x{}",
            a.rows(),
            a.cols()
        )));
    }
    let n = a.rows();
    let mut l = Matrix::zeros(n, n);
    for i in 0..n {
        for j in 0..=i {
            // L rows are triangular, so the dot product over the first j
            // entries of rows i and j is contiguous.
            let s: f64 = {
                let (ri, rj) = (l.row(i), l.row(j));
                dot(&ri[..j], &rj[..j])
            };
            if i == j {
                let pivot = a[(i, i)] - s;
                if pivot <= 0.0 {
                    return Err(Error::NotPositiveDefinite { index: i, pivot });
                }
                l[(i, j)] = pivot.sqrt();
            } else {
                l[(i, j)] = (a[(i, j)] - s) / l[(j, j)];
            }
        }
    }
    Ok(l)
}

/// Solves `(L * Lᵀ) x = b` given the Cholesky factor `L`.
pub fn solve_cholesky(l: &Matrix, b: &[f64]) -> Result<Vec<f64>> {
    let n = l.rows();
    if b.len() != n {
        return Err(Error::DimensionMismatch(format!(
            "solve_cholesky: factor is {}x{}, rhs has length {}",
            n,
            l.cols(),
            b.len()
        )));
    }
    let mut x = b.to_vec();
    // Forward: L y = b.
    for i in 0..n {
        let s = dot(&l.row(i)[..i], &x[..i]);
        x[i] = (x[i] - s) / l[(i, i)];
    }
    // Backward: Lᵀ x = y.
    for i in (0..n).rev() {
        let mut s = x[i];
        for k in i + 1..n {
            s -= l[(k, i)] * x[k];
        }
        x[i] = s / l[(i, i)];
    }
    Ok(x)
}

/// Maximum number of cyclic Jacobi sweeps before giving up.
pub const JACOBI_SWEEP_CAP: usize = 100;

/// Eigendecomposition of a symmetric matrix by cyclic Jacobi rotations.
///
/// Robust and simple; cubic per sweep, which is fine for the few-hundred-row
/// covariance and Gram matrices this crate produces. Only the lower triangle
/// of the input participates (the matrix is symmetrized on entry).
pub fn sym_eigen(a: &Matrix) -> Result<SymEigen> {
    if !a.is_square() {
        return Err(Error::DimensionMismatch(format!(
            "sym_eigen needs a square matrix, got {}x{}",
            a.rows(),
            a.cols()
        )));
    }
    let n = a.rows();
    if n == 0 {
        return Ok(SymEigen {
            values: vec![],
            vectors: Matrix::zeros(0, 0),
        });
    }
    // Work on a symmetrized copy.
    let mut m = Matrix::from_fn(n, n, |i, j| 0.5 * (a[(i, j)] + a[(j, i)]));
    let mut v = Matrix::identity(n);

    let frob: f64 = m.data().iter().map(|x| x * x).sum::<f64>().sqrt();
    let target = (1e-14 * frob).max(f64::MIN_POSITIVE);

    let mut converged = false;
    for _ in 0..JACOBI_SWEEP_CAP {
        let off: f64 = {
            let mut s = 0.0;
            for i in 0..n {
                for j in i + 1..n {
                    s += m[(i, j)] * m[(i, j)];
                }
            }
            (2.0 * s).sqrt()
        };
        if off <= target {
            converged = true;
            break;
        }
        for p in 0..n - 1 {
            for q in p + 1..n {
                let apq = m[(p, q)];
                if apq.abs() <= 0.1 * target / (n as f64) {
                    continue;
                }
                let (app, aqq) = (m[(p, p)], m[(q, q)]);
                let theta = (aqq - app) / (2.0 * apq);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;

                // Update rows/columns p and q of the symmetric matrix.
                for k in 0..n {
                    let mkp = m[(k, p)];
                    let mkq = m[(k, q)];
                    m[(k, p)] = c * mkp - s * mkq;
                    m[(k, q)] = s * mkp + c * mkq;
                }
                for k in 0..n {
                    let mpk = m[(p, k)];
                    let mqk = m[(q, k)];
                    m[(p, k)] = c * mpk - s * mqk;
                    m[(q, k)] = s * mpk + c * mqk;
                }
                // Accumulate the rotation into the eigenvector matrix.
                for k in 0..n {
                    let vkp = v[(k, p)];
                    let vkq = v[(k, q)];
                    v[(k, p)] = c * vkp - s * vkq;
                    v[(k, q)] = s * vkp + c * vkq;
                }
            }
        }
    }
    if !converged {
        // One more check: the final sweep may have reached the target.
        let mut s = 0.0;
        for i in 0..n {
            for j in i + 1..n {
                s += m[(i, j)] * m[(i, j)];
            }
        }
        if (2.0 * s).sqrt() > target {
            return Err(Error::NoConvergence(JACOBI_SWEEP_CAP));
        }
    }

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| m[(j, j)].partial_cmp(&m[(i, i)]).unwrap());
    let values: Vec<f64> = order.iter().map(|&i| m[(i, i)]).collect();
    let vectors = Matrix::from_fn(n, n, |i, j| v[(i, order[j])]);
    Ok(SymEigen { values, vectors })
}

/// Relative pivot threshold below which `solve_linear` reports singularity.
pub const SINGULAR_PIVOT_REL: f64 = 1e-13;

/// Solves `A x = b` by LU factorization with partial pivoting.
pub fn solve_linear(a: &Matrix, b: &[f64]) -> Result<Vec<f64>> {
    if !a.is_square() {
        return Err(Error::DimensionMismatch(format!(
            "solve_linear needs a square matrix, got {}x{}",
            a.rows(),
            a.cols()
        )));
    }
    let n = a.rows();
    if b.len() != n {
        return Err(Error::DimensionMismatch(format!(
            "solve_linear: matrix is {n}x{n}, rhs has length {}",
            b.len()
        )));
    }
    let mut lu = a.data().to_vec();
    let mut x = b.to_vec();
    let threshold = SINGULAR_PIVOT_REL * a.max_abs();
    solve_linear_in_place(&mut lu, &mut x, n, threshold)?;
    Ok(x)
}

/// In-place LU solve on caller-owned scratch buffers. `lu` is the row-major
/// n x n matrix (destroyed), `x` holds the rhs on entry and the solution on
/// exit. Shared by `solve_linear` and the barycentric walk, which calls it
/// thousands of times per query batch and cannot afford re-allocation.
pub(crate) fn solve_linear_in_place(
    lu: &mut [f64],
    x: &mut [f64],
    n: usize,
    pivot_threshold: f64,
) -> Result<()> {
    debug_assert_eq!(lu.len(), n * n);
    debug_assert_eq!(x.len(), n);
    for col in 0..n {
        // Partial pivoting.
        let mut pivot_row = col;
        let mut pivot_val = lu[col * n + col].abs();
        for r in col + 1..n {
            let v = lu[r * n + col].abs();
            if v > pivot_val {
                pivot_val = v;
                pivot_row = r;
            }
        }
        if pivot_val <= pivot_threshold {
            return Err(Error::Singular { pivot: pivot_val });
        }
        if pivot_row != col {
            for j in 0..n {
                lu.swap(col * n + j, pivot_row * n + j);
            }
            x.swap(col, pivot_row);
        }
        let inv = 1.0 / lu[col * n + col];
        for r in col + 1..n {
            let f = lu[r * n + col] * inv;
            if f == 0.0 {
                continue;
            }
            lu[r * n + col] = 0.0;
            for j in col + 1..n {
                lu[r * n + j] -= f * lu[col * n + j];
            }
            x[r] -= f * x[col];
        }
    }
    for i in (0..n).rev() {
        let mut s = x[i];
        for j in i + 1..n {
            s -= lu[i * n + j] * x[j];
        }
        x[i] = s / lu[i * n + i];
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::SplitMix64;

    fn assert_close(a: f64, b: f64, tol: f64, what: &str) {
        let scale = 1.0_f64.max(a.abs()).max(b.abs());
        assert!(
            (a - b).abs() <= tol * scale,
            "{what}: {a} vs {b} (tol {tol})"
        );
    }

    #[test]
    fn cholesky_identity() {
        let a = Matrix::identity(3);
        let l = cholesky(&a).unwrap();
        assert_eq!(l, Matrix::identity(3));
    }

    #[test]
    fn cholesky_hand_expansion() {
        // L·Lᵀ = [[4,2],[2,3]] expands to L = [[2,0],[1,√2]].
        let a = Matrix::from_rows(&[vec![4.0, 2.0], vec![2.0, 3.0]]).unwrap();
        let l = cholesky(&a).unwrap();
        assert_close(l[(0, 0)], 2.0, 1e-15, "l00");
        assert_close(l[(0, 1)], 0.0, 1e-15, "l01");
        assert_close(l[(1, 0)], 1.0, 1e-15, "l10");
        assert_close(l[(1, 1)], 2.0_f64.sqrt(), 1e-15, "l11");
    }

    #[test]
    fn cholesky_indefinite_rejected() {
        // Eigenvalues 3 and -1.
        let a = Matrix::from_rows(&[vec![1.0, 2.0], vec![2.0, 1.0]]).unwrap();
        assert!(matches!(
            cholesky(&a),
            Err(Error::NotPositiveDefinite { .. })
        ));
    }

    #[test]
    fn solve_cholesky_identity() {
        let l = Matrix::identity(3);
        let x = solve_cholesky(&l, &[1.0, 2.0, 3.0]).unwrap();
        assert_eq!(x, vec![1.0, 2.0, 3.0]);
    }

    #[test]
    fn solve_cholesky_analytic_inverse() {
        // A = [[4,2],[2,3]], det = 8, A⁻¹ = [[3,-2],[-2,4]]/8, b = (1,0).
        let a = Matrix::from_rows(&[vec![4.0, 2.0], vec![2.0, 3.0]]).unwrap();
        let l = cholesky(&a).unwrap();
        let x = solve_cholesky(&l, &[1.0, 0.0]).unwrap();
        assert_close(x[0], 3.0 / 8.0, 1e-12, "x0");
        assert_close(x[1], -2.0 / 8.0, 1e-12, "x1");
    }

    #[test]
    fn solve_cholesky_length_mismatch() {
        let l = Matrix::identity(3);
        assert!(matches!(
            solve_cholesky(&l, &[1.0, 2.0]),
            Err(Error::DimensionMismatch(_))
        ));
    }

    #[test]
    fn eigen_diagonal() {
        let a = Matrix::from_rows(&[
            vec![3.0, 0.0, 0.0],
            vec![0.0, 1.0, 0.0],
            vec![0.0, 0.0, 2.0],
        ])
        .unwrap();
        let e = sym_eigen(&a).unwrap();
        assert_eq!(e.values, vec![3.0, 2.0, 1.0]);
    }

    #[test]
    fn eigen_characteristic_polynomial_case() {
        // [[2,1],[1,2]]: eigenvalues 3 and 1, eigenvectors (1,1)/√2, (1,-1)/√2.
        let a = Matrix::from_rows(&[vec![2.0, 1.0], vec![1.0, 2.0]]).unwrap();
        let e = sym_eigen(&a).unwrap();
        assert_close(e.values[0], 3.0, 1e-12, "lambda0");
        assert_close(e.values[1], 1.0, 1e-12, "lambda1");
        let inv_sqrt2 = std::f64::consts::FRAC_1_SQRT_2;
        let v0 = e.vectors.column(0);
        let v1 = e.vectors.column(1);
        assert_close(
            (v0[0] * inv_sqrt2 + v0[1] * inv_sqrt2).abs(),
            1.0,
            1e-10,
            "v0 alignment",
        );
        assert_close(
            (v1[0] * inv_sqrt2 - v1[1] * inv_sqrt2).abs(),
            1.0,
            1e-10,
            "v1 alignment",
        );
    }

    #[test]
    fn eigen_zero_matrix() {
        let e = sym_eigen(&Matrix::zeros(4, 4)).unwrap();
        assert_eq!(e.values, vec![0.0; 4]);
    }

    fn random_symmetric(n: usize, rng: &mut SplitMix64) -> Matrix {
        let m = Matrix::from_fn(n, n, |_, _| rng.next_f64() * 2.0 - 1.0);
        Matrix::from_fn(n, n, |i, j| 0.5 * (m[(i, j)] + m[(j, i)]))
    }

    fn random_spd(n: usize, rng: &mut SplitMix64) -> Matrix {
        let m = Matrix::from_fn(n, n, |_, _| rng.next_f64() * 2.0 - 1.0);
        let mut a = m.transpose_matmul(&m).unwrap();
        for i in 0..n {
            a[(i, i)] += 0.1 * n as f64;
        }
        a
    }

    #[test]
    fn eigen_reconstruction_random() {
        let mut rng = SplitMix64::new(5);
        for n in [2, 5, 17, 40] {
            let a = random_symmetric(n, &mut rng);
            let e = sym_eigen(&a).unwrap();
            // Orthonormality.
            let vtv = e.vectors.transpose_matmul(&e.vectors).unwrap();
            for i in 0..n {
                for j in 0..n {
                    let expect = if i == j { 1.0 } else { 0.0 };
                    assert!(
                        (vtv[(i, j)] - expect).abs() < 1e-10,
                        "VᵀV[{i},{j}] = {}",
                        vtv[(i, j)]
                    );
                }
            }
            // Reconstruction V diag(λ) Vᵀ = A.
            let scale = a.max_abs().max(1.0);
            let lv = Matrix::from_fn(n, n, |i, j| e.vectors[(i, j)] * e.values[j]);
            let rec = lv.matmul(&e.vectors.transpose()).unwrap();
            for i in 0..n {
                for j in 0..n {
                    assert!(
                        (rec[(i, j)] - a[(i, j)]).abs() < 1e-8 * scale,
                        "reconstruction off at ({i},{j})"
                    );
                }
            }
            // Descending order.
            for w in e.values.windows(2) {
                assert!(w[0] >= w[1]);
            }
        }
    }

    #[test]
    fn spd_cholesky_round_trip_random() {
        let mut rng = SplitMix64::new(8);
        for n in [1, 2, 3, 7, 12, 20] {
            let a = random_spd(n, &mut rng);
            let l = cholesky(&a).unwrap();
            let b: Vec<f64> = (0..n).map(|_| rng.next_f64() * 4.0 - 2.0).collect();
            let x = solve_cholesky(&l, &b).unwrap();
            let ax = a.matvec(&x).unwrap();
            let scale = b.iter().fold(1.0_f64, |m, v| m.max(v.abs()));
            for i in 0..n {
                assert!(
                    (ax[i] - b[i]).abs() < 1e-8 * scale,
                    "residual at {i}: {} vs {}",
                    ax[i],
                    b[i]
                );
            }
        }
    }

    #[test]
    fn solve_linear_identity() {
        let a = Matrix::identity(3);
        let b = vec![4.0, -1.0, 0.5];
        assert_eq!(solve_linear(&a, &b).unwrap(), b);
    }

    #[test]
    fn solve_linear_back_substitution() {
        let a = Matrix::from_rows(&[vec![1.0, 1.0], vec![0.0, 1.0]]).unwrap();
        let x = solve_linear(&a, &[3.0, 1.0]).unwrap();
        assert_close(x[0], 2.0, 1e-14, "x0");
        assert_close(x[1], 1.0, 1e-14, "x1");
    }

    #[test]
    fn solve_linear_singular() {
        let a = Matrix::from_rows(&[vec![1.0, 1.0], vec![1.0, 1.0]]).unwrap();
        assert!(matches!(
            solve_linear(&a, &[1.0, 2.0]),
            Err(Error::Singular { .. })
        ));
    }

    #[test]
    fn solve_linear_random_residuals() {
        let mut rng = SplitMix64::new(13);
        for n in [2, 4, 6, 10] {
            for _ in 0..20 {
                // Diagonally dominant keeps the condition number modest.
                let mut a = Matrix::from_fn(n, n, |_, _| rng.next_f64() * 2.0 - 1.0);
                for i in 0..n {
                    a[(i, i)] += n as f64;
                }
                let b: Vec<f64> = (0..n).map(|_| rng.next_f64() * 2.0 - 1.0).collect();
                let x = solve_linear(&a, &b).unwrap();
                let ax = a.matvec(&x).unwrap();
                let scale = b.iter().fold(1.0_f64, |m, v| m.max(v.abs()));
                for i in 0..n {
                    assert!((ax[i] - b[i]).abs() < 1e-9 * scale);
                }
            }
        }
    }

    #[test]
    fn matmul_shapes_and_values() {
        let a = Matrix::from_rows(&[vec![1.0, 2.0], vec![3.0, 4.0]]).unwrap();
        let b = Matrix::from_rows(&[vec![5.0], vec![6.0]]).unwrap();
        let c = a.matmul(&b).unwrap();
        assert_eq!((c.rows(), c.cols()), (2, 1));
        assert_eq!(c[(0, 0)], 17.0);
        assert_eq!(c[(1, 0)], 39.0);
        assert!(a.matmul(&a.transpose()).is_ok());
        assert!(b.matmul(&a).is_err());
    }

    #[test]
    fn from_vec_rejects_non_finite() {
        assert!(matches!(
            Matrix::from_vec(1, 2, vec![1.0, f64::NAN]),
            Err(Error::NonFiniteInput(_))
        ));
        assert!(matches!(
            Matrix::from_vec(2, 2, vec![1.0, 2.0, 3.0]),
            Err(Error::DimensionMismatch(_))
        ));
    }
}
