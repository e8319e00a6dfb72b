//! Dense row-major matrix with the handful of operations the toolkit needs.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use crate::error::CoreError;

/// Dense row-major matrix of `f64`.
#[derive(Debug, Clone, PartialEq)]
pub struct Matrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl Matrix {
    /// Matrix of zeros with the given shape.
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Matrix {
            rows,
            cols,
            data: vec![0.0; rows * cols],
        }
    }

    /// Identity matrix of order `n`.
    pub fn identity(n: usize) -> Self {
        let mut m = Matrix::zeros(n, n);
        for i in 0..n {
            m.set(i, i, 1.0);
        }
        m
    }

    /// Build from a row-major slice. `data.len()` must equal `rows * cols`.
    pub fn from_row_slice(rows: usize, cols: usize, data: &[f64]) -> Result<Self, CoreError> {
        if data.len() != rows * cols {
            return Err(CoreError::DimensionMismatch {
                context: "Matrix::from_row_slice",
                expected: format!("{} elements", rows * cols),
                actual: format!("{} elements", data.len()),
            });
        }
        Ok(Matrix {
            rows,
            cols,
            data: data.to_vec(),
        })
    }

    /// Number of rows.
    pub fn rows(&self) -> usize {
        self.rows
    }

    /// Number of columns.
    pub fn cols(&self) -> usize {
        self.cols
    }

    /// Element at (`r`, `c`). Panics on out-of-range indices, as would a
    /// slice index; shape errors between matrices are reported as values.
    #[inline]
    pub fn get(&self, r: usize, c: usize) -> f64 {
        assert!(r < self.rows && c < self.cols, "matrix index out of range");
        self.data[r * self.cols + c]
    }

    /// Set element at (`r`, `c`).
    #[inline]
    pub fn set(&mut self, r: usize, c: usize, v: f64) {
        assert!(r < self.rows && c < self.cols, "matrix index out of range");
        self.data[r * self.cols + c] = v;
    }

    /// Underlying row-major data.
    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    /// Transpose.
    pub fn transpose(&self) -> Matrix {
        let mut t = Matrix::zeros(self.cols, self.rows);
        for r in 0..self.rows {
            for c in 0..self.cols {
                t.set(c, r, self.get(r, c));
            }
        }
        t
    }

    /// Matrix product `self * other`.
    pub fn matmul(&self, other: &Matrix) -> Result<Matrix, CoreError> {
        if self.cols != other.rows {
            return Err(CoreError::DimensionMismatch {
                context: "Matrix::matmul",
                expected: format!("lhs cols == rhs rows ({} x ?)", self.cols),
                actual: format!("{} x {}", other.rows, other.cols),
            });
        }
        let mut out = Matrix::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self.get(i, k);
                if a == 0.0 {
                    continue;
                }
                for j in 0..other.cols {
                    let v = out.get(i, j) + a * other.get(k, j);
                    out.set(i, j, v);
                }
            }
        }
        Ok(out)
    }

    /// Matrix-vector product `self * v`.
    pub fn matvec(&self, v: &[f64]) -> Result<Vec<f64>, CoreError> {
        if self.cols != v.len() {
            return Err(CoreError::DimensionMismatch {
                context: "Matrix::matvec",
                expected: format!("vector of length {}", self.cols),
                actual: format!("length {}", v.len()),
            });
        }
        let mut out = vec![0.0; self.rows];
        for i in 0..self.rows {
            let mut acc = 0.0;
            for j in 0..self.cols {
                acc += self.get(i, j) * v[j];
            }
            out[i] = acc;
        }
        Ok(out)
    }

    /// Elementwise sum.
    pub fn add(&self, other: &Matrix) -> Result<Matrix, CoreError> {
        if self.rows != other.rows || self.cols != other.cols {
            return Err(CoreError::DimensionMismatch {
                context: "Matrix::add",
                expected: format!("{} x {}", self.rows, self.cols),
                actual: format!("{} x {}", other.rows, other.cols),
            });
        }
        let data: Vec<f64> = self
            .data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| a + b)
            .collect();
        Ok(Matrix {
            rows: self.rows,
            cols: self.cols,
            data,
        })
    }

    /// Elementwise difference `self - other`.
    pub fn sub(&self, other: &Matrix) -> Result<Matrix, CoreError> {
        if self.rows != other.rows || self.cols != other.cols {
            return Err(CoreError::DimensionMismatch {
                context: "Matrix::sub",
                expected: format!("{} x {}", self.rows, self.cols),
                actual: format!("{} x {}", other.rows, other.cols),
            });
        }
        let data: Vec<f64> = self
            .data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| a - b)
            .collect();
        Ok(Matrix {
            rows: self.rows,
            cols: self.cols,
            data,
        })
    }

    /// Scalar multiple.
    pub fn scale(&self, s: f64) -> Matrix {
        Matrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|a| a * s).collect(),
        }
    }

    /// Frobenius norm.
    pub fn frobenius_norm(&self) -> f64 {
        libm::sqrt(self.data.iter().map(|a| a * a).sum())
    }

    /// Kronecker product `self ⊗ other`.
    pub fn kron(&self, other: &Matrix) -> Matrix {
        let mut out = Matrix::zeros(self.rows * other.rows, self.cols * other.cols);
        for i in 0..self.rows {
            for j in 0..self.cols {
                let a = self.get(i, j);
                if a == 0.0 {
                    continue;
                }
                for k in 0..other.rows {
                    for l in 0..other.cols {
                        out.set(i * other.rows + k, j * other.cols + l, a * other.get(k, l));
                    }
                }
            }
        }
        out
    }

    /// Solve `self * x = b` for a single right-hand side via Gaussian
    /// elimination with partial pivoting. `self` must be square.
    pub fn solve(&self, b: &[f64]) -> Result<Vec<f64>, CoreError> {
        let cols = self.solve_multi(&Matrix::from_row_slice(b.len(), 1, b)?)?;
        Ok(cols.data)
    }

    /// Solve `self * X = B` with one column of `X` per column of `B`.
    pub fn solve_multi(&self, b: &Matrix) -> Result<Matrix, CoreError> {
        let n = self.rows;
        if self.rows != self.cols {
            return Err(CoreError::DimensionMismatch {
                context: "Matrix::solve_multi",
                expected: format!("square matrix"),
                actual: format!("{} x {}", self.rows, self.cols),
            });
        }
        if b.rows != n {
            return Err(CoreError::DimensionMismatch {
                context: "Matrix::solve_multi",
                expected: format!("rhs with {n} rows"),
                actual: format!("{} rows", b.rows),
            });
        }
        let mut a = self.clone();
        let mut x = b.clone();
        for col in 0..n {
            // Partial pivot: largest magnitude on or below the diagonal.
            let mut piv = col;
            let mut best = a.get(col, col).abs();
            for r in (col + 1)..n {
                let v = a.get(r, col).abs();
                if v > best {
                    best = v;
                    piv = r;
                }
            }
            if best == 0.0 || !best.is_finite() {
                return Err(CoreError::SingularMatrix {
                    context: "Matrix::solve_multi",
                });
            }
            if piv != col {
                for c in 0..n {
                    let tmp = a.get(col, c);
                    a.set(col, c, a.get(piv, c));
                    a.set(piv, c, tmp);
                }
                for c in 0..x.cols {
                    let tmp = x.get(col, c);
                    x.set(col, c, x.get(piv, c));
                    x.set(piv, c, tmp);
                }
            }
            let d = a.get(col, col);
            for r in (col + 1)..n {
                let f = a.get(r, col) / d;
                if f == 0.0 {
                    continue;
                }
                a.set(r, col, 0.0);
                for c in (col + 1)..n {
                    let v = a.get(r, c) - f * a.get(col, c);
                    a.set(r, c, v);
                }
                for c in 0..x.cols {
                    let v = x.get(r, c) - f * x.get(col, c);
                    x.set(r, c, v);
                }
            }
        }
        // Back substitution.
        for col in (0..n).rev() {
            let d = a.get(col, col);
            for c in 0..x.cols {
                let mut acc = x.get(col, c);
                for k in (col + 1)..n {
                    acc -= a.get(col, k) * x.get(k, c);
                }
                x.set(col, c, acc / d);
            }
        }
        Ok(x)
    }

    /// Matrix inverse via [`Matrix::solve_multi`] against the identity.
    pub fn inverse(&self) -> Result<Matrix, CoreError> {
        self.solve_multi(&Matrix::identity(self.rows))
    }

    /// Lower-triangular Cholesky factor of a symmetric positive definite
    /// matrix. Fails with [`CoreError::NotPositiveDefinite`] if any leading
    /// minor is non-positive, which doubles as the positive-definiteness
    /// certificate.
    pub fn cholesky(&self) -> Result<Matrix, CoreError> {
        let n = self.rows;
        if self.rows != self.cols {
            return Err(CoreError::DimensionMismatch {
                context: "Matrix::cholesky",
                expected: format!("square matrix"),
                actual: format!("{} x {}", self.rows, self.cols),
            });
        }
        let mut l = Matrix::zeros(n, n);
        for i in 0..n {
            for j in 0..=i {
                let mut acc = self.get(i, j);
                for k in 0..j {
                    acc -= l.get(i, k) * l.get(j, k);
                }
                if i == j {
                    if acc <= 0.0 || !acc.is_finite() {
                        return Err(CoreError::NotPositiveDefinite { minor: i + 1 });
                    }
                    l.set(i, j, libm::sqrt(acc));
                } else {
                    l.set(i, j, acc / l.get(j, j));
                }
            }
        }
        Ok(l)
    }
}
