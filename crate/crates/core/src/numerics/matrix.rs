use std::ops::{Index, IndexMut};

use super::Scalar;
use crate::error::{Error, Result};

/// Dense vector. A plain `Vec` keeps slices and iterators available.
pub type Vector<T> = Vec<T>;

/// Dense row-major matrix over one scalar regime.
///
/// `Index<(r, c)>` is 0-based as usual in Rust. Anything that talks in the
/// `(i, j)` convention of the perturbation analysis (queries, grids, files,
/// the CLI) is 1-based and converts at the boundary.
#[derive(Clone, Debug, PartialEq)]
pub struct Matrix<T> {
    rows: usize,
    cols: usize,
    data: Vec<T>,
}

impl<T: Scalar> Matrix<T> {
    pub fn new(rows: usize, cols: usize, data: Vec<T>) -> Result<Self> {
        if rows == 0 || cols == 0 {
            return Err(Error::InvalidDimension {
                got: rows.min(cols),
                min: 1,
            });
        }
        if data.len() != rows * cols {
            return Err(Error::DimensionMismatch {
                expected: rows * cols,
                got: data.len(),
            });
        }
        Ok(Matrix { rows, cols, data })
    }

    pub fn from_rows(rows: Vec<Vec<T>>) -> Result<Self> {
        let r = rows.len();
        let c = rows.first().map_or(0, Vec::len);
        if let Some(bad) = rows.iter().find(|row| row.len() != c) {
            return Err(Error::DimensionMismatch {
                expected: c,
                got: bad.len(),
            });
        }
        Self::new(r, c, rows.into_iter().flatten().collect())
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> T) -> Self {
        assert!(rows > 0 && cols > 0, "empty matrix");
        let mut data = Vec::with_capacity(rows * cols);
        for r in 0..rows {
            for c in 0..cols {
                data.push(f(r, c));
            }
        }
        Matrix { rows, cols, data }
    }

    pub fn zeros(rows: usize, cols: usize, ctx: T::Ctx) -> Self {
        Self::from_fn(rows, cols, |_, _| T::zero(ctx))
    }

    pub fn identity(n: usize, ctx: T::Ctx) -> Self {
        Self::from_fn(n, n, |r, c| if r == c { T::one(ctx) } else { T::zero(ctx) })
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn ensure_square(&self) -> Result<usize> {
        if self.is_square() {
            Ok(self.rows)
        } else {
            Err(Error::NotSquare {
                rows: self.rows,
                cols: self.cols,
            })
        }
    }

    /// Context of the stored entries.
    pub fn ctx(&self) -> T::Ctx {
        self.data[0].ctx()
    }

    pub fn row(&self, r: usize) -> &[T] {
        &self.data[r * self.cols..(r + 1) * self.cols]
    }

    pub fn row_mut(&mut self, r: usize) -> &mut [T] {
        &mut self.data[r * self.cols..(r + 1) * self.cols]
    }

    pub fn entries(&self) -> &[T] {
        &self.data
    }

    pub fn into_entries(self) -> Vec<T> {
        self.data
    }

    pub fn swap_rows(&mut self, a: usize, b: usize) {
        if a != b {
            for c in 0..self.cols {
                self.data.swap(a * self.cols + c, b * self.cols + c);
            }
        }
    }

    pub fn transpose(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |r, c| self[(c, r)].clone())
    }

    /// Copy of rows `r0..r1` and columns `c0..c1`.
    pub fn block(&self, r0: usize, r1: usize, c0: usize, c1: usize) -> Self {
        Self::from_fn(r1 - r0, c1 - c0, |r, c| self[(r0 + r, c0 + c)].clone())
    }

    pub fn matmul(&self, rhs: &Self) -> Result<Self> {
        if self.cols != rhs.rows {
            return Err(Error::DimensionMismatch {
                expected: self.cols,
                got: rhs.rows,
            });
        }
        let ctx = self.ctx();
        Ok(Self::from_fn(self.rows, rhs.cols, |r, c| {
            (0..self.cols).fold(T::zero(ctx), |acc, k| {
                if self[(r, k)].is_zero() || rhs[(k, c)].is_zero() {
                    acc
                } else {
                    acc.add(&self[(r, k)].mul(&rhs[(k, c)]))
                }
            })
        }))
    }

    pub fn matvec(&self, x: &[T]) -> Result<Vector<T>> {
        if x.len() != self.cols {
            return Err(Error::DimensionMismatch {
                expected: self.cols,
                got: x.len(),
            });
        }
        let ctx = self.ctx();
        Ok((0..self.rows)
            .map(|r| {
                self.row(r)
                    .iter()
                    .zip(x)
                    .fold(T::zero(ctx), |acc, (a, b)| acc.add(&a.mul(b)))
            })
            .collect())
    }

    pub fn map<U: Scalar>(&self, mut f: impl FnMut(&T) -> U) -> Matrix<U> {
        Matrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(&mut f).collect(),
        }
    }

    /// Converts every entry into another regime (exact widening, rounded narrowing).
    pub fn convert<U: Scalar>(&self, ctx: U::Ctx) -> Matrix<U> {
        self.map(|x| match x.to_rational() {
            Some(r) => U::from_rational(&r, ctx),
            None => U::from_f64(x.to_f64(), ctx),
        })
    }

    pub fn to_f64(&self) -> Matrix<f64> {
        self.map(|x| x.to_f64())
    }

    /// Largest entry magnitude.
    pub fn max_abs(&self) -> T {
        let mut best = &self.data[0];
        for x in &self.data[1..] {
            if x.abs_gt(best) {
                best = x;
            }
        }
        best.abs()
    }

    /// First nonzero entry strictly below the diagonal, if any.
    pub fn find_below_diagonal(&self) -> Option<(usize, usize)> {
        (0..self.rows)
            .flat_map(|r| (0..r.min(self.cols)).map(move |c| (r, c)))
            .find(|&(r, c)| !self[(r, c)].is_zero())
    }

    pub fn is_upper_triangular(&self) -> bool {
        self.find_below_diagonal().is_none()
    }
}

impl<T> Index<(usize, usize)> for Matrix<T> {
    type Output = T;

    fn index(&self, (r, c): (usize, usize)) -> &T {
        assert!(
            r < self.rows && c < self.cols,
            "index ({r}, {c}) out of bounds"
        );
        &self.data[r * self.cols + c]
    }
}

impl<T> IndexMut<(usize, usize)> for Matrix<T> {
    fn index_mut(&mut self, (r, c): (usize, usize)) -> &mut T {
        assert!(
            r < self.rows && c < self.cols,
            "index ({r}, {c}) out of bounds"
        );
        &mut self.data[r * self.cols + c]
    }
}
