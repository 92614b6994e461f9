use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Zero};
use rayon::prelude::*;

use super::{Matrix, Scalar, Vector};
use crate::error::{Error, Result};

fn check_invertible_upper<T: Scalar>(u: &Matrix<T>) -> Result<usize> {
    let n = u.ensure_square()?;
    if let Some((r, c)) = u.find_below_diagonal() {
        return Err(Error::NotUpperTriangular {
            row: r + 1,
            col: c + 1,
        });
    }
    if let Some(k) = (0..n).find(|&k| Scalar::is_zero(&u[(k, k)])) {
        return Err(Error::ZeroDiagonal(k + 1));
    }
    Ok(n)
}

/// Inverse of a nonsingular upper triangular matrix.
///
/// Columns are computed independently by back substitution, so the result is
/// exact in the rational regime. Fails with [`Error::ZeroDiagonal`] (1-based
/// position) when a diagonal entry is zero.
pub fn triangular_inverse<T: Scalar>(u: &Matrix<T>) -> Result<Matrix<T>> {
    let n = check_invertible_upper(u)?;
    let ctx = u.ctx();
    let columns: Vec<Vec<T>> = (0..n)
        .into_par_iter()
        .map(|j| {
            // Column j of the inverse is supported on rows 0..=j.
            let mut col = vec![T::zero(ctx); j + 1];
            col[j] = T::one(ctx).div(&u[(j, j)]);
            for i in (0..j).rev() {
                let mut acc = T::zero(ctx);
                for k in i + 1..=j {
                    if !u[(i, k)].is_zero() && !col[k].is_zero() {
                        acc = acc.add(&u[(i, k)].mul(&col[k]));
                    }
                }
                col[i] = acc.neg().div(&u[(i, i)]);
            }
            col
        })
        .collect();
    Ok(Matrix::from_fn(n, n, |r, c| {
        if r <= c {
            columns[c][r].clone()
        } else {
            T::zero(ctx)
        }
    }))
}

/// Exact inverse of a rational upper triangular matrix without intermediate
/// fraction reduction.
///
/// With `U = M / d` for an integer matrix `M`, column `j` of `M⁻¹` scaled by
/// `D_j = Π_{k≤j} M_kk` is integral and follows from back substitution with
/// exact integer divisions. Each entry is reduced once at the end. Same result
/// as [`triangular_inverse`], much faster when denominators are large.
pub fn triangular_inverse_rational(u: &Matrix<BigRational>) -> Result<Matrix<BigRational>> {
    let n = check_invertible_upper(u)?;
    let d = u
        .entries()
        .iter()
        .fold(BigInt::one(), |acc, x| acc.lcm(x.denom()));
    let m: Vec<BigInt> = u
        .entries()
        .iter()
        .map(|x| x.numer() * (&d / x.denom()))
        .collect();
    let m = |r: usize, c: usize| &m[r * n + c];
    let mut diag_prefix = Vec::with_capacity(n + 1);
    diag_prefix.push(BigInt::one());
    for k in 0..n {
        let next = &diag_prefix[k] * m(k, k);
        diag_prefix.push(next);
    }
    let columns: Vec<Vec<BigRational>> = (0..n)
        .into_par_iter()
        .map(|j| {
            let mut col = vec![BigInt::zero(); j + 1];
            col[j] = diag_prefix[j].clone();
            for i in (0..j).rev() {
                let mut acc = BigInt::zero();
                for (k, x) in col.iter().enumerate().skip(i + 1) {
                    if !m(i, k).is_zero() && !x.is_zero() {
                        acc += m(i, k) * x;
                    }
                }
                col[i] = -(acc / m(i, i));
            }
            let scale = &diag_prefix[j + 1];
            col.into_iter()
                .map(|x| BigRational::new(x * &d, scale.clone()))
                .collect()
        })
        .collect();
    Ok(Matrix::from_fn(n, n, |r, c| {
        if r <= c {
            columns[c][r].clone()
        } else {
            <BigRational as Zero>::zero()
        }
    }))
}

/// Inverse of a unit lower triangular matrix (diagonal assumed to be one).
pub fn unit_lower_inverse<T: Scalar>(l: &Matrix<T>) -> Result<Matrix<T>> {
    let n = l.ensure_square()?;
    let ctx = l.ctx();
    let mut inv = Matrix::identity(n, ctx);
    for j in 0..n {
        for i in j + 1..n {
            let mut acc = l[(i, j)].clone();
            for k in j + 1..i {
                if !l[(i, k)].is_zero() {
                    acc = acc.add(&l[(i, k)].mul(&inv[(k, j)]));
                }
            }
            inv[(i, j)] = acc.neg();
        }
    }
    Ok(inv)
}

/// Solves `U x = b` for upper triangular `U` with nonzero diagonal.
pub(crate) fn solve_upper<T: Scalar>(u: &Matrix<T>, b: &[T]) -> Vector<T> {
    let n = b.len();
    let mut x = b.to_vec();
    for i in (0..n).rev() {
        let mut acc = x[i].clone();
        for k in i + 1..n {
            if !u[(i, k)].is_zero() {
                acc = acc.sub(&u[(i, k)].mul(&x[k]));
            }
        }
        x[i] = acc.div(&u[(i, i)]);
    }
    x
}

/// Solves `L x = b` for unit lower triangular `L`.
pub(crate) fn solve_unit_lower<T: Scalar>(l: &Matrix<T>, b: &[T]) -> Vector<T> {
    let n = b.len();
    let mut x = b.to_vec();
    for i in 0..n {
        let mut acc = x[i].clone();
        for k in 0..i {
            if !l[(i, k)].is_zero() {
                acc = acc.sub(&l[(i, k)].mul(&x[k]));
            }
        }
        x[i] = acc;
    }
    x
}

/// Solves `Uᵀ x = b` for upper triangular `U` with nonzero diagonal.
pub(crate) fn solve_upper_transposed<T: Scalar>(u: &Matrix<T>, b: &[T]) -> Vector<T> {
    let n = b.len();
    let mut x = b.to_vec();
    for i in 0..n {
        let mut acc = x[i].clone();
        for k in 0..i {
            if !u[(k, i)].is_zero() {
                acc = acc.sub(&u[(k, i)].mul(&x[k]));
            }
        }
        x[i] = acc.div(&u[(i, i)]);
    }
    x
}

/// Solves `Lᵀ x = b` for unit lower triangular `L`.
pub(crate) fn solve_unit_lower_transposed<T: Scalar>(l: &Matrix<T>, b: &[T]) -> Vector<T> {
    let n = b.len();
    let mut x = b.to_vec();
    for i in (0..n).rev() {
        let mut acc = x[i].clone();
        for k in i + 1..n {
            if !l[(k, i)].is_zero() {
                acc = acc.sub(&l[(k, i)].mul(&x[k]));
            }
        }
        x[i] = acc;
    }
    x
}
