//! Gaussian elimination without pivoting (GENP) and with partial pivoting
//! (GEPP) over any scalar regime, plus the brute-force perturbed-pivot oracle.

use std::any::Any;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::One;

use crate::error::{Error, Result};
use crate::numerics::triangular::{
    solve_unit_lower, solve_unit_lower_transposed, solve_upper, solve_upper_transposed,
};
use crate::numerics::{Matrix, Scalar, Vector};
use crate::pivots::PerturbationQuery;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Pivoting {
    None,
    /// Largest magnitude in the column; ties keep the smallest row index.
    Partial,
}

/// One elimination run: `P A = L U`.
#[derive(Debug, Clone, PartialEq)]
pub struct LuResult<T> {
    pub l: Matrix<T>,
    pub u: Matrix<T>,
    /// `perm[k]` is the row of `A` that ended up in row `k`.
    pub perm: Vec<usize>,
    /// Diagonal of `U` in elimination order.
    pub pivots: Vector<T>,
    /// `max |U| / max |A|`.
    pub growth_factor: T,
    /// Largest magnitude over every intermediate Schur complement, over `max |A|`.
    pub intermediate_growth: T,
    pub swaps: usize,
}

impl<T: Scalar> LuResult<T> {
    pub fn n(&self) -> usize {
        self.u.rows()
    }

    pub fn last_pivot(&self) -> &T {
        self.pivots.last().expect("nonempty factorization")
    }

    pub fn is_unpermuted(&self) -> bool {
        self.perm.iter().enumerate().all(|(k, &p)| k == p)
    }

    /// `P A`, the row-permuted input.
    pub fn permute_rows(&self, a: &Matrix<T>) -> Matrix<T> {
        Matrix::from_fn(a.rows(), a.cols(), |r, c| a[(self.perm[r], c)].clone())
    }
}

/// LU without row exchanges.
///
/// Fails with [`Error::PivotBreakdown`] (1-based) when a pivot that must be
/// divided by is zero, or any pivot is not finite. A zero *last* pivot is a
/// legitimate value: the factorization exists and `U` is singular.
pub fn genp<T: Scalar>(a: &Matrix<T>) -> Result<LuResult<T>> {
    eliminate(a, Pivoting::None)
}

/// LU with partial pivoting (ties keep the current row).
pub fn gepp<T: Scalar>(a: &Matrix<T>) -> Result<LuResult<T>> {
    eliminate(a, Pivoting::Partial)
}

pub fn eliminate<T: Scalar>(a: &Matrix<T>, pivoting: Pivoting) -> Result<LuResult<T>> {
    let n = a.ensure_square()?;
    let ctx = a.ctx();
    let mut w = a.clone();
    let mut perm: Vec<usize> = (0..n).collect();
    let mut swaps = 0;
    let a_max = a.max_abs();
    let mut seen_max = a_max.clone();

    for k in 0..n {
        if pivoting == Pivoting::Partial {
            let mut best = k;
            for r in k + 1..n {
                if w[(r, k)].abs_gt(&w[(best, k)]) {
                    best = r;
                }
            }
            if w[(best, k)].is_zero() {
                return Err(Error::SingularMatrix(k + 1));
            }
            if best != k {
                w.swap_rows(k, best);
                perm.swap(k, best);
                swaps += 1;
            }
        }
        let pivot = w[(k, k)].clone();
        if !pivot.is_finite() || (pivot.is_zero() && k + 1 < n) {
            return Err(Error::PivotBreakdown(k + 1));
        }
        for r in k + 1..n {
            if w[(r, k)].is_zero() {
                continue;
            }
            let m = w[(r, k)].div(&pivot);
            for c in k + 1..n {
                if w[(k, c)].is_zero() {
                    continue;
                }
                let v = w[(r, c)].sub(&m.mul(&w[(k, c)]));
                if v.abs_gt(&seen_max) {
                    seen_max = v.abs();
                }
                w[(r, c)] = v;
            }
            w[(r, k)] = m;
        }
    }

    let l = Matrix::from_fn(n, n, |r, c| match r.cmp(&c) {
        std::cmp::Ordering::Greater => w[(r, c)].clone(),
        std::cmp::Ordering::Equal => T::one(ctx),
        std::cmp::Ordering::Less => T::zero(ctx),
    });
    let u = Matrix::from_fn(n, n, |r, c| {
        if r <= c {
            w[(r, c)].clone()
        } else {
            T::zero(ctx)
        }
    });
    let pivots = (0..n).map(|k| u[(k, k)].clone()).collect();
    let (growth_factor, intermediate_growth) = if a_max.is_zero() {
        (T::zero(ctx), T::zero(ctx))
    } else {
        (u.max_abs().div(&a_max), seen_max.div(&a_max))
    };
    Ok(LuResult {
        l,
        u,
        perm,
        pivots,
        growth_factor,
        intermediate_growth,
        swaps,
    })
}

fn check_len<T>(lu: &LuResult<T>, b: &[T]) -> Result<()>
where
    T: Scalar,
{
    if b.len() != lu.n() {
        return Err(Error::DimensionMismatch {
            expected: lu.n(),
            got: b.len(),
        });
    }
    if let Some(k) = (0..lu.n()).find(|&k| lu.u[(k, k)].is_zero()) {
        return Err(Error::ZeroDiagonal(k + 1));
    }
    Ok(())
}

/// Solves `A x = b` by forward and back substitution in the factorization's regime.
pub fn solve<T: Scalar>(lu: &LuResult<T>, b: &[T]) -> Result<Vector<T>> {
    check_len(lu, b)?;
    let pb: Vec<T> = lu.perm.iter().map(|&p| b[p].clone()).collect();
    let y = solve_unit_lower(&lu.l, &pb);
    Ok(solve_upper(&lu.u, &y))
}

/// Solves `Aᵀ x = b` with the same factorization.
pub fn solve_transposed<T: Scalar>(lu: &LuResult<T>, b: &[T]) -> Result<Vector<T>> {
    check_len(lu, b)?;
    let s = solve_upper_transposed(&lu.u, b);
    let t = solve_unit_lower_transposed(&lu.l, &s);
    let mut x = t.clone();
    for (k, &p) in lu.perm.iter().enumerate() {
        x[p] = t[k].clone();
    }
    Ok(x)
}

/// `A + ε e_i e_jᵀ` for a 1-based query.
pub fn perturbed<T: Scalar>(a: &Matrix<T>, q: &PerturbationQuery<T>) -> Result<Matrix<T>> {
    let n = a.ensure_square()?;
    q.check(n)?;
    let mut m = a.clone();
    let (r, c) = (q.i - 1, q.j - 1);
    m[(r, c)] = m[(r, c)].add(&q.epsilon);
    Ok(m)
}

/// Last pivot of `A + ε e_i e_jᵀ` by explicit GENP; the oracle for the closed forms.
///
/// Rational input is eliminated fraction-free; other regimes use plain GENP
/// in their own arithmetic.
pub fn last_pivot_direct<T: Scalar>(a: &Matrix<T>, q: &PerturbationQuery<T>) -> Result<T> {
    let w = perturbed(a, q)?;
    if let Some(r) = (&w as &dyn Any).downcast_ref::<Matrix<BigRational>>() {
        let p = bareiss_last_pivot(r)?;
        return Ok((&p as &dyn Any)
            .downcast_ref::<T>()
            .expect("same type")
            .clone());
    }
    genp_last_pivot(w)
}

fn genp_last_pivot<T: Scalar>(mut w: Matrix<T>) -> Result<T> {
    let n = w.rows();
    for k in 0..n - 1 {
        let pivot = w[(k, k)].clone();
        if pivot.is_zero() || !pivot.is_finite() {
            return Err(Error::PivotBreakdown(k + 1));
        }
        for r in k + 1..n {
            if w[(r, k)].is_zero() {
                continue;
            }
            let m = w[(r, k)].div(&pivot);
            for c in k + 1..n {
                if !w[(k, c)].is_zero() {
                    w[(r, c)] = w[(r, c)].sub(&m.mul(&w[(k, c)]));
                }
            }
        }
    }
    let last = w[(n - 1, n - 1)].clone();
    if !last.is_finite() {
        return Err(Error::PivotBreakdown(n));
    }
    Ok(last)
}

/// Bareiss elimination on `d·A` with `d` the common denominator. After step
/// `k` the pivot entry is the leading `(k+1)`-minor of `d·A`, so the GENP
/// pivot `k` is zero exactly when that minor is, and the last pivot is
/// `minor_n / (d · minor_{n-1})`.
fn bareiss_last_pivot(a: &Matrix<BigRational>) -> Result<BigRational> {
    let n = a.rows();
    let d = a
        .entries()
        .iter()
        .fold(BigInt::one(), |acc, x| acc.lcm(x.denom()));
    let mut w: Vec<BigInt> = a
        .entries()
        .iter()
        .map(|x| x.numer() * (&d / x.denom()))
        .collect();
    let mut prev = BigInt::one();
    for k in 0..n - 1 {
        let pivot = w[k * n + k].clone();
        if num_traits::Zero::is_zero(&pivot) {
            return Err(Error::PivotBreakdown(k + 1));
        }
        for r in k + 1..n {
            let lead = w[r * n + k].clone();
            for c in k + 1..n {
                let v = &pivot * &w[r * n + c] - &lead * &w[k * n + c];
                w[r * n + c] = v / &prev;
            }
        }
        prev = pivot;
    }
    Ok(BigRational::new(w[n * n - 1].clone(), d * prev))
}

/// Leading-block split of an unpermuted factorization:
///
/// ```text
/// A = [ L̂  0 ] [ Û  u ]
///     [ ℓᵀ 1 ] [ 0  p ]
/// ```
#[derive(Debug, Clone, PartialEq)]
pub struct PartialLuView<T> {
    pub lhat: Matrix<T>,
    pub uhat: Matrix<T>,
    pub ell: Vector<T>,
    pub u: Vector<T>,
    pub p: T,
}

impl<T: Scalar> PartialLuView<T> {
    /// Dimension of the full matrix.
    pub fn n(&self) -> usize {
        self.uhat.rows() + 1
    }

    /// Multiplies the blocks back together.
    pub fn reassemble(&self) -> Matrix<T> {
        let m = self.uhat.rows();
        let ctx = self.p.ctx();
        let lu = self.lhat.matmul(&self.uhat).expect("square blocks");
        let lu_col = self.lhat.matvec(&self.u).expect("square blocks");
        let dot = |x: &[T], y: &[T]| {
            x.iter()
                .zip(y)
                .fold(T::zero(ctx), |acc, (a, b)| acc.add(&a.mul(b)))
        };
        Matrix::from_fn(m + 1, m + 1, |r, c| match (r < m, c < m) {
            (true, true) => lu[(r, c)].clone(),
            (true, false) => lu_col[r].clone(),
            (false, true) => {
                let col: Vec<T> = (0..m).map(|k| self.uhat[(k, c)].clone()).collect();
                dot(&self.ell, &col)
            }
            (false, false) => dot(&self.ell, &self.u).add(&self.p),
        })
    }
}

pub fn leading_block_view<T: Scalar>(lu: &LuResult<T>) -> Result<PartialLuView<T>> {
    let n = lu.n();
    if n < 2 {
        return Err(Error::InvalidDimension { got: n, min: 2 });
    }
    if !lu.is_unpermuted() {
        return Err(Error::HypothesisViolated(
            "leading block view needs a factorization without row exchanges".into(),
        ));
    }
    let m = n - 1;
    Ok(PartialLuView {
        lhat: lu.l.block(0, m, 0, m),
        uhat: lu.u.block(0, m, 0, m),
        ell: (0..m).map(|c| lu.l[(m, c)].clone()).collect(),
        u: (0..m).map(|r| lu.u[(r, m)].clone()).collect(),
        p: lu.u[(m, m)].clone(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::higham::wilkinson;
    use rand_chacha::rand_core::{RngCore, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn q(n: i64, d: i64) -> BigRational {
        BigRational::new(n.into(), d.into())
    }

    fn int_matrix(rows: &[&[i64]]) -> Matrix<BigRational> {
        Matrix::from_rows(
            rows.iter()
                .map(|r| r.iter().map(|&v| q(v, 1)).collect())
                .collect(),
        )
        .unwrap()
    }

    fn random_rational(n: usize, seed: u64) -> Matrix<BigRational> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        Matrix::from_fn(n, n, |_, _| {
            q(
                (rng.next_u32() % 41) as i64 - 20,
                (rng.next_u32() % 7 + 1) as i64,
            )
        })
    }

    #[test]
    fn wilkinson_four_by_hand() {
        let a = wilkinson(4).unwrap().a;
        let lu = genp(&a).unwrap();
        let want = int_matrix(&[&[1, 0, 0, 1], &[0, 1, 0, 2], &[0, 0, 1, 4], &[0, 0, 0, 8]]);
        assert_eq!(lu.u, want);
        assert_eq!(lu.growth_factor, q(8, 1));
        assert_eq!(lu.intermediate_growth, q(8, 1));
        assert_eq!(lu.l.matmul(&lu.u).unwrap(), a);
    }

    #[test]
    fn identity_factors_trivially() {
        let i = Matrix::<BigRational>::identity(5, ());
        let lu = genp(&i).unwrap();
        assert_eq!(lu.l, i);
        assert_eq!(lu.u, i);
        assert_eq!(lu.growth_factor, q(1, 1));
    }

    #[test]
    fn antidiagonal_breaks_genp_but_not_gepp() {
        let a = int_matrix(&[&[0, 1], &[1, 0]]);
        assert_eq!(genp(&a), Err(Error::PivotBreakdown(1)));
        let lu = gepp(&a).unwrap();
        assert_eq!(lu.perm, vec![1, 0]);
        assert_eq!(lu.u, Matrix::identity(2, ()));
        assert_eq!(lu.swaps, 1);
    }

    #[test]
    fn float_breakdown_only_on_zero_or_nonfinite() {
        let a = Matrix::from_rows(vec![vec![1e-300, 1.0], vec![1.0, 1.0]]).unwrap();
        assert!(genp(&a).is_ok());
        let nan = Matrix::from_rows(vec![vec![f64::NAN, 1.0], vec![1.0, 1.0]]).unwrap();
        assert_eq!(genp(&nan), Err(Error::PivotBreakdown(1)));
    }

    #[test]
    fn zero_last_pivot_is_a_value() {
        let a = int_matrix(&[&[1, 2], &[2, 4]]);
        let lu = genp(&a).unwrap();
        assert!(Scalar::is_zero(lu.last_pivot()));
        assert_eq!(solve(&lu, &[q(1, 1), q(1, 1)]), Err(Error::ZeroDiagonal(2)));
        assert_eq!(gepp(&a), Err(Error::SingularMatrix(2)));
    }

    #[test]
    fn gepp_multiplies_back_exactly() {
        for seed in 0..10 {
            let a = random_rational(8, seed);
            let Ok(lu) = gepp(&a) else { continue };
            assert_eq!(lu.l.matmul(&lu.u).unwrap(), lu.permute_rows(&a));
            assert!(lu.l.entries().iter().all(|x| x.abs() <= q(1, 1)));
            assert_eq!(lu.growth_factor, lu.u.max_abs() / a.max_abs());
        }
    }

    #[test]
    fn gepp_tie_keeps_current_row() {
        let a = int_matrix(&[&[1, 1], &[-1, 1]]);
        let lu = gepp(&a).unwrap();
        assert_eq!(lu.swaps, 0);
        assert_eq!(lu.u, int_matrix(&[&[1, 1], &[0, 2]]));
    }

    #[test]
    fn solves_are_exact() {
        let a = wilkinson(4).unwrap().a;
        let lu = genp(&a).unwrap();
        let ones = vec![q(1, 1); 4];
        let b = a.matvec(&ones).unwrap();
        assert_eq!(b, vec![q(2, 1), q(1, 1), q(0, 1), q(-2, 1)]);
        assert_eq!(solve(&lu, &b).unwrap(), ones);

        let i = Matrix::<BigRational>::identity(3, ());
        let b = vec![q(1, 2), q(-3, 1), q(7, 5)];
        assert_eq!(solve(&genp(&i).unwrap(), &b).unwrap(), b);
        assert!(matches!(
            solve(&genp(&i).unwrap(), &b[..2]),
            Err(Error::DimensionMismatch { .. })
        ));

        for seed in 0..5 {
            let a = random_rational(7, 100 + seed);
            let Ok(lu) = gepp(&a) else { continue };
            let b: Vec<_> = (0..7).map(|k| q(k - 3, 2)).collect();
            assert_eq!(a.matvec(&solve(&lu, &b).unwrap()).unwrap(), b);
            assert_eq!(
                a.transpose()
                    .matvec(&solve_transposed(&lu, &b).unwrap())
                    .unwrap(),
                b
            );
        }
    }

    #[test]
    fn direct_oracle_examples() {
        let a = wilkinson(4).unwrap().a;
        let eps0 = PerturbationQuery::new(2, 3, q(0, 1));
        assert_eq!(last_pivot_direct(&a, &eps0).unwrap(), q(8, 1));
        let bottom = PerturbationQuery::new(4, 1, q(1, 4));
        assert_eq!(last_pivot_direct(&a, &bottom).unwrap(), q(31, 4));
        let top = PerturbationQuery::new(1, 3, q(1, 2));
        assert_eq!(last_pivot_direct(&a, &top).unwrap(), q(4, 1));
        let out = PerturbationQuery::new(5, 1, q(1, 2));
        assert!(matches!(
            last_pivot_direct(&a, &out),
            Err(Error::IndexOutOfRange { .. })
        ));
    }

    #[test]
    fn fraction_free_oracle_matches_plain_elimination() {
        let zero = PerturbationQuery::new(1, 1, q(0, 1));
        for seed in 0..12 {
            let a = random_rational(7, seed).map(|x| x / q(3, 1 << 20));
            let fast = last_pivot_direct(&a, &zero);
            let plain = genp(&a).map(|lu| lu.last_pivot().clone());
            assert_eq!(fast, plain);
            let f = a.to_f64();
            let zf = PerturbationQuery::new(1, 1, 0.0);
            assert_eq!(
                last_pivot_direct(&f, &zf),
                genp(&f).map(|lu| *lu.last_pivot())
            );
        }
        let a = int_matrix(&[&[1, 2, 3], &[2, 4, 5], &[1, 1, 1]]);
        assert_eq!(last_pivot_direct(&a, &zero), Err(Error::PivotBreakdown(2)));
        let singular_last = int_matrix(&[&[1, 2], &[2, 4]]);
        assert_eq!(last_pivot_direct(&singular_last, &zero).unwrap(), q(0, 1));
        assert_eq!(
            last_pivot_direct(&int_matrix(&[&[5]]), &zero).unwrap(),
            q(5, 1)
        );
    }

    #[test]
    fn wilkinson_three_view() {
        let lu = genp(&wilkinson(3).unwrap().a).unwrap();
        let view = leading_block_view(&lu).unwrap();
        assert_eq!(view.lhat, int_matrix(&[&[1, 0], &[-1, 1]]));
        assert_eq!(view.ell, vec![q(-1, 1), q(-1, 1)]);
        assert_eq!(view.uhat, Matrix::identity(2, ()));
        assert_eq!(view.u, vec![q(1, 1), q(2, 1)]);
        assert_eq!(view.p, q(4, 1));
    }

    #[test]
    fn two_by_two_view_and_reassembly() {
        let a = int_matrix(&[&[3, 1], &[6, 5]]);
        let view = leading_block_view(&genp(&a).unwrap()).unwrap();
        assert_eq!(view.lhat, int_matrix(&[&[1]]));
        assert_eq!(view.uhat, int_matrix(&[&[3]]));
        assert_eq!(view.reassemble(), a);
        for seed in 0..5 {
            let a = random_rational(6, 200 + seed);
            if let Ok(lu) = genp(&a) {
                assert_eq!(leading_block_view(&lu).unwrap().reassemble(), a);
            }
        }
    }

    #[test]
    fn view_rejects_permuted_factorization() {
        let lu = gepp(&int_matrix(&[&[0, 1], &[1, 0]])).unwrap();
        assert!(leading_block_view(&lu).is_err());
    }
}
