//! Closed-form last pivots of `A + ε e_i e_jᵀ`.
//!
//! Two evaluators are provided. [`LemmaEvaluator`] works from any
//! no-pivoting leading-block split of `A`; [`HighamPivotEvaluator`] specializes
//! to canonical maximal-growth matrices, where everything reduces to weighted
//! sums along row `j` of `Û⁻¹`. Indices are 1-based, row `i` and column `j`.

use crate::elimination::{last_pivot_direct, PartialLuView};
use crate::error::{Error, Result};
use crate::higham::HighamInstance;
use crate::numerics::{
    triangular_inverse, triangular_inverse_rational, unit_lower_inverse, Matrix, Scalar, Vector,
};

/// An entrywise perturbation `A + ε e_i e_jᵀ` with 1-based `(i, j)`.
#[derive(Debug, Clone, PartialEq)]
pub struct PerturbationQuery<T> {
    pub i: usize,
    pub j: usize,
    pub epsilon: T,
}

impl<T> PerturbationQuery<T> {
    pub fn new(i: usize, j: usize, epsilon: T) -> Self {
        PerturbationQuery { i, j, epsilon }
    }

    pub fn check(&self, n: usize) -> Result<()> {
        if (1..=n).contains(&self.i) && (1..=n).contains(&self.j) {
            Ok(())
        } else {
            Err(Error::IndexOutOfRange {
                i: self.i,
                j: self.j,
                n,
            })
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Method {
    LemmaGeneral,
    TheoremHigham,
    DirectOracle,
}

impl std::fmt::Display for Method {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Method::LemmaGeneral => "LemmaGeneral",
            Method::TheoremHigham => "TheoremHigham",
            Method::DirectOracle => "DirectOracle",
        })
    }
}

/// A perturbed last pivot, or its nonexistence.
#[derive(Debug, Clone, PartialEq)]
pub struct PivotResult<T> {
    /// `None` when the perturbed factorization does not exist.
    pub value: Option<T>,
    pub method: Method,
    /// Float regimes only: the denominator was tiny enough that nonexistence
    /// cannot be ruled out.
    pub flagged: bool,
    /// Oracle only: the 1-based pivot at which elimination broke down.
    pub broken_pivot: Option<usize>,
}

impl<T> PivotResult<T> {
    fn closed_form(value: Option<T>, method: Method, flagged: bool) -> Self {
        PivotResult {
            value,
            method,
            flagged,
            broken_pivot: None,
        }
    }

    pub fn exists(&self) -> bool {
        self.value.is_some()
    }
}

/// Whether a float-regime denominator (normalized to be `1` at `ε = 0`) is
/// below `2^(-bits/2)`.
fn tiny<T: Scalar>(normalized: &T) -> bool {
    match T::mantissa_bits(normalized.ctx()) {
        Some(bits) => {
            let threshold = T::pow2(-(i64::from(bits) / 2), normalized.ctx());
            normalized.abs() < threshold
        }
        None => false,
    }
}

/// `L̂⁻¹_ij = φ(i - j)` for the all-`-1` unit lower triangular `L̂`, where
/// `φ(k)` is `0` for `k < 0`, `1` for `k = 0` and `2^(k-1)` for `k > 0`.
pub fn lhat_inverse_entry<T: Scalar>(i: usize, j: usize, ctx: T::Ctx) -> T {
    let k = i as i64 - j as i64;
    match k {
        k if k < 0 => T::zero(ctx),
        0 => T::one(ctx),
        k => T::pow2(k - 1, ctx),
    }
}

/// Precomputed quantities for evaluating the general formula at many queries.
///
/// With `A = [[L̂, 0], [ℓᵀ, 1]] [[Û, u], [0, p]]`:
///
/// ```text
/// p(i,j) = p + ε (Û⁻¹u)_j (ℓᵀL̂⁻¹)_i / (1 + ε (L̂Û)⁻¹_ji)   i, j < n
/// p(i,n) = p - ε (ℓᵀL̂⁻¹)_i
/// p(n,j) = p - ε (Û⁻¹u)_j
/// p(n,n) = p + ε
/// ```
#[derive(Debug, Clone)]
pub struct LemmaEvaluator<T: Scalar> {
    n: usize,
    p: T,
    lu_inv: Matrix<T>,
    uinv_u: Vector<T>,
    ell_linv: Vector<T>,
}

impl<T: Scalar> LemmaEvaluator<T> {
    pub fn new(view: &PartialLuView<T>) -> Result<Self> {
        let uinv = triangular_inverse(&view.uhat)?;
        let linv = unit_lower_inverse(&view.lhat)?;
        let lu_inv = uinv.matmul(&linv)?;
        let uinv_u = uinv.matvec(&view.u)?;
        let ell_linv = linv.transpose().matvec(&view.ell)?;
        Ok(LemmaEvaluator {
            n: view.n(),
            p: view.p.clone(),
            lu_inv,
            uinv_u,
            ell_linv,
        })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// `(Û⁻¹u)_j`, 1-based.
    pub fn uinv_u(&self, j: usize) -> &T {
        &self.uinv_u[j - 1]
    }

    /// `(ℓᵀL̂⁻¹)_i`, 1-based.
    pub fn ell_linv(&self, i: usize) -> &T {
        &self.ell_linv[i - 1]
    }

    pub fn evaluate(&self, q: &PerturbationQuery<T>) -> Result<PivotResult<T>> {
        q.check(self.n)?;
        let n = self.n;
        let eps = &q.epsilon;
        let (value, flagged) = match (q.i < n, q.j < n) {
            (true, true) => {
                let (i, j) = (q.i - 1, q.j - 1);
                let denom = T::one(eps.ctx()).add(&eps.mul(&self.lu_inv[(j, i)]));
                if denom.is_zero() {
                    (None, true)
                } else {
                    let num = eps.mul(&self.uinv_u[j]).mul(&self.ell_linv[i]);
                    (Some(self.p.add(&num.div(&denom))), tiny(&denom))
                }
            }
            (true, false) => (Some(self.p.sub(&eps.mul(&self.ell_linv[q.i - 1]))), false),
            (false, true) => (Some(self.p.sub(&eps.mul(&self.uinv_u[q.j - 1]))), false),
            (false, false) => (Some(self.p.add(eps)), false),
        };
        Ok(PivotResult::closed_form(
            value,
            Method::LemmaGeneral,
            flagged,
        ))
    }
}

/// One-shot general evaluation; prefer [`LemmaEvaluator`] for many queries.
pub fn perturbed_pivot_general<T: Scalar>(
    view: &PartialLuView<T>,
    q: &PerturbationQuery<T>,
) -> Result<PivotResult<T>> {
    LemmaEvaluator::new(view)?.evaluate(q)
}

fn check_uhat_inv<T: Scalar>(n: usize, uhat_inv: &Matrix<T>) -> Result<()> {
    let m = uhat_inv.ensure_square()?;
    if m + 1 != n {
        return Err(Error::DimensionMismatch {
            expected: n - 1,
            got: m,
        });
    }
    Ok(())
}

/// Direct evaluation of the maximal-growth specialization by explicit sums
/// over row `j` of `V = Û⁻¹` (`O(n)` per query).
///
/// ```text
/// i < j < n : 1 / (2^(1-n) + ε 2^(-i) Σ_{l=1}^{n-j} 2^(-l) V_{j,n-l})
/// j ≤ i < n : (1 + ε/2 (V_ji - Σ_{l=1}^{i-j} 2^(-l) V_{j,i-l}))
///           / (2^(1-n) + ε (2^(1-n) V_ji + 2^(-i) Σ_{l=1}^{n-i-1} 2^(-l) V_{j,n-l}))
/// (i, n)    : 2^(n-1) (1 + ε 2^(-i))
/// (n, j)    : 2^(n-1) (1 - ε Σ_{l=1}^{n-j} 2^(-l) V_{j,n-l})
/// (n, n)    : 2^(n-1) + ε
/// ```
pub fn perturbed_pivot_higham<T: Scalar>(
    inst: &HighamInstance,
    uhat_inv: &Matrix<T>,
    q: &PerturbationQuery<T>,
) -> Result<PivotResult<T>> {
    let n = inst.n;
    check_uhat_inv(n, uhat_inv)?;
    q.check(n)?;
    let (i, j) = (q.i, q.j);
    let eps = &q.epsilon;
    let ctx = eps.ctx();
    let ni = n as i64;
    let v = |r: usize, c: usize| &uhat_inv[(r - 1, c - 1)];
    let pow2 = |k: i64| T::pow2(k, ctx);
    let one = T::one(ctx);
    let top = pow2(ni - 1);
    let tail_sum = |upper: usize| {
        (1..=upper).fold(T::zero(ctx), |acc, l| {
            acc.add(&pow2(-(l as i64)).mul(v(j, n - l)))
        })
    };

    let ratio = |num: T, denom: T| {
        if denom.is_zero() {
            PivotResult::closed_form(None, Method::TheoremHigham, true)
        } else {
            let flagged = tiny(&denom.mul(&top));
            PivotResult::closed_form(Some(num.div(&denom)), Method::TheoremHigham, flagged)
        }
    };
    let plain = |value: T| PivotResult::closed_form(Some(value), Method::TheoremHigham, false);

    let result = if i < n && j < n && i < j {
        let denom = pow2(1 - ni).add(&eps.mul(&pow2(-(i as i64))).mul(&tail_sum(n - j)));
        ratio(one, denom)
    } else if i < n && j < n {
        let back = (1..=i - j).fold(T::zero(ctx), |acc, l| {
            acc.add(&pow2(-(l as i64)).mul(v(j, i - l)))
        });
        let num = one.add(&pow2(-1).mul(eps).mul(&v(j, i).sub(&back)));
        let inner = pow2(1 - ni)
            .mul(v(j, i))
            .add(&pow2(-(i as i64)).mul(&tail_sum(n - i - 1)));
        ratio(num, pow2(1 - ni).add(&eps.mul(&inner)))
    } else if i < n {
        plain(top.mul(&one.add(&eps.mul(&pow2(-(i as i64))))))
    } else if j < n {
        plain(top.mul(&one.sub(&eps.mul(&tail_sum(n - j)))))
    } else {
        plain(top.add(eps))
    };
    Ok(result)
}

/// The maximal-growth specialization with per-row running sums of `Û⁻¹`, so
/// each query costs `O(1)` after `O(n²)` setup.
#[derive(Debug, Clone)]
pub struct HighamPivotEvaluator<T: Scalar> {
    n: usize,
    uhat_inv: Matrix<T>,
    /// `suffix[j-1][i] = Σ_{k=i+1}^{n-1} 2^(k-n) V_jk`, 1-based `i` in `0..n`.
    suffix: Vec<Vec<T>>,
    /// `back[j-1][i] = Σ_{k=j}^{i-1} 2^(k-i) V_jk`, 1-based `i` in `0..n`.
    back: Vec<Vec<T>>,
    /// `2^(-k)` for `k` in `0..=n`.
    inv_pow: Vec<T>,
}

impl<T: Scalar> HighamPivotEvaluator<T> {
    pub fn new(n: usize, uhat_inv: Matrix<T>) -> Result<Self> {
        if n < 2 {
            return Err(Error::InvalidDimension { got: n, min: 2 });
        }
        check_uhat_inv(n, &uhat_inv)?;
        let ctx = uhat_inv.ctx();
        let m = n - 1;
        let inv_pow: Vec<T> = (0..=n).map(|k| T::pow2(-(k as i64), ctx)).collect();
        let half = &inv_pow[1];
        let mut suffix = Vec::with_capacity(m);
        let mut back = Vec::with_capacity(m);
        for jr in 0..m {
            let mut suf = vec![T::zero(ctx); n];
            for i in (0..m).rev() {
                // Suf(i) = Suf(i+1) + 2^(i+1-n) V_{j,i+1}
                suf[i] = suf[i + 1].add(&inv_pow[m - i].mul(&uhat_inv[(jr, i)]));
            }
            let mut bk = vec![T::zero(ctx); n];
            for i in jr + 1..m {
                // R(i+1) = (R(i) + V_ji) / 2 with R(j) = 0, indexed by 1-based i
                bk[i + 1] = bk[i].add(&uhat_inv[(jr, i - 1)]).mul(half);
            }
            suffix.push(suf);
            back.push(bk);
        }
        Ok(HighamPivotEvaluator {
            n,
            uhat_inv,
            suffix,
            back,
            inv_pow,
        })
    }

    /// Computes `Û⁻¹` from the instance in the target regime.
    pub fn from_instance(inst: &HighamInstance, ctx: T::Ctx) -> Result<Self> {
        let uinv = triangular_inverse_rational(&inst.uhat)?;
        Self::new(inst.n, uinv.convert(ctx))
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn uhat_inv(&self) -> &Matrix<T> {
        &self.uhat_inv
    }

    pub fn evaluate(&self, q: &PerturbationQuery<T>) -> Result<PivotResult<T>> {
        q.check(self.n)?;
        Ok(self.evaluate_unchecked(q.i, q.j, &q.epsilon))
    }

    /// Evaluation at 1-based `(i, j)` assumed to be in range.
    pub fn evaluate_unchecked(&self, i: usize, j: usize, eps: &T) -> PivotResult<T> {
        let n = self.n;
        let ctx = eps.ctx();
        let one = T::one(ctx);
        let top = T::pow2(n as i64 - 1, ctx);
        let low = &self.inv_pow[n - 1];
        let plain = |value: T| PivotResult::closed_form(Some(value), Method::TheoremHigham, false);
        let ratio = |num: T, denom: T| {
            if denom.is_zero() {
                PivotResult::closed_form(None, Method::TheoremHigham, true)
            } else {
                let flagged = tiny(&denom.mul(&top));
                PivotResult::closed_form(Some(num.div(&denom)), Method::TheoremHigham, flagged)
            }
        };
        if i < n && j < n {
            let jr = j - 1;
            if i < j {
                let s = &self.suffix[jr][j - 1];
                ratio(one, low.add(&eps.mul(&self.inv_pow[i]).mul(s)))
            } else {
                let vji = &self.uhat_inv[(jr, i - 1)];
                let num = one.add(&eps.mul(&self.inv_pow[1]).mul(&vji.sub(&self.back[jr][i])));
                let inner = low.mul(vji).add(&self.inv_pow[i].mul(&self.suffix[jr][i]));
                ratio(num, low.add(&eps.mul(&inner)))
            }
        } else if i < n {
            plain(top.mul(&one.add(&eps.mul(&self.inv_pow[i]))))
        } else if j < n {
            plain(top.mul(&one.sub(&eps.mul(&self.suffix[j - 1][j - 1]))))
        } else {
            plain(top.add(eps))
        }
    }
}

/// The brute-force oracle wrapped as a [`PivotResult`]; breakdown of the
/// perturbed elimination is reported in-band.
pub fn perturbed_pivot_direct<T: Scalar>(
    a: &Matrix<T>,
    q: &PerturbationQuery<T>,
) -> Result<PivotResult<T>> {
    match last_pivot_direct(a, q) {
        Ok(v) => Ok(PivotResult {
            value: Some(v),
            method: Method::DirectOracle,
            flagged: false,
            broken_pivot: None,
        }),
        Err(Error::PivotBreakdown(k)) => Ok(PivotResult {
            value: None,
            method: Method::DirectOracle,
            flagged: true,
            broken_pivot: Some(k),
        }),
        Err(e) => Err(e),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::elimination::{genp, leading_block_view};
    use crate::higham::{from_uhat, wilkinson, Family, HighamInstance};
    use crate::numerics::{BigFloat, Precision};
    use num_rational::BigRational;
    use proptest::prelude::*;

    fn q(n: i64, d: i64) -> BigRational {
        BigRational::new(n.into(), d.into())
    }

    fn view_of(a: &Matrix<BigRational>) -> PartialLuView<BigRational> {
        leading_block_view(&genp(a).unwrap()).unwrap()
    }

    fn uinv(inst: &HighamInstance) -> Matrix<BigRational> {
        triangular_inverse(&inst.uhat).unwrap()
    }

    #[test]
    fn phi_examples() {
        assert_eq!(lhat_inverse_entry::<BigRational>(3, 3, ()), q(1, 1));
        assert_eq!(lhat_inverse_entry::<BigRational>(5, 2, ()), q(4, 1));
        assert_eq!(lhat_inverse_entry::<BigRational>(2, 5, ()), q(0, 1));
        assert_eq!(lhat_inverse_entry::<BigRational>(2, 1, ()), q(1, 1));
    }

    #[test]
    fn phi_matches_computed_inverse() {
        let m = 9;
        let l: Matrix<BigRational> = crate::higham::lhat(m, ());
        let inv = unit_lower_inverse(&l).unwrap();
        for i in 1..=m {
            for j in 1..=m {
                assert_eq!(inv[(i - 1, j - 1)], lhat_inverse_entry(i, j, ()));
            }
        }
    }

    #[test]
    fn general_two_by_two() {
        let a = wilkinson(2).unwrap().a;
        let r =
            perturbed_pivot_general(&view_of(&a), &PerturbationQuery::new(1, 1, q(1, 1))).unwrap();
        assert_eq!(r.value, Some(q(3, 2)));
        assert_eq!(r.method, Method::LemmaGeneral);
    }

    #[test]
    fn general_corner_and_zero_epsilon() {
        let a = wilkinson(5).unwrap().a;
        let view = view_of(&a);
        let ev = LemmaEvaluator::new(&view).unwrap();
        let eps = q(-3, 7);
        let r = ev
            .evaluate(&PerturbationQuery::new(5, 5, eps.clone()))
            .unwrap();
        assert_eq!(r.value, Some(q(16, 1) + eps));
        for i in 1..=5 {
            for j in 1..=5 {
                let r = ev.evaluate(&PerturbationQuery::new(i, j, q(0, 1))).unwrap();
                assert_eq!(r.value, Some(q(16, 1)));
            }
        }
    }

    #[test]
    fn general_reports_vanishing_denominator() {
        // Leading 1x1 block is [1]; ε = -1 at (1,1) makes it singular.
        let a = wilkinson(3).unwrap().a;
        let query = PerturbationQuery::new(1, 1, q(-1, 1));
        let r = perturbed_pivot_general(&view_of(&a), &query).unwrap();
        assert!(!r.exists());
        let oracle = perturbed_pivot_direct(&a, &query).unwrap();
        assert!(!oracle.exists());
        assert_eq!(oracle.broken_pivot, Some(1));
    }

    #[test]
    fn higham_examples() {
        let w = wilkinson(4).unwrap();
        let v = uinv(&w);
        let at = |i, j, e: BigRational| {
            perturbed_pivot_higham(&w, &v, &PerturbationQuery::new(i, j, e))
                .unwrap()
                .value
                .unwrap()
        };
        assert_eq!(at(1, 3, q(1, 2)), q(4, 1));
        assert_eq!(at(4, 1, q(1, 4)), q(31, 4));
        assert_eq!(at(4, 1, q(3, 1)), q(5, 1));
        assert_eq!(at(2, 4, q(1, 3)), q(8, 1) * (q(1, 1) + q(1, 12)));
        for i in 1..=4 {
            for j in 1..=4 {
                assert_eq!(at(i, j, q(0, 1)), q(8, 1));
            }
        }
    }

    #[test]
    fn corner_column_formula_holds_for_random_instance() {
        let inst = HighamInstance::generate(Family::RandomTriu, 9, 11).unwrap();
        let v = uinv(&inst);
        let eps = q(5, 64);
        for i in 1..9 {
            let r = perturbed_pivot_higham(&inst, &v, &PerturbationQuery::new(i, 9, eps.clone()))
                .unwrap();
            let expect = q(256, 1) * (q(1, 1) + &eps * BigRational::pow2(-(i as i64), ()));
            assert_eq!(r.value, Some(expect));
        }
    }

    #[test]
    fn wilkinson_upper_branch_reduces_to_single_term() {
        let n = 10;
        let w = wilkinson(n).unwrap();
        let v = uinv(&w);
        let eps = q(1, 1000);
        for i in 1..n - 1 {
            for j in i + 1..n {
                let r = perturbed_pivot_higham(&w, &v, &PerturbationQuery::new(i, j, eps.clone()))
                    .unwrap();
                let denom = BigRational::pow2(1 - n as i64, ())
                    + &eps * BigRational::pow2(-(i as i64) - (n - j) as i64, ());
                assert_eq!(r.value, Some(q(1, 1) / denom));
            }
        }
    }

    #[test]
    fn evaluator_matches_direct_sums_and_oracle() {
        for (seed, n) in [(1u64, 2usize), (2, 3), (3, 6), (4, 9)] {
            let inst = HighamInstance::generate(Family::RandomTriu, n, seed).unwrap();
            let v = uinv(&inst);
            let ev = HighamPivotEvaluator::new(n, v.clone()).unwrap();
            for eps in [q(1, 8), q(-1, 1), q(1, 1 << 30)] {
                for i in 1..=n {
                    for j in 1..=n {
                        let query = PerturbationQuery::new(i, j, eps.clone());
                        let fast = ev.evaluate(&query).unwrap();
                        let slow = perturbed_pivot_higham(&inst, &v, &query).unwrap();
                        let oracle = perturbed_pivot_direct(&inst.a, &query).unwrap();
                        assert_eq!(fast.value, slow.value, "({i},{j})");
                        if oracle.exists() {
                            assert_eq!(fast.value, oracle.value, "({i},{j})");
                        }
                    }
                }
            }
        }
    }

    #[test]
    fn bigfloat_evaluator_tracks_exact_values() {
        let inst = HighamInstance::generate(Family::RandomTriu, 12, 5).unwrap();
        let exact = HighamPivotEvaluator::<BigRational>::from_instance(&inst, ()).unwrap();
        let prec = Precision::new(256).unwrap();
        let approx = HighamPivotEvaluator::<BigFloat>::from_instance(&inst, prec).unwrap();
        let eps = crate::numerics::rational_from_f64(1e-8);
        let epsf = BigFloat::from_rational(&eps, prec);
        for i in 1..=12 {
            for j in 1..=12 {
                let a = exact.evaluate_unchecked(i, j, &eps).value.unwrap();
                let b = approx.evaluate_unchecked(i, j, &epsf).value.unwrap();
                let rel = (b.to_f64() - a.to_f64()).abs() / a.to_f64().abs();
                assert!(rel < 1e-15, "({i},{j}) rel {rel}");
            }
        }
    }

    #[test]
    fn float_regime_flags_tiny_denominator() {
        let a: Matrix<f64> = wilkinson(3).unwrap().a.to_f64();
        let view = leading_block_view(&genp(&a).unwrap()).unwrap();
        let ev = LemmaEvaluator::new(&view).unwrap();
        let near = ev
            .evaluate(&PerturbationQuery::new(1, 1, -1.0 + 1e-12))
            .unwrap();
        assert!(near.flagged && near.exists());
        let far = ev.evaluate(&PerturbationQuery::new(1, 1, 0.5)).unwrap();
        assert!(!far.flagged);
    }

    #[test]
    fn out_of_range_queries_error() {
        let w = wilkinson(4).unwrap();
        let v = uinv(&w);
        let bad = PerturbationQuery::new(0, 2, q(1, 1));
        assert!(matches!(
            perturbed_pivot_higham(&w, &v, &bad),
            Err(Error::IndexOutOfRange { .. })
        ));
        let short = Matrix::<BigRational>::identity(2, ());
        assert!(matches!(
            perturbed_pivot_higham(&w, &short, &PerturbationQuery::new(1, 1, q(1, 1))),
            Err(Error::DimensionMismatch { .. })
        ));
    }

    fn small_uhat(m: usize) -> impl Strategy<Value = Matrix<BigRational>> {
        prop::collection::vec((-8i64..=8, 1i64..=4), m * m).prop_map(move |v| {
            Matrix::from_fn(m, m, |r, c| {
                let (num, den) = v[r * m + c];
                if r > c {
                    q(0, 1)
                } else if r == c {
                    q(if num == 0 { 1 } else { num }, den)
                } else {
                    q(num, den)
                }
            })
        })
    }

    fn instance() -> impl Strategy<Value = HighamInstance> {
        (2usize..8).prop_flat_map(|n| small_uhat(n - 1).prop_map(|u| from_uhat(u, true).unwrap()))
    }

    fn dyadic() -> impl Strategy<Value = BigRational> {
        (any::<bool>(), 0i64..=30).prop_map(|(neg, k)| {
            let v = BigRational::pow2(-k, ());
            if neg {
                -v
            } else {
                v
            }
        })
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]

        #[test]
        fn row_sums_of_lhat_inverse(m in 1usize..40) {
            let n = m + 1;
            for i in 1..=m {
                let s = (i..=m).fold(q(0, 1), |acc, k| acc + lhat_inverse_entry::<BigRational>(k, i, ()));
                prop_assert_eq!(s, BigRational::pow2((n - i - 1) as i64, ()));
            }
        }

        #[test]
        fn uinv_u_is_weighted_row_sum(inst in instance()) {
            let n = inst.n;
            let v = uinv(&inst);
            let direct = crate::numerics::triangular::solve_upper(&inst.uhat, &inst.u_vector());
            for j in 1..n {
                let s = (j..n).fold(q(0, 1), |acc, k| acc + BigRational::pow2(k as i64 - 1, ()) * &v[(j - 1, k - 1)]);
                prop_assert_eq!(&s, &direct[j - 1]);
            }
        }

        #[test]
        fn three_way_agreement(inst in instance(), eps in dyadic(), i in 1usize..8, j in 1usize..8) {
            let n = inst.n;
            let (i, j) = ((i - 1) % n + 1, (j - 1) % n + 1);
            let query = PerturbationQuery::new(i, j, eps);
            let general = perturbed_pivot_general(&view_of(&inst.a), &query).unwrap();
            let special = perturbed_pivot_higham(&inst, &uinv(&inst), &query).unwrap();
            let oracle = perturbed_pivot_direct(&inst.a, &query).unwrap();
            prop_assert_eq!(&general.value, &special.value);
            if oracle.exists() {
                prop_assert_eq!(&general.value, &oracle.value);
            } else {
                prop_assert!(!general.exists() || oracle.broken_pivot.unwrap() < n - 1);
            }
        }

        #[test]
        fn boundary_rows_agree_with_general_formula(inst in instance(), eps in dyadic()) {
            let n = inst.n;
            let ev = LemmaEvaluator::new(&view_of(&inst.a)).unwrap();
            let v = uinv(&inst);
            for k in 1..=n {
                for (i, j) in [(k, n), (n, k)] {
                    let query = PerturbationQuery::new(i, j, eps.clone());
                    let a = ev.evaluate(&query).unwrap();
                    let b = perturbed_pivot_higham(&inst, &v, &query).unwrap();
                    prop_assert_eq!(a.value, b.value);
                }
            }
            for i in 1..n {
                prop_assert_eq!(ev.ell_linv(i), &-BigRational::pow2((n - i - 1) as i64, ()));
            }
        }
    }
}
