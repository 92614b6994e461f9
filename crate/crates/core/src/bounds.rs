//! Condition-number estimation and the two perturbation bounds for
//! maximal-growth matrices.

use num_rational::BigRational;

use crate::elimination::{gepp, solve, solve_transposed};
use crate::error::{Error, Result};
use crate::higham::HighamInstance;
use crate::numerics::{triangular_inverse_rational, Matrix, Real, Scalar};
use crate::pivots::{perturbed_pivot_higham, PerturbationQuery};
use crate::random::NormalStream;

/// Relative residual tolerance of [`cond2_estimate`].
pub const COND_RTOL: f64 = 1e-6;
/// Iteration cap of [`cond2_estimate`].
pub const COND_MAX_ITER: usize = 10_000;
/// Factor applied to the condition-number lower bound to absorb estimator error.
pub const COND_SLACK: f64 = 0.99;

const START_SEED: u64 = 0x5eed_c0de;

#[derive(Debug, Clone, Copy, PartialEq)]
struct PowerResult {
    value: f64,
    iterations: usize,
    converged: bool,
}

fn norm2(x: &[f64]) -> f64 {
    x.iter().map(|v| v * v).sum::<f64>().sqrt()
}

/// Dominant eigenvalue of a symmetric positive semidefinite operator.
///
/// Stops once `‖Mx - λx‖ ≤ rtol λ` with `λ = xᵀMx` and `‖x‖ = 1`.
fn power_iteration(
    dim: usize,
    rtol: f64,
    max_iter: usize,
    mut apply: impl FnMut(&[f64]) -> Option<Vec<f64>>,
) -> PowerResult {
    let mut x = NormalStream::new(START_SEED).normals(dim);
    let s = norm2(&x);
    x.iter_mut().for_each(|v| *v /= s);
    let mut best = 0.0f64;
    for it in 1..=max_iter {
        let Some(y) = apply(&x) else {
            return PowerResult {
                value: best,
                iterations: it,
                converged: false,
            };
        };
        let lambda: f64 = x.iter().zip(&y).map(|(a, b)| a * b).sum();
        best = best.max(lambda);
        let residual = norm2(
            &y.iter()
                .zip(&x)
                .map(|(yi, xi)| yi - lambda * xi)
                .collect::<Vec<_>>(),
        );
        let ny = norm2(&y);
        if !ny.is_finite() || ny == 0.0 {
            return PowerResult {
                value: best,
                iterations: it,
                converged: ny == 0.0,
            };
        }
        if residual <= rtol * lambda.abs() {
            return PowerResult {
                value: lambda,
                iterations: it,
                converged: true,
            };
        }
        x = y.into_iter().map(|v| v / ny).collect();
    }
    PowerResult {
        value: best,
        iterations: max_iter,
        converged: false,
    }
}

/// `‖A‖₂` by power iteration on `AᵀA`; the flag reports convergence.
pub fn spectral_norm(a: &Matrix<f64>, rtol: f64, max_iter: usize) -> (f64, bool) {
    let at = a.transpose();
    let r = power_iteration(a.cols(), rtol, max_iter, |x| {
        let ax = a.matvec(x).ok()?;
        at.matvec(&ax).ok()
    });
    (r.value.sqrt(), r.converged)
}

/// A two-norm condition number estimate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Cond2Estimate {
    pub norm: f64,
    pub inv_norm: f64,
    pub cond: f64,
    pub iterations: usize,
}

/// `κ₂(A) = ‖A‖₂ ‖A⁻¹‖₂` in binary64.
///
/// `‖A‖₂` comes from power iteration on `AᵀA`, `‖A⁻¹‖₂` from the same
/// iteration on `A⁻¹A⁻ᵀ` applied through partial-pivoting solves. Both are
/// Rayleigh quotients, so the estimate approaches `κ₂` from below.
pub fn cond2_estimate(a: &Matrix<f64>) -> Result<Cond2Estimate> {
    let n = a.ensure_square()?;
    let lu = gepp(a)?;
    let at = a.transpose();
    let big = power_iteration(n, COND_RTOL, COND_MAX_ITER, |x| {
        let ax = a.matvec(x).ok()?;
        at.matvec(&ax).ok()
    });
    let small = power_iteration(n, COND_RTOL, COND_MAX_ITER, |x| {
        let t = solve_transposed(&lu, x).ok()?;
        solve(&lu, &t).ok()
    });
    let norm = big.value.sqrt();
    let inv_norm = small.value.sqrt();
    let cond = norm * inv_norm;
    let iterations = big.iterations + small.iterations;
    if !(big.converged && small.converged) {
        return Err(Error::NoConvergence {
            estimate: cond,
            iterations,
        });
    }
    Ok(Cond2Estimate {
        norm,
        inv_norm,
        cond,
        iterations,
    })
}

/// Singular values by one-sided Jacobi, in descending order.
///
/// Column pairs are rotated until every pair satisfies
/// `|a_pᵀa_q| ≤ tol ‖a_p‖ ‖a_q‖`.
pub fn jacobi_singular_values<T: Real>(
    a: &Matrix<T>,
    tol: &T,
    max_sweeps: usize,
) -> Result<Vec<T>> {
    let n = a.cols();
    let ctx = a.ctx();
    // Rows of `cols` are the columns of A.
    let mut cols: Vec<Vec<T>> = (0..n)
        .map(|c| (0..a.rows()).map(|r| a[(r, c)].clone()).collect())
        .collect();
    let dot = |x: &[T], y: &[T]| {
        x.iter()
            .zip(y)
            .fold(T::zero(ctx), |acc, (a, b)| acc.add(&a.mul(b)))
    };
    let one = T::one(ctx);
    let two = T::from_i64(2, ctx);
    let mut converged = false;
    for _ in 0..max_sweeps {
        let mut rotated = false;
        for p in 0..n {
            for q in p + 1..n {
                let alpha = dot(&cols[p], &cols[p]);
                let beta = dot(&cols[q], &cols[q]);
                let gamma = dot(&cols[p], &cols[q]);
                if gamma.is_zero() || gamma.abs() <= tol.mul(&alpha.mul(&beta).sqrt()) {
                    continue;
                }
                rotated = true;
                let zeta = beta.sub(&alpha).div(&two.mul(&gamma));
                let root = one.add(&zeta.mul(&zeta)).sqrt();
                let mut t = one.div(&zeta.abs().add(&root));
                if zeta < T::zero(ctx) {
                    t = t.neg();
                }
                let c = one.div(&one.add(&t.mul(&t)).sqrt());
                let s = c.mul(&t);
                let (lo, hi) = cols.split_at_mut(q);
                for (x, y) in lo[p].iter_mut().zip(hi[0].iter_mut()) {
                    let nx = c.mul(x).sub(&s.mul(y));
                    let ny = s.mul(x).add(&c.mul(y));
                    *x = nx;
                    *y = ny;
                }
            }
        }
        if !rotated {
            converged = true;
            break;
        }
    }
    let mut sv: Vec<T> = cols.iter().map(|c| dot(c, c).sqrt()).collect();
    sv.sort_by(|a, b| b.partial_cmp(a).unwrap_or(std::cmp::Ordering::Equal));
    if !converged {
        let cond = sv.first().map(Scalar::to_f64).unwrap_or(f64::NAN)
            / sv.last().map(Scalar::to_f64).unwrap_or(f64::NAN);
        return Err(Error::NoConvergence {
            estimate: cond,
            iterations: max_sweeps,
        });
    }
    Ok(sv)
}

/// `σ_max / σ_min` from [`jacobi_singular_values`], rounded to binary64.
pub fn cond2_jacobi<T: Real>(a: &Matrix<T>, tol: &T) -> Result<f64> {
    let sv = jacobi_singular_values(a, tol, 100)?;
    let (hi, lo) = (sv[0].clone(), sv[sv.len() - 1].clone());
    Ok(hi.div(&lo).to_f64())
}

/// Outcome of checking one bound on one instance.
#[derive(Debug, Clone, PartialEq)]
pub struct BoundReport<T> {
    pub hypothesis_met: bool,
    pub bound_value: T,
    /// `None` when the hypothesis gate failed or the pivot does not exist.
    pub observed_value: Option<T>,
    pub satisfied: bool,
    /// `observed / bound`.
    pub slack: Option<f64>,
}

/// `|ε| < 1` and `√n < |p| < 2^(n-5)`.
pub fn corollary4_hypothesis(n: usize, eps: &BigRational, p: &BigRational) -> bool {
    let ap = p.abs();
    eps.abs() < BigRational::one(())
        && &ap * &ap > BigRational::from_integer(n.into())
        && ap < BigRational::pow2(n as i64 - 5, ())
}

/// `√n / |3 ε p|`.
pub fn corollary4_bound(n: usize, eps: &BigRational, p: &BigRational) -> f64 {
    let denom = (eps * p * BigRational::from_integer(3.into())).abs();
    (n as f64).sqrt() / Scalar::to_f64(&denom)
}

/// Gates on the hypothesis, then compares a condition number against the
/// lower bound with the [`COND_SLACK`] factor.
pub fn corollary4_report(
    n: usize,
    eps: &BigRational,
    p: Option<&BigRational>,
    cond: f64,
) -> BoundReport<f64> {
    let Some(p) = p.filter(|p| corollary4_hypothesis(n, eps, p)) else {
        return BoundReport {
            hypothesis_met: false,
            bound_value: f64::NAN,
            observed_value: None,
            satisfied: true,
            slack: None,
        };
    };
    let bound = corollary4_bound(n, eps, p);
    BoundReport {
        hypothesis_met: true,
        bound_value: bound,
        observed_value: Some(cond),
        satisfied: cond >= COND_SLACK * bound,
        slack: Some(cond / bound),
    }
}

/// Checks the condition-number lower bound implied by the perturbed pivot at
/// `q` (exact pivot, binary64 condition estimate).
pub fn corollary4_check(
    inst: &HighamInstance,
    q: &PerturbationQuery<BigRational>,
) -> Result<BoundReport<f64>> {
    let uinv = triangular_inverse_rational(&inst.uhat)?;
    let p = perturbed_pivot_higham(inst, &uinv, q)?.value;
    let gated = p
        .as_ref()
        .is_some_and(|p| corollary4_hypothesis(inst.n, &q.epsilon, p));
    if !gated {
        return Ok(corollary4_report(inst.n, &q.epsilon, None, f64::NAN));
    }
    let cond = match cond2_estimate(&inst.a.to_f64()) {
        Ok(c) => c.cond,
        Err(Error::NoConvergence { estimate, .. }) => estimate,
        Err(e) => return Err(e),
    };
    Ok(corollary4_report(inst.n, &q.epsilon, p.as_ref(), cond))
}

/// `(4 + 2^(-(n-6)) / |ε|) / |ε|`.
pub fn corollary5_bound_value(n: usize, eps: &BigRational) -> BigRational {
    let a = eps.abs();
    let four = BigRational::from_integer(4.into());
    (four + BigRational::pow2(6 - n as i64, ()) / &a) / a
}

/// `|ε| > 2^(-(n-4))`.
pub fn corollary5_hypothesis(n: usize, eps: &BigRational) -> bool {
    eps.abs() > BigRational::pow2(4 - n as i64, ())
}

/// `4 Û_{n-1,n-1} / (ε + 2^(-(n-3)) Û_{n-1,n-1})`, the `(1, n-1)` pivot
/// written through a single entry of `Û`.
pub fn corollary5_closed_form(inst: &HighamInstance, eps: &BigRational) -> Option<BigRational> {
    let m = inst.n - 1;
    let d = &inst.uhat[(m - 1, m - 1)];
    let denom = eps + BigRational::pow2(3 - inst.n as i64, ()) * d;
    if num_traits::Zero::is_zero(&denom) {
        None
    } else {
        Some(BigRational::from_integer(4.into()) * d / denom)
    }
}

/// Upper bound on the last pivot after perturbing entry `(1, n-1)`.
pub fn corollary5_bound(
    inst: &HighamInstance,
    eps: &BigRational,
) -> Result<BoundReport<BigRational>> {
    let n = inst.n;
    if n < 3 {
        return Err(Error::InvalidDimension { got: n, min: 3 });
    }
    if !corollary5_hypothesis(n, eps) {
        return Err(Error::HypothesisViolated(format!(
            "|eps| must exceed 2^-{} for n = {n}",
            n - 4
        )));
    }
    let uinv = triangular_inverse_rational(&inst.uhat)?;
    let observed =
        perturbed_pivot_higham(inst, &uinv, &PerturbationQuery::new(1, n - 1, eps.clone()))?
            .value
            .map(|p| p.abs());
    Ok(upper_report(corollary5_bound_value(n, eps), observed))
}

fn upper_report(bound: BigRational, observed: Option<BigRational>) -> BoundReport<BigRational> {
    let satisfied = observed.as_ref().is_some_and(|o| *o <= bound);
    let slack = observed.as_ref().map(|o| Scalar::to_f64(&(o / &bound)));
    BoundReport {
        hypothesis_met: true,
        bound_value: bound,
        observed_value: observed,
        satisfied,
        slack,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::higham::{wilkinson, Family};
    use crate::numerics::{rational_from_f64, triangular_inverse, BigFloat, Precision};

    fn q(n: i64, d: i64) -> BigRational {
        BigRational::new(n.into(), d.into())
    }

    fn rel(a: f64, b: f64) -> f64 {
        (a - b).abs() / b.abs()
    }

    #[test]
    fn identity_condition_is_one() {
        let c = cond2_estimate(&Matrix::identity(6, ())).unwrap();
        assert!(rel(c.cond, 1.0) < 1e-6);
    }

    #[test]
    fn diagonal_condition() {
        let a = Matrix::from_rows(vec![vec![1.0, 0.0], vec![0.0, 1e-6]]).unwrap();
        let c = cond2_estimate(&a).unwrap();
        assert!(rel(c.cond, 1e6) < 1e-6, "{}", c.cond);
    }

    #[test]
    fn wilkinson_twenty_matches_jacobi_oracle() {
        let a = wilkinson(20).unwrap().a;
        let est = cond2_estimate(&a.to_f64()).unwrap().cond;
        let prec = Precision::new(256).unwrap();
        let oracle =
            cond2_jacobi(&a.convert::<BigFloat>(prec), &BigFloat::pow2(-200, prec)).unwrap();
        assert!(rel(est, oracle) < 1e-4, "{est} vs {oracle}");
    }

    #[test]
    fn jacobi_on_known_matrix() {
        // [[3, 0], [4, 5]] has singular values sqrt(45) and sqrt(5).
        let a = Matrix::from_rows(vec![vec![3.0, 0.0], vec![4.0, 5.0]]).unwrap();
        let sv = jacobi_singular_values(&a, &1e-15, 50).unwrap();
        assert!(rel(sv[0], 45f64.sqrt()) < 1e-14);
        assert!(rel(sv[1], 5f64.sqrt()) < 1e-14);
    }

    #[test]
    fn spectral_norm_of_diagonal() {
        let a = Matrix::from_fn(4, 4, |r, c| if r == c { -(r as f64 + 1.0) } else { 0.0 });
        let (s, ok) = spectral_norm(&a, 1e-10, 10_000);
        assert!(ok);
        assert!(rel(s, 4.0) < 1e-9);
    }

    #[test]
    fn corollary4_trivial_at_large_n() {
        let w = wilkinson(100).unwrap();
        let eps = rational_from_f64(1e-8);
        let uinv = triangular_inverse(&w.uhat).unwrap();
        let p = perturbed_pivot_higham(&w, &uinv, &PerturbationQuery::new(1, 99, eps.clone()))
            .unwrap()
            .value
            .unwrap();
        assert!((Scalar::to_f64(&p) - 4e8).abs() / 4e8 < 1e-6);
        assert!(corollary4_hypothesis(100, &eps, &p));
        let bound = corollary4_bound(100, &eps, &p);
        assert!((bound - 10.0 / 12.0).abs() < 1e-6);
        assert!(corollary4_report(100, &eps, Some(&p), 1.0).satisfied);
    }

    #[test]
    fn corollary4_gate_blocks_small_pivots() {
        let w = wilkinson(8).unwrap();
        let r = corollary4_check(&w, &PerturbationQuery::new(8, 8, q(1, 2))).unwrap();
        assert!(!r.hypothesis_met);
        let tiny = corollary4_report(8, &q(1, 2), Some(&q(2, 1)), 1.0);
        assert!(!tiny.hypothesis_met);
        assert!(!corollary4_hypothesis(8, &q(1, 1), &q(10, 1)));
    }

    #[test]
    fn corollary4_holds_on_random_instances() {
        let mut checked = 0;
        for seed in 0..4 {
            let inst = HighamInstance::generate(Family::RandomTriu, 12, seed).unwrap();
            for (i, j) in [(1, 11), (2, 9), (5, 3), (11, 1), (3, 12)] {
                for eps in [q(1, 8), q(-1, 1024)] {
                    let r = corollary4_check(&inst, &PerturbationQuery::new(i, j, eps)).unwrap();
                    assert!(r.satisfied, "{r:?}");
                    checked += usize::from(r.hypothesis_met);
                }
            }
        }
        assert!(checked > 0);
    }

    #[test]
    fn corollary5_small_example_arithmetic() {
        // n = 4, ε = 1/2 sits outside the hypothesis but the pieces are exact.
        let w = wilkinson(4).unwrap();
        assert_eq!(corollary5_bound_value(4, &q(1, 2)), q(24, 1));
        assert_eq!(corollary5_closed_form(&w, &q(1, 2)), Some(q(4, 1)));
        assert!(matches!(
            corollary5_bound(&w, &q(1, 2)),
            Err(Error::HypothesisViolated(_))
        ));
    }

    #[test]
    fn corollary5_holds_and_matches_closed_form() {
        for n in [8usize, 12, 20] {
            for seed in 0..3 {
                let inst = HighamInstance::generate(Family::RandomTriu, n, seed).unwrap();
                let m = n - 1;
                assert!(inst.uhat[(m - 1, m - 1)].abs() <= BigRational::one(()));
                for eps in [q(1, 10), q(-1, 10_000)] {
                    if !corollary5_hypothesis(n, &eps) {
                        continue;
                    }
                    let r = corollary5_bound(&inst, &eps).unwrap();
                    assert!(r.satisfied);
                    let closed = corollary5_closed_form(&inst, &eps).map(|p| p.abs());
                    assert_eq!(r.observed_value, closed);
                }
            }
        }
    }
}
