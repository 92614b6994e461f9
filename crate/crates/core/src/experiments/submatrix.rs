use num_rational::BigRational;
use num_traits::{Signed, Zero};

use crate::bounds::{corollary5_bound_value, corollary5_hypothesis};
use crate::elimination::{genp, perturbed};
use crate::error::{Error, Result};
use crate::higham::HighamInstance;
use crate::pivots::PerturbationQuery;

/// `|U_{n-k+1,n}|` after perturbing entry `(1, n-k)`.
///
/// Rows `1..=r` and columns `1..r` plus `n` (with `r = n-k+1`) form the
/// canonical size-`r` instance built from the leading block of `Û`, and
/// `U_{r,n}` is its last pivot. The bound is therefore evaluated at size `r`.
#[derive(Debug, Clone, PartialEq)]
pub struct SubmatrixPivot {
    pub k: usize,
    /// 1-based row of the `U` entry read, `n - k + 1`.
    pub row: usize,
    pub value: BigRational,
    /// `None` for `ε = 0`, where the bound is undefined.
    pub bound: Option<BigRational>,
    pub hypothesis_met: bool,
    pub satisfied: bool,
}

pub fn submatrix_pivot_scan(
    inst: &HighamInstance,
    epsilon: &BigRational,
    ks: impl IntoIterator<Item = usize>,
) -> Result<Vec<SubmatrixPivot>> {
    let n = inst.n;
    ks.into_iter()
        .map(|k| {
            if k == 0 || k >= n {
                return Err(Error::HypothesisViolated(format!(
                    "trailing size k = {k} must satisfy 1 <= k < n = {n}"
                )));
            }
            let r = n - k + 1;
            let a = perturbed(&inst.a, &PerturbationQuery::new(1, n - k, epsilon.clone()))?;
            let lu = genp(&a)?;
            let value = lu.u[(r - 1, n - 1)].abs();
            let bound = (!epsilon.is_zero()).then(|| corollary5_bound_value(r, epsilon));
            let hypothesis_met = corollary5_hypothesis(r, epsilon);
            Ok(SubmatrixPivot {
                k,
                row: r,
                satisfied: bound.as_ref().is_some_and(|b| value <= *b),
                value,
                bound,
                hypothesis_met,
            })
        })
        .collect()
}
