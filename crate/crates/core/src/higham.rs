//! Construction, validation and canonicalization of maximal-growth matrices.
//!
//! Every matrix with `‖A‖max = 1` whose partial-pivoting growth factor is
//! `2^(n-1)` is, up to row signs `D` and a row permutation `P`, of the form
//!
//! ```text
//! D P A = [ L̂ 0 ] [ Û  u       ] = [  L̂Û   1 ]
//!         [ -1ᵀ 1 ] [ 0  2^(n-1) ]   [ -1ᵀÛ  1 ]
//! ```
//!
//! with `L̂` unit lower triangular with every strictly lower entry `-1`,
//! `u = (1, 2, ..., 2^(n-2))ᵀ`, and `Û` any nonsingular upper triangular matrix
//! with `‖L̂Û‖max ≤ 1` and `‖1ᵀÛ‖∞ ≤ 1`. Generators here only emit the
//! canonical orientation `P = D = I`.

use std::fmt;
use std::str::FromStr;

use num_rational::BigRational;
use num_traits::Signed;

use crate::bounds::spectral_norm;
use crate::elimination::{genp, gepp};
use crate::error::{Error, Result};
use crate::numerics::{Matrix, Scalar};
use crate::random::NormalStream;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Family {
    /// `Û = I`.
    Wilkinson,
    /// `Û = triu(randn)`.
    RandomTriu,
    /// `Û = triu(randn) / ‖triu(randn)‖₂ + I`.
    ScaledTriuPlusI,
    Custom,
}

impl Family {
    pub fn name(self) -> &'static str {
        match self {
            Family::Wilkinson => "wilkinson",
            Family::RandomTriu => "random-triu",
            Family::ScaledTriuPlusI => "scaled-triu-plus-i",
            Family::Custom => "custom",
        }
    }

    /// Whether generation rescales `Û` onto the norm constraints by default.
    ///
    /// The scaled-plus-identity family is used exactly as drawn.
    pub fn enforces_validity(self) -> bool {
        !matches!(self, Family::ScaledTriuPlusI)
    }
}

impl fmt::Display for Family {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Family {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "wilkinson" | "identity" => Ok(Family::Wilkinson),
            "random-triu" | "random" | "triu" => Ok(Family::RandomTriu),
            "scaled-triu-plus-i" | "scaled" | "scaled-triu" => Ok(Family::ScaledTriuPlusI),
            "custom" => Ok(Family::Custom),
            other => Err(Error::Parse(format!("unknown family {other:?}"))),
        }
    }
}

/// A canonical (`P = D = I`) maximal-growth matrix and its defining `Û`.
#[derive(Debug, Clone, PartialEq)]
pub struct HighamInstance {
    pub n: usize,
    /// `(n-1) x (n-1)` upper triangular.
    pub uhat: Matrix<BigRational>,
    pub a: Matrix<BigRational>,
    pub family: Family,
    pub seed: Option<u64>,
    /// Whether `‖L̂Û‖max ≤ 1` and `‖1ᵀÛ‖∞ ≤ 1` hold.
    pub strictly_valid: bool,
}

impl HighamInstance {
    /// Builds an instance of `family` (seed ignored for Wilkinson), using the
    /// family's default validity policy.
    pub fn generate(family: Family, n: usize, seed: u64) -> Result<Self> {
        Self::generate_with(family, n, seed, family.enforces_validity())
    }

    pub fn generate_with(family: Family, n: usize, seed: u64, enforce: bool) -> Result<Self> {
        match family {
            Family::Wilkinson => wilkinson(n),
            Family::RandomTriu | Family::ScaledTriuPlusI => {
                let drawn = random_uhat(n, family, seed)?;
                let mut inst = from_uhat(drawn.convert(()), enforce)?;
                inst.family = family;
                inst.seed = Some(seed);
                Ok(inst)
            }
            Family::Custom => Err(Error::Parse(
                "custom instances are built from an explicit Û".into(),
            )),
        }
    }

    /// The pivot `2^(n-1)` shared by every instance.
    pub fn last_pivot(&self) -> BigRational {
        BigRational::pow2(self.n as i64 - 1, ())
    }

    /// `u = (1, 2, ..., 2^(n-2))ᵀ`.
    pub fn u_vector(&self) -> Vec<BigRational> {
        (0..self.n - 1)
            .map(|k| BigRational::pow2(k as i64, ()))
            .collect()
    }

    /// `‖L̂Û‖max` and `‖1ᵀÛ‖∞`.
    pub fn constraint_norms(&self) -> (BigRational, BigRational) {
        constraint_norms(&self.uhat)
    }
}

/// `L̂` of size `m`: unit diagonal, `-1` strictly below.
pub fn lhat<T: Scalar>(m: usize, ctx: T::Ctx) -> Matrix<T> {
    Matrix::from_fn(m, m, |r, c| match r.cmp(&c) {
        std::cmp::Ordering::Greater => T::from_i64(-1, ctx),
        std::cmp::Ordering::Equal => T::one(ctx),
        std::cmp::Ordering::Less => T::zero(ctx),
    })
}

/// Rows of `L̂Û` and the row vector `1ᵀÛ`, via running row sums of `Û`.
fn lhat_uhat_and_colsums(uhat: &Matrix<BigRational>) -> (Matrix<BigRational>, Vec<BigRational>) {
    let m = uhat.rows();
    let mut prefix = vec![BigRational::zero(()); m];
    let mut rows = Vec::with_capacity(m);
    for r in 0..m {
        // (L̂Û)_r = Û_r - Σ_{k<r} Û_k
        let row: Vec<BigRational> = (0..m).map(|c| &uhat[(r, c)] - &prefix[c]).collect();
        for (c, p) in prefix.iter_mut().enumerate() {
            *p += &uhat[(r, c)];
        }
        rows.push(row);
    }
    (Matrix::from_rows(rows).expect("square"), prefix)
}

fn constraint_norms(uhat: &Matrix<BigRational>) -> (BigRational, BigRational) {
    let (lu, colsums) = lhat_uhat_and_colsums(uhat);
    let ones = colsums.iter().map(Signed::abs).max().expect("nonempty");
    (lu.max_abs(), ones)
}

/// `[[L̂Û, 1], [-1ᵀÛ, 1]]`.
fn assemble(uhat: &Matrix<BigRational>) -> Matrix<BigRational> {
    let m = uhat.rows();
    let (lu, colsums) = lhat_uhat_and_colsums(uhat);
    Matrix::from_fn(m + 1, m + 1, |r, c| match (r < m, c < m) {
        (true, true) => lu[(r, c)].clone(),
        (_, false) => BigRational::one(()),
        (false, true) => -&colsums[c],
    })
}

fn check_uhat(uhat: &Matrix<BigRational>) -> Result<()> {
    uhat.ensure_square()?;
    if let Some((r, c)) = uhat.find_below_diagonal() {
        return Err(Error::NotUpperTriangular {
            row: r + 1,
            col: c + 1,
        });
    }
    if let Some(k) = (0..uhat.rows()).find(|&k| uhat[(k, k)].is_zero()) {
        return Err(Error::SingularUhat(k + 1));
    }
    Ok(())
}

/// The classical maximal-growth matrix: the instance with `Û = I`.
pub fn wilkinson(n: usize) -> Result<HighamInstance> {
    if n < 2 {
        return Err(Error::InvalidDimension { got: n, min: 2 });
    }
    let mut inst = from_uhat(Matrix::identity(n - 1, ()), false)?;
    inst.family = Family::Wilkinson;
    Ok(inst)
}

/// Assembles the canonical matrix for `Û`.
///
/// With `enforce_validity`, a `Û` violating the norm constraints is first
/// divided by `max(‖L̂Û‖max, ‖1ᵀÛ‖∞)`; otherwise it is stored as given and
/// `strictly_valid` records whether the constraints hold.
pub fn from_uhat(uhat: Matrix<BigRational>, enforce_validity: bool) -> Result<HighamInstance> {
    check_uhat(&uhat)?;
    let (lu_max, ones_max) = constraint_norms(&uhat);
    let worst = if lu_max > ones_max { lu_max } else { ones_max };
    let one = BigRational::one(());
    let (uhat, strictly_valid) = if worst <= one {
        (uhat, true)
    } else if enforce_validity {
        (uhat.map(|x| x / &worst), true)
    } else {
        (uhat, false)
    };
    let a = assemble(&uhat);
    Ok(HighamInstance {
        n: uhat.rows() + 1,
        uhat,
        a,
        family: Family::Custom,
        seed: None,
        strictly_valid,
    })
}

/// Draws `Û` (size `n-1`) for one of the random families, in binary64.
///
/// A draw with a zero diagonal entry is replaced by a fresh draw on the next
/// ChaCha stream.
pub fn random_uhat(n: usize, family: Family, seed: u64) -> Result<Matrix<f64>> {
    if n < 2 {
        return Err(Error::InvalidDimension { got: n, min: 2 });
    }
    let m = n - 1;
    for stream in 0.. {
        let mut normals = NormalStream::with_stream(seed, stream);
        let t = Matrix::from_fn(
            m,
            m,
            |r, c| {
                if r <= c {
                    normals.next_normal()
                } else {
                    0.0
                }
            },
        );
        let uhat = match family {
            Family::RandomTriu => t,
            Family::ScaledTriuPlusI => {
                let (norm, _) = spectral_norm(&t, 1e-10, 10_000);
                Matrix::from_fn(m, m, |r, c| {
                    let scaled = t[(r, c)] / norm;
                    if r == c {
                        scaled + 1.0
                    } else {
                        scaled
                    }
                })
            }
            other => {
                return Err(Error::Parse(format!("{other} is not a random family")));
            }
        };
        if (0..m).all(|k| uhat[(k, k)] != 0.0) {
            return Ok(uhat);
        }
    }
    unreachable!("stream counter exhausted")
}

/// Outcome of checking an instance against the maximal-growth characterization.
#[derive(Debug, Clone, PartialEq)]
pub struct ValidationReport {
    pub n: usize,
    pub lhat_uhat_max: BigRational,
    pub ones_uhat_max: BigRational,
    pub a_max: BigRational,
    pub strictly_valid: bool,
    /// Stored `A` equals the block assembly from `Û`.
    pub structure_ok: bool,
    pub genp_last_pivot: Option<BigRational>,
    /// GENP last pivot is exactly `2^(n-1)`.
    pub last_pivot_ok: bool,
    pub gepp_growth: Option<BigRational>,
    pub gepp_swaps: Option<usize>,
}

impl ValidationReport {
    /// Structure and last pivot hold; strictly valid instances additionally
    /// need exchange-free GEPP with growth exactly `2^(n-1)`.
    pub fn passed(&self) -> bool {
        let growth_ok = !self.strictly_valid
            || (self.gepp_swaps == Some(0)
                && self.gepp_growth == Some(BigRational::pow2(self.n as i64 - 1, ())));
        self.structure_ok && self.last_pivot_ok && growth_ok
    }
}

pub fn validate(inst: &HighamInstance) -> ValidationReport {
    let (lhat_uhat_max, ones_uhat_max) = constraint_norms(&inst.uhat);
    let one = BigRational::one(());
    let strictly_valid = lhat_uhat_max <= one && ones_uhat_max <= one;
    let structure_ok = assemble(&inst.uhat) == inst.a;
    let genp_last_pivot = genp(&inst.a).ok().map(|lu| lu.last_pivot().clone());
    let last_pivot_ok = genp_last_pivot.as_ref() == Some(&inst.last_pivot());
    let gepp_run = gepp(&inst.a).ok();
    ValidationReport {
        n: inst.n,
        lhat_uhat_max,
        ones_uhat_max,
        a_max: inst.a.max_abs(),
        strictly_valid,
        structure_ok,
        genp_last_pivot,
        last_pivot_ok,
        gepp_growth: gepp_run.as_ref().map(|lu| lu.growth_factor.clone()),
        gepp_swaps: gepp_run.map(|lu| lu.swaps),
    }
}

/// Row signs and order taking an ingested matrix to canonical form.
///
/// Canonical row `k` is `signs[k] * A[perm[k]]`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Canonicalization {
    pub signs: Vec<i8>,
    pub perm: Vec<usize>,
}

impl Canonicalization {
    pub fn identity(n: usize) -> Self {
        Canonicalization {
            signs: vec![1; n],
            perm: (0..n).collect(),
        }
    }

    pub fn is_identity(&self) -> bool {
        *self == Self::identity(self.perm.len())
    }

    pub fn apply<T: Scalar>(&self, a: &Matrix<T>) -> Matrix<T> {
        Matrix::from_fn(a.rows(), a.cols(), |r, c| {
            let x = &a[(self.perm[r], c)];
            if self.signs[r] < 0 {
                x.neg()
            } else {
                x.clone()
            }
        })
    }
}

/// Recovers `D`, `P` and `Û` from a row-permuted, row-sign-flipped image of a
/// canonical matrix.
///
/// Signs come from the last column, which must be `±1`. In canonical form row
/// `r < n` agrees with the last row on exactly its first `r - 1` entries, so
/// the order is read off agreement-prefix lengths against a candidate last row.
pub fn canonicalize(a: &Matrix<BigRational>) -> Result<(HighamInstance, Canonicalization)> {
    let n = a.ensure_square()?;
    if n < 2 {
        return Err(Error::InvalidDimension { got: n, min: 2 });
    }
    let one = BigRational::one(());
    let mut row_sign = Vec::with_capacity(n);
    for r in 0..n {
        let last = &a[(r, n - 1)];
        if *last == one {
            row_sign.push(1i8);
        } else if *last == -&one {
            row_sign.push(-1i8);
        } else {
            return Err(Error::NotHighamForm(format!(
                "last column entry of row {} is not ±1",
                r + 1
            )));
        }
    }
    let signed = Canonicalization {
        signs: row_sign.clone(),
        perm: (0..n).collect(),
    }
    .apply(a);

    let agreement = |x: usize, z: usize| {
        (0..n - 1)
            .take_while(|&c| signed[(x, c)] == signed[(z, c)])
            .count()
    };

    // The last two canonical rows can be exchanged, which negates
    // Û_{n-1,n-1}; the orientation with a positive entry is preferred.
    let mut fallback = None;
    for z in (0..n).rev() {
        let mut order = vec![usize::MAX; n];
        order[n - 1] = z;
        let mut ok = true;
        for r in (0..n).filter(|&r| r != z) {
            let k = agreement(r, z);
            if k >= n - 1 || order[k] != usize::MAX {
                ok = false;
                break;
            }
            order[k] = r;
        }
        if !ok {
            continue;
        }
        let canon = Canonicalization {
            signs: order.iter().map(|&r| row_sign[r]).collect(),
            perm: order,
        };
        let c = canon.apply(a);
        // Û_r = (L̂Û)_r + Σ_{k<r} Û_k
        let m = n - 1;
        let mut prefix = vec![BigRational::zero(()); m];
        let mut urows = Vec::with_capacity(m);
        for r in 0..m {
            let row: Vec<BigRational> = (0..m).map(|col| &c[(r, col)] + &prefix[col]).collect();
            for (p, v) in prefix.iter_mut().zip(&row) {
                *p += v;
            }
            urows.push(row);
        }
        let uhat = Matrix::from_rows(urows)?;
        if check_uhat(&uhat).is_err() || assemble(&uhat) != c {
            continue;
        }
        let inst = from_uhat(uhat, false)?;
        if inst.a != c {
            continue;
        }
        if inst.uhat[(m - 1, m - 1)] > BigRational::zero(()) {
            return Ok((inst, canon));
        }
        fallback.get_or_insert((inst, canon));
    }
    fallback.ok_or_else(|| Error::NotHighamForm("no row order matches the block pattern".into()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::rational_from_f64;

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

    #[test]
    fn wilkinson_small_cases() {
        assert_eq!(
            wilkinson(3).unwrap().a,
            int_matrix(&[&[1, 0, 1], &[-1, 1, 1], &[-1, -1, 1]])
        );
        assert_eq!(wilkinson(2).unwrap().a, int_matrix(&[&[1, 1], &[-1, 1]]));
        assert_eq!(
            wilkinson(1),
            Err(Error::InvalidDimension { got: 1, min: 2 })
        );
        let lu = genp(&wilkinson(4).unwrap().a).unwrap();
        assert_eq!(lu.growth_factor, q(8, 1));
    }

    #[test]
    fn identity_uhat_is_wilkinson() {
        for n in 2..10 {
            let custom = from_uhat(Matrix::identity(n - 1, ()), true).unwrap();
            assert_eq!(custom.a, wilkinson(n).unwrap().a);
            assert!(custom.strictly_valid);
        }
    }

    #[test]
    fn oversized_uhat_is_rescaled() {
        let inst = from_uhat(int_matrix(&[&[2]]), true).unwrap();
        assert_eq!(inst.uhat, int_matrix(&[&[1]]));
        assert_eq!(inst.a, int_matrix(&[&[1, 1], &[-1, 1]]));
        assert!(inst.strictly_valid);
    }

    #[test]
    fn oversized_uhat_kept_when_not_enforcing() {
        let inst = from_uhat(int_matrix(&[&[2, 0], &[0, 2]]), false).unwrap();
        assert!(!inst.strictly_valid);
        let report = validate(&inst);
        assert!(!report.strictly_valid);
        assert_eq!(report.ones_uhat_max, q(2, 1));
        assert!(report.structure_ok);
    }

    #[test]
    fn singular_or_non_triangular_uhat_rejected() {
        assert_eq!(
            from_uhat(int_matrix(&[&[1, 1], &[0, 0]]), true),
            Err(Error::SingularUhat(2))
        );
        assert!(matches!(
            from_uhat(int_matrix(&[&[1, 0], &[1, 1]]), true),
            Err(Error::NotUpperTriangular { row: 2, col: 1 })
        ));
    }

    #[test]
    fn wilkinson_validates() {
        let report = validate(&wilkinson(8).unwrap());
        assert!(report.passed());
        assert_eq!(report.genp_last_pivot, Some(q(128, 1)));
        assert_eq!(report.a_max, q(1, 1));
        assert_eq!(report.gepp_swaps, Some(0));
    }

    #[test]
    fn random_draws_are_deterministic() {
        for family in [Family::RandomTriu, Family::ScaledTriuPlusI] {
            let a = random_uhat(9, family, 17).unwrap();
            assert_eq!(a, random_uhat(9, family, 17).unwrap());
            assert_ne!(a, random_uhat(9, family, 18).unwrap());
            assert!(a.is_upper_triangular());
            assert_eq!(a.rows(), 8);
        }
    }

    #[test]
    fn scaled_family_diagonal_stays_in_open_band() {
        for seed in 0..20 {
            let u = random_uhat(12, Family::ScaledTriuPlusI, seed).unwrap();
            for k in 0..11 {
                let d = u[(k, k)];
                assert!(d > 0.0 && d < 2.0, "diag {d}");
            }
            assert!(u.entries().iter().enumerate().all(|(idx, &x)| {
                let (r, c) = (idx / 11, idx % 11);
                r == c || x.abs() <= 1.0
            }));
        }
    }

    #[test]
    fn random_instances_validate_at_n_100() {
        let inst = HighamInstance::generate(Family::RandomTriu, 100, 3).unwrap();
        assert!(inst.strictly_valid);
        assert_eq!(inst.a.max_abs(), q(1, 1));
        let (lu, ones) = inst.constraint_norms();
        assert!(lu <= q(1, 1) && ones <= q(1, 1));
    }

    #[test]
    fn scaled_family_is_used_as_drawn() {
        let inst = HighamInstance::generate(Family::ScaledTriuPlusI, 10, 5).unwrap();
        let drawn = random_uhat(10, Family::ScaledTriuPlusI, 5).unwrap();
        assert_eq!(inst.uhat, drawn.map(|&x| rational_from_f64(x)));
        assert!(validate(&inst).structure_ok);
        assert!(validate(&inst).last_pivot_ok);
    }

    #[test]
    fn canonical_input_is_a_fixed_point() {
        let w = wilkinson(6).unwrap();
        let (inst, canon) = canonicalize(&w.a).unwrap();
        assert!(canon.is_identity());
        assert_eq!(inst.a, w.a);
        assert_eq!(inst.uhat, w.uhat);
    }

    #[test]
    fn recovers_swap_and_sign() {
        let w = wilkinson(5).unwrap();
        let mut scrambled = w.a.clone();
        scrambled.swap_rows(0, 1);
        for c in 0..5 {
            scrambled[(2, c)] = -scrambled[(2, c)].clone();
        }
        let (inst, canon) = canonicalize(&scrambled).unwrap();
        assert_eq!(inst.a, w.a);
        assert_eq!(canon.perm, vec![1, 0, 2, 3, 4]);
        assert_eq!(canon.signs, vec![1, 1, -1, 1, 1]);
        assert_eq!(canon.apply(&scrambled), w.a);
    }

    #[test]
    fn recovers_random_instances_under_scrambling() {
        for seed in 0..5 {
            let inst = HighamInstance::generate(Family::RandomTriu, 7, seed).unwrap();
            let scramble = Canonicalization {
                signs: vec![1, -1, 1, -1, -1, 1, 1],
                perm: vec![6, 2, 0, 5, 1, 3, 4],
            };
            let scrambled = scramble.apply(&inst.a);
            let (found, canon) = canonicalize(&scrambled).unwrap();
            assert_eq!(canon.apply(&scrambled), found.a);
            let m = 5;
            assert!(found.uhat[(m, m)] > BigRational::zero(()));
            let mut expected = inst.uhat.clone();
            expected[(m, m)] = Signed::abs(&expected[(m, m)]);
            assert_eq!(found.uhat, expected);
            assert!(validate(&found).passed());
        }
    }

    #[test]
    fn last_two_rows_exchange_is_normalized() {
        let inst = from_uhat(int_matrix(&[&[1, 0], &[0, -1]]).map(|x| x / q(2, 1)), true).unwrap();
        let (found, canon) = canonicalize(&inst.a).unwrap();
        assert_eq!(canon.perm, vec![0, 2, 1]);
        assert_eq!(found.uhat[(1, 1)], q(1, 2));
    }

    #[test]
    fn arbitrary_matrix_rejected() {
        let a = int_matrix(&[&[3, 1, 4], &[1, 5, 9], &[2, 6, 5]]);
        assert!(matches!(canonicalize(&a), Err(Error::NotHighamForm(_))));
        let b = int_matrix(&[&[1, 0, 1], &[1, 1, 1], &[-1, -1, 1]]);
        assert!(matches!(canonicalize(&b), Err(Error::NotHighamForm(_))));
    }

    #[test]
    fn family_names_round_trip() {
        for f in [
            Family::Wilkinson,
            Family::RandomTriu,
            Family::ScaledTriuPlusI,
        ] {
            assert_eq!(f.name().parse::<Family>().unwrap(), f);
        }
        assert!("nope".parse::<Family>().is_err());
    }
}
