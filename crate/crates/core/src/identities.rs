//! Exact binomial identities behind the closed-form solution count at
//! `ũ = (2^k, …, 2^k)`. Everything here is arbitrary-precision integer
//! arithmetic.

use num_bigint::{BigInt, BigUint};
use num_traits::{One, Signed, Zero};
use serde::Serialize;

use crate::error::{Error, Result};

/// `C(a, b)` for non-negative `a`; zero when `b > a`.
pub fn binom(a: u64, b: u64) -> BigUint {
    if b > a {
        return BigUint::zero();
    }
    let b = b.min(a - b);
    let mut acc = BigUint::one();
    for i in 0..b {
        // acc·(a−i)/(i+1) stays integral: it is C(a, i+1)·(i+1)!/(i+1)!.
        acc = acc * BigUint::from(a - i) / BigUint::from(i + 1);
    }
    acc
}

/// Polynomial binomial `a(a−1)⋯(a−b+1)/b!`, defined for every integer `a`.
///
/// Agrees with [`binom`] for `a ≥ 0`; for `a < 0` it equals `(−1)^b C(b−a−1, b)`.
pub fn binom_signed(a: &BigInt, b: u64) -> BigInt {
    if !a.is_negative() {
        let a = a.magnitude();
        if &BigUint::from(b) > a {
            return BigInt::zero();
        }
        return BigInt::from(binom_big(a, b));
    }
    let upper: BigInt = BigInt::from(b) - a - 1;
    let magnitude = binom_big(upper.magnitude(), b);
    let value = BigInt::from(magnitude);
    if b % 2 == 1 {
        -value
    } else {
        value
    }
}

fn binom_big(a: &BigUint, b: u64) -> BigUint {
    let mut acc = BigUint::one();
    for i in 0..b {
        acc = acc * (a - BigUint::from(i)) / BigUint::from(i + 1);
    }
    acc
}

fn alternating_sum(terms: impl Iterator<Item = (u64, BigInt)>) -> BigInt {
    terms.fold(
        BigInt::zero(),
        |acc, (i, t)| if i % 2 == 0 { acc + t } else { acc - t },
    )
}

/// Both sides of the lowering identity
/// `Σ_{i=0}^{n} (−1)^i C(n,i) C(L−il, n) = Σ_{i=0}^{n} (−1)^i C(n,i) C(L−il−1, n)`.
///
/// At `L = nl` the last right-hand term has upper argument `−1`; it is
/// evaluated with the polynomial binomial, `C(−1, n) = (−1)^n`.
pub fn landl_pair(n: u64, big_l: i64, l: u64) -> Result<(BigInt, BigInt)> {
    let nl = (n as i128) * (l as i128);
    if (big_l as i128) < nl {
        return Err(Error::Precondition(format!("L = {big_l} < n·l = {nl}")));
    }
    let side = |offset: i64| {
        alternating_sum((0..=n).map(|i| {
            let upper = BigInt::from(big_l) - BigInt::from(i) * BigInt::from(l) - offset;
            (i, BigInt::from(binom(n, i)) * binom_signed(&upper, n))
        }))
    };
    Ok((side(0), side(1)))
}

fn check_nk(n: u64, k: u64) -> Result<()> {
    if n == 0 || k == 0 {
        return Err(Error::Precondition("n and k must be at least 1".into()));
    }
    if k > 15 {
        return Err(Error::Precondition(format!(
            "k = {k} is beyond the supported range"
        )));
    }
    Ok(())
}

/// `Σ_{j=0}^{n−1} (−1)^j C(n−1, j) C(n−1 + (n−j)2^{4k} − i·2^{3k}, n−1)`.
pub fn sigma_sum(n: u64, k: u64, i: u64) -> Result<BigInt> {
    check_nk(n, k)?;
    if i == 0 || i > 1 << k {
        return Err(Error::Precondition(format!(
            "i = {i} must lie in 1..=2^{k}"
        )));
    }
    Ok(sigma_inner(n, k, i))
}

fn sigma_inner(n: u64, k: u64, offset_mult: u64) -> BigInt {
    let big = BigInt::one() << (4 * k);
    let small = BigInt::one() << (3 * k);
    alternating_sum((0..n).map(|j| {
        let upper =
            BigInt::from(n - 1) + BigInt::from(n - j) * &big - BigInt::from(offset_mult) * &small;
        (
            j,
            BigInt::from(binom(n - 1, j)) * binom_signed(&upper, n - 1),
        )
    }))
}

/// Inclusion–exclusion count `Σ_{i=1}^{2^k} sigma_sum(n, k, i)` of solutions at the maximizer.
pub fn total_count(n: u64, k: u64) -> Result<BigInt> {
    check_nk(n, k)?;
    Ok((1..=(1u64 << k)).map(|i| sigma_inner(n, k, i)).sum())
}

/// `2^k Σ_{i=0}^{n−1} (−1)^i C(n−1, i) C(n−1 + (n−i)2^{4k} − 2^{3k}, n−1)`, with a fixed `2^{3k}` offset.
pub fn displayed_count_fixed_offset(n: u64, k: u64) -> Result<BigInt> {
    check_nk(n, k)?;
    Ok(sigma_inner(n, k, 1) << k)
}

/// Variant where the summation index also multiplies `2^{3k}`:
/// `2^k Σ_{i=0}^{n−1} (−1)^i C(n−1, i) C(n−1 + (n−i)2^{4k} − i·2^{3k}, n−1)`.
pub fn displayed_count_indexed_offset(n: u64, k: u64) -> Result<BigInt> {
    check_nk(n, k)?;
    let big = BigInt::one() << (4 * k);
    let small = BigInt::one() << (3 * k);
    let sum = alternating_sum((0..n).map(|i| {
        let upper = BigInt::from(n - 1) + BigInt::from(n - i) * &big - BigInt::from(i) * &small;
        (
            i,
            BigInt::from(binom(n - 1, i)) * binom_signed(&upper, n - 1),
        )
    }));
    Ok(sum << k)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct IdentityReport {
    pub identity: String,
    /// `name=value` pairs, e.g. `n=2;k=1;i=1`.
    pub parameters: String,
    #[serde(serialize_with = "crate::io::bigint_as_string")]
    pub lhs: BigInt,
    #[serde(serialize_with = "crate::io::bigint_as_string")]
    pub rhs: BigInt,
    pub equal: bool,
}

impl IdentityReport {
    fn new(identity: &str, parameters: String, lhs: BigInt, rhs: BigInt) -> Self {
        let equal = lhs == rhs;
        IdentityReport {
            identity: identity.to_string(),
            parameters,
            lhs,
            rhs,
            equal,
        }
    }
}

pub fn landl_report(n: u64, big_l: i64, l: u64) -> Result<IdentityReport> {
    let (lhs, rhs) = landl_pair(n, big_l, l)?;
    Ok(IdentityReport::new(
        "lowering",
        format!("n={n};L={big_l};l={l}"),
        lhs,
        rhs,
    ))
}

pub fn sigma_report(n: u64, k: u64, i: u64) -> Result<IdentityReport> {
    let lhs = sigma_sum(n, k, i)?;
    let rhs = BigInt::one() << (4 * k * (n - 1));
    Ok(IdentityReport::new(
        "sigma",
        format!("n={n};k={k};i={i}"),
        lhs,
        rhs,
    ))
}

/// Inclusion–exclusion total against `2^{k(4n−3)}`.
pub fn total_report(n: u64, k: u64) -> Result<IdentityReport> {
    let lhs = total_count(n, k)?;
    let rhs = BigInt::one() << (k * (4 * n - 3));
    Ok(IdentityReport::new(
        "total",
        format!("n={n};k={k}"),
        lhs,
        rhs,
    ))
}

/// Sweeps the default parameter grid: lowering identity for `n ≤ 5, l ≤ 10,
/// L ∈ [nl, nl+50]`, sigma for `n ≤ 4, k ≤ 2, 1 ≤ i ≤ 2^k`, totals for
/// `n ≤ 4, k ≤ 2`.
pub fn identity_grid() -> Vec<IdentityReport> {
    let mut out = Vec::new();
    for n in 0..=5u64 {
        for l in 0..=10u64 {
            let base = (n * l) as i64;
            for big_l in base..=base + 50 {
                out.push(landl_report(n, big_l, l).expect("L ≥ nl by construction"));
            }
        }
    }
    out.extend(sigma_and_totals(1..=4, 1..=2));
    out
}

/// Sigma and total reports restricted to the given `n` and `k` ranges.
pub fn sigma_and_totals(
    ns: impl IntoIterator<Item = u64> + Clone,
    ks: impl IntoIterator<Item = u64> + Clone,
) -> Vec<IdentityReport> {
    let mut out = Vec::new();
    for n in ns.clone() {
        for k in ks.clone() {
            for i in 1..=(1u64 << k) {
                out.push(sigma_report(n, k, i).expect("parameters in range"));
            }
        }
    }
    for n in ns {
        for k in ks.clone() {
            out.push(total_report(n, k).expect("parameters in range"));
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn int(v: i64) -> BigInt {
        BigInt::from(v)
    }

    #[test]
    fn binom_examples() {
        assert_eq!(binom(25, 1), BigUint::from(25u32));
        assert_eq!(binom(7, 0), BigUint::one());
        assert_eq!(binom(0, 0), BigUint::one());
        assert_eq!(binom(5, 7), BigUint::zero());
        assert_eq!(binom(52, 5), BigUint::from(2_598_960u32));
        assert_eq!(binom_signed(&int(-1), 3), int(-1));
        assert_eq!(binom_signed(&int(-1), 0), int(1));
        assert_eq!(binom_signed(&int(-3), 2), int(6));
        assert_eq!(binom_signed(&int(4), 6), int(0));
    }

    #[test]
    fn landl_examples() {
        assert_eq!(landl_pair(1, 5, 2).unwrap(), (int(2), int(2)));
        assert_eq!(landl_pair(0, 17, 3).unwrap(), (int(1), int(1)));
        assert_eq!(landl_pair(1, 2, 2).unwrap(), (int(2), int(2)));
        assert!(landl_pair(2, 3, 2).is_err());
    }

    #[test]
    fn sigma_examples() {
        assert_eq!(sigma_sum(2, 1, 1).unwrap(), int(16));
        for k in 1..=3 {
            for i in [1, 1 << k] {
                assert_eq!(sigma_sum(1, k, i).unwrap(), int(1));
            }
        }
        assert!(sigma_sum(2, 1, 3).is_err());
        assert!(sigma_sum(2, 1, 0).is_err());
    }

    #[test]
    fn totals() {
        assert_eq!(total_count(1, 1).unwrap(), int(2));
        assert_eq!(total_count(2, 1).unwrap(), int(32));
        assert_eq!(total_count(3, 1).unwrap(), int(512));
        assert_eq!(total_count(2, 2).unwrap(), int(1024));
    }

    #[test]
    fn displayed_variants() {
        for (n, k) in [(1, 1), (2, 1), (3, 1), (2, 2), (4, 2)] {
            let target = BigInt::one() << (k * (4 * n - 3));
            assert_eq!(displayed_count_fixed_offset(n, k).unwrap(), target);
        }
        // The indexed-offset display only agrees for n = 1.
        assert_eq!(displayed_count_indexed_offset(1, 1).unwrap(), int(2));
        assert_eq!(displayed_count_indexed_offset(2, 1).unwrap(), int(48));
    }

    #[test]
    fn grid_is_all_equal() {
        let grid = identity_grid();
        assert_eq!(
            grid.iter().filter(|r| r.identity == "lowering").count(),
            6 * 11 * 51
        );
        assert!(grid.iter().all(|r| r.equal));
    }
}
