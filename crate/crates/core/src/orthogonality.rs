//! Solutions of `⟨ũ, ỹ⟩ ≡ 0 (mod 2^q)`: exhaustive counting, the gcd formula,
//! the maximal count at `ũ = (2^k, …, 2^k)`, and the three solution-set maps
//! used to compare counts between related shift vectors.

use num_bigint::BigUint;
use num_integer::Integer;
use num_traits::One;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::lattice::DEFAULT_ENUM_CEILING;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum CountMethod {
    Brute,
    GcdFormula,
    LemmaFormula,
}

impl std::fmt::Display for CountMethod {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            CountMethod::Brute => "brute",
            CountMethod::GcdFormula => "gcd-formula",
            CountMethod::LemmaFormula => "lemma-formula",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct CountReport {
    pub u_tilde: Vec<u64>,
    pub q: u32,
    #[serde(serialize_with = "crate::io::biguint_as_string")]
    pub count: BigUint,
    pub method: CountMethod,
}

fn check_q(q: u32) -> Result<u64> {
    if q == 0 || q > 60 {
        return Err(Error::InvalidParams(format!("q = {q} must lie in 1..=60")));
    }
    Ok(1u64 << q)
}

fn inner_mod(u: &[u64], y: &[u64], modulus: u64) -> u64 {
    let m = modulus as u128;
    u.iter().zip(y).fold(0u128, |acc, (&a, &b)| {
        (acc + (a as u128 % m) * (b as u128 % m)) % m
    }) as u64
}

/// Visits every `ỹ ∈ ℤ_{2^q}ⁿ` in lexicographic order.
fn for_each_point(n: usize, modulus: u64, mut f: impl FnMut(&[u64])) {
    let mut y = vec![0u64; n];
    loop {
        f(&y);
        let mut i = n;
        loop {
            if i == 0 {
                return;
            }
            i -= 1;
            y[i] += 1;
            if y[i] < modulus {
                break;
            }
            y[i] = 0;
        }
    }
}

fn enumeration_guard(n: usize, q: u32, ceiling: u64) -> Result<()> {
    let bits = q as usize * n;
    if bits >= 64 || (1u64 << bits) > ceiling {
        return Err(Error::ResourceCeiling {
            points: if bits >= 64 {
                format!("2^{bits}")
            } else {
                (1u64 << bits).to_string()
            },
            ceiling,
            n,
            q,
        });
    }
    Ok(())
}

/// Counts solutions by walking the whole grid.
pub fn brute_count(u_tilde: &[u64], q: u32) -> Result<BigUint> {
    brute_count_within(u_tilde, q, DEFAULT_ENUM_CEILING)
}

pub fn brute_count_within(u_tilde: &[u64], q: u32, ceiling: u64) -> Result<BigUint> {
    let modulus = check_q(q)?;
    if u_tilde.is_empty() {
        return Err(Error::InvalidParams("empty shift vector".into()));
    }
    enumeration_guard(u_tilde.len(), q, ceiling)?;
    let mut count = 0u64;
    for_each_point(u_tilde.len(), modulus, |y| {
        if inner_mod(u_tilde, y, modulus) == 0 {
            count += 1;
        }
    });
    Ok(BigUint::from(count))
}

/// All solutions in lexicographic order.
pub fn solution_set(u_tilde: &[u64], q: u32, ceiling: u64) -> Result<Vec<Vec<u64>>> {
    let modulus = check_q(q)?;
    enumeration_guard(u_tilde.len(), q, ceiling)?;
    let mut out = Vec::new();
    for_each_point(u_tilde.len(), modulus, |y| {
        if inner_mod(u_tilde, y, modulus) == 0 {
            out.push(y.to_vec());
        }
    });
    Ok(out)
}

/// `2^{q(n−1)} · gcd(2^q, ũ_1, …, ũ_n)`.
///
/// The map `ỹ ↦ ⟨ũ, ỹ⟩` is a homomorphism onto the subgroup `gℤ_{2^q}` with
/// `g = gcd(2^q, ũ)`, whose order is `2^q/g`; the kernel has `2^{qn}·g/2^q` elements.
pub fn gcd_count(u_tilde: &[u64], q: u32) -> Result<BigUint> {
    let modulus = check_q(q)?;
    if u_tilde.is_empty() {
        return Err(Error::InvalidParams("empty shift vector".into()));
    }
    let g = u_tilde.iter().fold(modulus, |acc, &u| acc.gcd(&u));
    Ok((BigUint::one() << (q as usize * (u_tilde.len() - 1))) * BigUint::from(g))
}

/// `2^{k(4n−3)}`, the count at `ũ = (2^k, …, 2^k)` with `q = 4k`.
pub fn lemma_max_count(n: usize, k: u32) -> Result<BigUint> {
    if n == 0 || k == 0 {
        return Err(Error::InvalidParams("n and k must be at least 1".into()));
    }
    Ok(BigUint::one() << (k as usize * (4 * n - 3)))
}

pub fn count_reports(u_tilde: &[u64], q: u32, ceiling: u64) -> Result<Vec<CountReport>> {
    let mut out = vec![CountReport {
        u_tilde: u_tilde.to_vec(),
        q,
        count: brute_count_within(u_tilde, q, ceiling)?,
        method: CountMethod::Brute,
    }];
    out.push(CountReport {
        u_tilde: u_tilde.to_vec(),
        q,
        count: gcd_count(u_tilde, q)?,
        method: CountMethod::GcdFormula,
    });
    if q.is_multiple_of(4) && u_tilde.iter().all(|&u| u == 1u64 << (q / 4)) {
        out.push(CountReport {
            u_tilde: u_tilde.to_vec(),
            q,
            count: lemma_max_count(u_tilde.len(), q / 4)?,
            method: CountMethod::LemmaFormula,
        });
    }
    Ok(out)
}

/// A mapped solution together with the vector it solves for.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MappedSolution {
    pub u_prime: Vec<u64>,
    pub y_prime: Vec<u64>,
}

fn require_solution(y: &[u64], u: &[u64], modulus: u64) -> Result<()> {
    if y.len() != u.len() {
        return Err(Error::DimensionMismatch {
            expected: u.len(),
            got: y.len(),
        });
    }
    if y.iter().any(|&v| v >= modulus) {
        return Err(Error::Precondition(
            "ỹ has a coordinate outside ℤ_{2^q}".into(),
        ));
    }
    if inner_mod(u, y, modulus) != 0 {
        return Err(Error::Precondition(format!(
            "{y:?} is not orthogonal to {u:?}"
        )));
    }
    Ok(())
}

/// Doubling map for a repeated coordinate.
///
/// With `ũ_i = ũ_j` (j the first other index holding the same value) the
/// target is `ũ'` with `ũ'_i = 2ũ_i`, and
/// `ỹ_i = 2m ↦ (ỹ'_i, ỹ'_j) = (m, ỹ_j)`,
/// `ỹ_i = 2m − 1 ↦ (m, ỹ_j − 1)`.
/// The inner product is preserved modulo `2^q`. Two solutions that differ
/// by `(+1, −1)` in positions `(i, j)` land on the same image, so the map
/// is not injective in general; see [`prop1_shear_map`] for an injective one.
pub fn prop1_map(y_tilde: &[u64], u_tilde: &[u64], i: usize, q: u32) -> Result<MappedSolution> {
    let modulus = check_q(q)?;
    require_solution(y_tilde, u_tilde, modulus)?;
    let j = partner_index(u_tilde, i)?;
    let mut y = y_tilde.to_vec();
    let yi = y_tilde[i];
    if yi.is_multiple_of(2) {
        y[i] = yi / 2;
    } else {
        y[i] = yi.div_ceil(2);
        y[j] = (y[j] + modulus - 1) % modulus;
    }
    Ok(MappedSolution {
        u_prime: doubled(u_tilde, i, modulus),
        y_prime: y,
    })
}

/// Injective alternative to [`prop1_map`]: `ỹ'_j = ỹ_j − ỹ_i`, every other coordinate kept.
///
/// `2ũ_i ỹ_i + ũ_i(ỹ_j − ỹ_i) = ũ_i ỹ_i + ũ_j ỹ_j`, and the shear is invertible on `ℤ_{2^q}ⁿ`.
pub fn prop1_shear_map(
    y_tilde: &[u64],
    u_tilde: &[u64],
    i: usize,
    q: u32,
) -> Result<MappedSolution> {
    let modulus = check_q(q)?;
    require_solution(y_tilde, u_tilde, modulus)?;
    let j = partner_index(u_tilde, i)?;
    let mut y = y_tilde.to_vec();
    y[j] = (y_tilde[j] + modulus - y_tilde[i]) % modulus;
    Ok(MappedSolution {
        u_prime: doubled(u_tilde, i, modulus),
        y_prime: y,
    })
}

fn partner_index(u: &[u64], i: usize) -> Result<usize> {
    if i >= u.len() {
        return Err(Error::Precondition(format!("index {i} out of range")));
    }
    u.iter()
        .enumerate()
        .position(|(j, &v)| j != i && v == u[i])
        .ok_or_else(|| Error::Precondition(format!("ũ_{i} = {} is not repeated", u[i])))
}

fn doubled(u: &[u64], i: usize, modulus: u64) -> Vec<u64> {
    let mut out = u.to_vec();
    out[i] = (2 * u[i]) % modulus;
    out
}

/// Raises the smallest power-of-two coordinate to the next smallest exponent.
///
/// For `ũ = (2^{t_1}, …, 2^{t_n})` let `a` be the lowest index with minimal
/// exponent and `t_b` the minimum exponent over the other coordinates. Every
/// solution has `2^{t_b − t_a} | ỹ_a`, and `ỹ'_a = ỹ_a / 2^{t_b − t_a}`.
pub fn prop2_map(y_tilde: &[u64], u_tilde: &[u64], q: u32) -> Result<MappedSolution> {
    let modulus = check_q(q)?;
    if u_tilde.len() < 2 {
        return Err(Error::Precondition("needs at least two coordinates".into()));
    }
    if y_tilde.len() != u_tilde.len() {
        return Err(Error::DimensionMismatch {
            expected: u_tilde.len(),
            got: y_tilde.len(),
        });
    }
    let exps: Vec<u32> = u_tilde
        .iter()
        .map(|&u| {
            if u.is_power_of_two() && u < modulus {
                Ok(u.trailing_zeros())
            } else {
                Err(Error::Precondition(format!(
                    "coordinate {u} is not a power of two below 2^{q}"
                )))
            }
        })
        .collect::<Result<_>>()?;
    let low = (0..exps.len()).min_by_key(|&i| (exps[i], i)).unwrap();
    let next = (0..exps.len())
        .filter(|&i| i != low)
        .map(|i| exps[i])
        .min()
        .unwrap();
    let gap = next - exps[low];
    let divisor = 1u64 << gap;
    if !y_tilde[low].is_multiple_of(divisor) {
        return Err(Error::Precondition(format!(
            "ỹ_{low} = {} is not a multiple of 2^{gap}",
            y_tilde[low]
        )));
    }
    require_solution(y_tilde, u_tilde, modulus)?;
    let mut y = y_tilde.to_vec();
    y[low] /= divisor;
    let mut u = u_tilde.to_vec();
    u[low] = 1u64 << next;
    Ok(MappedSolution {
        u_prime: u,
        y_prime: y,
    })
}

/// Splits `value = v·2^t` with `v` odd.
pub fn odd_part(value: u64) -> (u64, u32) {
    let t = value.trailing_zeros();
    (value >> t, t)
}

/// Replaces `ũ_j = v·2^t` (v odd, v > 1) by `2^t` using the interval construction.
///
/// With `M = 2^{q−t}` and `l` chosen so that `⌊lM/v⌋ < ỹ_j ≤ ⌊(l+1)M/v⌋`,
/// `ỹ'_j = v(ỹ_j − ⌊lM/v⌋) − r_l` where `r_l = lM − v⌊lM/v⌋`; `ỹ_j = 0` maps to 0.
/// This preserves the inner product modulo `2^q`. The image coordinate lies in
/// `[0, M]`, so the map is a bijection of solution sets when `t = 0` but can
/// collide when `t ≥ 1`; see [`prop3_unit_map`].
pub fn prop3_map(y_tilde: &[u64], u_tilde: &[u64], j: usize, q: u32) -> Result<MappedSolution> {
    let modulus = check_q(q)?;
    let (v, t) = odd_index_parts(u_tilde, j, modulus)?;
    require_solution(y_tilde, u_tilde, modulus)?;
    let m = 1u128 << (q - t);
    let v128 = v as u128;
    let yj = y_tilde[j] as u128;
    let image = if yj == 0 {
        0
    } else {
        // ⌊lM/v⌋ < y ⇔ lM < vy and y ≤ ⌊(l+1)M/v⌋ ⇔ vy ≤ (l+1)M.
        let l = (v128 * yj).div_ceil(m) - 1;
        let floor = l * m / v128;
        let r = l * m - v128 * floor;
        v128 * (yj - floor) - r
    };
    let mut y = y_tilde.to_vec();
    y[j] = (image % modulus as u128) as u64;
    let mut u = u_tilde.to_vec();
    u[j] = 1u64 << t;
    Ok(MappedSolution {
        u_prime: u,
        y_prime: y,
    })
}

/// Bijective alternative to [`prop3_map`]: `ỹ'_j = v·ỹ_j mod 2^q`.
pub fn prop3_unit_map(
    y_tilde: &[u64],
    u_tilde: &[u64],
    j: usize,
    q: u32,
) -> Result<MappedSolution> {
    let modulus = check_q(q)?;
    let (v, t) = odd_index_parts(u_tilde, j, modulus)?;
    require_solution(y_tilde, u_tilde, modulus)?;
    let mut y = y_tilde.to_vec();
    y[j] = ((v as u128 * y_tilde[j] as u128) % modulus as u128) as u64;
    let mut u = u_tilde.to_vec();
    u[j] = 1u64 << t;
    Ok(MappedSolution {
        u_prime: u,
        y_prime: y,
    })
}

fn odd_index_parts(u: &[u64], j: usize, modulus: u64) -> Result<(u64, u32)> {
    let value = *u
        .get(j)
        .ok_or_else(|| Error::Precondition(format!("index {j} out of range")))?;
    if value == 0 || value >= modulus {
        return Err(Error::Precondition(format!(
            "ũ_{j} = {value} must lie in 1..2^q"
        )));
    }
    let (v, t) = odd_part(value);
    if v == 1 {
        return Err(Error::Precondition(format!(
            "ũ_{j} = {value} is already a power of two"
        )));
    }
    Ok((v, t))
}

/// Whether a map is injective on `domain`, and whether its image equals `target`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct MapCheck {
    pub domain_size: usize,
    pub image_size: usize,
    pub injective: bool,
    pub onto_target: bool,
    pub preserves_inner_product: bool,
}

/// Applies `map` over the full solution set of `u_tilde` and inspects the image.
pub fn check_map<F>(u_tilde: &[u64], q: u32, map: F) -> Result<MapCheck>
where
    F: Fn(&[u64]) -> Result<MappedSolution>,
{
    let modulus = check_q(q)?;
    let domain = solution_set(u_tilde, q, DEFAULT_ENUM_CEILING)?;
    let mut image = std::collections::BTreeSet::new();
    let mut preserves = true;
    let mut u_prime = None;
    for y in &domain {
        let mapped = map(y)?;
        preserves &=
            inner_mod(&mapped.u_prime, &mapped.y_prime, modulus) == inner_mod(u_tilde, y, modulus);
        u_prime.get_or_insert_with(|| mapped.u_prime.clone());
        image.insert(mapped.y_prime);
    }
    let onto_target = match u_prime {
        Some(up) => {
            let target = solution_set(&up, q, DEFAULT_ENUM_CEILING)?;
            target.len() == image.len() && target.iter().all(|y| image.contains(y))
        }
        None => domain.is_empty(),
    };
    Ok(MapCheck {
        domain_size: domain.len(),
        image_size: image.len(),
        injective: image.len() == domain.len(),
        onto_target,
        preserves_inner_product: preserves,
    })
}
