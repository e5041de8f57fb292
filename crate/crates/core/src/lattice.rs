//! Instance geometry, the sine window and planted hidden shifts.
//!
//! Everything lives on the sampling lattice `δℤⁿ` folded onto the cyclic
//! group `ℤ_{2^q}ⁿ`. With `q = 4k` the scale factors `Δ = 2^{q/2}` and
//! `δ = 2^{-q/2}` are exact powers of two, so moving between integer labels
//! and real coordinates never rounds.

use std::f64::consts::{PI, SQRT_2};

use serde::Serialize;

use crate::error::{Error, Result};

/// Default ceiling on the number of lattice points any exhaustive pass may visit.
pub const DEFAULT_ENUM_CEILING: u64 = 1 << 24;

/// Largest grid exponent accepted; keeps `2^q` and every product mod `2^q` inside `u128`.
pub const MAX_Q: u32 = 60;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Params {
    pub n: usize,
    pub q: u32,
    pub k: u32,
    /// `Δ = 2^{q/2}`.
    pub delta_big: f64,
    /// `δ = 2^{-q/2}`.
    pub delta_small: f64,
    /// `N = 2^q` points per dimension.
    pub grid_size: u64,
}

impl Params {
    pub fn new(n: usize, q: u32) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidParams(
                "dimension n must be at least 1".into(),
            ));
        }
        if q == 0 || !q.is_multiple_of(4) {
            return Err(Error::InvalidParams(format!(
                "q = {q} is not a positive multiple of 4"
            )));
        }
        if q > MAX_Q {
            return Err(Error::InvalidParams(format!("q = {q} exceeds {MAX_Q}")));
        }
        let half = (q / 2) as i32;
        Ok(Params {
            n,
            q,
            k: q / 4,
            delta_big: 2f64.powi(half),
            delta_small: 2f64.powi(-half),
            grid_size: 1u64 << q,
        })
    }

    /// Upper bound `2^k` on each integer shift coordinate.
    pub fn shift_bound(&self) -> u64 {
        1u64 << self.k
    }

    /// `N^n`, or `None` if it does not fit in 64 bits.
    pub fn point_count(&self) -> Option<u64> {
        let bits = self.q as usize * self.n;
        (bits < 64).then(|| 1u64 << bits)
    }

    /// Returns `N^n` if it is within `ceiling`, otherwise a resource error.
    pub fn enumerable(&self, ceiling: u64) -> Result<u64> {
        match self.point_count() {
            Some(points) if points <= ceiling => Ok(points),
            other => Err(Error::ResourceCeiling {
                points: other
                    .map(|p| p.to_string())
                    .unwrap_or_else(|| format!("2^{}", self.q as usize * self.n)),
                ceiling,
                n: self.n,
                q: self.q,
            }),
        }
    }

    /// Packs a lattice point into a row-major index (first coordinate most significant).
    pub fn pack(&self, coords: &[u64]) -> u64 {
        coords
            .iter()
            .fold(0u64, |acc, &c| (acc << self.q) | (c & (self.grid_size - 1)))
    }

    pub fn unpack(&self, index: u64) -> Vec<u64> {
        let mask = self.grid_size - 1;
        let mut out = vec![0u64; self.n];
        let mut rest = index;
        for slot in out.iter_mut().rev() {
            *slot = rest & mask;
            rest >>= self.q;
        }
        out
    }

    /// `⟨a, b⟩ mod 2^q`.
    pub fn inner_mod(&self, a: &[u64], b: &[u64]) -> u64 {
        let modulus = self.grid_size as u128;
        let sum = a.iter().zip(b).fold(0u128, |acc, (&x, &y)| {
            (acc + (x as u128 % modulus) * (y as u128 % modulus)) % modulus
        });
        sum as u64
    }

    pub fn check_dim(&self, len: usize) -> Result<()> {
        if len != self.n {
            return Err(Error::DimensionMismatch {
                expected: self.n,
                got: len,
            });
        }
        Ok(())
    }
}

/// `ω(x) = √2 sin(πx)` on `[0, 1]`, zero elsewhere.
pub fn window_1d(x: f64) -> f64 {
    if !(0.0..=1.0).contains(&x) || x == 1.0 {
        return 0.0;
    }
    SQRT_2 * (PI * x).sin()
}

/// `w(x) = Δ^{-n/2} ∏ ω(x_j / Δ)`, supported on `[0, Δ]ⁿ`.
pub fn window_nd(x: &[f64], p: &Params) -> Result<f64> {
    p.check_dim(x.len())?;
    let scale = p.delta_big.powf(-(p.n as f64) / 2.0);
    Ok(x.iter()
        .map(|&xi| window_1d(xi / p.delta_big))
        .fold(scale, |acc, v| acc * v))
}

/// Window evaluated at the lattice point `δx̃`.
///
/// `δx̃ / Δ = x̃ / 2^q` exactly, so this is `2^{-qn/4} ∏ √2 sin(π x̃_j / 2^q)`.
pub fn window_at_lattice(x_tilde: &[u64], p: &Params) -> f64 {
    let n = p.grid_size as f64;
    let scale = p.delta_big.powf(-(p.n as f64) / 2.0);
    x_tilde
        .iter()
        .map(|&xi| window_1d(xi as f64 / n))
        .fold(scale, |acc, v| acc * v)
}

/// A planted shift `ũ` together with its real image `u = δũ`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct HiddenShift {
    pub u_tilde: Vec<u64>,
    pub u_real: Vec<f64>,
}

impl HiddenShift {
    /// Validates `0 ≤ ũ_i ≤ 2^k` and computes `u = δũ`.
    pub fn new(u_tilde: &[u64], p: &Params) -> Result<Self> {
        p.check_dim(u_tilde.len())?;
        let bound = p.shift_bound();
        if let Some((index, &value)) = u_tilde.iter().enumerate().find(|(_, &v)| v > bound) {
            return Err(Error::ShiftOutOfRange {
                index,
                value,
                bound,
            });
        }
        Ok(HiddenShift {
            u_tilde: u_tilde.to_vec(),
            u_real: u_tilde.iter().map(|&v| v as f64 * p.delta_small).collect(),
        })
    }

    pub fn zero(p: &Params) -> Self {
        HiddenShift {
            u_tilde: vec![0; p.n],
            u_real: vec![0.0; p.n],
        }
    }

    pub fn is_zero(&self) -> bool {
        self.u_tilde.iter().all(|&v| v == 0)
    }
}

/// The shift oracle on the cyclic grid: `f(x̃, c)` is the basis label `x̃ − cũ mod 2^q`.
///
/// Labels for `c = 0` and `c = 1` are each a permutation of the grid, and
/// `f(x̃, 0) = f(x̃ + ũ, 1)` holds for every `x̃`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OracleModel {
    pub shift: HiddenShift,
    /// Lipschitz constant `√2·Δ`.
    pub alpha: f64,
    modulus: u64,
}

impl OracleModel {
    pub fn new(shift: HiddenShift, p: &Params) -> Result<Self> {
        p.check_dim(shift.u_tilde.len())?;
        Ok(OracleModel {
            shift,
            alpha: SQRT_2 * p.delta_big,
            modulus: p.grid_size,
        })
    }

    pub fn modulus(&self) -> u64 {
        self.modulus
    }

    pub fn index(&self, x_tilde: &[u64], c: u8) -> Vec<u64> {
        let m = self.modulus;
        x_tilde
            .iter()
            .zip(&self.shift.u_tilde)
            .map(|(&x, &u)| {
                let x = x % m;
                if c & 1 == 1 {
                    (x + m - u % m) % m
                } else {
                    x
                }
            })
            .collect()
    }
}
