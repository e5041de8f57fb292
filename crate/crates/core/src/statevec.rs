//! Exact simulation of the state-preparation, oracle and Fourier-sampling steps.
//!
//! The register triple `|x̃⟩|c⟩|z⟩` is stored sparsely, keyed by packed basis
//! labels. Measurement of the first two registers after the character
//! transform is computed from the branch correlations of the state: for every
//! oracle label `z` the amplitudes sharing that label interfere, amplitudes
//! with different labels do not.

use std::collections::BTreeMap;
use std::f64::consts::PI;

use num_complex::Complex64;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::lattice::{window_at_lattice, OracleModel, Params, DEFAULT_ENUM_CEILING};

/// Tolerance used by the normalization precondition of [`fourier_measure`].
pub const NORM_TOLERANCE: f64 = 1e-10;

/// Basis label `(x̃, c, z)` with both lattice points packed row-major.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct BasisLabel {
    pub x: u64,
    pub c: u8,
    pub z: u64,
}

#[derive(Debug, Clone)]
pub struct QuantumState {
    pub params: Params,
    amplitudes: BTreeMap<BasisLabel, Complex64>,
}

impl QuantumState {
    /// Wraps an arbitrary amplitude map. Zero amplitudes are dropped.
    pub fn from_amplitudes(params: Params, amplitudes: BTreeMap<BasisLabel, Complex64>) -> Self {
        let amplitudes = amplitudes
            .into_iter()
            .filter(|(_, a)| a.norm_sqr() > 0.0)
            .collect();
        QuantumState { params, amplitudes }
    }

    pub fn amplitudes(&self) -> &BTreeMap<BasisLabel, Complex64> {
        &self.amplitudes
    }

    pub fn amplitude(&self, x_tilde: &[u64], c: u8, z: &[u64]) -> Complex64 {
        let label = BasisLabel {
            x: self.params.pack(x_tilde),
            c,
            z: self.params.pack(z),
        };
        self.amplitudes.get(&label).copied().unwrap_or_default()
    }

    pub fn nonzero_count(&self) -> usize {
        self.amplitudes.len()
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amplitudes.values().map(|a| a.norm_sqr()).sum()
    }
}

/// Joint outcome probabilities `P(ỹ, b)` on the first two registers.
#[derive(Debug, Clone)]
pub struct OutcomeDistribution {
    pub params: Params,
    /// Dense, indexed by `2·pack(ỹ) + b`.
    mass: Vec<f64>,
}

impl OutcomeDistribution {
    pub fn prob(&self, y_tilde: &[u64], b: u8) -> f64 {
        self.mass[(self.params.pack(y_tilde) as usize) * 2 + (b & 1) as usize]
    }

    pub fn prob_index(&self, y_index: u64, b: u8) -> f64 {
        self.mass[y_index as usize * 2 + (b & 1) as usize]
    }

    pub fn total(&self) -> f64 {
        self.mass.iter().sum()
    }

    /// `P(c = b)`.
    pub fn marginal(&self, b: u8) -> f64 {
        self.mass.iter().skip((b & 1) as usize).step_by(2).sum()
    }

    pub fn outcome_count(&self) -> u64 {
        (self.mass.len() / 2) as u64
    }

    /// `(ỹ, b, P)` in row-major order of `ỹ`.
    pub fn iter(&self) -> impl Iterator<Item = (Vec<u64>, u8, f64)> + '_ {
        self.mass.iter().enumerate().map(|(i, &p)| {
            let y = self.params.unpack((i / 2) as u64);
            (y, (i % 2) as u8, p)
        })
    }
}

/// Prepares `√(δⁿ/2) Σ w(δx̃)|x̃⟩|c⟩` and applies the oracle into the third register.
pub fn build_state(p: &Params, oracle: &OracleModel) -> Result<QuantumState> {
    build_state_within(p, oracle, DEFAULT_ENUM_CEILING)
}

pub fn build_state_within(p: &Params, oracle: &OracleModel, ceiling: u64) -> Result<QuantumState> {
    p.check_dim(oracle.shift.u_tilde.len())?;
    if oracle.modulus() != p.grid_size {
        return Err(Error::Precondition(format!(
            "oracle modulus {} does not match grid size {}",
            oracle.modulus(),
            p.grid_size
        )));
    }
    let points = p.enumerable(ceiling)?;
    let prefactor = (p.delta_small.powi(p.n as i32) / 2.0).sqrt();

    let mut amplitudes = BTreeMap::new();
    for index in 0..points {
        let x = p.unpack(index);
        let w = window_at_lattice(&x, p);
        if w == 0.0 {
            continue;
        }
        for c in 0..2u8 {
            let z = p.pack(&oracle.index(&x, c));
            amplitudes.insert(
                BasisLabel { x: index, c, z },
                Complex64::new(prefactor * w, 0.0),
            );
        }
    }
    Ok(QuantumState {
        params: p.clone(),
        amplitudes,
    })
}

/// Applies the character transform of `ℤ_{2^q}ⁿ × ℤ₂` to the first two
/// registers and returns the measurement distribution, tracing out `z`.
pub fn fourier_measure(state: &QuantumState) -> Result<OutcomeDistribution> {
    let norm = state.norm_sqr();
    if (norm - 1.0).abs() > NORM_TOLERANCE {
        return Err(Error::Unnormalized(norm));
    }
    let p = &state.params;
    let points = p.enumerable(u64::MAX)?;
    let correlations = branch_correlations(state);

    // P(ỹ,b) = (2Nⁿ)⁻¹ Σ_{d,s} Re[C(d,s) e^{2πi⟨d,ỹ⟩/N}] (−1)^{bs}
    let terms: Vec<(Vec<u64>, u8, Complex64)> = correlations
        .into_iter()
        .map(|((d, s), value)| (p.unpack(d), s, value))
        .collect();
    let scale = 1.0 / (2.0 * points as f64);
    let modulus = p.grid_size as f64;

    let mass: Vec<f64> = (0..points)
        .into_par_iter()
        .flat_map_iter(|index| {
            let y = p.unpack(index);
            let mut same = 0.0;
            let mut flip = 0.0;
            for (d, s, value) in &terms {
                let angle = 2.0 * PI * p.inner_mod(d, &y) as f64 / modulus;
                let re = value.re * angle.cos() - value.im * angle.sin();
                if *s == 0 {
                    same += re;
                } else {
                    flip += re;
                }
            }
            [
                ((same + flip) * scale).max(0.0),
                ((same - flip) * scale).max(0.0),
            ]
        })
        .collect();

    Ok(OutcomeDistribution {
        params: p.clone(),
        mass,
    })
}

/// `C(d, s) = Σ_z Σ a_i ā_j` over pairs in branch `z` with `x_i − x_j = d` and `c_i ⊕ c_j = s`.
fn branch_correlations(state: &QuantumState) -> BTreeMap<(u64, u8), Complex64> {
    let p = &state.params;
    let mut branches: BTreeMap<u64, Vec<(Vec<u64>, u8, Complex64)>> = BTreeMap::new();
    for (label, &amp) in &state.amplitudes {
        branches
            .entry(label.z)
            .or_default()
            .push((p.unpack(label.x), label.c, amp));
    }

    let m = p.grid_size;
    let mut table: BTreeMap<(u64, u8), Complex64> = BTreeMap::new();
    for members in branches.values() {
        for (xi, ci, ai) in members {
            for (xj, cj, aj) in members {
                let d: Vec<u64> = xi.iter().zip(xj).map(|(a, b)| (a + m - b) % m).collect();
                *table.entry((p.pack(&d), ci ^ cj)).or_default() += ai * aj.conj();
            }
        }
    }
    table
}

/// Algorithm step 0: the oracle agrees on `(0, 0)` and `(0, 1)` exactly when `ũ = 0`.
pub fn step0_is_zero_shift(oracle: &OracleModel) -> bool {
    let origin = vec![0u64; oracle.shift.u_tilde.len()];
    oracle.index(&origin, 0) == oracle.index(&origin, 1)
}

/// Normalized overlap of the sampled sine window with its cyclic translate by `u`:
/// `(2/N) Σ_j sin(πj/N)·sin(π((j+u) mod N)/N)`.
///
/// Equals `cos(πu/N)` for `u ∈ {0, 1}` and exceeds it for `2 ≤ u < N`, because
/// the wrapped part of the translate stays non-negative.
pub fn cyclic_window_overlap(u: u64, p: &Params) -> f64 {
    let n = p.grid_size;
    let nf = n as f64;
    let sum: f64 = (0..n)
        .map(|j| (PI * j as f64 / nf).sin() * (PI * ((j + u) % n) as f64 / nf).sin())
        .sum();
    2.0 * sum / nf
}

/// Exact `P(ỹ, 1)` of the cyclic simulation:
/// `[1 − cos(2π⟨ũ,ỹ⟩/N) ∏ overlap(ũ_i)] / (2Nⁿ)`.
pub fn cyclic_mass_c1(y_tilde: &[u64], u_tilde: &[u64], p: &Params) -> f64 {
    cyclic_mass_c1_with(y_tilde, u_tilde, cyclic_overlap_product(u_tilde, p), p)
}

/// `∏ overlap(ũ_i)`.
pub fn cyclic_overlap_product(u_tilde: &[u64], p: &Params) -> f64 {
    u_tilde
        .iter()
        .map(|&u| cyclic_window_overlap(u, p))
        .product()
}

/// [`cyclic_mass_c1`] with the overlap product already computed.
pub fn cyclic_mass_c1_with(y_tilde: &[u64], u_tilde: &[u64], overlap: f64, p: &Params) -> f64 {
    let angle = 2.0 * PI * p.inner_mod(u_tilde, y_tilde) as f64 / p.grid_size as f64;
    let total = (p.grid_size as f64).powi(p.n as i32);
    (1.0 - angle.cos() * overlap) / (2.0 * total)
}
