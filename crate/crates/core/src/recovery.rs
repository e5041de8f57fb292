//! Post-processing of Fourier samples: keep the `c = 1` outcomes, recover `ũ`
//! over the bounded candidate grid `{0, …, 2^k}ⁿ \ {0}`, and scale back to `u`.

use std::collections::BTreeSet;
use std::f64::consts::PI;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lattice::{HiddenShift, Params};
use crate::spectrum::{cosine_product, Sample};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "kebab-case")]
pub enum Strategy {
    #[default]
    Ml,
    #[serde(rename = "diseq-filter")]
    Diseq,
}

impl std::fmt::Display for Strategy {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Strategy::Ml => "ml",
            Strategy::Diseq => "diseq-filter",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RecoveryReport {
    pub recovered_u_tilde: Vec<u64>,
    pub recovered_u: Vec<f64>,
    pub sample_count_used: usize,
    pub strategy: Strategy,
    pub log_likelihood: Option<f64>,
    pub candidate_set_size: Option<usize>,
}

impl std::str::FromStr for Strategy {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "ml" => Ok(Strategy::Ml),
            "diseq" | "diseq-filter" => Ok(Strategy::Diseq),
            other => Err(Error::Parse(format!("unknown strategy {other:?}"))),
        }
    }
}

/// Default disequation tolerance `2·2^{−3k}`.
pub fn default_tolerance(p: &Params) -> f64 {
    2.0 * 2f64.powi(-3 * p.k as i32)
}

pub fn filter_c1(samples: &[Sample]) -> Vec<Vec<u64>> {
    samples
        .iter()
        .filter(|s| s.c == 1)
        .map(|s| s.y_tilde.clone())
        .collect()
}

/// Candidate grid `{0, …, 2^k}ⁿ \ {0}` in lexicographic order.
pub fn candidates(p: &Params) -> Vec<Vec<u64>> {
    let base = p.shift_bound() + 1;
    let total = base.pow(p.n as u32);
    (1..total)
        .map(|mut index| {
            let mut v = vec![0u64; p.n];
            for slot in v.iter_mut().rev() {
                *slot = index % base;
                index /= base;
            }
            v
        })
        .collect()
}

fn check_candidate(candidate: &[u64], p: &Params) -> Result<()> {
    let shift = HiddenShift::new(candidate, p)?;
    if shift.is_zero() {
        return Err(Error::ZeroShift(
            "the zero candidate has no c = 1 likelihood",
        ));
    }
    Ok(())
}

/// `Σ log mass_v(ỹ)` with `mass_v(ỹ) = [1 − cos(2π⟨v,ỹ⟩/2^q) ∏ cos(πv_i/2^q)] / Nⁿ`.
pub fn log_likelihood(candidate: &[u64], samples: &[Vec<u64>], p: &Params) -> Result<f64> {
    check_candidate(candidate, p)?;
    for y in samples {
        p.check_dim(y.len())?;
    }
    Ok(score(candidate, samples, p))
}

fn score(candidate: &[u64], samples: &[Vec<u64>], p: &Params) -> f64 {
    let damping = cosine_product(candidate, p);
    let modulus = p.grid_size as f64;
    let log_points = p.n as f64 * p.q as f64 * std::f64::consts::LN_2;
    let mut total = 0.0;
    for y in samples {
        let angle = 2.0 * PI * p.inner_mod(candidate, y) as f64 / modulus;
        let mass = 1.0 - angle.cos() * damping;
        if mass <= 0.0 {
            return f64::NEG_INFINITY;
        }
        total += mass.ln() - log_points;
    }
    total
}

/// Scores every candidate; the result follows [`candidates`] order.
pub fn score_candidates(samples: &[Vec<u64>], p: &Params) -> Result<Vec<(Vec<u64>, f64)>> {
    for y in samples {
        p.check_dim(y.len())?;
    }
    Ok(candidates(p)
        .into_par_iter()
        .map(|v| {
            let s = score(&v, samples, p);
            (v, s)
        })
        .collect())
}

fn argmax(scored: Vec<(Vec<u64>, f64)>) -> Option<(Vec<u64>, f64)> {
    // Strict comparison keeps the lexicographically smallest among ties.
    let mut best: Option<(Vec<u64>, f64)> = None;
    for (v, s) in scored {
        if best.as_ref().is_none_or(|(_, b)| s > *b) {
            best = Some((v, s));
        }
    }
    best
}

/// Maximum-likelihood `ũ` over the candidate grid.
pub fn recover_shift(samples: &[Vec<u64>], p: &Params) -> Result<Vec<u64>> {
    recover_scored(samples, p).map(|(v, _)| v)
}

pub fn recover_scored(samples: &[Vec<u64>], p: &Params) -> Result<(Vec<u64>, f64)> {
    if samples.is_empty() {
        return Err(Error::EmptySamples);
    }
    let scored = score_candidates(samples, p)?;
    Ok(argmax(scored).expect("candidate grid is never empty"))
}

/// Fraction of samples with `⟨v, ỹ⟩ ≡ 0 (mod 2^q)`; zero for an empty list.
pub fn orthogonal_fraction(v: &[u64], samples: &[Vec<u64>], p: &Params) -> f64 {
    if samples.is_empty() {
        return 0.0;
    }
    let hits = samples.iter().filter(|y| p.inner_mod(v, y) == 0).count();
    hits as f64 / samples.len() as f64
}

/// Candidates whose orthogonal-hit fraction is at most `tolerance`.
pub fn diseq_candidates(
    samples: &[Vec<u64>],
    p: &Params,
    tolerance: f64,
) -> Result<BTreeSet<Vec<u64>>> {
    if !(0.0..1.0).contains(&tolerance) {
        return Err(Error::Precondition(format!(
            "tolerance {tolerance} must lie in [0, 1)"
        )));
    }
    for y in samples {
        p.check_dim(y.len())?;
    }
    Ok(candidates(p)
        .into_iter()
        .filter(|v| orthogonal_fraction(v, samples, p) <= tolerance)
        .collect())
}

/// Filter step followed by likelihood ranking among the survivors.
pub fn recover_diseq(
    samples: &[Vec<u64>],
    p: &Params,
    tolerance: f64,
) -> Result<(Vec<u64>, f64, usize)> {
    if samples.is_empty() {
        return Err(Error::EmptySamples);
    }
    let survivors = diseq_candidates(samples, p, tolerance)?;
    let size = survivors.len();
    let scored: Vec<(Vec<u64>, f64)> = survivors
        .into_iter()
        .map(|v| {
            let s = score(&v, samples, p);
            (v, s)
        })
        .collect();
    let (v, s) = argmax(scored).ok_or(Error::NoCandidate(tolerance))?;
    Ok((v, s, size))
}

/// `u = δũ`.
pub fn finalize(u_tilde: &[u64], p: &Params) -> Result<Vec<f64>> {
    Ok(HiddenShift::new(u_tilde, p)?.u_real)
}

/// Runs the chosen strategy over `c = 1` samples and assembles the report.
pub fn recover(
    samples: &[Vec<u64>],
    p: &Params,
    strategy: Strategy,
    tolerance: Option<f64>,
) -> Result<RecoveryReport> {
    let (u_tilde, ll, size) = match strategy {
        Strategy::Ml => {
            let (v, s) = recover_scored(samples, p)?;
            (v, Some(s), None)
        }
        Strategy::Diseq => {
            let tol = tolerance.unwrap_or_else(|| default_tolerance(p));
            let (v, s, size) = recover_diseq(samples, p, tol)?;
            (v, Some(s), Some(size))
        }
    };
    Ok(RecoveryReport {
        recovered_u: finalize(&u_tilde, p)?,
        recovered_u_tilde: u_tilde,
        sample_count_used: samples.len(),
        strategy,
        log_likelihood: ll,
        candidate_set_size: size,
    })
}
