//! Closed-form Fourier-sampling distribution and a seeded sampler for it.

use std::f64::consts::PI;

use rand::distributions::{Distribution, WeightedIndex};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::lattice::{HiddenShift, Params, DEFAULT_ENUM_CEILING};

/// Grids up to this many points per register are sampled by exact categorical draws.
pub const EXACT_SAMPLING_LIMIT: u64 = 1 << 24;

/// The generator behind every seeded entry point.
pub type SampleRng = ChaCha20Rng;

pub fn rng_from_seed(seed: u64) -> SampleRng {
    ChaCha20Rng::seed_from_u64(seed)
}

/// One measurement outcome `(ỹ, c)`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub struct Sample {
    pub y_tilde: Vec<u64>,
    pub c: u8,
}

/// `∏ cos(π ũ_i / 2^q)`, i.e. `∏ cos(π u_i / Δ)`.
pub fn cosine_product(u_tilde: &[u64], p: &Params) -> f64 {
    let n = p.grid_size as f64;
    u_tilde.iter().map(|&u| (PI * u as f64 / n).cos()).product()
}

/// `p(y, 1) = ½ − ½ cos(2π⟨u, y⟩) ∏ cos(π u_i / Δ)` at a real frequency `y`.
pub fn p_closed(y: &[f64], shift: &HiddenShift, p: &Params) -> Result<f64> {
    p.check_dim(y.len())?;
    p.check_dim(shift.u_real.len())?;
    let inner: f64 = shift.u_real.iter().zip(y).map(|(u, y)| u * y).sum();
    let value = 0.5 - 0.5 * (2.0 * PI * inner).cos() * cosine_product(&shift.u_tilde, p);
    Ok(value.clamp(0.0, 1.0))
}

/// [`p_closed`] at the grid frequency `y = ỹ/Δ`, where `⟨u, y⟩ = ⟨ũ, ỹ⟩ / 2^q`.
///
/// The inner product is reduced modulo `2^q` in integers before the cosine.
pub fn p_closed_grid(y_tilde: &[u64], u_tilde: &[u64], p: &Params) -> f64 {
    let angle = 2.0 * PI * p.inner_mod(u_tilde, y_tilde) as f64 / p.grid_size as f64;
    (0.5 - 0.5 * angle.cos() * cosine_product(u_tilde, p)).clamp(0.0, 1.0)
}

/// Dense probability table over `ℤ_{2^q}ⁿ`, row-major.
#[derive(Debug, Clone)]
pub struct GridMass {
    pub params: Params,
    values: Vec<f64>,
}

impl GridMass {
    pub fn get(&self, y_tilde: &[u64]) -> f64 {
        self.values[self.params.pack(y_tilde) as usize]
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn total(&self) -> f64 {
        self.values.iter().sum()
    }
}

/// The `c = 1` conditional distribution `p_closed(ỹ/Δ) / Σ p_closed`.
pub fn conditional_mass(shift: &HiddenShift, p: &Params) -> Result<GridMass> {
    conditional_mass_within(shift, p, DEFAULT_ENUM_CEILING)
}

pub fn conditional_mass_within(shift: &HiddenShift, p: &Params, ceiling: u64) -> Result<GridMass> {
    p.check_dim(shift.u_tilde.len())?;
    if shift.is_zero() {
        return Err(Error::ZeroShift("the c = 1 outcome has probability zero"));
    }
    let points = p.enumerable(ceiling)?;
    let raw: Vec<f64> = (0..points)
        .map(|i| p_closed_grid(&p.unpack(i), &shift.u_tilde, p))
        .collect();
    let normalizer: f64 = raw.iter().sum();
    Ok(GridMass {
        params: p.clone(),
        values: raw.into_iter().map(|v| v / normalizer).collect(),
    })
}

#[derive(Debug, Clone, Copy)]
pub struct SamplerOptions {
    /// Largest grid the categorical sampler may tabulate.
    pub ceiling: u64,
    pub allow_rejection: bool,
}

impl Default for SamplerOptions {
    fn default() -> Self {
        SamplerOptions {
            ceiling: DEFAULT_ENUM_CEILING,
            allow_rejection: true,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SamplingMethod {
    Categorical,
    Rejection,
}

pub fn sampling_method(p: &Params, opts: &SamplerOptions) -> Result<SamplingMethod> {
    let limit = opts.ceiling.min(EXACT_SAMPLING_LIMIT);
    match p.enumerable(limit) {
        Ok(_) => Ok(SamplingMethod::Categorical),
        Err(_) if opts.allow_rejection => Ok(SamplingMethod::Rejection),
        Err(e) => Err(e),
    }
}

/// Draws `m` independent outcomes from the joint law
/// `P(ỹ, 1) = p_closed(ỹ/Δ)/Nⁿ`, `P(ỹ, 0) = (1 − p_closed(ỹ/Δ))/Nⁿ`.
pub fn draw_samples<R: Rng + ?Sized>(
    shift: &HiddenShift,
    p: &Params,
    m: usize,
    opts: &SamplerOptions,
    rng: &mut R,
) -> Result<Vec<Sample>> {
    p.check_dim(shift.u_tilde.len())?;
    if m == 0 {
        return Err(Error::Precondition(
            "sample count must be at least 1".into(),
        ));
    }
    match sampling_method(p, opts)? {
        SamplingMethod::Categorical => {
            let points = p.point_count().expect("checked by sampling_method");
            let mut weights = Vec::with_capacity(2 * points as usize);
            for i in 0..points {
                let flip = p_closed_grid(&p.unpack(i), &shift.u_tilde, p);
                weights.push(1.0 - flip);
                weights.push(flip);
            }
            let table = WeightedIndex::new(&weights)
                .map_err(|e| Error::Precondition(format!("degenerate outcome weights: {e}")))?;
            Ok((0..m)
                .map(|_| {
                    let idx = table.sample(rng);
                    Sample {
                        y_tilde: p.unpack((idx / 2) as u64),
                        c: (idx % 2) as u8,
                    }
                })
                .collect())
        }
        SamplingMethod::Rejection => {
            let mut out = Vec::with_capacity(m);
            while out.len() < m {
                let y: Vec<u64> = (0..p.n).map(|_| rng.gen_range(0..p.grid_size)).collect();
                let c: u8 = rng.gen_range(0..2);
                let flip = p_closed_grid(&y, &shift.u_tilde, p);
                let accept = if c == 1 { flip } else { 1.0 - flip };
                if rng.gen::<f64>() < accept {
                    out.push(Sample { y_tilde: y, c });
                }
            }
            Ok(out)
        }
    }
}

pub fn draw_samples_seeded(
    shift: &HiddenShift,
    p: &Params,
    m: usize,
    seed: u64,
) -> Result<Vec<Sample>> {
    draw_samples(
        shift,
        p,
        m,
        &SamplerOptions::default(),
        &mut rng_from_seed(seed),
    )
}

#[cfg(test)]
mod tests {
    use super::*;

    fn shift(u: &[u64], p: &Params) -> HiddenShift {
        HiddenShift::new(u, p).unwrap()
    }

    #[test]
    fn closed_form_values() {
        let p = Params::new(1, 4).unwrap();
        let s = shift(&[2], &p);
        let v = p_closed(&[1.0], &s, &p).unwrap();
        assert!((v - (0.5 + 0.5 * (PI / 8.0).cos())).abs() < 1e-15);
        assert!((v - 0.961_939_8).abs() < 1e-7);
        let v = p_closed(&[2.0], &s, &p).unwrap();
        assert!((v - 0.038_060_2).abs() < 1e-7);
        assert!((p_closed_grid(&[4], &[2], &p) - p_closed(&[1.0], &s, &p).unwrap()).abs() < 1e-15);

        let z = HiddenShift::zero(&p);
        for y in [0.0, 0.3, 1.7] {
            assert_eq!(p_closed(&[y], &z, &p).unwrap(), 0.0);
        }
    }

    #[test]
    fn grid_sum_is_half_the_grid() {
        for (n, q) in [(1, 4), (2, 4), (3, 4), (1, 8), (2, 8)] {
            let p = Params::new(n, q).unwrap();
            let total = p.point_count().unwrap();
            let bound = p.shift_bound();
            for u in [vec![1u64; n], vec![bound; n]] {
                let sum: f64 = (0..total)
                    .map(|i| p_closed_grid(&p.unpack(i), &u, &p))
                    .sum();
                assert!((sum - total as f64 / 2.0).abs() <= 1e-9 * total as f64);
            }
        }
    }

    #[test]
    fn conditional_mass_shape() {
        let p = Params::new(2, 4).unwrap();
        let s = shift(&[2, 2], &p);
        let m = conditional_mass(&s, &p).unwrap();
        assert!((m.total() - 1.0).abs() < 1e-12);
        for i in 0..256 {
            let y = p.unpack(i);
            let expect = 2.0 * p_closed_grid(&y, &[2, 2], &p) / 256.0;
            assert!((m.get(&y) - expect).abs() < 1e-15);
        }
        let orth: f64 = (0..256)
            .map(|i| p.unpack(i))
            .filter(|y| p.inner_mod(&[2, 2], y) == 0)
            .map(|y| m.get(&y))
            .sum();
        assert!(orth <= 2f64.powi(-3));
        assert!(matches!(
            conditional_mass(&HiddenShift::zero(&p), &p),
            Err(Error::ZeroShift(_))
        ));
    }

    #[test]
    fn sampler_is_deterministic_and_in_range() {
        let p = Params::new(2, 8).unwrap();
        let s = shift(&[3, 1], &p);
        let a = draw_samples_seeded(&s, &p, 200, 9).unwrap();
        let b = draw_samples_seeded(&s, &p, 200, 9).unwrap();
        assert_eq!(a, b);
        assert!(a
            .iter()
            .all(|x| x.y_tilde.iter().all(|&v| v < 256) && x.c <= 1));
        assert_ne!(a, draw_samples_seeded(&s, &p, 200, 10).unwrap());
    }

    #[test]
    fn rejection_path_when_grid_is_large() {
        let p = Params::new(2, 16).unwrap();
        let opts = SamplerOptions::default();
        assert_eq!(
            sampling_method(&p, &opts).unwrap(),
            SamplingMethod::Rejection
        );
        let s = shift(&[7, 16], &p);
        let a = draw_samples(&s, &p, 500, &opts, &mut rng_from_seed(1)).unwrap();
        assert_eq!(a.len(), 500);
        let ones = a.iter().filter(|x| x.c == 1).count() as f64;
        assert!((ones / 500.0 - 0.5).abs() < 5.0 * (0.25f64 / 500.0).sqrt());

        let strict = SamplerOptions {
            allow_rejection: false,
            ..opts
        };
        assert!(matches!(
            draw_samples(&s, &p, 5, &strict, &mut rng_from_seed(1)),
            Err(Error::ResourceCeiling { .. })
        ));
    }

    #[test]
    fn zero_samples_rejected() {
        let p = Params::new(1, 4).unwrap();
        assert!(draw_samples_seeded(&shift(&[1], &p), &p, 0, 0).is_err());
    }
}
