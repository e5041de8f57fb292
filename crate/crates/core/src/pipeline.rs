//! End-to-end runs: zero-shift check, sampling, filtering, recovery and
//! finalization, plus parameter sweeps over many seeded trials.

use std::path::PathBuf;
use std::time::Instant;

use rand::Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::io::OutputFormat;
use crate::lattice::{HiddenShift, OracleModel, Params, DEFAULT_ENUM_CEILING};
use crate::recovery::{filter_c1, orthogonal_fraction, recover, RecoveryReport, Strategy};
use crate::spectrum::{draw_samples, p_closed_grid, rng_from_seed, Sample, SamplerOptions};
use crate::statevec::{
    build_state_within, cyclic_mass_c1_with, cyclic_overlap_product, fourier_measure,
    step0_is_zero_shift,
};

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ShiftChoice {
    Explicit(Vec<u64>),
    /// Uniform over `{1, …, 2^k}ⁿ`, drawn from the run's generator.
    Random,
}

impl std::fmt::Display for ShiftChoice {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            ShiftChoice::Explicit(v) => f.write_str(&crate::io::fmt_vec(v)),
            ShiftChoice::Random => f.write_str("random"),
        }
    }
}

impl std::str::FromStr for ShiftChoice {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        if s.trim() == "random" {
            return Ok(ShiftChoice::Random);
        }
        s.split([',', ';'])
            .map(|f| {
                f.trim()
                    .parse::<u64>()
                    .map_err(|e| Error::Parse(format!("shift coordinate {f:?}: {e}")))
            })
            .collect::<Result<Vec<_>>>()
            .map(ShiftChoice::Explicit)
    }
}

#[derive(Debug, Clone)]
pub struct RunConfig {
    pub n: usize,
    pub q: u32,
    pub shift: ShiftChoice,
    pub samples: usize,
    pub seed: u64,
    pub strategy: Strategy,
    pub tolerance: Option<f64>,
    pub format: OutputFormat,
    pub out: Option<PathBuf>,
    pub max_enum: u64,
}

impl RunConfig {
    pub fn new(n: usize, q: u32, shift: ShiftChoice, samples: usize, seed: u64) -> Self {
        RunConfig {
            n,
            q,
            shift,
            samples,
            seed,
            strategy: Strategy::Ml,
            tolerance: None,
            format: OutputFormat::Csv,
            out: None,
            max_enum: DEFAULT_ENUM_CEILING,
        }
    }

    /// Checks every field before any computation and returns the instance geometry.
    pub fn validate(&self) -> Result<Params> {
        let p = Params::new(self.n, self.q)?;
        if let ShiftChoice::Explicit(u) = &self.shift {
            HiddenShift::new(u, &p)?;
        }
        if self.samples == 0 {
            return Err(Error::InvalidParams(
                "sample count must be at least 1".into(),
            ));
        }
        if let Some(t) = self.tolerance {
            if !(0.0..1.0).contains(&t) {
                return Err(Error::InvalidParams(format!(
                    "tolerance {t} must lie in [0, 1)"
                )));
            }
        }
        Ok(p)
    }
}

/// Everything a single run produced, including what the report omits.
#[derive(Debug, Clone)]
pub struct PipelineRun {
    pub planted: HiddenShift,
    pub samples: Vec<Sample>,
    /// Fraction of `c = 1` samples orthogonal to the planted shift.
    pub orthogonal_fraction: f64,
    pub report: RecoveryReport,
}

/// Independent 64-bit stream key derived from a base seed (SplitMix64 finalizer).
pub fn derive_seed(base: u64, stream: u64) -> u64 {
    let mut z = base ^ stream.wrapping_add(1).wrapping_mul(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

pub fn run_pipeline(cfg: &RunConfig) -> Result<RecoveryReport> {
    execute(cfg, cfg.seed).map(|run| run.report)
}

/// Runs all steps with the generator seeded by `seed`.
pub fn execute(cfg: &RunConfig, seed: u64) -> Result<PipelineRun> {
    let p = cfg.validate()?;
    let mut rng = rng_from_seed(seed);
    let planted = match &cfg.shift {
        ShiftChoice::Explicit(u) => HiddenShift::new(u, &p)?,
        ShiftChoice::Random => {
            let bound = p.shift_bound();
            let u: Vec<u64> = (0..p.n).map(|_| rng.gen_range(1..=bound)).collect();
            HiddenShift::new(&u, &p)?
        }
    };
    let oracle = OracleModel::new(planted.clone(), &p)?;

    if step0_is_zero_shift(&oracle) {
        return Ok(PipelineRun {
            planted,
            samples: Vec::new(),
            orthogonal_fraction: 0.0,
            report: RecoveryReport {
                recovered_u_tilde: vec![0; p.n],
                recovered_u: vec![0.0; p.n],
                sample_count_used: 0,
                strategy: cfg.strategy,
                log_likelihood: None,
                candidate_set_size: None,
            },
        });
    }

    let opts = SamplerOptions {
        ceiling: cfg.max_enum,
        allow_rejection: true,
    };
    let samples = draw_samples(&planted, &p, cfg.samples, &opts, &mut rng)?;
    let kept = filter_c1(&samples);
    let orthogonal = orthogonal_fraction(&planted.u_tilde, &kept, &p);
    let report = recover(&kept, &p, cfg.strategy, cfg.tolerance)?;
    Ok(PipelineRun {
        planted,
        samples,
        orthogonal_fraction: orthogonal,
        report,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepRow {
    pub n: usize,
    pub q: u32,
    pub k: u32,
    pub u_tilde: String,
    pub m: usize,
    pub trials: usize,
    pub successes: usize,
    pub success_rate: f64,
    pub mean_orthogonal_sample_fraction: f64,
    pub wall_time: f64,
    /// `ok`, or the error that stopped the row.
    pub status: String,
}

/// Runs `trials` seeded trials per configuration.
///
/// Trial `t` of a row uses the generator keyed by `derive_seed(cfg.seed, t)`, so
/// rows that share a seed see the same planted shifts and sample prefixes.
/// A trial whose `c = 1` sample list is empty, or whose filter leaves no
/// candidate, counts as a failed recovery. Any other error marks the row.
pub fn run_sweep(grid: &[RunConfig], trials: usize) -> Vec<SweepRow> {
    grid.par_iter().map(|cfg| sweep_row(cfg, trials)).collect()
}

fn sweep_row(cfg: &RunConfig, trials: usize) -> SweepRow {
    let started = Instant::now();
    let mut row = SweepRow {
        n: cfg.n,
        q: cfg.q,
        k: cfg.q / 4,
        u_tilde: cfg.shift.to_string(),
        m: cfg.samples,
        trials,
        successes: 0,
        success_rate: 0.0,
        mean_orthogonal_sample_fraction: 0.0,
        wall_time: 0.0,
        status: "ok".into(),
    };
    let mut fraction_sum = 0.0;
    for t in 0..trials {
        match execute(cfg, derive_seed(cfg.seed, t as u64)) {
            Ok(run) => {
                fraction_sum += run.orthogonal_fraction;
                if run.report.recovered_u_tilde == run.planted.u_tilde {
                    row.successes += 1;
                }
            }
            Err(Error::EmptySamples) | Err(Error::NoCandidate(_)) => {}
            Err(e) => {
                row.status = format!("error: {e}");
                break;
            }
        }
    }
    if trials > 0 {
        row.success_rate = row.successes as f64 / trials as f64;
        row.mean_orthogonal_sample_fraction = fraction_sum / trials as f64;
    }
    row.wall_time = started.elapsed().as_secs_f64();
    row
}

/// State-vector simulation compared against the closed form and the exact
/// cyclic-grid prediction.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SimulationSummary {
    pub n: usize,
    pub q: u32,
    pub u_tilde: Vec<u64>,
    pub total_mass: f64,
    pub p_c1: f64,
    /// `max_ỹ |P(ỹ,1) − p_closed(ỹ/Δ)/Nⁿ|`.
    pub max_dev_closed_form: f64,
    /// `max_ỹ |P(ỹ,1) − cyclic_mass_c1(ỹ)|`.
    pub max_dev_cyclic: f64,
}

pub fn simulate(p: &Params, shift: &HiddenShift, ceiling: u64) -> Result<SimulationSummary> {
    let oracle = OracleModel::new(shift.clone(), p)?;
    let state = build_state_within(p, &oracle, ceiling)?;
    let dist = fourier_measure(&state)?;
    let points = dist.outcome_count() as f64;
    let mut max_closed = 0.0f64;
    let mut max_cyclic = 0.0f64;
    let overlap = cyclic_overlap_product(&shift.u_tilde, p);
    for index in 0..dist.outcome_count() {
        let y = p.unpack(index);
        let sim = dist.prob_index(index, 1);
        let closed = p_closed_grid(&y, &shift.u_tilde, p) / points;
        max_closed = max_closed.max((sim - closed).abs());
        max_cyclic =
            max_cyclic.max((sim - cyclic_mass_c1_with(&y, &shift.u_tilde, overlap, p)).abs());
    }
    Ok(SimulationSummary {
        n: p.n,
        q: p.q,
        u_tilde: shift.u_tilde.clone(),
        total_mass: dist.total(),
        p_c1: dist.marginal(1),
        max_dev_closed_form: max_closed,
        max_dev_cyclic: max_cyclic,
    })
}
