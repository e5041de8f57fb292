use std::fs::File;
use std::io::{BufReader, BufWriter, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde::Serialize;

use hidden_shift::error::{Error, Result};
use hidden_shift::identities::{identity_grid, sigma_and_totals};
use hidden_shift::io::{read_samples, write_records, write_samples, OutputFormat, Tabular};
use hidden_shift::lattice::{HiddenShift, Params, DEFAULT_ENUM_CEILING};
use hidden_shift::orthogonality::count_reports;
use hidden_shift::pipeline::{simulate, RunConfig, ShiftChoice};
use hidden_shift::recovery::{filter_c1, recover, Strategy};
use hidden_shift::spectrum::{draw_samples, rng_from_seed, SamplerOptions};
use hidden_shift::{run_pipeline, run_sweep};

/// Exit status when a computed check disagrees with its expected value.
const MISMATCH: u8 = 4;
const EXACT_TOL: f64 = 1e-10;

#[derive(Parser)]
#[command(
    name = "hidden-shift",
    version,
    about = "Continuous hidden-shift simulator and verifier"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Output {
    /// `csv` or `json`.
    #[arg(long, default_value = "csv")]
    format: OutputFormat,
    /// Write to this file instead of stdout.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct Instance {
    #[arg(long)]
    n: usize,
    /// Lattice resolution; must be a positive multiple of 4.
    #[arg(long)]
    q: u32,
    /// Comma-separated integer shift `ũ`, or `random`.
    #[arg(long)]
    shift: ShiftChoice,
    #[arg(long, default_value_t = DEFAULT_ENUM_CEILING)]
    max_enum: u64,
}

#[derive(Subcommand)]
enum Command {
    /// Simulate the state vector and compare the outcome law with the closed form.
    Simulate {
        #[command(flatten)]
        inst: Instance,
        #[command(flatten)]
        output: Output,
    },
    /// Draw Fourier samples and write them as a sample file.
    Sample {
        #[command(flatten)]
        inst: Instance,
        #[arg(long)]
        samples: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Count solutions of `⟨ũ, ỹ⟩ ≡ 0 (mod 2^q)`.
    Count {
        #[arg(long)]
        q: u32,
        #[arg(long, value_delimiter = ',')]
        shift: Vec<u64>,
        #[arg(long, default_value_t = DEFAULT_ENUM_CEILING)]
        max_enum: u64,
        #[command(flatten)]
        output: Output,
    },
    /// Check the binomial identities exactly.
    Identity {
        /// Restrict sigma and total checks to this `n`; without it the full grid runs.
        #[arg(long)]
        n: Option<u64>,
        #[arg(long, requires = "n")]
        k: Option<u64>,
        #[command(flatten)]
        output: Output,
    },
    /// Recover the shift from a sample file.
    Recover {
        input: PathBuf,
        #[arg(long)]
        n: usize,
        #[arg(long)]
        q: u32,
        #[arg(long, default_value = "ml")]
        strategy: Strategy,
        #[arg(long)]
        tolerance: Option<f64>,
        #[command(flatten)]
        output: Output,
    },
    /// Run sampling and recovery end to end.
    Pipeline {
        #[command(flatten)]
        inst: Instance,
        #[arg(long)]
        samples: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value = "ml")]
        strategy: Strategy,
        #[arg(long)]
        tolerance: Option<f64>,
        #[command(flatten)]
        output: Output,
    },
    /// Repeat the pipeline over a grid of configurations.
    Sweep {
        #[arg(long, value_delimiter = ',')]
        n: Vec<usize>,
        #[arg(long, value_delimiter = ',')]
        q: Vec<u32>,
        #[arg(long, value_delimiter = ',')]
        samples: Vec<usize>,
        #[arg(long, default_value = "random")]
        shift: ShiftChoice,
        #[arg(long, default_value_t = 20)]
        trials: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value = "ml")]
        strategy: Strategy,
        #[arg(long)]
        tolerance: Option<f64>,
        #[arg(long, default_value_t = DEFAULT_ENUM_CEILING)]
        max_enum: u64,
        #[command(flatten)]
        output: Output,
    },
}

fn emit<T: Serialize + Tabular>(records: &[T], output: &Output) -> Result<()> {
    match &output.out {
        Some(path) => {
            let mut w = BufWriter::new(File::create(path)?);
            write_records(records, output.format, &mut w)?;
            w.flush()?;
        }
        None => write_records(records, output.format, std::io::stdout().lock())?,
    }
    Ok(())
}

fn explicit_shift(inst: &Instance, p: &Params) -> Result<HiddenShift> {
    match &inst.shift {
        ShiftChoice::Explicit(u) => HiddenShift::new(u, p),
        ShiftChoice::Random => Err(Error::InvalidParams(
            "this command needs an explicit shift".into(),
        )),
    }
}

fn run(cli: Cli) -> Result<u8> {
    match cli.command {
        Command::Simulate { inst, output } => {
            let p = Params::new(inst.n, inst.q)?;
            let shift = explicit_shift(&inst, &p)?;
            let summary = simulate(&p, &shift, inst.max_enum)?;
            emit(std::slice::from_ref(&summary), &output)?;
            let exact = (summary.total_mass - 1.0).abs() <= EXACT_TOL
                && summary.max_dev_cyclic <= EXACT_TOL;
            Ok(if exact { 0 } else { MISMATCH })
        }
        Command::Sample {
            inst,
            samples,
            seed,
            out,
        } => {
            let p = Params::new(inst.n, inst.q)?;
            let shift = explicit_shift(&inst, &p)?;
            let opts = SamplerOptions {
                ceiling: inst.max_enum,
                allow_rejection: true,
            };
            let drawn = draw_samples(&shift, &p, samples, &opts, &mut rng_from_seed(seed))?;
            match out {
                Some(path) => {
                    let mut w = BufWriter::new(File::create(path)?);
                    write_samples(&drawn, p.n, &mut w)?;
                    w.flush()?;
                }
                None => write_samples(&drawn, p.n, std::io::stdout().lock())?,
            }
            Ok(0)
        }
        Command::Count {
            q,
            shift,
            max_enum,
            output,
        } => {
            let reports = count_reports(&shift, q, max_enum)?;
            emit(&reports, &output)?;
            let agree = reports.windows(2).all(|w| w[0].count == w[1].count);
            Ok(if agree { 0 } else { MISMATCH })
        }
        Command::Identity { n, k, output } => {
            let reports = match n {
                Some(n) => {
                    let ks: Vec<u64> = match k {
                        Some(k) => vec![k],
                        None => vec![1, 2],
                    };
                    sigma_and_totals([n], ks)
                }
                None => identity_grid(),
            };
            emit(&reports, &output)?;
            Ok(if reports.iter().all(|r| r.equal) {
                0
            } else {
                MISMATCH
            })
        }
        Command::Recover {
            input,
            n,
            q,
            strategy,
            tolerance,
            output,
        } => {
            let p = Params::new(n, q)?;
            let samples = read_samples(BufReader::new(File::open(input)?), &p)?;
            let report = recover(&filter_c1(&samples), &p, strategy, tolerance)?;
            emit(std::slice::from_ref(&report), &output)?;
            Ok(0)
        }
        Command::Pipeline {
            inst,
            samples,
            seed,
            strategy,
            tolerance,
            output,
        } => {
            let cfg = RunConfig {
                strategy,
                tolerance,
                format: output.format,
                out: output.out.clone(),
                max_enum: inst.max_enum,
                ..RunConfig::new(inst.n, inst.q, inst.shift.clone(), samples, seed)
            };
            let report = run_pipeline(&cfg)?;
            emit(std::slice::from_ref(&report), &output)?;
            Ok(0)
        }
        Command::Sweep {
            n,
            q,
            samples,
            shift,
            trials,
            seed,
            strategy,
            tolerance,
            max_enum,
            output,
        } => {
            let mut grid = Vec::new();
            for &n in &n {
                for &q in &q {
                    for &m in &samples {
                        let cfg = RunConfig {
                            strategy,
                            tolerance,
                            max_enum,
                            ..RunConfig::new(n, q, shift.clone(), m, seed)
                        };
                        cfg.validate()?;
                        grid.push(cfg);
                    }
                }
            }
            emit(&run_sweep(&grid, trials), &output)?;
            Ok(0)
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
