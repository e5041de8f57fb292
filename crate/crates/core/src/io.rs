//! Output formats and the sample file.
//!
//! Sample files are plain CSV: a header `c,y1,…,yn` followed by one
//! `c,y1,…,yn` record per line, all decimal integers.

use std::io::{BufRead, Write};

use num_bigint::{BigInt, BigUint};
use serde::{Serialize, Serializer};

use crate::error::{Error, Result};
use crate::identities::IdentityReport;
use crate::lattice::Params;
use crate::orthogonality::CountReport;
use crate::pipeline::{SimulationSummary, SweepRow};
use crate::recovery::RecoveryReport;
use crate::spectrum::Sample;

pub(crate) fn biguint_as_string<S: Serializer>(
    v: &BigUint,
    s: S,
) -> std::result::Result<S::Ok, S::Error> {
    s.serialize_str(&v.to_string())
}

pub(crate) fn bigint_as_string<S: Serializer>(
    v: &BigInt,
    s: S,
) -> std::result::Result<S::Ok, S::Error> {
    s.serialize_str(&v.to_string())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum OutputFormat {
    #[default]
    Csv,
    Json,
}

impl std::str::FromStr for OutputFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "csv" => Ok(OutputFormat::Csv),
            "json" => Ok(OutputFormat::Json),
            other => Err(Error::Parse(format!("unknown format {other:?}"))),
        }
    }
}

/// Records that can be flattened into a CSV row.
pub trait Tabular {
    fn header() -> Vec<String>;
    fn row(&self) -> Vec<String>;
}

/// Probabilities and other reals: 17 significant digits in scientific notation.
pub fn fmt_real(v: f64) -> String {
    if v.is_finite() {
        format!("{v:.16e}")
    } else {
        v.to_string()
    }
}

/// Integer vectors inside a single CSV field, `;`-separated.
pub fn fmt_vec(v: &[u64]) -> String {
    v.iter().map(u64::to_string).collect::<Vec<_>>().join(";")
}

pub fn fmt_reals(v: &[f64]) -> String {
    v.iter().map(|x| fmt_real(*x)).collect::<Vec<_>>().join(";")
}

pub fn write_records<T, W>(records: &[T], format: OutputFormat, out: W) -> Result<()>
where
    T: Serialize + Tabular,
    W: Write,
{
    match format {
        OutputFormat::Csv => {
            let mut w = csv::Writer::from_writer(out);
            w.write_record(T::header())?;
            for r in records {
                w.write_record(r.row())?;
            }
            w.flush()?;
        }
        OutputFormat::Json => {
            let mut out = out;
            serde_json::to_writer_pretty(&mut out, records)?;
            writeln!(out)?;
        }
    }
    Ok(())
}

pub fn sample_header(n: usize) -> Vec<String> {
    std::iter::once("c".to_string())
        .chain((1..=n).map(|i| format!("y{i}")))
        .collect()
}

pub fn write_samples<W: Write>(samples: &[Sample], n: usize, out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(sample_header(n))?;
    for s in samples {
        let rec = std::iter::once(s.c.to_string()).chain(s.y_tilde.iter().map(u64::to_string));
        w.write_record(rec)?;
    }
    w.flush()?;
    Ok(())
}

/// Reads a sample file, validating arity, the `c` bit and the coordinate range.
pub fn read_samples<R: BufRead>(input: R, p: &Params) -> Result<Vec<Sample>> {
    let mut out = Vec::new();
    for (line_no, line) in input.lines().enumerate() {
        let line = line?;
        let line = line.trim();
        if line.is_empty() || (line_no == 0 && line.starts_with('c')) {
            continue;
        }
        let fields: Vec<&str> = line.split(',').map(str::trim).collect();
        if fields.len() != p.n + 1 {
            return Err(Error::Parse(format!(
                "line {}: expected {} fields, found {}",
                line_no + 1,
                p.n + 1,
                fields.len()
            )));
        }
        let parse = |f: &str| {
            f.parse::<u64>()
                .map_err(|e| Error::Parse(format!("line {}: {f:?}: {e}", line_no + 1)))
        };
        let c = parse(fields[0])?;
        if c > 1 {
            return Err(Error::Parse(format!(
                "line {}: c = {c} is not a bit",
                line_no + 1
            )));
        }
        let y = fields[1..]
            .iter()
            .map(|f| parse(f))
            .collect::<Result<Vec<u64>>>()?;
        if let Some(v) = y.iter().find(|&&v| v >= p.grid_size) {
            return Err(Error::Parse(format!(
                "line {}: coordinate {v} outside [0, 2^{})",
                line_no + 1,
                p.q
            )));
        }
        out.push(Sample {
            y_tilde: y,
            c: c as u8,
        });
    }
    Ok(out)
}

impl Tabular for RecoveryReport {
    fn header() -> Vec<String> {
        [
            "recovered_u_tilde",
            "recovered_u",
            "sample_count_used",
            "strategy",
            "log_likelihood",
            "candidate_set_size",
        ]
        .map(String::from)
        .to_vec()
    }

    fn row(&self) -> Vec<String> {
        vec![
            fmt_vec(&self.recovered_u_tilde),
            fmt_reals(&self.recovered_u),
            self.sample_count_used.to_string(),
            self.strategy.to_string(),
            self.log_likelihood.map(fmt_real).unwrap_or_default(),
            self.candidate_set_size
                .map(|s| s.to_string())
                .unwrap_or_default(),
        ]
    }
}

impl Tabular for CountReport {
    fn header() -> Vec<String> {
        ["u_tilde", "q", "count", "method"]
            .map(String::from)
            .to_vec()
    }

    fn row(&self) -> Vec<String> {
        vec![
            fmt_vec(&self.u_tilde),
            self.q.to_string(),
            self.count.to_string(),
            self.method.to_string(),
        ]
    }
}

impl Tabular for IdentityReport {
    fn header() -> Vec<String> {
        ["identity", "parameters", "lhs", "rhs", "equal"]
            .map(String::from)
            .to_vec()
    }

    fn row(&self) -> Vec<String> {
        vec![
            self.identity.clone(),
            self.parameters.clone(),
            self.lhs.to_string(),
            self.rhs.to_string(),
            self.equal.to_string(),
        ]
    }
}

impl Tabular for SweepRow {
    fn header() -> Vec<String> {
        [
            "n",
            "q",
            "k",
            "u_tilde",
            "m",
            "trials",
            "successes",
            "success_rate",
            "mean_orthogonal_sample_fraction",
            "wall_time",
            "status",
        ]
        .map(String::from)
        .to_vec()
    }

    fn row(&self) -> Vec<String> {
        vec![
            self.n.to_string(),
            self.q.to_string(),
            self.k.to_string(),
            self.u_tilde.clone(),
            self.m.to_string(),
            self.trials.to_string(),
            self.successes.to_string(),
            fmt_real(self.success_rate),
            fmt_real(self.mean_orthogonal_sample_fraction),
            fmt_real(self.wall_time),
            self.status.clone(),
        ]
    }
}

impl Tabular for SimulationSummary {
    fn header() -> Vec<String> {
        [
            "n",
            "q",
            "u_tilde",
            "total_mass",
            "p_c1",
            "max_dev_closed_form",
            "max_dev_cyclic",
        ]
        .map(String::from)
        .to_vec()
    }

    fn row(&self) -> Vec<String> {
        vec![
            self.n.to_string(),
            self.q.to_string(),
            fmt_vec(&self.u_tilde),
            fmt_real(self.total_mass),
            fmt_real(self.p_c1),
            fmt_real(self.max_dev_closed_form),
            fmt_real(self.max_dev_cyclic),
        ]
    }
}
