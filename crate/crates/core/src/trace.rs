//! Per-iteration trace records and their CSV encoding.
//!
//! Trace CSV columns: `k,f,residual,grad_norm,elapsed_ms,inner_iters,status`.
//! Floats are written in shortest round-trip exponent form, so reading a file
//! back reproduces the in-memory records bit for bit.

use std::fmt;
use std::io::{Read, Write};
use std::str::FromStr;

use nalgebra::DVector;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const TRACE_HEADER: [&str; 7] = ["k", "f", "residual", "grad_norm", "elapsed_ms", "inner_iters", "status"];

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Status {
    Running,
    Converged,
    Diverged,
    Capped,
}

impl Status {
    pub fn tag(self) -> &'static str {
        match self {
            Self::Running => "running",
            Self::Converged => "converged",
            Self::Diverged => "diverged",
            Self::Capped => "capped",
        }
    }
}

impl fmt::Display for Status {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.tag())
    }
}

impl FromStr for Status {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "running" => Ok(Self::Running),
            "converged" => Ok(Self::Converged),
            "diverged" => Ok(Self::Diverged),
            "capped" => Ok(Self::Capped),
            other => Err(Error::Parse {
                what: "status",
                reason: format!("unknown status {other:?}"),
            }),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TraceRecord {
    pub k: usize,
    #[serde(rename = "f")]
    pub f_value: f64,
    /// `f(x^k) − f*`; NaN when the oracle has no reference optimum.
    pub residual: f64,
    pub grad_norm: f64,
    pub elapsed_ms: f64,
    /// Cumulative subproblem iterations up to `k`.
    pub inner_iters: u64,
    pub status: Status,
}

impl TraceRecord {
    /// Field-wise equality that treats NaNs with identical bits as equal.
    pub fn same_bits(&self, other: &Self) -> bool {
        self.k == other.k
            && self.f_value.to_bits() == other.f_value.to_bits()
            && self.residual.to_bits() == other.residual.to_bits()
            && self.grad_norm.to_bits() == other.grad_norm.to_bits()
            && self.elapsed_ms.to_bits() == other.elapsed_ms.to_bits()
            && self.inner_iters == other.inner_iters
            && self.status == other.status
    }
}

/// Result of one solver run.
#[derive(Clone, Debug)]
pub struct Trace {
    pub label: String,
    pub records: Vec<TraceRecord>,
    /// Momentum coefficient `t_k` used to produce each recorded iterate (1 for
    /// non-accelerated methods and for `k = 0`).
    pub momentum: Vec<f64>,
    pub final_x: DVector<f64>,
    pub status: Status,
    pub oracle_calls: u64,
    /// Subproblem solves that hit the inner cap with a large KKT residual.
    pub inexact_subproblems: u64,
}

impl Trace {
    pub fn last(&self) -> &TraceRecord {
        self.records.last().expect("a trace always holds the initial record")
    }

    pub fn final_residual(&self) -> f64 {
        self.last().residual
    }

    pub fn diverged(&self) -> bool {
        self.status == Status::Diverged
    }

    /// First recorded `k` whose residual is at most `target`.
    pub fn iterations_to_reach(&self, target: f64) -> Option<usize> {
        self.records.iter().find(|r| r.residual <= target).map(|r| r.k)
    }
}

pub(crate) fn fmt_float(v: f64) -> String {
    format!("{v:e}")
}

pub(crate) fn parse_float(what: &'static str, s: &str) -> Result<f64> {
    s.trim().parse::<f64>().map_err(|e| Error::Parse {
        what,
        reason: format!("{s:?}: {e}"),
    })
}

fn parse_int<T: FromStr>(what: &'static str, s: &str) -> Result<T>
where
    T::Err: fmt::Display,
{
    s.trim().parse::<T>().map_err(|e| Error::Parse {
        what,
        reason: format!("{s:?}: {e}"),
    })
}

pub fn write_trace_csv<W: Write>(records: &[TraceRecord], writer: W) -> Result<()> {
    let mut out = csv::Writer::from_writer(writer);
    out.write_record(TRACE_HEADER)?;
    for r in records {
        out.write_record([
            r.k.to_string(),
            fmt_float(r.f_value),
            fmt_float(r.residual),
            fmt_float(r.grad_norm),
            fmt_float(r.elapsed_ms),
            r.inner_iters.to_string(),
            r.status.tag().to_string(),
        ])?;
    }
    out.flush()?;
    Ok(())
}

pub fn read_trace_csv<R: Read>(reader: R) -> Result<Vec<TraceRecord>> {
    let mut input = csv::ReaderBuilder::new().has_headers(true).from_reader(reader);
    let header = input.headers()?.clone();
    if header.iter().ne(TRACE_HEADER) {
        return Err(Error::Parse {
            what: "trace header",
            reason: format!("expected {}, got {}", TRACE_HEADER.join(","), header.iter().collect::<Vec<_>>().join(",")),
        });
    }
    let mut records: Vec<TraceRecord> = Vec::new();
    for row in input.records() {
        let row = row?;
        if row.len() != TRACE_HEADER.len() {
            return Err(Error::Parse {
                what: "trace row",
                reason: format!("expected {} fields, got {}", TRACE_HEADER.len(), row.len()),
            });
        }
        let record = TraceRecord {
            k: parse_int("k", &row[0])?,
            f_value: parse_float("f", &row[1])?,
            residual: parse_float("residual", &row[2])?,
            grad_norm: parse_float("grad_norm", &row[3])?,
            elapsed_ms: parse_float("elapsed_ms", &row[4])?,
            inner_iters: parse_int("inner_iters", &row[5])?,
            status: row[6].trim().parse()?,
        };
        if let Some(prev) = records.last() {
            if record.k <= prev.k {
                return Err(Error::Parse {
                    what: "trace row",
                    reason: format!("k must increase strictly, got {} after {}", record.k, prev.k),
                });
            }
        }
        records.push(record);
    }
    Ok(records)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn float() -> impl Strategy<Value = f64> {
        prop_oneof![
            any::<f64>(),
            Just(f64::INFINITY),
            Just(f64::NAN),
            -1e3f64..1e3,
            1e-300f64..1e-10,
        ]
    }

    fn status() -> impl Strategy<Value = Status> {
        prop_oneof![
            Just(Status::Running),
            Just(Status::Converged),
            Just(Status::Diverged),
            Just(Status::Capped),
        ]
    }

    proptest! {
        #[test]
        fn csv_round_trip(rows in prop::collection::vec((0usize..5, float(), float(), float(), 0.0f64..1e6, any::<u32>(), status()), 0..20)) {
            let mut k = 0;
            let records: Vec<TraceRecord> = rows
                .into_iter()
                .map(|(dk, f, r, g, ms, inner, status)| {
                    k += dk + 1;
                    TraceRecord { k, f_value: f, residual: r, grad_norm: g, elapsed_ms: ms, inner_iters: inner as u64, status }
                })
                .collect();
            let mut buf = Vec::new();
            write_trace_csv(&records, &mut buf).unwrap();
            let back = read_trace_csv(buf.as_slice()).unwrap();
            prop_assert_eq!(back.len(), records.len());
            for (a, b) in records.iter().zip(&back) {
                prop_assert!(a.same_bits(b), "{:?} vs {:?}", a, b);
            }
        }
    }

    #[test]
    fn rejects_malformed_traces() {
        assert!(read_trace_csv("k,f\n1,2\n".as_bytes()).is_err());
        let head = TRACE_HEADER.join(",");
        assert!(read_trace_csv(format!("{head}\n1,1,1,1,1,1,bogus\n").as_bytes()).is_err());
        assert!(read_trace_csv(format!("{head}\n2,1,1,1,1,1,running\n1,1,1,1,1,1,running\n").as_bytes()).is_err());
        assert!(read_trace_csv(format!("{head}\n1,x,1,1,1,1,running\n").as_bytes()).is_err());
        assert!(read_trace_csv(format!("{head}\n1,1,1,1,1,-1,running\n").as_bytes()).is_err());
        assert_eq!(read_trace_csv(format!("{head}\n").as_bytes()).unwrap(), vec![]);
    }
}
