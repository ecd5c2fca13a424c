use std::io::Write;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::Quantity;
use crate::error::{Error, Result};
use crate::solvers::{IterationRecord, SolveTrace};

pub const CSV_HEADER: &str = "iter,f,best_f,eta,delta_t,grad_dual_norm,elapsed_ms";

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum TraceFormat {
    #[default]
    Csv,
    /// Pretty-printed JSON with run metadata.
    Structured,
}

impl FromStr for TraceFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "csv" => Ok(TraceFormat::Csv),
            "structured" => Ok(TraceFormat::Structured),
            _ => Err(Error::Parameter(format!("unknown trace format `{s}`"))),
        }
    }
}

/// Run metadata written with structured traces.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TraceMeta {
    pub quantity: Quantity,
    pub alpha: f64,
}

/// One trace line.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TraceRow {
    pub iter: usize,
    pub f: f64,
    pub best_f: f64,
    pub eta: Option<f64>,
    pub delta_t: Option<f64>,
    pub grad_dual_norm: f64,
    pub elapsed_ms: f64,
}

impl TraceRow {
    pub(crate) fn from_record(r: &IterationRecord, timing: bool) -> Self {
        Self {
            iter: r.iter,
            f: r.f,
            best_f: r.best_f,
            eta: r.eta,
            delta_t: r.delta_t,
            grad_dual_norm: r.grad_dual_norm,
            elapsed_ms: if timing { r.elapsed_ms } else { 0.0 },
        }
    }

    fn csv_line(&self) -> String {
        let opt = |v: Option<f64>| v.map_or(String::new(), |x| format!("{x:?}"));
        format!(
            "{},{:?},{:?},{},{},{:?},{:?}",
            self.iter,
            self.f,
            self.best_f,
            opt(self.eta),
            opt(self.delta_t),
            self.grad_dual_norm,
            self.elapsed_ms
        )
    }

    fn parse_csv(line: &str, lineno: usize) -> Result<Self> {
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != 7 {
            return Err(Error::Parse(format!(
                "line {lineno}: expected 7 fields, found {}",
                fields.len()
            )));
        }
        let num = |i: usize| -> Result<f64> {
            fields[i]
                .parse()
                .map_err(|_| Error::Parse(format!("line {lineno}: bad number `{}`", fields[i])))
        };
        let opt = |i: usize| -> Result<Option<f64>> {
            if fields[i].is_empty() {
                Ok(None)
            } else {
                num(i).map(Some)
            }
        };
        Ok(Self {
            iter: fields[0].parse().map_err(|_| {
                Error::Parse(format!("line {lineno}: bad iteration `{}`", fields[0]))
            })?,
            f: num(1)?,
            best_f: num(2)?,
            eta: opt(3)?,
            delta_t: opt(4)?,
            grad_dual_norm: num(5)?,
            elapsed_ms: num(6)?,
        })
    }
}

#[derive(Serialize, Deserialize)]
struct StructuredTrace {
    quantity: String,
    alpha: f64,
    solver: String,
    termination: String,
    best_value: f64,
    records: Vec<TraceRow>,
}

pub(crate) fn trace_rows(trace: &SolveTrace, timing: bool) -> Vec<TraceRow> {
    trace
        .records
        .iter()
        .map(|r| TraceRow::from_record(r, timing))
        .collect()
}

pub(crate) fn write_csv_rows(out: &mut dyn Write, rows: &[TraceRow]) -> Result<()> {
    writeln!(out, "{CSV_HEADER}")?;
    for r in rows {
        writeln!(out, "{}", r.csv_line())?;
    }
    Ok(())
}

/// Writes `trace`. With `timing` off the elapsed column is zero, which
/// makes the output byte-for-byte reproducible.
pub fn write_trace(
    out: &mut dyn Write,
    format: TraceFormat,
    meta: &TraceMeta,
    trace: &SolveTrace,
    timing: bool,
) -> Result<()> {
    let rows = trace_rows(trace, timing);
    match format {
        TraceFormat::Csv => write_csv_rows(out, &rows),
        TraceFormat::Structured => {
            let doc = StructuredTrace {
                quantity: meta.quantity.name().to_string(),
                alpha: meta.alpha,
                solver: trace.solver.name().to_string(),
                termination: trace.termination.to_string(),
                best_value: trace.best_value,
                records: rows,
            };
            write_json(out, &doc)
        }
    }
}

pub(crate) fn write_json<T: Serialize>(out: &mut dyn Write, value: &T) -> Result<()> {
    serde_json::to_writer_pretty(&mut *out, value)
        .map_err(|e| Error::Numerical(format!("serialization failed: {e}")))?;
    writeln!(out)?;
    Ok(())
}

/// Parses a trace written by [`write_trace`] and checks that iteration
/// indices increase strictly and that `best_f` is the running minimum of `f`.
pub fn parse_trace(text: &str, format: TraceFormat) -> Result<Vec<TraceRow>> {
    let rows = match format {
        TraceFormat::Csv => {
            let mut lines = text.lines();
            match lines.next() {
                Some(CSV_HEADER) => {}
                other => {
                    return Err(Error::Parse(format!(
                        "line 1: expected header `{CSV_HEADER}`, found {other:?}"
                    )))
                }
            }
            lines
                .enumerate()
                .map(|(i, l)| TraceRow::parse_csv(l, i + 2))
                .collect::<Result<Vec<_>>>()?
        }
        TraceFormat::Structured => {
            let doc: StructuredTrace = serde_json::from_str(text).map_err(|e| {
                Error::Parse(format!("line {} column {}: {e}", e.line(), e.column()))
            })?;
            doc.records
        }
    };
    check_rows(&rows)?;
    Ok(rows)
}

pub(crate) fn check_rows(rows: &[TraceRow]) -> Result<()> {
    let mut best = f64::INFINITY;
    let mut last = 0;
    for r in rows {
        if r.iter <= last {
            return Err(Error::Invariant {
                invariant: "increasing iteration index",
                detail: format!("iteration {} follows {last}", r.iter),
            });
        }
        last = r.iter;
        best = best.min(r.f);
        if r.best_f != best {
            return Err(Error::Invariant {
                invariant: "running minimum",
                detail: format!(
                    "iteration {}: best_f {} but running minimum {best}",
                    r.iter, r.best_f
                ),
            });
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn row(iter: usize, f: f64, best_f: f64) -> TraceRow {
        TraceRow {
            iter,
            f,
            best_f,
            eta: Some(0.625),
            delta_t: None,
            grad_dual_norm: 1.0,
            elapsed_ms: 0.0,
        }
    }

    #[test]
    fn csv_round_trip_uses_shortest_form() {
        let rows = vec![row(1, 0.1, 0.1), row(2, 1e-5, 1e-5)];
        let mut out = Vec::new();
        write_csv_rows(&mut out, &rows).unwrap();
        let text = String::from_utf8(out).unwrap();
        assert_eq!(text.lines().nth(1), Some("1,0.1,0.1,0.625,,1.0,0.0"));
        assert_eq!(parse_trace(&text, TraceFormat::Csv).unwrap(), rows);
    }

    #[test]
    fn invariants_checked() {
        assert!(check_rows(&[row(1, 1.0, 1.0), row(1, 0.5, 0.5)]).is_err());
        assert!(check_rows(&[row(1, 1.0, 1.0), row(2, 2.0, 2.0)]).is_err());
        assert!(check_rows(&[row(1, 1.0, 1.0), row(2, 2.0, 1.0)]).is_ok());
    }

    #[test]
    fn bad_header_rejected() {
        assert!(matches!(
            parse_trace("iter,f\n", TraceFormat::Csv),
            Err(Error::Parse(_))
        ));
        assert!(parse_trace("{", TraceFormat::Structured).is_err());
    }
}
