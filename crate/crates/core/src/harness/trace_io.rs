//! Trace and verdict CSV files.
//!
//! Floats are written as `{:.16e}`, 17 significant digits, which parse back
//! to the same double.

use std::io::{Read, Write};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::solvers::rate::RateVerdict;
use crate::solvers::{Algorithm, IterationRecord, SolveTrace, StepType};

pub const TRACE_COLUMNS: [&str; 7] = ["k", "f", "gap", "step_type", "alpha", "alpha_max", "support_size"];

#[derive(Serialize, Deserialize)]
struct TraceRow {
    k: usize,
    f: String,
    gap: String,
    step_type: String,
    alpha: String,
    alpha_max: String,
    support_size: usize,
}

fn fmt(x: f64) -> String {
    format!("{x:.16e}")
}

fn parse(field: &str, k: usize, s: &str) -> Result<f64> {
    s.trim()
        .parse()
        .map_err(|_| Error::field(field, format!("row k={k}: `{s}` is not a number")))
}

pub fn write_trace<W: Write>(trace: &SolveTrace, out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    for r in &trace.records {
        w.serialize(TraceRow {
            k: r.k,
            f: fmt(r.f),
            gap: fmt(r.gap),
            step_type: r.step_type.as_str().to_string(),
            alpha: fmt(r.alpha),
            alpha_max: fmt(r.alpha_max),
            support_size: r.support_size,
        })?;
    }
    w.flush()?;
    Ok(())
}

pub fn trace_to_string(trace: &SolveTrace) -> String {
    let mut buf = Vec::new();
    write_trace(trace, &mut buf).expect("writing to memory");
    String::from_utf8(buf).expect("csv is utf-8")
}

/// Reads a trace CSV. The algorithm is projected gradient when any row has
/// step type `proj` and FW-away otherwise; the step rule and iterates are
/// not stored, so `lipschitz_mode` and `final_point` are `None`.
pub fn read_trace<R: Read>(input: R) -> Result<SolveTrace> {
    let mut rd = csv::Reader::from_reader(input);
    let headers = rd.headers()?.clone();
    if headers.iter().collect::<Vec<_>>() != TRACE_COLUMNS {
        return Err(Error::field(
            "trace",
            format!("expected columns {}", TRACE_COLUMNS.join(",")),
        ));
    }
    let mut records = Vec::new();
    for row in rd.deserialize() {
        let row: TraceRow = row?;
        let k = row.k;
        if k != records.len() {
            return Err(Error::field("trace", format!("expected k={} but found k={k}", records.len())));
        }
        let f = parse("f", k, &row.f)?;
        if !f.is_finite() {
            return Err(Error::NonFinite(format!("trace f at k={k}")));
        }
        records.push(IterationRecord {
            k,
            x: None,
            f,
            gap: parse("gap", k, &row.gap)?,
            step_type: row.step_type.parse()?,
            alpha: parse("alpha", k, &row.alpha)?,
            alpha_max: parse("alpha_max", k, &row.alpha_max)?,
            support_size: row.support_size,
            lipschitz: f64::NAN,
        });
    }
    if records.is_empty() {
        return Err(Error::field("trace", "no rows"));
    }
    let algorithm = if records.iter().any(|r| r.step_type == StepType::Projection) {
        Algorithm::ProjGrad
    } else {
        Algorithm::FwAway
    };
    let converged = records.last().is_some_and(|r| r.step_type == StepType::Stop);
    Ok(SolveTrace {
        algorithm,
        lipschitz_mode: None,
        exact_line_search: false,
        records,
        final_point: None,
        converged,
    })
}

#[derive(Serialize)]
struct VerdictRow {
    k: usize,
    gap: String,
    bound: String,
    holds: bool,
}

pub fn write_verdict<W: Write>(verdict: &RateVerdict, out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    for c in &verdict.checks {
        w.serialize(VerdictRow {
            k: c.k,
            gap: fmt(c.gap),
            bound: fmt(c.bound),
            holds: c.holds,
        })?;
    }
    w.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::conditioning::QuadraticObjective;
    use crate::geometry::AtomMatrix;
    use crate::solvers::{solve_proj_grad, SolveConfig};

    #[test]
    fn header_and_format() {
        let f = QuadraticObjective::half_squared_norm(3);
        let cfg = SolveConfig::proj_grad(1.0).with_max_iters(3);
        let trace = solve_proj_grad(&f, &AtomMatrix::simplex(3), &cfg).unwrap();
        let text = trace_to_string(&trace);
        let mut lines = text.lines();
        assert_eq!(lines.next(), Some("k,f,gap,step_type,alpha,alpha_max,support_size"));
        assert_eq!(lines.next(), Some("0,5.0000000000000000e-1,1.0000000000000000e0,proj,1.0000000000000000e0,1.0000000000000000e0,1"));
    }

    #[test]
    fn read_back_is_exact() {
        let q = crate::linalg::DenseMatrix::from_rows(&[vec![2.0, 0.3], vec![0.3, 1.0]]).unwrap();
        let f = QuadraticObjective::new(q, vec![0.1, -0.7]).unwrap();
        let atoms = AtomMatrix::new(
            crate::linalg::DenseMatrix::from_rows(&[vec![1.0, 0.0, -1.0, 0.5], vec![0.2, 1.0, 0.0, -1.0]]).unwrap(),
        )
        .unwrap();
        let trace = crate::solvers::solve_fw_away(&f, &atoms, &SolveConfig::fw_away(3.0).with_max_iters(40)).unwrap();
        let back = read_trace(trace_to_string(&trace).as_bytes()).unwrap();
        assert_eq!(back.algorithm, Algorithm::FwAway);
        assert_eq!(back.records.len(), trace.records.len());
        for (a, b) in trace.records.iter().zip(&back.records) {
            assert_eq!(a.f.to_bits(), b.f.to_bits());
            assert_eq!(a.gap.to_bits(), b.gap.to_bits());
            assert_eq!(a.alpha.to_bits(), b.alpha.to_bits());
            assert_eq!(a.step_type, b.step_type);
        }
    }

    #[test]
    fn rejects_bad_columns_and_gaps_in_k() {
        assert!(read_trace("k,f\n0,1\n".as_bytes()).is_err());
        let text = "k,f,gap,step_type,alpha,alpha_max,support_size\n1,1,1,regular,0,1,1\n";
        assert!(read_trace(text.as_bytes()).is_err());
    }
}
