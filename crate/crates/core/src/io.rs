//! Plain-text exports and coefficient-table ingestion. All floating-point
//! values are written with 17 significant digits so runs round-trip exactly.

use crate::model::{SampledTable, ValidationError};
use crate::periodic::PeriodicSolution;
use crate::solver::Trajectory;
use crate::spectral::RiskPoint;
use std::io::Write;
use std::path::Path;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum IoError {
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error("parse error: {0}")]
    Parse(String),
    #[error(transparent)]
    Validation(#[from] ValidationError),
}

/// 17 significant digits, exact round-trip for f64.
pub fn format_float(x: f64) -> String {
    format!("{x:.16e}")
}

/// Front and norm history: `t,h,hprime,max_Ib,max_Im`.
pub fn write_front_csv(path: &Path, trajectory: &Trajectory) -> Result<(), IoError> {
    let mut out = std::io::BufWriter::new(std::fs::File::create(path)?);
    writeln!(out, "t,h,hprime,max_Ib,max_Im")?;
    for r in &trajectory.front {
        writeln!(
            out,
            "{},{},{},{},{}",
            format_float(r.t),
            format_float(r.h),
            format_float(r.h_prime),
            format_float(r.max_u),
            format_float(r.max_v)
        )?;
    }
    Ok(())
}

/// Full field snapshots: `t,y,x,Ib,Im`.
pub fn write_snapshots_csv(path: &Path, trajectory: &Trajectory) -> Result<(), IoError> {
    let mut out = std::io::BufWriter::new(std::fs::File::create(path)?);
    writeln!(out, "t,y,x,Ib,Im")?;
    for snap in &trajectory.snapshots {
        let n = snap.n_cells();
        for i in 0..=n {
            let y = i as f64 / n as f64;
            writeln!(
                out,
                "{},{},{},{},{}",
                format_float(snap.t),
                format_float(y),
                format_float(y * snap.h),
                format_float(snap.u[i]),
                format_float(snap.v[i])
            )?;
        }
    }
    Ok(())
}

/// Risk index series: `t,h,R0F`.
pub fn write_risk_csv(path: &Path, points: &[RiskPoint]) -> Result<(), IoError> {
    let mut out = std::io::BufWriter::new(std::fs::File::create(path)?);
    writeln!(out, "t,h,R0F")?;
    for p in points {
        writeln!(
            out,
            "{},{},{}",
            format_float(p.t),
            format_float(p.h),
            format_float(p.r0)
        )?;
    }
    Ok(())
}

/// Converged periodic solution: `x,t,U,V`.
pub fn write_periodic_csv(path: &Path, solution: &PeriodicSolution) -> Result<(), IoError> {
    let mut out = std::io::BufWriter::new(std::fs::File::create(path)?);
    writeln!(out, "x,t,U,V")?;
    for (level, t) in solution.times.iter().enumerate() {
        for (i, x) in solution.xs.iter().enumerate() {
            writeln!(
                out,
                "{},{},{},{}",
                format_float(*x),
                format_float(*t),
                format_float(solution.u[level][i]),
                format_float(solution.v[level][i])
            )?;
        }
    }
    Ok(())
}

/// Read a coefficient table from CSV with header `x,t,value`. The rows must
/// fill a complete rectangular grid; order does not matter.
pub fn read_table_csv(path: &Path) -> Result<SampledTable, IoError> {
    let text = std::fs::read_to_string(path)?;
    let mut lines = text.lines();
    let header = lines
        .next()
        .ok_or_else(|| IoError::Parse("empty table file".into()))?;
    let normalized: String = header.split_whitespace().collect();
    if normalized != "x,t,value" {
        return Err(IoError::Parse(format!(
            "expected header `x,t,value`, got `{header}`"
        )));
    }

    let mut triples = Vec::new();
    for (lineno, line) in lines.enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != 3 {
            return Err(IoError::Parse(format!(
                "line {}: expected 3 comma-separated fields",
                lineno + 2
            )));
        }
        let parse = |s: &str, what: &str| -> Result<f64, IoError> {
            s.trim()
                .parse::<f64>()
                .map_err(|e| IoError::Parse(format!("line {}: bad {what}: {e}", lineno + 2)))
        };
        triples.push((
            parse(fields[0], "x")?,
            parse(fields[1], "t")?,
            parse(fields[2], "value")?,
        ));
    }
    if triples.is_empty() {
        return Err(IoError::Parse("table has no data rows".into()));
    }

    let mut xs: Vec<f64> = triples.iter().map(|t| t.0).collect();
    let mut ts: Vec<f64> = triples.iter().map(|t| t.1).collect();
    xs.sort_by(|a, b| a.partial_cmp(b).expect("finite x"));
    xs.dedup();
    ts.sort_by(|a, b| a.partial_cmp(b).expect("finite t"));
    ts.dedup();

    let nx = xs.len();
    let nt = ts.len();
    if triples.len() != nx * nt {
        return Err(IoError::Parse(format!(
            "table is not a complete grid: {} rows for {nx} x nodes and {nt} t nodes",
            triples.len()
        )));
    }
    let mut values = vec![f64::NAN; nx * nt];
    for (x, t, v) in triples {
        let ix = xs
            .binary_search_by(|p| p.partial_cmp(&x).expect("finite"))
            .map_err(|_| IoError::Parse("internal node lookup failure".into()))?;
        let it = ts
            .binary_search_by(|p| p.partial_cmp(&t).expect("finite"))
            .map_err(|_| IoError::Parse("internal node lookup failure".into()))?;
        if !values[ix * nt + it].is_nan() {
            return Err(IoError::Parse(format!("duplicate entry at x={x}, t={t}")));
        }
        values[ix * nt + it] = v;
    }
    if values.iter().any(|v| v.is_nan()) {
        return Err(IoError::Parse("table grid has holes".into()));
    }
    Ok(SampledTable::new(xs, ts, values)?)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn float_formatting_round_trips() {
        for x in [std::f64::consts::PI, 1.0 / 3.0, 1e-17, 123456.789] {
            let s = format_float(x);
            assert_eq!(s.parse::<f64>().unwrap(), x);
        }
    }

    #[test]
    fn table_csv_round_trip() {
        let dir = std::env::temp_dir().join("wnv_core_io_test");
        std::fs::create_dir_all(&dir).unwrap();
        let path = dir.join("table.csv");
        std::fs::write(&path, "x,t,value\n0.0,0.0,0.2\n1.0,0.0,0.9\n0.0,0.5,0.4\n1.0,0.5,0.5\n")
            .unwrap();
        let table = read_table_csv(&path).unwrap();
        let field = crate::model::CoefficientField::table(table, 1.0).unwrap();
        assert_eq!(field.bounds(), (0.2, 0.9));
        assert!((field.eval(0.0, 0.0) - 0.2).abs() < 1e-15);
    }

    #[test]
    fn incomplete_table_is_rejected() {
        let dir = std::env::temp_dir().join("wnv_core_io_test");
        std::fs::create_dir_all(&dir).unwrap();
        let path = dir.join("holes.csv");
        std::fs::write(&path, "x,t,value\n0.0,0.0,0.2\n1.0,0.5,0.9\n").unwrap();
        assert!(matches!(read_table_csv(&path), Err(IoError::Parse(_))));
    }
}
