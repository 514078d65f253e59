//! CSV artifacts: solution snapshots, energy series and refinement tables.
//!
//! Numbers are written with the shortest representation that parses back
//! to the same `f64`, so a written solution re-reads bit for bit.

use std::io::{Read, Write};

use serde::Serialize;
use thiserror::Error;

use crate::diagnostics::EnergyRecord;
use crate::mesh::{Grid, MeshError, MeshFn};
use crate::study::ConvergenceTable;

/// Nodes of a re-read solution must be affine to this relative tolerance.
pub const NODE_TOL: f64 = 1e-9;

#[derive(Debug, Error)]
pub enum CsvError {
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error("expected header `{expected}`, found `{found}`")]
    Header { expected: &'static str, found: String },
    #[error("row {row}: {reason}")]
    Row { row: usize, reason: String },
    #[error("node {index} at x = {x} is off the uniform grid (expected {expected})")]
    NonUniform { index: usize, x: f64, expected: f64 },
    #[error(transparent)]
    Mesh(#[from] MeshError),
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum LevelsError {
    #[error("level list is empty")]
    Empty,
    #[error("level `{0}` is not a positive number")]
    Invalid(String),
    #[error("levels must strictly decrease ({coarse} then {fine})")]
    NotRefining { coarse: f64, fine: f64 },
}

/// File name for a snapshot at time `t`, e.g. `solution_9.6.csv`.
pub fn solution_file_name(t: f64) -> String {
    let fixed = format!("{t:.9}");
    let trimmed = fixed.trim_end_matches('0').trim_end_matches('.');
    format!("solution_{trimmed}.csv")
}

/// Writes `x,u` rows for nodes `i = 0 ..= M`.
pub fn write_solution<W: Write>(out: W, u: &MeshFn) -> Result<(), CsvError> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["x", "u"])?;
    let grid = u.grid();
    for i in 0..=grid.last() - 1 {
        w.serialize((grid.x(i), u.get(i)))?;
    }
    w.flush()?;
    Ok(())
}

/// Reads an `x,u` file back into a mesh function on the grid it describes.
///
/// The nodes must be uniform; values are projected onto `Z0`.
pub fn read_solution<R: Read>(input: R) -> Result<MeshFn, CsvError> {
    let mut r = csv::ReaderBuilder::new().has_headers(true).from_reader(input);
    check_header(r.headers()?, "x,u")?;
    let mut xs = Vec::new();
    let mut us = Vec::new();
    for (k, rec) in r.records().enumerate() {
        let rec = rec?;
        if rec.len() != 2 {
            return Err(CsvError::Row {
                row: k + 1,
                reason: format!("expected 2 fields, found {}", rec.len()),
            });
        }
        xs.push(finite(&rec[0], k + 1)?);
        us.push(finite(&rec[1], k + 1)?);
    }
    if xs.len() < 2 {
        return Err(CsvError::Row {
            row: xs.len(),
            reason: "a solution needs at least two nodes".into(),
        });
    }
    let cells = xs.len() - 1;
    let grid = Grid::new(xs[0], xs[cells], cells)?;
    let scale = grid.x_left().abs().max(grid.x_right().abs()).max(grid.h());
    for (k, &x) in xs.iter().enumerate() {
        let expected = grid.x(k as isize);
        if (x - expected).abs() > NODE_TOL * scale {
            return Err(CsvError::NonUniform { index: k, x, expected });
        }
    }
    let mut values = Vec::with_capacity(grid.node_count());
    values.push(0.0);
    values.extend(us);
    values.push(0.0);
    let mut u = MeshFn::from_values(grid, values)?;
    u.project_z0();
    Ok(u)
}

/// Writes `t,E` rows.
pub fn write_energy<W: Write>(out: W, series: &[EnergyRecord]) -> Result<(), CsvError> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["t", "E"])?;
    for r in series {
        w.serialize((r.time, r.energy))?;
    }
    w.flush()?;
    Ok(())
}

#[derive(Serialize)]
struct TableRow {
    param: f64,
    l2_err: f64,
    max_err: f64,
    l2_rate: Option<f64>,
    max_rate: Option<f64>,
}

/// Writes `param,l2_err,max_err,l2_rate,max_rate`; rates are blank on the first row.
pub fn write_convergence<W: Write>(out: W, table: &ConvergenceTable) -> Result<(), CsvError> {
    let mut w = csv::Writer::from_writer(out);
    for row in &table.rows {
        w.serialize(TableRow {
            param: row.param,
            l2_err: row.l2_error,
            max_err: row.max_error,
            l2_rate: row.l2_rate,
            max_rate: row.max_rate,
        })?;
    }
    if table.rows.is_empty() {
        w.write_record(["param", "l2_err", "max_err", "l2_rate", "max_rate"])?;
    }
    w.flush()?;
    Ok(())
}

/// Parses `0.8,0.4,0.2` into a strictly decreasing list of mesh parameters.
pub fn parse_levels(text: &str) -> Result<Vec<f64>, LevelsError> {
    if text.trim().is_empty() {
        return Err(LevelsError::Empty);
    }
    let levels = text
        .split(',')
        .map(|s| {
            let s = s.trim();
            match s.parse::<f64>() {
                Ok(v) if v > 0.0 && v.is_finite() => Ok(v),
                _ => Err(LevelsError::Invalid(s.to_string())),
            }
        })
        .collect::<Result<Vec<f64>, _>>()?;
    if let Some(w) = levels.windows(2).find(|w| w[1] >= w[0]) {
        return Err(LevelsError::NotRefining {
            coarse: w[0],
            fine: w[1],
        });
    }
    Ok(levels)
}

fn check_header(found: &csv::StringRecord, expected: &'static str) -> Result<(), CsvError> {
    let joined = found.iter().map(str::trim).collect::<Vec<_>>().join(",");
    if joined != expected {
        return Err(CsvError::Header { expected, found: joined });
    }
    Ok(())
}

fn finite(field: &str, row: usize) -> Result<f64, CsvError> {
    match field.trim().parse::<f64>() {
        Ok(v) if v.is_finite() => Ok(v),
        _ => Err(CsvError::Row {
            row,
            reason: format!("`{field}` is not a finite number"),
        }),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::study::{rate_table, Axis};

    fn wave(grid: Grid) -> MeshFn {
        MeshFn::sample(grid, |x| (x / 3.0).sin() * (-(x * x) / 50.0).exp() / 7.0)
    }

    #[test]
    fn solution_round_trip_is_exact() {
        let grid = Grid::new(-40.0, 200.0, 2400).unwrap();
        let u = wave(grid);
        let mut buf = Vec::new();
        write_solution(&mut buf, &u).unwrap();
        let text = String::from_utf8(buf.clone()).unwrap();
        assert!(text.starts_with("x,u\n-40.0,0.0\n"));
        assert_eq!(text.lines().count(), 2402);
        let back = read_solution(buf.as_slice()).unwrap();
        assert_eq!(back.values(), u.values());
        assert_eq!(back.grid().cells(), 2400);
    }

    #[test]
    fn solution_rejects_malformed_input() {
        assert!(matches!(read_solution("t,E\n0,1\n".as_bytes()), Err(CsvError::Header { .. })));
        assert!(matches!(read_solution("x,u\n0,1\n".as_bytes()), Err(CsvError::Row { .. })));
        assert!(matches!(read_solution("x,u\n0,inf\n1,0\n".as_bytes()), Err(CsvError::Row { .. })));
        let mut uneven = String::from("x,u\n");
        for i in 0..=10 {
            let x = if i == 4 { 4.5 } else { i as f64 };
            uneven.push_str(&format!("{x},0\n"));
        }
        assert!(matches!(read_solution(uneven.as_bytes()), Err(CsvError::NonUniform { index: 4, .. })));
        let short = "x,u\n0,0\n1,0\n2,0\n";
        assert!(matches!(read_solution(short.as_bytes()), Err(CsvError::Mesh(MeshError::TooCoarse { .. }))));
    }

    #[test]
    fn read_projects_onto_z0() {
        let mut text = String::from("x,u\n");
        for i in 0..=10 {
            text.push_str(&format!("{},1\n", i as f64 * 0.5));
        }
        let u = read_solution(text.as_bytes()).unwrap();
        assert!(u.in_z0());
        assert_eq!(u.get(5), 1.0);
    }

    #[test]
    fn energy_csv() {
        let series = [
            EnergyRecord { time: 0.05, energy: 25.451405792697514 },
            EnergyRecord { time: 0.15, energy: 25.45140579269751 },
        ];
        let mut buf = Vec::new();
        write_energy(&mut buf, &series).unwrap();
        assert_eq!(
            String::from_utf8(buf).unwrap(),
            "t,E\n0.05,25.451405792697514\n0.15,25.45140579269751\n"
        );
    }

    #[test]
    fn convergence_csv() {
        let table = rate_table(Axis::Spatial, &[(0.8, 0.4, 0.1), (0.4, 0.1, 0.025)]);
        let mut buf = Vec::new();
        write_convergence(&mut buf, &table).unwrap();
        assert_eq!(
            String::from_utf8(buf).unwrap(),
            "param,l2_err,max_err,l2_rate,max_rate\n0.8,0.4,0.1,,\n0.4,0.1,0.025,2.0,2.0\n"
        );
    }

    #[test]
    fn levels() {
        assert_eq!(parse_levels("0.8, 0.4,0.2 ,0.1").unwrap(), vec![0.8, 0.4, 0.2, 0.1]);
        assert_eq!(parse_levels(" "), Err(LevelsError::Empty));
        assert_eq!(parse_levels("0.8,,0.2"), Err(LevelsError::Invalid(String::new())));
        assert_eq!(parse_levels("0.8,-0.4"), Err(LevelsError::Invalid("-0.4".into())));
        assert_eq!(parse_levels("0.4,0.8"), Err(LevelsError::NotRefining { coarse: 0.4, fine: 0.8 }));
    }

    #[test]
    fn file_names() {
        assert_eq!(solution_file_name(0.0), "solution_0.csv");
        assert_eq!(solution_file_name(100.00000000000001), "solution_100.csv");
        assert_eq!(solution_file_name(9.600000000000001), "solution_9.6.csv");
        assert_eq!(solution_file_name(0.05), "solution_0.05.csv");
    }
}
