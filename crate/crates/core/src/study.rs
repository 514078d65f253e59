//! Refinement studies against the closed-form solitary wave.

use std::fmt;
use std::str::FromStr;
use std::thread;

use log::{info, warn};
use thiserror::Error;

use crate::diagnostics::{error_report, ErrorReport};
use crate::exact::{initial_condition, solve_ansatz, AnsatzError, AnsatzSolution, Branch};
use crate::mesh::{Grid, MeshError};
use crate::scheme::{run, BootstrapOptions, SchemeError, SchemeParams, SimOutput, TimeGrid};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum StudyError {
    #[error(transparent)]
    Mesh(#[from] MeshError),
    #[error(transparent)]
    Scheme(#[from] SchemeError),
    #[error(transparent)]
    Ansatz(#[from] AnsatzError),
    #[error("refinement needs at least one level")]
    NoLevels,
    #[error("level {0} is not a positive number")]
    BadLevel(f64),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Axis {
    Spatial,
    Temporal,
}

impl fmt::Display for Axis {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Axis::Spatial => "spatial",
            Axis::Temporal => "temporal",
        })
    }
}

impl FromStr for Axis {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "spatial" => Ok(Axis::Spatial),
            "temporal" => Ok(Axis::Temporal),
            other => Err(format!("unknown axis '{other}' (expected spatial or temporal)")),
        }
    }
}

/// A solitary-wave experiment: domain, coefficients, final time.
#[derive(Debug, Clone, Copy)]
pub struct Experiment {
    pub x_left: f64,
    pub x_right: f64,
    pub params: SchemeParams,
    pub branch: Branch,
    pub final_time: f64,
    pub bootstrap: BootstrapOptions,
}

impl Experiment {
    pub fn ansatz(&self) -> Result<AnsatzSolution, StudyError> {
        Ok(solve_ansatz(&self.params, self.branch)?)
    }

    /// Runs with spacing `h` and step `tau` and keeps only the end state.
    pub fn simulate(&self, h: f64, tau: f64) -> Result<(SimOutput, AnsatzSolution), StudyError> {
        let sol = self.ansatz()?;
        let grid = Grid::with_spacing(self.x_left, self.x_right, h)?;
        let (u0, boundary) = initial_condition(&sol, grid)?;
        if let Some(b) = boundary {
            warn!("{b}");
        }
        let tg = TimeGrid::from_final_time(self.final_time, tau)?;
        let out = run(&u0, &self.params, tg, 0, self.bootstrap)?;
        Ok((out, sol))
    }

    /// Error of the end state against the exact wave at the realised final time.
    pub fn level_error(&self, h: f64, tau: f64) -> Result<ErrorReport, StudyError> {
        let (out, sol) = self.simulate(h, tau)?;
        let t = out.time_grid.final_time();
        let report = error_report(out.final_state(), |x, t| sol.profile(x - sol.velocity * t), t);
        info!(
            "h = {h}, tau = {tau}: l2 = {:e}, max = {:e}",
            report.l2_error, report.max_error
        );
        Ok(report)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConvergenceRow {
    pub param: f64,
    pub l2_error: f64,
    pub max_error: f64,
    pub l2_rate: Option<f64>,
    pub max_rate: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConvergenceTable {
    pub axis: Axis,
    pub rows: Vec<ConvergenceRow>,
}

/// Observed order between consecutive levels, `log(e_c / e_f) / log(p_c / p_f)`;
/// for halved parameters this is `log2(e_c / e_f)`.
pub fn observed_rate(coarse: (f64, f64), fine: (f64, f64)) -> f64 {
    let (pc, ec) = coarse;
    let (pf, ef) = fine;
    (ec / ef).ln() / (pc / pf).ln()
}

/// Assembles table rows from `(param, l2, max)` triples in refinement order.
pub fn rate_table(axis: Axis, levels: &[(f64, f64, f64)]) -> ConvergenceTable {
    let rows = levels
        .iter()
        .enumerate()
        .map(|(k, &(param, l2, max))| {
            let prev = k.checked_sub(1).map(|j| levels[j]);
            ConvergenceRow {
                param,
                l2_error: l2,
                max_error: max,
                l2_rate: prev.map(|(pp, pl2, _)| observed_rate((pp, pl2), (param, l2))),
                max_rate: prev.map(|(pp, _, pm)| observed_rate((pp, pm), (param, max))),
            }
        })
        .collect();
    ConvergenceTable { axis, rows }
}

/// Runs every level (in parallel) with the other mesh parameter fixed at `fixed`.
pub fn converge(exp: &Experiment, axis: Axis, fixed: f64, levels: &[f64]) -> Result<ConvergenceTable, StudyError> {
    if levels.is_empty() {
        return Err(StudyError::NoLevels);
    }
    if let Some(&bad) = levels.iter().find(|v| !(**v > 0.0) || !v.is_finite()) {
        return Err(StudyError::BadLevel(bad));
    }
    let results: Vec<Result<ErrorReport, StudyError>> = thread::scope(|s| {
        let handles: Vec<_> = levels
            .iter()
            .map(|&level| {
                s.spawn(move || match axis {
                    Axis::Spatial => exp.level_error(level, fixed),
                    Axis::Temporal => exp.level_error(fixed, level),
                })
            })
            .collect();
        handles
            .into_iter()
            .map(|h| h.join().expect("refinement worker panicked"))
            .collect()
    });
    let mut triples = Vec::with_capacity(levels.len());
    for (&level, r) in levels.iter().zip(results) {
        let r = r?;
        triples.push((level, r.l2_error, r.max_error));
    }
    Ok(rate_table(axis, &triples))
}
