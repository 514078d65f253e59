use std::fmt::{self, Write as _};
use std::fs::{self, File};
use std::io::BufWriter;
use std::path::Path;

use log::{info, warn};
use rkrlw::config::{InitialSource, Resolution, RunConfig, Stepping};
use rkrlw::csvio::{self, CsvError};
use rkrlw::exact::{initial_condition, residual_oracle, solve_ansatz, AnsatzSolution, Branch, SolutionKind};
use rkrlw::properties::{run_all, SuiteOptions};
use rkrlw::scheme::run;
use rkrlw::study::{converge as run_ladder, Axis, Experiment, StudyError};
use rkrlw::{drift, error_report, Grid, MeshFn};

#[derive(Debug)]
pub enum Failure {
    /// Bad arguments, config or files.
    Usage(String),
    /// Singular systems, start-up non-convergence, no real travelling wave.
    Numerical(String),
    Property,
}

impl fmt::Display for Failure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Failure::Usage(m) | Failure::Numerical(m) => f.write_str(m),
            Failure::Property => f.write_str("property suite failed"),
        }
    }
}

fn usage(e: impl fmt::Display) -> Failure {
    Failure::Usage(e.to_string())
}

fn numerical(e: impl fmt::Display) -> Failure {
    Failure::Numerical(e.to_string())
}

fn load(path: &Path) -> Result<RunConfig, Failure> {
    RunConfig::from_path(path).map_err(|e| Failure::Usage(format!("{}: {e}", path.display())))
}

fn ansatz(cfg: &RunConfig, branch: Option<Branch>) -> Result<AnsatzSolution, Failure> {
    let branch = match branch {
        Some(b) => b,
        None => cfg.branch.resolve(&cfg.params).map_err(numerical)?,
    };
    solve_ansatz(&cfg.params, branch).map_err(numerical)
}

fn create(path: &Path) -> Result<BufWriter<File>, Failure> {
    File::create(path)
        .map(BufWriter::new)
        .map_err(|e| Failure::Usage(format!("cannot write {}: {e}", path.display())))
}

fn written(path: &Path) -> impl Fn(CsvError) -> Failure + '_ {
    move |e| Failure::Usage(format!("cannot write {}: {e}", path.display()))
}

/// The start state and, for the solitary wave, the solution it came from.
fn initial_state(cfg: &RunConfig, grid: Grid) -> Result<(MeshFn, Option<AnsatzSolution>), Failure> {
    match &cfg.initial {
        InitialSource::Zero => Ok((MeshFn::zeros(grid), None)),
        InitialSource::Ansatz => {
            let sol = ansatz(cfg, None)?;
            let (u0, boundary) = initial_condition(&sol, grid).map_err(numerical)?;
            if let Some(b) = boundary {
                warn!("{b}");
            }
            Ok((u0, Some(sol)))
        }
        InitialSource::File(path) => {
            let file = File::open(path).map_err(|e| Failure::Usage(format!("cannot open {}: {e}", path.display())))?;
            let u0 = csvio::read_solution(file).map_err(|e| Failure::Usage(format!("{}: {e}", path.display())))?;
            let g = u0.grid();
            let close = |a: f64, b: f64| (a - b).abs() <= 1e-9 * a.abs().max(b.abs()).max(grid.h());
            if g.cells() != grid.cells() || !close(g.x_left(), grid.x_left()) || !close(g.x_right(), grid.x_right()) {
                return Err(Failure::Usage(format!(
                    "{}: grid ({}, {}, M = {}) does not match the config ({}, {}, M = {})",
                    path.display(),
                    g.x_left(),
                    g.x_right(),
                    g.cells(),
                    grid.x_left(),
                    grid.x_right(),
                    grid.cells()
                )));
            }
            Ok((MeshFn::from_values(grid, u0.values().to_vec()).map_err(usage)?, None))
        }
    }
}

pub fn simulate(config: &Path) -> Result<(), Failure> {
    let cfg = load(config)?;
    let grid = cfg.grid().map_err(usage)?;
    let tg = cfg.time_grid().map_err(usage)?;
    let (u0, sol) = initial_state(&cfg, grid)?;
    info!("M = {}, h = {}, tau = {}, N = {}", grid.cells(), grid.h(), tg.tau(), tg.steps());

    let out = run(&u0, &cfg.params, tg, cfg.snapshot_stride, cfg.bootstrap()).map_err(numerical)?;

    fs::create_dir_all(&cfg.out_dir)
        .map_err(|e| Failure::Usage(format!("cannot create {}: {e}", cfg.out_dir.display())))?;
    for (t, u) in &out.snapshots {
        let path = cfg.out_dir.join(csvio::solution_file_name(*t));
        csvio::write_solution(create(&path)?, u).map_err(written(&path))?;
    }
    let path = cfg.out_dir.join("energy.csv");
    csvio::write_energy(create(&path)?, &out.energy).map_err(written(&path))?;

    let mut summary = String::new();
    let e0 = out.energy[0].energy;
    let _ = writeln!(summary, "cells: {}", grid.cells());
    let _ = writeln!(summary, "h: {}", grid.h());
    let _ = writeln!(summary, "tau: {}", tg.tau());
    let _ = writeln!(summary, "steps: {}", tg.steps());
    let _ = writeln!(summary, "final_time: {}", tg.final_time());
    let _ = writeln!(summary, "bootstrap_iterations: {}", out.bootstrap.iterations);
    let _ = writeln!(summary, "bootstrap_update: {:e}", out.bootstrap.residual);
    let _ = writeln!(summary, "bootstrap_stalled: {}", out.bootstrap.stalled);
    let _ = writeln!(summary, "energy_initial: {e0}");
    let _ = writeln!(summary, "energy_final: {}", out.energy[out.energy.len() - 1].energy);
    let _ = writeln!(summary, "energy_drift: {:e}", drift(&out.energy).map_err(numerical)?);
    if let Some(sol) = sol {
        let r = error_report(out.final_state(), |x, t| sol.profile(x - sol.velocity * t), tg.final_time());
        let _ = writeln!(summary, "l2_error: {:e}", r.l2_error);
        let _ = writeln!(summary, "max_error: {:e}", r.max_error);
    }
    let path = cfg.out_dir.join("summary.txt");
    fs::write(&path, &summary).map_err(|e| Failure::Usage(format!("cannot write {}: {e}", path.display())))?;
    print!("{summary}");
    Ok(())
}

pub fn converge(config: &Path, axis: Axis, levels: &str) -> Result<(), Failure> {
    let cfg = load(config)?;
    let levels = csvio::parse_levels(levels).map_err(|e| Failure::Usage(format!("--levels: {e}")))?;
    if cfg.initial != InitialSource::Ansatz {
        return Err(Failure::Usage(
            "refinement studies compare against the solitary wave; `initial` must be `ansatz`".into(),
        ));
    }
    let branch = cfg.branch.resolve(&cfg.params).map_err(numerical)?;
    let exp = Experiment {
        x_left: cfg.x_left,
        x_right: cfg.x_right,
        params: cfg.params,
        branch,
        final_time: cfg.final_time,
        bootstrap: cfg.bootstrap(),
    };
    let fixed = match axis {
        Axis::Spatial => match cfg.stepping {
            Stepping::Step(tau) => tau,
            Stepping::Count(n) => cfg.final_time / n as f64,
        },
        Axis::Temporal => match cfg.resolution {
            Resolution::Spacing(h) => h,
            Resolution::Cells(m) => (cfg.x_right - cfg.x_left) / m as f64,
        },
    };
    let table = run_ladder(&exp, axis, fixed, &levels).map_err(|e| match e {
        StudyError::Mesh(_) | StudyError::NoLevels | StudyError::BadLevel(_) => usage(e),
        _ => numerical(e),
    })?;

    let label = match axis {
        Axis::Spatial => "h",
        Axis::Temporal => "tau",
    };
    let rate = |r: Option<f64>| r.map_or_else(|| "-".to_string(), |v| format!("{v:.3}"));
    println!("{axis} refinement, T = {}", cfg.final_time);
    println!("{label:>8} {:>12} {:>8} {:>12} {:>8}", "l2 error", "rate", "max error", "rate");
    for row in &table.rows {
        println!(
            "{:>8} {:>12.4e} {:>8} {:>12.4e} {:>8}",
            row.param,
            row.l2_error,
            rate(row.l2_rate),
            row.max_error,
            rate(row.max_rate)
        );
    }

    fs::create_dir_all(&cfg.out_dir)
        .map_err(|e| Failure::Usage(format!("cannot create {}: {e}", cfg.out_dir.display())))?;
    let path = cfg.out_dir.join(format!("convergence_{axis}.csv"));
    csvio::write_convergence(create(&path)?, &table).map_err(written(&path))?;
    Ok(())
}

pub fn exact_info(config: &Path, branch: Option<Branch>) -> Result<(), Failure> {
    let cfg = load(config)?;
    let sol = ansatz(&cfg, branch)?;
    let [r2, r3, r4] = residual_oracle(&sol, &cfg.params);
    let (plus, minus) = sol.b_squared_roots;
    println!("eta: {}", sol.eta);
    println!("B^2 (plus): {plus}");
    println!("B^2 (minus): {minus}");
    println!("branch: {}", sol.branch);
    println!("kind: {}", sol.kind);
    match sol.kind {
        SolutionKind::Solitary => println!("B0: {}", sol.wavenumber),
        _ => println!("B: {}", sol.wavenumber),
    }
    println!("v: {}", sol.velocity);
    println!("A: {}", sol.amplitude);
    println!("residuals: {r2:e} {r3:e} {r4:e}");
    Ok(())
}

pub fn property_check(seed: u64, samples: usize) -> Result<(), Failure> {
    let report = run_all(SuiteOptions {
        seed,
        samples,
        ..SuiteOptions::default()
    });
    println!("seed {seed}");
    for suite in &report.suites {
        println!("{suite}");
    }
    if report.passed() {
        Ok(())
    } else {
        Err(Failure::Property)
    }
}
