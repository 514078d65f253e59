//! Discrete energy, error norms and conservation drift.

use thiserror::Error;

use crate::mesh::{apply_diff, norm_l2, DiffOp, MeshError, MeshFn};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum DiagnosticsError {
    #[error("energy series is empty")]
    EmptySeries,
    #[error(transparent)]
    Mesh(#[from] MeshError),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EnergyRecord {
    /// Midpoint time `(n + ½) τ`.
    pub time: f64,
    pub energy: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ErrorReport {
    pub time: f64,
    pub l2_error: f64,
    pub max_error: f64,
}

/// `‖U‖² + α ‖U_x‖² + λ ‖U_{x x̄}‖²`.
pub fn quadratic_energy(u: &MeshFn, alpha: f64, lambda: f64) -> f64 {
    let ux = apply_diff(DiffOp::Forward, u);
    let uxx = apply_diff(DiffOp::Second, u);
    norm_l2(u).powi(2) + alpha * norm_l2(&ux).powi(2) + lambda * norm_l2(&uxx).powi(2)
}

/// Two-level energy `E^n` built from `U^n` and `U^{n+1}`.
pub fn discrete_energy(u_n: &MeshFn, u_np1: &MeshFn, alpha: f64, lambda: f64) -> Result<f64, MeshError> {
    u_n.check_grid(u_np1)?;
    Ok(0.5 * (quadratic_energy(u_n, alpha, lambda) + quadratic_energy(u_np1, alpha, lambda)))
}

/// L2 and max norms of `U - u(·, t)` over `i = 1 ..= M - 1`.
pub fn error_report(u: &MeshFn, exact: impl Fn(f64, f64) -> f64, t: f64) -> ErrorReport {
    let grid = u.grid();
    let m = grid.cells() as isize;
    let mut sq = 0.0;
    let mut max = 0.0f64;
    for i in 1..m {
        let e = exact(grid.x(i), t) - u.get(i);
        sq += e * e;
        max = max.max(e.abs());
    }
    ErrorReport {
        time: t,
        l2_error: (grid.h() * sq).sqrt(),
        max_error: max,
    }
}

/// `max_n |E^n - E^0| / |E^0|`.
pub fn drift(series: &[EnergyRecord]) -> Result<f64, DiagnosticsError> {
    let first = series.first().ok_or(DiagnosticsError::EmptySeries)?.energy;
    let worst = series
        .iter()
        .map(|r| (r.energy - first).abs())
        .fold(0.0f64, f64::max);
    if first == 0.0 {
        return Ok(if worst == 0.0 { 0.0 } else { f64::INFINITY });
    }
    Ok(worst / first.abs())
}
