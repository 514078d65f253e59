//! Three-level linearly implicit conservative scheme and its
//! Crank–Nicolson start-up step.
//!
//! With `L = I - α D2 + λ D4`, `S = a D1 + c D3 - ν D5` and the skew
//! nonlinear form `N_P(W) = P·D1(W) + D1(P·W)`, a step from `U^{n-1}, U^n`
//! to `W = U^{n+1}` solves
//!
//! ```text
//! (1/2τ) L W + ½ S W + κ N_P(W) = (1/2τ) L U^{n-1} - ½ S U^{n-1} - κ N_P(U^{n-1})
//! ```
//!
//! where `P = (U^n)^m` and `κ = b / (2(m+2))`. The start-up step has the
//! same shape with `1/τ` in place of `1/2τ` and `P` evaluated at the
//! midpoint of the unknown, resolved by frozen-coefficient iteration.

use log::debug;
use thiserror::Error;

use crate::banded::{lu_factor, BandedMatrix, LinalgError};
use crate::diagnostics::{discrete_energy, EnergyRecord};
use crate::mesh::{apply_diff, norm_max, DiffOp, Grid, MeshError, MeshFn};

/// Half-bandwidth of the scheme matrix (the fifth-order stencil spans `i ± 3`).
pub const BANDWIDTH: usize = 3;

pub const DEFAULT_BOOTSTRAP_TOL: f64 = 1e-12;
pub const DEFAULT_BOOTSTRAP_MAX_ITER: usize = 50;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SchemeError {
    #[error("invalid parameters: {0}")]
    InvalidParams(String),
    #[error("invalid time grid: {0}")]
    InvalidTimeGrid(String),
    #[error("singular system at step {step}: {source}")]
    Singular {
        step: usize,
        #[source]
        source: LinalgError,
    },
    #[error("start-up iteration did not converge in {iterations} iterations (last update {residual:e})")]
    NoConvergence { iterations: usize, residual: f64 },
    #[error("step {step} residual {residual:e} exceeds {bound:e}")]
    ResidualCheck {
        step: usize,
        residual: f64,
        bound: f64,
    },
    #[error(transparent)]
    Mesh(#[from] MeshError),
}

/// Equation coefficients `a, b, c, α, λ, ν` and nonlinearity power `m`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SchemeParams {
    pub a: f64,
    pub b: f64,
    pub c: f64,
    pub alpha: f64,
    pub lambda: f64,
    pub nu: f64,
    pub m: u32,
}

impl SchemeParams {
    pub fn new(a: f64, b: f64, c: f64, alpha: f64, lambda: f64, nu: f64, m: u32) -> Result<Self, SchemeError> {
        let p = Self {
            a,
            b,
            c,
            alpha,
            lambda,
            nu,
            m,
        };
        p.validate()?;
        Ok(p)
    }

    /// `m = 2, a = b = 1, c = 2, α = λ = ν = 1`.
    pub fn example1() -> Self {
        Self {
            a: 1.0,
            b: 1.0,
            c: 2.0,
            alpha: 1.0,
            lambda: 1.0,
            nu: 1.0,
            m: 2,
        }
    }

    /// Same coefficients as [`example1`](Self::example1) with `m = 4`.
    pub fn example2() -> Self {
        Self {
            m: 4,
            ..Self::example1()
        }
    }

    pub fn validate(&self) -> Result<(), SchemeError> {
        let finite = [self.a, self.b, self.c, self.alpha, self.lambda, self.nu]
            .iter()
            .all(|v| v.is_finite());
        if !finite {
            return Err(SchemeError::InvalidParams("coefficients must be finite".into()));
        }
        if !(self.alpha > 0.0) {
            return Err(SchemeError::InvalidParams(format!("alpha = {} must be positive", self.alpha)));
        }
        if !(self.lambda > 0.0) {
            return Err(SchemeError::InvalidParams(format!("lambda = {} must be positive", self.lambda)));
        }
        if self.m < 1 {
            return Err(SchemeError::InvalidParams("m must be at least 1".into()));
        }
        Ok(())
    }

    /// `κ = b / (2(m + 2))`.
    pub fn kappa(&self) -> f64 {
        self.b / (2.0 * (self.m as f64 + 2.0))
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TimeGrid {
    tau: f64,
    steps: usize,
}

impl TimeGrid {
    pub fn new(tau: f64, steps: usize) -> Result<Self, SchemeError> {
        if !(tau > 0.0) || !tau.is_finite() {
            return Err(SchemeError::InvalidTimeGrid(format!("tau = {tau} must be positive")));
        }
        if steps < 1 {
            return Err(SchemeError::InvalidTimeGrid("N must be at least 1".into()));
        }
        Ok(Self { tau, steps })
    }

    /// `N = round(T / τ)`; the realised final time is `N τ`.
    pub fn from_final_time(final_time: f64, tau: f64) -> Result<Self, SchemeError> {
        if !(final_time > 0.0) || !final_time.is_finite() {
            return Err(SchemeError::InvalidTimeGrid(format!("T = {final_time} must be positive")));
        }
        if !(tau > 0.0) || !tau.is_finite() {
            return Err(SchemeError::InvalidTimeGrid(format!("tau = {tau} must be positive")));
        }
        Self::new(tau, ((final_time / tau).round() as usize).max(1))
    }

    pub fn tau(&self) -> f64 {
        self.tau
    }

    pub fn steps(&self) -> usize {
        self.steps
    }

    pub fn final_time(&self) -> f64 {
        self.steps as f64 * self.tau
    }

    pub fn t(&self, n: usize) -> f64 {
        n as f64 * self.tau
    }
}

/// Two consecutive time levels `U^{n-1}, U^n`.
#[derive(Debug, Clone, PartialEq)]
pub struct SimState {
    pub step: usize,
    pub prev: MeshFn,
    pub curr: MeshFn,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BootstrapReport {
    pub iterations: usize,
    /// Last update `‖V^{k+1} - V^k‖∞`.
    pub residual: f64,
    /// Accepted at the rounding floor rather than below `tol`.
    pub stalled: bool,
}

#[derive(Debug, Clone)]
pub struct SimOutput {
    pub time_grid: TimeGrid,
    /// `(t_n, U^n)` for `n = 0`, every stride-th step and `n = N`.
    pub snapshots: Vec<(f64, MeshFn)>,
    /// `E^n` at `t = (n + ½) τ`, `n = 0 ..= N - 1`.
    pub energy: Vec<EnergyRecord>,
    pub bootstrap: BootstrapReport,
}

impl SimOutput {
    pub fn final_state(&self) -> &MeshFn {
        &self.snapshots.last().expect("at least one snapshot").1
    }
}

#[derive(Debug, Clone, Copy)]
pub struct BootstrapOptions {
    pub tol: f64,
    pub max_iter: usize,
}

impl Default for BootstrapOptions {
    fn default() -> Self {
        Self {
            tol: DEFAULT_BOOTSTRAP_TOL,
            max_iter: DEFAULT_BOOTSTRAP_MAX_ITER,
        }
    }
}

/// Per-row weights for offsets `-3 ..= 3`.
type Row = [f64; 2 * BANDWIDTH + 1];

/// Weights of `L` and `S`; identical for every row of a uniform grid.
struct LinearRows {
    time: Row,
    skew: Row,
}

impl LinearRows {
    fn new(p: &SchemeParams, h: f64) -> Self {
        let mut time = [0.0; 7];
        let mut skew = [0.0; 7];
        time[3] = 1.0;
        let add = |row: &mut Row, op: DiffOp, coef: f64| {
            for (k, w) in op.stencil().weights(h) {
                row[(k + 3) as usize] += coef * w;
            }
        };
        add(&mut time, DiffOp::Second, -p.alpha);
        add(&mut time, DiffOp::Fourth, p.lambda);
        add(&mut skew, DiffOp::Central, p.a);
        add(&mut skew, DiffOp::Third, p.c);
        add(&mut skew, DiffOp::Fifth, -p.nu);
        Self { time, skew }
    }

    /// Row `i` of `κ N_P`: `κ (P_i (W_{i+1} - W_{i-1}) + P_{i+1} W_{i+1} - P_{i-1} W_{i-1}) / 2h`.
    fn nonlinear(&self, coef: &MeshFn, i: isize, kappa: f64, h: f64) -> Row {
        let mut row = [0.0; 7];
        let s = kappa / (2.0 * h);
        row[2] = -s * (coef.get(i) + coef.get(i - 1));
        row[4] = s * (coef.get(i) + coef.get(i + 1));
        row
    }
}

fn power_field(u: &MeshFn, m: u32) -> MeshFn {
    u.map(|v| v.powi(m as i32))
}

/// Builds `time_coef L + ½ S + κ N_P` on the unknowns `i = 2 ..= M - 2`.
fn assemble_matrix(coef: &MeshFn, p: &SchemeParams, time_coef: f64) -> BandedMatrix {
    let grid = *coef.grid();
    let h = grid.h();
    let m = grid.cells() as isize;
    let n = grid.cells() - 3;
    let rows = LinearRows::new(p, h);
    let kappa = p.kappa();
    let bw = BANDWIDTH.min(n - 1);
    let mut a = BandedMatrix::zeros(n, bw, bw).expect("M >= 8 gives n >= 5");
    for i in 2..=m - 2 {
        let nl = rows.nonlinear(coef, i, kappa, h);
        for k in -3isize..=3 {
            let j = i + k;
            if !(2..=m - 2).contains(&j) {
                continue;
            }
            let slot = (k + 3) as usize;
            let w = time_coef * rows.time[slot] + 0.5 * rows.skew[slot] + nl[slot];
            if w != 0.0 {
                a.add((i - 2) as usize, (j - 2) as usize, w)
                    .expect("stencil stays within the band");
            }
        }
    }
    a
}

/// Right-hand side `time_coef L U - ½ S U - κ N_P(U)` on the unknowns.
fn assemble_vector(coef: &MeshFn, u: &MeshFn, p: &SchemeParams, time_coef: f64) -> Vec<f64> {
    let grid = *coef.grid();
    let h = grid.h();
    let m = grid.cells() as isize;
    let rows = LinearRows::new(p, h);
    let kappa = p.kappa();
    (2..=m - 2)
        .map(|i| {
            let nl = rows.nonlinear(coef, i, kappa, h);
            (0..7)
                .map(|slot| {
                    let w = time_coef * rows.time[slot] - 0.5 * rows.skew[slot] - nl[slot];
                    w * u.get(i + slot as isize - 3)
                })
                .sum()
        })
        .collect()
}

/// Coefficient matrix of the three-level step for the unknown `U^{n+1}`.
pub fn assemble_lhs(u_curr: &MeshFn, p: &SchemeParams, tau: f64) -> BandedMatrix {
    assemble_matrix(&power_field(u_curr, p.m), p, 1.0 / (2.0 * tau))
}

/// Right-hand side of the three-level step.
pub fn assemble_rhs(u_prev: &MeshFn, u_curr: &MeshFn, p: &SchemeParams, tau: f64) -> Result<Vec<f64>, SchemeError> {
    u_prev.check_grid(u_curr)?;
    Ok(assemble_vector(&power_field(u_curr, p.m), u_prev, p, 1.0 / (2.0 * tau)))
}

/// Pointwise residual of the three-level equation at `i = 2 ..= M - 2`,
/// evaluated directly from the difference operators.
pub fn three_level_residual(
    u_prev: &MeshFn,
    u_curr: &MeshFn,
    u_next: &MeshFn,
    p: &SchemeParams,
    tau: f64,
) -> Result<MeshFn, SchemeError> {
    u_prev.check_grid(u_curr)?;
    u_prev.check_grid(u_next)?;
    let mean = 0.5 * &(u_next + u_prev);
    let dt = (1.0 / (2.0 * tau)) * &(u_next - u_prev);
    let pw = power_field(u_curr, p.m);
    Ok(equation_residual(&dt, &mean, &pw, p))
}

/// Residual of the start-up equation for a candidate `U^1`.
pub fn crank_nicolson_residual(u0: &MeshFn, u1: &MeshFn, p: &SchemeParams, tau: f64) -> Result<MeshFn, SchemeError> {
    u0.check_grid(u1)?;
    let mean = 0.5 * &(u1 + u0);
    let dt = (1.0 / tau) * &(u1 - u0);
    let pw = power_field(&mean, p.m);
    Ok(equation_residual(&dt, &mean, &pw, p))
}

/// `L(dt) + S(mean) + (b/(m+2)) (P mean_x̂ + (P mean)_x̂)` at the interior rows.
fn equation_residual(dt: &MeshFn, mean: &MeshFn, pw: &MeshFn, p: &SchemeParams) -> MeshFn {
    let grid = *dt.grid();
    let d2 = apply_diff(DiffOp::Second, dt);
    let d4 = apply_diff(DiffOp::Fourth, dt);
    let d1 = apply_diff(DiffOp::Central, mean);
    let d3 = apply_diff(DiffOp::Third, mean);
    let d5 = apply_diff(DiffOp::Fifth, mean);
    let pm = pw.pointwise(mean).expect("same grid");
    let d1pm = apply_diff(DiffOp::Central, &pm);
    let g = p.b / (p.m as f64 + 2.0);
    let m = grid.cells() as isize;
    let mut r = MeshFn::zeros(grid);
    for i in 2..=m - 2 {
        let v = dt.get(i) - p.alpha * d2.get(i) + p.lambda * d4.get(i)
            + p.a * d1.get(i)
            + p.c * d3.get(i)
            - p.nu * d5.get(i)
            + g * (pw.get(i) * d1.get(i) + d1pm.get(i));
        r.set(i, v);
    }
    r
}

fn solve_system(a: &BandedMatrix, rhs: &[f64], grid: Grid, step: usize) -> Result<MeshFn, SchemeError> {
    let lu = lu_factor(a).map_err(|source| SchemeError::Singular { step, source })?;
    let x = lu
        .solve(rhs)
        .map_err(|source| SchemeError::Singular { step, source })?;
    Ok(MeshFn::from_unknowns(grid, &x)?)
}

/// Advances `(U^{n-1}, U^n)` to `U^{n+1}`.
///
/// In builds with debug assertions the result is substituted back into the
/// difference equation and rejected if the residual exceeds
/// `1e-9 (1 + ‖U‖∞)` times the absolute row sum of the operator weights.
/// The weights grow like `1/h⁵`, so an unscaled bound would trip on
/// rounding alone for fine grids.
pub fn three_level_step(state: &SimState, p: &SchemeParams, tau: f64) -> Result<MeshFn, SchemeError> {
    state.prev.check_grid(&state.curr)?;
    let grid = *state.curr.grid();
    let pw = power_field(&state.curr, p.m);
    let time_coef = 1.0 / (2.0 * tau);
    let a = assemble_matrix(&pw, p, time_coef);
    let rhs = assemble_vector(&pw, &state.prev, p, time_coef);
    let next = solve_system(&a, &rhs, grid, state.step)?;

    if cfg!(debug_assertions) {
        let res = three_level_residual(&state.prev, &state.curr, &next, p, tau)?;
        let scale = norm_max(&next).max(norm_max(&state.curr)).max(norm_max(&state.prev));
        let bound = 1e-9 * (1.0 + scale) * residual_scale(p, grid.h(), tau);
        let worst = norm_max(&res);
        if worst > bound {
            return Err(SchemeError::ResidualCheck {
                step: state.step,
                residual: worst,
                bound,
            });
        }
    }
    Ok(next)
}

/// Magnitude of the largest operator weight, so that the residual bound is
/// relative to the size of the individual terms being cancelled.
fn residual_scale(p: &SchemeParams, h: f64, tau: f64) -> f64 {
    let rows = LinearRows::new(p, h);
    let t: f64 = rows.time.iter().map(|w| w.abs()).sum::<f64>() / tau;
    let s: f64 = rows.skew.iter().map(|w| w.abs()).sum();
    1.0f64.max(t + s)
}

/// Computes `U^1` from `U^0` with the nonlinear Crank–Nicolson step.
///
/// Each iterate freezes `P = ((V^k + U^0)/2)^m` and solves the resulting
/// banded system for `V^{k+1}`, stopping once `‖V^{k+1} - V^k‖∞ < tol`.
///
/// On fine grids the update cannot shrink below the rounding floor of the
/// `λ/h⁴` operator (about 1e-6 at `h = 0.005`). When the update has stopped
/// decreasing for [`STALL_WINDOW`] iterates and sits below
/// [`rounding_floor`], the iterate is accepted and the report is marked
/// `stalled`.
pub fn bootstrap_crank_nicolson(
    u0: &MeshFn,
    p: &SchemeParams,
    tau: f64,
    opts: BootstrapOptions,
) -> Result<(MeshFn, BootstrapReport), SchemeError> {
    let grid = *u0.grid();
    let time_coef = 1.0 / tau;
    let floor = rounding_floor(u0, p, tau);
    let mut v = u0.clone();
    let mut residual = f64::INFINITY;
    let mut best = f64::INFINITY;
    let mut since_best = 0;
    for k in 1..=opts.max_iter {
        let mean = 0.5 * &(&v + u0);
        let pw = power_field(&mean, p.m);
        let a = assemble_matrix(&pw, p, time_coef);
        let rhs = assemble_vector(&pw, u0, p, time_coef);
        let next = solve_system(&a, &rhs, grid, 0)?;
        residual = norm_max(&(&next - &v));
        v = next;
        debug!("start-up iterate {k}: update {residual:e}");
        if residual < opts.tol {
            return Ok((
                v,
                BootstrapReport {
                    iterations: k,
                    residual,
                    stalled: false,
                },
            ));
        }
        if residual < best {
            best = residual;
            since_best = 0;
        } else {
            since_best += 1;
        }
        if since_best >= STALL_WINDOW && best <= floor {
            debug!("start-up iteration stalled at {best:e} (floor {floor:e})");
            return Ok((
                v,
                BootstrapReport {
                    iterations: k,
                    residual,
                    stalled: true,
                },
            ));
        }
    }
    Err(SchemeError::NoConvergence {
        iterations: opts.max_iter,
        residual,
    })
}

/// Consecutive non-improving iterates before a stall is declared.
pub const STALL_WINDOW: usize = 5;

/// Upper bound on the attainable update size in double precision:
/// `ε τ max(1, ‖U‖∞) Σ|row weights|`.
pub fn rounding_floor(u: &MeshFn, p: &SchemeParams, tau: f64) -> f64 {
    let rows = LinearRows::new(p, u.grid().h());
    let time: f64 = rows.time.iter().map(|w| w.abs()).sum::<f64>() / tau;
    let skew: f64 = 0.5 * rows.skew.iter().map(|w| w.abs()).sum::<f64>();
    f64::EPSILON * tau * norm_max(u).max(1.0) * (time + skew)
}

/// Runs the full simulation: one start-up step, then `N - 1` three-level steps.
///
/// `snapshot_stride = 0` keeps only the initial and final states.
pub fn run(
    u0: &MeshFn,
    p: &SchemeParams,
    time_grid: TimeGrid,
    snapshot_stride: usize,
    opts: BootstrapOptions,
) -> Result<SimOutput, SchemeError> {
    p.validate()?;
    let tau = time_grid.tau();
    let steps = time_grid.steps();
    let mut u0 = u0.clone();
    u0.project_z0();

    let (u1, bootstrap) = bootstrap_crank_nicolson(&u0, p, tau, opts)?;
    let mut energy = Vec::with_capacity(steps);
    let mut snapshots = vec![(0.0, u0.clone())];
    let energy_at = |n: usize, a: &MeshFn, b: &MeshFn| -> Result<EnergyRecord, SchemeError> {
        Ok(EnergyRecord {
            time: (n as f64 + 0.5) * tau,
            energy: discrete_energy(a, b, p.alpha, p.lambda)?,
        })
    };
    energy.push(energy_at(0, &u0, &u1)?);
    let keep = |n: usize| n == steps || (snapshot_stride > 0 && n % snapshot_stride == 0);
    if keep(1) {
        snapshots.push((time_grid.t(1), u1.clone()));
    }

    let mut state = SimState {
        step: 1,
        prev: u0,
        curr: u1,
    };
    for n in 1..steps {
        let next = three_level_step(&state, p, tau)?;
        energy.push(energy_at(n, &state.curr, &next)?);
        if keep(n + 1) {
            snapshots.push((time_grid.t(n + 1), next.clone()));
        }
        state = SimState {
            step: n + 1,
            prev: std::mem::replace(&mut state.curr, next.clone()),
            curr: next,
        };
    }

    Ok(SimOutput {
        time_grid,
        snapshots,
        energy,
        bootstrap,
    })
}
