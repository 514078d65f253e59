//! Randomized invariant suites run by `property-check`.
//!
//! Each suite draws mesh functions from a seeded ChaCha stream and reports
//! the worst normalised residual against its tolerance. The operator
//! applying difference stencils is injectable so that a deliberately broken
//! stencil can be shown to fail.

use std::fmt;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::diagnostics::quadratic_energy;
use crate::exact::{initial_condition, residual_oracle, solve_ansatz, Branch};
use crate::mesh::{apply_stencil, inner_product, norm_l2, norm_l2_shifted, DiffOp, Grid, MeshFn, Stencil};
use crate::scheme::{bootstrap_crank_nicolson, three_level_step, BootstrapOptions, SchemeParams, SimState};

pub const DEFAULT_SEED: u64 = 20240611;
pub const DEFAULT_SAMPLES: usize = 200;

pub const SBP_TOL: f64 = 1e-12;
pub const SKEW_TOL: f64 = 1e-12;
pub const NORM_IDENTITY_TOL: f64 = 1e-14;
pub const NONLINEAR_SKEW_TOL: f64 = 1e-12;
pub const DENSE_STEP_TOL: f64 = 1e-11;
pub const ANSATZ_TOL: f64 = 1e-13;
pub const QUADRATIC_FORM_TOL: f64 = 1e-10;

/// Applies a difference operator; [`crate::mesh::apply_diff`] in production.
pub type Operator<'a> = &'a dyn Fn(DiffOp, &MeshFn) -> MeshFn;

#[derive(Debug, Clone, PartialEq)]
pub struct SuiteResult {
    pub name: &'static str,
    pub cases: usize,
    pub worst: f64,
    pub tolerance: f64,
}

impl SuiteResult {
    pub fn passed(&self) -> bool {
        self.worst <= self.tolerance
    }
}

impl fmt::Display for SuiteResult {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{} {:<28} cases {:>4}  worst {:.3e}  tol {:.0e}",
            if self.passed() { "PASS" } else { "FAIL" },
            self.name,
            self.cases,
            self.worst,
            self.tolerance
        )
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PropertyReport {
    pub seed: u64,
    pub suites: Vec<SuiteResult>,
}

impl PropertyReport {
    pub fn passed(&self) -> bool {
        self.suites.iter().all(SuiteResult::passed)
    }

    pub fn suite(&self, name: &str) -> Option<&SuiteResult> {
        self.suites.iter().find(|s| s.name == name)
    }
}

#[derive(Debug, Clone, Copy)]
pub struct SuiteOptions {
    pub seed: u64,
    pub samples: usize,
    /// Largest cell count drawn for random grids.
    pub max_cells: usize,
}

impl Default for SuiteOptions {
    fn default() -> Self {
        Self {
            seed: DEFAULT_SEED,
            samples: DEFAULT_SAMPLES,
            max_cells: 64,
        }
    }
}

/// Every suite with the production operators.
pub fn run_all(opts: SuiteOptions) -> PropertyReport {
    run_all_with(opts, &crate::mesh::apply_diff)
}

pub fn run_all_with(opts: SuiteOptions, op: Operator<'_>) -> PropertyReport {
    let suites = vec![
        summation_by_parts(opts, op),
        skew_identities(opts, op),
        norm_identity(opts, op),
        central_norm_bound(opts, op),
        nonlinear_skew(opts, op),
        dense_step(opts),
        ansatz_residuals(),
        bootstrap_quadratic_form(),
    ];
    PropertyReport { seed: opts.seed, suites }
}

fn rng(opts: SuiteOptions, salt: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(opts.seed ^ salt.wrapping_mul(0x9e37_79b9_7f4a_7c15))
}

/// A grid with `8 ..= max_cells` cells and spacing in `[0.05, 2]`.
pub fn random_grid(rng: &mut impl Rng, max_cells: usize) -> Grid {
    let cells = rng.gen_range(crate::mesh::MIN_CELLS..=max_cells.max(crate::mesh::MIN_CELLS));
    let h = rng.gen_range(0.05..2.0);
    let x_left = rng.gen_range(-50.0..50.0);
    Grid::new(x_left, x_left + cells as f64 * h, cells).expect("positive length")
}

/// Uniform values in `[-1, 1]` on the unknowns, zero on the `Z0` nodes.
pub fn random_mesh_fn(rng: &mut impl Rng, grid: Grid) -> MeshFn {
    let unknowns: Vec<f64> = (0..grid.cells() - 3).map(|_| rng.gen_range(-1.0..=1.0)).collect();
    MeshFn::from_unknowns(grid, &unknowns).expect("length matches the grid")
}

fn ip(u: &MeshFn, v: &MeshFn) -> f64 {
    inner_product(u, v).expect("same grid")
}

/// `|lhs - rhs| / scale`, with an exact zero when both sides vanish.
fn rel(lhs: f64, rhs: f64, scale: f64) -> f64 {
    let diff = (lhs - rhs).abs();
    if diff == 0.0 {
        0.0
    } else {
        diff / scale
    }
}

fn summation_by_parts(opts: SuiteOptions, op: Operator<'_>) -> SuiteResult {
    let mut r = rng(opts, 1);
    let mut worst = 0.0f64;
    for _ in 0..opts.samples {
        let grid = random_grid(&mut r, opts.max_cells);
        let u = random_mesh_fn(&mut r, grid);
        let v = random_mesh_fn(&mut r, grid);
        let d = |k, w: &MeshFn| op(k, w);
        let (u_c, v_c) = (d(DiffOp::Central, &u), d(DiffOp::Central, &v));
        let (u_f, v_f) = (d(DiffOp::Forward, &u), d(DiffOp::Forward, &v));
        let v_b = d(DiffOp::Backward, &v);
        let u_2 = d(DiffOp::Second, &u);
        let u_4 = d(DiffOp::Fourth, &u);
        let (nu, nv) = (norm_l2(&u), norm_l2(&v));
        let checks = [
            rel(ip(&u_c, &v), -ip(&u, &v_c), norm_l2(&u_c) * nv + nu * norm_l2(&v_c)),
            rel(ip(&u_f, &v), -ip(&u, &v_b), norm_l2(&u_f) * nv + nu * norm_l2(&v_b)),
            rel(ip(&u_2, &v), -ip(&u_f, &v_f), norm_l2(&u_2) * nv + norm_l2(&u_f) * norm_l2(&v_f)),
            rel(ip(&u, &u_4), norm_l2(&u_2).powi(2), nu * norm_l2(&u_4) + norm_l2(&u_2).powi(2)),
        ];
        worst = checks.into_iter().fold(worst, f64::max);
    }
    SuiteResult {
        name: "summation by parts",
        cases: opts.samples,
        worst,
        tolerance: SBP_TOL,
    }
}

fn skew_identities(opts: SuiteOptions, op: Operator<'_>) -> SuiteResult {
    let mut r = rng(opts, 2);
    let mut worst = 0.0f64;
    for _ in 0..opts.samples {
        let grid = random_grid(&mut r, opts.max_cells);
        let u = random_mesh_fn(&mut r, grid);
        let nu = norm_l2(&u);
        for k in [DiffOp::Central, DiffOp::Third, DiffOp::Fifth] {
            let du = op(k, &u);
            worst = worst.max(rel(ip(&du, &u), 0.0, nu * norm_l2(&du)));
        }
    }
    SuiteResult {
        name: "skew identities",
        cases: opts.samples,
        worst,
        tolerance: SKEW_TOL,
    }
}

const FORWARD_SECOND: Stencil = Stencil {
    first: 0,
    coeffs: &[1.0, -2.0, 1.0],
    scale: 1.0,
    power: 2,
};

/// `‖U_xx‖` on the forward-shifted index set against `‖U_{x x̄}‖`.
fn norm_identity(opts: SuiteOptions, op: Operator<'_>) -> SuiteResult {
    let mut r = rng(opts, 3);
    let mut worst = 0.0f64;
    for _ in 0..opts.samples {
        let grid = random_grid(&mut r, opts.max_cells);
        let u = random_mesh_fn(&mut r, grid);
        let uxx = apply_stencil(FORWARD_SECOND, &u);
        let centred = norm_l2(&op(DiffOp::Second, &u));
        worst = worst.max(rel(norm_l2_shifted(&uxx, -1), centred, centred));
    }
    SuiteResult {
        name: "second-difference norms",
        cases: opts.samples,
        worst,
        tolerance: NORM_IDENTITY_TOL,
    }
}

/// `‖U_x̂‖ <= ‖U_x‖`; the residual is the relative excess, zero when it holds.
fn central_norm_bound(opts: SuiteOptions, op: Operator<'_>) -> SuiteResult {
    let mut r = rng(opts, 4);
    let mut worst = 0.0f64;
    for _ in 0..opts.samples {
        let grid = random_grid(&mut r, opts.max_cells);
        let u = random_mesh_fn(&mut r, grid);
        let central = norm_l2(&op(DiffOp::Central, &u));
        let forward = norm_l2(&op(DiffOp::Forward, &u));
        worst = worst.max(((central - forward) / forward).max(0.0));
    }
    SuiteResult {
        name: "central-forward norm bound",
        cases: opts.samples,
        worst,
        tolerance: 0.0,
    }
}

/// `(P V_x̂ + (P V)_x̂, V) = 0` with `P = U^m`.
fn nonlinear_skew(opts: SuiteOptions, op: Operator<'_>) -> SuiteResult {
    let mut r = rng(opts, 5);
    let mut worst = 0.0f64;
    for _ in 0..opts.samples {
        let grid = random_grid(&mut r, opts.max_cells);
        let u = random_mesh_fn(&mut r, grid);
        let v = random_mesh_fn(&mut r, grid);
        let m = r.gen_range(1..=5);
        let p = u.map(|x| x.powi(m));
        let a = p.pointwise(&op(DiffOp::Central, &v)).expect("same grid");
        let b = op(DiffOp::Central, &p.pointwise(&v).expect("same grid"));
        let value = ip(&(&a + &b), &v);
        worst = worst.max(rel(value, 0.0, (norm_l2(&a) + norm_l2(&b)) * norm_l2(&v)));
    }
    SuiteResult {
        name: "nonlinear skew symmetry",
        cases: opts.samples,
        worst,
        tolerance: NONLINEAR_SKEW_TOL,
    }
}

fn random_params(rng: &mut impl Rng) -> SchemeParams {
    SchemeParams {
        a: rng.gen_range(-2.0..2.0),
        b: rng.gen_range(-2.0..2.0),
        c: rng.gen_range(-2.0..2.0),
        alpha: rng.gen_range(0.1..2.0),
        lambda: rng.gen_range(0.1..2.0),
        nu: rng.gen_range(-2.0..2.0),
        m: rng.gen_range(1..=4),
    }
}

/// One three-level step against a dense solve of the same equations built
/// column by column from the stencil definitions.
fn dense_step(opts: SuiteOptions) -> SuiteResult {
    let mut r = rng(opts, 6);
    let mut worst = 0.0f64;
    let cases = opts.samples.min(50);
    for _ in 0..cases {
        let grid = random_grid(&mut r, 16);
        let p = random_params(&mut r);
        let tau = r.gen_range(0.01..1.0);
        let prev = random_mesh_fn(&mut r, grid);
        let curr = random_mesh_fn(&mut r, grid);
        let state = SimState {
            step: 1,
            prev: prev.clone(),
            curr: curr.clone(),
        };
        let banded = match three_level_step(&state, &p, tau) {
            Ok(u) => u,
            Err(_) => {
                worst = f64::INFINITY;
                continue;
            }
        };
        let Some(oracle) = dense_three_level(&prev, &curr, &p, tau) else {
            continue;
        };
        let scale = oracle.iter().fold(1.0f64, |acc, v| acc.max(v.abs()));
        let diff = banded
            .unknowns()
            .iter()
            .zip(&oracle)
            .fold(0.0f64, |acc, (a, b)| acc.max((a - b).abs()));
        worst = worst.max(diff / scale);
    }
    SuiteResult {
        name: "dense step equivalence",
        cases,
        worst,
        tolerance: DENSE_STEP_TOL,
    }
}

/// `(1/2τ) L W + ½ S W + κ (P W_x̂ + (P W)_x̂)` evaluated through the mesh operators.
fn scheme_operator(w: &MeshFn, pw: &MeshFn, p: &SchemeParams, tau: f64, sign: f64) -> MeshFn {
    use crate::mesh::apply_diff as d;
    let time = &(&(w - &(p.alpha * &d(DiffOp::Second, w))) + &(p.lambda * &d(DiffOp::Fourth, w)));
    let skew = &(&(p.a * &d(DiffOp::Central, w)) + &(p.c * &d(DiffOp::Third, w))) - &(p.nu * &d(DiffOp::Fifth, w));
    let nl = &pw.pointwise(&d(DiffOp::Central, w)).expect("same grid")
        + &d(DiffOp::Central, &pw.pointwise(w).expect("same grid"));
    &(&((0.5 / tau) * time) + &((0.5 * sign) * &skew)) + &((sign * p.kappa()) * &nl)
}

/// Dense oracle for one step; `None` if the dense matrix is singular.
pub fn dense_three_level(prev: &MeshFn, curr: &MeshFn, p: &SchemeParams, tau: f64) -> Option<Vec<f64>> {
    let grid = *curr.grid();
    let n = grid.cells() - 3;
    let pw = curr.map(|x| x.powi(p.m as i32));
    let mut a = vec![vec![0.0; n]; n];
    for j in 0..n {
        let mut e = vec![0.0; n];
        e[j] = 1.0;
        let col = scheme_operator(&MeshFn::from_unknowns(grid, &e).ok()?, &pw, p, tau, 1.0);
        for (i, row) in a.iter_mut().enumerate() {
            row[j] = col.unknowns()[i];
        }
    }
    let b = scheme_operator(prev, &pw, p, tau, -1.0).unknowns().to_vec();
    gauss_solve(a, b)
}

fn gauss_solve(mut a: Vec<Vec<f64>>, mut b: Vec<f64>) -> Option<Vec<f64>> {
    let n = b.len();
    for k in 0..n {
        let piv = (k..n).max_by(|&i, &j| a[i][k].abs().total_cmp(&a[j][k].abs()))?;
        if a[piv][k] == 0.0 {
            return None;
        }
        a.swap(k, piv);
        b.swap(k, piv);
        for i in k + 1..n {
            let f = a[i][k] / a[k][k];
            for j in k..n {
                a[i][j] -= f * a[k][j];
            }
            b[i] -= f * b[k];
        }
    }
    let mut x = vec![0.0; n];
    for i in (0..n).rev() {
        let s: f64 = (i + 1..n).map(|j| a[i][j] * x[j]).sum();
        x[i] = (b[i] - s) / a[i][i];
    }
    Some(x)
}

fn ansatz_residuals() -> SuiteResult {
    let mut worst = 0.0f64;
    for p in [SchemeParams::example1(), SchemeParams::example2()] {
        match solve_ansatz(&p, Branch::Minus) {
            Ok(s) => worst = residual_oracle(&s, &p).into_iter().fold(worst, f64::max),
            Err(_) => worst = f64::INFINITY,
        }
    }
    SuiteResult {
        name: "ansatz residuals",
        cases: 2,
        worst,
        tolerance: ANSATZ_TOL,
    }
}

/// The start-up step preserves `‖U‖² + α‖U_x‖² + λ‖U_{x x̄}‖²` on both examples.
pub fn bootstrap_quadratic_form() -> SuiteResult {
    let mut worst = 0.0f64;
    for p in [SchemeParams::example1(), SchemeParams::example2()] {
        worst = worst.max(bootstrap_form_drift(&p, 0.1, 0.1).unwrap_or(f64::INFINITY));
    }
    SuiteResult {
        name: "start-up quadratic form",
        cases: 2,
        worst,
        tolerance: QUADRATIC_FORM_TOL,
    }
}

/// Relative change of the quadratic form over the start-up step for the
/// solitary wave on `(-40, 240)`.
pub fn bootstrap_form_drift(p: &SchemeParams, h: f64, tau: f64) -> Option<f64> {
    let s = solve_ansatz(p, Branch::Minus).ok()?;
    let grid = Grid::with_spacing(-40.0, 240.0, h).ok()?;
    let (u0, _) = initial_condition(&s, grid).ok()?;
    let (u1, _) = bootstrap_crank_nicolson(&u0, p, tau, BootstrapOptions::default()).ok()?;
    let q0 = quadratic_energy(&u0, p.alpha, p.lambda);
    let q1 = quadratic_energy(&u1, p.alpha, p.lambda);
    Some((q1 - q0).abs() / q0)
}
