//! Closed-form travelling waves from the cosine ansatz `u = A cos^η(B ξ)`,
//! `ξ = x - v t`.
//!
//! Balancing powers gives `η = -4/m`; `B²` solves a quadratic whose two
//! roots are the `plus`/`minus` branches. A negative `B²` turns the cosine
//! into a hyperbolic cosine and yields the solitary pulse
//! `A sech^{4/m}(B0 ξ)` with `B0 = √(-B²)`.

use std::fmt;
use std::str::FromStr;

use thiserror::Error;

use crate::mesh::{Grid, MeshFn};
use crate::scheme::SchemeParams;

/// Boundary magnitude above which the sampled pulse is considered truncated.
pub const BOUNDARY_TOL: f64 = 1e-8;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum AnsatzError {
    #[error("degenerate denominator: lambda*c - nu*alpha = 0")]
    DegenerateDenominator,
    #[error("negative discriminant {0:e}: complex-coefficient solutions are not supported")]
    ComplexCase(f64),
    #[error("amplitude undefined: even m = {m} with non-positive bracket {bracket:e}")]
    AmplitudeUndefined { m: u32, bracket: f64 },
    #[error("velocity pole: 2*lambda*B^2*(eta^2-2eta+2) + alpha = 0")]
    VelocityPole,
    #[error("expected a {expected} solution, got {got}")]
    WrongKind { expected: SolutionKind, got: SolutionKind },
    #[error("no unique solitary branch: B^2 roots are {plus:e} and {minus:e}")]
    NoSolitaryBranch { plus: f64, minus: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Branch {
    Plus,
    Minus,
}

impl fmt::Display for Branch {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Branch::Plus => "plus",
            Branch::Minus => "minus",
        })
    }
}

impl FromStr for Branch {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "plus" => Ok(Branch::Plus),
            "minus" => Ok(Branch::Minus),
            other => Err(format!("unknown branch '{other}' (expected plus or minus)")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SolutionKind {
    Solitary,
    Periodic,
    ComplexCase,
}

impl fmt::Display for SolutionKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            SolutionKind::Solitary => "solitary",
            SolutionKind::Periodic => "periodic",
            SolutionKind::ComplexCase => "complex",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AnsatzSolution {
    pub eta: f64,
    /// `(plus, minus)` roots for `B²`.
    pub b_squared_roots: (f64, f64),
    pub branch: Branch,
    pub kind: SolutionKind,
    /// `√|B²|` of the chosen root: `B0` for solitary, `B` for periodic.
    pub wavenumber: f64,
    pub velocity: f64,
    pub amplitude: f64,
}

impl AnsatzSolution {
    pub fn b_squared(&self) -> f64 {
        match self.branch {
            Branch::Plus => self.b_squared_roots.0,
            Branch::Minus => self.b_squared_roots.1,
        }
    }

    /// `A sech^{-η}(B0 (x - v t))`.
    pub fn eval_solitary(&self, x: f64, t: f64) -> Result<f64, AnsatzError> {
        if self.kind != SolutionKind::Solitary {
            return Err(AnsatzError::WrongKind {
                expected: SolutionKind::Solitary,
                got: self.kind,
            });
        }
        Ok(self.profile(x - self.velocity * t))
    }

    /// Pulse shape as a function of `ξ`. Only meaningful for solitary kinds.
    pub fn profile(&self, xi: f64) -> f64 {
        let sech = 1.0 / (self.wavenumber * xi).cosh();
        self.amplitude * sech.powf(-self.eta)
    }
}

struct Quadratic {
    eta: f64,
    /// `η² - 2η + 2`
    k: f64,
    disc: f64,
    /// `(λc - να) η² (η - 2)²`
    denom: f64,
}

impl Quadratic {
    fn new(p: &SchemeParams) -> Self {
        let eta = -4.0 / p.m as f64;
        let k = eta * eta - 2.0 * eta + 2.0;
        let q = eta * eta * (eta - 2.0).powi(2);
        let la_nu = p.lambda * p.a + p.nu;
        let lc_na = p.lambda * p.c - p.nu * p.alpha;
        let disc = la_nu * la_nu * k * k + lc_na * (p.alpha * p.a + p.c) * q;
        Self {
            eta,
            k,
            disc,
            denom: lc_na * q,
        }
    }

    /// `(plus, minus)`. The larger root comes from whichever sign avoids
    /// cancellation, the other from the product `-(αa + c)/denom`.
    fn roots(&self, p: &SchemeParams) -> (f64, f64) {
        let base = (p.lambda * p.a + p.nu) * self.k;
        let s = self.disc.sqrt();
        let product = -(p.alpha * p.a + p.c) / self.denom;
        if base >= 0.0 {
            let plus = (base + s) / self.denom;
            let minus = if plus == 0.0 { 0.0 } else { product / plus };
            (plus, minus)
        } else {
            let minus = (base - s) / self.denom;
            (product / minus, minus)
        }
    }
}

/// Classifies a branch without evaluating the amplitude.
pub fn classify_branch(p: &SchemeParams, branch: Branch) -> Result<SolutionKind, AnsatzError> {
    let quad = Quadratic::new(p);
    if quad.denom == 0.0 {
        return Err(AnsatzError::DegenerateDenominator);
    }
    if quad.disc < 0.0 {
        return Ok(SolutionKind::ComplexCase);
    }
    let (plus, minus) = quad.roots(p);
    let b2 = match branch {
        Branch::Plus => plus,
        Branch::Minus => minus,
    };
    Ok(if b2 < 0.0 {
        SolutionKind::Solitary
    } else {
        SolutionKind::Periodic
    })
}

pub fn solve_ansatz(p: &SchemeParams, branch: Branch) -> Result<AnsatzSolution, AnsatzError> {
    let quad = Quadratic::new(p);
    if quad.denom == 0.0 {
        return Err(AnsatzError::DegenerateDenominator);
    }
    if quad.disc < 0.0 {
        return Err(AnsatzError::ComplexCase(quad.disc));
    }
    let roots = quad.roots(p);
    let b2 = match branch {
        Branch::Plus => roots.0,
        Branch::Minus => roots.1,
    };
    let eta = quad.eta;
    let k = quad.k;

    let vden = 2.0 * p.lambda * b2 * k + p.alpha;
    if vden == 0.0 {
        return Err(AnsatzError::VelocityPole);
    }
    let velocity = -(2.0 * p.nu * b2 * k + p.c) / vden;
    // λv + ν with the B² terms cancelled by hand
    let disp = (p.nu * p.alpha - p.lambda * p.c) / vden;

    let bracket = (p.m as f64 + 1.0) / p.b
        * b2
        * b2
        * eta
        * (eta - 1.0)
        * (eta - 2.0)
        * (eta - 3.0)
        * disp;
    let inv_m = 1.0 / p.m as f64;
    let amplitude = if p.m % 2 == 1 {
        bracket.signum() * bracket.abs().powf(inv_m)
    } else if bracket > 0.0 {
        bracket.powf(inv_m)
    } else {
        return Err(AnsatzError::AmplitudeUndefined { m: p.m, bracket });
    };

    let kind = if b2 < 0.0 {
        SolutionKind::Solitary
    } else {
        SolutionKind::Periodic
    };
    Ok(AnsatzSolution {
        eta,
        b_squared_roots: roots,
        branch,
        kind,
        wavenumber: b2.abs().sqrt(),
        velocity,
        amplitude,
    })
}

/// The unique branch with `B² < 0`.
pub fn solitary_branch(p: &SchemeParams) -> Result<Branch, AnsatzError> {
    let quad = Quadratic::new(p);
    if quad.denom == 0.0 {
        return Err(AnsatzError::DegenerateDenominator);
    }
    if quad.disc < 0.0 {
        return Err(AnsatzError::ComplexCase(quad.disc));
    }
    let (plus, minus) = quad.roots(p);
    match (plus < 0.0, minus < 0.0) {
        (true, false) => Ok(Branch::Plus),
        (false, true) => Ok(Branch::Minus),
        _ => Err(AnsatzError::NoSolitaryBranch { plus, minus }),
    }
}

/// Relative residuals of the three balance equations for the coefficients
/// of `cos^{η(m+1)} = cos^{η-4}`, `cos^{η-2}` and `cos^η`, each divided by
/// the largest term magnitude in its equation.
pub fn residual_oracle(s: &AnsatzSolution, p: &SchemeParams) -> [f64; 3] {
    let (a, b2, v, eta) = (s.amplitude, s.b_squared(), s.velocity, s.eta);
    let m = p.m as f64;
    let b4 = b2 * b2;
    let disp = p.lambda * v + p.nu;
    let rlw = v * p.alpha + p.c;
    let k = eta * eta - 2.0 * eta + 2.0;

    let rel = |terms: &[f64]| {
        let scale = terms.iter().fold(0.0f64, |acc, t| acc.max(t.abs()));
        if scale == 0.0 {
            0.0
        } else {
            terms.iter().sum::<f64>().abs() / scale
        }
    };
    let e2 = [
        p.b * a.powi(p.m as i32 + 1) / (m + 1.0),
        -a * b4 * eta * (eta - 1.0) * (eta - 2.0) * (eta - 3.0) * disp,
    ];
    let e3 = [
        a * b2 * rlw * eta * (eta - 1.0),
        2.0 * a * b4 * eta * (eta - 1.0) * k * disp,
    ];
    let e4 = [
        (p.a - v) * a,
        -a * b2 * rlw * eta * eta,
        -a * b4 * eta.powi(4) * disp,
    ];
    [rel(&e2), rel(&e3), rel(&e4)]
}

/// Residual of the `B²` quadratic `(λc - να) Q x² - 2K(λa + ν) x - (αa + c)`
/// at `x`, relative to its largest term.
pub fn quadratic_residual(p: &SchemeParams, b2: f64) -> f64 {
    let quad = Quadratic::new(p);
    let terms = [
        quad.denom * b2 * b2,
        -2.0 * quad.k * (p.lambda * p.a + p.nu) * b2,
        -(p.alpha * p.a + p.c),
    ];
    let scale = terms.iter().fold(0.0f64, |acc, t| acc.max(t.abs()));
    // every term vanishes for the root B² = 0 when αa + c = 0
    if scale == 0.0 {
        return 0.0;
    }
    terms.iter().sum::<f64>().abs() / scale
}

/// The sampled initial pulse exceeds [`BOUNDARY_TOL`] at a domain end.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundaryViolation {
    pub left: f64,
    pub right: f64,
}

impl fmt::Display for BoundaryViolation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "initial pulse not decayed at the boundary: |u(x_left)| = {:e}, |u(x_right)| = {:e}",
            self.left, self.right
        )
    }
}

/// Samples `u(·, 0)` at the nodes and forces the homogeneous boundary values.
pub fn initial_condition(s: &AnsatzSolution, grid: Grid) -> Result<(MeshFn, Option<BoundaryViolation>), AnsatzError> {
    let left = s.eval_solitary(grid.x_left(), 0.0)?.abs();
    let right = s.eval_solitary(grid.x_right(), 0.0)?.abs();
    let u = MeshFn::sample(grid, |x| s.profile(x));
    let warning = (left > BOUNDARY_TOL || right > BOUNDARY_TOL).then_some(BoundaryViolation { left, right });
    Ok((u, warning))
}
