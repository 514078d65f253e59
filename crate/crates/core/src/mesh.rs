//! Uniform grids, mesh functions and the composite difference operators.
//!
//! A [`MeshFn`] stores one value per node `i = -1 ..= M + 1`, fictitious
//! points included. Functions in the homogeneous space (written `Z0` below)
//! vanish at `i ∈ {-1, 0, 1, M-1, M, M+1}`; see [`MeshFn::project_z0`].
//!
//! Difference operators return the raw stencil values wherever the stencil
//! fits inside `-1 ..= M + 1`. Their results are generally *not* in `Z0`
//! (for instance `(U_x)_1 = U_2 / h`), and the norms below rely on those
//! values being kept.

use std::ops::{Add, Mul, Sub};

use thiserror::Error;

/// Smallest admissible cell count; the fifth-order stencil needs room.
pub const MIN_CELLS: usize = 8;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum MeshError {
    #[error("invalid domain: x_left = {x_left} must be below x_right = {x_right}")]
    InvalidDomain { x_left: f64, x_right: f64 },
    #[error("grid too coarse: M = {cells}, at least {MIN_CELLS} cells are required")]
    TooCoarse { cells: usize },
    #[error("spacing h = {h} does not divide the domain length {length} into whole cells")]
    SpacingMismatch { h: f64, length: f64 },
    #[error("mesh functions live on different grids")]
    GridMismatch,
    #[error("expected {expected} node values, got {got}")]
    LengthMismatch { expected: usize, got: usize },
}

/// Uniform 1-D grid `x_i = x_left + i h`, `i = -1 ..= M + 1`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Grid {
    x_left: f64,
    x_right: f64,
    cells: usize,
    h: f64,
}

impl Grid {
    pub fn new(x_left: f64, x_right: f64, cells: usize) -> Result<Self, MeshError> {
        if !(x_left < x_right) || !x_left.is_finite() || !x_right.is_finite() {
            return Err(MeshError::InvalidDomain { x_left, x_right });
        }
        if cells < MIN_CELLS {
            return Err(MeshError::TooCoarse { cells });
        }
        Ok(Self {
            x_left,
            x_right,
            cells,
            h: (x_right - x_left) / cells as f64,
        })
    }

    /// Builds a grid from a target spacing. The domain length must be an
    /// integer multiple of `h` up to a relative 1e-9.
    pub fn with_spacing(x_left: f64, x_right: f64, h: f64) -> Result<Self, MeshError> {
        if !(x_left < x_right) || !x_left.is_finite() || !x_right.is_finite() {
            return Err(MeshError::InvalidDomain { x_left, x_right });
        }
        let length = x_right - x_left;
        if !(h > 0.0) || !h.is_finite() {
            return Err(MeshError::SpacingMismatch { h, length });
        }
        let ratio = length / h;
        let cells = ratio.round();
        if (ratio - cells).abs() > 1e-9 * ratio.max(1.0) {
            return Err(MeshError::SpacingMismatch { h, length });
        }
        Self::new(x_left, x_right, cells as usize)
    }

    pub fn x_left(&self) -> f64 {
        self.x_left
    }

    pub fn x_right(&self) -> f64 {
        self.x_right
    }

    /// Cell count `M`.
    pub fn cells(&self) -> usize {
        self.cells
    }

    pub fn h(&self) -> f64 {
        self.h
    }

    /// Node count including both fictitious points, `M + 3`.
    pub fn node_count(&self) -> usize {
        self.cells + 3
    }

    /// Last node index, `M + 1`.
    pub fn last(&self) -> isize {
        self.cells as isize + 1
    }

    /// Node position. Computed affinely, never by accumulation.
    pub fn x(&self, i: isize) -> f64 {
        self.x_left + i as f64 * self.h
    }

    pub fn nodes(&self) -> impl Iterator<Item = (isize, f64)> + '_ {
        (-1..=self.last()).map(move |i| (i, self.x(i)))
    }

    /// Indices forced to zero in `Z0`.
    pub fn z0_indices(&self) -> [isize; 6] {
        let m = self.cells as isize;
        [-1, 0, 1, m - 1, m, m + 1]
    }
}

/// A function on the nodes of a [`Grid`], fictitious points included.
#[derive(Debug, Clone, PartialEq)]
pub struct MeshFn {
    grid: Grid,
    values: Vec<f64>,
}

impl MeshFn {
    pub fn zeros(grid: Grid) -> Self {
        Self {
            grid,
            values: vec![0.0; grid.node_count()],
        }
    }

    /// Samples `f` at every node and projects the result onto `Z0`.
    pub fn sample(grid: Grid, mut f: impl FnMut(f64) -> f64) -> Self {
        let mut u = Self {
            grid,
            values: grid.nodes().map(|(_, x)| f(x)).collect(),
        };
        u.project_z0();
        u
    }

    /// Wraps raw node values ordered `i = -1 ..= M + 1`.
    pub fn from_values(grid: Grid, values: Vec<f64>) -> Result<Self, MeshError> {
        if values.len() != grid.node_count() {
            return Err(MeshError::LengthMismatch {
                expected: grid.node_count(),
                got: values.len(),
            });
        }
        Ok(Self { grid, values })
    }

    /// Builds a `Z0` function from its free values at `i = 2 ..= M - 2`.
    pub fn from_unknowns(grid: Grid, unknowns: &[f64]) -> Result<Self, MeshError> {
        let expected = grid.cells() - 3;
        if unknowns.len() != expected {
            return Err(MeshError::LengthMismatch {
                expected,
                got: unknowns.len(),
            });
        }
        let mut u = Self::zeros(grid);
        u.values[3..3 + expected].copy_from_slice(unknowns);
        Ok(u)
    }

    /// Unit impulse at node `j`.
    pub fn impulse(grid: Grid, j: isize) -> Self {
        let mut u = Self::zeros(grid);
        u.set(j, 1.0);
        u
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    /// All node values, `i = -1 ..= M + 1`.
    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// The free values at `i = 2 ..= M - 2`.
    pub fn unknowns(&self) -> &[f64] {
        &self.values[3..self.grid.cells()]
    }

    #[inline]
    pub fn get(&self, i: isize) -> f64 {
        self.values[(i + 1) as usize]
    }

    #[inline]
    pub fn set(&mut self, i: isize, v: f64) {
        self.values[(i + 1) as usize] = v;
    }

    pub fn project_z0(&mut self) {
        for i in self.grid.z0_indices() {
            self.set(i, 0.0);
        }
    }

    pub fn in_z0(&self) -> bool {
        self.grid.z0_indices().iter().all(|&i| self.get(i) == 0.0)
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> Self {
        Self {
            grid: self.grid,
            values: self.values.iter().map(|&v| f(v)).collect(),
        }
    }

    /// Pointwise product.
    pub fn pointwise(&self, other: &MeshFn) -> Result<Self, MeshError> {
        self.check_grid(other)?;
        Ok(Self {
            grid: self.grid,
            values: self
                .values
                .iter()
                .zip(&other.values)
                .map(|(a, b)| a * b)
                .collect(),
        })
    }

    /// Mirror image `x -> x_left + x_right - x`, i.e. `i -> M - i`.
    pub fn reflect(&self) -> Self {
        let mut values = self.values.clone();
        values.reverse();
        Self {
            grid: self.grid,
            values,
        }
    }

    pub(crate) fn check_grid(&self, other: &MeshFn) -> Result<(), MeshError> {
        if self.grid == other.grid {
            Ok(())
        } else {
            Err(MeshError::GridMismatch)
        }
    }
}

impl Add for &MeshFn {
    type Output = MeshFn;

    fn add(self, rhs: &MeshFn) -> MeshFn {
        assert_eq!(self.grid, rhs.grid, "grid mismatch");
        MeshFn {
            grid: self.grid,
            values: self.values.iter().zip(&rhs.values).map(|(a, b)| a + b).collect(),
        }
    }
}

impl Sub for &MeshFn {
    type Output = MeshFn;

    fn sub(self, rhs: &MeshFn) -> MeshFn {
        assert_eq!(self.grid, rhs.grid, "grid mismatch");
        MeshFn {
            grid: self.grid,
            values: self.values.iter().zip(&rhs.values).map(|(a, b)| a - b).collect(),
        }
    }
}

impl Mul<&MeshFn> for f64 {
    type Output = MeshFn;

    fn mul(self, rhs: &MeshFn) -> MeshFn {
        rhs.map(|v| self * v)
    }
}

/// The difference operators used by the scheme.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum DiffOp {
    /// `U_x`
    Forward,
    /// `U_x̄`
    Backward,
    /// `U_x̂`
    Central,
    /// `U_{x x̄}`
    Second,
    /// `U_{x x̄ x̂}`
    Third,
    /// `U_{xx x̄ x̄}`
    Fourth,
    /// `U_{xx x̄ x̄ x̂}`
    Fifth,
}

/// Integer stencil: `sum_k coeffs[k] U_{i + first + k} / (scale h^power)`.
#[derive(Debug, Clone, Copy)]
pub struct Stencil {
    pub first: isize,
    pub coeffs: &'static [f64],
    pub scale: f64,
    pub power: i32,
}

impl Stencil {
    pub fn last(&self) -> isize {
        self.first + self.coeffs.len() as isize - 1
    }

    /// `(offset, weight)` pairs for spacing `h`.
    pub fn weights(&self, h: f64) -> impl Iterator<Item = (isize, f64)> + '_ {
        let inv = 1.0 / (self.scale * h.powi(self.power));
        self.coeffs
            .iter()
            .enumerate()
            .map(move |(k, &c)| (self.first + k as isize, c * inv))
    }
}

impl DiffOp {
    pub const ALL: [DiffOp; 7] = [
        DiffOp::Forward,
        DiffOp::Backward,
        DiffOp::Central,
        DiffOp::Second,
        DiffOp::Third,
        DiffOp::Fourth,
        DiffOp::Fifth,
    ];

    pub fn stencil(self) -> Stencil {
        match self {
            DiffOp::Forward => Stencil {
                first: 0,
                coeffs: &[-1.0, 1.0],
                scale: 1.0,
                power: 1,
            },
            DiffOp::Backward => Stencil {
                first: -1,
                coeffs: &[-1.0, 1.0],
                scale: 1.0,
                power: 1,
            },
            DiffOp::Central => Stencil {
                first: -1,
                coeffs: &[-1.0, 0.0, 1.0],
                scale: 2.0,
                power: 1,
            },
            DiffOp::Second => Stencil {
                first: -1,
                coeffs: &[1.0, -2.0, 1.0],
                scale: 1.0,
                power: 2,
            },
            DiffOp::Third => Stencil {
                first: -2,
                coeffs: &[-1.0, 2.0, 0.0, -2.0, 1.0],
                scale: 2.0,
                power: 3,
            },
            DiffOp::Fourth => Stencil {
                first: -2,
                coeffs: &[1.0, -4.0, 6.0, -4.0, 1.0],
                scale: 1.0,
                power: 4,
            },
            DiffOp::Fifth => Stencil {
                first: -3,
                coeffs: &[-1.0, 4.0, -5.0, 0.0, 5.0, -4.0, 1.0],
                scale: 2.0,
                power: 5,
            },
        }
    }

    /// Order of the derivative approximated.
    pub fn derivative_order(self) -> u32 {
        match self {
            DiffOp::Forward | DiffOp::Backward | DiffOp::Central => 1,
            DiffOp::Second => 2,
            DiffOp::Third => 3,
            DiffOp::Fourth => 4,
            DiffOp::Fifth => 5,
        }
    }
}

/// Applies a stencil at every node where it fits; zero elsewhere.
pub fn apply_stencil(stencil: Stencil, u: &MeshFn) -> MeshFn {
    let grid = *u.grid();
    let mut out = MeshFn::zeros(grid);
    let lo = -1 - stencil.first;
    let hi = grid.last() - stencil.last();
    let weights: Vec<(isize, f64)> = stencil.weights(grid.h()).collect();
    for i in lo..=hi {
        let v = weights.iter().map(|&(k, w)| w * u.get(i + k)).sum();
        out.set(i, v);
    }
    out
}

pub fn apply_diff(op: DiffOp, u: &MeshFn) -> MeshFn {
    apply_stencil(op.stencil(), u)
}

/// `(U, V) = h sum_{i=1}^{M-1} U_i V_i`.
pub fn inner_product(u: &MeshFn, v: &MeshFn) -> Result<f64, MeshError> {
    u.check_grid(v)?;
    let m = u.grid.cells() as isize;
    let sum: f64 = (1..m).map(|i| u.get(i) * v.get(i)).sum();
    Ok(u.grid.h() * sum)
}

pub fn norm_l2(u: &MeshFn) -> f64 {
    norm_l2_shifted(u, 0)
}

/// L2 norm over the shifted index set `i = 1 + shift ..= M - 1 + shift`.
///
/// `norm_l2_shifted(U_xx, -1) == norm_l2(U_{x x̄})` for `U` in `Z0`.
pub fn norm_l2_shifted(u: &MeshFn, shift: isize) -> f64 {
    let m = u.grid.cells() as isize;
    let lo = (1 + shift).max(-1);
    let hi = (m - 1 + shift).min(u.grid.last());
    let sum: f64 = (lo..=hi).map(|i| u.get(i) * u.get(i)).sum();
    (u.grid.h() * sum).sqrt()
}

/// `max_{1 <= i <= M-1} |U_i|`.
pub fn norm_max(u: &MeshFn) -> f64 {
    let m = u.grid.cells() as isize;
    (1..m).map(|i| u.get(i).abs()).fold(0.0, f64::max)
}
