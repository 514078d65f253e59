//! Flat `key = value` run configuration.
//!
//! ```text
//! # Example 1, energy audit
//! x_left = -40
//! x_right = 240
//! h = 0.1
//! tau = 0.1
//! T = 100
//! a = 1
//! b = 1
//! c = 2
//! alpha = 1
//! lambda = 1
//! nu = 1
//! m = 2
//! ```
//!
//! Optional keys: `initial` (`ansatz`, `zero` or `file:<path>`), `branch`
//! (`plus`, `minus` or `auto`), `snapshot_stride`, `out_dir`,
//! `bootstrap_tol`, `bootstrap_max_iter`.

use std::collections::HashMap;
use std::fmt;
use std::path::{Path, PathBuf};

use thiserror::Error;

use crate::exact::{solitary_branch, AnsatzError, Branch};
use crate::mesh::{Grid, MeshError};
use crate::scheme::{BootstrapOptions, SchemeParams, TimeGrid, DEFAULT_BOOTSTRAP_MAX_ITER, DEFAULT_BOOTSTRAP_TOL};

pub const KEYS: [&str; 20] = [
    "x_left",
    "x_right",
    "M",
    "h",
    "tau",
    "N",
    "T",
    "a",
    "b",
    "c",
    "alpha",
    "lambda",
    "nu",
    "m",
    "initial",
    "branch",
    "snapshot_stride",
    "out_dir",
    "bootstrap_tol",
    "bootstrap_max_iter",
];

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ConfigError {
    #[error("line {line}: expected `key = value`")]
    Syntax { line: usize },
    #[error("line {line}: unknown key `{key}`")]
    UnknownKey { line: usize, key: String },
    #[error("line {line}: key `{key}` given twice")]
    DuplicateKey { line: usize, key: String },
    #[error("missing required key `{0}`")]
    Missing(&'static str),
    #[error("key `{key}`: {reason}")]
    Invalid { key: &'static str, reason: String },
    #[error("keys `{0}` and `{1}` are mutually exclusive")]
    Conflict(&'static str, &'static str),
    #[error("cannot read config {path}: {reason}")]
    Io { path: PathBuf, reason: String },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Resolution {
    Cells(usize),
    Spacing(f64),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Stepping {
    Step(f64),
    Count(usize),
}

#[derive(Debug, Clone, PartialEq)]
pub enum InitialSource {
    Ansatz,
    Zero,
    File(PathBuf),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BranchChoice {
    Auto,
    Fixed(Branch),
}

impl BranchChoice {
    /// Resolves `auto` to the unique solitary root.
    pub fn resolve(self, p: &SchemeParams) -> Result<Branch, AnsatzError> {
        match self {
            BranchChoice::Fixed(b) => Ok(b),
            BranchChoice::Auto => solitary_branch(p),
        }
    }
}

impl fmt::Display for BranchChoice {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            BranchChoice::Auto => f.write_str("auto"),
            BranchChoice::Fixed(b) => b.fmt(f),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub x_left: f64,
    pub x_right: f64,
    pub resolution: Resolution,
    pub stepping: Stepping,
    pub final_time: f64,
    pub params: SchemeParams,
    pub initial: InitialSource,
    pub branch: BranchChoice,
    pub snapshot_stride: usize,
    pub out_dir: PathBuf,
    pub bootstrap_tol: f64,
    pub bootstrap_max_iter: usize,
}

impl RunConfig {
    pub fn from_path(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path).map_err(|e| ConfigError::Io {
            path: path.to_path_buf(),
            reason: e.to_string(),
        })?;
        Self::parse(&text)
    }

    pub fn parse(text: &str) -> Result<Self, ConfigError> {
        let mut raw = Raw::default();
        for (k, line) in text.lines().enumerate() {
            let line_no = k + 1;
            let body = line.split('#').next().unwrap_or("").trim();
            if body.is_empty() {
                continue;
            }
            let (key, value) = body.split_once('=').ok_or(ConfigError::Syntax { line: line_no })?;
            let (key, value) = (key.trim(), value.trim());
            let key = *KEYS.iter().find(|&&known| known == key).ok_or_else(|| ConfigError::UnknownKey {
                line: line_no,
                key: key.to_string(),
            })?;
            if raw.values.insert(key, value.to_string()).is_some() {
                return Err(ConfigError::DuplicateKey {
                    line: line_no,
                    key: key.to_string(),
                });
            }
        }
        raw.build()
    }

    pub fn grid(&self) -> Result<Grid, MeshError> {
        match self.resolution {
            Resolution::Cells(m) => Grid::new(self.x_left, self.x_right, m),
            Resolution::Spacing(h) => Grid::with_spacing(self.x_left, self.x_right, h),
        }
    }

    /// `N = round(T / τ)` for a given step, `τ = T / N` for a given count.
    pub fn time_grid(&self) -> Result<TimeGrid, crate::scheme::SchemeError> {
        match self.stepping {
            Stepping::Step(tau) => TimeGrid::from_final_time(self.final_time, tau),
            Stepping::Count(n) => TimeGrid::new(self.final_time / n as f64, n),
        }
    }

    pub fn bootstrap(&self) -> BootstrapOptions {
        BootstrapOptions {
            tol: self.bootstrap_tol,
            max_iter: self.bootstrap_max_iter,
        }
    }
}

#[derive(Default)]
struct Raw {
    values: HashMap<&'static str, String>,
}

impl Raw {
    fn get(&self, key: &'static str) -> Option<&str> {
        self.values.get(key).map(String::as_str)
    }

    fn float(&self, key: &'static str) -> Result<Option<f64>, ConfigError> {
        self.get(key)
            .map(|v| match v.parse::<f64>() {
                Ok(x) if x.is_finite() => Ok(x),
                _ => Err(invalid(key, format!("`{v}` is not a finite number"))),
            })
            .transpose()
    }

    fn int(&self, key: &'static str) -> Result<Option<usize>, ConfigError> {
        self.get(key)
            .map(|v| v.parse::<usize>().map_err(|_| invalid(key, format!("`{v}` is not a non-negative integer"))))
            .transpose()
    }

    fn required(&self, key: &'static str) -> Result<f64, ConfigError> {
        self.float(key)?.ok_or(ConfigError::Missing(key))
    }

    fn positive(&self, key: &'static str) -> Result<Option<f64>, ConfigError> {
        match self.float(key)? {
            Some(x) if x <= 0.0 => Err(invalid(key, format!("must be positive, got {x}"))),
            other => Ok(other),
        }
    }

    /// Exactly one of two exclusive keys: `Ok` for the first, `Err` for the second.
    fn one_of<T, U>(
        &self,
        first: (&'static str, Option<T>),
        second: (&'static str, Option<U>),
    ) -> Result<Result<T, U>, ConfigError> {
        match (first.1, second.1) {
            (Some(a), None) => Ok(Ok(a)),
            (None, Some(b)) => Ok(Err(b)),
            (Some(_), Some(_)) => Err(ConfigError::Conflict(first.0, second.0)),
            (None, None) => Err(ConfigError::Missing(first.0)),
        }
    }

    fn build(self) -> Result<RunConfig, ConfigError> {
        let x_left = self.required("x_left")?;
        let x_right = self.required("x_right")?;
        if x_left >= x_right {
            return Err(invalid("x_right", format!("must exceed x_left = {x_left}")));
        }

        let cells = match self.int("M")? {
            Some(m) if m < crate::mesh::MIN_CELLS => {
                return Err(invalid("M", format!("needs at least {} cells", crate::mesh::MIN_CELLS)))
            }
            other => other,
        };
        let resolution = match self.one_of(("M", cells), ("h", self.positive("h")?))? {
            Ok(m) => Resolution::Cells(m),
            Err(h) => Resolution::Spacing(h),
        };

        let count = match self.int("N")? {
            Some(0) => return Err(invalid("N", "must be at least 1".into())),
            other => other,
        };
        let stepping = match self.one_of(("tau", self.positive("tau")?), ("N", count))? {
            Ok(tau) => Stepping::Step(tau),
            Err(n) => Stepping::Count(n),
        };
        let final_time = self.positive("T")?.ok_or(ConfigError::Missing("T"))?;

        let alpha = self.positive("alpha")?.ok_or(ConfigError::Missing("alpha"))?;
        let lambda = self.positive("lambda")?.ok_or(ConfigError::Missing("lambda"))?;
        let m = match self.int("m")?.ok_or(ConfigError::Missing("m"))? {
            0 => return Err(invalid("m", "must be a positive integer".into())),
            m => u32::try_from(m).map_err(|_| invalid("m", "too large".into()))?,
        };
        let params = SchemeParams {
            a: self.required("a")?,
            b: self.required("b")?,
            c: self.required("c")?,
            alpha,
            lambda,
            nu: self.required("nu")?,
            m,
        };

        let initial = match self.get("initial") {
            None | Some("ansatz") => InitialSource::Ansatz,
            Some("zero") => InitialSource::Zero,
            Some(v) => match v.strip_prefix("file:") {
                Some(path) if !path.trim().is_empty() => InitialSource::File(PathBuf::from(path.trim())),
                _ => return Err(invalid("initial", format!("`{v}` is not ansatz, zero or file:<path>"))),
            },
        };
        let branch = match self.get("branch") {
            None | Some("auto") => BranchChoice::Auto,
            Some(v) => BranchChoice::Fixed(
                v.parse()
                    .map_err(|_| invalid("branch", format!("`{v}` is not plus, minus or auto")))?,
            ),
        };

        let bootstrap_max_iter = match self.int("bootstrap_max_iter")? {
            Some(0) => return Err(invalid("bootstrap_max_iter", "must be at least 1".into())),
            other => other.unwrap_or(DEFAULT_BOOTSTRAP_MAX_ITER),
        };

        Ok(RunConfig {
            x_left,
            x_right,
            resolution,
            stepping,
            final_time,
            params,
            initial,
            branch,
            snapshot_stride: self.int("snapshot_stride")?.unwrap_or(0),
            out_dir: self.get("out_dir").map_or_else(|| PathBuf::from("."), PathBuf::from),
            bootstrap_tol: self.positive("bootstrap_tol")?.unwrap_or(DEFAULT_BOOTSTRAP_TOL),
            bootstrap_max_iter,
        })
    }
}

fn invalid(key: &'static str, reason: String) -> ConfigError {
    ConfigError::Invalid { key, reason }
}
