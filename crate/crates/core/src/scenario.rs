//! Scenario families: bare energies and coupling as affine functions of a
//! sweep parameter `a`, fixed widths, and the grid to sweep over.

use std::f64::consts::FRAC_1_SQRT_2;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::system::{SystemError, TwoLevelSystem};

pub const DEFAULT_GRID_COUNT: usize = 601;

pub const PRESET_NAMES: [&str; 4] = ["fig1_left", "fig1_right", "fig2_left", "fig2_right"];

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ConfigError {
    #[error("unknown preset `{0}` (expected one of fig1_left, fig1_right, fig2_left, fig2_right)")]
    UnknownPreset(String),
    #[error("invalid grid: {0}")]
    InvalidGrid(String),
    #[error("non-finite value in `{0}`")]
    NonFinite(&'static str),
    #[error("channels must be at least 1")]
    NoChannels,
    #[error("system at a = {a}: {source}")]
    System { a: f64, source: SystemError },
}

/// `c0 + c1·a`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Affine {
    pub c0: f64,
    pub c1: f64,
}

impl Affine {
    pub const fn constant(c0: f64) -> Self {
        Self { c0, c1: 0.0 }
    }

    pub const fn new(c0: f64, c1: f64) -> Self {
        Self { c0, c1 }
    }

    pub fn eval(&self, a: f64) -> f64 {
        self.c0 + self.c1 * a
    }

    fn is_finite(&self) -> bool {
        self.c0.is_finite() && self.c1.is_finite()
    }
}

/// Complex `c0 + c1·a`; serialized as `[re, im]` pairs.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ComplexAffine {
    pub c0: Complex64,
    pub c1: Complex64,
}

impl ComplexAffine {
    pub const fn constant(c0: Complex64) -> Self {
        Self {
            c0,
            c1: Complex64::new(0.0, 0.0),
        }
    }

    pub const fn new(c0: Complex64, c1: Complex64) -> Self {
        Self { c0, c1 }
    }

    pub fn eval(&self, a: f64) -> Complex64 {
        self.c0 + self.c1 * a
    }

    /// True when the real part vanishes for every `a`.
    pub fn is_purely_imaginary(&self) -> bool {
        self.c0.re == 0.0 && self.c1.re == 0.0
    }

    fn is_finite(&self) -> bool {
        self.c0.is_finite() && self.c1.is_finite()
    }
}

/// Inclusive grid of `count` evenly spaced points.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Grid {
    pub start: f64,
    pub stop: f64,
    pub count: usize,
}

impl Grid {
    pub const fn new(start: f64, stop: f64, count: usize) -> Self {
        Self { start, stop, count }
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        if !self.start.is_finite() || !self.stop.is_finite() {
            return Err(ConfigError::NonFinite("a_grid"));
        }
        if self.count < 2 {
            return Err(ConfigError::InvalidGrid(format!(
                "count must be at least 2, got {}",
                self.count
            )));
        }
        if self.stop <= self.start {
            return Err(ConfigError::InvalidGrid(format!(
                "stop ({}) must exceed start ({})",
                self.stop, self.start
            )));
        }
        Ok(())
    }

    pub fn step(&self) -> f64 {
        (self.stop - self.start) / (self.count - 1) as f64
    }

    pub fn point(&self, i: usize) -> f64 {
        if i + 1 == self.count {
            return self.stop;
        }
        self.start + (self.stop - self.start) * i as f64 / (self.count - 1) as f64
    }

    pub fn points(&self) -> Vec<f64> {
        (0..self.count).map(|i| self.point(i)).collect()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScenarioConfig {
    pub name: String,
    pub e1_expr: Affine,
    pub e2_expr: Affine,
    /// Full widths γ_i (not halved), signed.
    pub g1: f64,
    pub g2: f64,
    pub omega_expr: ComplexAffine,
    pub a_grid: Grid,
    #[serde(default = "default_channels")]
    pub channels: u32,
}

fn default_channels() -> u32 {
    1
}

impl ScenarioConfig {
    pub fn validate(&self) -> Result<(), ConfigError> {
        if !self.e1_expr.is_finite() {
            return Err(ConfigError::NonFinite("e1_expr"));
        }
        if !self.e2_expr.is_finite() {
            return Err(ConfigError::NonFinite("e2_expr"));
        }
        if !self.g1.is_finite() {
            return Err(ConfigError::NonFinite("g1"));
        }
        if !self.g2.is_finite() {
            return Err(ConfigError::NonFinite("g2"));
        }
        if !self.omega_expr.is_finite() {
            return Err(ConfigError::NonFinite("omega_expr"));
        }
        if self.channels == 0 {
            return Err(ConfigError::NoChannels);
        }
        self.a_grid.validate()?;
        for a in [self.a_grid.start, self.a_grid.stop] {
            self.system_at(a)?;
        }
        Ok(())
    }

    pub fn with_grid_count(mut self, count: usize) -> Self {
        self.a_grid.count = count;
        self
    }

    /// Bare level positions `(e1(a), e2(a))` evaluated directly.
    pub fn bare_energies(&self, a: f64) -> [f64; 2] {
        [self.e1_expr.eval(a), self.e2_expr.eval(a)]
    }

    /// Level difference `e1(a) − e2(a)` from the differenced coefficients.
    pub fn level_difference(&self, a: f64) -> f64 {
        (self.e1_expr.c0 - self.e2_expr.c0) + (self.e1_expr.c1 - self.e2_expr.c1) * a
    }

    /// True when `e1(a) ≡ e2(a)` for every `a`.
    pub fn levels_identical(&self) -> bool {
        self.e1_expr == self.e2_expr
    }

    pub fn system_at(&self, a: f64) -> Result<TwoLevelSystem, ConfigError> {
        self.system_with_omega(a, self.omega_expr.eval(a))
    }

    /// System at `a` with the coupling overridden.
    ///
    /// `e2` is rebuilt as `e1 − (e1 − e2)` from the differenced coefficients so
    /// crossings of the affine model come out as exact equality.
    pub fn system_with_omega(&self, a: f64, omega: Complex64) -> Result<TwoLevelSystem, ConfigError> {
        let e1 = self.e1_expr.eval(a);
        let e2 = e1 - self.level_difference(a);
        TwoLevelSystem::new(e1, e2, self.g1, self.g2, omega)
            .map_err(|source| ConfigError::System { a, source })
    }
}

/// The parameter sets of the two published figures (four panels).
pub fn preset(name: &str) -> Result<ScenarioConfig, ConfigError> {
    let zero = Complex64::new(0.0, 0.0);
    let cfg = match name {
        "fig1_left" => ScenarioConfig {
            name: name.into(),
            e1_expr: Affine::new(1.0, -0.5),
            e2_expr: Affine::new(0.0, 1.0),
            g1: 2.0 * -0.05,
            g2: 2.0 * 0.06,
            omega_expr: ComplexAffine::constant(Complex64::new(0.055, 0.0)),
            a_grid: Grid::new(0.0, 1.5, DEFAULT_GRID_COUNT),
            channels: 1,
        },
        "fig1_right" => {
            let w = 0.0789 * FRAC_1_SQRT_2;
            ScenarioConfig {
                name: name.into(),
                e1_expr: Affine::new(1.0, -0.5),
                e2_expr: Affine::new(0.0, 1.0),
                g1: 2.0 * -0.05,
                g2: 2.0 * 0.06,
                omega_expr: ComplexAffine::constant(Complex64::new(w, w)),
                a_grid: Grid::new(0.0, 1.5, DEFAULT_GRID_COUNT),
                channels: 1,
            }
        }
        "fig2_left" => ScenarioConfig {
            name: name.into(),
            e1_expr: Affine::constant(2.0 / 3.0),
            e2_expr: Affine::constant(2.0 / 3.0),
            g1: 2.0 * -0.05,
            g2: 2.0 * 0.05,
            omega_expr: ComplexAffine::new(zero, Complex64::new(1.0, 0.0)),
            a_grid: Grid::new(0.0, 0.1, DEFAULT_GRID_COUNT),
            channels: 1,
        },
        "fig2_right" => ScenarioConfig {
            name: name.into(),
            e1_expr: Affine::constant(2.0 / 3.0),
            e2_expr: Affine::constant(-2.0 / 3.0),
            g1: 2.0 * -0.05,
            g2: 2.0 * 0.05,
            omega_expr: ComplexAffine::new(zero, Complex64::new(0.0, 1.0)),
            a_grid: Grid::new(0.0, 0.12, DEFAULT_GRID_COUNT),
            channels: 1,
        },
        other => return Err(ConfigError::UnknownPreset(other.to_string())),
    };
    Ok(cfg)
}
