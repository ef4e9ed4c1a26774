//! The symmetric two-level non-Hermitian Hamiltonian and its closed-form spectrum.
//!
//! Bare states carry complex energies `ε_i = e_i + (i/2)·γ_i`; widths are stored
//! full (not halved) and signed, negative for loss and positive for gain. The
//! two states couple through a single complex `ω` on both off-diagonals.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use thiserror::Error;

/// A 2x2 complex matrix, row-major.
pub type Matrix2 = [[Complex64; 2]; 2];

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SystemError {
    #[error("non-finite field `{field}` = {value}")]
    NonFinite { field: &'static str, value: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TwoLevelSystem {
    pub e1: f64,
    pub e2: f64,
    pub g1: f64,
    pub g2: f64,
    pub omega: Complex64,
}

impl TwoLevelSystem {
    pub fn new(e1: f64, e2: f64, g1: f64, g2: f64, omega: Complex64) -> Result<Self, SystemError> {
        let fields = [
            ("e1", e1),
            ("e2", e2),
            ("g1", g1),
            ("g2", g2),
            ("omega.re", omega.re),
            ("omega.im", omega.im),
        ];
        for (field, value) in fields {
            if !value.is_finite() {
                return Err(SystemError::NonFinite { field, value });
            }
        }
        Ok(Self { e1, e2, g1, g2, omega })
    }

    /// Builds a system from half-widths `γ_i/2`, the form the presets are written in.
    pub fn from_half_widths(
        e1: f64,
        e2: f64,
        g1_half: f64,
        g2_half: f64,
        omega: Complex64,
    ) -> Result<Self, SystemError> {
        Self::new(e1, e2, 2.0 * g1_half, 2.0 * g2_half, omega)
    }

    pub fn eps1(&self) -> Complex64 {
        Complex64::new(self.e1, 0.5 * self.g1)
    }

    pub fn eps2(&self) -> Complex64 {
        Complex64::new(self.e2, 0.5 * self.g2)
    }

    /// Tolerance scale `max(|ε1|, |ε2|, |ω|, 1)`.
    pub fn scale(&self) -> f64 {
        self.eps1()
            .norm()
            .max(self.eps2().norm())
            .max(self.omega.norm())
            .max(1.0)
    }

    pub fn matrix(&self) -> Matrix2 {
        [[self.eps1(), self.omega], [self.omega, self.eps2()]]
    }

    /// `4Z² = (ε1 − ε2)² + 4ω²`, a polynomial in every parameter with no branch cut.
    pub fn four_z_squared(&self) -> Complex64 {
        let diff = self.eps1() - self.eps2();
        diff * diff + self.omega * self.omega * 4.0
    }

    pub fn z_squared(&self) -> Complex64 {
        self.four_z_squared() * 0.25
    }

    /// `Z = ½·√((ε1 − ε2)² + 4ω²)` on the principal branch.
    pub fn discriminant(&self) -> Complex64 {
        self.four_z_squared().sqrt() * 0.5
    }

    pub fn eigenvalues(&self) -> SpectralPair {
        let z = self.discriminant();
        if self.omega == Complex64::new(0.0, 0.0) {
            // decoupled: Z = ±(ε1 − ε2)/2, hand back the bare values untouched
            let half = (self.eps1() - self.eps2()) * 0.5;
            let (ev1, ev2) = if (z - half).norm() <= (z + half).norm() {
                (self.eps1(), self.eps2())
            } else {
                (self.eps2(), self.eps1())
            };
            return SpectralPair { ev1, ev2, z };
        }
        let mean = (self.eps1() + self.eps2()) * 0.5;
        SpectralPair {
            ev1: mean + z,
            ev2: mean - z,
            z,
        }
    }

    /// Rounding floor of `|Z²|` in double precision: the magnitude of the
    /// summed terms times a few machine epsilons.
    pub fn z_squared_floor(&self) -> f64 {
        let diff = self.eps1() - self.eps2();
        let terms = diff.norm_sqr() + 4.0 * self.omega.norm_sqr();
        8.0 * f64::EPSILON * terms * 0.25
    }
}

/// The two eigenvalues `ℰ_i = E_i + (i/2)·Γ_i` and the discriminant `Z`.
///
/// `ev1` always carries `+Z` and `ev2` carries `−Z`; physical branch identity
/// along a sweep is assigned by the branch tracker, not here.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SpectralPair {
    pub ev1: Complex64,
    pub ev2: Complex64,
    pub z: Complex64,
}

impl SpectralPair {
    pub fn energies(&self) -> [f64; 2] {
        [self.ev1.re, self.ev2.re]
    }

    /// `Γ_i/2`, the quantity plotted in the width panels.
    pub fn half_widths(&self) -> [f64; 2] {
        [self.ev1.im, self.ev2.im]
    }

    pub fn widths(&self) -> [f64; 2] {
        [2.0 * self.ev1.im, 2.0 * self.ev2.im]
    }

    pub fn as_array(&self) -> [Complex64; 2] {
        [self.ev1, self.ev2]
    }
}
