//! One- and two-resonance S-matrix in the product (explicitly unitary) form,
//! the double-pole form at coalescence, and cross-section line shapes.
//!
//! Widths enter with their literal sign; no background term is included.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SMatrixError {
    #[error("pole on the real axis at E = {energy} (zero width)")]
    PoleOnRealAxis { energy: f64 },
    #[error("resonance set must hold 1 or 2 entries, got {0}")]
    BadResonanceCount(usize),
    #[error("non-finite resonance parameter")]
    NonFinite,
    #[error("energy grid is not strictly increasing at index {0}")]
    UnsortedGrid(usize),
    #[error("non-finite energy at index {0}")]
    NonFiniteEnergy(usize),
    #[error("line shape needs at least 3 points, got {0}")]
    TooFewPoints(usize),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Resonance {
    pub energy: f64,
    /// Full width `Γ`, signed.
    pub width: f64,
}

impl Resonance {
    pub const fn new(energy: f64, width: f64) -> Self {
        Self { energy, width }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResonanceSet(Vec<Resonance>);

impl ResonanceSet {
    pub fn new(entries: Vec<Resonance>) -> Result<Self, SMatrixError> {
        if entries.is_empty() || entries.len() > 2 {
            return Err(SMatrixError::BadResonanceCount(entries.len()));
        }
        if entries.iter().any(|r| !r.energy.is_finite() || !r.width.is_finite()) {
            return Err(SMatrixError::NonFinite);
        }
        Ok(Self(entries))
    }

    pub fn entries(&self) -> &[Resonance] {
        &self.0
    }

    /// The shared `(E_d, Γ_d)` when both entries coincide.
    pub fn degenerate(&self) -> Option<Resonance> {
        match self.0.as_slice() {
            [a, b] if a == b => Some(*a),
            _ => None,
        }
    }

    pub fn s(&self, energy: f64) -> Result<Complex64, SMatrixError> {
        match self.0.as_slice() {
            [one] => s_one(*one, energy),
            [a, b] => s_two(*a, *b, energy),
            _ => unreachable!("validated on construction"),
        }
    }
}

/// `(E − E_k + iΓ_k/2)/(E − E_k − iΓ_k/2)`.
pub fn s_one(res: Resonance, energy: f64) -> Result<Complex64, SMatrixError> {
    let x = energy - res.energy;
    let half = 0.5 * res.width;
    if half == 0.0 && x == 0.0 {
        return Err(SMatrixError::PoleOnRealAxis { energy });
    }
    Ok(Complex64::new(x, half) / Complex64::new(x, -half))
}

/// Product of two one-resonance factors.
pub fn s_two(first: Resonance, second: Resonance, energy: f64) -> Result<Complex64, SMatrixError> {
    Ok(s_one(first, energy)? * s_one(second, energy)?)
}

/// `1 + 2iΓ_d/(E − E_d − iΓ_d/2) − Γ_d²/(E − E_d − iΓ_d/2)²`.
pub fn s_double_pole(e_d: f64, g_d: f64, energy: f64) -> Result<Complex64, SMatrixError> {
    let u = Complex64::new(energy - e_d, -0.5 * g_d);
    if u.norm() == 0.0 {
        return Err(SMatrixError::PoleOnRealAxis { energy });
    }
    let one = Complex64::new(1.0, 0.0);
    Ok(one + Complex64::new(0.0, 2.0 * g_d) / u - (g_d * g_d) / (u * u))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CrossSectionPoint {
    pub energy: f64,
    pub sigma: f64,
    pub s: Complex64,
}

/// `σ(E) = |1 − S(E)|²` over a strictly increasing grid.
pub fn cross_section<F>(s: F, grid: &[f64]) -> Result<Vec<CrossSectionPoint>, SMatrixError>
where
    F: Fn(f64) -> Result<Complex64, SMatrixError>,
{
    for (i, e) in grid.iter().enumerate() {
        if !e.is_finite() {
            return Err(SMatrixError::NonFiniteEnergy(i));
        }
        if i > 0 && *e <= grid[i - 1] {
            return Err(SMatrixError::UnsortedGrid(i));
        }
    }
    grid.iter()
        .map(|&energy| {
            let s = s(energy)?;
            Ok(CrossSectionPoint {
                energy,
                sigma: (Complex64::new(1.0, 0.0) - s).norm_sqr(),
                s,
            })
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Peak {
    pub energy: f64,
    pub height: f64,
    /// Distance from the peak to the half-height crossing on each side;
    /// `None` when σ never drops below half height before the table ends.
    pub left_half_width: Option<f64>,
    pub right_half_width: Option<f64>,
    /// `(right − left)/(right + left)` of the half-widths.
    pub asymmetry: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Minimum {
    pub energy: f64,
    pub value: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LineShapeFeatures {
    pub peaks: Vec<Peak>,
    pub minima: Vec<Minimum>,
}

/// Interior local extrema and half-height asymmetry of each peak.
pub fn line_shape_features(table: &[CrossSectionPoint]) -> Result<LineShapeFeatures, SMatrixError> {
    if table.len() < 3 {
        return Err(SMatrixError::TooFewPoints(table.len()));
    }
    let sigma: Vec<f64> = table.iter().map(|p| p.sigma).collect();
    let mut peaks = Vec::new();
    let mut minima = Vec::new();
    for i in 1..table.len() - 1 {
        let (l, c, r) = (sigma[i - 1], sigma[i], sigma[i + 1]);
        if c > l && c >= r {
            let half = 0.5 * c;
            let left = half_crossing(table, i, half, -1).map(|e| table[i].energy - e);
            let right = half_crossing(table, i, half, 1).map(|e| e - table[i].energy);
            let asymmetry = match (left, right) {
                (Some(l), Some(r)) if l + r > 0.0 => Some((r - l) / (r + l)),
                _ => None,
            };
            peaks.push(Peak {
                energy: table[i].energy,
                height: c,
                left_half_width: left,
                right_half_width: right,
                asymmetry,
            });
        } else if c < l && c <= r {
            minima.push(Minimum {
                energy: table[i].energy,
                value: c,
            });
        }
    }
    Ok(LineShapeFeatures { peaks, minima })
}

/// Walks from `peak` in direction `dir` to the first point below `half` and
/// interpolates the crossing energy linearly.
fn half_crossing(table: &[CrossSectionPoint], peak: usize, half: f64, dir: isize) -> Option<f64> {
    let mut i = peak as isize;
    loop {
        let j = i + dir;
        if j < 0 || j as usize >= table.len() {
            return None;
        }
        let (p, q) = (&table[i as usize], &table[j as usize]);
        if q.sigma < half {
            let t = (p.sigma - half) / (p.sigma - q.sigma);
            return Some(p.energy + t * (q.energy - p.energy));
        }
        i = j;
    }
}
