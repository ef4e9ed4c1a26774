//! Biorthogonal eigenvectors, phase rigidity and mixing coefficients.
//!
//! The matrix is complex symmetric, so the left eigenvector is the transpose of
//! the right one and the pairing between eigenvectors is the unconjugated
//! product `uᵀv`. Right eigenvectors are normalized to `vᵀv = 1`.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::system::{SpectralPair, TwoLevelSystem};

/// A complex 2-vector in the bare basis.
pub type Vec2 = [Complex64; 2];

/// `|Z|` below `EP_TOL · scale` is treated as a coalescence.
pub const EP_TOL: f64 = 1e-8;

const SPECTRUM_TOL: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum EigenError {
    #[error("spectrum inconsistent with system: trace mismatch {trace:e}, determinant mismatch {det:e}")]
    InconsistentSpectrum { trace: f64, det: f64 },
    #[error("zero vector")]
    ZeroVector,
}

/// Unconjugated bilinear product `uᵀv`.
pub fn bilinear(u: &Vec2, v: &Vec2) -> Complex64 {
    u[0] * v[0] + u[1] * v[1]
}

/// Conjugated inner product `u†v`.
pub fn inner(u: &Vec2, v: &Vec2) -> Complex64 {
    u[0].conj() * v[0] + u[1].conj() * v[1]
}

pub fn norm(v: &Vec2) -> f64 {
    (v[0].norm_sqr() + v[1].norm_sqr()).sqrt()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EigenvectorPair {
    pub v1: Vec2,
    pub v2: Vec2,
    pub rigidity1: Complex64,
    pub rigidity2: Complex64,
    /// Set when `|Z| < EP_TOL · scale`; both vectors are then the single
    /// coalesced eigenvector (unit Euclidean norm) and rigidities are zero.
    pub defect: bool,
}

impl EigenvectorPair {
    pub fn vectors(&self) -> [Vec2; 2] {
        [self.v1, self.v2]
    }

    pub fn rigidities(&self) -> [Complex64; 2] {
        [self.rigidity1, self.rigidity2]
    }
}

/// Phase rigidity `r = (vᵀv)/(v†v)`.
///
/// For a vector normalized to `vᵀv = 1` this is `1/(v†v)`, real and in `(0, 1]`.
pub fn phase_rigidity(v: &Vec2) -> Result<Complex64, EigenError> {
    let norm_sqr = inner(v, v).re;
    if norm_sqr == 0.0 {
        return Err(EigenError::ZeroVector);
    }
    Ok(bilinear(v, v) / norm_sqr)
}

/// Right eigenvectors of `sys` for the eigenvalues in `spec`, in the same order.
///
/// `spec` may come straight from [`TwoLevelSystem::eigenvalues`] or be a
/// reordered pair; it is checked against the trace and determinant of `sys`.
pub fn eigenvectors(sys: &TwoLevelSystem, spec: &SpectralPair) -> Result<EigenvectorPair, EigenError> {
    let scale = sys.scale();
    let eps1 = sys.eps1();
    let eps2 = sys.eps2();
    let omega = sys.omega;

    let trace = (spec.ev1 + spec.ev2 - eps1 - eps2).norm();
    let det = (spec.ev1 * spec.ev2 - (eps1 * eps2 - omega * omega)).norm();
    if trace > SPECTRUM_TOL * scale || det > SPECTRUM_TOL * scale * scale {
        return Err(EigenError::InconsistentSpectrum { trace, det });
    }

    let evs = [spec.ev1, spec.ev2];

    if omega == Complex64::new(0.0, 0.0) {
        return Ok(diagonal_basis(eps1, eps2, evs));
    }

    let half_gap = (spec.ev1 - spec.ev2) * 0.5;
    if half_gap.norm() < EP_TOL * scale {
        let v = coalesced_vector(sys);
        return Ok(EigenvectorPair {
            v1: v,
            v2: v,
            rigidity1: Complex64::new(0.0, 0.0),
            rigidity2: Complex64::new(0.0, 0.0),
            defect: true,
        });
    }

    let mean = (eps1 + eps2) * 0.5;
    let delta = (eps2 - eps1) * 0.5;
    let mut out = [[Complex64::new(0.0, 0.0); 2]; 2];
    let mut rig = [Complex64::new(0.0, 0.0); 2];
    for (k, ev) in evs.into_iter().enumerate() {
        // ℰ − ε1 = δ + h and ℰ − ε2 = −δ + h with h = ℰ − mean
        let h = ev - mean;
        let raw = pick_larger([omega, delta + h], [h - delta, omega]);
        let v = normalize_biorthogonal(raw).ok_or(EigenError::ZeroVector)?;
        rig[k] = phase_rigidity(&v)?;
        out[k] = v;
    }

    Ok(EigenvectorPair {
        v1: out[0],
        v2: out[1],
        rigidity1: rig[0],
        rigidity2: rig[1],
        defect: false,
    })
}

fn diagonal_basis(eps1: Complex64, eps2: Complex64, evs: [Complex64; 2]) -> EigenvectorPair {
    let one = Complex64::new(1.0, 0.0);
    let zero = Complex64::new(0.0, 0.0);
    let e1 = [one, zero];
    let e2 = [zero, one];
    // ev1 goes with whichever bare level it sits closer to; ties keep (e1, e2)
    let swap = (evs[0] - eps2).norm() < (evs[0] - eps1).norm();
    let (v1, v2) = if swap { (e2, e1) } else { (e1, e2) };
    EigenvectorPair {
        v1,
        v2,
        rigidity1: one,
        rigidity2: one,
        defect: false,
    }
}

fn coalesced_vector(sys: &TwoLevelSystem) -> Vec2 {
    let delta = (sys.eps2() - sys.eps1()) * 0.5;
    let raw = pick_larger([sys.omega, delta], [-delta, sys.omega]);
    let n = norm(&raw);
    let v = [raw[0] / n, raw[1] / n];
    // rotate so the leading nonzero component is real positive
    let lead = if v[0].norm() > 0.0 { v[0] } else { v[1] };
    let phase = lead.conj() / lead.norm();
    [v[0] * phase, v[1] * phase]
}

fn pick_larger(a: Vec2, b: Vec2) -> Vec2 {
    if norm(&a) >= norm(&b) {
        a
    } else {
        b
    }
}

/// Scales `v` to `vᵀv = 1` and fixes the remaining sign so the leading nonzero
/// component has argument in `(−π/2, π/2]`.
fn normalize_biorthogonal(v: Vec2) -> Option<Vec2> {
    let self_product = bilinear(&v, &v);
    if self_product.norm() == 0.0 {
        return None;
    }
    let root = self_product.sqrt();
    let mut v = [v[0] / root, v[1] / root];
    let lead = if v[0].norm() > 0.0 { v[0] } else { v[1] };
    if lead.re < 0.0 || (lead.re == 0.0 && lead.im < 0.0) {
        v = [-v[0], -v[1]];
    }
    Some(v)
}

/// Coefficients `b_kl` of eigenvector `k` on bare state `l`, with phases `θ_kl`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MixingTable {
    pub b: [[Complex64; 2]; 2],
    pub theta: [[f64; 2]; 2],
    pub defect: bool,
}

impl MixingTable {
    pub fn squared_moduli(&self) -> [[f64; 2]; 2] {
        let b = &self.b;
        [
            [b[0][0].norm_sqr(), b[0][1].norm_sqr()],
            [b[1][0].norm_sqr(), b[1][1].norm_sqr()],
        ]
    }
}

pub fn mixing_coefficients(pair: &EigenvectorPair) -> MixingTable {
    let b = [pair.v1, pair.v2];
    let theta = [
        [b[0][0].im.atan2(b[0][0].re), b[0][1].im.atan2(b[0][1].re)],
        [b[1][0].im.atan2(b[1][0].re), b[1][1].im.atan2(b[1][1].re)],
    ];
    MixingTable {
        b,
        theta,
        defect: pair.defect,
    }
}

/// `|v1†v2| / (‖v1‖·‖v2‖)`: 0 for orthogonal vectors, 1 for linearly dependent ones.
pub fn coalescence_metric(pair: &EigenvectorPair) -> Result<f64, EigenError> {
    let n1 = norm(&pair.v1);
    let n2 = norm(&pair.v2);
    if n1 == 0.0 || n2 == 0.0 {
        return Err(EigenError::ZeroVector);
    }
    Ok((inner(&pair.v1, &pair.v2).norm() / (n1 * n2)).min(1.0))
}
