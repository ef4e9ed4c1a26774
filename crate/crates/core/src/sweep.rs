//! Parameter sweeps with continuous branch tracking.
//!
//! Grid points are evaluated independently (optionally in parallel), then a
//! sequential pass pairs each step's eigenvalues with the previous step's so
//! that columns follow physical branches rather than the `±Z` ordering.

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::eigen::{self, EigenError, EigenvectorPair, EP_TOL};
use crate::scenario::{ConfigError, ScenarioConfig};
use crate::system::SpectralPair;

/// Points with `|Z| < FREEZE_FACTOR · EP_TOL · scale` keep the previous pairing.
pub const FREEZE_FACTOR: f64 = 100.0;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SweepError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error("grid index {index} (a = {a}): {source}")]
    Numeric {
        index: usize,
        a: f64,
        source: EigenError,
    },
    #[error("thread pool: {0}")]
    ThreadPool(String),
}

/// Pairing decision at one grid step, relative to the raw `(+Z, −Z)` order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Pairing {
    pub swapped: bool,
    /// The step sat inside an EP neighbourhood and kept the previous pairing.
    pub frozen: bool,
}

/// Greedy minimal-distance pairing of consecutive eigenvalue pairs.
///
/// `ambiguous[i]` marks steps where the pairing is not decided but frozen to
/// the previous assignment. Step 0 is the identity.
pub fn track_branches(pairs: &[[Complex64; 2]], ambiguous: &[bool]) -> Vec<Pairing> {
    track_branches_from(pairs, ambiguous, None)
}

/// As [`track_branches`], with step 0 paired against `reference` when given.
pub fn track_branches_from(
    pairs: &[[Complex64; 2]],
    ambiguous: &[bool],
    reference: Option<[Complex64; 2]>,
) -> Vec<Pairing> {
    let mut out = Vec::with_capacity(pairs.len());
    let mut prev = reference;
    let mut swapped = false;
    for (i, raw) in pairs.iter().enumerate() {
        let frozen = ambiguous.get(i).copied().unwrap_or(false);
        if let Some(p) = prev {
            if !frozen {
                let keep = (p[0] - raw[0]).norm() + (p[1] - raw[1]).norm();
                let swap = (p[0] - raw[1]).norm() + (p[1] - raw[0]).norm();
                swapped = swap < keep;
            }
        }
        let tracked = if swapped { [raw[1], raw[0]] } else { *raw };
        prev = Some(tracked);
        out.push(Pairing { swapped, frozen });
    }
    out
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub a: f64,
    pub energies: [f64; 2],
    /// `Γ_i/2`.
    pub half_widths: [f64; 2],
    /// `|b_kl|²`, row k = tracked branch, column l = bare state.
    pub mixing_sq: [[f64; 2]; 2],
    pub rigidity_abs: [f64; 2],
    pub z_abs: f64,
    pub defect: bool,
    pub pairing: Pairing,
    pub bare: [f64; 2],
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepResult {
    pub config: ScenarioConfig,
    pub rows: Vec<SweepRow>,
}

impl SweepResult {
    pub fn column(&self, f: impl Fn(&SweepRow) -> f64) -> Vec<f64> {
        self.rows.iter().map(f).collect()
    }

    /// Index of the grid point closest to `a`.
    pub fn nearest(&self, a: f64) -> usize {
        self.rows
            .iter()
            .enumerate()
            .min_by(|x, y| (x.1.a - a).abs().total_cmp(&(y.1.a - a).abs()))
            .map(|(i, _)| i)
            .unwrap_or(0)
    }
}

struct RawPoint {
    a: f64,
    bare_eps: [Complex64; 2],
    spec: SpectralPair,
    vectors: EigenvectorPair,
    scale: f64,
    bare: [f64; 2],
}

fn evaluate(cfg: &ScenarioConfig, index: usize, a: f64) -> Result<RawPoint, SweepError> {
    let sys = cfg.system_at(a)?;
    let spec = sys.eigenvalues();
    let vectors = eigen::eigenvectors(&sys, &spec).map_err(|source| SweepError::Numeric { index, a, source })?;
    Ok(RawPoint {
        a,
        bare_eps: [sys.eps1(), sys.eps2()],
        spec,
        vectors,
        scale: sys.scale(),
        bare: cfg.bare_energies(a),
    })
}

/// Sweeps `cfg` on the rayon global pool.
pub fn run_sweep(cfg: &ScenarioConfig) -> Result<SweepResult, SweepError> {
    cfg.validate()?;
    let points = cfg.a_grid.points();
    let raw = points
        .par_iter()
        .enumerate()
        .map(|(i, &a)| evaluate(cfg, i, a))
        .collect::<Result<Vec<_>, _>>()?;
    Ok(assemble(cfg, raw))
}

/// Sweeps `cfg` on a dedicated pool of `threads` workers (0 = rayon default).
///
/// Output does not depend on the thread count.
pub fn run_sweep_with_threads(cfg: &ScenarioConfig, threads: usize) -> Result<SweepResult, SweepError> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .map_err(|e| SweepError::ThreadPool(e.to_string()))?;
    pool.install(|| run_sweep(cfg))
}

fn assemble(cfg: &ScenarioConfig, raw: Vec<RawPoint>) -> SweepResult {
    let pairs: Vec<[Complex64; 2]> = raw.iter().map(|p| p.spec.as_array()).collect();
    let ambiguous: Vec<bool> = raw
        .iter()
        .map(|p| p.spec.z.norm() < FREEZE_FACTOR * EP_TOL * p.scale)
        .collect();
    // branch k starts on the bare level k
    let pairings = track_branches_from(&pairs, &ambiguous, raw.first().map(|p| p.bare_eps));

    let rows = raw
        .into_iter()
        .zip(pairings)
        .map(|(p, pairing)| {
            let order = if pairing.swapped { [1, 0] } else { [0, 1] };
            let evs = p.spec.as_array();
            let mix = eigen::mixing_coefficients(&p.vectors).squared_moduli();
            let rig = p.vectors.rigidities();
            SweepRow {
                a: p.a,
                energies: order.map(|k| evs[k].re),
                half_widths: order.map(|k| evs[k].im),
                mixing_sq: order.map(|k| mix[k]),
                rigidity_abs: order.map(|k| rig[k].norm()),
                z_abs: p.spec.z.norm(),
                defect: p.vectors.defect,
                pairing,
                bare: p.bare,
            }
        })
        .collect();

    SweepResult {
        config: cfg.clone(),
        rows,
    }
}
