//! Exceptional-point location.
//!
//! Closed-form routes cover the imaginary-coupling loss family (`γ1 = γ2`,
//! `ω = iω_i`) and the gain/loss family with real coupling (`e1 = e2`). The
//! general case solves `Re Z² = Im Z² = 0` in two real unknowns with a damped
//! Newton iteration. Working on `Z²` keeps the target polynomial in the
//! unknowns; `Z` itself has a square-root branch point at every EP.

use std::collections::BTreeMap;
use std::fmt;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::scenario::{ConfigError, ScenarioConfig};
use crate::system::TwoLevelSystem;

/// Relative target for `|Z|` at a located EP.
pub const RESIDUAL_TOL: f64 = 1e-10;

const CLASSIFY_TOL: f64 = 1e-12;
const MAX_ITERATIONS: usize = 200;
const MAX_HALVINGS: usize = 30;
const SEED_GRID: usize = 101;
const POLISH_ULPS: i32 = 8;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum EpError {
    #[error("no EP in [{lo}, {hi}]")]
    NoRootInInterval { lo: f64, hi: f64 },
    #[error("equal widths: no EP from real coupling with e1 = e2")]
    DegenerateWidths,
    #[error("no convergence after {iterations} iterations (|Z²| = {z_squared:e}): {reason}")]
    NoConvergence {
        iterations: usize,
        z_squared: f64,
        reason: String,
    },
    #[error("iterate left the search box at {point:?}")]
    LeftBox { point: [f64; 2] },
    #[error("family mismatch: {0}")]
    FamilyMismatch(String),
    #[error("invalid problem: {0}")]
    InvalidProblem(String),
    #[error(transparent)]
    Config(#[from] ConfigError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EpKind {
    AnalyticImagCoupling,
    AnalyticGainlossRealCoupling,
    NewtonGeneral,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum BranchContext {
    #[serde(rename = "Z_real_side")]
    ZRealSide,
    #[serde(rename = "Z_imag_side")]
    ZImagSide,
    #[serde(rename = "none")]
    None,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Branch {
    #[serde(rename = "Z_real")]
    ZReal,
    #[serde(rename = "Z_imag")]
    ZImag,
    #[serde(rename = "Z_complex")]
    ZComplex,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EpSolution {
    pub params: BTreeMap<String, f64>,
    /// `|Z|` at the solution, energy units.
    pub residual: f64,
    pub kind: EpKind,
    pub branch_context: BranchContext,
}

impl EpSolution {
    pub fn param(&self, name: &str) -> Option<f64> {
        self.params.get(name).copied()
    }
}

/// Largest `|Z|` accepted as an EP for `sys`.
///
/// `RESIDUAL_TOL · scale`, raised to the double-precision floor `√|Z²|_floor`
/// when the parameters cannot represent the crossing any closer.
pub fn residual_tolerance(sys: &TwoLevelSystem) -> f64 {
    (RESIDUAL_TOL * sys.scale()).max(sys.z_squared_floor().sqrt())
}

pub fn classify_branch(sys: &TwoLevelSystem) -> Branch {
    let z = sys.discriminant();
    let tol = CLASSIFY_TOL * sys.scale();
    if z.im.abs() <= tol {
        Branch::ZReal
    } else if z.re.abs() <= tol {
        Branch::ZImag
    } else {
        Branch::ZComplex
    }
}

fn context_of(branch: Branch) -> BranchContext {
    match branch {
        Branch::ZReal => BranchContext::ZRealSide,
        Branch::ZImag => BranchContext::ZImagSide,
        Branch::ZComplex => BranchContext::None,
    }
}

fn context_offset(x: f64) -> f64 {
    1e-6 * x.abs().max(1.0)
}

/// EPs of the loss family `γ1 = γ2 = gamma`, `ω = i·omega_i`.
///
/// Roots of `e1(a) − e2(a) = ±2ω_i` are bracketed on `samples` subintervals of
/// `interval` and bisected to adjacent floats.
pub fn eps_imaginary_coupling<F1, F2>(
    e1: F1,
    e2: F2,
    gamma: f64,
    omega_i: f64,
    interval: (f64, f64),
    samples: usize,
) -> Result<Vec<EpSolution>, EpError>
where
    F1: Fn(f64) -> f64,
    F2: Fn(f64) -> f64,
{
    let (lo, hi) = interval;
    if lo.is_nan() || hi.is_nan() || lo >= hi || samples == 0 {
        return Err(EpError::InvalidProblem(format!(
            "interval [{lo}, {hi}] with {samples} samples"
        )));
    }
    let system = |a: f64| {
        TwoLevelSystem::new(e1(a), e2(a), gamma, gamma, Complex64::new(0.0, omega_i))
            .map_err(|e| EpError::InvalidProblem(e.to_string()))
    };

    let mut roots: Vec<f64> = Vec::new();
    let targets = if omega_i == 0.0 {
        vec![0.0]
    } else {
        vec![2.0 * omega_i, -2.0 * omega_i]
    };
    for target in targets {
        let f = |a: f64| e1(a) - e2(a) - target;
        let mut prev_a = lo;
        let mut prev_f = f(lo);
        for i in 1..=samples {
            let a = if i == samples {
                hi
            } else {
                lo + (hi - lo) * i as f64 / samples as f64
            };
            let fa = f(a);
            if prev_f == 0.0 {
                roots.push(prev_a);
            } else if fa != 0.0 && (prev_f < 0.0) != (fa < 0.0) {
                roots.push(bisect(&f, prev_a, a, prev_f));
            }
            prev_a = a;
            prev_f = fa;
        }
        if prev_f == 0.0 {
            roots.push(prev_a);
        }
    }

    roots.sort_by(f64::total_cmp);
    roots.dedup_by(|x, y| (*x - *y).abs() <= 4.0 * f64::EPSILON * x.abs().max(1.0));
    if roots.is_empty() {
        return Err(EpError::NoRootInInterval { lo, hi });
    }

    roots
        .into_iter()
        .map(|a| {
            // bisection stops at adjacent floats; keep whichever neighbour has the smaller |Z|
            let a = [a.next_down(), a, a.next_up()]
                .into_iter()
                .filter(|x| *x >= lo && *x <= hi)
                .min_by(|x, y| {
                    let zx = system(*x).map(|s| s.discriminant().norm()).unwrap_or(f64::INFINITY);
                    let zy = system(*y).map(|s| s.discriminant().norm()).unwrap_or(f64::INFINITY);
                    zx.total_cmp(&zy)
                })
                .unwrap_or(a);
            let sys = system(a)?;
            let residual = sys.discriminant().norm();
            if residual > residual_tolerance(&sys) {
                return Err(EpError::NoConvergence {
                    iterations: 0,
                    z_squared: sys.z_squared().norm(),
                    reason: format!("bisected root at a = {a} fails the |Z| check"),
                });
            }
            let side = system(a + context_offset(a))?;
            Ok(EpSolution {
                params: BTreeMap::from([("a".to_string(), a)]),
                residual,
                kind: EpKind::AnalyticImagCoupling,
                branch_context: context_of(classify_branch(&side)),
            })
        })
        .collect()
}

fn bisect(f: &impl Fn(f64) -> f64, mut lo: f64, mut hi: f64, mut f_lo: f64) -> f64 {
    loop {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            return if f_lo.abs() <= f(hi).abs() { lo } else { hi };
        }
        let fm = f(mid);
        if fm == 0.0 {
            return mid;
        }
        if (fm < 0.0) == (f_lo < 0.0) {
            lo = mid;
            f_lo = fm;
        } else {
            hi = mid;
        }
    }
}

/// Critical real couplings `ω_r = ±(γ1 − γ2)/4` for `e1 = e2`, ascending.
pub fn eps_gainloss_real_coupling(gamma1: f64, gamma2: f64) -> Result<[f64; 2], EpError> {
    if gamma1 == gamma2 {
        return Err(EpError::DegenerateWidths);
    }
    let w = ((gamma1 - gamma2) / 4.0).abs();
    Ok([-w, w])
}

/// The two gain/loss EPs at level position `e`, verified through `Z`.
pub fn gainloss_solutions(e: f64, gamma1: f64, gamma2: f64) -> Result<Vec<EpSolution>, EpError> {
    eps_gainloss_real_coupling(gamma1, gamma2)?
        .into_iter()
        .map(|w| {
            let sys = TwoLevelSystem::new(e, e, gamma1, gamma2, Complex64::new(w, 0.0))
                .map_err(|err| EpError::InvalidProblem(err.to_string()))?;
            let residual = sys.discriminant().norm();
            let side = TwoLevelSystem {
                omega: Complex64::new(w + w.signum() * context_offset(w), 0.0),
                ..sys
            };
            Ok(EpSolution {
                params: BTreeMap::from([("omega_r".to_string(), w)]),
                residual,
                kind: EpKind::AnalyticGainlossRealCoupling,
                branch_context: context_of(classify_branch(&side)),
            })
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Unknown {
    A,
    OmegaR,
    OmegaI,
}

impl Unknown {
    pub fn name(self) -> &'static str {
        match self {
            Unknown::A => "a",
            Unknown::OmegaR => "omega_r",
            Unknown::OmegaI => "omega_i",
        }
    }

    fn index(self) -> usize {
        self as usize
    }
}

impl fmt::Display for Unknown {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl std::str::FromStr for Unknown {
    type Err = EpError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim() {
            "a" => Ok(Unknown::A),
            "omega_r" => Ok(Unknown::OmegaR),
            "omega_i" => Ok(Unknown::OmegaI),
            other => Err(EpError::InvalidProblem(format!(
                "unknown `{other}` (expected a, omega_r or omega_i)"
            ))),
        }
    }
}

/// Axis-aligned box over the two unknowns.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SearchBox {
    pub lo: [f64; 2],
    pub hi: [f64; 2],
}

impl SearchBox {
    pub fn new(lo: [f64; 2], hi: [f64; 2]) -> Self {
        Self { lo, hi }
    }

    pub fn contains(&self, x: [f64; 2]) -> bool {
        (0..2).all(|i| x[i] >= self.lo[i] && x[i] <= self.hi[i])
    }

    fn validate(&self) -> Result<(), EpError> {
        for i in 0..2 {
            if !(self.lo[i].is_finite() && self.hi[i].is_finite() && self.lo[i] < self.hi[i]) {
                return Err(EpError::InvalidProblem(format!(
                    "box axis {i}: [{}, {}]",
                    self.lo[i], self.hi[i]
                )));
            }
        }
        Ok(())
    }
}

/// A scenario family with two of `{a, ω_r, ω_i}` left free.
///
/// Parameters that are not free take their values from the family: `a` from
/// `a_fixed`, the coupling components from `omega_expr` at the current `a`.
/// With `omega_i_ratio` set, a fixed `ω_i` follows `ratio · ω_r` instead.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EpProblem {
    pub family: ScenarioConfig,
    pub unknowns: [Unknown; 2],
    #[serde(default)]
    pub a_fixed: f64,
    #[serde(default)]
    pub omega_i_ratio: Option<f64>,
}

impl EpProblem {
    pub fn new(family: ScenarioConfig, unknowns: [Unknown; 2]) -> Self {
        Self {
            family,
            unknowns,
            a_fixed: 0.0,
            omega_i_ratio: None,
        }
    }

    pub fn with_a_fixed(mut self, a: f64) -> Self {
        self.a_fixed = a;
        self
    }

    pub fn with_omega_i_ratio(mut self, ratio: f64) -> Self {
        self.omega_i_ratio = Some(ratio);
        self
    }

    fn validate(&self) -> Result<(), EpError> {
        if self.unknowns[0] == self.unknowns[1] {
            return Err(EpError::InvalidProblem(format!(
                "unknowns must differ, got {} twice",
                self.unknowns[0]
            )));
        }
        if self.omega_i_ratio.is_some()
            && (self.unknowns.contains(&Unknown::OmegaI) || !self.unknowns.contains(&Unknown::OmegaR))
        {
            return Err(EpError::InvalidProblem(
                "omega_i_ratio needs omega_r free and omega_i fixed".into(),
            ));
        }
        Ok(())
    }

    /// Full parameter triple `(a, ω_r, ω_i)` at a point of the unknowns.
    pub fn parameters(&self, x: [f64; 2]) -> [f64; 3] {
        let mut p = [f64::NAN; 3];
        for (u, v) in self.unknowns.iter().zip(x) {
            p[u.index()] = v;
        }
        if p[0].is_nan() {
            p[0] = self.a_fixed;
        }
        let base = self.family.omega_expr.eval(p[0]);
        if p[1].is_nan() {
            p[1] = base.re;
        }
        if p[2].is_nan() {
            p[2] = match self.omega_i_ratio {
                Some(ratio) => ratio * p[1],
                None => base.im,
            };
        }
        p
    }

    pub fn system(&self, x: [f64; 2]) -> Result<TwoLevelSystem, EpError> {
        let [a, wr, wi] = self.parameters(x);
        Ok(self.family.system_with_omega(a, Complex64::new(wr, wi))?)
    }

    fn z_squared(&self, x: [f64; 2]) -> Result<Complex64, EpError> {
        Ok(self.system(x)?.z_squared())
    }

    /// Acceptance bound on `|Z|` at `x`: [`residual_tolerance`] of the system,
    /// raised further to the resolution of the unknowns themselves. One ulp of
    /// each unknown moves `Z²` by `|∂Z²/∂x_j|·ulp(x_j)`, so no float pair can
    /// get closer to the root than a few of those steps.
    pub fn residual_tolerance(&self, x: [f64; 2]) -> Result<f64, EpError> {
        let jac = jacobian(self, x)?;
        let resolution: f64 = (0..2)
            .map(|j| jac[0][j].hypot(jac[1][j]) * (x[j].next_up() - x[j]))
            .sum();
        Ok(residual_tolerance(&self.system(x)?).max((4.0 * resolution).sqrt()))
    }
}

/// Damped Newton on `(Re Z², Im Z²)` with a central-difference Jacobian.
///
/// Without a seed, starts from the minimum of `|Z²|` on a 101×101 grid over
/// `bx`. Each step is halved (at most 30 times) until `|Z²|` decreases; when no
/// halving helps, the iterate is polished over neighbouring floats and accepted
/// if `|Z|` meets [`residual_tolerance`].
pub fn ep_newton(problem: &EpProblem, seed: Option<[f64; 2]>, bx: &SearchBox) -> Result<EpSolution, EpError> {
    problem.validate()?;
    bx.validate()?;
    let mut x = match seed {
        Some(s) => s,
        None => grid_seed(problem, bx)?,
    };
    if !bx.contains(x) {
        return Err(EpError::LeftBox { point: x });
    }

    let mut fx = problem.z_squared(x)?;
    for iteration in 0..MAX_ITERATIONS {
        let sys = problem.system(x)?;
        let strict = (RESIDUAL_TOL * sys.scale()).powi(2);
        if fx.norm() <= strict {
            return finish(problem, polish(problem, x)?, bx);
        }

        let jac = jacobian(problem, x)?;
        let det = jac[0][0] * jac[1][1] - jac[0][1] * jac[1][0];
        let jnorm = jac.iter().flatten().map(|v| v * v).sum::<f64>();
        if !det.is_finite() || det.abs() <= 1e-14 * jnorm {
            return Err(EpError::NoConvergence {
                iterations: iteration,
                z_squared: fx.norm(),
                reason: format!("singular Jacobian at {x:?}; the unknowns do not determine an isolated EP"),
            });
        }
        let step = [
            (-fx.re * jac[1][1] + fx.im * jac[0][1]) / det,
            (-fx.im * jac[0][0] + fx.re * jac[1][0]) / det,
        ];

        let mut lambda = 1.0;
        let mut accepted = None;
        for _ in 0..=MAX_HALVINGS {
            let trial = [x[0] + lambda * step[0], x[1] + lambda * step[1]];
            if let Ok(ft) = problem.z_squared(trial) {
                if ft.norm() < fx.norm() {
                    accepted = Some((trial, ft));
                    break;
                }
            }
            lambda *= 0.5;
        }

        match accepted {
            Some((trial, ft)) => {
                if !bx.contains(trial) {
                    return Err(EpError::LeftBox { point: trial });
                }
                x = trial;
                fx = ft;
            }
            None => {
                // stagnation: either at the rounding floor or stuck away from a root
                let best = polish(problem, x)?;
                if problem.system(best)?.discriminant().norm() <= problem.residual_tolerance(best)? {
                    return finish(problem, best, bx);
                }
                return Err(EpError::NoConvergence {
                    iterations: iteration,
                    z_squared: fx.norm(),
                    reason: format!("damping failed to reduce |Z²| at {x:?}"),
                });
            }
        }
    }
    Err(EpError::NoConvergence {
        iterations: MAX_ITERATIONS,
        z_squared: fx.norm(),
        reason: format!("iteration limit reached at {x:?}"),
    })
}

fn finish(problem: &EpProblem, x: [f64; 2], bx: &SearchBox) -> Result<EpSolution, EpError> {
    if !bx.contains(x) {
        return Err(EpError::LeftBox { point: x });
    }
    let sys = problem.system(x)?;
    let residual = sys.discriminant().norm();
    let mut params = BTreeMap::new();
    for (u, v) in problem.unknowns.iter().zip(x) {
        params.insert(u.name().to_string(), v);
    }
    let offset = [x[0] + context_offset(x[0]), x[1]];
    let branch_context = context_of(classify_branch(&problem.system(offset)?));
    Ok(EpSolution {
        params,
        residual,
        kind: EpKind::NewtonGeneral,
        branch_context,
    })
}

fn jacobian(problem: &EpProblem, x: [f64; 2]) -> Result<[[f64; 2]; 2], EpError> {
    let mut jac = [[0.0; 2]; 2];
    for j in 0..2 {
        let h = 1e-6 * x[j].abs().max(1e-3);
        let mut plus = x;
        let mut minus = x;
        plus[j] += h;
        minus[j] -= h;
        let d = (problem.z_squared(plus)? - problem.z_squared(minus)?) / (plus[j] - minus[j]);
        jac[0][j] = d.re;
        jac[1][j] = d.im;
    }
    Ok(jac)
}

fn step_ulps(mut x: f64, n: i32) -> f64 {
    for _ in 0..n.unsigned_abs() {
        x = if n > 0 { x.next_up() } else { x.next_down() };
    }
    x
}

/// Best `|Z²|` over the ±8-ulp neighbourhood of `x`.
fn polish(problem: &EpProblem, x: [f64; 2]) -> Result<[f64; 2], EpError> {
    let mut best = x;
    let mut best_f = problem.z_squared(x)?.norm();
    for i in -POLISH_ULPS..=POLISH_ULPS {
        for j in -POLISH_ULPS..=POLISH_ULPS {
            let trial = [step_ulps(x[0], i), step_ulps(x[1], j)];
            let f = problem.z_squared(trial)?.norm();
            if f < best_f {
                best = trial;
                best_f = f;
            }
        }
    }
    Ok(best)
}

fn grid_seed(problem: &EpProblem, bx: &SearchBox) -> Result<[f64; 2], EpError> {
    let n = SEED_GRID;
    let coord = |axis: usize, i: usize| {
        bx.lo[axis] + (bx.hi[axis] - bx.lo[axis]) * i as f64 / (n - 1) as f64
    };
    let best = (0..n * n)
        .into_par_iter()
        .map(|cell| {
            let x = [coord(0, cell / n), coord(1, cell % n)];
            let f = problem.z_squared(x).map(|z| z.norm()).unwrap_or(f64::INFINITY);
            (f, cell)
        })
        .min_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)))
        .expect("non-empty grid");
    if !best.0.is_finite() {
        return Err(EpError::InvalidProblem("family not evaluable on the box".into()));
    }
    Ok([coord(0, best.1 / n), coord(1, best.1 % n)])
}

/// Which no-EP argument a certificate rests on.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CertificateKind {
    /// `e1 ≡ e2`, imaginary `ω`: `|2Z|² = ¼(γ1 − γ2)² + 4ω_i² > 0`.
    EqualLevelsImaginaryCoupling,
    /// `e1 ≠ e2`, imaginary `ω`: `Im 4Z² = (e1 − e2)(γ1 − γ2) ≠ 0` since `ω_r = 0`.
    DistinctLevelsImaginaryCoupling,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NoEpCertificate {
    pub kind: CertificateKind,
    /// Minimum over the grid of the analytic lower bound on `|2Z|²`.
    pub analytic_bound: Option<f64>,
    /// Minimum over the grid of `|(e1 − e2)(γ1 − γ2)|`.
    pub obstruction: Option<f64>,
    /// Minimum of `|Z|` over the grid, computed through the discriminant.
    pub min_abs_z: f64,
    pub argmin_a: f64,
}

impl fmt::Display for NoEpCertificate {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.kind {
            CertificateKind::EqualLevelsImaginaryCoupling => write!(
                f,
                "no EP: e1 = e2 with imaginary coupling gives |2Z|^2 = (g1-g2)^2/4 + 4 omega_i^2 >= {:.6e} > 0",
                self.analytic_bound.unwrap_or(f64::NAN)
            )?,
            CertificateKind::DistinctLevelsImaginaryCoupling => write!(
                f,
                "no EP: omega_r = 0 forces (e1-e2)(g1-g2) = 0, but |(e1-e2)(g1-g2)| >= {:.6e} on the grid",
                self.obstruction.unwrap_or(f64::NAN)
            )?,
        }
        write!(f, "; min |Z| = {:.6e} at a = {}", self.min_abs_z, self.argmin_a)
    }
}

/// Certifies that a purely-imaginary-coupling family has no EP on `grid`.
pub fn no_ep_certificate(family: &ScenarioConfig, grid: &[f64]) -> Result<NoEpCertificate, EpError> {
    if grid.is_empty() {
        return Err(EpError::InvalidProblem("empty grid".into()));
    }
    if family.g1 == family.g2 {
        return Err(EpError::FamilyMismatch(
            "equal widths: imaginary coupling can produce EPs".into(),
        ));
    }
    if !family.omega_expr.is_purely_imaginary() {
        return Err(EpError::FamilyMismatch("coupling is not purely imaginary".into()));
    }

    let dg = family.g1 - family.g2;
    let mut min_z = (f64::INFINITY, grid[0]);
    let mut bound = f64::INFINITY;
    let mut obstruction = f64::INFINITY;
    for &a in grid {
        let z = family.system_at(a)?.discriminant().norm();
        if z < min_z.0 {
            min_z = (z, a);
        }
        let wi = family.omega_expr.eval(a).im;
        bound = bound.min(0.25 * dg * dg + 4.0 * wi * wi);
        obstruction = obstruction.min((family.level_difference(a) * dg).abs());
    }

    let (kind, analytic_bound, obstruction) = if family.levels_identical() {
        (CertificateKind::EqualLevelsImaginaryCoupling, Some(bound), None)
    } else {
        if obstruction == 0.0 {
            return Err(EpError::FamilyMismatch(
                "levels cross on the grid; obstruction (e1-e2)(g1-g2) vanishes".into(),
            ));
        }
        (CertificateKind::DistinctLevelsImaginaryCoupling, None, Some(obstruction))
    };
    Ok(NoEpCertificate {
        kind,
        analytic_bound,
        obstruction,
        min_abs_z: min_z.0,
        argmin_a: min_z.1,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scenario::{preset, Affine, ComplexAffine, Grid};

    #[test]
    fn imaginary_coupling_linear_difference() {
        let sols = eps_imaginary_coupling(|a| a, |_| 0.0, -0.1, 0.5, (-2.0, 2.0), 400).unwrap();
        let a: Vec<f64> = sols.iter().map(|s| s.param("a").unwrap()).collect();
        assert_eq!(a, vec![-1.0, 1.0]);
        for s in &sols {
            assert_eq!(s.residual, 0.0);
            assert_eq!(s.kind, EpKind::AnalyticImagCoupling);
        }
    }

    #[test]
    fn imaginary_coupling_fig1_energies() {
        // 1 − 3a/2 = ±0.11
        let sols = eps_imaginary_coupling(|a| 1.0 - a / 2.0, |a| a, -0.1, 0.055, (0.0, 1.5), 300).unwrap();
        assert_eq!(sols.len(), 2);
        let a0 = sols[0].param("a").unwrap();
        let a1 = sols[1].param("a").unwrap();
        assert!((a0 - 0.89 / 1.5).abs() < 1e-14);
        assert!((a1 - 0.74).abs() < 1e-14);
        for s in &sols {
            // full Z oracle: ½√((e1−e2)² − 4ω_i²) with γ1 = γ2
            let a = s.param("a").unwrap();
            let d = (1.0 - a / 2.0) - a;
            let z = 0.5 * Complex64::new(d * d - 4.0 * 0.055 * 0.055, 0.0).sqrt();
            assert!(z.norm() < 1e-8);
            assert!(s.residual < 1e-8);
        }
    }

    #[test]
    fn imaginary_coupling_zero_limit_is_level_crossing() {
        let sols = eps_imaginary_coupling(|a| 1.0 - a, |a| a, -0.2, 0.0, (0.0, 1.0), 10).unwrap();
        assert_eq!(sols.len(), 1);
        assert_eq!(sols[0].param("a"), Some(0.5));
    }

    #[test]
    fn imaginary_coupling_no_root() {
        let err = eps_imaginary_coupling(|a| a, |_| 0.0, -0.1, 0.5, (2.0, 3.0), 50).unwrap_err();
        assert!(matches!(err, EpError::NoRootInInterval { .. }));
    }

    #[test]
    fn gainloss_critical_couplings() {
        assert_eq!(eps_gainloss_real_coupling(-0.1, 0.1).unwrap(), [-0.05, 0.05]);
        assert_eq!(eps_gainloss_real_coupling(-2.0, 2.0).unwrap(), [-1.0, 1.0]);
        assert_eq!(eps_gainloss_real_coupling(0.3, 0.3), Err(EpError::DegenerateWidths));
        for s in gainloss_solutions(2.0 / 3.0, -0.1, 0.1).unwrap() {
            assert!(s.residual < 1e-12);
            assert_eq!(s.branch_context, BranchContext::ZRealSide);
        }
    }

    #[test]
    fn classification() {
        // γ1 = γ2, ω imaginary, (e1−e2)² > 4ω_i²
        let s = TwoLevelSystem::new(0.9, 0.1, -0.1, -0.1, Complex64::new(0.0, 0.2)).unwrap();
        assert_eq!(classify_branch(&s), Branch::ZReal);
        // e1 = e2, γ1 = −γ2, γ² > 4ω_r²
        let s = TwoLevelSystem::new(0.5, 0.5, -0.2, 0.2, Complex64::new(0.05, 0.0)).unwrap();
        assert_eq!(classify_branch(&s), Branch::ZImag);
        let s = TwoLevelSystem::new(0.3, 0.1, -0.1, -0.05, Complex64::new(0.02, 0.03)).unwrap();
        assert_eq!(classify_branch(&s), Branch::ZComplex);
    }

    fn box_of(lo: [f64; 2], hi: [f64; 2]) -> SearchBox {
        SearchBox::new(lo, hi)
    }

    #[test]
    fn newton_fig1_left() {
        let problem = EpProblem::new(preset("fig1_left").unwrap(), [Unknown::A, Unknown::OmegaR]);
        let sol = ep_newton(&problem, Some([0.5, 0.08]), &box_of([0.0, 0.0], [1.5, 1.0])).unwrap();
        assert!((sol.param("a").unwrap() - 2.0 / 3.0).abs() < 1e-12);
        assert!((sol.param("omega_r").unwrap() - 0.055).abs() < 1e-12);
        assert!(sol.residual < 1e-10);
        assert_eq!(sol.kind, EpKind::NewtonGeneral);
    }

    #[test]
    fn newton_grid_seeded() {
        let problem = EpProblem::new(preset("fig1_left").unwrap(), [Unknown::A, Unknown::OmegaR]);
        let sol = ep_newton(&problem, None, &box_of([0.0, 0.0], [1.5, 1.0])).unwrap();
        assert!((sol.param("a").unwrap() - 2.0 / 3.0).abs() < 1e-12);
        assert!(sol.residual < 1e-10);
    }

    #[test]
    fn newton_fig1_right_tied_coupling() {
        let problem = EpProblem::new(preset("fig1_right").unwrap(), [Unknown::A, Unknown::OmegaR])
            .with_omega_i_ratio(1.0);
        let sol = ep_newton(&problem, Some([0.6, 0.05]), &box_of([0.0, 0.0], [1.5, 1.0])).unwrap();
        let a = sol.param("a").unwrap();
        let wr = sol.param("omega_r").unwrap();
        let d = 1.0 - 1.5 * a;
        assert!((d.abs() - 0.11).abs() < 1e-9);
        // (e1 − e2)(γ1 − γ2) = −8 ω_r ω_i
        assert!((d * -0.22 + 8.0 * wr * wr).abs() < 1e-9);
        let modulus = wr * 2f64.sqrt();
        assert!((modulus - 0.055 * 2f64.sqrt()).abs() < 1e-9);
        assert!((modulus - 0.0789).abs() > 1e-3, "preset modulus is not the exact EP");
        let sys = problem.system([a, wr]).unwrap();
        assert!(sol.residual <= residual_tolerance(&sys));
    }

    #[test]
    fn newton_agrees_with_gainloss_analytic() {
        let problem = EpProblem::new(preset("fig2_left").unwrap(), [Unknown::A, Unknown::OmegaI]);
        let sol = ep_newton(&problem, Some([0.07, 0.01]), &box_of([0.0, -0.5], [0.1, 0.5])).unwrap();
        let [_, w] = eps_gainloss_real_coupling(-0.1, 0.1).unwrap();
        assert!((sol.param("a").unwrap() - w).abs() < 1e-8);
        assert!(sol.param("omega_i").unwrap().abs() < 1e-8);
        assert!(sol.residual < 1e-10);
        assert_eq!(sol.branch_context, BranchContext::ZRealSide);
    }

    #[test]
    fn newton_singular_start_fails() {
        // ω_r = 0 makes the Jacobian singular for the fig1_left family
        let problem = EpProblem::new(preset("fig1_left").unwrap(), [Unknown::A, Unknown::OmegaR]);
        let err = ep_newton(&problem, Some([0.1, 0.0]), &box_of([0.0, -1.0], [1.5, 1.0])).unwrap_err();
        assert!(matches!(err, EpError::NoConvergence { .. }), "{err}");
    }

    #[test]
    fn newton_no_ep_family_fails() {
        let problem = EpProblem::new(preset("fig2_right").unwrap(), [Unknown::A, Unknown::OmegaI]);
        let err = ep_newton(&problem, None, &box_of([0.0, -1.0], [0.12, 1.0])).unwrap_err();
        assert!(matches!(err, EpError::NoConvergence { .. }), "{err}");
    }

    #[test]
    fn newton_leaves_box() {
        let problem = EpProblem::new(preset("fig1_left").unwrap(), [Unknown::A, Unknown::OmegaR]);
        let err = ep_newton(&problem, Some([0.5, 0.2]), &box_of([0.4, 0.15], [0.9, 0.3])).unwrap_err();
        assert!(matches!(err, EpError::LeftBox { .. }), "{err}");
        let err = ep_newton(&problem, Some([2.0, 0.2]), &box_of([0.0, 0.0], [1.5, 1.0])).unwrap_err();
        assert!(matches!(err, EpError::LeftBox { .. }));
    }

    #[test]
    fn newton_rejects_bad_unknowns() {
        let problem = EpProblem::new(preset("fig1_left").unwrap(), [Unknown::A, Unknown::A]);
        assert!(matches!(
            ep_newton(&problem, None, &box_of([0.0, 0.0], [1.0, 1.0])),
            Err(EpError::InvalidProblem(_))
        ));
        assert!("omega".parse::<Unknown>().is_err());
        assert_eq!("omega_i".parse::<Unknown>().unwrap(), Unknown::OmegaI);
    }

    #[test]
    fn certificate_equal_levels() {
        let family = ScenarioConfig {
            name: "balanced".into(),
            e1_expr: Affine::constant(0.5),
            e2_expr: Affine::constant(0.5),
            g1: 0.2,
            g2: -0.2,
            omega_expr: ComplexAffine::new(Complex64::new(0.0, 0.0), Complex64::new(0.0, 1.0)),
            a_grid: Grid::new(0.0, 1.0, 101),
            channels: 1,
        };
        let cert = no_ep_certificate(&family, &family.a_grid.points()).unwrap();
        assert_eq!(cert.kind, CertificateKind::EqualLevelsImaginaryCoupling);
        assert!((cert.analytic_bound.unwrap() - 0.04).abs() < 1e-15);
        assert!((cert.min_abs_z - 0.1).abs() < 1e-15);
    }

    #[test]
    fn certificate_fig2_right() {
        let family = preset("fig2_right").unwrap();
        let cert = no_ep_certificate(&family, &family.a_grid.points()).unwrap();
        assert_eq!(cert.kind, CertificateKind::DistinctLevelsImaginaryCoupling);
        assert!((cert.obstruction.unwrap() - 4.0 / 3.0 * 0.2).abs() < 1e-14);
        assert!(cert.min_abs_z > 0.1);
        assert!(cert.to_string().starts_with("no EP"));
    }

    #[test]
    fn certificate_mismatch() {
        let mut family = preset("fig2_right").unwrap();
        family.g2 = family.g1;
        assert!(matches!(
            no_ep_certificate(&family, &[0.0, 0.1]),
            Err(EpError::FamilyMismatch(_))
        ));
        let family = preset("fig2_left").unwrap();
        assert!(matches!(
            no_ep_certificate(&family, &[0.0, 0.1]),
            Err(EpError::FamilyMismatch(_))
        ));
    }

    #[test]
    fn loss_only_vs_gain_loss_duality() {
        // loss only (γ1 = γ2 ≠ 0, e1 − e2 = a): imaginary ω gives two EPs
        let sols = eps_imaginary_coupling(|a| a, |_| 0.0, -0.1, 0.2, (-1.0, 1.0), 200).unwrap();
        let a: Vec<f64> = sols.iter().map(|s| s.param("a").unwrap()).collect();
        assert_eq!(a.len(), 2);
        assert!((a[0] + 0.4).abs() < 1e-15 && (a[1] - 0.4).abs() < 1e-15);

        // loss only with real ω: Z² = a²/4 + ω_r² stays positive
        let loss_real = ScenarioConfig {
            name: "loss_real".into(),
            e1_expr: Affine::new(0.0, 1.0),
            e2_expr: Affine::constant(0.0),
            g1: -0.1,
            g2: -0.1,
            omega_expr: ComplexAffine::constant(Complex64::new(0.2, 0.0)),
            a_grid: Grid::new(-1.0, 1.0, 201),
            channels: 1,
        };
        let min_z = loss_real
            .a_grid
            .points()
            .iter()
            .map(|&a| loss_real.system_at(a).unwrap().discriminant().norm())
            .fold(f64::INFINITY, f64::min);
        assert!((min_z - 0.2).abs() < 1e-15);
        let problem = EpProblem::new(loss_real, [Unknown::A, Unknown::OmegaI]).with_a_fixed(0.0);
        assert!(ep_newton(&problem, None, &box_of([-1.0, -0.15], [1.0, 0.15])).is_err());

        // gain/loss (γ1 = −γ2 ≠ 0, e1 = e2): real ω gives two EPs, imaginary ω none
        assert_eq!(gainloss_solutions(0.5, -0.1, 0.1).unwrap().len(), 2);
        let gl_imag = ScenarioConfig {
            name: "gl_imag".into(),
            e1_expr: Affine::constant(0.5),
            e2_expr: Affine::constant(0.5),
            g1: -0.1,
            g2: 0.1,
            omega_expr: ComplexAffine::new(Complex64::new(0.0, 0.0), Complex64::new(0.0, 1.0)),
            a_grid: Grid::new(0.0, 1.0, 201),
            channels: 1,
        };
        let cert = no_ep_certificate(&gl_imag, &gl_imag.a_grid.points()).unwrap();
        assert!(cert.analytic_bound.unwrap() > 0.0);
    }
}
