//! `ep-lab`: sweeps, EP location and S-matrix line shapes from the command line.
//!
//! Exit codes: 0 ok, 2 usage/config, 3 numeric failure, 4 no convergence.

use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use ep_lab_core::{
    cross_section, ep_newton, line_shape_features, no_ep_certificate, preset, run_sweep_with_threads, s_double_pole,
    Complex64, ConfigError, EpError, EpProblem, Resonance, ResonanceSet, SMatrixError, ScenarioConfig, SearchBox,
    SweepError, Unknown, EP_TOL,
};
use serde_json::json;
use thiserror::Error;

pub mod manifest;
pub mod output;
pub mod plot;

use manifest::{load_config, RunManifest};

/// Environment variable capping engine threads (0 = automatic).
pub const THREADS_ENV: &str = "EP_LAB_THREADS";

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error("{0}")]
    Numeric(String),
    #[error("{0}")]
    NoConvergence(String),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Usage(_) | CliError::Config(_) => 2,
            CliError::Numeric(_) => 3,
            CliError::NoConvergence(_) => 4,
        }
    }
}

impl From<SweepError> for CliError {
    fn from(e: SweepError) -> Self {
        match e {
            SweepError::Config(c) => CliError::Config(c),
            other => CliError::Numeric(other.to_string()),
        }
    }
}

impl From<SMatrixError> for CliError {
    fn from(e: SMatrixError) -> Self {
        match e {
            SMatrixError::PoleOnRealAxis { .. } => CliError::Numeric(e.to_string()),
            other => CliError::Usage(other.to_string()),
        }
    }
}

#[derive(Debug, Parser)]
#[command(name = "ep-lab", version, about = "Two-level non-Hermitian systems: sweeps, exceptional points, S-matrix")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Sweep a scenario over its `a` grid; writes sweep.csv, plot.svg and manifest.json.
    Sweep(SweepArgs),
    /// Locate an exceptional point by damped Newton; prints the solution as JSON.
    FindEp(FindEpArgs),
    /// Tabulate |1 - S|² for one or two resonances; writes sigma.csv and features.json.
    Smatrix(SmatrixArgs),
}

#[derive(Debug, Clone, Default, Args)]
pub struct Common {
    /// Built-in scenario: fig1_left, fig1_right, fig2_left or fig2_right.
    #[arg(long)]
    pub preset: Option<String>,
    /// Scenario JSON, or a manifest.json from a previous run.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Output directory (created if missing).
    #[arg(short = 'o', long = "out")]
    pub out: Option<PathBuf>,
    /// Override the number of grid points in `a`.
    #[arg(long)]
    pub grid: Option<usize>,
    /// Emit sweep.dat + sweep.gp for gnuplot instead of plot.svg.
    #[arg(long)]
    pub gnuplot: bool,
}

#[derive(Debug, Args)]
pub struct SweepArgs {
    #[command(flatten)]
    pub common: Common,
}

#[derive(Debug, Args)]
pub struct FindEpArgs {
    #[command(flatten)]
    pub common: Common,
    /// Two free parameters out of a, omega_r, omega_i.
    #[arg(long, default_value = "a,omega_r")]
    pub unknowns: String,
    /// Search box `lo1,hi1,lo2,hi2` over the unknowns.
    #[arg(long = "box", allow_hyphen_values = true)]
    pub search_box: Option<String>,
    /// Starting point `x1,x2`; the box is grid-searched when omitted.
    #[arg(long, allow_hyphen_values = true)]
    pub seed: Option<String>,
    /// Tie a fixed omega_i to `ratio * omega_r`.
    #[arg(long, allow_hyphen_values = true)]
    pub omega_i_ratio: Option<f64>,
    /// Value of `a` when it is not an unknown.
    #[arg(long, allow_hyphen_values = true)]
    pub a_fixed: Option<f64>,
}

#[derive(Debug, Args)]
pub struct SmatrixArgs {
    #[command(flatten)]
    pub common: Common,
    /// A resonance `E=<energy> G=<signed width>`; give once or twice.
    #[arg(long, num_args = 1..=2, value_name = "KEY=VALUE", allow_hyphen_values = true)]
    pub resonance: Vec<String>,
    /// A double pole `E_d=<energy> G_d=<signed width>`.
    #[arg(long, num_args = 1..=2, value_name = "KEY=VALUE", allow_hyphen_values = true, conflicts_with = "resonance")]
    pub double_pole: Option<Vec<String>>,
    /// Take the poles from the scenario's eigenvalues at `--at`.
    #[arg(long, requires = "at", conflicts_with_all = ["resonance", "double_pole"])]
    pub from_sweep: bool,
    /// Parameter value used with --from-sweep.
    #[arg(long, allow_hyphen_values = true)]
    pub at: Option<f64>,
    /// Energy range `lo,hi`; defaults to the poles ± 10 widths.
    #[arg(long, allow_hyphen_values = true)]
    pub range: Option<String>,
    /// Number of energies in the range.
    #[arg(long, default_value_t = 1001)]
    pub points: usize,
}

pub fn run(cli: Cli, stdout: &mut dyn Write) -> Result<(), CliError> {
    match cli.command {
        Command::Sweep(args) => cmd_sweep(&args),
        Command::FindEp(args) => cmd_find_ep(&args, stdout),
        Command::Smatrix(args) => cmd_smatrix(&args),
    }
}

/// Preset or config file; the preset wins when both are given.
pub fn resolve_config(common: &Common) -> Result<Option<ScenarioConfig>, CliError> {
    let cfg = match (&common.preset, &common.config) {
        (Some(name), path) => {
            if let Some(path) = path {
                eprintln!("warning: --preset {name} overrides --config {}", path.display());
            }
            Some(preset(name)?)
        }
        (None, Some(path)) => Some(load_config(path)?),
        (None, None) => None,
    };
    match (cfg, common.grid) {
        (Some(cfg), Some(n)) => {
            let cfg = cfg.with_grid_count(n);
            cfg.validate()?;
            Ok(Some(cfg))
        }
        (cfg, _) => Ok(cfg),
    }
}

fn require_config(common: &Common) -> Result<ScenarioConfig, CliError> {
    resolve_config(common)?.ok_or_else(|| CliError::Usage("need --preset or --config".into()))
}

/// Thread count from the environment; unset means automatic.
pub fn threads_from_env() -> Result<usize, CliError> {
    match std::env::var(THREADS_ENV) {
        Ok(v) => v
            .trim()
            .parse()
            .map_err(|_| CliError::Usage(format!("{THREADS_ENV}={v:?} is not a thread count"))),
        Err(_) => Ok(0),
    }
}

fn out_dir(common: &Common) -> Result<PathBuf, CliError> {
    let dir = common.out.clone().unwrap_or_else(|| PathBuf::from("."));
    std::fs::create_dir_all(&dir).map_err(|e| CliError::Usage(format!("cannot create {}: {e}", dir.display())))?;
    Ok(dir)
}

fn write_file(dir: &Path, name: &str, contents: &str, manifest: &mut RunManifest) -> Result<(), CliError> {
    let path = dir.join(name);
    std::fs::write(&path, contents).map_err(|e| CliError::Usage(format!("cannot write {}: {e}", path.display())))?;
    manifest.outputs.push(name.into());
    Ok(())
}

fn finish_manifest(dir: &Path, mut manifest: RunManifest) -> Result<(), CliError> {
    manifest.outputs.push("manifest.json".into());
    let text = serde_json::to_string_pretty(&manifest).map_err(|e| CliError::Numeric(e.to_string()))?;
    let path = dir.join("manifest.json");
    std::fs::write(&path, text + "\n").map_err(|e| CliError::Usage(format!("cannot write {}: {e}", path.display())))
}

fn parse_floats(text: &str, n: usize, what: &str) -> Result<Vec<f64>, CliError> {
    let vals: Result<Vec<f64>, _> = text.split(',').map(|s| s.trim().parse::<f64>()).collect();
    match vals {
        Ok(v) if v.len() == n && v.iter().all(|x| x.is_finite()) => Ok(v),
        _ => Err(CliError::Usage(format!("{what}: expected {n} comma-separated numbers, got {text:?}"))),
    }
}

/// Parses `K=V` tokens (also comma-joined) into the values of `keys`, in order.
fn parse_pairs(tokens: &[String], keys: [&str; 2], what: &str) -> Result<[f64; 2], CliError> {
    let mut vals = [None, None];
    for item in tokens.iter().flat_map(|t| t.split(',')).filter(|s| !s.trim().is_empty()) {
        let (k, v) = item
            .split_once('=')
            .ok_or_else(|| CliError::Usage(format!("{what}: expected KEY=VALUE, got {item:?}")))?;
        let slot = keys
            .iter()
            .position(|key| *key == k.trim())
            .ok_or_else(|| CliError::Usage(format!("{what}: unknown key {k:?} (expected {} and {})", keys[0], keys[1])))?;
        let v: f64 = v
            .trim()
            .parse()
            .ok()
            .filter(|x: &f64| x.is_finite())
            .ok_or_else(|| CliError::Usage(format!("{what}: bad number {v:?}")))?;
        vals[slot] = Some(v);
    }
    match vals {
        [Some(x), Some(y)] => Ok([x, y]),
        _ => Err(CliError::Usage(format!("{what}: need both {} and {}", keys[0], keys[1]))),
    }
}

pub fn cmd_sweep(args: &SweepArgs) -> Result<(), CliError> {
    let cfg = require_config(&args.common)?;
    let threads = threads_from_env()?;
    let dir = out_dir(&args.common)?;
    let result = run_sweep_with_threads(&cfg, threads)?;

    let mut manifest = RunManifest::new("sweep", Some(cfg), json!({}));
    write_file(&dir, "sweep.csv", &output::sweep_csv(&result), &mut manifest)?;
    if args.common.gnuplot {
        write_file(&dir, "sweep.dat", &output::sweep_dat(&result), &mut manifest)?;
        write_file(&dir, "sweep.gp", &plot::gnuplot_script(&result.config.name, "sweep.dat"), &mut manifest)?;
    } else {
        write_file(&dir, "plot.svg", &plot::sweep_svg(&result), &mut manifest)?;
    }
    finish_manifest(&dir, manifest)
}

fn parse_unknowns(text: &str) -> Result<[Unknown; 2], CliError> {
    let parts: Vec<&str> = text.split(',').collect();
    if parts.len() != 2 {
        return Err(CliError::Usage(format!("--unknowns: expected two of a,omega_r,omega_i, got {text:?}")));
    }
    let mut out = [Unknown::A; 2];
    for (slot, p) in out.iter_mut().zip(parts) {
        *slot = p.parse().map_err(|e: EpError| CliError::Usage(e.to_string()))?;
    }
    if out[0] == out[1] {
        return Err(CliError::Usage(format!("--unknowns: {} given twice", out[0])));
    }
    Ok(out)
}

/// Default search interval per unknown: the scenario's `a` grid, `[0, 1]` for
/// `ω_r` (the sign of a real coupling is immaterial) and `[-1, 1]` for `ω_i`.
fn default_box(cfg: &ScenarioConfig, unknowns: [Unknown; 2]) -> SearchBox {
    let axis = |u: Unknown| match u {
        Unknown::A => [cfg.a_grid.start.min(cfg.a_grid.stop), cfg.a_grid.start.max(cfg.a_grid.stop)],
        Unknown::OmegaR => [0.0, 1.0],
        Unknown::OmegaI => [-1.0, 1.0],
    };
    let (x, y) = (axis(unknowns[0]), axis(unknowns[1]));
    SearchBox::new([x[0], y[0]], [x[1], y[1]])
}

pub fn cmd_find_ep(args: &FindEpArgs, stdout: &mut dyn Write) -> Result<(), CliError> {
    let cfg = require_config(&args.common)?;
    let unknowns = parse_unknowns(&args.unknowns)?;
    let bx = match &args.search_box {
        Some(text) => {
            let v = parse_floats(text, 4, "--box")?;
            SearchBox::new([v[0], v[2]], [v[1], v[3]])
        }
        None => default_box(&cfg, unknowns),
    };
    let seed = match &args.seed {
        Some(text) => {
            let v = parse_floats(text, 2, "--seed")?;
            Some([v[0], v[1]])
        }
        None => None,
    };
    let mut problem = EpProblem::new(cfg.clone(), unknowns);
    if let Some(a) = args.a_fixed {
        problem = problem.with_a_fixed(a);
    }
    if let Some(ratio) = args.omega_i_ratio {
        problem = problem.with_omega_i_ratio(ratio);
    }

    let solution = match ep_newton(&problem, seed, &bx) {
        Ok(s) => s,
        Err(e @ (EpError::NoConvergence { .. } | EpError::LeftBox { .. } | EpError::NoRootInInterval { .. })) => {
            let mut msg = format!("no convergence: {e}");
            if let Ok(cert) = no_ep_certificate(&cfg, &cfg.a_grid.points()) {
                msg.push_str(&format!("\n{cert}"));
            }
            return Err(CliError::NoConvergence(msg));
        }
        Err(EpError::Config(c)) => return Err(CliError::Config(c)),
        Err(e) => return Err(CliError::Usage(e.to_string())),
    };

    let text = serde_json::to_string_pretty(&solution).map_err(|e| CliError::Numeric(e.to_string()))?;
    writeln!(stdout, "{text}").map_err(|e| CliError::Usage(e.to_string()))?;

    if args.common.out.is_some() {
        let dir = out_dir(&args.common)?;
        let params = json!({
            "unknowns": args.unknowns,
            "box": { "lo": bx.lo, "hi": bx.hi },
            "seed": seed,
            "omega_i_ratio": args.omega_i_ratio,
            "a_fixed": args.a_fixed,
        });
        let mut manifest = RunManifest::new("find-ep", Some(cfg), params);
        write_file(&dir, "ep.json", &(text + "\n"), &mut manifest)?;
        finish_manifest(&dir, manifest)?;
    }
    Ok(())
}

enum Poles {
    Set(ResonanceSet),
    Double { energy: f64, width: f64 },
}

impl Poles {
    fn span(&self) -> (f64, f64, f64) {
        match self {
            Poles::Set(set) => {
                let e = set.entries();
                let lo = e.iter().map(|r| r.energy).fold(f64::INFINITY, f64::min);
                let hi = e.iter().map(|r| r.energy).fold(f64::NEG_INFINITY, f64::max);
                let w = e.iter().map(|r| r.width.abs()).fold(0.0, f64::max);
                (lo, hi, w)
            }
            Poles::Double { energy, width } => (*energy, *energy, width.abs()),
        }
    }

    fn s(&self, energy: f64) -> Result<Complex64, SMatrixError> {
        match self {
            Poles::Set(set) => set.s(energy),
            Poles::Double { energy: e_d, width } => s_double_pole(*e_d, *width, energy),
        }
    }

    fn describe(&self) -> serde_json::Value {
        match self {
            Poles::Set(set) => json!({ "resonances": set.entries() }),
            Poles::Double { energy, width } => json!({ "double_pole": { "E_d": energy, "G_d": width } }),
        }
    }
}

/// Poles of the scenario at `a`: the two eigenvalues, or a double pole at an EP.
fn poles_from_scenario(cfg: &ScenarioConfig, a: f64) -> Result<Poles, CliError> {
    let sys = cfg.system_at(a)?;
    let spec = sys.eigenvalues();
    if spec.z.norm() < EP_TOL * sys.scale() {
        let mean = (spec.ev1 + spec.ev2) * 0.5;
        return Ok(Poles::Double { energy: mean.re, width: 2.0 * mean.im });
    }
    let res = spec.as_array().map(|ev| Resonance::new(ev.re, 2.0 * ev.im));
    Ok(Poles::Set(ResonanceSet::new(res.to_vec())?))
}

pub fn cmd_smatrix(args: &SmatrixArgs) -> Result<(), CliError> {
    let mut cfg = None;
    let poles = if args.from_sweep {
        let c = require_config(&args.common)?;
        let a = args.at.ok_or_else(|| CliError::Usage("--from-sweep needs --at".into()))?;
        let p = poles_from_scenario(&c, a)?;
        cfg = Some(c);
        p
    } else if let Some(tokens) = &args.double_pole {
        let [energy, width] = parse_pairs(tokens, ["E_d", "G_d"], "--double-pole")?;
        Poles::Double { energy, width }
    } else if !args.resonance.is_empty() {
        // tokens arrive flattened; every consecutive pair of KEY=VALUE items is one resonance
        let items: Vec<String> = args
            .resonance
            .iter()
            .flat_map(|t| t.split(','))
            .filter(|s| !s.trim().is_empty())
            .map(str::to_owned)
            .collect();
        if !items.len().is_multiple_of(2) {
            return Err(CliError::Usage("--resonance: each resonance needs E=... and G=...".into()));
        }
        let entries = items
            .chunks(2)
            .map(|t| parse_pairs(t, ["E", "G"], "--resonance").map(|[e, g]| Resonance::new(e, g)))
            .collect::<Result<Vec<_>, _>>()?;
        Poles::Set(ResonanceSet::new(entries)?)
    } else {
        return Err(CliError::Usage("give --resonance, --double-pole or --from-sweep".into()));
    };

    let (lo, hi) = match &args.range {
        Some(text) => {
            let v = parse_floats(text, 2, "--range")?;
            (v[0], v[1])
        }
        None => {
            let (lo, hi, w) = poles.span();
            let pad = 10.0 * w.max(1e-3);
            (lo - pad, hi + pad)
        }
    };
    if lo >= hi || args.points < 2 {
        return Err(CliError::Usage(format!(
            "empty energy range [{lo}, {hi}] with {} points",
            args.points
        )));
    }
    let n = args.points;
    let grid: Vec<f64> = (0..n)
        .map(|i| if i + 1 == n { hi } else { lo + (hi - lo) * i as f64 / (n - 1) as f64 })
        .collect();

    let dir = out_dir(&args.common)?;
    let table = cross_section(|e| poles.s(e), &grid)?;
    let features = line_shape_features(&table)?;

    let mut params = poles.describe();
    params["range"] = json!([lo, hi]);
    params["points"] = json!(n);
    if let Some(a) = args.at {
        params["at"] = json!(a);
    }
    let mut manifest = RunManifest::new("smatrix", cfg, params);
    write_file(&dir, "sigma.csv", &output::sigma_csv(&table), &mut manifest)?;
    let text = serde_json::to_string_pretty(&features).map_err(|e| CliError::Numeric(e.to_string()))?;
    write_file(&dir, "features.json", &(text + "\n"), &mut manifest)?;
    finish_manifest(&dir, manifest)
}
