//! Run configurations and the commands behind the `bvprop` binary.
//!
//! A run is described by one JSON file:
//!
//! ```json
//! {
//!   "system": { "model": "rotor" },
//!   "n": 20,
//!   "n_ref": 200,
//!   "delta": 0.1,
//!   "control": { "kind": "pc", "breakpoints": [0, 1, 2], "values": [0.3, 0] },
//!   "initial_state": { "basis": 1 },
//!   "reports": ["energy", "truncation"]
//! }
//! ```
//!
//! The trap takes its control as the frequency `ω` under `"omega"` and runs
//! with `u = ω - λ`.

use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::controls::{Control, ControlSignal, ControlSpec};
use crate::error::{Error, Result};
use crate::estimates::{
    bang_bang_tv_lower_bound, default_reference_order, min_switches, rotor_switch_count_lower_bound,
    switch_count_lower_bound, verify_energy_bound, verify_gga, verify_switch_growth,
    verify_truncation, write_reports_csv, BoundReport, SystemFamily, TvLowerBound,
};
use crate::linalg::C64;
use crate::models::{rotor_steering_control, Model, ModelInfo, ModelSpec};
use crate::operators::{compress, verify_relative_bound, Constants, CouplingOperator, GalerkinSystem, SpectralDrift};
use crate::propagator::{fmt_num, propagate_bv, propagate_pc, BvSchedule, ConvergenceRecord, StateVector};

/// System part of a configuration.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "model", rename_all = "snake_case")]
pub enum SystemSpec {
    Rotor,
    Anharmonic {
        alpha: u32,
        beta: u32,
    },
    Trap {
        lambda: f64,
    },
    /// Explicit spectrum and 1-based `[j, k, re, im]` coupling triplets.
    Custom {
        eigenvalues: Vec<f64>,
        triplets: Vec<(usize, usize, f64, f64)>,
        #[serde(default)]
        constants: Option<Constants>,
    },
}

impl SystemSpec {
    fn model_spec(&self) -> Option<ModelSpec> {
        match *self {
            SystemSpec::Rotor => Some(ModelSpec::Rotor),
            SystemSpec::Anharmonic { alpha, beta } => Some(ModelSpec::Anharmonic { alpha, beta }),
            SystemSpec::Trap { lambda } => Some(ModelSpec::Trap { lambda }),
            SystemSpec::Custom { .. } => None,
        }
    }

    /// Drift, coupling with entries up to `extent`, and constants if known.
    pub fn build(&self, extent: usize) -> Result<BuiltSystem> {
        if let Some(spec) = self.model_spec() {
            let m: Model = spec.build(extent)?;
            return Ok(BuiltSystem {
                name: m.name,
                drift: m.drift,
                coupling: m.coupling,
                constants: Some(m.constants),
                info: m.info,
            });
        }
        let SystemSpec::Custom {
            eigenvalues,
            triplets,
            constants,
        } = self
        else {
            unreachable!()
        };
        let drift = SpectralDrift::explicit(eigenvalues.clone())?;
        let coupling = CouplingOperator::from_triplets(
            eigenvalues.len(),
            triplets.iter().map(|&(j, k, re, im)| (j, k, C64::new(re, im))),
        )?;
        if let Some(c) = constants {
            c.validate()?;
        }
        Ok(BuiltSystem {
            name: "custom".into(),
            drift,
            coupling,
            constants: constants.clone(),
            info: ModelInfo::default(),
        })
    }
}

#[derive(Debug, Clone)]
pub struct BuiltSystem {
    pub name: String,
    pub drift: SpectralDrift,
    pub coupling: CouplingOperator,
    pub constants: Option<Constants>,
    pub info: ModelInfo,
}

impl BuiltSystem {
    pub fn at(&self, n: usize, delta: f64) -> Result<GalerkinSystem> {
        let sys = compress(&self.drift, &self.coupling, n)?;
        match &self.constants {
            Some(c) => sys.attach_constants(c.clone(), delta),
            None => Ok(sys),
        }
    }

    fn family(&self, delta: f64) -> Result<SystemFamily<'_>> {
        Ok(SystemFamily {
            drift: &self.drift,
            coupling: &self.coupling,
            constants: self.constants.as_ref().ok_or(Error::MissingConstants)?,
            delta,
        })
    }
}

/// Initial state: one basis level, a uniform superposition, or explicit
/// `[re, im]` coefficients.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StateSpec {
    Basis(usize),
    Levels(Vec<usize>),
    Coefficients(Vec<(f64, f64)>),
}

impl StateSpec {
    pub fn build(&self, n: usize) -> Result<StateVector> {
        match self {
            StateSpec::Basis(k) => StateVector::basis(n, *k),
            StateSpec::Levels(levels) => StateVector::uniform_superposition(n, levels),
            StateSpec::Coefficients(c) => {
                if c.len() > n {
                    return Err(Error::DimensionMismatch {
                        expected: n,
                        found: c.len(),
                    });
                }
                let v = c.iter().map(|&(re, im)| C64::new(re, im)).collect();
                Ok(StateVector::new(v)?.projected(n))
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ReportKind {
    Energy,
    Truncation,
    Gga,
    Switches,
    Relative,
}

fn default_delta() -> f64 {
    0.1
}

fn default_tol() -> f64 {
    1e-8
}

fn default_records() -> usize {
    100
}

/// Everything a run needs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub system: SystemSpec,
    pub n: usize,
    #[serde(default)]
    pub n_ref: Option<usize>,
    #[serde(default = "default_delta")]
    pub delta: f64,
    #[serde(default)]
    pub control: Option<ControlSpec>,
    /// Trap frequency `ω(t)`; replaces `control`.
    #[serde(default)]
    pub omega: Option<ControlSpec>,
    pub initial_state: StateSpec,
    /// Explicit record times; otherwise `0` and `record_count` uniform steps to `T`.
    #[serde(default)]
    pub record_times: Option<Vec<f64>>,
    #[serde(default = "default_records")]
    pub record_count: usize,
    #[serde(default)]
    pub reports: Vec<ReportKind>,
    /// Exponent `r` of the truncation report.
    #[serde(default)]
    pub r: f64,
    #[serde(default)]
    pub n_list: Vec<usize>,
    /// Stopping tolerance for sampled controls.
    #[serde(default = "default_tol")]
    pub tol: f64,
    #[serde(default)]
    pub seed: u64,
}

/// A parsed configuration and the hash of its bytes.
#[derive(Debug, Clone)]
pub struct LoadedConfig {
    pub config: RunConfig,
    pub hash: String,
}

impl LoadedConfig {
    pub fn from_path(path: &Path) -> Result<Self> {
        let bytes = fs::read(path).map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
        Self::from_bytes(&bytes)
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Self> {
        let config: RunConfig =
            serde_json::from_slice(bytes).map_err(|e| Error::Config(e.to_string()))?;
        config.validate()?;
        Ok(Self {
            config,
            hash: hex::encode(Sha256::digest(bytes)),
        })
    }
}

impl RunConfig {
    pub fn validate(&self) -> Result<()> {
        if self.n == 0 {
            return Err(Error::Config("n must be at least 1".into()));
        }
        if !(self.delta > 0.0 && self.delta < 1.0) {
            return Err(Error::Config(format!("delta = {} must lie in (0, 1)", self.delta)));
        }
        match (&self.system, &self.control, &self.omega) {
            (SystemSpec::Trap { .. }, None, Some(_)) => {}
            (SystemSpec::Trap { .. }, _, _) => {
                return Err(Error::Config("the trap takes its control as \"omega\" only".into()))
            }
            (_, Some(_), None) => {}
            _ => return Err(Error::Config("exactly one \"control\" is required".into())),
        }
        let needs_ref = self
            .reports
            .iter()
            .any(|r| matches!(r, ReportKind::Truncation | ReportKind::Gga));
        if let Some(n_ref) = self.n_ref {
            if needs_ref && n_ref <= self.n {
                return Err(Error::Config(format!("n_ref = {n_ref} must exceed n = {}", self.n)));
            }
        }
        if self.n_list.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::Config("n_list must be strictly increasing".into()));
        }
        Ok(())
    }

    pub fn reference_order(&self) -> usize {
        self.n_ref.unwrap_or_else(|| default_reference_order(self.n))
    }

    /// The control in the form `u` that enters `A + uB`.
    pub fn control(&self) -> Result<Control> {
        if let (SystemSpec::Trap { lambda }, Some(omega)) = (&self.system, &self.omega) {
            let omega = omega.build()?;
            let floor = omega.min_value();
            if floor.is_nan() || floor <= 0.0 {
                return Err(Error::InvalidControl(format!(
                    "ω must stay above a positive constant, but min ω = {floor}"
                )));
            }
            return omega.offset(-lambda);
        }
        self.control
            .as_ref()
            .ok_or_else(|| Error::Config("missing control".into()))?
            .build()
    }

    fn times(&self, duration: f64) -> Vec<f64> {
        match &self.record_times {
            Some(t) => t.clone(),
            None => {
                let m = self.record_count.max(1);
                (1..=m).map(|i| duration * i as f64 / m as f64).collect()
            }
        }
    }
}

/// Summary written next to the trajectory.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RunSummary {
    pub config_hash: String,
    pub model: String,
    pub n: usize,
    pub seed: u64,
    pub constants: Option<Constants>,
    pub info: ModelInfo,
    pub final_norm: f64,
    pub max_norm_drift: f64,
    /// `|c_k|` for the first levels.
    pub overlaps: Vec<f64>,
    pub duration: f64,
    pub intervals: usize,
    #[serde(default)]
    pub convergence: Option<ConvergenceRecord>,
    pub runtime_seconds: f64,
}

fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let text = serde_json::to_string_pretty(value)?;
    fs::write(path, text + "\n")?;
    Ok(())
}

fn ensure_dir(out: &Path) -> Result<()> {
    fs::create_dir_all(out)?;
    Ok(())
}

/// Propagates and writes `trajectory.csv` and `summary.json` into `out`.
pub fn cmd_simulate(loaded: &LoadedConfig, out: &Path) -> Result<RunSummary> {
    let start = Instant::now();
    let cfg = &loaded.config;
    let built = cfg.system.build(cfg.n)?;
    let sys = built.at(cfg.n, cfg.delta)?;
    let control = cfg.control()?;
    let u = control.to_piecewise_constant();
    let psi0 = cfg.initial_state.build(cfg.n)?;
    let traj = propagate_pc(&sys, &u, &psi0, &cfg.times(u.duration()))?;
    let convergence = match &control {
        Control::Sampled(s) => Some(propagate_bv(&sys, s, &psi0, cfg.tol, BvSchedule::default())?.record),
        Control::Pc(_) => None,
    };
    ensure_dir(out)?;
    let mut csv = Vec::new();
    traj.write_csv(&mut csv)?;
    fs::write(out.join("trajectory.csv"), csv)?;
    let norm0 = psi0.norm();
    let last = traj.final_state();
    let summary = RunSummary {
        config_hash: loaded.hash.clone(),
        model: built.name.clone(),
        n: cfg.n,
        seed: cfg.seed,
        constants: built.constants.clone(),
        info: built.info.clone(),
        final_norm: last.norm(),
        max_norm_drift: traj.diagnostics.iter().map(|d| (d.norm - norm0).abs()).fold(0.0, f64::max),
        overlaps: last.coefficients().iter().take(10).map(|c| c.norm()).collect(),
        duration: u.duration(),
        intervals: u.len(),
        convergence,
        runtime_seconds: start.elapsed().as_secs_f64(),
    };
    write_json(&out.join("summary.json"), &summary)?;
    Ok(summary)
}

/// Outcome of [`cmd_bounds`].
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct BoundsOutput {
    pub config_hash: String,
    pub reports: Vec<BoundReport>,
}

impl BoundsOutput {
    /// Reports with analytic constants that fail: these falsify the code.
    pub fn hard_failures(&self) -> Vec<&BoundReport> {
        self.reports.iter().filter(|r| r.is_hard_failure()).collect()
    }

    pub fn warnings(&self) -> Vec<&BoundReport> {
        self.reports
            .iter()
            .filter(|r| !r.satisfied && r.estimated_constants)
            .collect()
    }
}

/// Runs every requested report and writes `bounds.json` and `bounds.csv`.
pub fn cmd_bounds(loaded: &LoadedConfig, out: &Path) -> Result<BoundsOutput> {
    let cfg = &loaded.config;
    let n_ref = cfg.reference_order();
    let built = cfg.system.build(n_ref.max(cfg.n))?;
    let sys = built.at(cfg.n, cfg.delta)?;
    let u = cfg.control()?.to_piecewise_constant();
    let psi0 = cfg.initial_state.build(cfg.n)?;
    let times = cfg.times(u.duration());
    let mut reports = Vec::new();
    for kind in &cfg.reports {
        let report = match kind {
            ReportKind::Energy => verify_energy_bound(&sys, &u, &psi0, &times)?,
            ReportKind::Truncation => {
                verify_truncation(built.family(cfg.delta)?, &u, &psi0, cfg.n, n_ref, cfg.r, &times)?
            }
            ReportKind::Gga => verify_gga(built.family(cfg.delta)?, &u, &psi0, cfg.n, n_ref, &times)?,
            ReportKind::Switches => {
                let norm_b = built
                    .constants
                    .as_ref()
                    .and_then(|c| c.norm_b)
                    .ok_or_else(|| Error::Config("switch report needs a bounded coupling with known ‖B‖".into()))?;
                verify_switch_growth(&sys, &u, &psi0, norm_b)?
            }
            ReportKind::Relative => verify_relative_bound(&sys, 1.0, 256, cfg.seed)?,
        };
        reports.push(report);
    }
    ensure_dir(out)?;
    let output = BoundsOutput {
        config_hash: loaded.hash.clone(),
        reports,
    };
    write_json(&out.join("bounds.json"), &output)?;
    let mut csv = Vec::new();
    write_reports_csv(&output.reports, &mut csv)?;
    fs::write(out.join("bounds.csv"), csv)?;
    Ok(output)
}

/// One row of the convergence table.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ConvergenceRow {
    pub n: usize,
    pub measured: f64,
    pub bound: f64,
    pub uncertainty: f64,
}

/// Galerkin error against the reference for every `N` in `n_list`; writes
/// `converge.csv`. Cells run in parallel and are written once all finish.
pub fn cmd_converge(loaded: &LoadedConfig, n_list: &[usize], out: &Path) -> Result<Vec<ConvergenceRow>> {
    let cfg = &loaded.config;
    let list: Vec<usize> = if n_list.is_empty() { cfg.n_list.clone() } else { n_list.to_vec() };
    if list.is_empty() || list.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::Config("N list must be non-empty and strictly increasing".into()));
    }
    let max_n = *list.last().expect("non-empty");
    let n_ref = cfg.n_ref.unwrap_or_else(|| default_reference_order(max_n));
    if n_ref <= max_n {
        return Err(Error::Config(format!("n_ref = {n_ref} must exceed max N = {max_n}")));
    }
    let built = cfg.system.build(n_ref)?;
    let u = cfg.control()?.to_piecewise_constant();
    let psi0 = cfg.initial_state.build(list[0])?;
    let times = cfg.times(u.duration());
    let family = built.family(cfg.delta)?;
    let rows: Vec<ConvergenceRow> = list
        .par_iter()
        .map(|&n| {
            let r = verify_gga(family, &u, &psi0, n, n_ref, &times)?;
            Ok(ConvergenceRow {
                n,
                measured: r.measured,
                bound: r.bound,
                uncertainty: r.uncertainty,
            })
        })
        .collect::<Result<_>>()?;
    ensure_dir(out)?;
    let mut text = String::from("N,measured_error,gga_bound,reference_uncertainty\n");
    for r in &rows {
        text.push_str(&format!("{},{},{},{}\n", r.n, fmt_num(r.measured), fmt_num(r.bound), fmt_num(r.uncertainty)));
    }
    fs::write(out.join("converge.csv"), text)?;
    Ok(rows)
}

/// Output of [`cmd_switch_bound`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SwitchBoundOutput {
    pub k: usize,
    pub epsilon: f64,
    pub bound: f64,
    pub min_switches: usize,
    pub tv_bound: TvLowerBound,
    /// The same TV bound at `ε = 0`.
    pub tv_bound_exact_target: TvLowerBound,
}

impl std::fmt::Display for SwitchBoundOutput {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        writeln!(
            f,
            "switch lower bound (k = {}, eps = {}): {:.4} -> at least {} switches",
            self.k, self.epsilon, self.bound, self.min_switches
        )?;
        let tv = |b: &TvLowerBound| {
            if b.vacuous {
                "0 (vacuous)".to_string()
            } else {
                format!("{:.4}", b.value)
            }
        };
        write!(
            f,
            "bang-bang TV lower bound: {} at eps = {}, {} at eps = 0",
            tv(&self.tv_bound),
            self.epsilon,
            tv(&self.tv_bound_exact_target)
        )
    }
}

/// Switches needed to reach an `ε`-neighbourhood of `φ_k` from `φ_1`.
/// Models other than the rotor use the generic formula and need `‖B‖`.
pub fn cmd_switch_bound(k: usize, epsilon: f64, system: &SystemSpec) -> Result<SwitchBoundOutput> {
    let bound = match system {
        SystemSpec::Rotor => rotor_switch_count_lower_bound(k, epsilon)?,
        other => {
            let built = other.build(k.max(2))?;
            let norm_b = built
                .constants
                .as_ref()
                .and_then(|c| c.norm_b)
                .ok_or_else(|| Error::Config(format!("{} has no bounded coupling norm", built.name)))?;
            switch_count_lower_bound(k, epsilon, norm_b, built.drift.eigenvalue(1)?, built.drift.eigenvalue(k)?)?
        }
    };
    Ok(SwitchBoundOutput {
        k,
        epsilon,
        bound,
        min_switches: min_switches(bound),
        tv_bound: bang_bang_tv_lower_bound(epsilon)?,
        tv_bound_exact_target: bang_bang_tv_lower_bound(0.0)?,
    })
}

/// One steering run of the rotor demo.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RotorDemoRow {
    pub n: usize,
    pub overlap_1: f64,
    pub overlap_2: f64,
    pub nine_over_n: f64,
    pub norm_drift: f64,
}

/// Steers `φ_1` with `cos(3t)/n` over `[0, 2πn]` for each `n`, at order
/// `order`; writes `rotor_demo.csv`.
pub fn rotor_demo(ns: &[usize], order: usize, out: &Path) -> Result<Vec<RotorDemoRow>> {
    let built = SystemSpec::Rotor.build(order)?;
    let sys = built.at(order, default_delta())?;
    let rows: Vec<RotorDemoRow> = ns
        .par_iter()
        .map(|&n| {
            let u = rotor_steering_control(n)?.to_step_control();
            let psi0 = StateVector::basis(order, 1)?;
            let traj = propagate_pc(&sys, &u, &psi0, &[u.duration()])?;
            let last = traj.final_state();
            Ok(RotorDemoRow {
                n,
                overlap_1: last.coefficients()[0].norm(),
                overlap_2: last.coefficients()[1].norm(),
                nine_over_n: 9.0 / n as f64,
                norm_drift: (last.norm() - 1.0).abs(),
            })
        })
        .collect::<Result<_>>()?;
    ensure_dir(out)?;
    let mut text = String::from("n,overlap_1,overlap_2,nine_over_n,norm_drift\n");
    for r in &rows {
        text.push_str(&format!(
            "{},{},{},{},{}\n",
            r.n,
            fmt_num(r.overlap_1),
            fmt_num(r.overlap_2),
            fmt_num(r.nine_over_n),
            fmt_num(r.norm_drift)
        ));
    }
    fs::write(out.join("rotor_demo.csv"), text)?;
    Ok(rows)
}

/// Resolves `--config`, failing with a usage message when absent.
pub fn require_config(path: Option<&PathBuf>, seed: Option<u64>) -> Result<LoadedConfig> {
    let path = path.ok_or_else(|| Error::Config("--config <path> is required".into()))?;
    let mut loaded = LoadedConfig::from_path(path)?;
    if let Some(s) = seed {
        loaded.config.seed = s;
    }
    Ok(loaded)
}
