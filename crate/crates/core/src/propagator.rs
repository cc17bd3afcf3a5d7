//! Propagators of the Galerkin system `dψ/dt = (A_N + u(t) B_N) ψ`.
//!
//! Piecewise-constant controls are handled exactly: each constant stretch is
//! one matrix exponential obtained from the eigendecomposition of the
//! Hermitian generator `H(u) = i(A_N + u B_N)`, so `e^{dt(A_N + uB_N)} =
//! V e^{-i dt Θ} V*` is unitary up to rounding whatever the step length.
//! Sampled BV controls are reached as limits of left-hold approximants on
//! doubling grids.

use std::collections::HashMap;
use std::io::Write;

use nalgebra::DVector;
use serde::{Deserialize, Serialize};

use crate::controls::{check_admissible, ControlSignal, PiecewiseConstantControl, SampledBVControl, TvConvention};
use crate::error::{ensure_domain, Error, Result};
use crate::estimates;
use crate::linalg::{vector_norm, CMatrix, HermitianEigen, C64};
use crate::operators::GalerkinSystem;

/// Upper bound on the memory kept in the per-value eigendecomposition cache.
const CACHE_BYTES: usize = 64 << 20;

/// Coefficients `c_j = <φ_j, ψ>`, `j = 1..=N`.
#[derive(Debug, Clone, PartialEq)]
pub struct StateVector {
    coefficients: Vec<C64>,
}

impl StateVector {
    pub fn new(coefficients: Vec<C64>) -> Result<Self> {
        if coefficients.is_empty() {
            return Err(Error::InvalidControl("state must have at least one coefficient".into()));
        }
        if coefficients.iter().any(|c| !c.re.is_finite() || !c.im.is_finite()) {
            return Err(Error::Numerical("state has non-finite coefficients".into()));
        }
        Ok(Self { coefficients })
    }

    /// `φ_k` in an order-`n` basis.
    pub fn basis(n: usize, k: usize) -> Result<Self> {
        if k == 0 || k > n {
            return Err(Error::IndexOutOfRange { index: k, order: n });
        }
        let mut c = vec![C64::new(0.0, 0.0); n];
        c[k - 1] = C64::new(1.0, 0.0);
        Ok(Self { coefficients: c })
    }

    /// Normalised `Σ_k φ_k` over the given levels.
    pub fn uniform_superposition(n: usize, levels: &[usize]) -> Result<Self> {
        let mut c = vec![C64::new(0.0, 0.0); n];
        for &k in levels {
            if k == 0 || k > n {
                return Err(Error::IndexOutOfRange { index: k, order: n });
            }
            c[k - 1] += C64::new(1.0, 0.0);
        }
        Self::new(c)?.normalized()
    }

    pub fn normalized(&self) -> Result<Self> {
        let norm = self.norm();
        if norm == 0.0 {
            return Err(Error::Numerical("cannot normalise the zero state".into()));
        }
        Ok(Self {
            coefficients: self.coefficients.iter().map(|c| c / norm).collect(),
        })
    }

    pub fn order(&self) -> usize {
        self.coefficients.len()
    }

    pub fn coefficients(&self) -> &[C64] {
        &self.coefficients
    }

    pub fn norm(&self) -> f64 {
        vector_norm(&self.coefficients)
    }

    /// `‖ψ - φ‖`, zero-padding the shorter state.
    pub fn distance(&self, other: &Self) -> f64 {
        let n = self.order().max(other.order());
        let zero = C64::new(0.0, 0.0);
        (0..n)
            .map(|i| {
                let a = self.coefficients.get(i).copied().unwrap_or(zero);
                let b = other.coefficients.get(i).copied().unwrap_or(zero);
                (a - b).norm_sqr()
            })
            .sum::<f64>()
            .sqrt()
    }

    /// `π_n ψ` as an order-`n` state, zero-padding when `n` exceeds the order.
    pub fn projected(&self, n: usize) -> Self {
        let mut c = self.coefficients.clone();
        c.resize(n, C64::new(0.0, 0.0));
        Self { coefficients: c }
    }

    /// `‖(Id - π_n) ψ‖` weighted by `weights[j]^r`.
    pub fn tail_norm(&self, n: usize, weights: &[f64], r: f64) -> f64 {
        self.coefficients
            .iter()
            .zip(weights)
            .skip(n)
            .map(|(c, w)| c.norm_sqr() * w.powf(2.0 * r))
            .sum::<f64>()
            .sqrt()
    }

    pub fn scaled(&self, z: C64) -> Self {
        Self {
            coefficients: self.coefficients.iter().map(|c| c * z).collect(),
        }
    }
}

/// `c_k`, 1-based.
pub fn overlap(state: &StateVector, k: usize) -> Result<C64> {
    if k == 0 || k > state.order() {
        return Err(Error::IndexOutOfRange {
            index: k,
            order: state.order(),
        });
    }
    Ok(state.coefficients[k - 1])
}

/// Per-time norms.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Diagnostic {
    pub norm: f64,
    /// `‖|A_N|^r ψ‖` for each requested `r`.
    pub homogeneous: Vec<f64>,
    /// `‖(1 + |A_N|)^r ψ‖` for each requested `r`.
    pub sobolev: Vec<f64>,
}

/// `t ↦ Υ^u_{t,0} ψ_0` sampled at record times.
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub times: Vec<f64>,
    pub states: Vec<StateVector>,
    pub diagnostics: Vec<Diagnostic>,
    /// Exponents used for the diagnostics.
    pub exponents: Vec<f64>,
}

impl Trajectory {
    pub fn final_state(&self) -> &StateVector {
        self.states.last().expect("trajectory holds the initial state")
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    /// `‖|A_N| ψ(t)‖` per record, if `r = 1` was requested.
    pub fn energy_norms(&self) -> Option<Vec<f64>> {
        let idx = self.exponents.iter().position(|&r| r == 1.0)?;
        Some(self.diagnostics.iter().map(|d| d.homogeneous[idx]).collect())
    }

    /// CSV with columns `t, re_c1, im_c1, ..., norm, h1_norm`.
    pub fn write_csv<W: Write>(&self, mut out: W) -> Result<()> {
        let n = self.states.first().map_or(0, |s| s.order());
        let mut header = vec!["t".to_string()];
        for k in 1..=n {
            header.push(format!("re_c{k}"));
            header.push(format!("im_c{k}"));
        }
        header.push("norm".into());
        header.push("h1_norm".into());
        writeln!(out, "{}", header.join(","))?;
        let h1 = self.energy_norms();
        for (i, (t, state)) in self.times.iter().zip(&self.states).enumerate() {
            let mut row = Vec::with_capacity(2 * n + 3);
            row.push(fmt_num(*t));
            for c in state.coefficients() {
                row.push(fmt_num(c.re));
                row.push(fmt_num(c.im));
            }
            row.push(fmt_num(self.diagnostics[i].norm));
            row.push(fmt_num(h1.as_ref().map_or(f64::NAN, |h| h[i])));
            writeln!(out, "{}", row.join(","))?;
        }
        Ok(())
    }
}

/// Locale-free, 17 significant digits.
pub fn fmt_num(x: f64) -> String {
    format!("{x:.16e}")
}

/// `exp(dt (A_N + u B_N))`.
pub fn step_unitary(system: &GalerkinSystem, u: f64, dt: f64) -> Result<CMatrix> {
    ensure_domain("dt", dt, dt >= 0.0, "[0, inf)")?;
    ensure_domain("u", u, true, "finite reals")?;
    Ok(system.hamiltonian_eigen(u)?.exp_matrix(dt))
}

/// Applies per-interval exponentials, reusing eigendecompositions across
/// intervals that share a control value.
pub struct Propagator<'a> {
    system: &'a GalerkinSystem,
    cache: HashMap<u64, HermitianEigen>,
    capacity: usize,
}

impl<'a> Propagator<'a> {
    pub fn new(system: &'a GalerkinSystem) -> Self {
        let n = system.order().max(1);
        Self {
            system,
            cache: HashMap::new(),
            capacity: (CACHE_BYTES / (16 * n * n)).max(1),
        }
    }

    pub fn system(&self) -> &GalerkinSystem {
        self.system
    }

    fn eigen(&mut self, u: f64) -> Result<&HermitianEigen> {
        let key = u.to_bits();
        if !self.cache.contains_key(&key) {
            if self.cache.len() >= self.capacity {
                self.cache.clear();
            }
            let eig = self.system.hamiltonian_eigen(u)?;
            self.cache.insert(key, eig);
        }
        Ok(&self.cache[&key])
    }

    /// `ψ ← exp(dt (A_N + u B_N)) ψ`; negative `dt` runs backwards.
    pub fn apply(&mut self, u: f64, dt: f64, psi: &mut [C64]) -> Result<()> {
        if dt == 0.0 {
            return Ok(());
        }
        self.eigen(u)?.apply_exp(dt, psi);
        Ok(())
    }

    /// Final state of the forward evolution under `control`.
    pub fn run(&mut self, control: &PiecewiseConstantControl, psi0: &StateVector) -> Result<StateVector> {
        self.check_order(psi0)?;
        let mut psi = psi0.coefficients.clone();
        for (a, b, u) in control.intervals() {
            self.apply(u, b - a, &mut psi)?;
        }
        StateVector::new(psi)
    }

    /// Inverse factors in reverse order: maps `Υ^u_T ψ_0` back to `ψ_0`.
    pub fn run_backward(&mut self, control: &PiecewiseConstantControl, psi_t: &StateVector) -> Result<StateVector> {
        self.check_order(psi_t)?;
        let mut psi = psi_t.coefficients.clone();
        let intervals: Vec<_> = control.intervals().collect();
        for &(a, b, u) in intervals.iter().rev() {
            self.apply(u, -(b - a), &mut psi)?;
        }
        StateVector::new(psi)
    }

    fn check_order(&self, psi: &StateVector) -> Result<()> {
        if psi.order() != self.system.order() {
            return Err(Error::DimensionMismatch {
                expected: self.system.order(),
                found: psi.order(),
            });
        }
        Ok(())
    }
}

fn diagnostic(system: &GalerkinSystem, psi: &[C64], exponents: &[f64]) -> Diagnostic {
    Diagnostic {
        norm: vector_norm(psi),
        homogeneous: exponents.iter().map(|&r| system.homogeneous_norm(psi, r)).collect(),
        sobolev: exponents.iter().map(|&r| system.sobolev_norm(psi, r)).collect(),
    }
}

fn check_control(system: &GalerkinSystem, control: &dyn ControlSignal) -> Result<()> {
    if let (Some(c), Some(delta)) = (system.constants(), system.delta()) {
        if c.a > 0.0 {
            check_admissible(control, delta, c.a)?;
        }
    }
    Ok(())
}

/// Trajectory of `ψ_0` under a piecewise-constant control, recorded at `t = 0`
/// and at every time in `record_times`.
pub fn propagate_pc(
    system: &GalerkinSystem,
    control: &PiecewiseConstantControl,
    psi0: &StateVector,
    record_times: &[f64],
) -> Result<Trajectory> {
    propagate_pc_with(system, control, psi0, record_times, &[1.0])
}

/// [`propagate_pc`] with diagnostics for the given exponents `r`.
pub fn propagate_pc_with(
    system: &GalerkinSystem,
    control: &PiecewiseConstantControl,
    psi0: &StateVector,
    record_times: &[f64],
    exponents: &[f64],
) -> Result<Trajectory> {
    check_control(system, control)?;
    let t_end = control.duration();
    let mut times: Vec<f64> = Vec::with_capacity(record_times.len() + 1);
    let slack = 4.0 * f64::EPSILON * t_end;
    for &t in record_times {
        if !(0.0..=t_end + slack).contains(&t) {
            return Err(Error::Domain {
                name: "record time",
                value: t,
                domain: "[0, T]",
            });
        }
        times.push(t.min(t_end));
    }
    times.push(0.0);
    times.sort_by(f64::total_cmp);
    times.dedup();

    let mut prop = Propagator::new(system);
    prop.check_order(psi0)?;
    let mut psi = psi0.coefficients.clone();
    let mut out_states = vec![psi0.clone()];
    let mut out_diag = vec![diagnostic(system, &psi, exponents)];
    let mut next = 1;
    for (a, b, u) in control.intervals() {
        let mut cursor = a;
        while next < times.len() && times[next] <= b {
            let t = times[next];
            prop.apply(u, t - cursor, &mut psi)?;
            cursor = t;
            out_states.push(StateVector::new(psi.clone())?);
            out_diag.push(diagnostic(system, &psi, exponents));
            next += 1;
        }
        prop.apply(u, b - cursor, &mut psi)?;
    }
    Ok(Trajectory {
        times,
        states: out_states,
        diagnostics: out_diag,
        exponents: exponents.to_vec(),
    })
}

/// Refinement settings for [`propagate_bv`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BvSchedule {
    /// First number of uniform subintervals.
    pub n0: usize,
    /// Maximum number of doublings after `n0`.
    pub max_refinements: usize,
}

impl Default for BvSchedule {
    fn default() -> Self {
        Self {
            n0: 64,
            max_refinements: 12,
        }
    }
}

/// Why the refinement loop stopped.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BvStop {
    /// Successive final states differed by less than the tolerance.
    Tolerance,
    /// The approximant reproduced the samples on a uniform grid exactly;
    /// every further refinement gives the same control.
    NativeResolution,
}

/// Audit trail of the Cauchy sequence built by [`propagate_bv`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConvergenceRecord {
    pub refinements: Vec<usize>,
    /// `‖Υ^{u_{2n}} ψ - Υ^{u_n} ψ‖` for successive refinements.
    pub increments: Vec<f64>,
    /// `‖u_{2n} - u_n‖_{L¹} · sup_s ‖B Υ^{u_n}_s ψ‖` with the supremum bounded
    /// through the energy estimate; `None` when no constants are attached.
    pub duhamel_bounds: Vec<Option<f64>>,
    pub l1_differences: Vec<f64>,
    pub stop: BvStop,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BvOutcome {
    pub state: StateVector,
    pub record: ConvergenceRecord,
}

/// Final state of `ψ_0` under a sampled BV control, as the limit of
/// left-hold approximants `u_n`, `n = n0, 2n0, 4n0, ...`.
pub fn propagate_bv(
    system: &GalerkinSystem,
    control: &SampledBVControl,
    psi0: &StateVector,
    tol: f64,
    schedule: BvSchedule,
) -> Result<BvOutcome> {
    ensure_domain("tol", tol, tol > 0.0, "(0, inf)")?;
    if schedule.n0 == 0 {
        return Err(Error::InvalidControl("n0 must be at least 1".into()));
    }
    check_control(system, control)?;
    let resolution = control.resolution();
    let uniform = control.is_uniform();
    let mut n = schedule.n0.min(resolution);
    let mut prop = Propagator::new(system);
    let mut coarse = control.pc_approximate(n)?;
    let mut prev = prop.run(&coarse, psi0)?;
    let mut record = ConvergenceRecord {
        refinements: vec![n],
        increments: Vec::new(),
        duhamel_bounds: Vec::new(),
        l1_differences: Vec::new(),
        stop: BvStop::Tolerance,
    };
    let psi_h1 = system.homogeneous_norm(psi0.coefficients(), 1.0);
    let psi_norm = psi0.norm();
    for _ in 0..schedule.max_refinements {
        if n == resolution && uniform {
            record.stop = BvStop::NativeResolution;
            return Ok(BvOutcome { state: prev, record });
        }
        let next_n = 2 * n;
        if next_n > resolution {
            break;
        }
        let fine = control.pc_approximate(next_n)?;
        let state = prop.run(&fine, psi0)?;
        let increment = state.distance(&prev);
        let l1 = fine.l1_distance(&coarse);
        let duhamel = system.require_constants().ok().map(|(c, delta)| {
            let tv = coarse.total_variation_with(TvConvention::FromRest);
            l1 * estimates::coupling_growth_bound(c, delta, tv, psi_h1, psi_norm)
        });
        record.refinements.push(next_n);
        record.increments.push(increment);
        record.l1_differences.push(l1);
        record.duhamel_bounds.push(duhamel);
        n = next_n;
        coarse = fine;
        prev = state;
        if increment < tol {
            record.stop = BvStop::Tolerance;
            return Ok(BvOutcome { state: prev, record });
        }
    }
    if n == resolution && uniform {
        record.stop = BvStop::NativeResolution;
        return Ok(BvOutcome { state: prev, record });
    }
    Err(Error::NoConvergence {
        refinements: record.refinements,
        increments: record.increments,
    })
}

/// Multiplies the state recorded at time `t` by `e^{iλt}`.
///
/// With `Υ^{u,λ}` the propagator of `A + iλ·Id`, `Υ^{u,λ}_t = e^{iλt} Υ^u_t`.
pub fn shift_phase(trajectory: &Trajectory, lambda: f64) -> Trajectory {
    let states = trajectory
        .times
        .iter()
        .zip(&trajectory.states)
        .map(|(&t, s)| s.scaled(C64::from_polar(1.0, lambda * t)))
        .collect();
    Trajectory {
        times: trajectory.times.clone(),
        states,
        diagnostics: trajectory.diagnostics.clone(),
        exponents: trajectory.exponents.clone(),
    }
}

/// `U ψ` for a dense matrix `U`.
pub fn apply_matrix(u: &CMatrix, psi: &StateVector) -> Result<StateVector> {
    if u.ncols() != psi.order() {
        return Err(Error::DimensionMismatch {
            expected: u.ncols(),
            found: psi.order(),
        });
    }
    let v = DVector::from_column_slice(psi.coefficients());
    StateVector::new((u * v).as_slice().to_vec())
}
