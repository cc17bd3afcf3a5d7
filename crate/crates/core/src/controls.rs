//! Bounded-variation control signals.
//!
//! Controls live on `[0, T]` and vanish for `t <= 0`. Two representations are
//! provided: exact piecewise-constant controls, and sampled controls that are
//! only known on a grid and get turned into piecewise-constant approximants by
//! left-endpoint holds.

use serde::{Deserialize, Serialize};

use crate::error::{ensure_domain, Error, Result};

/// Which boundary jumps a total variation includes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TvConvention {
    /// Jumps inside `[0, T]` only.
    Interior,
    /// Adds the jump from `u(0⁻) = 0`: the variation of `u` on `(-∞, T]`.
    FromRest,
    /// Adds both `u(0⁻) = 0` and `u(T⁺) = 0`: the variation over `ℝ` of the
    /// control extended by zero.
    Closed,
}

/// Functionals shared by every control representation.
pub trait ControlSignal {
    fn duration(&self) -> f64;
    fn sup_abs(&self) -> f64;
    fn total_variation_with(&self, convention: TvConvention) -> f64;
    fn l1_norm(&self) -> f64;

    /// Variation over the breakpoint partition, optionally with both
    /// boundary jumps to zero.
    fn total_variation(&self, include_boundary: bool) -> f64 {
        if include_boundary {
            self.total_variation_with(TvConvention::Closed)
        } else {
            self.total_variation_with(TvConvention::Interior)
        }
    }
}

fn variation(values: &[f64], convention: TvConvention) -> f64 {
    let interior: f64 = values.windows(2).map(|w| (w[1] - w[0]).abs()).sum();
    let first = values.first().map_or(0.0, |v| v.abs());
    let last = values.last().map_or(0.0, |v| v.abs());
    match convention {
        TvConvention::Interior => interior,
        TvConvention::FromRest => first + interior,
        TvConvention::Closed => first + interior + last,
    }
}

/// `u(t) = values[i]` on `[breakpoints[i], breakpoints[i+1])`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PiecewiseConstantControl {
    breakpoints: Vec<f64>,
    values: Vec<f64>,
}

impl PiecewiseConstantControl {
    pub fn new(breakpoints: Vec<f64>, values: Vec<f64>) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::InvalidControl("at least one interval is required".into()));
        }
        if breakpoints.len() != values.len() + 1 {
            return Err(Error::InvalidControl(format!(
                "{} values need {} breakpoints, got {}",
                values.len(),
                values.len() + 1,
                breakpoints.len()
            )));
        }
        if breakpoints[0] != 0.0 {
            return Err(Error::InvalidControl(format!(
                "first breakpoint must be 0, got {}",
                breakpoints[0]
            )));
        }
        if breakpoints.iter().any(|t| !t.is_finite()) {
            return Err(Error::InvalidControl("breakpoints must be finite".into()));
        }
        if let Some(i) = breakpoints.windows(2).position(|w| w[1] <= w[0]) {
            return Err(Error::InvalidControl(format!(
                "breakpoints must be strictly increasing (t_{} = {} >= t_{} = {})",
                i,
                breakpoints[i],
                i + 1,
                breakpoints[i + 1]
            )));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidControl("values must be finite".into()));
        }
        Ok(Self { breakpoints, values })
    }

    /// `u ≡ c` on `[0, duration]`.
    pub fn constant(c: f64, duration: f64) -> Result<Self> {
        Self::new(vec![0.0, duration], vec![c])
    }

    /// Piecewise constant with the given successive durations.
    pub fn from_durations(durations: &[f64], values: Vec<f64>) -> Result<Self> {
        let mut breakpoints = Vec::with_capacity(durations.len() + 1);
        let mut t = 0.0;
        breakpoints.push(t);
        for d in durations {
            t += d;
            breakpoints.push(t);
        }
        Self::new(breakpoints, values)
    }

    pub fn breakpoints(&self) -> &[f64] {
        &self.breakpoints
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// `(start, end, value)` per interval.
    pub fn intervals(&self) -> impl Iterator<Item = (f64, f64, f64)> + '_ {
        self.breakpoints
            .windows(2)
            .zip(&self.values)
            .map(|(w, &u)| (w[0], w[1], u))
    }

    /// `u(t)`, zero outside `[0, T)`.
    pub fn value_at(&self, t: f64) -> f64 {
        if t < 0.0 || t >= self.duration() {
            return 0.0;
        }
        let idx = self.breakpoints.partition_point(|&b| b <= t);
        self.values[idx - 1]
    }

    pub fn scaled(&self, s: f64) -> Self {
        Self {
            breakpoints: self.breakpoints.clone(),
            values: self.values.iter().map(|v| v * s).collect(),
        }
    }

    pub fn offset(&self, c: f64) -> Self {
        Self {
            breakpoints: self.breakpoints.clone(),
            values: self.values.iter().map(|v| v + c).collect(),
        }
    }

    /// Inserts extra breakpoints without changing the function.
    pub fn refined(&self, extra: &[f64]) -> Self {
        let t_end = self.duration();
        let mut pts: Vec<f64> = self
            .breakpoints
            .iter()
            .copied()
            .chain(extra.iter().copied().filter(|&t| t > 0.0 && t < t_end))
            .collect();
        pts.sort_by(f64::total_cmp);
        pts.dedup();
        let values = pts.windows(2).map(|w| self.value_at(w[0])).collect();
        Self {
            breakpoints: pts,
            values,
        }
    }

    /// Restriction to `[0, t]`, `0 < t <= T`.
    pub fn truncated(&self, t: f64) -> Result<Self> {
        ensure_domain("t", t, t > 0.0 && t <= self.duration(), "(0, T]")?;
        let mut breakpoints = vec![0.0];
        let mut values = Vec::new();
        for (a, b, u) in self.intervals() {
            if a >= t {
                break;
            }
            breakpoints.push(b.min(t));
            values.push(u);
        }
        Self::new(breakpoints, values)
    }

    /// Restriction to `[t, T]`, shifted to start at 0; `0 <= t < T`.
    pub fn tail_from(&self, t: f64) -> Result<Self> {
        ensure_domain("t", t, t >= 0.0 && t < self.duration(), "[0, T)")?;
        let mut breakpoints = vec![0.0];
        let mut values = Vec::new();
        for (_, b, u) in self.intervals() {
            if b <= t {
                continue;
            }
            breakpoints.push(b - t);
            values.push(u);
        }
        Self::new(breakpoints, values)
    }

    /// `∫_0^∞ |u - v| dt` with both controls extended by zero.
    pub fn l1_distance(&self, other: &Self) -> f64 {
        let mut pts: Vec<f64> = self
            .breakpoints
            .iter()
            .chain(&other.breakpoints)
            .copied()
            .collect();
        pts.sort_by(f64::total_cmp);
        pts.dedup();
        pts.windows(2)
            .map(|w| (self.value_at(w[0]) - other.value_at(w[0])).abs() * (w[1] - w[0]))
            .sum()
    }

    /// Number of value changes including the boundary jumps to and from zero.
    pub fn switch_count(&self) -> usize {
        let mut prev = 0.0;
        let mut count = 0;
        for &v in self.values.iter().chain(std::iter::once(&0.0)) {
            if v != prev {
                count += 1;
            }
            prev = v;
        }
        count
    }
}

impl ControlSignal for PiecewiseConstantControl {
    fn duration(&self) -> f64 {
        *self.breakpoints.last().expect("validated non-empty")
    }

    fn sup_abs(&self) -> f64 {
        self.values.iter().map(|v| v.abs()).fold(0.0, f64::max)
    }

    fn total_variation_with(&self, convention: TvConvention) -> f64 {
        variation(&self.values, convention)
    }

    fn l1_norm(&self) -> f64 {
        self.intervals().map(|(a, b, u)| u.abs() * (b - a)).sum()
    }
}

/// A control known through samples `u(grid[i]) = samples[i]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SampledBVControl {
    grid: Vec<f64>,
    samples: Vec<f64>,
    declared_tv: Option<f64>,
}

/// Tolerance for `TV(samples) <= declared_tv`.
const DECLARED_TV_SLACK: f64 = 1e-9;

impl SampledBVControl {
    pub fn new(grid: Vec<f64>, samples: Vec<f64>, declared_tv: Option<f64>) -> Result<Self> {
        if grid.len() < 2 {
            return Err(Error::InvalidControl("a sampled control needs at least two grid points".into()));
        }
        if grid.len() != samples.len() {
            return Err(Error::InvalidControl(format!(
                "grid has {} points but {} samples were given",
                grid.len(),
                samples.len()
            )));
        }
        if grid[0] != 0.0 {
            return Err(Error::InvalidControl(format!("grid must start at 0, got {}", grid[0])));
        }
        if grid.iter().any(|t| !t.is_finite()) || grid.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::InvalidControl("grid must be finite and strictly increasing".into()));
        }
        if samples.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidControl("samples must be finite".into()));
        }
        let control = Self {
            grid,
            samples,
            declared_tv,
        };
        if let Some(tv) = declared_tv {
            ensure_domain("declared_tv", tv, tv >= 0.0, "[0, inf)")?;
            let sampled = control.total_variation_with(TvConvention::Interior);
            if sampled > tv * (1.0 + DECLARED_TV_SLACK) + DECLARED_TV_SLACK {
                return Err(Error::InvalidControl(format!(
                    "samples vary by {sampled}, more than the declared total variation {tv}"
                )));
            }
        }
        Ok(control)
    }

    /// `amplitude · cos(frequency · t)` on `resolution` uniform intervals of
    /// `[0, duration]`, with the exact interior variation declared.
    pub fn cosine(amplitude: f64, frequency: f64, duration: f64, resolution: usize) -> Result<Self> {
        ensure_domain("duration", duration, duration > 0.0, "(0, inf)")?;
        ensure_domain("frequency", frequency, frequency.is_finite(), "finite")?;
        if resolution == 0 {
            return Err(Error::InvalidControl("resolution must be at least 1".into()));
        }
        let grid = uniform_grid(duration, resolution);
        let samples = grid.iter().map(|t| amplitude * (frequency * t).cos()).collect();
        Self::new(grid, samples, Some(cosine_total_variation(amplitude, frequency, duration)))
    }

    /// Samples `f` on `resolution` uniform intervals of `[0, duration]`.
    pub fn from_fn(
        duration: f64,
        resolution: usize,
        declared_tv: Option<f64>,
        f: impl Fn(f64) -> f64,
    ) -> Result<Self> {
        ensure_domain("duration", duration, duration > 0.0, "(0, inf)")?;
        if resolution == 0 {
            return Err(Error::InvalidControl("resolution must be at least 1".into()));
        }
        let grid = uniform_grid(duration, resolution);
        let samples = grid.iter().map(|&t| f(t)).collect();
        Self::new(grid, samples, declared_tv)
    }

    pub fn grid(&self) -> &[f64] {
        &self.grid
    }

    pub fn samples(&self) -> &[f64] {
        &self.samples
    }

    pub fn declared_tv(&self) -> Option<f64> {
        self.declared_tv
    }

    /// Number of grid intervals.
    pub fn resolution(&self) -> usize {
        self.grid.len() - 1
    }

    /// Largest grid spacing, the step reported for trapezoid quadrature.
    pub fn max_step(&self) -> f64 {
        self.grid.windows(2).map(|w| w[1] - w[0]).fold(0.0, f64::max)
    }

    pub fn is_uniform(&self) -> bool {
        let h = self.duration() / self.resolution() as f64;
        self.grid
            .windows(2)
            .all(|w| ((w[1] - w[0]) - h).abs() <= 1e-9 * h)
    }

    /// `u + c`; the declared interior variation is unchanged.
    pub fn offset(&self, c: f64) -> Result<Self> {
        Self::new(
            self.grid.clone(),
            self.samples.iter().map(|v| v + c).collect(),
            self.declared_tv,
        )
    }

    pub fn scaled(&self, s: f64) -> Self {
        Self {
            grid: self.grid.clone(),
            samples: self.samples.iter().map(|v| v * s).collect(),
            declared_tv: self.declared_tv.map(|tv| tv * s.abs()),
        }
    }

    pub fn min_sample(&self) -> f64 {
        self.samples.iter().copied().fold(f64::INFINITY, f64::min)
    }

    /// The step function holding each sample over its own grid interval.
    pub fn to_step_control(&self) -> PiecewiseConstantControl {
        PiecewiseConstantControl {
            breakpoints: self.grid.clone(),
            values: self.samples[..self.samples.len() - 1].to_vec(),
        }
    }

    /// Left-endpoint hold on `n` uniform subintervals of `[0, T]`.
    ///
    /// Each subinterval takes the last sample at or before its left end, so
    /// the output is a point-sampling of the input and its variation never
    /// exceeds that of the samples.
    pub fn pc_approximate(&self, n: usize) -> Result<PiecewiseConstantControl> {
        if n == 0 {
            return Err(Error::InvalidControl("n must be at least 1".into()));
        }
        if n > self.resolution() {
            return Err(Error::InsufficientResolution {
                requested: n,
                available: self.resolution(),
            });
        }
        let t_end = self.duration();
        let breakpoints = uniform_grid(t_end, n);
        let slack = 1e-12 * t_end;
        let values = breakpoints[..n]
            .iter()
            .map(|&t| {
                let idx = self.grid.partition_point(|&g| g <= t + slack);
                self.samples[idx.saturating_sub(1)]
            })
            .collect();
        PiecewiseConstantControl::new(breakpoints, values)
    }
}

impl ControlSignal for SampledBVControl {
    fn duration(&self) -> f64 {
        *self.grid.last().expect("validated non-empty")
    }

    fn sup_abs(&self) -> f64 {
        self.samples.iter().map(|v| v.abs()).fold(0.0, f64::max)
    }

    fn total_variation_with(&self, convention: TvConvention) -> f64 {
        variation(&self.samples, convention)
    }

    /// Trapezoid rule on `|u|` over the grid.
    fn l1_norm(&self) -> f64 {
        self.grid
            .windows(2)
            .zip(self.samples.windows(2))
            .map(|(t, u)| 0.5 * (u[0].abs() + u[1].abs()) * (t[1] - t[0]))
            .sum()
    }
}

/// `i · T / n` for `i = 0..=n`, with the last point exactly `T`.
pub fn uniform_grid(duration: f64, n: usize) -> Vec<f64> {
    let mut grid: Vec<f64> = (0..=n).map(|i| duration * i as f64 / n as f64).collect();
    grid[n] = duration;
    grid
}

/// Exact variation of `A cos(ω t)` on `[0, T]`.
pub fn cosine_total_variation(amplitude: f64, frequency: f64, duration: f64) -> f64 {
    let theta = (frequency * duration).abs();
    let half_periods = (theta / std::f64::consts::PI).floor();
    let rest = theta - half_periods * std::f64::consts::PI;
    amplitude.abs() * (2.0 * half_periods + 1.0 - rest.cos())
}

/// `true` iff `sup |u| < (1 - δ)/a`; every bounded control is admissible when `a = 0`.
pub fn is_admissible<C: ControlSignal + ?Sized>(u: &C, delta: f64, a: f64) -> bool {
    if a == 0.0 {
        return u.sup_abs().is_finite();
    }
    u.sup_abs() < admissibility_threshold(delta, a)
}

/// `(1 - δ)/a`.
pub fn admissibility_threshold(delta: f64, a: f64) -> f64 {
    if a == 0.0 {
        f64::INFINITY
    } else {
        (1.0 - delta) / a
    }
}

/// [`is_admissible`] as a `Result` carrying the numbers.
pub fn check_admissible<C: ControlSignal + ?Sized>(u: &C, delta: f64, a: f64) -> Result<()> {
    ensure_domain("delta", delta, delta > 0.0 && delta < 1.0, "(0, 1)")?;
    ensure_domain("a", a, a >= 0.0, "[0, inf)")?;
    if is_admissible(u, delta, a) {
        Ok(())
    } else {
        Err(Error::Inadmissible {
            sup: u.sup_abs(),
            threshold: admissibility_threshold(delta, a),
            delta,
            a,
        })
    }
}

/// Either representation.
#[derive(Debug, Clone, PartialEq)]
pub enum Control {
    Pc(PiecewiseConstantControl),
    Sampled(SampledBVControl),
}

impl Control {
    /// Exact step representation: PC controls as they are, sampled ones held
    /// over their own grid.
    pub fn to_piecewise_constant(&self) -> PiecewiseConstantControl {
        match self {
            Control::Pc(u) => u.clone(),
            Control::Sampled(u) => u.to_step_control(),
        }
    }

    pub fn offset(&self, c: f64) -> Result<Self> {
        Ok(match self {
            Control::Pc(u) => Control::Pc(u.offset(c)),
            Control::Sampled(u) => Control::Sampled(u.offset(c)?),
        })
    }

    /// Smallest value taken.
    pub fn min_value(&self) -> f64 {
        match self {
            Control::Pc(u) => u.values().iter().copied().fold(f64::INFINITY, f64::min),
            Control::Sampled(u) => u.min_sample(),
        }
    }
}

impl ControlSignal for Control {
    fn duration(&self) -> f64 {
        match self {
            Control::Pc(u) => u.duration(),
            Control::Sampled(u) => u.duration(),
        }
    }

    fn sup_abs(&self) -> f64 {
        match self {
            Control::Pc(u) => u.sup_abs(),
            Control::Sampled(u) => u.sup_abs(),
        }
    }

    fn total_variation_with(&self, convention: TvConvention) -> f64 {
        match self {
            Control::Pc(u) => u.total_variation_with(convention),
            Control::Sampled(u) => u.total_variation_with(convention),
        }
    }

    fn l1_norm(&self) -> f64 {
        match self {
            Control::Pc(u) => u.l1_norm(),
            Control::Sampled(u) => u.l1_norm(),
        }
    }
}

/// JSON control specification.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ControlSpec {
    Pc {
        breakpoints: Vec<f64>,
        values: Vec<f64>,
    },
    Sampled {
        grid: Vec<f64>,
        samples: Vec<f64>,
        #[serde(default)]
        declared_tv: Option<f64>,
    },
    Analytic {
        form: AnalyticForm,
        amplitude: f64,
        frequency: f64,
        duration: f64,
        resolution: usize,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AnalyticForm {
    Cosine,
}

impl ControlSpec {
    pub fn build(&self) -> Result<Control> {
        Ok(match self {
            ControlSpec::Pc {
                breakpoints,
                values,
            } => Control::Pc(PiecewiseConstantControl::new(breakpoints.clone(), values.clone())?),
            ControlSpec::Sampled {
                grid,
                samples,
                declared_tv,
            } => Control::Sampled(SampledBVControl::new(grid.clone(), samples.clone(), *declared_tv)?),
            ControlSpec::Analytic {
                form: AnalyticForm::Cosine,
                amplitude,
                frequency,
                duration,
                resolution,
            } => Control::Sampled(SampledBVControl::cosine(
                *amplitude,
                *frequency,
                *duration,
                *resolution,
            )?),
        })
    }
}
