//! Spectral data for the drift `A`, coupling matrices for `B`, and their
//! order-`N` Galerkin compressions.
//!
//! Basis levels are 1-based throughout the public API: `φ_1` is the lowest
//! eigenvector of `iA`, and coupling entries are addressed as `b[j,k]` with
//! `1 <= j, k`. Dense matrices returned by this module are 0-based as usual.

use std::collections::BTreeMap;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{ensure_domain, Error, Result};
use crate::estimates::BoundReport;
use crate::linalg::{
    dense_hermitian_eigen, tridiagonal_hermitian_eigen, vector_norm, CMatrix, HermitianEigen, C64,
};

/// Relative tolerance used when checking `b[j,k] = -conj(b[k,j])`.
const SKEW_TOL: f64 = 1e-14;

/// Closed-form eigenvalue sequences `λ_j`, `j >= 1`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "law", rename_all = "snake_case")]
pub enum EigenvalueLaw {
    /// `λ_j = j²` (planar rotor, sine basis).
    Squares,
    /// `λ_j = (2j - 1)^α` (anharmonic oscillator, Hermite level `j - 1`).
    OddPower { alpha: u32 },
    /// `λ_j = (4j - 3) λ` (trap restricted to even Hermite functions, level `2(j - 1)`).
    EvenHermite { lambda: f64 },
    /// A finite, explicitly stored list.
    Explicit { values: Vec<f64> },
}

/// The skew-adjoint drift `A`, stored through its spectrum: `A φ_j = -i λ_j φ_j`.
///
/// The optional `shift` realises `A + i·shift·Id`, whose eigenvalues are
/// `λ_j - shift`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpectralDrift {
    law: EigenvalueLaw,
    #[serde(default)]
    shift: f64,
}

impl SpectralDrift {
    pub fn squares() -> Self {
        Self {
            law: EigenvalueLaw::Squares,
            shift: 0.0,
        }
    }

    pub fn odd_power(alpha: u32) -> Self {
        Self {
            law: EigenvalueLaw::OddPower { alpha },
            shift: 0.0,
        }
    }

    pub fn even_hermite(lambda: f64) -> Result<Self> {
        ensure_domain("lambda", lambda, lambda > 0.0, "(0, inf)")?;
        Ok(Self {
            law: EigenvalueLaw::EvenHermite { lambda },
            shift: 0.0,
        })
    }

    /// Explicit eigenvalues, which must be finite, non-decreasing and growing.
    pub fn explicit(values: Vec<f64>) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::InvalidSpectrum("no eigenvalues supplied".into()));
        }
        let drift = Self {
            law: EigenvalueLaw::Explicit { values },
            shift: 0.0,
        };
        drift.validate_prefix(drift.available().unwrap_or(1))?;
        Ok(drift)
    }

    pub fn law(&self) -> &EigenvalueLaw {
        &self.law
    }

    pub fn shift(&self) -> f64 {
        self.shift
    }

    /// The drift `A + iλ·Id`. Its propagators differ from those of `A` by the
    /// global phase `e^{iλt}`.
    pub fn shifted(&self, lambda: f64) -> Self {
        Self {
            law: self.law.clone(),
            shift: self.shift + lambda,
        }
    }

    /// Number of eigenvalues the drift can produce, `None` when unbounded.
    pub fn available(&self) -> Option<usize> {
        match &self.law {
            EigenvalueLaw::Explicit { values } => Some(values.len()),
            _ => None,
        }
    }

    /// `λ_j` for `j >= 1`.
    pub fn eigenvalue(&self, j: usize) -> Result<f64> {
        if j == 0 {
            return Err(Error::IndexOutOfRange {
                index: 0,
                order: self.available().unwrap_or(usize::MAX),
            });
        }
        let base = match &self.law {
            EigenvalueLaw::Squares => (j as f64).powi(2),
            EigenvalueLaw::OddPower { alpha } => ((2 * j - 1) as f64).powi(*alpha as i32),
            EigenvalueLaw::EvenHermite { lambda } => (4 * j - 3) as f64 * lambda,
            EigenvalueLaw::Explicit { values } => {
                *values.get(j - 1).ok_or(Error::EigenvalueExtent {
                    index: j,
                    available: values.len(),
                })?
            }
        };
        Ok(base - self.shift)
    }

    /// `λ_1, ..., λ_n`.
    pub fn prefix(&self, n: usize) -> Result<Vec<f64>> {
        (1..=n).map(|j| self.eigenvalue(j)).collect()
    }

    /// Checks the ordering and growth invariants on the first `n` eigenvalues.
    pub fn validate_prefix(&self, n: usize) -> Result<()> {
        let values = self.prefix(n)?;
        if let Some(bad) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::InvalidSpectrum(format!(
                "eigenvalue {} is not finite",
                bad + 1
            )));
        }
        if let Some(w) = values.windows(2).position(|w| w[1] < w[0]) {
            return Err(Error::InvalidSpectrum(format!(
                "eigenvalues must be non-decreasing: λ_{} = {} > λ_{} = {}",
                w + 1,
                values[w],
                w + 2,
                values[w + 1]
            )));
        }
        if values.len() >= 2 && values[values.len() - 1] <= values[0] {
            return Err(Error::InvalidSpectrum(format!(
                "eigenvalues do not grow on the prefix of length {}",
                values.len()
            )));
        }
        Ok(())
    }

    /// Smallest nonnegative shift making every `λ_j + shift` positive.
    pub fn lower_bound_shift(&self) -> f64 {
        match self.eigenvalue(1) {
            Ok(l1) if l1 > 0.0 => 0.0,
            Ok(l1) => 1.0 - l1,
            Err(_) => 0.0,
        }
    }

    /// Spectral weights `|λ_j|` for `|A|`, after the lower-bound shift.
    pub fn weights(&self, n: usize) -> Result<Vec<f64>> {
        let shift = self.lower_bound_shift();
        Ok(self.prefix(n)?.into_iter().map(|l| l + shift).collect())
    }

    /// `inf_{j>N} λ_j`, which is `λ_{N+1}` by ordering, shifted like [`Self::weights`].
    pub fn lambda_next(&self, n: usize) -> Result<f64> {
        Ok(self.eigenvalue(n + 1)? + self.lower_bound_shift())
    }
}

/// Band structure of a coupling matrix.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Bandwidth {
    Banded(usize),
    Dense,
}

impl Bandwidth {
    pub fn is_tridiagonal(self) -> bool {
        matches!(self, Bandwidth::Banded(w) if w <= 1)
    }
}

impl std::fmt::Display for Bandwidth {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Bandwidth::Banded(w) => write!(f, "{w}"),
            Bandwidth::Dense => write!(f, "dense"),
        }
    }
}

/// Matrix of `B` in the eigenbasis of `A`: `b[j,k] = <φ_j, B φ_k>`.
///
/// Entries are known for `1 <= j, k <= extent`; missing entries are zero.
#[derive(Debug, Clone, PartialEq)]
pub struct CouplingOperator {
    entries: BTreeMap<(usize, usize), C64>,
    extent: usize,
    bandwidth: Bandwidth,
}

impl CouplingOperator {
    pub fn zero(extent: usize) -> Self {
        Self {
            entries: BTreeMap::new(),
            extent,
            bandwidth: Bandwidth::Banded(0),
        }
    }

    /// Builds a coupling from 1-based `(j, k, b[j,k])` triplets.
    pub fn from_triplets<I>(extent: usize, triplets: I) -> Result<Self>
    where
        I: IntoIterator<Item = (usize, usize, C64)>,
    {
        let mut entries = BTreeMap::new();
        for (j, k, b) in triplets {
            if j == 0 || k == 0 || j > extent || k > extent {
                return Err(Error::IndexOutOfRange {
                    index: if j == 0 || k == 0 { 0 } else { j.max(k) },
                    order: extent,
                });
            }
            if !b.re.is_finite() || !b.im.is_finite() {
                return Err(Error::InvalidSpectrum(format!(
                    "coupling entry ({j},{k}) is not finite"
                )));
            }
            if b != C64::new(0.0, 0.0) {
                *entries.entry((j, k)).or_insert(C64::new(0.0, 0.0)) += b;
            }
        }
        let width = entries
            .keys()
            .map(|&(j, k)| j.abs_diff(k))
            .max()
            .unwrap_or(0);
        let op = Self {
            entries,
            extent,
            bandwidth: Bandwidth::Banded(width),
        };
        op.check_skew_hermitian()?;
        Ok(op)
    }

    /// Builds a coupling from a dense 0-based matrix.
    pub fn from_dense(matrix: &CMatrix) -> Result<Self> {
        let n = matrix.nrows();
        if matrix.ncols() != n {
            return Err(Error::InvalidSpectrum("coupling matrix must be square".into()));
        }
        let mut op = Self::from_triplets(
            n,
            (0..n).flat_map(|r| (0..n).map(move |c| (r + 1, c + 1, matrix[(r, c)]))),
        )?;
        op.bandwidth = Bandwidth::Dense;
        Ok(op)
    }

    fn check_skew_hermitian(&self) -> Result<()> {
        let scale = self
            .entries
            .values()
            .map(|b| b.norm())
            .fold(0.0, f64::max)
            .max(f64::MIN_POSITIVE);
        for (&(j, k), &bjk) in &self.entries {
            let bkj = self.entry(k, j);
            let target = -bkj.conj();
            if (bjk - target).norm() > SKEW_TOL * scale {
                return Err(Error::NotSkewHermitian {
                    j,
                    k,
                    bjk: format!("{bjk}"),
                    neg_conj_bkj: format!("{target}"),
                });
            }
        }
        Ok(())
    }

    pub fn extent(&self) -> usize {
        self.extent
    }

    pub fn bandwidth(&self) -> Bandwidth {
        self.bandwidth
    }

    /// `b[j,k]`, zero when not stored.
    pub fn entry(&self, j: usize, k: usize) -> C64 {
        self.entries
            .get(&(j, k))
            .copied()
            .unwrap_or(C64::new(0.0, 0.0))
    }

    pub fn triplets(&self) -> impl Iterator<Item = (usize, usize, C64)> + '_ {
        self.entries.iter().map(|(&(j, k), &b)| (j, k, b))
    }

    /// The operator `-B`.
    pub fn negated(&self) -> Self {
        Self {
            entries: self.entries.iter().map(|(&key, &b)| (key, -b)).collect(),
            extent: self.extent,
            bandwidth: self.bandwidth,
        }
    }

    /// Top-left `n x n` block as a dense 0-based matrix.
    pub fn matrix(&self, n: usize) -> Result<CMatrix> {
        if n > self.extent {
            return Err(Error::CouplingExtent {
                requested: n,
                available: self.extent,
            });
        }
        let mut m = CMatrix::zeros(n, n);
        for (&(j, k), &b) in self.entries.range((1, 1)..=(n, n)) {
            if k <= n {
                m[(j - 1, k - 1)] = b;
            }
        }
        Ok(m)
    }
}

/// Where a set of constants comes from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Provenance {
    /// Closed-form supremum supplied by the model.
    Analytic,
    /// Maximum over a finite prefix of coefficients; may under-estimate.
    Estimated,
}

impl Provenance {
    pub fn is_estimated(self) -> bool {
        self == Provenance::Estimated
    }

    pub fn combine(self, other: Self) -> Self {
        if self.is_estimated() || other.is_estimated() {
            Provenance::Estimated
        } else {
            Provenance::Analytic
        }
    }
}

/// Relative-bound constants: `‖Bψ‖ <= a‖Aψ‖ + b‖ψ‖` and `‖Bψ‖ <= d‖|A|^α ψ‖`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Constants {
    pub a: f64,
    pub b: f64,
    pub d: f64,
    pub alpha: f64,
    pub provenance: Provenance,
    /// Operator norm of `B` when `B` is bounded.
    #[serde(default)]
    pub norm_b: Option<f64>,
}

impl Constants {
    pub fn validate(&self) -> Result<()> {
        ensure_domain("a", self.a, self.a >= 0.0, "[0, inf)")?;
        ensure_domain("b", self.b, self.b >= 0.0, "[0, inf)")?;
        ensure_domain("d", self.d, self.d >= 0.0, "[0, inf)")?;
        ensure_domain("alpha", self.alpha, (0.0..=1.0).contains(&self.alpha), "[0, 1]")?;
        Ok(())
    }
}

/// Order-`N` compression `(π_N A π_N, π_N B π_N)` plus the constants that
/// govern admissibility and the a-priori bounds.
#[derive(Debug, Clone)]
pub struct GalerkinSystem {
    drift: SpectralDrift,
    eigenvalues: Vec<f64>,
    weights: Vec<f64>,
    coupling: CMatrix,
    bandwidth: Bandwidth,
    constants: Option<Constants>,
    delta: Option<f64>,
}

/// Order-`n` compression of `(A, B)`.
pub fn compress(
    drift: &SpectralDrift,
    coupling: &CouplingOperator,
    n: usize,
) -> Result<GalerkinSystem> {
    if n == 0 {
        return Err(Error::Domain {
            name: "N",
            value: 0.0,
            domain: "N >= 1",
        });
    }
    drift.validate_prefix(n)?;
    coupling.check_skew_hermitian()?;
    let eigenvalues = drift.prefix(n)?;
    let weights = drift.weights(n)?;
    let matrix = coupling.matrix(n)?;
    let bandwidth = match coupling.bandwidth() {
        Bandwidth::Dense => Bandwidth::Dense,
        Bandwidth::Banded(w) => Bandwidth::Banded(w.min(n.saturating_sub(1))),
    };
    Ok(GalerkinSystem {
        drift: drift.clone(),
        eigenvalues,
        weights,
        coupling: matrix,
        bandwidth,
        constants: None,
        delta: None,
    })
}

impl GalerkinSystem {
    pub fn order(&self) -> usize {
        self.eigenvalues.len()
    }

    pub fn drift(&self) -> &SpectralDrift {
        &self.drift
    }

    pub fn eigenvalues(&self) -> &[f64] {
        &self.eigenvalues
    }

    /// Diagonal of `|A_N|`.
    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn bandwidth(&self) -> Bandwidth {
        self.bandwidth
    }

    pub fn constants(&self) -> Option<&Constants> {
        self.constants.as_ref()
    }

    pub fn delta(&self) -> Option<f64> {
        self.delta
    }

    pub fn attach_constants(mut self, constants: Constants, delta: f64) -> Result<Self> {
        constants.validate()?;
        ensure_domain("delta", delta, delta > 0.0 && delta < 1.0, "(0, 1)")?;
        self.constants = Some(constants);
        self.delta = Some(delta);
        Ok(self)
    }

    /// `(constants, delta)`, or [`Error::MissingConstants`].
    pub fn require_constants(&self) -> Result<(&Constants, f64)> {
        match (&self.constants, self.delta) {
            (Some(c), Some(d)) => Ok((c, d)),
            _ => Err(Error::MissingConstants),
        }
    }

    /// Same system with the drift replaced by `A + iλ·Id`.
    pub fn shifted(&self, lambda: f64) -> Self {
        let drift = self.drift.shifted(lambda);
        let n = self.order();
        Self {
            eigenvalues: self.eigenvalues.iter().map(|l| l - lambda).collect(),
            weights: drift.weights(n).unwrap_or_else(|_| self.weights.clone()),
            drift,
            coupling: self.coupling.clone(),
            bandwidth: self.bandwidth,
            constants: self.constants.clone(),
            delta: self.delta,
        }
    }

    /// Same system with `B` replaced by `-B`.
    pub fn negated_coupling(&self) -> Self {
        let mut out = self.clone();
        out.coupling = -self.coupling.clone();
        out
    }

    /// `A_N = diag(-iλ_j)`.
    pub fn drift_matrix(&self) -> CMatrix {
        let n = self.order();
        CMatrix::from_fn(n, n, |r, c| {
            if r == c {
                C64::new(0.0, -self.eigenvalues[r])
            } else {
                C64::new(0.0, 0.0)
            }
        })
    }

    /// `B_N`.
    pub fn coupling_matrix(&self) -> &CMatrix {
        &self.coupling
    }

    /// Dense `H(u) = i(A_N + u B_N)`.
    pub fn hamiltonian(&self, u: f64) -> CMatrix {
        let i = C64::new(0.0, 1.0);
        (self.drift_matrix() + &self.coupling * C64::new(u, 0.0)) * i
    }

    /// Eigendecomposition of `H(u)`, through the gauged tri-diagonal solver
    /// when `B_N` has bandwidth at most one.
    pub fn hamiltonian_eigen(&self, u: f64) -> Result<HermitianEigen> {
        let n = self.order();
        let i = C64::new(0.0, 1.0);
        if self.bandwidth.is_tridiagonal() {
            let diag: Vec<f64> = (0..n)
                .map(|k| self.eigenvalues[k] + (i * self.coupling[(k, k)] * u).re)
                .collect();
            let upper: Vec<C64> = (0..n.saturating_sub(1))
                .map(|k| i * self.coupling[(k, k + 1)] * u)
                .collect();
            tridiagonal_hermitian_eigen(&diag, &upper)
        } else {
            dense_hermitian_eigen(&self.hamiltonian(u))
        }
    }

    /// `max |H(u) - H(u)*|` relative to `max |H(u)|`.
    pub fn hermiticity_defect(&self, u: f64) -> f64 {
        let h = self.hamiltonian(u);
        let scale = h.iter().map(|z| z.norm()).fold(0.0, f64::max).max(1.0);
        let diff = &h - h.adjoint();
        diff.iter().map(|z| z.norm()).fold(0.0, f64::max) / scale
    }

    /// `‖|A_N|^r ψ‖` with weights `λ_j^r`.
    pub fn homogeneous_norm(&self, psi: &[C64], r: f64) -> f64 {
        weighted_norm(psi, self.weights.iter().map(|w| w.powf(r)))
    }

    /// `‖(1 + |A_N|)^r ψ‖`.
    pub fn sobolev_norm(&self, psi: &[C64], r: f64) -> f64 {
        weighted_norm(psi, self.weights.iter().map(|w| (1.0 + w).powf(r)))
    }

    /// `‖B_N ψ‖`.
    pub fn coupling_norm(&self, psi: &[C64]) -> f64 {
        let v = nalgebra::DVector::from_column_slice(psi);
        (&self.coupling * v).norm()
    }
}

fn weighted_norm(psi: &[C64], weights: impl Iterator<Item = f64>) -> f64 {
    psi.iter()
        .zip(weights)
        .map(|(c, w)| c.norm_sqr() * w * w)
        .sum::<f64>()
        .sqrt()
}

/// Output of [`tridiagonal_relative_bound`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RelativeBound {
    /// `√6 · C`.
    pub value: f64,
    /// `C = max_{j<=J} max(|b[j,j-1]|, |b[j,j]|, |b[j,j+1]|) / λ_j^r`.
    pub c: f64,
    /// Level at which `C` is attained.
    pub argmax: usize,
    /// Always set: `C` is a maximum over a finite prefix, not a supremum.
    pub estimated: bool,
}

/// `√6 · C` bound of `‖Bψ‖` by `‖|A|^r ψ‖` for a tri-diagonal coupling.
pub fn tridiagonal_relative_bound(
    drift: &SpectralDrift,
    coupling: &CouplingOperator,
    r: f64,
    prefix: usize,
) -> Result<RelativeBound> {
    ensure_domain("r", r, (0.0..=1.0).contains(&r), "[0, 1]")?;
    if !coupling.bandwidth().is_tridiagonal() {
        return Err(Error::UnsupportedStructure {
            bandwidth: coupling.bandwidth().to_string(),
        });
    }
    let levels = prefix.min(coupling.extent());
    if levels == 0 {
        return Err(Error::Domain {
            name: "J",
            value: prefix as f64,
            domain: "J >= 1 within the coupling extent",
        });
    }
    let weights = drift.weights(levels)?;
    let mut c: f64 = 0.0;
    let mut argmax = 1;
    for j in 1..=levels {
        let w = weights[j - 1];
        if w <= 0.0 {
            return Err(Error::InvalidSpectrum(format!(
                "λ_{j} + shift = {w} is not positive"
            )));
        }
        let scale = w.powf(r);
        let mut row = coupling.entry(j, j).norm();
        if j > 1 {
            row = row.max(coupling.entry(j, j - 1).norm());
        }
        if j < coupling.extent() {
            row = row.max(coupling.entry(j, j + 1).norm());
        }
        let ratio = row / scale;
        if ratio > c {
            c = ratio;
            argmax = j;
        }
    }
    Ok(RelativeBound {
        value: 6f64.sqrt() * c,
        c,
        argmax,
        estimated: true,
    })
}

/// `‖B_N ψ‖ / ‖|A_N|^r ψ‖`.
pub fn relative_bound_ratio(system: &GalerkinSystem, psi: &[C64], r: f64) -> f64 {
    let num = system.coupling_norm(psi);
    let den = system.homogeneous_norm(psi, r);
    if num == 0.0 {
        0.0
    } else {
        num / den
    }
}

/// Samples random unit states and compares `‖B_N ψ‖` with `√6 C ‖|A_N|^r ψ‖`,
/// `C` taken over the levels of the compression.
pub fn verify_relative_bound(
    system: &GalerkinSystem,
    r: f64,
    trials: usize,
    seed: u64,
) -> Result<BoundReport> {
    ensure_domain("r", r, (0.0..=1.0).contains(&r), "[0, 1]")?;
    if trials == 0 {
        return Err(Error::Domain {
            name: "trials",
            value: 0.0,
            domain: "trials >= 1",
        });
    }
    let n = system.order();
    let coupling = CouplingOperator::from_dense(system.coupling_matrix())?;
    let coupling = CouplingOperator {
        bandwidth: system.bandwidth(),
        ..coupling
    };
    let bound = tridiagonal_relative_bound(system.drift(), &coupling, r, n)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut worst: f64 = 0.0;
    for _ in 0..trials {
        let psi = random_unit_state(n, &mut rng);
        worst = worst.max(relative_bound_ratio(system, &psi, r));
    }
    let mut report = BoundReport::new("relative_bound", worst, bound.value, true);
    report.input("N", n as f64);
    report.input("r", r);
    report.input("C", bound.c);
    report.input("trials", trials as f64);
    Ok(report)
}

/// Unit vector with i.i.d. complex Gaussian coefficients.
pub fn random_unit_state<R: rand::Rng + ?Sized>(n: usize, rng: &mut R) -> Vec<C64> {
    loop {
        let v: Vec<C64> = (0..n)
            .map(|_| {
                let re: f64 = StandardNormal.sample(rng);
                let im: f64 = StandardNormal.sample(rng);
                C64::new(re, im)
            })
            .collect();
        let norm = vector_norm(&v);
        if norm > 0.0 {
            return v.into_iter().map(|c| c / norm).collect();
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rotor_coupling(extent: usize) -> CouplingOperator {
        let half = C64::new(0.0, -0.5);
        CouplingOperator::from_triplets(
            extent,
            (1..extent).flat_map(|k| [(k, k + 1, half), (k + 1, k, half)]),
        )
        .unwrap()
    }

    #[test]
    fn rotor_compression_of_order_three() {
        let sys = compress(&SpectralDrift::squares(), &rotor_coupling(10), 3).unwrap();
        let a = sys.drift_matrix();
        for (k, want) in [1.0, 4.0, 9.0].iter().enumerate() {
            assert_eq!(a[(k, k)], C64::new(0.0, -want));
        }
        let b = sys.coupling_matrix();
        for k in 0..3 {
            assert_eq!(b[(k, k)], C64::new(0.0, 0.0));
        }
        assert_eq!(b[(0, 1)], C64::new(0.0, -0.5));
        assert_eq!(b[(1, 2)], C64::new(0.0, -0.5));
        assert_eq!(b[(0, 2)], C64::new(0.0, 0.0));
        assert!(sys.bandwidth().is_tridiagonal());
    }

    #[test]
    fn zero_coupling_compresses_to_zero() {
        for n in [1, 4, 9] {
            let sys = compress(&SpectralDrift::squares(), &CouplingOperator::zero(20), n).unwrap();
            assert!(sys.coupling_matrix().iter().all(|z| *z == C64::new(0.0, 0.0)));
        }
    }

    #[test]
    fn non_skew_entries_are_named() {
        let err = CouplingOperator::from_triplets(
            3,
            [(1, 2, C64::new(0.0, -0.5)), (2, 1, C64::new(0.0, 0.5))],
        )
        .unwrap_err();
        match err {
            Error::NotSkewHermitian { j, k, .. } => assert_eq!((j, k), (1, 2)),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn compress_requires_entries_up_to_the_order() {
        let err = compress(&SpectralDrift::squares(), &rotor_coupling(5), 6).unwrap_err();
        assert!(matches!(err, Error::CouplingExtent { requested: 6, available: 5 }));
    }

    #[test]
    fn explicit_spectrum_must_be_ordered() {
        assert!(SpectralDrift::explicit(vec![1.0, 0.5, 3.0]).is_err());
        assert!(SpectralDrift::explicit(vec![2.0, 2.0]).is_err());
        let d = SpectralDrift::explicit(vec![1.0, 1.0, 2.0]).unwrap();
        assert!(matches!(d.eigenvalue(4), Err(Error::EigenvalueExtent { .. })));
    }

    #[test]
    fn lower_bound_shift_makes_weights_positive() {
        let d = SpectralDrift::squares().shifted(5.5);
        assert_eq!(d.eigenvalue(1).unwrap(), -4.5);
        assert_eq!(d.lower_bound_shift(), 5.5);
        assert!(d.weights(10).unwrap().iter().all(|w| *w > 0.0));
        assert_eq!(SpectralDrift::squares().lower_bound_shift(), 0.0);
    }

    #[test]
    fn rotor_relative_bound() {
        for prefix in [1, 5, 100] {
            let got = tridiagonal_relative_bound(
                &SpectralDrift::squares(),
                &rotor_coupling(200),
                1.0,
                prefix,
            )
            .unwrap();
            assert!((got.value - 6f64.sqrt() / 2.0).abs() < 1e-15);
            assert_eq!(got.argmax, 1);
            assert!(got.estimated);
        }
        let zero = tridiagonal_relative_bound(
            &SpectralDrift::squares(),
            &CouplingOperator::zero(10),
            1.0,
            10,
        )
        .unwrap();
        assert_eq!(zero.value, 0.0);
    }

    #[test]
    fn relative_bound_rejects_wide_bands_and_bad_exponent() {
        let wide = CouplingOperator::from_triplets(
            4,
            [(1, 3, C64::new(0.0, -1.0)), (3, 1, C64::new(0.0, -1.0))],
        )
        .unwrap();
        assert!(matches!(
            tridiagonal_relative_bound(&SpectralDrift::squares(), &wide, 1.0, 4),
            Err(Error::UnsupportedStructure { .. })
        ));
        assert!(matches!(
            tridiagonal_relative_bound(&SpectralDrift::squares(), &rotor_coupling(4), 1.5, 4),
            Err(Error::Domain { .. })
        ));
    }

    #[test]
    fn ground_state_ratio_on_the_rotor() {
        let sys = compress(&SpectralDrift::squares(), &rotor_coupling(8), 8).unwrap();
        let mut psi = vec![C64::new(0.0, 0.0); 8];
        psi[0] = C64::new(1.0, 0.0);
        assert!((sys.coupling_norm(&psi) - 0.5).abs() < 1e-15);
        assert!((sys.homogeneous_norm(&psi, 1.0) - 1.0).abs() < 1e-15);
        assert!((relative_bound_ratio(&sys, &psi, 1.0) - 0.5).abs() < 1e-15);
    }

    #[test]
    fn random_states_respect_the_relative_bound() {
        let sys = compress(&SpectralDrift::squares(), &rotor_coupling(50), 50).unwrap();
        let report = verify_relative_bound(&sys, 1.0, 100, 3).unwrap();
        assert!(report.satisfied);
        assert!(report.measured <= 6f64.sqrt() / 2.0);
        assert!(report.measured > 0.0);

        let zero = compress(&SpectralDrift::squares(), &CouplingOperator::zero(10), 10).unwrap();
        let report = verify_relative_bound(&zero, 1.0, 10, 3).unwrap();
        assert_eq!(report.measured, 0.0);
    }

    #[test]
    fn shifted_system_moves_every_eigenvalue() {
        let sys = compress(&SpectralDrift::squares(), &rotor_coupling(4), 4).unwrap();
        let shifted = sys.shifted(1.0);
        assert_eq!(shifted.eigenvalues(), &[0.0, 3.0, 8.0, 15.0]);
        assert_eq!(shifted.weights(), &[1.0, 4.0, 9.0, 16.0]);
    }

    #[test]
    fn hamiltonian_is_hermitian() {
        let sys = compress(&SpectralDrift::squares(), &rotor_coupling(6), 6).unwrap();
        for u in [-0.6, 0.0, 0.3, 2.0] {
            assert!(sys.hermiticity_defect(u) < 1e-14);
        }
        let h = sys.hamiltonian(1.0);
        assert_eq!(h[(0, 1)], C64::new(0.5, 0.0));
        assert_eq!(h[(1, 1)], C64::new(4.0, 0.0));
    }
}
