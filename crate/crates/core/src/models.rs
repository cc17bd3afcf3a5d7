//! The three example systems: anharmonic oscillator, planar rotor and
//! harmonic trap.
//!
//! Every model is stored 1-based. Level `j` of the oscillator and of the trap
//! is Hermite function `j - 1` and `2(j - 1)` respectively; level `j` of the
//! rotor is `sin(jθ)`.

use std::f64::consts::PI;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::controls::SampledBVControl;
use crate::error::{ensure_domain, Error, Result};
use crate::linalg::C64;
use crate::operators::{
    tridiagonal_relative_bound, Constants, CouplingOperator, Provenance, SpectralDrift,
};

/// Levels used for prefix estimates of relative-bound constants.
const ESTIMATE_PREFIX: usize = 160;

/// Model selector as it appears in configuration files.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "model", rename_all = "snake_case")]
pub enum ModelSpec {
    Rotor,
    Anharmonic { alpha: u32, beta: u32 },
    Trap { lambda: f64 },
}

impl ModelSpec {
    /// The model with coupling entries for levels `1..=n`.
    pub fn build(&self, n: usize) -> Result<Model> {
        match *self {
            ModelSpec::Rotor => build_rotor(n),
            ModelSpec::Anharmonic { alpha, beta } => build_anharmonic(alpha, beta, n),
            ModelSpec::Trap { lambda } => build_trap(lambda, n),
        }
    }
}

/// Facts about a model that do not enter the dynamics.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct ModelInfo {
    /// Operator norm of `B` used by the switch bound.
    pub norm_b: Option<f64>,
    /// `‖B_N‖` computed on the built compression.
    pub norm_b_computed: Option<f64>,
    /// Control amplitude up to which the model is known to be well posed.
    pub admissibility_radius: Option<f64>,
    /// Exponent `s < 1` with `‖Bψ‖ <= d‖|A|^s ψ‖`, when it exists.
    pub hyp2_exponent: Option<f64>,
    /// Asymptotic entry ratios measured at a high level, next to their
    /// predicted limits.
    pub asymptotics: Vec<AsymptoticRatio>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AsymptoticRatio {
    pub label: String,
    pub level: usize,
    pub measured: f64,
    pub predicted: f64,
}

impl AsymptoticRatio {
    pub fn relative_gap(&self) -> f64 {
        (self.measured - self.predicted).abs() / self.predicted.abs()
    }
}

/// Drift, coupling and constants of one example.
#[derive(Debug, Clone, PartialEq)]
pub struct Model {
    pub name: String,
    pub drift: SpectralDrift,
    pub coupling: CouplingOperator,
    pub constants: Constants,
    pub info: ModelInfo,
}

/// Position operator `⟨φ_j, x φ_k⟩` on Hermite levels `0..size`.
pub fn position_matrix(size: usize) -> DMatrix<f64> {
    let mut x = DMatrix::zeros(size, size);
    for k in 1..size {
        let v = (k as f64 / 2.0).sqrt();
        x[(k - 1, k)] = v;
        x[(k, k - 1)] = v;
    }
    x
}

/// `x^β` on Hermite levels `0..size`, computed at size `size + β` and cropped
/// so that every retained entry is exact.
pub fn position_power(beta: u32, size: usize) -> DMatrix<f64> {
    let padded = size + beta as usize;
    let x = position_matrix(padded);
    let mut m = DMatrix::identity(padded, padded);
    for _ in 0..beta {
        m = &m * &x;
    }
    let m = (&m + m.transpose()) * 0.5;
    m.view((0, 0), (size, size)).into_owned()
}

fn coupling_from_real_symmetric(m: &DMatrix<f64>) -> Result<CouplingOperator> {
    let n = m.nrows();
    let mut triplets = Vec::new();
    for j in 0..n {
        for k in 0..n {
            let v = m[(j, k)];
            if v != 0.0 {
                triplets.push((j + 1, k + 1, C64::new(0.0, -v)));
            }
        }
    }
    CouplingOperator::from_triplets(n, triplets)
}

/// Largest singular value of a real matrix.
fn spectral_norm(m: &DMatrix<f64>) -> f64 {
    m.clone().singular_values().iter().copied().fold(0.0, f64::max)
}

/// `i ∂ψ/∂t = [(-Δ + x²)^α + u(t) x^β] ψ` in the Hermite basis.
///
/// Fails unless `2α >= β`. When `2α > β`, `hyp2_exponent` is `β/(2α)`. When
/// `2α = β`, `admissibility_radius` is `√((2β+1) 2^{-β})`.
///
/// The relative-bound constant `d` is the larger of `√((2β+1) 2^{-β})` and
/// `‖X^β Λ^{-β/(2α)}‖` over a finite prefix, so it is flagged as estimated;
/// `a = d` and `b = 0` because `λ_j >= 1`.
pub fn build_anharmonic(alpha: u32, beta: u32, n: usize) -> Result<Model> {
    if alpha == 0 || beta == 0 {
        return Err(Error::Model(format!(
            "alpha and beta must be positive integers, got alpha = {alpha}, beta = {beta}"
        )));
    }
    if 2 * alpha < beta {
        return Err(Error::Model(format!(
            "the coupling x^β is relatively bounded by the drift only if 2α ≥ β; \
             got α = {alpha}, β = {beta}, 2α = {} < β",
            2 * alpha
        )));
    }
    if n == 0 {
        return Err(Error::Domain {
            name: "N",
            value: 0.0,
            domain: "N >= 1",
        });
    }
    let drift = SpectralDrift::odd_power(alpha);
    let coupling = coupling_from_real_symmetric(&position_power(beta, n))?;

    let s = beta as f64 / (2.0 * alpha as f64);
    let chain = ((2 * beta + 1) as f64 * 2f64.powi(-(beta as i32))).sqrt();
    let p = ESTIMATE_PREFIX.max(n);
    let mut scaled = position_power(beta, p);
    let weights = drift.weights(p)?;
    for (k, w) in weights.iter().enumerate() {
        let f = w.powf(-s);
        scaled.column_mut(k).scale_mut(f);
    }
    let d = chain.max(spectral_norm(&scaled));

    let mut info = ModelInfo::default();
    if 2 * alpha == beta {
        info.admissibility_radius = Some(chain);
    } else {
        info.hyp2_exponent = Some(s);
    }
    let constants = Constants {
        a: d,
        b: 0.0,
        d,
        alpha: s.min(1.0),
        provenance: Provenance::Estimated,
        norm_b: None,
    };
    constants.validate()?;
    Ok(Model {
        name: format!("anharmonic(alpha={alpha}, beta={beta})"),
        drift,
        coupling,
        constants,
        info,
    })
}

/// Planar rotor `i ∂ψ/∂t = -Δψ + u(t) cos θ ψ` on odd functions, in the
/// basis `sin(kθ)`: `λ_k = k²`, `b[k,k+1] = b[k+1,k] = -i/2`.
///
/// Constants are analytic: `a = √2`, `b = 0`, `α = 0`, `d = √6/2` and the
/// switch-bound value `‖B‖ = √2`. The true `‖B_N‖` is at most 1 and sits in
/// `info.norm_b_computed`.
pub fn build_rotor(n: usize) -> Result<Model> {
    if n < 2 {
        return Err(Error::Domain {
            name: "N",
            value: n as f64,
            domain: "N >= 2",
        });
    }
    let half = C64::new(0.0, -0.5);
    let coupling = CouplingOperator::from_triplets(
        n,
        (1..n).flat_map(|k| [(k, k + 1, half), (k + 1, k, half)]),
    )?;
    let drift = SpectralDrift::squares();
    let rel = tridiagonal_relative_bound(&drift, &coupling, 0.0, n)?;
    // C = 1/2 at k = 1 for every N, so the prefix value is the supremum.
    let d = rel.value;
    let mut symbol = DMatrix::zeros(n, n);
    for k in 1..n {
        symbol[(k - 1, k)] = 0.5;
        symbol[(k, k - 1)] = 0.5;
    }
    let info = ModelInfo {
        norm_b: Some(2f64.sqrt()),
        norm_b_computed: Some(spectral_norm(&symbol)),
        ..ModelInfo::default()
    };
    Ok(Model {
        name: "rotor".into(),
        drift,
        coupling,
        constants: Constants {
            a: 2f64.sqrt(),
            b: 0.0,
            d,
            alpha: 0.0,
            provenance: Provenance::Analytic,
            norm_b: Some(2f64.sqrt()),
        },
        info,
    })
}

/// `⟨φ_{2j}, x² φ_{2k}⟩` for the frequency-`λ` oscillator basis, `j, k`
/// 0-based; zero unless `|j - k| <= 1`.
pub fn trap_entry(lambda: f64, j: usize, k: usize) -> f64 {
    match (j, k) {
        _ if j == k => (4 * j + 1) as f64 / (2.0 * lambda),
        _ if k == j + 1 => (((2 * j + 1) * (2 * j + 2)) as f64).sqrt() / (2.0 * lambda),
        _ if j == k + 1 => trap_entry(lambda, k, j),
        _ => 0.0,
    }
}

/// Trap `i ∂ψ/∂t = (-Δ + λ²x² + u(t) x²) ψ` on even functions, with
/// `u = ω - λ`. Level `j` (1-based) is Hermite function `2(j - 1)` of the
/// frequency-`λ` oscillator: `λ_j = (4j - 3)λ` and `B = -i x²`.
///
/// With `r = 1` the ratio `max |b| / λ_j` peaks at the first off-diagonal
/// entry, `C = √2 / (2λ²)`, giving analytic `a = d = √6 C` and `b = 0`.
pub fn build_trap(lambda: f64, n: usize) -> Result<Model> {
    ensure_domain("lambda", lambda, lambda > 0.0, "(0, inf)")?;
    if n == 0 {
        return Err(Error::Domain {
            name: "N",
            value: 0.0,
            domain: "N >= 1",
        });
    }
    let drift = SpectralDrift::even_hermite(lambda)?;
    let mut triplets = Vec::with_capacity(3 * n);
    for m in 0..n {
        triplets.push((m + 1, m + 1, C64::new(0.0, -trap_entry(lambda, m, m))));
        if m + 1 < n {
            let v = C64::new(0.0, -trap_entry(lambda, m, m + 1));
            triplets.push((m + 1, m + 2, v));
            triplets.push((m + 2, m + 1, v));
        }
    }
    let coupling = CouplingOperator::from_triplets(n, triplets)?;
    let c = 2f64.sqrt() / (2.0 * lambda * lambda);
    let d = 6f64.sqrt() * c;

    let level = 100;
    let m = level / 2;
    let info = ModelInfo {
        asymptotics: vec![
            AsymptoticRatio {
                label: "b[j,j]·λ/j".into(),
                level,
                measured: trap_entry(lambda, m, m) * lambda / level as f64,
                predicted: 1.0,
            },
            AsymptoticRatio {
                label: "b[j,j+1]·λ/j".into(),
                level,
                measured: trap_entry(lambda, m, m + 1) * lambda / level as f64,
                predicted: 0.5,
            },
        ],
        ..ModelInfo::default()
    };
    Ok(Model {
        name: format!("trap(lambda={lambda})"),
        drift,
        coupling,
        constants: Constants {
            a: d,
            b: 0.0,
            d,
            alpha: 1.0,
            provenance: Provenance::Analytic,
            norm_b: None,
        },
        info,
    })
}

/// Samples per period `2π` of the steering control.
pub const STEERING_SAMPLES_PER_PERIOD: usize = 768;

/// `u_n(t) = cos(3t)/n` on `[0, 2πn]`, 256 samples per period of `cos 3t`.
pub fn rotor_steering_control(n: usize) -> Result<SampledBVControl> {
    if n == 0 {
        return Err(Error::InvalidControl("steering index n must be at least 1".into()));
    }
    let nf = n as f64;
    SampledBVControl::cosine(1.0 / nf, 3.0, 2.0 * PI * nf, STEERING_SAMPLES_PER_PERIOD * n)
}
