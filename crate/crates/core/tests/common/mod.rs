#![allow(dead_code)]

use bvprop::linalg::{CMatrix, C64};
use bvprop::PiecewiseConstantControl;
use nalgebra::DMatrix;
use rand::Rng;
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    rand::SeedableRng::seed_from_u64(seed)
}

/// Piecewise-constant control with 1..=max_pieces intervals of length in
/// `[0.05, 1)` and values uniform in `(-amp, amp)`.
pub fn random_pc(rng: &mut ChaCha8Rng, max_pieces: usize, amp: f64) -> PiecewiseConstantControl {
    let pieces = rng.random_range(1..=max_pieces);
    let durations: Vec<f64> = (0..pieces).map(|_| rng.random_range(0.05..1.0)).collect();
    let values = (0..pieces).map(|_| rng.random_range(-amp..amp)).collect();
    PiecewiseConstantControl::from_durations(&durations, values).unwrap()
}

/// Control alternating between `0` and `level`, random starting value.
pub fn random_bang_bang(rng: &mut ChaCha8Rng, max_pieces: usize, level: f64) -> PiecewiseConstantControl {
    let pieces = rng.random_range(1..=max_pieces);
    let durations: Vec<f64> = (0..pieces).map(|_| rng.random_range(0.05..1.0)).collect();
    let mut on = rng.random_bool(0.5);
    let values = (0..pieces)
        .map(|_| {
            let v = if on { level } else { 0.0 };
            on = !on;
            v
        })
        .collect();
    PiecewiseConstantControl::from_durations(&durations, values).unwrap()
}

/// `exp(M)` by Taylor series with scaling and squaring.
pub fn expm_taylor(m: &CMatrix) -> CMatrix {
    let n = m.nrows();
    let norm: f64 = m.iter().map(|z| z.norm()).sum::<f64>();
    let mut s = 0;
    while norm / 2f64.powi(s) > 0.25 {
        s += 1;
    }
    let a = m.map(|z| z / 2f64.powi(s));
    let mut term = CMatrix::identity(n, n);
    let mut sum = CMatrix::identity(n, n);
    for k in 1..40 {
        term = &term * &a / C64::new(k as f64, 0.0);
        sum += &term;
    }
    for _ in 0..s {
        sum = &sum * &sum;
    }
    sum
}

/// Gauss-Hermite nodes and weights for `∫ e^{-x²} f(x) dx`: nodes from the
/// Jacobi matrix, weights from the Christoffel function `1 / Σ_k h_k(x)²`.
pub fn gauss_hermite(m: usize) -> (Vec<f64>, Vec<f64>) {
    let mut j = DMatrix::<f64>::zeros(m, m);
    for k in 1..m {
        let b = (k as f64 / 2.0).sqrt();
        j[(k - 1, k)] = b;
        j[(k, k - 1)] = b;
    }
    let mut nodes: Vec<f64> = j.symmetric_eigenvalues().iter().copied().collect();
    nodes.sort_by(f64::total_cmp);
    let weights = nodes
        .iter()
        .map(|&x| 1.0 / hermite_orthonormal(m, x).iter().map(|h| h * h).sum::<f64>())
        .collect();
    (nodes, weights)
}

/// Orthonormal Hermite polynomials `h_0(x), ..., h_{n-1}(x)` for the weight `e^{-x²}`.
pub fn hermite_orthonormal(n: usize, x: f64) -> Vec<f64> {
    let mut h = vec![0.0; n];
    h[0] = std::f64::consts::PI.powf(-0.25);
    if n > 1 {
        h[1] = 2f64.sqrt() * x * h[0];
    }
    for k in 1..n.saturating_sub(1) {
        let kf = k as f64;
        h[k + 1] = (2.0 / (kf + 1.0)).sqrt() * x * h[k] - (kf / (kf + 1.0)).sqrt() * h[k - 1];
    }
    h
}

/// `⟨φ_j, x^p φ_k⟩`, `j, k < n`, by Gauss-Hermite quadrature with `m` nodes
/// (exact when `2m - 1 >= 2(n - 1) + p`).
pub fn quadrature_moment_matrix(n: usize, p: i32, m: usize) -> DMatrix<f64> {
    let (nodes, weights) = gauss_hermite(m);
    let mut out = DMatrix::zeros(n, n);
    for (&x, &w) in nodes.iter().zip(&weights) {
        let h = hermite_orthonormal(n, x);
        let xp = x.powi(p);
        for j in 0..n {
            for k in 0..n {
                out[(j, k)] += w * xp * h[j] * h[k];
            }
        }
    }
    out
}

/// `⟨φ_{2j}(√λ ·) λ^{1/4}, x² φ_{2k}(√λ ·) λ^{1/4}⟩` after the change of variable `y = √λ x`.
pub fn trap_moment_oracle(lambda: f64, levels: usize) -> DMatrix<f64> {
    let full = quadrature_moment_matrix(2 * levels, 2, 4 * levels + 8);
    DMatrix::from_fn(levels, levels, |j, k| full[(2 * j, 2 * k)] / lambda)
}

pub fn max_abs_entry_diff(a: &CMatrix, b: &CMatrix) -> f64 {
    a.iter().zip(b.iter()).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max)
}
