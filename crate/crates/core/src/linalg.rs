//! Hermitian eigendecompositions used to exponentiate `i(A_N + u B_N)`.
//!
//! Two paths exist. Tri-diagonal Hermitian matrices are gauged by a unitary
//! diagonal `D` into a real symmetric tri-diagonal `T = D* H D` with
//! nonnegative off-diagonal, which is then diagonalised by implicit QL.
//! Everything else goes through nalgebra's dense Hermitian solver.

use nalgebra::{Complex, DMatrix, DVector};

use crate::error::{Error, Result};

pub type C64 = Complex<f64>;
pub type CMatrix = DMatrix<C64>;
pub type CVector = DVector<C64>;

const QL_MAX_SWEEPS: usize = 60;

/// Eigen-decomposition `H = V diag(θ) V*` of a Hermitian matrix.
#[derive(Debug, Clone)]
pub struct HermitianEigen {
    values: Vec<f64>,
    basis: EigenBasis,
}

#[derive(Debug, Clone)]
enum EigenBasis {
    /// `V = D W` with `D = diag(phases)` and `W` real orthogonal, column-major.
    Gauged { phases: Vec<C64>, real: Vec<f64> },
    Dense(CMatrix),
}

impl HermitianEigen {
    pub fn dim(&self) -> usize {
        self.values.len()
    }

    /// Eigenvalues, ascending.
    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn is_gauged(&self) -> bool {
        matches!(self.basis, EigenBasis::Gauged { .. })
    }

    /// Column `i` of `V` as a dense vector.
    pub fn vector(&self, i: usize) -> CVector {
        let n = self.dim();
        match &self.basis {
            EigenBasis::Gauged { phases, real } => {
                CVector::from_fn(n, |k, _| phases[k] * real[i * n + k])
            }
            EigenBasis::Dense(v) => v.column(i).into_owned(),
        }
    }

    /// In place `ψ ← V diag(e^{-i dt θ}) V* ψ`, i.e. `ψ ← exp(-i dt H) ψ`.
    pub fn apply_exp(&self, dt: f64, psi: &mut [C64]) {
        let n = self.dim();
        debug_assert_eq!(psi.len(), n);
        match &self.basis {
            EigenBasis::Gauged { phases, real } => {
                let gauged: Vec<C64> = psi
                    .iter()
                    .zip(phases)
                    .map(|(c, d)| c * d.conj())
                    .collect();
                let mut coeffs = vec![C64::new(0.0, 0.0); n];
                for (i, slot) in coeffs.iter_mut().enumerate() {
                    let col = &real[i * n..(i + 1) * n];
                    let mut acc = C64::new(0.0, 0.0);
                    for (w, g) in col.iter().zip(&gauged) {
                        acc += g * *w;
                    }
                    *slot = acc * C64::from_polar(1.0, -dt * self.values[i]);
                }
                for c in psi.iter_mut() {
                    *c = C64::new(0.0, 0.0);
                }
                for (i, coeff) in coeffs.iter().enumerate() {
                    let col = &real[i * n..(i + 1) * n];
                    for (c, w) in psi.iter_mut().zip(col) {
                        *c += coeff * *w;
                    }
                }
                for (c, d) in psi.iter_mut().zip(phases) {
                    *c *= d;
                }
            }
            EigenBasis::Dense(v) => {
                let x = CVector::from_column_slice(psi);
                let mut y = v.ad_mul(&x);
                for (i, yi) in y.iter_mut().enumerate() {
                    *yi *= C64::from_polar(1.0, -dt * self.values[i]);
                }
                let out = v * y;
                psi.copy_from_slice(out.as_slice());
            }
        }
    }

    /// The full matrix `exp(-i dt H)`.
    pub fn exp_matrix(&self, dt: f64) -> CMatrix {
        let n = self.dim();
        let mut out = CMatrix::zeros(n, n);
        let mut col = vec![C64::new(0.0, 0.0); n];
        for j in 0..n {
            col.iter_mut().for_each(|c| *c = C64::new(0.0, 0.0));
            col[j] = C64::new(1.0, 0.0);
            self.apply_exp(dt, &mut col);
            out.column_mut(j).copy_from_slice(&col);
        }
        out
    }
}

/// Diagonalise the Hermitian tri-diagonal matrix with real diagonal `diag`
/// and super-diagonal `upper` (`upper[k] = H[k, k+1]`).
pub fn tridiagonal_hermitian_eigen(diag: &[f64], upper: &[C64]) -> Result<HermitianEigen> {
    let n = diag.len();
    if n == 0 {
        return Err(Error::Numerical("empty matrix".into()));
    }
    if upper.len() + 1 != n {
        return Err(Error::Numerical(format!(
            "super-diagonal has length {}, expected {}",
            upper.len(),
            n - 1
        )));
    }
    let mut phases = Vec::with_capacity(n);
    phases.push(C64::new(1.0, 0.0));
    let mut off = Vec::with_capacity(n);
    for (k, h) in upper.iter().enumerate() {
        let m = h.norm();
        let next = if m > 0.0 { phases[k] * h.conj() / m } else { phases[k] };
        phases.push(next);
        off.push(m);
    }
    let (values, real) = symmetric_tridiagonal_eigen(diag, &off)?;
    Ok(HermitianEigen {
        values,
        basis: EigenBasis::Gauged { phases, real },
    })
}

/// Dense Hermitian path.
pub fn dense_hermitian_eigen(h: &CMatrix) -> Result<HermitianEigen> {
    let n = h.nrows();
    if n == 0 || h.ncols() != n {
        return Err(Error::Numerical(format!(
            "expected a non-empty square matrix, got {}x{}",
            n,
            h.ncols()
        )));
    }
    if h.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
        return Err(Error::Numerical("matrix has non-finite entries".into()));
    }
    let eig = h
        .clone()
        .try_symmetric_eigen(f64::EPSILON, 0)
        .ok_or_else(|| {
            Error::Numerical(format!(
                "dense Hermitian solver did not converge (n = {n}, max |h| = {:e})",
                h.iter().map(|z| z.norm()).fold(0.0, f64::max)
            ))
        })?;
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let values = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let vectors = CMatrix::from_fn(n, n, |r, c| eig.eigenvectors[(r, order[c])]);
    Ok(HermitianEigen {
        values,
        basis: EigenBasis::Dense(vectors),
    })
}

/// Implicit QL on a real symmetric tri-diagonal matrix.
///
/// Returns ascending eigenvalues and the column-major orthogonal matrix of
/// eigenvectors. `off[k]` is the entry `T[k, k+1]`.
pub fn symmetric_tridiagonal_eigen(diag: &[f64], off: &[f64]) -> Result<(Vec<f64>, Vec<f64>)> {
    let n = diag.len();
    if off.len() + 1 != n {
        return Err(Error::Numerical("off-diagonal length must be n - 1".into()));
    }
    if diag.iter().chain(off).any(|x| !x.is_finite()) {
        return Err(Error::Numerical(
            "tri-diagonal matrix has non-finite entries".into(),
        ));
    }
    let mut d = diag.to_vec();
    let mut e = off.to_vec();
    e.push(0.0);
    let mut z = vec![0.0; n * n];
    for i in 0..n {
        z[i * n + i] = 1.0;
    }

    let eps = f64::EPSILON;
    let mut f = 0.0;
    let mut tst1: f64 = 0.0;
    for l in 0..n {
        tst1 = tst1.max(d[l].abs() + e[l].abs());
        let mut m = l;
        while m < n - 1 && e[m].abs() > eps * tst1 {
            m += 1;
        }
        if m > l {
            let mut sweeps = 0;
            loop {
                sweeps += 1;
                if sweeps > QL_MAX_SWEEPS {
                    return Err(Error::Numerical(format!(
                        "implicit QL did not converge for eigenvalue {l} of {n} \
                         (|e| = {:e}, scale = {:e})",
                        e[l].abs(),
                        tst1
                    )));
                }
                let g = d[l];
                let mut p = (d[l + 1] - g) / (2.0 * e[l]);
                let mut r = p.hypot(1.0);
                if p < 0.0 {
                    r = -r;
                }
                d[l] = e[l] / (p + r);
                d[l + 1] = e[l] * (p + r);
                let dl1 = d[l + 1];
                let h = g - d[l];
                for di in d.iter_mut().skip(l + 2) {
                    *di -= h;
                }
                f += h;

                p = d[m];
                let mut c = 1.0;
                let mut c2 = c;
                let mut c3 = c;
                let el1 = e[l + 1];
                let mut s = 0.0;
                let mut s2 = 0.0;
                for i in (l..m).rev() {
                    c3 = c2;
                    c2 = c;
                    s2 = s;
                    let g = c * e[i];
                    let h = c * p;
                    r = p.hypot(e[i]);
                    e[i + 1] = s * r;
                    s = e[i] / r;
                    c = p / r;
                    p = c * d[i] - s * g;
                    d[i + 1] = h + s * (c * g + s * d[i]);
                    let (left, right) = z.split_at_mut((i + 1) * n);
                    let zi = &mut left[i * n..];
                    let zi1 = &mut right[..n];
                    for (a, b) in zi.iter_mut().zip(zi1.iter_mut()) {
                        let h = *b;
                        *b = s * *a + c * h;
                        *a = c * *a - s * h;
                    }
                }
                p = -s * s2 * c3 * el1 * e[l] / dl1;
                e[l] = s * p;
                d[l] = c * p;
                if e[l].abs() <= eps * tst1 {
                    break;
                }
            }
        }
        d[l] += f;
        e[l] = 0.0;
    }

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| d[a].total_cmp(&d[b]));
    let values = order.iter().map(|&i| d[i]).collect();
    let mut vectors = vec![0.0; n * n];
    for (dst, &src) in order.iter().enumerate() {
        vectors[dst * n..(dst + 1) * n].copy_from_slice(&z[src * n..(src + 1) * n]);
    }
    Ok((values, vectors))
}

/// `max_{j,k} |(U* U - I)_{jk}|`.
pub fn unitarity_defect(u: &CMatrix) -> f64 {
    let n = u.nrows();
    let g = u.ad_mul(u);
    let mut worst: f64 = 0.0;
    for j in 0..n {
        for k in 0..n {
            let target = if j == k { 1.0 } else { 0.0 };
            worst = worst.max((g[(j, k)] - C64::new(target, 0.0)).norm());
        }
    }
    worst
}

pub fn vector_norm(v: &[C64]) -> f64 {
    v.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt()
}
