//! Exact diagonalization: dense eigensolver for small registers and a
//! matrix-free Lanczos solver with full reorthogonalization.

use nalgebra::{DMatrix, SymmetricEigen};
use num_complex::Complex64 as C64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::PauliSum;
use crate::error::{Error, Result};
use crate::sim::{dot, StateVector};

pub const DENSE_MAX_QUBITS: usize = 12;
pub const LANCZOS_MAX_QUBITS: usize = 20;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    Dense,
    Lanczos,
}

#[derive(Clone, Debug)]
pub struct GroundState {
    pub energy: f64,
    pub state: StateVector,
    /// `‖Hψ − Eψ‖` of the returned vector.
    pub residual: f64,
    /// Krylov dimension used (0 for the dense solver).
    pub iterations: usize,
}

#[derive(Clone, Copy, Debug)]
pub struct LanczosOptions {
    pub max_iter: usize,
    /// Stop once the lowest Ritz value moves by less than this.
    pub eigenvalue_tol: f64,
    /// ...and the residual estimate `β_m |y_m|` is below this.
    pub residual_tol: f64,
    pub seed: u64,
}

impl Default for LanczosOptions {
    fn default() -> Self {
        Self {
            max_iter: 500,
            eigenvalue_tol: 1e-10,
            residual_tol: 1e-9,
            seed: 0x5eed,
        }
    }
}

/// Lowest eigenpair of `h`.
pub fn ground_energy(h: &PauliSum, method: Method) -> Result<GroundState> {
    match method {
        Method::Dense => dense(h),
        Method::Lanczos => lanczos(h, LanczosOptions::default()),
    }
}

fn residual(h: &PauliSum, amps: &[C64], energy: f64) -> f64 {
    h.apply(amps)
        .iter()
        .zip(amps)
        .map(|(hv, v)| (hv - v * energy).norm_sqr())
        .sum::<f64>()
        .sqrt()
}

fn dense(h: &PauliSum) -> Result<GroundState> {
    let n = h.n_qubits;
    if n > DENSE_MAX_QUBITS {
        return Err(Error::Size(format!(
            "dense diagonalization limited to {DENSE_MAX_QUBITS} qubits, got {n}"
        )));
    }
    let dim = 1usize << n;
    let mut m = DMatrix::<C64>::zeros(dim, dim);
    let mut basis = vec![C64::new(0.0, 0.0); dim];
    let mut column = vec![C64::new(0.0, 0.0); dim];
    for j in 0..dim {
        basis[j] = C64::new(1.0, 0.0);
        h.apply_into(&basis, &mut column);
        basis[j] = C64::new(0.0, 0.0);
        for (i, v) in column.iter().enumerate() {
            m[(i, j)] = *v;
        }
    }
    let (energy, amps) = if m.iter().all(|v| v.im == 0.0) {
        let real = m.map(|v| v.re);
        let eig = SymmetricEigen::new(real);
        let k = eig.eigenvalues.imin();
        let v = eig.eigenvectors.column(k).map(|x| C64::new(x, 0.0));
        (eig.eigenvalues[k], v.iter().cloned().collect::<Vec<_>>())
    } else {
        let eig = SymmetricEigen::new(m);
        let k = eig.eigenvalues.imin();
        (eig.eigenvalues[k], eig.eigenvectors.column(k).iter().cloned().collect())
    };
    let state = StateVector::normalized(amps)?;
    let residual = residual(h, state.amplitudes(), energy);
    Ok(GroundState {
        energy,
        state,
        residual,
        iterations: 0,
    })
}

/// Matrix-free Lanczos for the lowest eigenpair.
pub fn lanczos(h: &PauliSum, opts: LanczosOptions) -> Result<GroundState> {
    let n = h.n_qubits;
    if n > LANCZOS_MAX_QUBITS {
        return Err(Error::Size(format!(
            "Lanczos limited to {LANCZOS_MAX_QUBITS} qubits, got {n}"
        )));
    }
    let dim = 1usize << n;
    let start = StateVector::haar_random(n, &mut ChaCha8Rng::seed_from_u64(opts.seed))?;
    let mut basis: Vec<Vec<C64>> = vec![start.amplitudes().to_vec()];
    let mut alpha: Vec<f64> = Vec::new();
    let mut beta: Vec<f64> = Vec::new();
    let mut w = vec![C64::new(0.0, 0.0); dim];
    let mut previous = f64::INFINITY;
    let mut best: Option<(f64, Vec<f64>)> = None;
    let mut last_estimate = f64::INFINITY;

    for j in 0..opts.max_iter.min(dim) {
        h.apply_into(&basis[j], &mut w);
        let a = dot(&basis[j], &w).re;
        alpha.push(a);
        for (x, v) in w.iter_mut().zip(&basis[j]) {
            *x -= v * a;
        }
        if j > 0 {
            let b = beta[j - 1];
            for (x, v) in w.iter_mut().zip(&basis[j - 1]) {
                *x -= v * b;
            }
        }
        // two passes of classical Gram-Schmidt against the whole basis
        for _ in 0..2 {
            for v in &basis {
                let c = dot(v, &w);
                for (x, y) in w.iter_mut().zip(v) {
                    *x -= y * c;
                }
            }
        }
        let b = w.iter().map(|x| x.norm_sqr()).sum::<f64>().sqrt();

        let (theta, y) = lowest_ritz_pair(&alpha, &beta);
        last_estimate = b * y.last().map_or(0.0, |v| v.abs());
        let settled = (theta - previous).abs() <= opts.eigenvalue_tol && last_estimate <= opts.residual_tol;
        let exhausted = b <= 1e-12 * theta.abs().max(1.0) || j + 1 == dim;
        previous = theta;
        best = Some((theta, y));
        if settled || exhausted {
            break;
        }
        beta.push(b);
        basis.push(w.iter().map(|x| x / b).collect());
    }

    let (energy, y) = best.ok_or_else(|| Error::Numerical("Lanczos did not iterate".into()))?;
    let mut amps = vec![C64::new(0.0, 0.0); dim];
    for (coef, v) in y.iter().zip(&basis) {
        for (x, b) in amps.iter_mut().zip(v) {
            *x += b * *coef;
        }
    }
    let state = StateVector::normalized(amps)?;
    let res = residual(h, state.amplitudes(), energy);
    if res > 1e-8 {
        return Err(Error::Numerical(format!(
            "Lanczos stopped after {} iterations with residual {res:.3e} (estimate {last_estimate:.3e})",
            y.len()
        )));
    }
    Ok(GroundState {
        energy,
        state,
        residual: res,
        iterations: y.len(),
    })
}

/// Lowest eigenpair of the symmetric tridiagonal matrix (alpha, beta).
fn lowest_ritz_pair(alpha: &[f64], beta: &[f64]) -> (f64, Vec<f64>) {
    let m = alpha.len();
    let mut t = DMatrix::<f64>::zeros(m, m);
    for i in 0..m {
        t[(i, i)] = alpha[i];
        if i + 1 < m {
            t[(i, i + 1)] = beta[i];
            t[(i + 1, i)] = beta[i];
        }
    }
    let eig = SymmetricEigen::new(t);
    let k = eig.eigenvalues.imin();
    (eig.eigenvalues[k], eig.eigenvectors.column(k).iter().cloned().collect())
}
