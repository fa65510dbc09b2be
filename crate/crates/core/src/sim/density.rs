use nalgebra::DMatrix;
use num_complex::Complex64 as C64;

use super::state::StateVector;
use crate::error::{Error, Result};

/// Eigenvalues below this floor are dropped from entropy sums.
pub const EIGENVALUE_FLOOR: f64 = 1e-12;

const HERMITIAN_TOL: f64 = 1e-10;

/// A Hermitian, unit-trace, positive semidefinite matrix.
#[derive(Clone, Debug)]
pub struct DensityMatrix {
    entries: DMatrix<C64>,
}

impl DensityMatrix {
    /// Validates Hermiticity, unit trace and positivity (each within `1e-10`).
    pub fn from_matrix(entries: DMatrix<C64>) -> Result<Self> {
        if !entries.is_square() {
            return Err(Error::Shape("density matrix must be square".into()));
        }
        let rho = Self { entries };
        rho.check_hermitian()?;
        let trace = rho.entries.trace();
        if (trace - C64::new(1.0, 0.0)).norm() > HERMITIAN_TOL {
            return Err(Error::Validation(format!("trace {trace} is not 1")));
        }
        let min = rho.eigenvalues().iter().cloned().fold(f64::INFINITY, f64::min);
        if min < -HERMITIAN_TOL {
            return Err(Error::Validation(format!("negative eigenvalue {min:.3e}")));
        }
        Ok(rho)
    }

    pub(crate) fn from_matrix_unchecked(entries: DMatrix<C64>) -> Self {
        Self { entries }
    }

    /// `|ψ⟩⟨ψ|`.
    pub fn pure(state: &StateVector) -> Self {
        let v = nalgebra::DVector::from_column_slice(state.amplitudes());
        Self::from_matrix_unchecked(&v * v.adjoint())
    }

    pub fn dim(&self) -> usize {
        self.entries.nrows()
    }

    pub fn entries(&self) -> &DMatrix<C64> {
        &self.entries
    }

    pub fn trace(&self) -> C64 {
        self.entries.trace()
    }

    fn check_hermitian(&self) -> Result<()> {
        let n = self.dim();
        for r in 0..n {
            for c in r..n {
                let d = (self.entries[(r, c)] - self.entries[(c, r)].conj()).norm();
                if d > HERMITIAN_TOL {
                    return Err(Error::Validation(format!(
                        "matrix is not Hermitian at ({r},{c}): defect {d:.3e}"
                    )));
                }
            }
        }
        Ok(())
    }

    /// Eigenvalues in ascending order.
    pub fn eigenvalues(&self) -> Vec<f64> {
        let mut ev: Vec<f64> = self.entries.clone().symmetric_eigenvalues().iter().cloned().collect();
        ev.sort_by(f64::total_cmp);
        ev
    }

    /// `−Σ λ ln λ` over eigenvalues above [`EIGENVALUE_FLOOR`], in nats.
    pub fn von_neumann_entropy(&self) -> Result<f64> {
        self.check_hermitian()?;
        Ok(entropy_of_spectrum(&self.eigenvalues()))
    }
}

pub(crate) fn entropy_of_spectrum(ev: &[f64]) -> f64 {
    ev.iter()
        .filter(|&&l| l > EIGENVALUE_FLOOR)
        .map(|&l| -l * l.ln())
        .sum()
}

/// Free-function form of [`DensityMatrix::von_neumann_entropy`].
pub fn von_neumann_entropy(rho: &DensityMatrix) -> Result<f64> {
    rho.von_neumann_entropy()
}

/// Entanglement entropy of `keep` for a pure state, in nats.
///
/// Diagonalizes the reduced state of whichever side of the cut is smaller,
/// so subsystems larger than half the register stay cheap.
pub fn entanglement_entropy(state: &StateVector, keep: &[usize]) -> Result<f64> {
    let n = state.qubit_count();
    // validate via the full path even when the complement is used
    let mut mask = 0usize;
    for &q in keep {
        if q >= n || mask & (1 << q) != 0 {
            return Err(Error::Argument(format!("invalid subsystem qubit {q}")));
        }
        mask |= 1 << q;
    }
    if keep.is_empty() {
        return Err(Error::Argument("empty subsystem".into()));
    }
    if keep.len() == n {
        return Ok(0.0);
    }
    let side: Vec<usize> = if 2 * keep.len() <= n {
        keep.to_vec()
    } else {
        (0..n).filter(|q| mask & (1 << q) == 0).collect()
    };
    let psi = state.bipartition_matrix(&side, 14)?;
    let rho = &psi * psi.adjoint();
    let ev: Vec<f64> = rho.symmetric_eigenvalues().iter().cloned().collect();
    Ok(entropy_of_spectrum(&ev))
}
