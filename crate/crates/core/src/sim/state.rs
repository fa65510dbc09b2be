use nalgebra::{DMatrix, Matrix2, Matrix4};
use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use super::density::DensityMatrix;
use super::gates::{self, unitarity_defect};
use super::kernels;
use crate::error::{Error, Result};

const UNITARY_TOL: f64 = 1e-10;

/// Dense pure state over `n` qubits.
///
/// Amplitude `i` belongs to the basis state whose qubit `q` is bit `q` of
/// `i` (qubit 0 is the least significant bit).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StateVector {
    qubit_count: usize,
    amplitudes: Vec<C64>,
}

impl StateVector {
    /// Upper bound on the qubit count accepted by [`StateVector::zero`].
    pub const MAX_QUBITS: usize = 24;

    /// `|0…0⟩` on `n` qubits.
    pub fn zero(n: usize) -> Result<Self> {
        if n == 0 || n > Self::MAX_QUBITS {
            return Err(Error::Size(format!(
                "qubit count {n} outside 1..={}",
                Self::MAX_QUBITS
            )));
        }
        let mut amplitudes = vec![C64::new(0.0, 0.0); 1 << n];
        amplitudes[0] = C64::new(1.0, 0.0);
        Ok(Self {
            qubit_count: n,
            amplitudes,
        })
    }

    /// Computational basis state `|index⟩`.
    pub fn basis(n: usize, index: usize) -> Result<Self> {
        let mut s = Self::zero(n)?;
        if index >= s.dim() {
            return Err(Error::Index(format!("basis index {index} out of range")));
        }
        s.amplitudes[0] = C64::new(0.0, 0.0);
        s.amplitudes[index] = C64::new(1.0, 0.0);
        Ok(s)
    }

    /// Wraps raw amplitudes. The length must be a power of two; the vector
    /// must be normalized within `1e-8`.
    pub fn from_amplitudes(amplitudes: Vec<C64>) -> Result<Self> {
        let len = amplitudes.len();
        if len < 2 || !len.is_power_of_two() {
            return Err(Error::Size(format!(
                "amplitude count {len} is not a power of two ≥ 2"
            )));
        }
        let qubit_count = len.trailing_zeros() as usize;
        if qubit_count > Self::MAX_QUBITS {
            return Err(Error::Size(format!("{qubit_count} qubits exceeds limit")));
        }
        let s = Self {
            qubit_count,
            amplitudes,
        };
        let norm = s.norm();
        if (norm - 1.0).abs() > 1e-8 {
            return Err(Error::Validation(format!("state norm {norm} is not 1")));
        }
        Ok(s)
    }

    /// Normalizes arbitrary nonzero amplitudes into a state.
    pub fn normalized(mut amplitudes: Vec<C64>) -> Result<Self> {
        let norm = amplitudes.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
        if !(norm > 0.0 && norm.is_finite()) {
            return Err(Error::Validation("cannot normalize a zero vector".into()));
        }
        amplitudes.iter_mut().for_each(|a| *a /= norm);
        Self::from_amplitudes(amplitudes)
    }

    pub fn qubit_count(&self) -> usize {
        self.qubit_count
    }

    pub fn dim(&self) -> usize {
        self.amplitudes.len()
    }

    pub fn amplitudes(&self) -> &[C64] {
        &self.amplitudes
    }

    pub(crate) fn amplitudes_mut(&mut self) -> &mut [C64] {
        &mut self.amplitudes
    }

    pub fn norm(&self) -> f64 {
        self.amplitudes
            .iter()
            .map(|a| a.norm_sqr())
            .sum::<f64>()
            .sqrt()
    }

    pub(crate) fn check_qubit(&self, q: usize) -> Result<()> {
        if q >= self.qubit_count {
            return Err(Error::Index(format!(
                "qubit {q} out of range for {} qubits",
                self.qubit_count
            )));
        }
        Ok(())
    }

    pub(crate) fn check_pair(&self, a: usize, b: usize) -> Result<()> {
        self.check_qubit(a)?;
        self.check_qubit(b)?;
        if a == b {
            return Err(Error::Index(format!("two-qubit gate on repeated qubit {a}")));
        }
        Ok(())
    }

    /// Applies `u` to qubit `q`.
    pub fn apply_one_qubit(&mut self, q: usize, u: &Matrix2<C64>) -> Result<()> {
        self.check_qubit(q)?;
        let defect = unitarity_defect(u);
        if defect > UNITARY_TOL {
            return Err(Error::Validation(format!(
                "matrix is not unitary (defect {defect:.3e})"
            )));
        }
        kernels::one_qubit(&mut self.amplitudes, q, &gates::to_array2(u));
        Ok(())
    }

    /// `exp(iθ|11⟩⟨11|)` on qubits `q1`, `q2`.
    pub fn apply_cz_theta(&mut self, q1: usize, q2: usize, theta: f64) -> Result<()> {
        self.check_pair(q1, q2)?;
        kernels::phase_on_mask(
            &mut self.amplitudes,
            (1 << q1) | (1 << q2),
            C64::from_polar(1.0, theta),
        );
        Ok(())
    }

    /// `exp(iθ|1⟩⟨1| ⊗ |−⟩⟨−|)`: the Hadamard conjugate of CZ(θ) on the target.
    pub fn apply_cx_theta(&mut self, control: usize, target: usize, theta: f64) -> Result<()> {
        self.check_pair(control, target)?;
        kernels::cx_theta(&mut self.amplitudes, control, target, theta);
        Ok(())
    }

    /// Applies a 4×4 unitary to the pair; `q1` is the more significant index
    /// of the matrix.
    pub fn apply_two_qubit(&mut self, q1: usize, q2: usize, u: &Matrix4<C64>) -> Result<()> {
        self.check_pair(q1, q2)?;
        let defect = unitarity_defect(u);
        if defect > UNITARY_TOL {
            return Err(Error::Validation(format!(
                "matrix is not unitary (defect {defect:.3e})"
            )));
        }
        kernels::two_qubit(&mut self.amplitudes, q1, q2, &gates::to_array4(u));
        Ok(())
    }

    /// `⟨self|other⟩`.
    pub fn inner_product(&self, other: &StateVector) -> Result<C64> {
        if self.qubit_count != other.qubit_count {
            return Err(Error::Shape(format!(
                "inner product of {}- and {}-qubit states",
                self.qubit_count, other.qubit_count
            )));
        }
        Ok(dot(&self.amplitudes, &other.amplitudes))
    }

    /// `|⟨self|other⟩|²`.
    pub fn fidelity(&self, other: &StateVector) -> Result<f64> {
        Ok(self.inner_product(other)?.norm_sqr())
    }

    /// Partial trace onto `keep`. Bit `j` of the reduced index is qubit `keep[j]`.
    pub fn reduced_density_matrix(&self, keep: &[usize]) -> Result<DensityMatrix> {
        let psi = self.bipartition_matrix(keep, 14)?;
        Ok(DensityMatrix::from_matrix_unchecked(&psi * psi.adjoint()))
    }

    /// Reshapes the amplitudes into a `2^|keep| × 2^(N−|keep|)` matrix.
    pub(crate) fn bipartition_matrix(&self, keep: &[usize], limit: usize) -> Result<DMatrix<C64>> {
        if keep.is_empty() {
            return Err(Error::Argument("empty subsystem".into()));
        }
        if keep.len() > limit {
            return Err(Error::Argument(format!(
                "subsystem of {} qubits exceeds the partial-trace guard of {limit}",
                keep.len()
            )));
        }
        let mut seen = 0usize;
        for &q in keep {
            if q >= self.qubit_count {
                return Err(Error::Argument(format!("qubit {q} out of range")));
            }
            if seen & (1 << q) != 0 {
                return Err(Error::Argument(format!("qubit {q} listed twice")));
            }
            seen |= 1 << q;
        }
        let rest: Vec<usize> = (0..self.qubit_count)
            .filter(|q| seen & (1 << q) == 0)
            .collect();
        let rows = 1usize << keep.len();
        let cols = 1usize << rest.len();
        let mut m = DMatrix::zeros(rows, cols);
        for (i, &amp) in self.amplitudes.iter().enumerate() {
            let r = gather_bits(i, keep);
            let c = gather_bits(i, &rest);
            m[(r, c)] = amp;
        }
        Ok(m)
    }
}

pub(crate) fn gather_bits(i: usize, qubits: &[usize]) -> usize {
    qubits
        .iter()
        .enumerate()
        .fold(0, |acc, (j, &q)| acc | (((i >> q) & 1) << j))
}

pub(crate) fn dot(a: &[C64], b: &[C64]) -> C64 {
    a.iter().zip(b).map(|(x, y)| x.conj() * y).sum()
}
