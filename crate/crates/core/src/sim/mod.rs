//! Dense statevector engine.

mod density;
pub mod gates;
pub(crate) mod kernels;
mod state;

pub use density::{entanglement_entropy, von_neumann_entropy, DensityMatrix, EIGENVALUE_FLOOR};
pub use state::StateVector;
pub(crate) use state::dot;

use num_complex::Complex64 as C64;
use rand::Rng;
use rand_distr::StandardNormal;

impl StateVector {
    /// Haar-random pure state: normalized i.i.d. complex Gaussian amplitudes.
    pub fn haar_random<R: Rng + ?Sized>(n: usize, rng: &mut R) -> crate::Result<Self> {
        let dim = StateVector::zero(n)?.dim();
        let amps = (0..dim)
            .map(|_| C64::new(rng.sample(StandardNormal), rng.sample(StandardNormal)))
            .collect();
        StateVector::normalized(amps)
    }
}
