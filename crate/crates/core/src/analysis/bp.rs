//! Gradient-variance scans for diagnosing barren plateaus.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::ansatz::{build, AnsatzKind, CircuitSpec};
use crate::error::{Error, Result};
use crate::hamiltonian::{z_probe, PauliSum};
use crate::lattice::build_chain;
use crate::sim::StateVector;
use crate::vqe::{adjoint_gradient, shift_derivative, InitSpec};

/// Which parameter's derivative is sampled.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum MuSelector {
    /// `R_Y` of the last qubit in the first `R₃` layer.
    LastQubitFirstRy,
    /// `R_Y` of `qubit` in the first `R₃` layer.
    FirstLayerRy { qubit: usize },
    Index { index: usize },
}

impl Default for MuSelector {
    fn default() -> Self {
        MuSelector::LastQubitFirstRy
    }
}

impl MuSelector {
    pub fn resolve(&self, circuit: &CircuitSpec) -> Result<usize> {
        let found = match *self {
            MuSelector::LastQubitFirstRy => circuit.first_layer_ry(circuit.n_qubits - 1),
            MuSelector::FirstLayerRy { qubit } => circuit.first_layer_ry(qubit),
            MuSelector::Index { index } => (index < circuit.param_count).then_some(index),
        };
        found.ok_or_else(|| Error::Argument(format!("{self:?} does not name a parameter of this circuit")))
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "axis", rename_all = "snake_case", deny_unknown_fields)]
pub enum ScanAxis {
    /// Chains of several sizes at fixed depth.
    Size { k: usize, sizes: Vec<usize> },
    /// One chain at several depths.
    Depth { n: usize, depths: Vec<usize> },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BpPoint {
    pub axis_value: usize,
    pub n_qubits: usize,
    pub k: usize,
    pub param_index: usize,
    pub variance: f64,
    pub mean: f64,
    pub samples: usize,
}

fn mean_and_variance(x: &[f64]) -> (f64, f64) {
    let n = x.len() as f64;
    let mean = x.iter().sum::<f64>() / n;
    let var = x.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, var)
}

fn draw(circuit: &CircuitSpec, seed: u64, i: usize) -> Vec<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(i as u64);
    InitSpec::default().sample(circuit.param_count, &mut rng)
}

fn check_samples(samples: usize) -> Result<()> {
    if samples < 100 {
        return Err(Error::Argument(format!("need at least 100 samples, got {samples}")));
    }
    Ok(())
}

/// Sample mean and variance of `∂_μ⟨H⟩` over uniform parameter draws,
/// each derivative from the two-term shift rule.
pub fn gradient_variance(
    circuit: &CircuitSpec,
    h: &PauliSum,
    mu: MuSelector,
    samples: usize,
    seed: u64,
) -> Result<(usize, f64, f64)> {
    check_samples(samples)?;
    let j = mu.resolve(circuit)?;
    let zero = StateVector::zero(circuit.n_qubits)?;
    let grads = (0..samples)
        .into_par_iter()
        .map(|i| shift_derivative(circuit, &draw(circuit, seed, i), h, &zero, j))
        .collect::<Result<Vec<_>>>()?;
    let (mean, var) = mean_and_variance(&grads);
    Ok((j, mean, var))
}

/// Variance table along a size or depth axis, on chains with `Z` measured
/// on the last qubit.
pub fn bp_variance_scan(
    kind: AnsatzKind,
    axis: &ScanAxis,
    samples: usize,
    mu: MuSelector,
    seed: u64,
) -> Result<Vec<BpPoint>> {
    let points: Vec<(usize, usize, usize)> = match axis {
        ScanAxis::Size { k, sizes } => sizes.iter().map(|&n| (n, n, *k)).collect(),
        ScanAxis::Depth { n, depths } => depths.iter().map(|&k| (k, *n, k)).collect(),
    };
    points
        .into_iter()
        .map(|(axis_value, n, k)| {
            let circuit = build(&build_chain(n)?, kind, k)?;
            let h = z_probe(n, n - 1)?;
            let (param_index, mean, variance) = gradient_variance(&circuit, &h, mu, samples, seed)?;
            Ok(BpPoint {
                axis_value,
                n_qubits: n,
                k,
                param_index,
                variance,
                mean,
                samples,
            })
        })
        .collect()
}

/// Per-parameter variance of `∂_μ⟨H⟩` for every parameter at once.
pub fn all_parameter_variances(circuit: &CircuitSpec, h: &PauliSum, samples: usize, seed: u64) -> Result<Vec<f64>> {
    check_samples(samples)?;
    let zero = StateVector::zero(circuit.n_qubits)?;
    let grads = (0..samples)
        .into_par_iter()
        .map(|i| adjoint_gradient(circuit, &draw(circuit, seed, i), h, &zero).map(|(_, g)| g))
        .collect::<Result<Vec<_>>>()?;
    Ok((0..circuit.param_count)
        .map(|j| {
            let column: Vec<f64> = grads.iter().map(|g| g[j]).collect();
            mean_and_variance(&column).1
        })
        .collect())
}
