//! TOML configuration and command-line overrides.
//!
//! Every command section is one struct that doubles as the clap argument
//! group and the TOML table, so a flag and a config key always share a name
//! (`--max-epochs` / `max_epochs`). Flags win over the file.

use std::path::{Path, PathBuf};

use clap::Args;
use globalgate::ansatz::{AnsatzKind, Connectivity};
use globalgate::hamiltonian::Method;
use globalgate::io::Manifest;
use globalgate::vqe::{AdamConfig, GradientMethod, LatticeSpec};
use serde::{Deserialize, Serialize};

use crate::error::CliError;

pub const SCHEMA: u32 = 1;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Model {
    Toric,
    Heisenberg,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Axis {
    Size,
    Depth,
}

macro_rules! overlay {
    ($ty:ident { $($field:ident),* $(,)? }) => {
        impl $ty {
            /// Field-wise `self` (flags) over `file`.
            pub fn overlay(self, file: Self) -> Self {
                Self { $($field: self.$field.or(file.$field)),* }
            }
        }
    };
}

#[derive(Clone, Debug, Default, Args, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TrainSection {
    #[arg(long, value_enum)]
    pub model: Option<Model>,
    /// `N` (chain), `RxC` (square) or `RxCp` (toric plaquettes).
    #[arg(long)]
    pub lattice: Option<String>,
    #[arg(long)]
    pub ansatz: Option<AnsatzKind>,
    #[arg(long, value_parser = parse_connectivity)]
    pub connectivity: Option<Connectivity>,
    #[arg(long)]
    pub k: Option<usize>,
    /// Field grid for the toric model.
    #[arg(long, value_delimiter = ',')]
    pub h: Option<Vec<f64>>,
    /// Frustration grid for the Heisenberg model.
    #[arg(long, value_delimiter = ',')]
    pub j2: Option<Vec<f64>>,
    #[arg(long)]
    pub instances: Option<usize>,
    #[arg(long)]
    pub max_epochs: Option<usize>,
    #[arg(long)]
    pub early_stop_delta: Option<f64>,
    #[arg(long)]
    pub order_param_interval: Option<usize>,
    #[arg(long, value_parser = parse_gradient)]
    pub gradient: Option<GradientMethod>,
    /// Regions file for γ; defaults to the regions around the central vertex.
    #[arg(long)]
    pub regions: Option<PathBuf>,
    #[arg(long)]
    pub step_size: Option<f64>,
    #[arg(skip)]
    pub adam: Option<AdamConfig>,
}

overlay!(TrainSection {
    model,
    lattice,
    ansatz,
    connectivity,
    k,
    h,
    j2,
    instances,
    max_epochs,
    early_stop_delta,
    order_param_interval,
    gradient,
    regions,
    step_size,
    adam
});

#[derive(Clone, Debug, Default, Args, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExpressSection {
    #[arg(long)]
    pub lattice: Option<String>,
    #[arg(long, value_delimiter = ',')]
    pub ansatz: Option<Vec<AnsatzKind>>,
    #[arg(long)]
    pub k: Option<usize>,
    #[arg(long)]
    pub samples: Option<usize>,
    #[arg(long)]
    pub a1_samples: Option<usize>,
    #[arg(long)]
    pub a2_samples: Option<usize>,
    #[arg(long)]
    pub kl_pairs: Option<usize>,
    #[arg(long)]
    pub bins: Option<usize>,
    /// Haar-random ensemble on this many qubits instead of the ansatze.
    #[arg(long)]
    pub haar_qubits: Option<usize>,
    /// Every sample uses all-zero parameters (a single repeated state).
    #[arg(long)]
    pub degenerate: Option<bool>,
    /// Also write the per-pair fidelities.
    #[arg(long)]
    pub fidelities: Option<bool>,
    #[arg(long)]
    pub memory_budget: Option<usize>,
}

overlay!(ExpressSection {
    lattice,
    ansatz,
    k,
    samples,
    a1_samples,
    a2_samples,
    kl_pairs,
    bins,
    haar_qubits,
    degenerate,
    fidelities,
    memory_budget
});

#[derive(Clone, Debug, Default, Args, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BpSection {
    #[arg(long, value_delimiter = ',')]
    pub ansatz: Option<Vec<AnsatzKind>>,
    #[arg(long, value_enum)]
    pub axis: Option<Axis>,
    /// Depth for a size sweep.
    #[arg(long)]
    pub k: Option<usize>,
    #[arg(long, value_delimiter = ',')]
    pub sizes: Option<Vec<usize>>,
    /// Chain length for a depth sweep.
    #[arg(long)]
    pub n: Option<usize>,
    #[arg(long, value_delimiter = ',')]
    pub depths: Option<Vec<usize>>,
    #[arg(long)]
    pub samples: Option<usize>,
    /// Parameter index; defaults to the first-layer R_Y on the last qubit.
    #[arg(long)]
    pub mu: Option<usize>,
    /// Per-parameter variances of the toric Hamiltonian on `lattice`.
    #[arg(long)]
    pub all_params: Option<bool>,
    #[arg(long)]
    pub lattice: Option<String>,
    #[arg(long)]
    pub h: Option<f64>,
}

overlay!(BpSection {
    ansatz,
    axis,
    k,
    sizes,
    n,
    depths,
    samples,
    mu,
    all_params,
    lattice,
    h
});

#[derive(Clone, Debug, Default, Args, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EdSection {
    #[arg(long, value_enum)]
    pub model: Option<Model>,
    #[arg(long)]
    pub lattice: Option<String>,
    #[arg(long, value_delimiter = ',')]
    pub h: Option<Vec<f64>>,
    #[arg(long, value_delimiter = ',')]
    pub j2: Option<Vec<f64>>,
    #[arg(long, value_parser = parse_method)]
    pub method: Option<Method>,
    /// Write each ground state as a `qsv1` file.
    #[arg(long)]
    pub dump_states: Option<bool>,
}

overlay!(EdSection {
    model,
    lattice,
    h,
    j2,
    method,
    dump_states
});

#[derive(Clone, Debug, Default, Args, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EntropySection {
    #[arg(long)]
    pub state: Option<PathBuf>,
    #[arg(long)]
    pub regions: Option<PathBuf>,
    /// Toric lattice whose default regions are used without `--regions`.
    #[arg(long)]
    pub lattice: Option<String>,
}

overlay!(EntropySection { state, regions, lattice });

/// The whole TOML file. A run's `manifest.json` carries the same shape
/// under `config` and is accepted by `--config` as well.
#[derive(Clone, Debug, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FileConfig {
    pub schema: Option<u32>,
    pub seed: Option<u64>,
    pub out: Option<PathBuf>,
    pub threads: Option<usize>,
    pub train: Option<TrainSection>,
    pub express: Option<ExpressSection>,
    pub bp_scan: Option<BpSection>,
    pub ed: Option<EdSection>,
    pub entropy: Option<EntropySection>,
}

impl FileConfig {
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let fail = |e: String| CliError::Config(format!("{}: {e}", path.display()));
        let text = std::fs::read_to_string(path).map_err(|e| fail(e.to_string()))?;
        if path.extension().is_some_and(|x| x == "json") {
            let manifest: Manifest<serde_json::Value> = serde_json::from_str(&text).map_err(|e| fail(e.to_string()))?;
            let cfg: FileConfig = serde_json::from_value(manifest.config).map_err(|e| fail(e.to_string()))?;
            return cfg.check_schema().map_err(fail);
        }
        Self::parse(&text).map_err(fail)
    }

    pub fn parse(text: &str) -> Result<Self, String> {
        let cfg: FileConfig = toml::from_str(text).map_err(|e| e.to_string())?;
        cfg.check_schema()
    }

    fn check_schema(self) -> Result<Self, String> {
        match self.schema {
            None | Some(SCHEMA) => Ok(self),
            Some(v) => Err(format!("schema {v} is not supported (expected {SCHEMA})")),
        }
    }
}

pub fn lattice(text: &str) -> Result<LatticeSpec, CliError> {
    text.parse().map_err(|e: globalgate::Error| CliError::Config(e.to_string()))
}

fn parse_connectivity(s: &str) -> Result<Connectivity, String> {
    match s {
        "neighbor" => Ok(Connectivity::Neighbor),
        "all" => Ok(Connectivity::All),
        _ => Err(format!("expected 'neighbor' or 'all', got '{s}'")),
    }
}

fn parse_gradient(s: &str) -> Result<GradientMethod, String> {
    match s {
        "adjoint" => Ok(GradientMethod::Adjoint),
        "parameter_shift" | "parameter-shift" | "shift" => Ok(GradientMethod::ParameterShift),
        _ => Err(format!("expected 'adjoint' or 'parameter_shift', got '{s}'")),
    }
}

fn parse_method(s: &str) -> Result<Method, String> {
    match s {
        "dense" => Ok(Method::Dense),
        "lanczos" => Ok(Method::Lanczos),
        _ => Err(format!("expected 'dense' or 'lanczos', got '{s}'")),
    }
}
