//! Expressibility, trainability and entanglement diagnostics.

mod bp;
mod entropy;
mod express;

pub use bp::{all_parameter_variances, bp_variance_scan, gradient_variance, BpPoint, MuSelector, ScanAxis};
pub use entropy::{default_toric_regions, entropy_breakdown, topological_entropy, EntropyBreakdown, RegionSpec};
pub use express::{
    ensemble_stats, fidelity_kl, frame_potential, frame_potential_with_budget, haar_frame_potential,
    moment_distance, moment_distance_direct, moment_distance_with_budget, pair_fidelities, porter_thomas_log_mass,
    sample_states, CircuitEnsemble, EnsembleStats, HaarEnsemble, KlResult, StateSource, StatsOptions,
    DEFAULT_MEMORY_BUDGET, KL_CAP,
};
