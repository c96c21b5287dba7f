//! DeGroot opinion dynamics on influence networks, closed-form predictions
//! of how consensus changes crowd and individual error, and the analysis
//! pipeline for pre/post estimate-revision experiments.

pub mod dynamics;
pub mod empirical;
pub mod error;
pub mod metrics;
pub mod network;
pub mod phase;
pub mod stats;
pub mod verify;

pub use dynamics::{
    asymptotic_consensus, bias_transform, degroot_step, iterate_to_convergence, BeliefState,
    ConvergenceOptions, Trajectory,
};
pub use error::{Error, NetworkViolation, Result};
pub use metrics::{CrowdStats, ImprovementRegions, ObservedChange, Prediction};
pub use network::{
    generate, influence_centralization, leading_influence_vector, validate, CentralityVector,
    GeneratorParams, InfluenceMatrix, NetworkDiagnostics, NetworkKind, PowerIterationOptions,
};
pub use phase::{phase_grid, PhaseAxes, PhaseGrid, PhaseParams};
