//! Case registry, training-data generation and error metrics.

mod data;
mod metrics;
mod registry;
mod run;

pub use data::{generate_training_data, DataOptions, DataPoint, Provenance, SparseDataset, EULER_COMPONENTS};
pub use metrics::{compare_snapshots, error_metrics, restrict_nearest, ErrorMetrics};
pub use registry::{
    build_initial_state, default_net2_widths, lookup, registry, CaseSpec, IcFormula, Role,
    SamplingCounts, System,
};
pub use run::{solve_case, SolveOptions};
