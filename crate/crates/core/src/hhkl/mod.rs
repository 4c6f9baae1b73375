//! Cluster-decomposed evolution of product initial states and its error bounds.

mod bounds;
mod decompose;
mod plan;

pub use bounds::{
    easiness_time, error_bound, error_branch, integrate_relative, regime_error, truncation_error_bound, ErrorBranch,
    TAIL_DECAY,
};
pub use decompose::{decompose_evolve, product_state, sample_output, ClusterState, HhklPoint, HhklSetup};
pub use plan::{
    default_velocity, fixed_step_threshold, plan_decomposition, HhklPlan, PlanOptions, Regime, DEFAULT_STEP_TIME,
};
