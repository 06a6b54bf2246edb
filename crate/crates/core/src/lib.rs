//! Latency-optimal workload and power splitting across an IoT -> fog -> cloud
//! chain.
//!
//! - [`model`]: processing and transmission latency of a given split.
//! - [`slm`]: the two-stage successive linear minimization solver.
//! - [`oracle`]: a slow reference solver (power grid plus exact inner min-max).
//! - [`experiments`]: Monte-Carlo sweeps over fading IoT links.

pub mod experiments;
pub mod model;
pub mod oracle;
pub mod slm;

pub use model::{
    evaluate, Allocation, Evaluation, LayerParams, Latency, LatencyBreakdown, LinkParams, ModelError, Solution,
    SystemInstance,
};
pub use oracle::{grid_oracle, OracleError, OracleOptions};
pub use slm::{slm_run, Epsilon, SlmError, SlmOptions, SlmTrace, Termination};
