//! Cluster expansion: plan validation, Ursell functions, the truncated
//! `log Ξ` and the volume estimate built from it.

pub mod cluster;
pub mod engine;
pub mod plan;
pub mod series;

pub use cluster::{cluster_sum, enumerate_clusters, incompatible, ursell, Cluster};
pub use engine::{
    approximate_volume, kp_partial_sums, log_xi_truncated, Diagnostics, PolymerModel, RouteCounts,
    TruncatedExpansion, VolumeApproximation, MAX_SUPPORTS,
};
pub use plan::{
    certified_rho, default_mode, is_admissible, max_admissible_delta, truncation_depth, validate_plan,
    ExpansionPlan, PlanOptions,
};
pub use series::Series;
