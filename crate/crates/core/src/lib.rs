//! Privacy- and latency-aware task placement on a three-tier vehicular edge
//! platform: per-vehicle OBUs, a shared roadside-unit pool and a rented cloud.
//!
//! The crate is generic over the [`Scalar`] used for times, sizes and metrics;
//! the aliases at the crate root fix it to `f64`.

pub mod error;
pub mod infrastructure;
pub mod metrics;
pub mod oracle;
pub mod policy;
pub mod scalar;
pub mod simengine;
pub mod workload;

pub use error::{Error, Result};
pub use infrastructure::{build_platform, Layer};
pub use metrics::{summarize, NmdScope, PrivacyWeighting};
pub use oracle::{brute_force_best, brute_force_best_shielded, ORACLE_MAX_TASKS};
pub use policy::{Assignment, ExecutionMode, PolicyKind};
pub use scalar::Scalar;
pub use simengine::run;
pub use workload::{
    builtin_workload, generate_workload, load_workload, AccuracyClass, BuiltinWorkload, GenParams,
    PrivacyClass, RealTimeClass,
};

pub type TaskSpec = workload::TaskSpec<f64>;
pub type WorkloadSpec = workload::WorkloadSpec<f64>;
pub type NodeSpec = infrastructure::NodeSpec<f64>;
pub type Platform = infrastructure::Platform<f64>;
pub type PlatformConfig = infrastructure::PlatformConfig<f64>;
pub type CapacityLedger = infrastructure::CapacityLedger<f64>;
pub type SimOptions = simengine::SimOptions<f64>;
pub type TaskOutcome = simengine::TaskOutcome<f64>;
pub type TraceReport = simengine::TraceReport<f64>;
pub type MetricsConfig = metrics::MetricsConfig<f64>;
pub type MetricsReport = metrics::MetricsReport<f64>;
pub type OracleResult = oracle::OracleResult<f64>;

/// Single-precision variants.
pub mod f32 {
    pub type TaskSpec = crate::workload::TaskSpec<f32>;
    pub type WorkloadSpec = crate::workload::WorkloadSpec<f32>;
    pub type Platform = crate::infrastructure::Platform<f32>;
    pub type PlatformConfig = crate::infrastructure::PlatformConfig<f32>;
    pub type SimOptions = crate::simengine::SimOptions<f32>;
    pub type TraceReport = crate::simengine::TraceReport<f32>;
    pub type MetricsConfig = crate::metrics::MetricsConfig<f32>;
    pub type MetricsReport = crate::metrics::MetricsReport<f32>;
}
