use thiserror::Error;

/// Errors raised by workload construction, platform validation, simulation and metrics.
#[derive(Debug, Error)]
pub enum Error {
    #[error("unknown workload `{name}` (valid: {valid})")]
    UnknownWorkload { name: String, valid: String },

    #[error("invalid generator parameter `{field}`: {reason}")]
    InvalidGenParams { field: &'static str, reason: String },

    #[error("task {task_id}: invalid `{field}`: {reason}")]
    InvalidTask {
        task_id: u64,
        field: &'static str,
        reason: String,
    },

    #[error("duplicate task id {0}")]
    DuplicateTaskId(u64),

    #[error("workload parse error at line {line}, column {column}: {message}")]
    Parse {
        line: usize,
        column: usize,
        message: String,
    },

    #[error("invalid platform config `{field}`: {reason}")]
    InvalidPlatform { field: &'static str, reason: String },

    #[error("node {node_id} has no free core at t={start}")]
    Admission { node_id: usize, start: f64 },

    #[error("task {task_id} is owned by vehicle {owner} but the platform has {vehicles} vehicles")]
    OwnerOutOfRange {
        task_id: u64,
        owner: usize,
        vehicles: usize,
    },

    #[error("task {task_id}: invalid assignment to node {node_id}: {reason}")]
    InvalidAssignment {
        task_id: u64,
        node_id: usize,
        reason: String,
    },

    #[error("invalid metric input: {0}")]
    Metric(String),

    #[error("oracle instance has {tasks} tasks; the cap is {cap}")]
    OracleTooLarge { tasks: usize, cap: usize },

    #[error("oracle needs at least one task")]
    OracleEmpty,

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
