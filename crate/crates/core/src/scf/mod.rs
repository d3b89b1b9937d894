//! Collect workload and cluster features, choose executors per node with a
//! classifier, and recalculate execution properties within upper bounds.

mod cluster;
mod collect;
mod config;
mod oracle;

pub use cluster::{ClusterSpec, Manager, MIN_WORKER_MEMORY_MB};
pub use collect::{collect, collect_builtin, collect_builtin_sized, workload_level, AppMetadata};
pub use config::{
    decide, epn_for_class, host_cores, recalculate_config, update, ExecConfig, Properties, RuntimeSettings,
    Update, UpperBounds, BOUNDS_ENV, MIN_EXECUTOR_MEMORY_MB,
};
pub use oracle::{generate_training_dataset, label_oracle};
