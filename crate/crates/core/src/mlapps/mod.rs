//! Model retraining on drifting streams.

pub mod data;
pub mod experiment;
pub mod knn;
pub mod linreg;

pub use data::{DriftDataset, Example, Mode, ModeSchedule, Pattern};
pub use experiment::{evaluate_policy, run_experiment, ExperimentConfig, ExperimentResult, Policy, PolicySummary, Task, TraceRow};
pub use knn::{knn_classify, miss_rate};
pub use linreg::{linreg_fit, linreg_mse};
