//! Classification by nearest label, confusion matrices, and the
//! config-driven runner that trains both arms and writes reports.

mod config;
mod evaluate;
mod runner;

pub use config::{
    Auto, DataConfig, ExperimentConfig, LabelCount, LearningRate, MseArmConfig, OutlierConfig,
    OutlierMode, SubsetConfig, SubsetMode, SyntheticConfig, UniformArmConfig,
};
pub use evaluate::{classify, evaluate, ConfusionMatrix};
pub use runner::{
    run_experiment, ArmReport, BisectionSummary, ExperimentOutcome, ExperimentReport, GdSummary,
    OutlierSummary, RunReport, Timings, MSE_METHOD, UNIFORM_METHOD,
};
