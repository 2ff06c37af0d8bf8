//! Experiment orchestration: configuration, the per-iteration pipeline,
//! metrics, scenario drivers, and output files.

pub mod config;
pub mod engine;
pub mod metrics;
pub mod output;
pub mod scenarios;

pub use config::{CombinationRule, ScenarioConfig, ScenarioKind, Strategy};
pub use engine::{DataSource, Engine, EngineOptions, EventCounts, PipelineOrder, StaticSource, WeightRule};
pub use metrics::{agreement_time, fast_weights, msd};
pub use scenarios::{run_chain_sweep, run_classify_bench, run_scenario, ReplicaTrace, StaticNetwork, TraceSet};
