//! Seeded simulator of the repeated compliance-audit game between a committed
//! auditor and an adaptive auditee.
//!
//! The [`game`] module owns the round loop; [`strategies`] and [`policies`]
//! provide the auditee and auditor sides, selected by name through the
//! [`registry`]. [`metrics`] scores trajectories, [`runner`] executes
//! config-driven sweeps, and [`analysis`] holds the closed-form oracles and
//! secondary experiments.

pub mod analysis;
pub mod error;
pub mod game;
pub mod metrics;
pub mod params;
pub mod policies;
pub mod registry;
pub mod runner;
pub mod strategies;

pub use error::{ConfigError, Error, GameError, Result};
pub use game::{
    make_rng_streams, run_game, step_truth, AuditObservation, Auditee, Auditor, GameConfig, Report,
    RngStreams, RoundRecord, Trajectory,
};
pub use metrics::{
    bonferroni_z, cell_metrics, coverage_loss, detection_threshold, gaming_gap, time_to_detection,
    welfare_loss, CellMetrics,
};
pub use params::Params;
pub use registry::{PolicySpec, Registry, StrategySpec};
pub use runner::{load_config, run_cell, run_sweep, CellAggregate, SweepConfig, SweepResult};
