//! Scenario presets, configuration and the command implementations behind the
//! `nlwaves` binary.

pub mod commands;
pub mod config;

pub use commands::{
    cmd_field, cmd_ks, cmd_linstab, cmd_run, cmd_tables, load_basis, resolve_cache_dir, simulate, simulate_with, RunReport, Simulation,
};
pub use config::{RhsPath, ScenarioConfig, ScenarioId, Seed};
