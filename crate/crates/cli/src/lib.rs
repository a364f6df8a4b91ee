//! Configuration, orchestration and serialization for the output
//! stabilizability analyzer CLI. The binary in `main.rs` is a thin shell
//! over these modules; tests drive them directly.

pub mod config;
pub mod report;
pub mod run;

pub use config::{parse_config, serialize_config, ConfigError, RunConfig};
pub use run::{
    agreement_exit_code, run_analysis, run_oracle_check, run_simulation, verdict_exit_code,
    Agreement, RunError,
};
