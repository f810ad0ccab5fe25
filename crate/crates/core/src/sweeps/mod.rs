//! Scenario files, figure presets, sweeps and the self-check.

pub mod check;
pub mod preset;
pub mod scenario;
pub mod sweep;

pub use check::{self_check, self_check_with, CheckConfig, CheckReport, SuiteReport};
pub use preset::{preset, PRESETS};
pub use scenario::{load_scenario, OracleConfig, Scenario, ScenarioConfig};
pub use sweep::{closed_form, evaluate, oracle_value, read_csv, rel_gap, run_sweep, write_csv, write_csv_file, ResultRow, Status, SweepSpec, SweepValues, CSV_HEADER};
