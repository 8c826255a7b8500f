//! Config parsing, CSV output and the subcommands of the `mzscatter` binary.

pub mod commands;
pub mod config;
pub mod table;

pub use commands::{cmd_doppler, cmd_epsilon_scan, cmd_fringe, cmd_shift_scan, run, Command};
pub use config::{parse_config, parse_config_with, ConfigError, RunConfig};
pub use table::CsvTable;

pub const EXIT_OK: i32 = 0;
pub const EXIT_CONFIG: i32 = 2;
pub const EXIT_PHYSICS: i32 = 3;
