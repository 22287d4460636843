//! Sensor logs, output files, run parameters and the command implementations.

mod commands;
mod sensor_log;
mod output;
mod params;

pub use commands::{cmd_replay, cmd_simulate, CommandOutput};
pub use sensor_log::{fmt6, parse_sensor_log, write_sensor_log, SensorLogRecord, LOG_HEADER};
pub use output::{write_plotdata, write_trace, PLOT_HEADER, TRACE_HEADER};
pub use params::{parse_config_file, path_entry, RunParams, Scope, PARAMS};
