//! Scenario files, built-in scenarios, report formats and the `medlink`
//! command line, on top of `medlink_core`.

pub mod cli;
pub mod report;
pub mod scenario_file;
pub mod sources;
