//! Problem files, trace CSVs, the subcommands of the `polycond` tool and
//! campaign runs.

pub mod campaign;
pub mod commands;
pub mod problem;
pub mod trace_io;

pub use campaign::{run_campaign, run_cell, Cell, ExperimentResult, RunResult};
pub use commands::{cmd_constants, cmd_estimate, cmd_phi, cmd_solve, cmd_verify};
pub use problem::{builtin, load_problem, write_problem, ProblemSpec};
pub use trace_io::{read_trace, write_trace, write_verdict};
