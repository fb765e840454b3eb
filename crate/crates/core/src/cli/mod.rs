//! Command-line frontend: operator literals, subcommands and reports.

mod app;
pub mod format;
pub mod parse;
pub mod report;

pub use app::{pairwise_spread, run, EXIT_OK, EXIT_USAGE, EXIT_VERIFICATION};
