//! Command-line front end for `su11sim`: configuration files, presets,
//! subcommand runners and atomic output.

pub mod config;
pub mod error;
pub mod output;
pub mod presets;
pub mod runners;
pub mod svg;
