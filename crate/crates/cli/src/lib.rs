//! Config-driven front end for `mstruct-core`.

pub mod commands;
pub mod config;
pub mod verify;

pub use commands::exit_code;
pub use config::Env;
