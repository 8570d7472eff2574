//! Command line and HTTP front end.

pub mod commands;
pub mod server;
pub mod source;

pub use commands::{run, Cli};
