//! Library side of the `hgcpd` binary: run configuration and the
//! generate / detect / eval / spectrum commands.

pub mod commands;
pub mod config;

pub use config::RunConfig;
