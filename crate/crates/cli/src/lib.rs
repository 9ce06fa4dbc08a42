//! Configuration, persistence and command-line plumbing for `ionflow`.

pub mod config;
pub mod error;
pub mod init;
pub mod runner;
pub mod snapshot;
pub mod sweep;
pub mod timeseries;
