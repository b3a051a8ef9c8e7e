//! File formats, configuration, parallel scheduling and the `situ`
//! command-line tool on top of [`situ_core`].

pub mod cli;
pub mod commands;
pub mod config;
pub mod error;
pub mod io;
pub mod pipeline;

pub use error::{Error, Result};
