//! File formats, plots and commands around `lpbf-core`.

pub mod commands;
pub mod config;
pub mod formats;
pub mod manifest;
pub mod svg;

pub use config::{Config, Overrides, CONFIG_ENV};
