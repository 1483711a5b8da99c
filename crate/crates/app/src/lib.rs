//! Experiment runner, report persistence, HTTP service and CLI built on
//! [`sdea_core`].

pub mod cli;
pub mod config;
pub mod experiment;
pub mod mock_backend;
pub mod report;
pub mod server;

pub use sdea_core;
