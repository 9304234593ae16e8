//! Command-line front end and HTTP service for the `mailsift` classifier.

pub mod commands;
pub mod error;
pub mod service;

pub use error::CliError;
