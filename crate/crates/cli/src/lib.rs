//! Configuration and stage pipeline behind the `threebody` binary.

pub mod config;
pub mod pipeline;
