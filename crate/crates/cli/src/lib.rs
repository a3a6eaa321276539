//! Pipeline driver for the `opinion` command.

pub mod bench;
pub mod config;
pub mod error;
pub mod manifest;
pub mod pipeline;
