pub mod analysis;
pub mod channel;
pub mod config;
pub mod cost;
pub mod engine;
pub mod error;
pub mod experiment;
pub mod report;
pub mod topology;
pub mod validate;

pub use error::{Error, Result};
