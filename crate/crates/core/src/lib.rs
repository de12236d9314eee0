pub mod analytics;
pub mod braid;
pub mod cli;
pub mod error;
pub mod harness;
pub mod measures;
pub mod membership;
pub mod pipeline;
pub mod presentation;
pub mod solver;
pub mod word;

pub use error::{Error, Result};
