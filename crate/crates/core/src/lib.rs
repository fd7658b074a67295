//! Metric structures on free groups.

pub mod automaton;
pub mod error;
pub mod group;
pub mod manhattan;
pub mod metrics;
pub mod perron;
pub mod structures;
pub mod transfer;

pub use error::{Error, Result};
