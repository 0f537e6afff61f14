//! Reachability-guided bidirectional A* for automated parking.

pub mod bench;
pub mod error;
pub mod geometry;
pub mod grid;
pub mod hastar;
pub mod path;
pub mod pipeline;
pub mod reach;
pub mod reeds_shepp;
pub mod safe_set;
pub mod scenario;
pub mod search;
pub mod world;

pub use error::{Error, Result};
