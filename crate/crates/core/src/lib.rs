pub mod conic;
pub mod error;
pub mod experiment;
pub mod model;
pub mod numerics;
pub mod recovery;
pub mod restriction;
pub mod rng;

pub use error::{Error, Result};

/// Crate version, recorded in run manifests.
pub const VERSION: &str = env!("CARGO_PKG_VERSION");
