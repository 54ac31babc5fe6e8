//! Neural decision dynamics on the simplex and the agents built on them.

pub mod analysis;
pub mod coarse;
pub mod error;
pub mod io;
pub mod nav;
pub mod neural;
pub mod vision;

pub use error::{Error, Result};
