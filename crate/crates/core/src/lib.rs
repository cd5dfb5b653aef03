//! Generation expansion planning with hourly variation limits: input
//! ingestion, parameter estimation, LP model generation, a bundled simplex
//! solver and the experiment drivers built on top of them.

pub mod estimate;
pub mod experiments;
pub mod ingest;
pub mod model;
pub mod params_io;
pub mod solve;
pub mod synthetic;
pub mod toys;
pub mod types;
pub mod validate;

pub use types::*;
