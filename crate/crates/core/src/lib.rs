pub mod assignment;
pub mod cluster;
pub mod data;
pub mod error;
pub mod guided;
pub mod metrics;
pub mod model_io;
pub mod pipeline;
pub mod rbm;
pub mod synthetic;
pub mod voting;

pub use error::{Error, Result};
