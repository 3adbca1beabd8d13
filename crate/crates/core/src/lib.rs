pub mod bogolyubov;
pub mod bohr;
pub mod demo;
pub mod error;
pub mod group;
pub mod homs;
pub mod linalg;
pub mod nets;
pub mod probe;
pub mod reps;

pub use error::{Error, Result};
