pub mod bench;
pub mod cli;
pub mod datagen;
pub mod error;
pub mod linalg;
pub mod precond;
pub mod sketch;
pub mod solvers;

pub use error::{Error, Result};
