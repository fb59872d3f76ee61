pub mod cli;
pub mod constructions;
pub mod error;
pub mod families;
pub mod functionals;
pub mod norm;
pub mod parameters;
pub mod rational;
pub mod report;
pub mod vectors;
pub mod verify;

pub use error::{Error, Result};
pub use rational::Q;
