pub mod bits;
pub mod cli;
pub mod error;
pub mod errormodel;
pub mod params;
pub mod prf;
pub mod protocol;
pub mod secgame;
pub mod simulator;

pub use error::{Error, Result};
