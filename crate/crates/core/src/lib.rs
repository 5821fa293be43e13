pub mod cli;
pub mod demos;
pub mod equilibrium;
pub mod error;
pub mod hermite_pade;
pub mod measures;
pub mod nikishin;
pub mod par;
pub mod poly;
pub mod reduction;
pub mod simquad;

pub use error::{Error, Result};
