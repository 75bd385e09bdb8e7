//! Coupled single-server queue simulation under SJF, SRPT and FIFO, with
//! exact pathwise checks and fluid-scale convergence statistics.

pub mod cli;
pub mod config;
pub mod dynamics;
pub mod error;
pub mod fluid;
pub mod io;
pub mod measure;
pub mod par;
pub mod primitives;
pub mod rng;
pub mod verify;

pub use error::{Error, Result};
