pub mod boxmodel;
pub mod carpet;
pub mod error;
pub mod harness;
pub mod numerics;
pub mod propagator;
pub mod wavepacket;

pub use error::{Error, Result};
