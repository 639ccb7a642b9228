//! Signalized-corridor eco-driving toolkit: a hierarchical speed planner
//! (long-term free-flow trajectory generation through green windows plus a
//! short-term car-following layer) and a single-lane traffic
//! microsimulator with human-driver and unconnected-automation baselines.

pub mod cf;
pub mod corridor;
pub mod error;
pub mod ff;
pub mod green_window;

pub use error::{Error, Result};
