//! Stacked recurrent networks, written from scratch, applied to three
//! dynamical-system tasks: correcting orbits of a mis-specified Lorenz system,
//! denoising collective-motion trajectories, and sliding-window streamflow
//! forecasting against a GR4J + degree-day snow baseline.

pub mod error;
pub mod experiment;
pub mod hydro;
pub mod lorenz;
pub mod rng;
pub mod rnn;
pub mod swarm;

pub use error::{Error, Result};
