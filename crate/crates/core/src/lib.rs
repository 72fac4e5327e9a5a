//! Simulation laboratory for population protocols that assign unique labels
//! to anonymous agents.
//!
//! The [`engine`] runs protocols under the uniform random pairwise
//! scheduler, [`labeling`] holds the protocols themselves, [`verify`] checks
//! runs and evaluates lower bounds, and [`experiments`] drives seeded sweeps
//! and model fits.

pub mod cli;
pub mod engine;
mod error;
pub mod experiments;
pub mod labeling;
pub mod primitives;
pub mod verify;

pub use error::Error;
