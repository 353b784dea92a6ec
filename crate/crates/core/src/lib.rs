//! Decoherence of pure-mixed entangled system-apparatus states.
//!
//! The crate evolves a system (qubit) ⊗ apparatus ⊗ environment state under a
//! random apparatus-environment coupling, tracks the reduced system-apparatus
//! state against two candidate separable end states, monitors the partial
//! transpose, and searches for nearby separable states.

pub mod dynamics;
pub mod error;
pub mod measures;
pub mod operator;
pub mod runner;
pub mod seeding;
pub mod separability;
pub mod states;

pub use error::{Error, Result};
