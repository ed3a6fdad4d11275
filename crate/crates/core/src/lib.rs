//! Rotating-wave approximation error analysis for the Dicke model.

pub mod bethe;
pub mod bounds;
pub mod dynamics;
pub mod eigenstate;
pub mod error;
pub mod hamiltonian;
pub mod par;
pub mod plot;
pub mod sector;
pub mod sweep;
pub mod verify;

pub use error::{Result, RwaError};
