//! Long-range potentials of the He(2³S₁)+He(2³P) system, ro-vibrational
//! bound spectra of the purely long-range ungerade wells, and reduction of
//! photoassociation measurements into binding energies with a full
//! line-shift budget.

pub mod basis;
pub mod constants;
pub mod error;
pub mod exec;
pub mod lineshift;
pub mod potentials;
pub mod radial;
pub mod spectra;

pub use error::{Error, Result};
