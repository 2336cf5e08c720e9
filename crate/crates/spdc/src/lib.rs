//! Numerical design and analysis toolkit for quasi-phase-matched type-II
//! SPDC sources in periodically poled KTP: phase-matching geometry and
//! temperature tuning, emission spectra and ring images, the interferometric
//! compensator and polarization-entangled output state, Hong-Ou-Mandel
//! interference, count-rate accounting and two-qubit state tomography.

pub mod config;
pub mod dispersion;
pub mod emission;
pub mod error;
pub mod jones;
pub mod phasematch;
pub mod rates;
pub mod report;
pub mod solver;
pub mod spectrum;
pub mod tomography;
pub mod twophoton;

pub use error::{Error, Result};
