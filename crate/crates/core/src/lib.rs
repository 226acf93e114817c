//! Lindblad rate equations for a two-level emitter coupled to a classical
//! configurational environment: steady states, field correlations, optical
//! spectra and photon-counting statistics.

pub mod analysis;
pub mod bloch;
pub mod correl;
pub mod counting;
pub mod error;
pub mod generator;
pub mod model;
pub mod scenarios;
pub mod spectrum;
pub mod state;
pub mod steady;

pub use correl::{ObservableSeries, SeriesKind, SeriesValues, Stationary};
pub use error::{Error, Result};
pub use generator::{apply_generator, build_generator};
pub use model::*;
pub use state::*;
pub use steady::*;
