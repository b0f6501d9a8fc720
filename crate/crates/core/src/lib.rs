//! Anharmonic oscillator chain with momentum-exchange noise and boundary
//! tension, its equilibrium thermodynamics, the limiting Euler system and
//! estimators comparing the two.

pub mod chain;
pub mod config;
pub mod eos;
pub mod error;
pub mod estimators;
pub mod experiment;
pub mod expr;
pub mod gibbs;
pub mod io;
pub mod numeric;
pub mod pde;
pub mod potential;
pub mod profile;
pub mod quadrature;
pub mod thermo;

pub use error::{Error, Result};
pub use potential::Potential;
pub use thermo::{Lambda, MacroState};
