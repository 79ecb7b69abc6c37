//! Stability and Hopf bifurcation analysis for the delayed Goodwin
//! growth-cycle subsystems, plus a fixed-step DDE integrator.

// `!(x > 0.0)` style guards are deliberate: they also reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod analysis;
pub mod cli;
pub mod error;
pub mod normal_form;
pub mod params;
pub mod sim;
pub mod spectral;
pub mod subsystem;

pub use error::{Error, Result};
pub use params::{presets, validate_parameters, ModelParameters, RawParameters};
pub use subsystem::{equilibrium, subsystem_coefficients, vector_field, Equilibrium, State, SubsystemCoefficients, Variant};
