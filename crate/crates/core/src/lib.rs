//! Viscous shock waves for the inflow problem of the one-dimensional
//! isentropic compressible Navier–Stokes equations in Lagrangian coordinates.
//!
//! The crate builds shock and boundary-layer profiles, constructs
//! large-oscillation initial data around a shifted shock, integrates the
//! moving-frame initial-boundary value problem and evaluates the quantities
//! that control its stability (density bounds, energy, boundary integrals,
//! sup-norm decay).

// `!(x > 0.0)` is how NaN gets rejected alongside non-positive values
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod config;
pub mod diagnostics;
pub mod error;
pub mod experiment;
pub mod io;
pub mod gas;
pub mod grid;
pub mod ode;
pub mod perturbation;
pub mod profile;
pub mod quadrature;
pub mod solver;
pub mod sweep;
pub mod verify;

pub use error::{Error, Result};
pub use gas::{EndState, FlowRegion, GasParams};
pub use profile::{BlProfile, ProfileOptions, ShockProfile};
