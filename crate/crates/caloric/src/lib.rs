//! Pseudospectral simulator and verification harness for Schrodinger map
//! flows into embedded compact Kahler targets.
//!
//! The pipeline: evolve initial data by the harmonic-map heat flow in an
//! auxiliary time `s`, construct the caloric gauge by parallel transport from
//! `s = infinity` backwards, express derivatives of the map in that gauge,
//! and verify the structural identities (torsion-freeness, curvature
//! commutators, the heat-tension identity, dynamic separation of the
//! curvature contraction) together with Littlewood-Paley frequency-envelope
//! diagnostics. A separate integrator runs the Schrodinger map flow itself
//! and checks its conservation laws and gauged residuals.

pub mod config;
pub mod diagnostics;
pub mod error;
pub mod gauge;
pub mod heatflow;
pub mod io;
pub mod runner;
pub mod slflow;
pub mod spectral;
pub mod target;

pub use error::{Error, Result};
