//! Fidelity, Uhlmann holonomy and edge-state diagnostics for thermal states
//! of one-dimensional topological models and a mean-field superconductor.

pub mod bcs;
pub mod error;
pub mod fidelity;
pub mod holonomy;
pub mod linalg;
pub mod mat2;
pub mod quad;
pub mod realspace;
pub mod spectra;

pub use bcs::{critical_temperature, solve_gap, BcsParams, BdgMode, GapSolution};
pub use error::{Error, Result};
pub use fidelity::{fidelity_total, FidelityReport, ModePair, ModeState};
pub use holonomy::{holonomy, holonomy_angle, uhlmann_phase, HolonomyResult};
pub use mat2::Mat2;
pub use spectra::{BlochState, Model, ModelParams, MomentumGrid};
