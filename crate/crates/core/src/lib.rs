//! Numerical toolkit for the coupled regularised Boussinesq (cRB) system
//!
//! ```text
//! u_tt − u_xx = ε [ ½ (u²)_xx + u_ttxx − δ (u − w) ]
//! w_tt − c² w_xx = ε [ (α/2)(w²)_xx + β w_ttxx + γ (u − w) ]
//! ```
//!
//! on a periodic interval `[−L, L]`, together with its weakly nonlinear
//! multiple-scales approximation built from Ostrovsky-type equations.
//!
//! * [`crb`] integrates the full system pseudospectrally with RK4.
//! * [`ostrovsky`] advances the reduced one-way equations with an
//!   integrating-factor RK4 scheme.
//! * [`wnl`] initialises, evolves and assembles the weakly nonlinear
//!   solution at leading, first and second order.
//! * [`diagnostics`] provides error metrics, power-law fits and the
//!   conservation monitors.
//! * [`scenario`] holds parameters, initial data and named presets.

#![allow(clippy::needless_range_loop)]

pub mod crb;
pub mod diagnostics;
pub mod error;
pub mod ostrovsky;
pub mod par;
pub mod scenario;
pub mod special;
pub mod spectral;
pub mod wnl;

pub use crate::crb::{crb_solve, CrbSolver, CrbState, Snapshot, TimeGrid};
pub use crate::error::{CrbError, Result};
pub use crate::scenario::{CaseKind, InitialCondition, MeanState, PhysParams, Preset};
pub use crate::spectral::{GridSpec, Spectral};
