//! Optical and mirror-displacement bistability of a driven Fabry-Perot
//! cavity whose moving mirror is Coulomb-coupled to a second charged
//! mirror.
//!
//! The crate is layered bottom-up:
//!
//! - [`physical_model`]: SI inputs and derived couplings.
//! - [`steady_state`]: mirror susceptibilities, the photon-number cubic,
//!   its roots, fold points and per-root fields.
//! - [`stability`]: linear stability of each root.
//! - [`dynamics`]: mean-field time integration, relaxation and
//!   quasi-static power ramps.
//! - [`bifurcation`]: power sweeps, bistability windows, hysteresis traces
//!   and parameter families.

// `!(a > b)` is used on purpose so that NaN inputs are rejected too
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod bifurcation;
pub mod dynamics;
mod error;
pub mod physical_model;
pub mod stability;
pub mod steady_state;

pub use error::{Error, Result};
pub use physical_model::{
    derive, derive_with, CoulombSpec, DerivedParams, DriveSpec, LinewidthConvention, OptomechCoupling,
    PhysicalConstants, SystemParams,
};
pub use steady_state::SteadyStateModel;
