//! Quantum-mirror simulator for two-photon SPDC experiments.
//!
//! The crate is organised by physical layer:
//!
//! * [`kinematics`]: photon states, energy-momentum conservation, emission
//!   angles, phase conjugation and crossing conversion.
//! * [`wavemix`]: degenerate three-wave mixing (coupled-mode integration and
//!   the closed-form amplification factor).
//! * [`geometry`]: thin lenses, planar and spherical quantum mirrors, and a
//!   2D meridional ray tracer.
//! * [`diffraction`]: Fraunhofer single/double slit patterns and visibility.
//! * [`coincidence`]: seeded Monte Carlo coincidence experiments.
//! * [`harness`]: configuration, orchestration and output files used by the
//!   `qmirror` command line tool.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod coincidence;
pub mod csv;
pub mod diffraction;
pub mod geometry;
pub mod harness;
pub mod kinematics;
pub mod units;
pub mod vector;
pub mod wavemix;

pub use kinematics::{CrystalMedium, DispersionTable, Helicity, PairState, Photon};
pub use units::Units;
pub use vector::Vec3;
