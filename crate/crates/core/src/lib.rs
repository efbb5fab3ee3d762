//! Switching-rule synthesis and closed-loop simulation for a totem-pole
//! bridgeless rectifier (TPBR) doing power factor correction.
//!
//! The crate is organized around the workflow:
//!
//! 1. [`model`] builds the affine switched model of the converter and the
//!    uncertainty polytope (load resistance, equilibrium current, input
//!    voltage) over which the rule must be robust.
//! 2. [`lmi`] assembles a semidefinite feasibility problem per input-voltage
//!    polarity, solves it with a max-margin interior-point backend, and
//!    re-verifies the certificate through an independent assembly path.
//! 3. [`control`] evaluates the resulting switching law at runtime: reference
//!    generation, polarity arbitration, argmax mode selection, gate mapping
//!    and Lyapunov diagnostics.
//! 4. [`sim`] runs fixed-step closed-loop simulations against a distorted
//!    grid with load steps and discontinuous-conduction clamping.
//! 5. [`analysis`] computes THD, power factor, ripple and switching metrics
//!    from simulation traces.
//! 6. [`config`] and [`plot`] provide the file formats and SVG output used
//!    by the `tpbr` command-line tool.

pub mod analysis;
pub mod config;
pub mod control;
pub mod lmi;
pub mod model;
pub mod plot;
pub mod sim;

/// Column vector of the two converter states `[i_L_B, v_C_o]`.
pub type Vec2 = nalgebra::Vector2<f64>;
/// 2x2 real matrix in SI units.
pub type Mat2 = nalgebra::Matrix2<f64>;
