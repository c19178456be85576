//! Steady state, heat currents, and gain of a periodically modulated
//! three-qubit thermal transistor.
//!
//! Three qubits (emitter E, base B, collector C) are each coupled to their
//! own bosonic bath; a periodic drive on the base qubit frequency splits its
//! bath transitions into Floquet sidebands. This crate builds the resulting
//! population rate equations, solves them for the steady state by several
//! independent routes, and evaluates the steady-state heat currents and the
//! transistor amplification factors.
//!
//! Module map:
//! - [`model`]: parameters, quasi-energy levels, transition graph;
//! - [`floquet`]: harmonic weights P_q of the drive;
//! - [`lindblad`]: rate generator and steady-state solvers;
//! - [`currents`]: heat currents, amplification, sweeps;
//! - [`approx`]: closed-form approximations used as cross-checks;
//! - [`linalg`], [`ode`]: minimal numerical kernels.

pub mod approx;
pub mod currents;
pub mod error;
pub mod floquet;
pub mod linalg;
pub mod lindblad;
pub mod model;
pub mod ode;

pub use error::{Error, Result};
