//! Simulation and auto-tuning toolkit for a twin-rotor aerodynamic test rig.
//!
//! The crate provides four building blocks that compose into a closed-loop
//! simulation:
//!
//! * [`plant`] — a six-state nonlinear model of a twin rotor MIMO system
//!   (pitch/yaw beam driven by two DC rotors), together with its exact
//!   decomposition into a linear part plus matched and unmatched
//!   nonlinearities.
//! * [`l1`] — an adaptive output-tracking controller built around a state
//!   predictor, projection-bounded estimate integrators, and a low-pass
//!   control filter whose gain can be scheduled at run time.
//! * [`fuzzy`] — a Mamdani inference system that maps tracking-error
//!   magnitude and rate to the filter gain, plus the 32-parameter encoding
//!   used to tune its membership functions.
//! * [`mopso`] — a multi-objective particle swarm optimizer with a
//!   clustered archive, used to tune the fuzzy parameters against
//!   tracking-energy and control-effort objectives.
//!
//! [`sim`] ties plant and controller together on a fixed time grid and
//! produces per-step records; [`numerics`] holds the small dense-matrix,
//! ODE, and Lyapunov routines everything else leans on.
//!
//! The crate is `no_std` (with `alloc`) apart from its test suite; the
//! companion CLI crate adds file I/O, configuration, and plotting.

#![cfg_attr(not(any(test, feature = "std")), no_std)]
#![deny(unsafe_code)]

extern crate alloc;

pub mod error;
pub mod fuzzy;
pub mod l1;
pub mod mopso;
pub mod numerics;
pub mod plant;
pub mod sim;

pub use error::CoreError;
