//! Forcing theory for shear homeomorphisms of the torus.
//!
//! The crate is split along the layers of the theory:
//!
//! * [`rational`] exact rotation-number arithmetic (reduced fractions mod 1,
//!   Farey neighbours, mediants).
//! * [`forcing`] the forcing order on simple orbits and simple pairs, and the
//!   mediant subdivision tree.
//! * [`markov`] the rectangle labelling and transition skeleton of the Markov
//!   partition of a simple pair, together with its periodic symbolic cycles.
//! * [`kicked`] the kicked accelerated particle map, its Jacobian and a Newton
//!   periodic-orbit solver.
//! * [`sweep`] parameter-plane scans producing tongue diagrams.

pub mod error;
pub mod forcing;
pub mod kicked;
pub mod markov;
pub mod rational;
pub mod sweep;

pub use error::{Error, Result};
pub use forcing::{ForcingElement, MediantTree};
pub use kicked::{LiftedPoint, MapParams, PeriodicOrbit, SolveError, Stability, TorusPoint};
pub use markov::{RectKind, RectangleId, SymbolicCycle, TransitionGraph};
pub use rational::{Direction, FareyPair, Rational};
pub use sweep::{SweepConfig, Tip, TongueRecord};
