//! Symmetry-reduced optimal control on matrix Lie groups with advected
//! parameters.
//!
//! The crate covers the algebraic layer ([`lie`]), retractions and their
//! tangent maps ([`retraction`]), the continuous reduced equations
//! ([`dynamics`], [`integrate`]), a discrete Lie–Poisson stepper
//! ([`discrete`]), boundary-value solvers ([`solver`]) and two worked models
//! ([`models`]): a heavy top on SO(3) and a unicycle avoiding a circular
//! obstacle on SE(2).

#![allow(clippy::neg_cmp_op_on_partial_ord)] // NaN must fail the checks

pub mod discrete;
pub mod dynamics;
pub mod error;
pub mod integrate;
pub mod lie;
pub mod models;
pub mod retraction;
pub mod solver;

pub use dynamics::{AdvectionCase, Potential, QuadraticCost, ReducedState, ReducedSystem, SplitDynamics, SplitState};
pub use error::{Error, Result};
pub use integrate::{simulate, simulate_split, Sample, Trajectory};
pub use lie::{pair, AlgebraVector, DualVector, GroupElement, GroupKind, LieAlgebra};
pub use retraction::Retraction;
