//! Time integration for Hamiltonian elastodynamics with barrier contact.
//!
//! The crate centres on the decoupled α-method built on implicit Euler
//! ([`integrators::step_a1`], [`integrators::step_asearch`]): positions come
//! from an optimization-based implicit solve, velocities are corrected by a
//! force difference weighted by `α`, and A-search picks `α` per step to
//! follow an energy target. Baselines, Butcher-tableau algebra and the
//! analysis instruments used to check the method live alongside.

pub mod analysis;
pub mod error;
pub mod fd;
pub mod integrators;
pub mod potential;
pub mod potentials;
pub mod solver;
pub mod state;
pub mod tableau;

pub use error::{Error, Result};
pub use integrators::{IntegratorKind, IntegratorSpec, StepDiagnostics, Stepper};
pub use potential::{CompositePotential, Potential, ZeroPotential};
pub use solver::{NewtonSettings, SolveReport};
pub use state::{kinetic_energy, total_energy, MassMatrix, SystemState};
pub use tableau::Tableau;
