//! Verification instruments: linear update matrices, the single-particle
//! collision harness, a Störmer–Verlet reference integrator and the modal
//! energy spectrum of a chain.

mod collision;
mod linear;
mod reference;
mod spectrum;

pub use collision::{collide, BarrierKind, CollisionReport, CollisionScenario, MAX_COLLISION_STEPS};
pub use linear::{
    build_update_matrix, decoupled_alpha_closed_form, midpoint_closed_form, symplectic_euler_closed_form,
    LinearMethod, LinearUpdateMatrix, StabilityRow, stability_rows,
};
pub use reference::{reference_collision, reference_trajectory, ReferenceCollision, ReferenceTrajectory, REFERENCE_DRIFT_LIMIT};
pub use spectrum::{modal_spectrum, ModalBasis, SpectrumReport};
