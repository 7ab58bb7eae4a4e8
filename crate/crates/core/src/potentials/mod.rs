//! Concrete potential-energy models and dissipation pseudo-potentials.

mod barrier;
mod chain;
mod dissipation;
mod elastic;

pub use barrier::{ipc_normal_force_weights, IpcBarrier1D, OneSidedQuadraticBarrier, Side};
pub use chain::NeoHookeanChain1D;
pub use dissipation::{
    build_mass_damping, build_rayleigh, CoulombFrictionPseudoPotential, DissipationModel,
    RayleighDampingPseudoPotential,
};
pub use elastic::{CentralSpring2D, Gravity, QuadraticSpring};

/// Barrier stiffness used when a scene does not set one (N/m).
pub const DEFAULT_KAPPA: f64 = 1e5;
/// Barrier activation distance used when a scene does not set one (m).
pub const DEFAULT_DHAT: f64 = 1e-3;

/// Selects the dofs `i` with `i % dim == axis` of an interleaved coordinate vector.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Axis {
    pub dim: usize,
    pub axis: usize,
}

impl Axis {
    pub const SCALAR: Axis = Axis { dim: 1, axis: 0 };

    pub fn new(dim: usize, axis: usize) -> Self {
        assert!(dim > 0 && axis < dim, "axis {axis} out of range for dimension {dim}");
        Self { dim, axis }
    }

    pub fn contains(&self, i: usize) -> bool {
        i % self.dim == self.axis
    }

    pub fn dofs(&self, n: usize) -> impl Iterator<Item = usize> {
        (self.axis..n).step_by(self.dim)
    }
}

impl Default for Axis {
    fn default() -> Self {
        Self::SCALAR
    }
}
