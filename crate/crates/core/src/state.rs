//! Flat-coordinate state and lumped mass shared by every integrator.

use nalgebra::DVector;

use crate::error::{Error, Result};
use crate::potential::Potential;

/// Lumped diagonal mass.
#[derive(Debug, Clone, PartialEq)]
pub struct MassMatrix {
    diag: DVector<f64>,
}

impl MassMatrix {
    pub fn new(diag: DVector<f64>) -> Result<Self> {
        if diag.is_empty() {
            return Err(Error::InvalidParameter("mass vector is empty".into()));
        }
        if let Some(bad) = diag.iter().find(|m| !(m.is_finite() && **m > 0.0)) {
            return Err(Error::InvalidParameter(format!(
                "mass entries must be positive and finite, got {bad}"
            )));
        }
        Ok(Self { diag })
    }

    pub fn from_slice(diag: &[f64]) -> Result<Self> {
        Self::new(DVector::from_column_slice(diag))
    }

    pub fn uniform(n: usize, m: f64) -> Result<Self> {
        Self::new(DVector::from_element(n, m))
    }

    pub fn diag(&self) -> &DVector<f64> {
        &self.diag
    }

    pub fn len(&self) -> usize {
        self.diag.len()
    }

    pub fn is_empty(&self) -> bool {
        self.diag.is_empty()
    }

    pub fn total(&self) -> f64 {
        self.diag.sum()
    }

    /// `m ∘ v`
    pub fn apply(&self, v: &DVector<f64>) -> DVector<f64> {
        self.diag.component_mul(v)
    }

    /// `m⁻¹ ∘ f`
    pub fn solve(&self, f: &DVector<f64>) -> DVector<f64> {
        f.component_div(&self.diag)
    }

    /// `‖v‖²_m`
    pub fn norm_squared(&self, v: &DVector<f64>) -> f64 {
        self.diag
            .iter()
            .zip(v.iter())
            .map(|(m, v)| m * v * v)
            .sum()
    }

    /// `⟨a, b⟩_m`
    pub fn inner(&self, a: &DVector<f64>, b: &DVector<f64>) -> f64 {
        self.diag
            .iter()
            .zip(a.iter().zip(b.iter()))
            .map(|(m, (a, b))| m * a * b)
            .sum()
    }
}

/// Positions, velocities and energy bookkeeping of one simulated system.
#[derive(Debug, Clone, PartialEq)]
pub struct SystemState {
    pub x: DVector<f64>,
    pub v: DVector<f64>,
    pub t: f64,
    /// Energy level the integrator is steering toward (J).
    pub energy_target: f64,
    /// Frictional loss estimate of the last step (J).
    pub friction_loss: f64,
}

impl SystemState {
    pub fn new(x: DVector<f64>, v: DVector<f64>) -> Result<Self> {
        if x.is_empty() {
            return Err(Error::InvalidParameter("state has no coordinates".into()));
        }
        if x.len() != v.len() {
            return Err(Error::DimensionMismatch {
                expected: x.len(),
                found: v.len(),
            });
        }
        Ok(Self {
            x,
            v,
            t: 0.0,
            energy_target: 0.0,
            friction_loss: 0.0,
        })
    }

    pub fn from_slices(x: &[f64], v: &[f64]) -> Result<Self> {
        Self::new(DVector::from_column_slice(x), DVector::from_column_slice(v))
    }

    pub fn dof(&self) -> usize {
        self.x.len()
    }

    pub fn is_finite(&self) -> bool {
        self.x.iter().chain(self.v.iter()).all(|c| c.is_finite())
    }

    /// Sets the energy target to `factor · H(x, v)`.
    pub fn init_energy_target(&mut self, m: &MassMatrix, p: &dyn Potential, factor: f64) -> Result<()> {
        self.energy_target = factor * total_energy(self, m, p)?;
        Ok(())
    }

    pub fn momentum(&self, m: &MassMatrix) -> DVector<f64> {
        m.apply(&self.v)
    }
}

/// `½ v·(m∘v)`
pub fn kinetic_energy(v: &DVector<f64>, m: &MassMatrix) -> f64 {
    0.5 * m.norm_squared(v)
}

/// Hamiltonian `½‖v‖²_m + P(x)`; errors when `x` lies outside the potential's domain.
pub fn total_energy(state: &SystemState, m: &MassMatrix, p: &dyn Potential) -> Result<f64> {
    check_len(m.len(), state.dof())?;
    let pe = p.energy(&state.x);
    if !pe.is_finite() {
        return Err(Error::Infeasible);
    }
    Ok(kinetic_energy(&state.v, m) + pe)
}

pub(crate) fn check_len(expected: usize, found: usize) -> Result<()> {
    if expected == found {
        Ok(())
    } else {
        Err(Error::DimensionMismatch { expected, found })
    }
}
