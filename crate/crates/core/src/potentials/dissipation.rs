use std::sync::Arc;

use nalgebra::{DMatrix, DVector};

use super::{ipc_normal_force_weights, IpcBarrier1D};

use crate::error::{Error, Result};
use crate::potential::{project_psd, Potential};
use crate::state::MassMatrix;

/// Semi-implicit Rayleigh damping folded into the implicit solve:
/// `P_n(x) = (μh/2)‖(x − x_n)/h‖²_K` with `K` frozen and PSD.
#[derive(Debug, Clone, PartialEq)]
pub struct RayleighDampingPseudoPotential {
    mu: f64,
    stiffness: DMatrix<f64>,
    anchor: DVector<f64>,
    h: f64,
}

impl RayleighDampingPseudoPotential {
    /// `stiffness` is projected to PSD before use.
    pub fn new(mu: f64, stiffness: DMatrix<f64>, anchor: DVector<f64>, h: f64) -> Result<Self> {
        let p = Self::from_psd(mu, stiffness, anchor, h)?;
        Ok(Self { stiffness: project_psd(p.stiffness), ..p })
    }

    /// Like [`Self::new`] for a matrix already known to be PSD.
    fn from_psd(mu: f64, stiffness: DMatrix<f64>, anchor: DVector<f64>, h: f64) -> Result<Self> {
        if !(mu >= 0.0) || !(h > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "damping needs μ ≥ 0 and h > 0, got μ={mu}, h={h}"
            )));
        }
        if stiffness.nrows() != anchor.len() || !stiffness.is_square() {
            return Err(Error::DimensionMismatch { expected: anchor.len(), found: stiffness.nrows() });
        }
        Ok(Self { mu, stiffness, anchor, h })
    }

    pub fn mu(&self) -> f64 {
        self.mu
    }

    pub fn stiffness(&self) -> &DMatrix<f64> {
        &self.stiffness
    }

    fn scale(&self) -> f64 {
        self.mu / self.h
    }
}

/// Freezes `∂²base/∂x²(x_n)` as the damping matrix.
pub fn build_rayleigh(
    mu: f64,
    base: &dyn Potential,
    x_n: &DVector<f64>,
    h: f64,
) -> Result<RayleighDampingPseudoPotential> {
    RayleighDampingPseudoPotential::from_psd(mu, base.projected_hessian(x_n), x_n.clone(), h)
}

/// Mass-proportional variant: the damping matrix is the lumped mass.
pub fn build_mass_damping(
    mu: f64,
    m: &MassMatrix,
    x_n: &DVector<f64>,
    h: f64,
) -> Result<RayleighDampingPseudoPotential> {
    RayleighDampingPseudoPotential::from_psd(mu, DMatrix::from_diagonal(m.diag()), x_n.clone(), h)
}

impl Potential for RayleighDampingPseudoPotential {
    fn energy(&self, x: &DVector<f64>) -> f64 {
        let d = x - &self.anchor;
        0.5 * self.scale() * d.dot(&(&self.stiffness * &d))
    }

    fn gradient(&self, x: &DVector<f64>) -> DVector<f64> {
        (&self.stiffness * (x - &self.anchor)) * self.scale()
    }

    fn hessian(&self, _x: &DVector<f64>) -> DMatrix<f64> {
        &self.stiffness * self.scale()
    }

    fn projected_hessian(&self, x: &DVector<f64>) -> DMatrix<f64> {
        self.hessian(x)
    }
}

/// Lagged Coulomb-type drag `P_n(x) = (μh/2)‖(x − x_n)/h‖²_λ` with per-dof
/// normal-force weights `λ ≥ 0` taken at `x_n`.
#[derive(Debug, Clone, PartialEq)]
pub struct CoulombFrictionPseudoPotential {
    mu: f64,
    weights: DVector<f64>,
    anchor: DVector<f64>,
    h: f64,
}

impl CoulombFrictionPseudoPotential {
    pub fn new(mu: f64, weights: DVector<f64>, anchor: DVector<f64>, h: f64) -> Result<Self> {
        if !(mu >= 0.0) || !(h > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "friction needs μ ≥ 0 and h > 0, got μ={mu}, h={h}"
            )));
        }
        if weights.len() != anchor.len() {
            return Err(Error::DimensionMismatch { expected: anchor.len(), found: weights.len() });
        }
        if let Some(w) = weights.iter().find(|w| !(**w >= 0.0)) {
            return Err(Error::InvalidParameter(format!("friction weights must be ≥ 0, got {w}")));
        }
        Ok(Self { mu, weights, anchor, h })
    }

    pub fn weights(&self) -> &DVector<f64> {
        &self.weights
    }

    fn scale(&self) -> f64 {
        self.mu / self.h
    }
}

impl Potential for CoulombFrictionPseudoPotential {
    fn energy(&self, x: &DVector<f64>) -> f64 {
        0.5 * self.scale()
            * self
                .weights
                .iter()
                .zip(x.iter().zip(self.anchor.iter()))
                .map(|(w, (x, a))| w * (x - a) * (x - a))
                .sum::<f64>()
    }

    fn gradient(&self, x: &DVector<f64>) -> DVector<f64> {
        (x - &self.anchor).component_mul(&self.weights) * self.scale()
    }

    fn hessian(&self, _x: &DVector<f64>) -> DMatrix<f64> {
        DMatrix::from_diagonal(&(&self.weights * self.scale()))
    }

    fn projected_hessian(&self, x: &DVector<f64>) -> DMatrix<f64> {
        self.hessian(x)
    }
}

/// How a scene dissipates energy; turned into a per-step pseudo-potential
/// anchored at the implicit velocity `v = (x − anchor) / step`.
#[derive(Debug, Clone)]
pub enum DissipationModel {
    /// Damping matrix `∂²base/∂x²(x_n)` (stiffness-proportional).
    Rayleigh { mu: f64, base: Arc<dyn Potential> },
    /// Damping matrix equal to the lumped mass (mass-proportional).
    MassProportional { mu: f64 },
    /// Drag weighted by barrier normal forces at `x_n`.
    Friction { mu: f64, barrier: IpcBarrier1D },
}

impl DissipationModel {
    pub fn pseudo_potential(
        &self,
        m: &MassMatrix,
        x_n: &DVector<f64>,
        anchor: &DVector<f64>,
        step: f64,
    ) -> Result<Box<dyn Potential>> {
        Ok(match self {
            DissipationModel::Rayleigh { mu, base } => Box::new(RayleighDampingPseudoPotential::from_psd(
                *mu,
                base.projected_hessian(x_n),
                anchor.clone(),
                step,
            )?),
            DissipationModel::MassProportional { mu } => Box::new(RayleighDampingPseudoPotential::from_psd(
                *mu,
                DMatrix::from_diagonal(m.diag()),
                anchor.clone(),
                step,
            )?),
            DissipationModel::Friction { mu, barrier } => Box::new(CoulombFrictionPseudoPotential::new(
                *mu,
                ipc_normal_force_weights(x_n, barrier)?,
                anchor.clone(),
                step,
            )?),
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::potentials::QuadraticSpring;

    #[test]
    fn zero_mu_gives_zero_potential() {
        let base = QuadraticSpring::new(4.0, 0.0).unwrap();
        let xn = DVector::from_element(1, 0.3);
        let p = build_rayleigh(0.0, &base, &xn, 0.1).unwrap();
        assert_eq!(p.energy(&DVector::from_element(1, 1.7)), 0.0);
        assert_eq!(p.gradient(&DVector::from_element(1, 1.7))[0], 0.0);
    }

    #[test]
    fn hand_evaluated_quadratic_form() {
        let base = QuadraticSpring::new(4.0, 0.0).unwrap();
        let xn = DVector::from_element(1, 0.3);
        let p = build_rayleigh(0.05, &base, &xn, 0.1).unwrap();
        let x = DVector::from_element(1, 0.5);
        assert!((p.energy(&x) - 0.04).abs() < 1e-15);
        assert_eq!(p.gradient(&xn)[0], 0.0);
    }

    #[test]
    fn damping_force_under_implicit_velocity() {
        // −∇P_n(x) = −μ K (x − x_n)/h = −μ K v_{n+1}
        let base = QuadraticSpring::new(4.0, 0.0).unwrap();
        let xn = DVector::from_element(1, 0.0);
        let h = 0.1;
        let p = build_rayleigh(0.05, &base, &xn, h).unwrap();
        let v = 2.0;
        let x = DVector::from_element(1, h * v);
        assert!((p.gradient(&x)[0] - 0.05 * 4.0 * v).abs() < 1e-14);
    }

    #[test]
    fn indefinite_base_is_clamped() {
        let k = DMatrix::from_row_slice(2, 2, &[1.0, 3.0, 3.0, 1.0]);
        let p = RayleighDampingPseudoPotential::new(1.0, k, DVector::zeros(2), 1.0).unwrap();
        let eig = p.stiffness().clone().symmetric_eigen();
        assert!(eig.eigenvalues.min() > -1e-12);
    }

    #[test]
    fn friction_rejects_negative_weights() {
        let w = DVector::from_column_slice(&[1.0, -1.0]);
        assert!(CoulombFrictionPseudoPotential::new(0.1, w, DVector::zeros(2), 0.1).is_err());
    }
}
