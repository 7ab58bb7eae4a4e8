use std::sync::Arc;

use nalgebra::DVector;

use asearch_core::potentials::{
    CentralSpring2D, DissipationModel, IpcBarrier1D, NeoHookeanChain1D, OneSidedQuadraticBarrier, QuadraticSpring,
    Side,
};
use asearch_core::{CompositePotential, MassMatrix, Potential, SystemState};

use crate::config::{BarrierChoice, SceneConfig, SceneKind};
use crate::error::{CliError, CliResult};

/// Everything a run needs, assembled from a [`SceneConfig`].
#[derive(Debug, Clone)]
pub struct Scene {
    pub config: SceneConfig,
    pub mass: MassMatrix,
    pub potential: CompositePotential,
    pub dissipation: Option<DissipationModel>,
    pub initial: SystemState,
    /// Spatial dimension; coordinates are interleaved per particle.
    pub dim: usize,
    pub chain: Option<NeoHookeanChain1D>,
}

impl Scene {
    pub fn build(config: &SceneConfig) -> CliResult<Self> {
        let c = config;
        let mut potential = CompositePotential::new();
        let mut elastic: Option<Arc<dyn Potential>> = None;
        let mut chain = None;
        let mut dim = 1;

        let barrier_edge = match c.barrier.kind {
            BarrierChoice::Ipc => c.barrier.wall + c.barrier.dhat,
            _ => c.barrier.wall,
        };
        let ipc = match c.barrier.kind {
            BarrierChoice::Ipc => Some(IpcBarrier1D::from_stiffness(c.barrier.kappa, c.barrier.dhat, c.barrier.wall, Side::Above)?),
            _ => None,
        };
        match c.barrier.kind {
            BarrierChoice::None => {}
            BarrierChoice::Quadratic => {
                potential = potential.with(OneSidedQuadraticBarrier::new(c.barrier.stiffness, c.barrier.wall, Side::Above)?, 1.0)
            }
            BarrierChoice::Ipc => potential = potential.with(ipc.unwrap(), 1.0),
        }
        if c.kind == SceneKind::CentralOrbit && c.barrier.kind != BarrierChoice::None {
            return Err(CliError::config("central_orbit scenes take no barrier"));
        }

        let (mass, x0, v0) = match c.kind {
            SceneKind::Harmonic => {
                let spring: Arc<dyn Potential> = Arc::new(QuadraticSpring::new(c.material.stiffness, c.material.rest_length)?);
                potential.push(spring.clone(), 1.0);
                elastic = Some(spring);
                let x = c.initial.x.clone().unwrap_or_else(|| vec![c.material.rest_length + 1.0]);
                let v = c.initial.v.clone().unwrap_or_else(|| vec![0.0]);
                (MassMatrix::uniform(1, c.material.mass)?, x, v)
            }
            SceneKind::PointCollision => {
                if c.barrier.kind == BarrierChoice::None {
                    return Err(CliError::config("point_collision needs a barrier"));
                }
                let (x, v) = match c.initial.beta {
                    Some(beta) => (vec![barrier_edge + beta * c.h * c.initial.speed], vec![-c.initial.speed]),
                    None => (
                        c.initial.x.clone().unwrap_or_else(|| vec![barrier_edge + c.initial.gap]),
                        c.initial.v.clone().unwrap_or_else(|| vec![-c.initial.speed]),
                    ),
                };
                (MassMatrix::uniform(1, c.material.mass)?, x, v)
            }
            SceneKind::CentralOrbit => {
                dim = 2;
                let spring: Arc<dyn Potential> =
                    Arc::new(CentralSpring2D::new(c.material.stiffness, c.material.rest_length, c.material.pivot)?);
                potential.push(spring.clone(), 1.0);
                elastic = Some(spring);
                let [px, py] = c.material.pivot;
                let x = c.initial.x.clone().unwrap_or_else(|| vec![px + 1.0, py]);
                let v = c.initial.v.clone().unwrap_or_else(|| vec![0.0, 1.0]);
                (MassMatrix::uniform(2, c.material.mass)?, x, v)
            }
            SceneKind::ChainCollision | SceneKind::FreeChain => {
                let rho = c.material.mass / c.material.length;
                let e = match (c.material.youngs_modulus, c.material.wave_speed) {
                    (Some(e), None) => e,
                    (None, Some(speed)) => rho * speed * speed,
                    (Some(_), Some(_)) => {
                        return Err(CliError::config("set either `material.youngs_modulus` or `material.wave_speed`"))
                    }
                    (None, None) => return Err(CliError::config("chain scenes need a modulus or a wave speed")),
                };
                let ch = NeoHookeanChain1D::uniform(c.material.elements, c.material.length, e, c.material.mass)?;
                let arc: Arc<dyn Potential> = Arc::new(ch.clone());
                potential.push(arc.clone(), 1.0);
                elastic = Some(arc);
                let n = ch.nodes();
                let x = match (&c.initial.x, c.kind) {
                    (Some(x), _) => x.clone(),
                    (None, SceneKind::ChainCollision) => {
                        ch.rest_positions(barrier_edge + c.initial.gap).iter().copied().collect()
                    }
                    (None, _) => {
                        let rest = ch.rest_positions(0.0);
                        rest.iter().map(|r| c.initial.stretch * r).collect()
                    }
                };
                let default_v = if c.kind == SceneKind::ChainCollision { -c.initial.speed } else { c.initial.speed };
                let v = c.initial.v.clone().unwrap_or_else(|| vec![default_v; n]);
                let m = ch.masses();
                chain = Some(ch);
                (m, x, v)
            }
        };

        if x0.len() != mass.len() || v0.len() != mass.len() {
            return Err(CliError::config(format!(
                "initial state needs {} coordinates, got x: {}, v: {}",
                mass.len(),
                x0.len(),
                v0.len()
            )));
        }
        let initial = SystemState::new(DVector::from_vec(x0), DVector::from_vec(v0))?;
        if !potential.is_feasible(&initial.x) {
            return Err(CliError::config("initial state lies outside the potential's domain"));
        }

        let d = &c.damping;
        let active = [d.rayleigh_mu, d.mass_mu, d.friction_mu].iter().filter(|&&mu| mu != 0.0).count();
        if active > 1 {
            return Err(CliError::config("choose one of rayleigh_mu, mass_mu and friction_mu"));
        }
        if [d.rayleigh_mu, d.mass_mu, d.friction_mu].iter().any(|&mu| !(mu >= 0.0)) {
            return Err(CliError::config("damping coefficients must be non-negative"));
        }
        let dissipation = if d.rayleigh_mu > 0.0 {
            let base = elastic.ok_or_else(|| CliError::config("Rayleigh damping needs an elastic term"))?;
            Some(DissipationModel::Rayleigh { mu: d.rayleigh_mu, base })
        } else if d.mass_mu > 0.0 {
            Some(DissipationModel::MassProportional { mu: d.mass_mu })
        } else if d.friction_mu > 0.0 {
            let barrier = ipc.ok_or_else(|| CliError::config("friction needs an ipc barrier"))?;
            Some(DissipationModel::Friction { mu: d.friction_mu, barrier })
        } else {
            None
        };
        if dissipation.is_some() && !c.integrator.kind.supports_dissipation() {
            return Err(CliError::config(format!("{} cannot be combined with damping", c.integrator.kind)));
        }

        Ok(Self { config: c.clone(), mass, potential, dissipation, initial, dim, chain })
    }

    /// Centre-of-mass velocity; its norm when `dim > 1`.
    pub fn com_velocity(&self, v: &DVector<f64>) -> f64 {
        let m = self.mass.diag();
        let mut sq = 0.0;
        let mut last = 0.0;
        for axis in 0..self.dim {
            let (mut p, mut total) = (0.0, 0.0);
            for i in (axis..v.len()).step_by(self.dim) {
                p += m[i] * v[i];
                total += m[i];
            }
            last = p / total;
            sq += last * last;
        }
        if self.dim == 1 {
            last
        } else {
            sq.sqrt()
        }
    }
}
