use nalgebra::DVector;

use super::collision::{CollisionScenario, MAX_COLLISION_STEPS};
use crate::error::{Error, Result};
use crate::potential::Potential;
use crate::state::{kinetic_energy, MassMatrix, SystemState};

/// Allowed relative energy drift of a reference run.
pub const REFERENCE_DRIFT_LIMIT: f64 = 0.01;

/// Störmer–Verlet samples at a fixed stride.
#[derive(Debug, Clone, PartialEq)]
pub struct ReferenceTrajectory {
    pub t: Vec<f64>,
    pub x: Vec<DVector<f64>>,
    pub v: Vec<DVector<f64>>,
    /// Largest `|H − H₀| / max(|H₀|, ε)` seen at any step.
    pub max_drift: f64,
}

impl ReferenceTrajectory {
    pub fn last(&self) -> (&DVector<f64>, &DVector<f64>) {
        (self.x.last().unwrap(), self.v.last().unwrap())
    }
}

/// Velocity Verlet with a cached force.
struct Verlet<'a> {
    m: &'a MassMatrix,
    p: &'a dyn Potential,
    dt: f64,
    x: DVector<f64>,
    v: DVector<f64>,
    acc: DVector<f64>,
    h0: f64,
    scale: f64,
    max_drift: f64,
}

impl<'a> Verlet<'a> {
    fn new(state: &SystemState, m: &'a MassMatrix, p: &'a dyn Potential, dt: f64) -> Result<Self> {
        if !(dt > 0.0 && dt.is_finite()) {
            return Err(Error::InvalidParameter(format!("dt_ref must be positive, got {dt}")));
        }
        if state.dof() != m.len() {
            return Err(Error::DimensionMismatch { expected: m.len(), found: state.dof() });
        }
        if !p.is_feasible(&state.x) {
            return Err(Error::Infeasible);
        }
        let h0 = p.energy(&state.x) + kinetic_energy(&state.v, m);
        Ok(Self {
            m,
            p,
            dt,
            acc: -m.solve(&p.gradient(&state.x)),
            x: state.x.clone(),
            v: state.v.clone(),
            h0,
            scale: h0.abs().max(1e-300),
            max_drift: 0.0,
        })
    }

    fn step(&mut self) -> Result<()> {
        let half = &self.v + &self.acc * (0.5 * self.dt);
        self.x += &half * self.dt;
        let pe = self.p.energy(&self.x);
        if !pe.is_finite() {
            return Err(Error::UnstableReference(f64::INFINITY));
        }
        self.acc = -self.m.solve(&self.p.gradient(&self.x));
        self.v = half + &self.acc * (0.5 * self.dt);
        let drift = (pe + kinetic_energy(&self.v, self.m) - self.h0).abs() / self.scale;
        self.max_drift = self.max_drift.max(drift);
        if drift > REFERENCE_DRIFT_LIMIT {
            return Err(Error::UnstableReference(drift));
        }
        Ok(())
    }
}

/// Integrates `duration` seconds at `dt_ref`, keeping every `stride`-th state.
pub fn reference_trajectory(
    initial: &SystemState,
    m: &MassMatrix,
    p: &dyn Potential,
    dt_ref: f64,
    duration: f64,
    stride: usize,
) -> Result<ReferenceTrajectory> {
    let mut vv = Verlet::new(initial, m, p, dt_ref)?;
    let steps = (duration / dt_ref).round() as usize;
    let stride = stride.max(1);
    let mut out = ReferenceTrajectory {
        t: vec![initial.t],
        x: vec![vv.x.clone()],
        v: vec![vv.v.clone()],
        max_drift: 0.0,
    };
    for n in 1..=steps {
        vv.step()?;
        if n % stride == 0 || n == steps {
            out.t.push(initial.t + n as f64 * dt_ref);
            out.x.push(vv.x.clone());
            out.v.push(vv.v.clone());
        }
    }
    out.max_drift = vv.max_drift;
    Ok(out)
}

/// Exit speed and contact time of a collision scenario under Verlet at `dt_ref`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ReferenceCollision {
    pub exit_speed: f64,
    pub contact_time: f64,
    pub max_drift: f64,
}

pub fn reference_collision(scenario: &CollisionScenario, dt_ref: f64) -> Result<ReferenceCollision> {
    scenario.validate()?;
    let p = scenario.potential()?;
    let m = MassMatrix::uniform(1, 1.0)?;
    let edge = scenario.support_edge();
    // start at the support edge; free flight before it is exact
    let start = SystemState::from_slices(&[edge], &[-scenario.speed])?;
    let mut vv = Verlet::new(&start, &m, p.as_ref(), dt_ref)?;
    let limit = MAX_COLLISION_STEPS.max((1e3 / (scenario.omega2.sqrt() * dt_ref)) as usize);
    for n in 1..=limit {
        vv.step()?;
        if vv.x[0] >= edge && vv.v[0] > 0.0 {
            return Ok(ReferenceCollision {
                exit_speed: vv.v[0],
                contact_time: n as f64 * dt_ref,
                max_drift: vv.max_drift,
            });
        }
    }
    Err(Error::NonTermination(limit))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::analysis::BarrierKind;
    use crate::potentials::QuadraticSpring;

    #[test]
    fn quadratic_collision_keeps_speed() {
        let s = CollisionScenario::with_hbar(BarrierKind::Quadratic, 1.0, 0.5);
        let r = reference_collision(&s, 1e-4).unwrap();
        assert!((r.exit_speed - 1.0).abs() < 1e-6, "{}", r.exit_speed);
        assert!((r.contact_time - std::f64::consts::PI).abs() < 2e-4);
    }

    #[test]
    fn harmonic_energy_bounded() {
        let m = MassMatrix::uniform(1, 1.0).unwrap();
        let spring = QuadraticSpring::new(1.0, 0.0).unwrap();
        let s = SystemState::from_slices(&[1.0], &[0.0]).unwrap();
        let periods = 100.0 * 2.0 * std::f64::consts::PI;
        let r = reference_trajectory(&s, &m, &spring, 1e-3, periods, 1000).unwrap();
        assert!(r.max_drift < 1e-6, "{}", r.max_drift);
        let (x, _) = r.last();
        assert!((x[0] - 1.0).abs() < 1e-3);
    }

    #[test]
    fn coarse_step_is_reported() {
        let m = MassMatrix::uniform(1, 1.0).unwrap();
        let spring = QuadraticSpring::new(1.0, 0.0).unwrap();
        let s = SystemState::from_slices(&[1.0], &[0.0]).unwrap();
        let err = reference_trajectory(&s, &m, &spring, 1.9, 100.0, 1).unwrap_err();
        assert!(matches!(err, Error::UnstableReference(_)));
    }
}
