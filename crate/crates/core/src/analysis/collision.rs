use std::sync::Arc;

use crate::error::{Error, Result};
use crate::integrators::{IntegratorKind, IntegratorSpec, Stepper};
use crate::potential::Potential;
use crate::potentials::{IpcBarrier1D, OneSidedQuadraticBarrier, Side};
use crate::solver::NewtonSettings;
use crate::state::{MassMatrix, SystemState};

pub const MAX_COLLISION_STEPS: usize = 1_000_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BarrierKind {
    /// `½ ω² x²` for `x < 0`.
    Quadratic,
    /// Log barrier with `κ = ω² d̂²` on `0 < x < d̂`.
    Ipc,
}

/// A unit-mass particle thrown at a wall at the origin.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CollisionScenario {
    pub barrier: BarrierKind,
    pub omega2: f64,
    /// Phase: the particle starts `β h · speed` outside the barrier support.
    pub beta: f64,
    pub h: f64,
    pub speed: f64,
    pub alpha_max: f64,
    /// Initial A-search target expressed as a speed, `E₀ = ½ V²`.
    pub target_speed: Option<f64>,
    pub dhat: f64,
}

impl CollisionScenario {
    /// Scenario with `ω = 1` and `h = √ħ`.
    pub fn with_hbar(barrier: BarrierKind, hbar: f64, beta: f64) -> Self {
        Self {
            barrier,
            omega2: 1.0,
            beta,
            h: hbar.sqrt(),
            speed: 1.0,
            alpha_max: 1.1,
            target_speed: None,
            dhat: 1.0,
        }
    }

    pub fn hbar(&self) -> f64 {
        self.omega2 * self.h * self.h
    }

    /// Outer edge of the barrier support.
    pub fn support_edge(&self) -> f64 {
        match self.barrier {
            BarrierKind::Quadratic => 0.0,
            BarrierKind::Ipc => self.dhat,
        }
    }

    pub fn initial_state(&self) -> Result<SystemState> {
        SystemState::from_slices(&[self.support_edge() + self.beta * self.h * self.speed], &[-self.speed])
    }

    pub fn potential(&self) -> Result<Arc<dyn Potential>> {
        Ok(match self.barrier {
            BarrierKind::Quadratic => Arc::new(OneSidedQuadraticBarrier::new(self.omega2, 0.0, Side::Above)?),
            BarrierKind::Ipc => Arc::new(IpcBarrier1D::new(self.omega2 * self.dhat * self.dhat, self.dhat, 0.0, Side::Above)?),
        })
    }

    pub fn validate(&self) -> Result<()> {
        let ok = self.omega2 > 0.0
            && self.omega2.is_finite()
            && (0.0..=1.0).contains(&self.beta)
            && self.h > 0.0
            && self.h.is_finite()
            && self.speed > 0.0
            && self.alpha_max >= 1.0
            && self.dhat > 0.0;
        if ok {
            Ok(())
        } else {
            Err(Error::InvalidParameter(format!("invalid collision scenario {self:?}")))
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CollisionReport {
    pub method: String,
    /// `(x_n, v_n)` from the initial state through the confirming step.
    pub states: Vec<(f64, f64)>,
    /// Total energy of each state.
    pub energies: Vec<f64>,
    /// Index of the first state that has left the barrier.
    pub steps: usize,
    pub steps_in_contact: usize,
    pub exit_speed: f64,
}

impl CollisionReport {
    pub fn velocity(&self, n: usize) -> f64 {
        self.states[n].1
    }
}

/// Steps the scenario until the particle is outside the barrier support and
/// moving away on two consecutive states.
pub fn collide(scenario: &CollisionScenario, kind: IntegratorKind) -> Result<CollisionReport> {
    scenario.validate()?;
    let p = scenario.potential()?;
    let m = MassMatrix::uniform(1, 1.0)?;
    let spec = IntegratorSpec::new(kind).with_alpha_range(0.0, scenario.alpha_max);
    let mut stepper = Stepper::new(spec, NewtonSettings::tight())?;
    let mut state = scenario.initial_state()?;
    stepper.init(&mut state, &m, p.as_ref())?;
    if let Some(v) = scenario.target_speed {
        state.energy_target = 0.5 * v * v;
    }

    let edge = scenario.support_edge();
    let left = |s: &SystemState| s.x[0] >= edge && s.v[0] > 0.0;
    let energy = |s: &SystemState| p.energy(&s.x) + 0.5 * s.v[0] * s.v[0];

    let mut states = vec![(state.x[0], state.v[0])];
    let mut energies = vec![energy(&state)];
    let mut contact = usize::from(state.x[0] < edge);
    let mut first_out: Option<usize> = None;
    for n in 1..=MAX_COLLISION_STEPS {
        let (next, _) = stepper.step(&state, &m, p.as_ref(), None, scenario.h)?;
        state = next;
        states.push((state.x[0], state.v[0]));
        energies.push(energy(&state));
        if state.x[0] < edge {
            contact += 1;
        }
        if left(&state) {
            match first_out {
                Some(k) => {
                    return Ok(CollisionReport {
                        method: kind.name(),
                        exit_speed: states[k].1,
                        steps: k,
                        steps_in_contact: contact,
                        states,
                        energies,
                    })
                }
                None => first_out = Some(n),
            }
        } else {
            first_out = None;
        }
    }
    Err(Error::NonTermination(MAX_COLLISION_STEPS))
}
