use super::basic::{
    step_bdf2, step_explicit_euler, step_implicit_euler, step_symplectic_euler, step_theta_inner,
    step_theta_outer,
};
use super::blending::step_blending;
use super::decoupled::{step_a1, step_asearch, update_energy_target, SignWindow};
use super::{History, IntegratorKind, IntegratorSpec, StepDiagnostics};
use crate::error::{Error, Result};
use crate::potential::Potential;
use crate::potentials::DissipationModel;
use crate::solver::NewtonSettings;
use crate::state::{kinetic_energy, MassMatrix, SystemState};

/// Drives one simulation: owns the multistep history and the sparse-search
/// window, and keeps the energy target up to date for every method.
#[derive(Debug, Clone)]
pub struct Stepper {
    spec: IntegratorSpec,
    settings: NewtonSettings,
    history: History,
    window: SignWindow,
}

impl Stepper {
    pub fn new(spec: IntegratorSpec, settings: NewtonSettings) -> Result<Self> {
        spec.validate()?;
        settings.validate()?;
        Ok(Self { spec, settings, history: History::new(), window: SignWindow::default() })
    }

    pub fn spec(&self) -> &IntegratorSpec {
        &self.spec
    }

    pub fn settings(&self) -> &NewtonSettings {
        &self.settings
    }

    /// Resets history and sets `E₀ = e0_factor · H₀`.
    pub fn init(&mut self, state: &mut SystemState, m: &MassMatrix, p: &dyn Potential) -> Result<()> {
        self.history.clear();
        self.window = SignWindow::default();
        state.friction_loss = 0.0;
        state.init_energy_target(m, p, self.spec.e0_factor)
    }

    pub fn step(
        &mut self,
        state: &SystemState,
        m: &MassMatrix,
        p: &dyn Potential,
        dissipation: Option<&DissipationModel>,
        h: f64,
    ) -> Result<(SystemState, StepDiagnostics)> {
        let kind = self.spec.kind;
        if dissipation.is_some() && !kind.supports_dissipation() {
            return Err(Error::Unsupported {
                method: kind.name(),
                reason: "damping and friction need implicit_euler, bdf2, a1 or asearch".into(),
            });
        }
        let set = &self.settings;
        let (mut next, mut diag) = match kind {
            IntegratorKind::ExplicitEuler => step_explicit_euler(state, m, p, h)?,
            IntegratorKind::ImplicitEuler => step_implicit_euler(state, m, p, dissipation, h, set)?,
            IntegratorKind::ThetaInner(theta) => step_theta_inner(state, m, p, h, theta, set)?,
            IntegratorKind::ThetaOuter(theta) => step_theta_outer(state, m, p, h, theta, set)?,
            IntegratorKind::Midpoint => step_theta_inner(state, m, p, h, 0.5, set)?,
            IntegratorKind::Trapezoidal => step_theta_outer(state, m, p, h, 0.5, set)?,
            IntegratorKind::Bdf2 => step_bdf2(state, &self.history, m, p, dissipation, h, set)?,
            IntegratorKind::SymplecticEuler => step_symplectic_euler(state, m, p, h)?,
            IntegratorKind::A1 => step_a1(state, m, p, dissipation, h, set)?,
            IntegratorKind::ASearch => {
                step_asearch(state, m, p, dissipation, h, &self.spec, Some(&self.window), set)?
            }
            IntegratorKind::Blending => step_blending(state, m, p, h, set)?,
        };

        if !next.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "{} produced a non-finite state at t = {}",
                kind,
                next.t
            )));
        }

        if kind != IntegratorKind::ASearch {
            next.friction_loss = diag.friction_loss;
            if kind != IntegratorKind::Blending {
                next.energy_target =
                    update_energy_target(state.energy_target, diag.friction_loss, &self.spec, h, state.t);
            }
            diag.target = next.energy_target;
        }
        diag.energy_after = p.energy(&next.x) + kinetic_energy(&next.v, m);

        if kind == IntegratorKind::ASearch {
            self.window.push(diag.energy_after, diag.target);
        }
        self.history.record(&state.x, &state.v);
        Ok((next, diag))
    }
}
