use nalgebra::DVector;

use super::{History, StepDiagnostics};
use crate::error::{Error, Result};
use crate::potential::{Potential, Sum};
use crate::potentials::DissipationModel;
use crate::solver::{solve_incremental, NewtonSettings};
use crate::state::{check_len, MassMatrix, SystemState};

pub(crate) fn advanced(state: &SystemState, x: DVector<f64>, v: DVector<f64>, h: f64) -> SystemState {
    SystemState { x, v, t: state.t + h, ..state.clone() }
}

/// Minimizes `½‖x − x̂‖²_m + η²(P + P_d)(x)` where `P_d` is the dissipation
/// pseudo-potential anchored at `anchor` with step `η`. Returns the minimizer,
/// the dissipation estimate `2 P_d(x)` and the Newton iteration count.
#[allow(clippy::too_many_arguments)]
pub(crate) fn implicit_position(
    x_n: &DVector<f64>,
    m: &MassMatrix,
    p: &dyn Potential,
    dissipation: Option<&DissipationModel>,
    predictor: &DVector<f64>,
    anchor: &DVector<f64>,
    eta: f64,
    h: f64,
    settings: &NewtonSettings,
) -> Result<(DVector<f64>, f64, usize)> {
    match dissipation {
        None => {
            let (x, rep) = solve_incremental(x_n, m, predictor, eta, p, settings, h)?;
            Ok((x, 0.0, rep.iterations))
        }
        Some(model) => {
            let pseudo = model.pseudo_potential(m, x_n, anchor, eta)?;
            let total = Sum { a: p, b: pseudo.as_ref() };
            let (x, rep) = solve_incremental(x_n, m, predictor, eta, &total, settings, h)?;
            Ok((x.clone(), 2.0 * pseudo.energy(&x), rep.iterations))
        }
    }
}

fn check(state: &SystemState, m: &MassMatrix, h: f64) -> Result<()> {
    check_len(m.len(), state.dof())?;
    if !(h > 0.0 && h.is_finite()) {
        return Err(Error::InvalidParameter(format!("time step must be positive, got {h}")));
    }
    Ok(())
}

pub fn step_explicit_euler(
    state: &SystemState,
    m: &MassMatrix,
    p: &dyn Potential,
    h: f64,
) -> Result<(SystemState, StepDiagnostics)> {
    check(state, m, h)?;
    if !p.is_feasible(&state.x) {
        return Err(Error::Infeasible);
    }
    let x = &state.x + &state.v * h;
    let v = &state.v - m.solve(&p.gradient(&state.x)) * h;
    Ok((advanced(state, x, v, h), StepDiagnostics::plain(0)))
}

/// Inner θ-method. The collocation point `y = (1−θ) z + θ z'` solves
/// `y = z + θ h f(y)`, a minimization with step `η = θh`.
pub fn step_theta_inner(
    state: &SystemState,
    m: &MassMatrix,
    p: &dyn Potential,
    h: f64,
    theta: f64,
    settings: &NewtonSettings,
) -> Result<(SystemState, StepDiagnostics)> {
    check(state, m, h)?;
    if !(0.0..=1.0).contains(&theta) {
        return Err(Error::InvalidParameter(format!("θ must lie in [0, 1], got {theta}")));
    }
    if theta == 0.0 {
        return step_explicit_euler(state, m, p, h);
    }
    let eta = theta * h;
    let predictor = &state.x + &state.v * eta;
    let (y, _, iters) = implicit_position(&state.x, m, p, None, &predictor, &state.x, eta, h, settings)?;
    let yv = (&y - &state.x) / eta;
    let x = &state.x + (&y - &state.x) / theta;
    let v = &state.v + (&yv - &state.v) / theta;
    Ok((advanced(state, x, v, h), StepDiagnostics::plain(iters)))
}

/// Outer θ-method; θ = ½ is the trapezoidal rule.
pub fn step_theta_outer(
    state: &SystemState,
    m: &MassMatrix,
    p: &dyn Potential,
    h: f64,
    theta: f64,
    settings: &NewtonSettings,
) -> Result<(SystemState, StepDiagnostics)> {
    check(state, m, h)?;
    if !(0.0..=1.0).contains(&theta) {
        return Err(Error::InvalidParameter(format!("θ must lie in [0, 1], got {theta}")));
    }
    if theta == 0.0 {
        return step_explicit_euler(state, m, p, h);
    }
    if !p.is_feasible(&state.x) {
        return Err(Error::Infeasible);
    }
    let acc0 = m.solve(&p.gradient(&state.x));
    let eta = theta * h;
    let predictor = &state.x + &state.v * h - &acc0 * (h * h * theta * (1.0 - theta));
    let (x, _, iters) = implicit_position(&state.x, m, p, None, &predictor, &state.x, eta, h, settings)?;
    let acc1 = m.solve(&p.gradient(&x));
    let v = &state.v - (acc0 * (1.0 - theta) + acc1 * theta) * h;
    Ok((advanced(state, x, v, h), StepDiagnostics::plain(iters)))
}

/// Implicit Euler with an optional dissipation pseudo-potential.
pub fn step_implicit_euler(
    state: &SystemState,
    m: &MassMatrix,
    p: &dyn Potential,
    dissipation: Option<&DissipationModel>,
    h: f64,
    settings: &NewtonSettings,
) -> Result<(SystemState, StepDiagnostics)> {
    check(state, m, h)?;
    let predictor = &state.x + &state.v * h;
    let (x, loss, iters) = implicit_position(&state.x, m, p, dissipation, &predictor, &state.x, h, h, settings)?;
    let v = (&x - &state.x) / h;
    let mut diag = StepDiagnostics::plain(iters);
    diag.friction_loss = loss;
    Ok((advanced(state, x, v, h), diag))
}

/// `v' = v − h m⁻¹∇P(x)`, `x' = x + h v'`.
pub fn step_symplectic_euler(
    state: &SystemState,
    m: &MassMatrix,
    p: &dyn Potential,
    h: f64,
) -> Result<(SystemState, StepDiagnostics)> {
    check(state, m, h)?;
    if !p.is_feasible(&state.x) {
        return Err(Error::Infeasible);
    }
    let v = &state.v - m.solve(&p.gradient(&state.x)) * h;
    let x = &state.x + &v * h;
    if !p.is_feasible(&x) {
        return Err(Error::Infeasible);
    }
    Ok((advanced(state, x, v, h), StepDiagnostics::plain(0)))
}

/// BDF2 on the stacked state: `z' = (4z − z₋)/3 + (2h/3) f(z')`.
/// Without history the step is implicit Euler.
pub fn step_bdf2(
    state: &SystemState,
    history: &History,
    m: &MassMatrix,
    p: &dyn Potential,
    dissipation: Option<&DissipationModel>,
    h: f64,
    settings: &NewtonSettings,
) -> Result<(SystemState, StepDiagnostics)> {
    let Some((x_prev, v_prev)) = history.previous() else {
        return step_implicit_euler(state, m, p, dissipation, h, settings);
    };
    check(state, m, h)?;
    check_len(state.dof(), x_prev.len())?;
    let x_hat = (&state.x * 4.0 - x_prev) / 3.0;
    let v_hat = (&state.v * 4.0 - v_prev) / 3.0;
    let eta = 2.0 * h / 3.0;
    let predictor = &x_hat + &v_hat * eta;
    let (x, loss, iters) = implicit_position(&state.x, m, p, dissipation, &predictor, &x_hat, eta, h, settings)?;
    let v = (&x - &x_hat) / eta;
    let mut diag = StepDiagnostics::plain(iters);
    diag.friction_loss = loss;
    Ok((advanced(state, x, v, h), diag))
}
