//! Decoupled α-methods on the implicit-Euler base.
//!
//! The position comes from an implicit Euler solve; the velocity is the
//! implicit velocity `w` corrected by the explicit/implicit force difference
//! `Δv = h m⁻¹(∇P(x_n) − ∇P(x_{n+1}))`, so `v_{n+1} = w − αΔv`.

use std::cmp::Ordering;

use nalgebra::DVector;

use super::basic::{advanced, implicit_position};
use super::{IntegratorSpec, StepDiagnostics};
use crate::error::{Error, Result};
use crate::potential::Potential;
use crate::potentials::DissipationModel;
use crate::solver::NewtonSettings;
use crate::state::{check_len, kinetic_energy, MassMatrix, SystemState};

/// Implicit part of a decoupled step, shared by every choice of `α`.
#[derive(Debug, Clone)]
pub(crate) struct DecoupledParts {
    pub x: DVector<f64>,
    /// Implicit velocity `(x_{n+1} − x_n)/h`.
    pub w: DVector<f64>,
    /// Conservative force-difference correction.
    pub dv: DVector<f64>,
    /// `P(x_{n+1})`, conservative part only.
    pub potential: f64,
    pub friction_loss: f64,
    pub newton_iters: usize,
}

pub(crate) fn decoupled_parts(
    state: &SystemState,
    m: &MassMatrix,
    p: &dyn Potential,
    dissipation: Option<&DissipationModel>,
    h: f64,
    settings: &NewtonSettings,
) -> Result<DecoupledParts> {
    check_len(m.len(), state.dof())?;
    if !(h > 0.0 && h.is_finite()) {
        return Err(Error::InvalidParameter(format!("time step must be positive, got {h}")));
    }
    if !p.is_feasible(&state.x) {
        return Err(Error::Infeasible);
    }
    let predictor = &state.x + &state.v * h;
    let (x, friction_loss, newton_iters) =
        implicit_position(&state.x, m, p, dissipation, &predictor, &state.x, h, h, settings)?;
    let w = (&x - &state.x) / h;
    let dv = m.solve(&(p.gradient(&state.x) - p.gradient(&x))) * h;
    let potential = p.energy(&x);
    Ok(DecoupledParts { x, w, dv, potential, friction_loss, newton_iters })
}

impl DecoupledParts {
    fn velocity(&self, alpha: f64) -> DVector<f64> {
        &self.w - &self.dv * alpha
    }

    fn energy(&self, m: &MassMatrix, alpha: f64) -> f64 {
        self.potential + kinetic_energy(&self.velocity(alpha), m)
    }
}

/// Decoupled step with a fixed velocity weight `α`.
pub fn step_decoupled_alpha(
    state: &SystemState,
    m: &MassMatrix,
    p: &dyn Potential,
    dissipation: Option<&DissipationModel>,
    h: f64,
    alpha: f64,
    settings: &NewtonSettings,
) -> Result<(SystemState, StepDiagnostics)> {
    let parts = decoupled_parts(state, m, p, dissipation, h, settings)?;
    let v = parts.velocity(alpha);
    let diag = StepDiagnostics {
        alpha_used: alpha,
        energy_after: parts.potential + kinetic_energy(&v, m),
        target: f64::NAN,
        friction_loss: parts.friction_loss,
        newton_iters: parts.newton_iters,
        clipped: false,
    };
    Ok((advanced(state, parts.x, v, h), diag))
}

/// A-1: the decoupled symplectic method on implicit Euler (`α = 1`).
pub fn step_a1(
    state: &SystemState,
    m: &MassMatrix,
    p: &dyn Potential,
    dissipation: Option<&DissipationModel>,
    h: f64,
    settings: &NewtonSettings,
) -> Result<(SystemState, StepDiagnostics)> {
    step_decoupled_alpha(state, m, p, dissipation, h, 1.0, settings)
}

/// Next energy target: `E' = E − ℰ` without decay, otherwise
/// `E' − E_g = e^{−h/τ}(E − E_g − ℰ)` once `t ≥ start_time`.
pub fn update_energy_target(target: f64, friction_loss: f64, spec: &IntegratorSpec, h: f64, t: f64) -> f64 {
    match spec.decay {
        Some(d) if t >= d.start_time => d.ground + (-h / d.tau).exp() * (target - d.ground - friction_loss),
        _ => target - friction_loss,
    }
}

/// Outcome of the α search.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AlphaChoice {
    pub alpha: f64,
    /// The target was not met: the root fell outside the range, or no real root exists.
    pub clipped: bool,
}

/// Solves `P + ½‖w − αΔv‖²_m = target` for `α`, taking the real root closest
/// to 1 (the smaller one on a tie). Without a real root the minimizer of the
/// energy in `α` is used. The result is clipped to `[alpha_min, alpha_max]`.
pub fn solve_alpha(
    potential: f64,
    w: &DVector<f64>,
    dv: &DVector<f64>,
    m: &MassMatrix,
    target: f64,
    alpha_min: f64,
    alpha_max: f64,
) -> AlphaChoice {
    let a = 0.5 * m.norm_squared(dv);
    let b = -m.inner(w, dv);
    let c = potential + 0.5 * m.norm_squared(w) - target;
    let clip = |alpha: f64| alpha.clamp(alpha_min, alpha_max);

    if !(a > 0.0) {
        // the energy does not depend on α; report the bound the search would saturate at
        let scale = target.abs().max(1.0);
        let alpha = if c.abs() <= 1e-12 * scale {
            1.0
        } else if c < 0.0 {
            alpha_max
        } else {
            alpha_min
        };
        return AlphaChoice { alpha, clipped: c.abs() > 1e-12 * scale };
    }

    let disc = b * b - 4.0 * a * c;
    if disc < 0.0 {
        return AlphaChoice { alpha: clip(-b / (2.0 * a)), clipped: true };
    }
    let sq = disc.sqrt();
    let q = -0.5 * (b + b.signum() * sq);
    let (r1, r2) = if q != 0.0 { (q / a, c / q) } else { (0.0, 0.0) };
    let (lo, hi) = if r1 <= r2 { (r1, r2) } else { (r2, r1) };
    let root = match (lo - 1.0).abs().partial_cmp(&(hi - 1.0).abs()) {
        Some(Ordering::Greater) => hi,
        _ => lo,
    };
    let alpha = clip(root);
    AlphaChoice { alpha, clipped: alpha != root }
}

/// Signs of `H − E` over the last steps, for the sparse α-search variant.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct SignWindow {
    recent: [Option<Ordering>; 2],
}

impl SignWindow {
    pub fn push(&mut self, energy: f64, target: f64) {
        self.recent = [self.recent[1], energy.partial_cmp(&target)];
    }

    /// True when the two recorded steps and `current` lie strictly on the same side.
    pub fn agrees(&self, current: Option<Ordering>) -> bool {
        match current {
            Some(Ordering::Less) | Some(Ordering::Greater) => {
                self.recent[0] == current && self.recent[1] == current
            }
            _ => false,
        }
    }
}

/// A-search: one decoupled step with `α` chosen to hit the updated energy target.
///
/// `state.energy_target` is the level before the step; the returned state
/// carries the updated target and this step's dissipation estimate.
#[allow(clippy::too_many_arguments)]
pub fn step_asearch(
    state: &SystemState,
    m: &MassMatrix,
    p: &dyn Potential,
    dissipation: Option<&DissipationModel>,
    h: f64,
    spec: &IntegratorSpec,
    window: Option<&SignWindow>,
    settings: &NewtonSettings,
) -> Result<(SystemState, StepDiagnostics)> {
    let parts = decoupled_parts(state, m, p, dissipation, h, settings)?;
    let target = update_energy_target(state.energy_target, parts.friction_loss, spec, h, state.t);

    let search = match (spec.sparse_search, window) {
        (true, Some(win)) => win.agrees(parts.energy(m, 1.0).partial_cmp(&target)),
        (true, None) => false,
        (false, _) => true,
    };
    let choice = if search {
        solve_alpha(parts.potential, &parts.w, &parts.dv, m, target, spec.alpha_min, spec.alpha_max)
    } else {
        AlphaChoice { alpha: 1.0, clipped: true }
    };

    let v = parts.velocity(choice.alpha);
    let energy_after = parts.potential + kinetic_energy(&v, m);
    let diag = StepDiagnostics {
        alpha_used: choice.alpha,
        energy_after,
        target,
        friction_loss: parts.friction_loss,
        newton_iters: parts.newton_iters,
        clipped: choice.clipped,
    };
    let mut next = advanced(state, parts.x, v, h);
    next.energy_target = target;
    next.friction_loss = parts.friction_loss;
    Ok((next, diag))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::integrators::{Decay, IntegratorKind};
    use crate::potential::ZeroPotential;
    use crate::potentials::{Axis, Gravity, QuadraticSpring};
    use crate::state::total_energy;

    fn unit() -> MassMatrix {
        MassMatrix::uniform(1, 1.0).unwrap()
    }

    #[test]
    fn a1_free_flight() {
        let s = SystemState::from_slices(&[0.1, 0.2], &[1.0, -2.0]).unwrap();
        let m = MassMatrix::uniform(2, 3.0).unwrap();
        let (n, d) = step_a1(&s, &m, &ZeroPotential, None, 0.5, &NewtonSettings::default()).unwrap();
        assert_eq!(n.v, s.v);
        assert!((n.x[0] - 0.6).abs() < 1e-15 && (n.x[1] + 0.8).abs() < 1e-15);
        assert_eq!(d.alpha_used, 1.0);
    }

    #[test]
    fn energy_target_updates() {
        let plain = IntegratorSpec::new(IntegratorKind::ASearch);
        assert_eq!(update_energy_target(3.0, 0.0, &plain, 0.1, 0.0), 3.0);
        assert_eq!(update_energy_target(10.0, 2.0, &plain, 0.1, 0.0), 8.0);
        let decay = plain.with_decay(Decay { tau: 0.5, ground: 2.0, start_time: 1.0 });
        let e = update_energy_target(3.0, 0.0, &decay, 0.5, 1.0);
        assert!((e - 2.0 - (-1.0f64).exp()).abs() < 1e-15);
        // inactive before start_time
        assert_eq!(update_energy_target(3.0, 0.5, &decay, 0.5, 0.9), 2.5);
        // h/τ → 0 reduces to friction accounting
        let slow = plain.with_decay(Decay { tau: 1e300, ground: 0.0, start_time: 0.0 });
        assert_eq!(update_energy_target(10.0, 2.0, &slow, 1e-3, 0.0), 8.0);
    }

    #[test]
    fn alpha_root_closest_to_one() {
        let m = unit();
        let w = DVector::from_element(1, -0.5);
        let dv = DVector::from_element(1, 0.5);
        // ½(−0.5 − 0.5α)² = ½ → α ∈ {1, −3}
        let c = solve_alpha(0.0, &w, &dv, &m, 0.5, -10.0, 10.0);
        assert!((c.alpha - 1.0).abs() < 1e-15 && !c.clipped);
        // clipping
        let c = solve_alpha(0.0, &w, &dv, &m, 2.0, 0.0, 1.1);
        assert_eq!(c.alpha, 1.1);
        assert!(c.clipped);
        // unreachable target: vertex α* = −1, then clipped to 0
        let c = solve_alpha(0.0, &w, &dv, &m, -1.0, 0.0, 1.1);
        assert_eq!(c.alpha, 0.0);
        assert!(c.clipped);
    }

    #[test]
    fn alpha_tie_prefers_smaller_root() {
        // ½(α − 1)²·… symmetric about 1: w = −dv ⇒ roots 1 ± r
        let m = unit();
        let w = DVector::from_element(1, 0.0);
        let dv = DVector::from_element(1, 1.0);
        // ½α² = 0.5 ⇒ α = ±1; closest to 1 is +1 (not a tie)
        assert_eq!(solve_alpha(0.0, &w, &dv, &m, 0.5, -5.0, 5.0).alpha, 1.0);
        // roots 0 and 2 are a tie around 1: w = dv, ½(1−α)² = ½
        let w = DVector::from_element(1, 1.0);
        let c = solve_alpha(0.0, &w, &dv, &m, 0.5, -5.0, 5.0);
        assert!(c.alpha.abs() < 1e-15);
    }

    #[test]
    fn free_fall_saturates_alpha() {
        let m = unit();
        let g = Gravity::new(9.8, &m, Axis::SCALAR);
        let mut s = SystemState::from_slices(&[10.0], &[0.0]).unwrap();
        s.init_energy_target(&m, &g, 1.0).unwrap();
        let spec = IntegratorSpec::new(IntegratorKind::ASearch);
        let (n, d) = step_asearch(&s, &m, &g, None, 1.0 / 30.0, &spec, None, &NewtonSettings::default()).unwrap();
        assert_eq!(d.alpha_used, 1.1);
        assert!(d.clipped);
        // α has no effect: the velocity is the implicit one
        let (ie, _) = step_a1(&s, &m, &g, None, 1.0 / 30.0, &NewtonSettings::default()).unwrap();
        assert_eq!(n.v, ie.v);
    }

    #[test]
    fn harmonic_oscillator_hits_target() {
        let m = MassMatrix::uniform(1, 2.0).unwrap();
        let spring = QuadraticSpring::new(50.0, 0.0).unwrap();
        let mut s = SystemState::from_slices(&[0.3], &[0.0]).unwrap();
        s.init_energy_target(&m, &spring, 1.0).unwrap();
        let h0 = total_energy(&s, &m, &spring).unwrap();
        let spec = IntegratorSpec::new(IntegratorKind::ASearch);
        let set = NewtonSettings::default();
        let mut unclipped = 0;
        for _ in 0..500 {
            let (n, d) = step_asearch(&s, &m, &spring, None, 1e-3, &spec, None, &set).unwrap();
            if !d.clipped {
                unclipped += 1;
                let h = total_energy(&n, &m, &spring).unwrap();
                assert!((h - h0).abs() <= 1e-9 * h0.max(1.0), "{h} vs {h0}");
            }
            s = n;
        }
        assert!(unclipped > 50, "{unclipped}");
        let hf = total_energy(&s, &m, &spring).unwrap();
        assert!((hf - h0).abs() < 0.01 * h0);
    }

    #[test]
    fn sign_window_needs_three_agreeing_steps() {
        let mut w = SignWindow::default();
        assert!(!w.agrees(Some(Ordering::Less)));
        w.push(0.9, 1.0);
        assert!(!w.agrees(Some(Ordering::Less)));
        w.push(0.8, 1.0);
        assert!(w.agrees(Some(Ordering::Less)));
        assert!(!w.agrees(Some(Ordering::Greater)));
        assert!(!w.agrees(Some(Ordering::Equal)));
        w.push(1.0, 1.0);
        assert!(!w.agrees(Some(Ordering::Less)));
    }
}
