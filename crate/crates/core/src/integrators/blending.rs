use nalgebra::DVector;

use super::basic::{advanced, step_implicit_euler, step_theta_inner};
use super::StepDiagnostics;
use crate::error::{Error, Result};
use crate::potential::Potential;
use crate::solver::NewtonSettings;
use crate::state::{kinetic_energy, MassMatrix, SystemState};

const MAX_BISECTIONS: usize = 60;

fn blend(a: &DVector<f64>, b: &DVector<f64>, alpha: f64) -> DVector<f64> {
    a * alpha + b * (1.0 - alpha)
}

/// Full-state interpolation `α z_mid + (1−α) z_imp` with `α` bisected so that
/// the energy equals `state.energy_target`.
///
/// The search runs on `[0, 1]`; it extends to `[0, 2]` only when the energy is
/// monotone in `α` there and brackets the target. Without a bracket the
/// endpoint closer to the target is used and the step is marked clipped.
/// An infeasible blended position is reported, not repaired.
pub fn step_blending(
    state: &SystemState,
    m: &MassMatrix,
    p: &dyn Potential,
    h: f64,
    settings: &NewtonSettings,
) -> Result<(SystemState, StepDiagnostics)> {
    let (imp, d_imp) = step_implicit_euler(state, m, p, None, h, settings)?;
    let (mid, d_mid) = step_theta_inner(state, m, p, h, 0.5, settings)?;
    let target = state.energy_target;
    let energy = |alpha: f64| -> f64 {
        let x = blend(&mid.x, &imp.x, alpha);
        let pe = p.energy(&x);
        if !pe.is_finite() {
            return f64::INFINITY;
        }
        pe + kinetic_energy(&blend(&mid.v, &imp.v, alpha), m)
    };
    let tol = 1e-10 * target.abs().max(1.0);

    let g0 = energy(0.0) - target;
    let g1 = energy(1.0) - target;
    let bracket = if g0 * g1 <= 0.0 {
        Some((0.0, 1.0, g0))
    } else {
        let g2 = energy(2.0) - target;
        let monotone = {
            let samples: Vec<f64> = (0..=8).map(|i| energy(i as f64 * 0.25)).collect();
            samples.windows(2).all(|w| w[1] >= w[0]) || samples.windows(2).all(|w| w[1] <= w[0])
        };
        if monotone && g1 * g2 <= 0.0 {
            Some((1.0, 2.0, g1))
        } else {
            None
        }
    };

    let (alpha, clipped) = match bracket {
        Some((mut lo, mut hi, mut glo)) => {
            let mut alpha = 0.5 * (lo + hi);
            for _ in 0..MAX_BISECTIONS {
                alpha = 0.5 * (lo + hi);
                let g = energy(alpha) - target;
                if g.abs() <= tol {
                    break;
                }
                if (g < 0.0) == (glo < 0.0) {
                    lo = alpha;
                    glo = g;
                } else {
                    hi = alpha;
                }
            }
            (alpha, false)
        }
        None => (if g0.abs() <= g1.abs() { 0.0 } else { 1.0 }, true),
    };

    let x = blend(&mid.x, &imp.x, alpha);
    if !p.is_feasible(&x) {
        return Err(Error::InfeasibleBlend);
    }
    let v = blend(&mid.v, &imp.v, alpha);
    let energy_after = p.energy(&x) + kinetic_energy(&v, m);
    let diag = StepDiagnostics {
        alpha_used: alpha,
        energy_after,
        target,
        friction_loss: 0.0,
        newton_iters: d_imp.newton_iters + d_mid.newton_iters,
        clipped,
    };
    Ok((advanced(state, x, v, h), diag))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::potential::ZeroPotential;
    use crate::potentials::QuadraticSpring;
    use crate::state::total_energy;

    #[test]
    fn harmonic_blend_conserves_energy() {
        let m = MassMatrix::uniform(1, 1.0).unwrap();
        let spring = QuadraticSpring::new(10.0, 0.0).unwrap();
        let mut s = SystemState::from_slices(&[1.0], &[0.0]).unwrap();
        s.init_energy_target(&m, &spring, 1.0).unwrap();
        let h0 = s.energy_target;
        let set = NewtonSettings::tight();
        for _ in 0..100 {
            let (n, d) = step_blending(&s, &m, &spring, 0.1, &set).unwrap();
            assert!(!d.clipped);
            let h = total_energy(&n, &m, &spring).unwrap();
            assert!((h - h0).abs() <= 1e-10 * h0.max(1.0) * 1.01);
            s = n;
        }
    }

    #[test]
    fn free_flight_blend_is_unique() {
        let m = MassMatrix::uniform(1, 1.0).unwrap();
        let mut s = SystemState::from_slices(&[0.0], &[2.0]).unwrap();
        s.init_energy_target(&m, &ZeroPotential, 1.0).unwrap();
        let (n, _) = step_blending(&s, &m, &ZeroPotential, 0.1, &NewtonSettings::tight()).unwrap();
        assert!((n.x[0] - 0.2).abs() < 1e-15);
        assert_eq!(n.v[0], 2.0);
    }
}
