//! Projected Newton with a feasibility-filtered backtracking line search.
//!
//! Every implicit step in the crate reduces to minimizing an incremental
//! potential `½‖x − x̂‖²_m + η² P(x)`; this module owns that solve.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::potential::Potential;
use crate::state::MassMatrix;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NewtonSettings {
    /// Step tolerance is `step_tolerance_scale · h · velocity_scale`.
    pub step_tolerance_scale: f64,
    /// Characteristic speed turning the tolerance into a length (m/s).
    pub velocity_scale: f64,
    pub max_iterations: usize,
    pub shrink: f64,
    pub armijo: f64,
    pub max_halvings: usize,
}

impl Default for NewtonSettings {
    fn default() -> Self {
        Self {
            step_tolerance_scale: 0.01,
            velocity_scale: 1.0,
            max_iterations: 200,
            shrink: 0.5,
            armijo: 1e-4,
            max_halvings: 60,
        }
    }
}

impl NewtonSettings {
    pub fn tight() -> Self {
        Self { step_tolerance_scale: 1e-11, ..Self::default() }
    }

    pub fn tolerance(&self, h: f64) -> f64 {
        self.step_tolerance_scale * h * self.velocity_scale
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.step_tolerance_scale > 0.0)
            || !(self.velocity_scale > 0.0)
            || self.max_iterations == 0
            || !(self.shrink > 0.0 && self.shrink < 1.0)
            || !(self.armijo > 0.0 && self.armijo < 1.0)
        {
            return Err(Error::InvalidParameter(format!("bad Newton settings {self:?}")));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct SolveReport {
    pub iterations: usize,
    pub step_norm: f64,
    pub halvings: usize,
    pub converged: bool,
}

/// Smooth objective with a positive-definite model Hessian.
pub trait Objective {
    fn value(&self, x: &DVector<f64>) -> f64;
    fn gradient(&self, x: &DVector<f64>) -> DVector<f64>;
    fn hessian(&self, x: &DVector<f64>) -> DMatrix<f64>;

    /// Largest fraction of `dx` the line search may try first.
    fn step_bound(&self, _x: &DVector<f64>, _dx: &DVector<f64>) -> f64 {
        1.0
    }
}

/// `½‖x − x̂‖²_m + η² P(x)`.
#[derive(Debug, Clone, Copy)]
pub struct IncrementalPotential<'a> {
    pub mass: &'a MassMatrix,
    pub predictor: &'a DVector<f64>,
    pub eta: f64,
    pub potential: &'a dyn Potential,
}

impl Objective for IncrementalPotential<'_> {
    fn value(&self, x: &DVector<f64>) -> f64 {
        let p = self.potential.energy(x);
        if !p.is_finite() {
            return f64::INFINITY;
        }
        0.5 * self.mass.norm_squared(&(x - self.predictor)) + self.eta * self.eta * p
    }

    fn gradient(&self, x: &DVector<f64>) -> DVector<f64> {
        self.mass.apply(&(x - self.predictor)) + self.potential.gradient(x) * (self.eta * self.eta)
    }

    fn hessian(&self, x: &DVector<f64>) -> DMatrix<f64> {
        let mut h = self.potential.projected_hessian(x) * (self.eta * self.eta);
        for i in 0..x.len() {
            h[(i, i)] += self.mass.diag()[i];
        }
        h
    }

    fn step_bound(&self, x: &DVector<f64>, dx: &DVector<f64>) -> f64 {
        self.potential.step_bound(x, dx)
    }
}

fn newton_direction(h: DMatrix<f64>, g: &DVector<f64>) -> Option<DVector<f64>> {
    let rhs = -g;
    if let Some(ch) = h.clone().cholesky() {
        return Some(ch.solve(&rhs));
    }
    h.lu().solve(&rhs)
}

/// Minimizes `objective` from a feasible `x0`. A non-converged solve is
/// reported through `SolveReport::converged`, not as an error.
pub fn minimize(
    x0: &DVector<f64>,
    objective: &dyn Objective,
    settings: &NewtonSettings,
    h: f64,
) -> Result<(DVector<f64>, SolveReport)> {
    let mut x = x0.clone();
    let mut f = objective.value(&x);
    if !f.is_finite() {
        return Err(Error::Infeasible);
    }
    let tol = settings.tolerance(h);
    let mut report = SolveReport::default();

    for _ in 0..settings.max_iterations {
        let g = objective.gradient(&x);
        let p = match newton_direction(objective.hessian(&x), &g) {
            Some(p) => p,
            None => return Ok((x, report)),
        };
        let step_norm = p.amax();
        report.step_norm = step_norm;
        let slope = g.dot(&p);

        let mut alpha = objective.step_bound(&x, &p);
        let mut accepted = None;
        for _ in 0..settings.max_halvings {
            let trial = &x + &p * alpha;
            let ft = objective.value(&trial);
            // below roundoff in f the Armijo test is noise
            let flat = (ft - f).abs() <= 1e-14 * (1.0 + f.abs());
            if ft.is_finite() && (ft <= f + settings.armijo * alpha * slope || flat) {
                accepted = Some((trial, ft));
                break;
            }
            alpha *= settings.shrink;
            report.halvings += 1;
        }

        if step_norm <= tol.max(1e-12 * (1.0 + x.amax())) {
            if let Some((trial, _)) = accepted {
                x = trial;
            }
            report.converged = true;
            return Ok((x, report));
        }

        match accepted {
            Some((trial, ft)) => {
                x = trial;
                f = ft;
                report.iterations += 1;
            }
            None => {
                // no descent left at working precision
                report.converged = step_norm <= 1e-12 * (1.0 + x.amax());
                return Ok((x, report));
            }
        }
    }
    Ok((x, report))
}

/// Minimizes the incremental potential `½‖x − x̂‖²_m + η² P(x)` starting at `x0`.
pub fn minimize_incremental_potential(
    x0: &DVector<f64>,
    mass: &MassMatrix,
    predictor: &DVector<f64>,
    eta: f64,
    potential: &dyn Potential,
    settings: &NewtonSettings,
    h: f64,
) -> Result<(DVector<f64>, SolveReport)> {
    let objective = IncrementalPotential { mass, predictor, eta, potential };
    minimize(x0, &objective, settings, h)
}

/// Like [`minimize_incremental_potential`], but a non-converged solve is an error.
pub(crate) fn solve_incremental(
    x0: &DVector<f64>,
    mass: &MassMatrix,
    predictor: &DVector<f64>,
    eta: f64,
    potential: &dyn Potential,
    settings: &NewtonSettings,
    h: f64,
) -> Result<(DVector<f64>, SolveReport)> {
    // start from whichever of the predictor and x0 has the lower objective
    let objective = IncrementalPotential { mass, predictor, eta, potential };
    let start = if objective.value(predictor) <= objective.value(x0) { predictor } else { x0 };
    let (x, report) = minimize_incremental_potential(start, mass, predictor, eta, potential, settings, h)?;
    if !report.converged {
        return Err(Error::NewtonFailed { iterations: report.iterations, step_norm: report.step_norm });
    }
    Ok((x, report))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::potentials::{IpcBarrier1D, QuadraticSpring, Side};

    struct Quadratic {
        q: DMatrix<f64>,
        a: DVector<f64>,
    }

    impl Objective for Quadratic {
        fn value(&self, x: &DVector<f64>) -> f64 {
            let d = x - &self.a;
            0.5 * d.dot(&(&self.q * &d))
        }
        fn gradient(&self, x: &DVector<f64>) -> DVector<f64> {
            &self.q * (x - &self.a)
        }
        fn hessian(&self, _x: &DVector<f64>) -> DMatrix<f64> {
            self.q.clone()
        }
    }

    #[test]
    fn quadratic_converges_in_one_iteration() {
        let q = DMatrix::from_row_slice(2, 2, &[4.0, 1.0, 1.0, 3.0]);
        let a = DVector::from_column_slice(&[0.3, -2.0]);
        let obj = Quadratic { q, a: a.clone() };
        let (x, rep) = minimize(&DVector::from_column_slice(&[5.0, 5.0]), &obj, &NewtonSettings::default(), 1.0).unwrap();
        assert!(rep.converged);
        assert_eq!(rep.iterations, 1);
        assert!((x - a).amax() < 1e-14);
    }

    #[test]
    fn stiff_implicit_euler_matches_closed_form() {
        // x = x_n + h v_n − h² k x / m  with ħ = 1e6
        let (m, k, h) = (1.0, 1e6, 1.0);
        let (xn, vn) = (0.3, -0.7);
        let mass = MassMatrix::uniform(1, m).unwrap();
        let spring = QuadraticSpring::new(k, 0.0).unwrap();
        let pred = DVector::from_element(1, xn + h * vn);
        let (x, rep) = solve_incremental(&pred, &mass, &pred, h, &spring, &NewtonSettings::default(), h).unwrap();
        assert!(rep.converged);
        let exact = (xn + h * vn) / (1.0 + h * h * k / m);
        assert!((x[0] - exact).abs() <= 1e-10 * exact.abs());
    }

    #[test]
    fn barrier_keeps_iterates_feasible() {
        let b = IpcBarrier1D::new(1.0, 1.0, 0.0, Side::Above).unwrap();
        let mass = MassMatrix::uniform(1, 1.0).unwrap();
        let x0 = DVector::from_element(1, 0.5);
        // predictor far past the wall
        let pred = DVector::from_element(1, -10.0);
        let (x, rep) =
            minimize_incremental_potential(&x0, &mass, &pred, 1.0, &b, &NewtonSettings::default(), 1.0).unwrap();
        assert!(rep.converged);
        assert!(x[0] > 0.0 && x[0] < 1.0);
        assert!(b.energy(&x).is_finite());
    }

    #[test]
    fn infeasible_start_is_an_error() {
        let b = IpcBarrier1D::new(1.0, 1.0, 0.0, Side::Above).unwrap();
        let mass = MassMatrix::uniform(1, 1.0).unwrap();
        let x0 = DVector::from_element(1, -0.5);
        let r = minimize_incremental_potential(&x0, &mass, &x0, 1.0, &b, &NewtonSettings::default(), 1.0);
        assert_eq!(r.unwrap_err(), Error::Infeasible);
    }

    #[test]
    fn iteration_cap_yields_unconverged_report() {
        let b = IpcBarrier1D::new(1.0, 1.0, 0.0, Side::Above).unwrap();
        let mass = MassMatrix::uniform(1, 1.0).unwrap();
        let x0 = DVector::from_element(1, 0.9);
        let pred = DVector::from_element(1, -10.0);
        let settings = NewtonSettings { max_iterations: 1, ..NewtonSettings::default() };
        let (_, rep) = minimize_incremental_potential(&x0, &mass, &pred, 1.0, &b, &settings, 1.0).unwrap();
        assert!(!rep.converged);
        assert!(matches!(
            solve_incremental(&x0, &mass, &pred, 1.0, &b, &settings, 1.0),
            Err(Error::NewtonFailed { .. })
        ));
    }
}
