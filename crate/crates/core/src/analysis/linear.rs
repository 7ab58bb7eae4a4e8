use std::fmt;
use std::str::FromStr;

use nalgebra::Matrix2;
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::integrators::{
    step_decoupled_alpha, step_decoupled_linear, step_explicit_euler, step_implicit_euler,
    step_symplectic_euler, step_theta_inner, step_theta_outer, IntegratorKind,
};
use crate::potentials::QuadraticSpring;
use crate::solver::NewtonSettings;
use crate::state::{MassMatrix, SystemState};
use crate::tableau::Tableau;

/// A method that acts linearly on `ẍ = −ħ x` (`h = m = 1`).
#[derive(Debug, Clone, PartialEq)]
pub enum LinearMethod {
    Kind(IntegratorKind),
    /// Decoupled symplectic method built on a Butcher tableau.
    Decoupled(Tableau),
}

impl LinearMethod {
    pub fn name(&self) -> String {
        match self {
            LinearMethod::Kind(k) => k.name(),
            LinearMethod::Decoupled(t) => format!("decoupled:{}", t.name),
        }
    }
}

impl fmt::Display for LinearMethod {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.name())
    }
}

impl FromStr for LinearMethod {
    type Err = Error;

    /// Integrator names, or `decoupled:<tableau>` for a catalog tableau.
    fn from_str(s: &str) -> Result<Self> {
        if let Some(name) = s.strip_prefix("decoupled:") {
            return Tableau::by_name(name)
                .map(LinearMethod::Decoupled)
                .ok_or_else(|| Error::InvalidParameter(format!("unknown tableau `{name}`")));
        }
        s.parse().map(LinearMethod::Kind)
    }
}

/// One-step update `(x, v) ↦ Q (x, v)` of a method on the linear test problem.
#[derive(Debug, Clone, PartialEq)]
pub struct LinearUpdateMatrix {
    pub q: Matrix2<f64>,
    pub hbar: f64,
    pub method: String,
    pub alpha: Option<f64>,
}

impl LinearUpdateMatrix {
    pub fn trace(&self) -> f64 {
        self.q.trace()
    }

    pub fn det(&self) -> f64 {
        self.q.determinant()
    }

    /// Eigenvalues, larger modulus first.
    pub fn eigenvalues(&self) -> [Complex64; 2] {
        let tr = self.trace();
        let disc = Complex64::new(tr * tr - 4.0 * self.det(), 0.0).sqrt();
        let a = (Complex64::new(tr, 0.0) + disc) / 2.0;
        let b = (Complex64::new(tr, 0.0) - disc) / 2.0;
        if a.norm() >= b.norm() {
            [a, b]
        } else {
            [b, a]
        }
    }

    pub fn spectral_radius(&self) -> f64 {
        self.eigenvalues()[0].norm()
    }

    /// Some eigenvalue lies outside the unit circle by more than `tol`.
    pub fn is_unstable(&self, tol: f64) -> bool {
        self.spectral_radius() > 1.0 + tol
    }
}

/// Assembles `Q` by stepping the unit states `(1, 0)` and `(0, 1)` of
/// `ẍ = −ħ x` with `k = ħ`, `m = 1`, `h = 1`. `alpha` applies to the
/// decoupled α-methods (default 1).
pub fn build_update_matrix(method: &LinearMethod, hbar: f64, alpha: Option<f64>) -> Result<LinearUpdateMatrix> {
    if !(hbar >= 0.0 && hbar.is_finite()) {
        return Err(Error::InvalidParameter(format!("ħ must be finite and non-negative, got {hbar}")));
    }
    let q = match method {
        LinearMethod::Decoupled(t) => step_decoupled_linear(t, hbar)?,
        LinearMethod::Kind(kind) => {
            let spring = QuadraticSpring::new(hbar, 0.0)?;
            let m = MassMatrix::uniform(1, 1.0)?;
            let set = NewtonSettings::tight();
            let one = |x: f64, v: f64| -> Result<(f64, f64)> {
                let s = SystemState::from_slices(&[x], &[v])?;
                let (n, _) = match kind {
                    IntegratorKind::ExplicitEuler => step_explicit_euler(&s, &m, &spring, 1.0)?,
                    IntegratorKind::ImplicitEuler => step_implicit_euler(&s, &m, &spring, None, 1.0, &set)?,
                    IntegratorKind::ThetaInner(th) => step_theta_inner(&s, &m, &spring, 1.0, *th, &set)?,
                    IntegratorKind::ThetaOuter(th) => step_theta_outer(&s, &m, &spring, 1.0, *th, &set)?,
                    IntegratorKind::Midpoint => step_theta_inner(&s, &m, &spring, 1.0, 0.5, &set)?,
                    IntegratorKind::Trapezoidal => step_theta_outer(&s, &m, &spring, 1.0, 0.5, &set)?,
                    IntegratorKind::SymplecticEuler => step_symplectic_euler(&s, &m, &spring, 1.0)?,
                    IntegratorKind::A1 | IntegratorKind::ASearch => {
                        step_decoupled_alpha(&s, &m, &spring, None, 1.0, alpha.unwrap_or(1.0), &set)?
                    }
                    IntegratorKind::Bdf2 | IntegratorKind::Blending => {
                        return Err(Error::Unsupported {
                            method: kind.name(),
                            reason: "not a linear one-step map".into(),
                        })
                    }
                };
                Ok((n.x[0], n.v[0]))
            };
            let (x1, v1) = one(1.0, 0.0)?;
            let (x2, v2) = one(0.0, 1.0)?;
            Matrix2::new(x1, x2, v1, v2)
        }
    };
    let alpha = match method {
        LinearMethod::Kind(IntegratorKind::A1) => Some(alpha.unwrap_or(1.0)),
        LinearMethod::Kind(IntegratorKind::ASearch) => Some(alpha.unwrap_or(1.0)),
        _ => None,
    };
    Ok(LinearUpdateMatrix { q, hbar, method: method.name(), alpha })
}

/// `[[1−ħ, 1], [−ħ, 1]]`.
pub fn symplectic_euler_closed_form(hbar: f64) -> Matrix2<f64> {
    Matrix2::new(1.0 - hbar, 1.0, -hbar, 1.0)
}

/// `(1 + ħ/4)⁻¹ [[1−ħ/4, 1], [−ħ, 1−ħ/4]]`.
pub fn midpoint_closed_form(hbar: f64) -> Matrix2<f64> {
    let d = 1.0 + hbar / 4.0;
    Matrix2::new(1.0 - hbar / 4.0, 1.0, -hbar, 1.0 - hbar / 4.0) / d
}

/// `(1 + ħ)⁻¹ [[1, 1], [−ħ(1+αħ), 1+αħ]]`.
pub fn decoupled_alpha_closed_form(hbar: f64, alpha: f64) -> Matrix2<f64> {
    let g = 1.0 + alpha * hbar;
    Matrix2::new(1.0, 1.0, -hbar * g, g) / (1.0 + hbar)
}

#[derive(Debug, Clone, PartialEq)]
pub struct StabilityRow {
    pub method: String,
    pub hbar: f64,
    pub alpha: Option<f64>,
    pub trace: f64,
    pub det: f64,
    pub abs_lambda: [f64; 2],
    pub unstable: bool,
}

/// Trace, determinant and eigenvalue moduli over a grid. Methods without an
/// `α` ignore `alphas`; α-methods get one row per value.
pub fn stability_rows(methods: &[LinearMethod], hbars: &[f64], alphas: &[f64]) -> Result<Vec<StabilityRow>> {
    let mut rows = Vec::new();
    for method in methods {
        let uses_alpha = matches!(method, LinearMethod::Kind(IntegratorKind::A1 | IntegratorKind::ASearch));
        let grid: Vec<Option<f64>> = if uses_alpha && !alphas.is_empty() {
            alphas.iter().map(|&a| Some(a)).collect()
        } else {
            vec![None]
        };
        for &hbar in hbars {
            for &alpha in &grid {
                let q = build_update_matrix(method, hbar, alpha)?;
                let ev = q.eigenvalues();
                rows.push(StabilityRow {
                    method: q.method.clone(),
                    hbar,
                    alpha: q.alpha,
                    trace: q.trace(),
                    det: q.det(),
                    abs_lambda: [ev[0].norm(), ev[1].norm()],
                    unstable: q.is_unstable(1e-9),
                });
            }
        }
    }
    Ok(rows)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn close(a: &Matrix2<f64>, b: &Matrix2<f64>, tol: f64) -> bool {
        a.iter().zip(b.iter()).all(|(x, y)| (x - y).abs() <= tol * x.abs().max(y.abs()).max(1.0))
    }

    #[test]
    fn assembled_matrices_match_closed_forms() {
        for hbar in [0.01, 0.5, 3.0, 40.0, 1e4] {
            let se = build_update_matrix(&LinearMethod::Kind(IntegratorKind::SymplecticEuler), hbar, None).unwrap();
            assert!(close(&se.q, &symplectic_euler_closed_form(hbar), 1e-12));
            let mid = build_update_matrix(&LinearMethod::Kind(IntegratorKind::Midpoint), hbar, None).unwrap();
            assert!(close(&mid.q, &midpoint_closed_form(hbar), 1e-10));
            for a in [0.0, 0.5, 1.0, 2.0] {
                let q = build_update_matrix(&LinearMethod::Kind(IntegratorKind::A1), hbar, Some(a)).unwrap();
                assert!(close(&q.q, &decoupled_alpha_closed_form(hbar, a), 1e-10));
            }
        }
    }

    #[test]
    fn midpoint_trace_vanishes_at_four() {
        let q = build_update_matrix(&LinearMethod::Kind(IntegratorKind::Midpoint), 4.0, None).unwrap();
        assert!(q.trace().abs() < 1e-12);
    }

    #[test]
    fn alpha_zero_is_implicit_euler() {
        let hbar = 7.0;
        let a0 = build_update_matrix(&LinearMethod::Kind(IntegratorKind::A1), hbar, Some(0.0)).unwrap();
        let ie = build_update_matrix(&LinearMethod::Kind(IntegratorKind::ImplicitEuler), hbar, None).unwrap();
        assert!(close(&a0.q, &ie.q, 1e-12));
        assert!((a0.det() - 1.0 / (1.0 + hbar)).abs() < 1e-12);
    }

    #[test]
    fn symplectic_euler_unstable_past_four() {
        let m = LinearMethod::Kind(IntegratorKind::SymplecticEuler);
        assert!(!build_update_matrix(&m, 3.9, None).unwrap().is_unstable(1e-9));
        assert!(build_update_matrix(&m, 5.0, None).unwrap().is_unstable(1e-9));
    }

    #[test]
    fn method_names_parse() {
        assert_eq!("a1".parse::<LinearMethod>().unwrap(), LinearMethod::Kind(IntegratorKind::A1));
        assert_eq!(
            "decoupled:sdirk2".parse::<LinearMethod>().unwrap(),
            LinearMethod::Decoupled(Tableau::sdirk2())
        );
        assert!("decoupled:nope".parse::<LinearMethod>().is_err());
    }

    #[test]
    fn bdf2_is_rejected() {
        assert!(build_update_matrix(&LinearMethod::Kind(IntegratorKind::Bdf2), 1.0, None).is_err());
    }
}
