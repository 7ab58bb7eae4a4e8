//! Energy terms over flat coordinate vectors.
//!
//! Every term reports `+∞` outside its domain instead of failing, so a line
//! search can treat "energy is finite" as the feasibility test.

use std::fmt::Debug;
use std::sync::Arc;

use nalgebra::{DMatrix, DVector};

/// A potential energy `P(x)` with first and second derivatives.
pub trait Potential: Debug + Send + Sync {
    fn energy(&self, x: &DVector<f64>) -> f64;

    fn gradient(&self, x: &DVector<f64>) -> DVector<f64>;

    /// Dense symmetric Hessian.
    fn hessian(&self, x: &DVector<f64>) -> DMatrix<f64>;

    /// Hessian with negative curvature removed. Convex terms override this
    /// with the plain Hessian.
    fn projected_hessian(&self, x: &DVector<f64>) -> DMatrix<f64> {
        project_psd(self.hessian(x))
    }

    fn is_feasible(&self, x: &DVector<f64>) -> bool {
        self.energy(x).is_finite()
    }

    /// Largest fraction of the step `dx` a line search may take from `x`.
    /// Terms with an interior barrier keep every gap from shrinking by more
    /// than [`GAP_SHRINK`].
    fn step_bound(&self, _x: &DVector<f64>, _dx: &DVector<f64>) -> f64 {
        1.0
    }
}

/// Fraction of a barrier gap one line-search step may close.
pub const GAP_SHRINK: f64 = 0.9;

/// Step fraction that keeps a gap `d > 0` above `(1 − GAP_SHRINK)·d` when it changes at rate `dd`.
pub fn gap_step_bound(d: f64, dd: f64) -> f64 {
    if dd < 0.0 && d > 0.0 {
        (GAP_SHRINK * d / -dd).min(1.0)
    } else {
        1.0
    }
}

/// Clamps the eigenvalues of a symmetric matrix at zero.
pub fn project_psd(h: DMatrix<f64>) -> DMatrix<f64> {
    if h.nrows() == 1 {
        return h.map(|a| a.max(0.0));
    }
    let eig = h.symmetric_eigen();
    if eig.eigenvalues.iter().all(|&l| l >= 0.0) {
        return eig.recompose();
    }
    let clamped = eig.eigenvalues.map(|l| l.max(0.0));
    let q = &eig.eigenvectors;
    q * DMatrix::from_diagonal(&clamped) * q.transpose()
}

/// `P ≡ 0`.
#[derive(Debug, Clone, Copy, Default)]
pub struct ZeroPotential;

impl Potential for ZeroPotential {
    fn energy(&self, _x: &DVector<f64>) -> f64 {
        0.0
    }

    fn gradient(&self, x: &DVector<f64>) -> DVector<f64> {
        DVector::zeros(x.len())
    }

    fn hessian(&self, x: &DVector<f64>) -> DMatrix<f64> {
        DMatrix::zeros(x.len(), x.len())
    }

    fn projected_hessian(&self, x: &DVector<f64>) -> DMatrix<f64> {
        self.hessian(x)
    }
}

/// Weighted sum of potentials; feasible iff every part is.
#[derive(Debug, Clone, Default)]
pub struct CompositePotential {
    parts: Vec<(Arc<dyn Potential>, f64)>,
}

impl CompositePotential {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn with(mut self, p: impl Potential + 'static, weight: f64) -> Self {
        self.push(Arc::new(p), weight);
        self
    }

    pub fn push(&mut self, p: Arc<dyn Potential>, weight: f64) {
        self.parts.push((p, weight));
    }

    pub fn parts(&self) -> &[(Arc<dyn Potential>, f64)] {
        &self.parts
    }

    pub fn is_empty(&self) -> bool {
        self.parts.is_empty()
    }
}

impl Potential for CompositePotential {
    fn energy(&self, x: &DVector<f64>) -> f64 {
        let mut e = 0.0;
        for (p, w) in &self.parts {
            let pe = p.energy(x);
            if !pe.is_finite() {
                return f64::INFINITY;
            }
            e += w * pe;
        }
        e
    }

    fn gradient(&self, x: &DVector<f64>) -> DVector<f64> {
        let mut g = DVector::zeros(x.len());
        for (p, w) in &self.parts {
            g.axpy(*w, &p.gradient(x), 1.0);
        }
        g
    }

    fn hessian(&self, x: &DVector<f64>) -> DMatrix<f64> {
        let mut h = DMatrix::zeros(x.len(), x.len());
        for (p, w) in &self.parts {
            h += p.hessian(x) * *w;
        }
        h
    }

    fn projected_hessian(&self, x: &DVector<f64>) -> DMatrix<f64> {
        let mut h = DMatrix::zeros(x.len(), x.len());
        for (p, w) in &self.parts {
            if *w >= 0.0 {
                h += p.projected_hessian(x) * *w;
            } else {
                h += project_psd(p.hessian(x) * *w);
            }
        }
        h
    }

    fn is_feasible(&self, x: &DVector<f64>) -> bool {
        self.parts.iter().all(|(p, _)| p.is_feasible(x))
    }

    fn step_bound(&self, x: &DVector<f64>, dx: &DVector<f64>) -> f64 {
        self.parts.iter().map(|(p, _)| p.step_bound(x, dx)).fold(1.0, f64::min)
    }
}

impl<P: Potential + ?Sized> Potential for Arc<P> {
    fn energy(&self, x: &DVector<f64>) -> f64 {
        (**self).energy(x)
    }
    fn gradient(&self, x: &DVector<f64>) -> DVector<f64> {
        (**self).gradient(x)
    }
    fn hessian(&self, x: &DVector<f64>) -> DMatrix<f64> {
        (**self).hessian(x)
    }
    fn projected_hessian(&self, x: &DVector<f64>) -> DMatrix<f64> {
        (**self).projected_hessian(x)
    }
    fn is_feasible(&self, x: &DVector<f64>) -> bool {
        (**self).is_feasible(x)
    }
    fn step_bound(&self, x: &DVector<f64>, dx: &DVector<f64>) -> f64 {
        (**self).step_bound(x, dx)
    }
}

/// Sum of two borrowed potentials, used to fold pseudo-potentials into a solve.
#[derive(Debug, Clone, Copy)]
pub struct Sum<'a> {
    pub a: &'a dyn Potential,
    pub b: &'a dyn Potential,
}

impl Potential for Sum<'_> {
    fn energy(&self, x: &DVector<f64>) -> f64 {
        let ea = self.a.energy(x);
        if !ea.is_finite() {
            return f64::INFINITY;
        }
        ea + self.b.energy(x)
    }
    fn gradient(&self, x: &DVector<f64>) -> DVector<f64> {
        self.a.gradient(x) + self.b.gradient(x)
    }
    fn hessian(&self, x: &DVector<f64>) -> DMatrix<f64> {
        self.a.hessian(x) + self.b.hessian(x)
    }
    fn projected_hessian(&self, x: &DVector<f64>) -> DMatrix<f64> {
        self.a.projected_hessian(x) + self.b.projected_hessian(x)
    }
    fn step_bound(&self, x: &DVector<f64>, dx: &DVector<f64>) -> f64 {
        self.a.step_bound(x, dx).min(self.b.step_bound(x, dx))
    }
    fn is_feasible(&self, x: &DVector<f64>) -> bool {
        self.a.is_feasible(x) && self.b.is_feasible(x)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::potentials::{Gravity, IpcBarrier1D, QuadraticSpring, Side};

    #[test]
    fn composite_is_weighted_sum() {
        let x = DVector::from_column_slice(&[0.4]);
        let s = QuadraticSpring::new(2.0, 0.0).unwrap();
        let m = crate::state::MassMatrix::uniform(1, 1.0).unwrap();
        let g = Gravity::new(9.8, &m, crate::potentials::Axis::SCALAR);
        let c = CompositePotential::new().with(s, 3.0).with(g.clone(), 0.5);
        let e = 3.0 * s.energy(&x) + 0.5 * g.energy(&x);
        assert!((c.energy(&x) - e).abs() < 1e-15);
        let grad = s.gradient(&x) * 3.0 + g.gradient(&x) * 0.5;
        assert!((c.gradient(&x) - grad).norm() < 1e-15);
        assert!((c.hessian(&x)[(0, 0)] - 6.0).abs() < 1e-15);
    }

    #[test]
    fn composite_feasible_iff_parts_feasible() {
        let b = IpcBarrier1D::new(1.0, 0.1, 0.0, Side::Above).unwrap();
        let c = CompositePotential::new()
            .with(QuadraticSpring::new(1.0, 0.0).unwrap(), 1.0)
            .with(b, 1.0);
        assert!(c.is_feasible(&DVector::from_element(1, 0.05)));
        assert!(!c.is_feasible(&DVector::from_element(1, -0.05)));
        assert_eq!(c.energy(&DVector::from_element(1, -0.05)), f64::INFINITY);
    }

    #[test]
    fn projection_clamps_negative_curvature() {
        let h = DMatrix::from_row_slice(2, 2, &[1.0, 2.0, 2.0, 1.0]);
        let p = project_psd(h);
        let eig = p.symmetric_eigen();
        assert!(eig.eigenvalues.iter().all(|&l| l > -1e-12));
        assert!((eig.eigenvalues.max() - 3.0).abs() < 1e-12);
    }
}
