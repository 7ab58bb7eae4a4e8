use nalgebra::{DMatrix, DVector, Matrix2, Vector2};

use super::Axis;
use crate::error::{Error, Result};
use crate::potential::Potential;
use crate::state::MassMatrix;

/// `½ k (x_i − rest)²` on every selected dof.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadraticSpring {
    pub k: f64,
    pub rest: f64,
    pub axis: Axis,
}

impl QuadraticSpring {
    pub fn new(k: f64, rest: f64) -> Result<Self> {
        if !(k > 0.0 && k.is_finite()) {
            return Err(Error::InvalidParameter(format!("spring stiffness must be positive, got {k}")));
        }
        Ok(Self { k, rest, axis: Axis::SCALAR })
    }

    pub fn on_axis(mut self, axis: Axis) -> Self {
        self.axis = axis;
        self
    }
}

impl Potential for QuadraticSpring {
    fn energy(&self, x: &DVector<f64>) -> f64 {
        self.axis
            .dofs(x.len())
            .map(|i| 0.5 * self.k * (x[i] - self.rest).powi(2))
            .sum()
    }

    fn gradient(&self, x: &DVector<f64>) -> DVector<f64> {
        let mut g = DVector::zeros(x.len());
        for i in self.axis.dofs(x.len()) {
            g[i] = self.k * (x[i] - self.rest);
        }
        g
    }

    fn hessian(&self, x: &DVector<f64>) -> DMatrix<f64> {
        let mut h = DMatrix::zeros(x.len(), x.len());
        for i in self.axis.dofs(x.len()) {
            h[(i, i)] = self.k;
        }
        h
    }

    fn projected_hessian(&self, x: &DVector<f64>) -> DMatrix<f64> {
        self.hessian(x)
    }
}

/// Uniform gravitational field along one axis: `Σ m_i g x_i`.
#[derive(Debug, Clone, PartialEq)]
pub struct Gravity {
    pub g: f64,
    masses: DVector<f64>,
    pub axis: Axis,
}

impl Gravity {
    pub fn new(g: f64, m: &MassMatrix, axis: Axis) -> Self {
        Self { g, masses: m.diag().clone(), axis }
    }
}

impl Potential for Gravity {
    fn energy(&self, x: &DVector<f64>) -> f64 {
        self.axis
            .dofs(x.len())
            .map(|i| self.masses[i] * self.g * x[i])
            .sum()
    }

    fn gradient(&self, x: &DVector<f64>) -> DVector<f64> {
        let mut g = DVector::zeros(x.len());
        for i in self.axis.dofs(x.len()) {
            g[i] = self.masses[i] * self.g;
        }
        g
    }

    fn hessian(&self, x: &DVector<f64>) -> DMatrix<f64> {
        DMatrix::zeros(x.len(), x.len())
    }

    fn projected_hessian(&self, x: &DVector<f64>) -> DMatrix<f64> {
        self.hessian(x)
    }
}

/// Planar spring tying every particle to a pivot: `½ k (|p − c| − r0)²`.
/// Coordinates are interleaved `(x0, y0, x1, y1, …)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CentralSpring2D {
    pub k: f64,
    pub r0: f64,
    pub pivot: [f64; 2],
}

impl CentralSpring2D {
    pub fn new(k: f64, r0: f64, pivot: [f64; 2]) -> Result<Self> {
        if !(k > 0.0) || !(r0 >= 0.0) {
            return Err(Error::InvalidParameter(format!(
                "central spring needs k > 0 and r0 ≥ 0, got k={k}, r0={r0}"
            )));
        }
        Ok(Self { k, r0, pivot })
    }

    fn arm(&self, x: &DVector<f64>, p: usize) -> Vector2<f64> {
        Vector2::new(x[2 * p] - self.pivot[0], x[2 * p + 1] - self.pivot[1])
    }

    fn particle_hessian(&self, d: &Vector2<f64>) -> (Matrix2<f64>, f64, f64, Vector2<f64>) {
        let r = d.norm();
        let n = d / r;
        let radial = self.k;
        let tangential = self.k * (r - self.r0) / r;
        let nn = n * n.transpose();
        let h = nn * radial + (Matrix2::identity() - nn) * tangential;
        (h, radial, tangential, n)
    }
}

impl Potential for CentralSpring2D {
    fn energy(&self, x: &DVector<f64>) -> f64 {
        (0..x.len() / 2)
            .map(|p| 0.5 * self.k * (self.arm(x, p).norm() - self.r0).powi(2))
            .sum()
    }

    fn gradient(&self, x: &DVector<f64>) -> DVector<f64> {
        let mut g = DVector::zeros(x.len());
        for p in 0..x.len() / 2 {
            let d = self.arm(x, p);
            let r = d.norm();
            if r > 0.0 {
                let gp = d * (self.k * (r - self.r0) / r);
                g[2 * p] = gp[0];
                g[2 * p + 1] = gp[1];
            }
        }
        g
    }

    fn hessian(&self, x: &DVector<f64>) -> DMatrix<f64> {
        let mut h = DMatrix::zeros(x.len(), x.len());
        for p in 0..x.len() / 2 {
            let (hp, ..) = self.particle_hessian(&self.arm(x, p));
            h.fixed_view_mut::<2, 2>(2 * p, 2 * p).copy_from(&hp);
        }
        h
    }

    fn projected_hessian(&self, x: &DVector<f64>) -> DMatrix<f64> {
        let mut h = DMatrix::zeros(x.len(), x.len());
        for p in 0..x.len() / 2 {
            let (_, radial, tangential, n) = self.particle_hessian(&self.arm(x, p));
            let nn = n * n.transpose();
            let hp = nn * radial + (Matrix2::identity() - nn) * tangential.max(0.0);
            h.fixed_view_mut::<2, 2>(2 * p, 2 * p).copy_from(&hp);
        }
        h
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn central_spring_is_rotation_invariant() {
        let s = CentralSpring2D::new(3.0, 0.7, [0.2, -0.1]).unwrap();
        let x = DVector::from_column_slice(&[1.1, 0.4]);
        let e0 = s.energy(&x);
        for k in 1..12 {
            let th = k as f64 * 0.53;
            let (c, sn) = (th.cos(), th.sin());
            let dx = x[0] - 0.2;
            let dy = x[1] + 0.1;
            let xr = DVector::from_column_slice(&[0.2 + c * dx - sn * dy, -0.1 + sn * dx + c * dy]);
            assert!((s.energy(&xr) - e0).abs() <= 1e-12 * e0.max(1.0));
        }
    }

    #[test]
    fn gravity_gradient_is_constant_weight() {
        let m = MassMatrix::from_slice(&[1.0, 2.0, 3.0, 4.0]).unwrap();
        let g = Gravity::new(9.8, &m, Axis::new(2, 1));
        let a = g.gradient(&DVector::from_column_slice(&[0.0, 1.0, 2.0, 3.0]));
        let b = g.gradient(&DVector::from_column_slice(&[5.0, -1.0, 7.0, 0.0]));
        assert_eq!(a, b);
        assert_eq!(a.as_slice(), &[0.0, 2.0 * 9.8, 0.0, 4.0 * 9.8]);
    }

    #[test]
    fn spring_rejects_nonpositive_stiffness() {
        assert!(QuadraticSpring::new(0.0, 0.0).is_err());
        assert!(QuadraticSpring::new(-1.0, 0.0).is_err());
    }
}
