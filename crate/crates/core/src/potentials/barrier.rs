use nalgebra::{DMatrix, DVector};

use super::{Axis, DEFAULT_DHAT, DEFAULT_KAPPA};
use crate::error::{Error, Result};
use crate::potential::{gap_step_bound, Potential};

/// Which side of the wall is free space.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Side {
    /// Free for `x > wall`.
    Above,
    /// Free for `x < wall`.
    Below,
}

impl Side {
    fn sign(self) -> f64 {
        match self {
            Side::Above => 1.0,
            Side::Below => -1.0,
        }
    }

    /// Signed distance of `x` from `wall`, positive on the free side.
    pub fn distance(self, x: f64, wall: f64) -> f64 {
        self.sign() * (x - wall)
    }
}

/// `½ k d²` for penetration depth `d` past the wall, zero on the free side.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OneSidedQuadraticBarrier {
    pub k: f64,
    pub wall: f64,
    pub side: Side,
    pub axis: Axis,
}

impl OneSidedQuadraticBarrier {
    pub fn new(k: f64, wall: f64, side: Side) -> Result<Self> {
        if !(k > 0.0 && k.is_finite()) {
            return Err(Error::InvalidParameter(format!("barrier stiffness must be positive, got {k}")));
        }
        Ok(Self { k, wall, side, axis: Axis::SCALAR })
    }

    pub fn on_axis(mut self, axis: Axis) -> Self {
        self.axis = axis;
        self
    }

    pub fn is_active(&self, x: f64) -> bool {
        self.side.distance(x, self.wall) < 0.0
    }
}

impl Potential for OneSidedQuadraticBarrier {
    fn energy(&self, x: &DVector<f64>) -> f64 {
        self.axis
            .dofs(x.len())
            .map(|i| {
                let d = self.side.distance(x[i], self.wall);
                if d < 0.0 {
                    0.5 * self.k * d * d
                } else {
                    0.0
                }
            })
            .sum()
    }

    fn gradient(&self, x: &DVector<f64>) -> DVector<f64> {
        let mut g = DVector::zeros(x.len());
        for i in self.axis.dofs(x.len()) {
            let d = self.side.distance(x[i], self.wall);
            if d < 0.0 {
                g[i] = self.side.sign() * self.k * d;
            }
        }
        g
    }

    fn hessian(&self, x: &DVector<f64>) -> DMatrix<f64> {
        let mut h = DMatrix::zeros(x.len(), x.len());
        for i in self.axis.dofs(x.len()) {
            if self.is_active(x[i]) {
                h[(i, i)] = self.k;
            }
        }
        h
    }

    fn projected_hessian(&self, x: &DVector<f64>) -> DMatrix<f64> {
        self.hessian(x)
    }
}

/// IPC log barrier `−κ (d/d̂ − 1)² ln(d/d̂)` on `0 < d < d̂`, zero beyond `d̂`,
/// `+∞` at or past the wall.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IpcBarrier1D {
    pub kappa: f64,
    pub dhat: f64,
    pub wall: f64,
    pub side: Side,
    pub axis: Axis,
}

impl Default for IpcBarrier1D {
    fn default() -> Self {
        Self {
            kappa: DEFAULT_KAPPA * DEFAULT_DHAT * DEFAULT_DHAT,
            dhat: DEFAULT_DHAT,
            wall: 0.0,
            side: Side::Above,
            axis: Axis::SCALAR,
        }
    }
}

impl IpcBarrier1D {
    pub fn new(kappa: f64, dhat: f64, wall: f64, side: Side) -> Result<Self> {
        if !(kappa > 0.0 && kappa.is_finite()) || !(dhat > 0.0 && dhat.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "IPC barrier needs κ > 0 and d̂ > 0, got κ={kappa}, d̂={dhat}"
            )));
        }
        Ok(Self { kappa, dhat, wall, side, axis: Axis::SCALAR })
    }

    /// Barrier from a stiffness in N/m, written `−k(d − d̂)² log(d/d̂)`,
    /// so the energy scale is `κ = k·d̂²`.
    pub fn from_stiffness(k: f64, dhat: f64, wall: f64, side: Side) -> Result<Self> {
        Self::new(k * dhat * dhat, dhat, wall, side)
    }

    pub fn on_axis(mut self, axis: Axis) -> Self {
        self.axis = axis;
        self
    }

    pub fn distance(&self, x: f64) -> f64 {
        self.side.distance(x, self.wall)
    }

    pub fn is_active(&self, x: f64) -> bool {
        self.distance(x) < self.dhat
    }

    /// Barrier value as a function of distance.
    pub fn value(&self, d: f64) -> f64 {
        if d <= 0.0 {
            return f64::INFINITY;
        }
        if d >= self.dhat {
            return 0.0;
        }
        let s = d / self.dhat;
        -self.kappa * (s - 1.0).powi(2) * s.ln()
    }

    /// `db/dd`.
    pub fn slope(&self, d: f64) -> f64 {
        if d <= 0.0 || d >= self.dhat {
            return 0.0;
        }
        let s = d / self.dhat;
        -self.kappa / self.dhat * (2.0 * (s - 1.0) * s.ln() + (s - 1.0).powi(2) / s)
    }

    /// `d²b/dd²`.
    pub fn curvature(&self, d: f64) -> f64 {
        if d <= 0.0 || d >= self.dhat {
            return 0.0;
        }
        let s = d / self.dhat;
        -self.kappa / (self.dhat * self.dhat)
            * (2.0 * s.ln() + 4.0 * (s - 1.0) / s - (s - 1.0).powi(2) / (s * s))
    }
}

impl Potential for IpcBarrier1D {
    fn energy(&self, x: &DVector<f64>) -> f64 {
        let mut e = 0.0;
        for i in self.axis.dofs(x.len()) {
            let b = self.value(self.distance(x[i]));
            if !b.is_finite() {
                return f64::INFINITY;
            }
            e += b;
        }
        e
    }

    fn gradient(&self, x: &DVector<f64>) -> DVector<f64> {
        let mut g = DVector::zeros(x.len());
        for i in self.axis.dofs(x.len()) {
            g[i] = self.side.sign() * self.slope(self.distance(x[i]));
        }
        g
    }

    fn hessian(&self, x: &DVector<f64>) -> DMatrix<f64> {
        let mut h = DMatrix::zeros(x.len(), x.len());
        for i in self.axis.dofs(x.len()) {
            h[(i, i)] = self.curvature(self.distance(x[i]));
        }
        h
    }

    // convex on (0, d̂)
    fn projected_hessian(&self, x: &DVector<f64>) -> DMatrix<f64> {
        self.hessian(x)
    }

    fn step_bound(&self, x: &DVector<f64>, dx: &DVector<f64>) -> f64 {
        self.axis
            .dofs(x.len())
            .map(|i| gap_step_bound(self.distance(x[i]), self.side.sign() * dx[i]))
            .fold(1.0, f64::min)
    }
}

/// Per-dof contact normal-force magnitudes `λ_i = |∂b/∂x_i|` at `x`.
pub fn ipc_normal_force_weights(x: &DVector<f64>, barrier: &IpcBarrier1D) -> Result<DVector<f64>> {
    if !barrier.is_feasible(x) {
        return Err(Error::Infeasible);
    }
    Ok(barrier.gradient(x).map(f64::abs))
}
