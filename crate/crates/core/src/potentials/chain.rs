use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::potential::{gap_step_bound, Potential};
use crate::state::MassMatrix;

/// Two-node-element chain with 1D Neo-Hookean energy density
/// `Ψ(F) = (E/4)(F² − 1 − 2 ln F)` per unit rest length, `F = l / l₀`.
///
/// Coordinates are node positions, ordered so that rest element lengths are
/// positive. `E` is an axial modulus (N), so `√(E/ρ)` with linear density `ρ`
/// is the wave speed.
#[derive(Debug, Clone, PartialEq)]
pub struct NeoHookeanChain1D {
    nodes: usize,
    rest_length: f64,
    youngs_modulus: f64,
    masses: DVector<f64>,
}

impl NeoHookeanChain1D {
    pub fn new(nodes: usize, rest_length: f64, youngs_modulus: f64, masses: DVector<f64>) -> Result<Self> {
        if nodes < 2 {
            return Err(Error::InvalidParameter(format!("chain needs at least 2 nodes, got {nodes}")));
        }
        if !(rest_length > 0.0) || !(youngs_modulus > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "chain needs positive rest length and modulus, got l0={rest_length}, E={youngs_modulus}"
            )));
        }
        if masses.len() != nodes {
            return Err(Error::DimensionMismatch { expected: nodes, found: masses.len() });
        }
        Ok(Self { nodes, rest_length, youngs_modulus, masses })
    }

    /// Uniform chain of `elements` elements over `length` with lumped mass.
    pub fn uniform(elements: usize, length: f64, youngs_modulus: f64, total_mass: f64) -> Result<Self> {
        if elements == 0 {
            return Err(Error::InvalidParameter("chain needs at least one element".into()));
        }
        let l0 = length / elements as f64;
        let me = total_mass / elements as f64;
        let mut masses = DVector::zeros(elements + 1);
        for e in 0..elements {
            masses[e] += 0.5 * me;
            masses[e + 1] += 0.5 * me;
        }
        Self::new(elements + 1, l0, youngs_modulus, masses)
    }

    pub fn nodes(&self) -> usize {
        self.nodes
    }

    pub fn elements(&self) -> usize {
        self.nodes - 1
    }

    pub fn rest_length(&self) -> f64 {
        self.rest_length
    }

    pub fn youngs_modulus(&self) -> f64 {
        self.youngs_modulus
    }

    pub fn length(&self) -> f64 {
        self.rest_length * self.elements() as f64
    }

    pub fn total_mass(&self) -> f64 {
        self.masses.sum()
    }

    /// Linear density `ρ = M / L`.
    pub fn density(&self) -> f64 {
        self.total_mass() / self.length()
    }

    pub fn masses(&self) -> MassMatrix {
        MassMatrix::new(self.masses.clone()).expect("chain masses validated at construction")
    }

    /// Rest configuration with node 0 at `origin`.
    pub fn rest_positions(&self, origin: f64) -> DVector<f64> {
        DVector::from_fn(self.nodes, |i, _| origin + i as f64 * self.rest_length)
    }

    fn stretch(&self, x: &DVector<f64>, e: usize) -> f64 {
        (x[e + 1] - x[e]) / self.rest_length
    }

    /// `dW/dl` of one element.
    fn element_force(&self, f: f64) -> f64 {
        0.5 * self.youngs_modulus * (f - 1.0 / f)
    }

    /// `d²W/dl²` of one element; positive for every `F > 0`.
    fn element_stiffness(&self, f: f64) -> f64 {
        0.5 * self.youngs_modulus * (1.0 + 1.0 / (f * f)) / self.rest_length
    }
}

impl Potential for NeoHookeanChain1D {
    fn energy(&self, x: &DVector<f64>) -> f64 {
        let mut e = 0.0;
        for el in 0..self.elements() {
            let f = self.stretch(x, el);
            if !(f > 0.0) {
                return f64::INFINITY;
            }
            e += self.rest_length * 0.25 * self.youngs_modulus * (f * f - 1.0 - 2.0 * f.ln());
        }
        e
    }

    fn gradient(&self, x: &DVector<f64>) -> DVector<f64> {
        let mut g = DVector::zeros(x.len());
        for el in 0..self.elements() {
            let t = self.element_force(self.stretch(x, el));
            g[el] -= t;
            g[el + 1] += t;
        }
        g
    }

    fn hessian(&self, x: &DVector<f64>) -> DMatrix<f64> {
        let mut h = DMatrix::zeros(x.len(), x.len());
        for el in 0..self.elements() {
            let k = self.element_stiffness(self.stretch(x, el));
            h[(el, el)] += k;
            h[(el + 1, el + 1)] += k;
            h[(el, el + 1)] -= k;
            h[(el + 1, el)] -= k;
        }
        h
    }

    fn step_bound(&self, x: &DVector<f64>, dx: &DVector<f64>) -> f64 {
        (0..self.elements())
            .map(|el| gap_step_bound(x[el + 1] - x[el], dx[el + 1] - dx[el]))
            .fold(1.0, f64::min)
    }

    // every element is convex in its length
    fn projected_hessian(&self, x: &DVector<f64>) -> DMatrix<f64> {
        self.hessian(x)
    }
}
