use nalgebra::{DMatrix, DVector, SymmetricEigen};

use crate::error::{Error, Result};
use crate::potential::Potential;
use crate::potentials::NeoHookeanChain1D;

/// Eigenvalues below this fraction of the largest count as rigid.
const RIGID_TOL: f64 = 1e-9;

/// Mass-orthonormal eigenmodes of a chain linearized at rest.
#[derive(Debug, Clone, PartialEq)]
pub struct ModalBasis {
    /// Elastic angular frequencies, ascending.
    pub frequencies: Vec<f64>,
    /// Columns `φ_i` with `φᵢᵀ M φⱼ = δᵢⱼ`, same order as `frequencies`.
    pub modes: DMatrix<f64>,
    pub masses: DVector<f64>,
    pub rest: DVector<f64>,
    pub stiffness: DMatrix<f64>,
    pub rigid_modes: usize,
}

/// Modal energies of one frame.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectrumReport {
    pub frequencies: Vec<f64>,
    /// `E_i = ½(ω_i² q_i² + q̇_i²)`.
    pub energies: Vec<f64>,
    /// `½ M v_com²`.
    pub com_energy: f64,
}

impl SpectrumReport {
    pub fn total(&self) -> f64 {
        self.energies.iter().sum()
    }

    /// Summed energy of elastic modes `first..=last`, counted from 1.
    pub fn band_energy(&self, first: usize, last: usize) -> f64 {
        let lo = first.max(1) - 1;
        let hi = last.min(self.energies.len());
        if lo >= hi {
            return 0.0;
        }
        self.energies[lo..hi].iter().sum()
    }
}

impl ModalBasis {
    /// Solves `K φ = ω² M φ` at the rest shape.
    pub fn new(chain: &NeoHookeanChain1D) -> Result<Self> {
        let rest = chain.rest_positions(0.0);
        let k = chain.hessian(&rest);
        let masses = chain.masses().diag().clone();
        let inv_sqrt = masses.map(|m| 1.0 / m.sqrt());
        let a = DMatrix::from_fn(k.nrows(), k.ncols(), |i, j| inv_sqrt[i] * k[(i, j)] * inv_sqrt[j]);
        let eig = SymmetricEigen::new(a);
        let scale = eig.eigenvalues.amax().max(f64::MIN_POSITIVE);
        let min = eig.eigenvalues.min();
        if min < -RIGID_TOL * scale {
            return Err(Error::IndefiniteStiffness(min));
        }
        let mut order: Vec<usize> = (0..eig.eigenvalues.len()).collect();
        order.sort_by(|&i, &j| eig.eigenvalues[i].total_cmp(&eig.eigenvalues[j]));
        let rigid_modes = order.iter().filter(|&&i| eig.eigenvalues[i] <= RIGID_TOL * scale).count();
        let elastic = &order[rigid_modes..];
        let mut modes = DMatrix::zeros(k.nrows(), elastic.len());
        for (c, &i) in elastic.iter().enumerate() {
            let col = eig.eigenvectors.column(i).component_mul(&inv_sqrt);
            modes.set_column(c, &col);
        }
        Ok(Self {
            frequencies: elastic.iter().map(|&i| eig.eigenvalues[i].sqrt()).collect(),
            modes,
            masses,
            rest,
            stiffness: k,
            rigid_modes,
        })
    }

    /// Projects the displacement from rest and the velocity onto the elastic modes.
    pub fn project(&self, x: &DVector<f64>, v: &DVector<f64>) -> Result<SpectrumReport> {
        let n = self.masses.len();
        for len in [x.len(), v.len()] {
            if len != n {
                return Err(Error::DimensionMismatch { expected: n, found: len });
            }
        }
        let mu = (x - &self.rest).component_mul(&self.masses);
        let mv = v.component_mul(&self.masses);
        let q = self.modes.tr_mul(&mu);
        let qd = self.modes.tr_mul(&mv);
        let energies = self
            .frequencies
            .iter()
            .enumerate()
            .map(|(i, w)| 0.5 * (w * w * q[i] * q[i] + qd[i] * qd[i]))
            .collect();
        let total_mass = self.masses.sum();
        let com_v = mv.sum() / total_mass;
        Ok(SpectrumReport {
            frequencies: self.frequencies.clone(),
            energies,
            com_energy: 0.5 * total_mass * com_v * com_v,
        })
    }

    /// `½ uᵀ K u + ½ vᵀ M v` for the displacement `u` from rest.
    pub fn linearized_energy(&self, x: &DVector<f64>, v: &DVector<f64>) -> f64 {
        let u = x - &self.rest;
        0.5 * u.dot(&(&self.stiffness * &u)) + 0.5 * v.component_mul(v).dot(&self.masses)
    }
}

pub fn modal_spectrum(chain: &NeoHookeanChain1D, x: &DVector<f64>, v: &DVector<f64>) -> Result<SpectrumReport> {
    ModalBasis::new(chain)?.project(x, v)
}
