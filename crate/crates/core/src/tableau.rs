//! Butcher tableaux: adjoints, the symplecticity condition and stability
//! functions `R(z) = det(I + zA†) / det(I − zA)`.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::error::{Error, Result};

/// Runge–Kutta coefficients `(A, b)`; stage nodes `c = A·e` are implied.
#[derive(Debug, Clone, PartialEq)]
pub struct Tableau {
    pub name: String,
    pub a: DMatrix<f64>,
    pub b: DVector<f64>,
}

/// One evaluation of a stability function.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StabilitySample {
    pub z: Complex64,
    pub r: Complex64,
}

impl Tableau {
    pub fn new(name: impl Into<String>, a: DMatrix<f64>, b: DVector<f64>) -> Result<Self> {
        if !a.is_square() || a.nrows() != b.len() || b.is_empty() {
            return Err(Error::DimensionMismatch { expected: a.nrows(), found: b.len() });
        }
        Ok(Self { name: name.into(), a, b })
    }

    fn from_rows(name: &str, s: usize, a: &[f64], b: &[f64]) -> Self {
        Self::new(name, DMatrix::from_row_slice(s, s, a), DVector::from_column_slice(b))
            .expect("catalog tableaux are well formed")
    }

    pub fn stages(&self) -> usize {
        self.b.len()
    }

    pub fn explicit_euler() -> Self {
        Self::from_rows("explicit_euler", 1, &[0.0], &[1.0])
    }

    pub fn implicit_euler() -> Self {
        Self::from_rows("implicit_euler", 1, &[1.0], &[1.0])
    }

    pub fn implicit_midpoint() -> Self {
        Self::from_rows("implicit_midpoint", 1, &[0.5], &[1.0])
    }

    pub fn trapezoidal() -> Self {
        Self::from_rows("trapezoidal", 2, &[0.0, 0.0, 0.5, 0.5], &[0.5, 0.5])
    }

    /// Two-stage, second-order, stiffly accurate SDIRK with `γ = 1 − 1/√2`.
    pub fn sdirk2() -> Self {
        let g = 1.0 - std::f64::consts::FRAC_1_SQRT_2;
        Self::from_rows("sdirk2", 2, &[g, 0.0, 1.0 - g, g], &[1.0 - g, g])
    }

    pub fn catalog() -> Vec<Tableau> {
        vec![
            Self::explicit_euler(),
            Self::implicit_euler(),
            Self::implicit_midpoint(),
            Self::trapezoidal(),
            Self::sdirk2(),
        ]
    }

    pub fn by_name(name: &str) -> Option<Tableau> {
        Self::catalog().into_iter().find(|t| t.name == name)
    }

    /// Stage nodes `c = A·e`.
    pub fn nodes(&self) -> DVector<f64> {
        DVector::from_fn(self.stages(), |i, _| self.a.row(i).sum())
    }

    /// `A† = e bᵀ − A`.
    pub fn adjoint_matrix(&self) -> DMatrix<f64> {
        let s = self.stages();
        DMatrix::from_fn(s, s, |_, j| self.b[j]) - &self.a
    }

    pub fn is_stiffly_accurate(&self) -> bool {
        let s = self.stages();
        (0..s).all(|j| (self.a[(s - 1, j)] - self.b[j]).abs() < 1e-15)
    }
}

/// Adjoint method `(e bᵀ − A, b)`; stages are not reordered.
pub fn adjoint(t: &Tableau) -> Tableau {
    let name = match t.name.strip_suffix("_adjoint") {
        Some(base) => base.to_string(),
        None => format!("{}_adjoint", t.name),
    };
    Tableau { name, a: t.adjoint_matrix(), b: t.b.clone() }
}

/// `‖diag(b) A + Aᵀ diag(b) − b bᵀ‖∞ ≤ tol`.
pub fn is_symplectic(t: &Tableau, tol: f64) -> bool {
    let s = t.stages();
    let mut worst = 0.0f64;
    for i in 0..s {
        for j in 0..s {
            let m = t.b[i] * t.a[(i, j)] + t.b[j] * t.a[(j, i)] - t.b[i] * t.b[j];
            worst = worst.max(m.abs());
        }
    }
    worst <= tol
}

fn complex_det(m: DMatrix<Complex64>) -> Complex64 {
    match m.nrows() {
        1 => m[(0, 0)],
        2 => m[(0, 0)] * m[(1, 1)] - m[(0, 1)] * m[(1, 0)],
        _ => m.determinant(),
    }
}

fn shifted(a: &DMatrix<f64>, z: Complex64, sign: f64) -> DMatrix<Complex64> {
    let s = a.nrows();
    DMatrix::from_fn(s, s, |i, j| {
        let id = if i == j { Complex64::new(1.0, 0.0) } else { Complex64::new(0.0, 0.0) };
        id + z * (sign * a[(i, j)])
    })
}

/// `R(z) = det(I + zA†) / det(I − zA)`.
pub fn stability_function(t: &Tableau, z: Complex64) -> Result<Complex64> {
    let den = complex_det(shifted(&t.a, z, -1.0));
    let row_norm = t.a.row_iter().map(|r| r.iter().map(|a| a.abs()).sum::<f64>()).fold(0.0, f64::max);
    let scale = (1.0 + z.norm() * row_norm).powi(t.stages() as i32);
    if den.norm() < 1e-14 * scale {
        return Err(Error::Pole(z));
    }
    let num = complex_det(shifted(&t.adjoint_matrix(), z, 1.0));
    Ok(num / den)
}

pub fn sample(t: &Tableau, z: Complex64) -> Result<StabilitySample> {
    Ok(StabilitySample { z, r: stability_function(t, z)? })
}
