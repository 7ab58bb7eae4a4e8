use nalgebra::Matrix2;
use num_complex::Complex64;

use crate::error::Result;
use crate::tableau::{adjoint, stability_function, Tableau};

/// 2×2 update of the decoupled symplectic method built on `tableau`, applied
/// to `ẍ = −ħ x` with `h = m = 1`.
///
/// Each one-step method acts on `z = x − i v/ω` as multiplication by
/// `R(iω)`; the position row is taken from the tableau and the velocity row
/// from its adjoint.
pub fn step_decoupled_linear(tableau: &Tableau, hbar: f64) -> Result<Matrix2<f64>> {
    let omega = hbar.sqrt();
    let z = Complex64::new(0.0, omega);
    let r = stability_function(tableau, z)?;
    let r_adj = stability_function(&adjoint(tableau), z)?;
    let (off_x, off_v) = if omega > 0.0 { (r.im / omega, r_adj.im * omega) } else { (1.0, 0.0) };
    Ok(Matrix2::new(r.re, off_x, -off_v, r_adj.re))
}
