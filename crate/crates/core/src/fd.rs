//! Central finite-difference checks for potentials.

use nalgebra::{DMatrix, DVector};

use crate::potential::Potential;

fn fd_step(xi: f64) -> f64 {
    1e-6 * xi.abs().max(1.0)
}

/// Central-difference gradient of `energy`.
pub fn gradient(p: &dyn Potential, x: &DVector<f64>) -> DVector<f64> {
    let mut g = DVector::zeros(x.len());
    let mut xp = x.clone();
    for i in 0..x.len() {
        let h = fd_step(x[i]);
        xp[i] = x[i] + h;
        let ep = p.energy(&xp);
        xp[i] = x[i] - h;
        let em = p.energy(&xp);
        xp[i] = x[i];
        g[i] = (ep - em) / (2.0 * h);
    }
    g
}

/// Central-difference Jacobian of `gradient`.
pub fn hessian(p: &dyn Potential, x: &DVector<f64>) -> DMatrix<f64> {
    let n = x.len();
    let mut hm = DMatrix::zeros(n, n);
    let mut xp = x.clone();
    for j in 0..n {
        let h = fd_step(x[j]);
        xp[j] = x[j] + h;
        let gp = p.gradient(&xp);
        xp[j] = x[j] - h;
        let gm = p.gradient(&xp);
        xp[j] = x[j];
        hm.set_column(j, &((gp - gm) / (2.0 * h)));
    }
    hm
}

/// `‖a − b‖∞ / max(‖b‖∞, floor)`.
pub fn relative_error(a: &[f64], b: &[f64], floor: f64) -> f64 {
    let diff = a
        .iter()
        .zip(b)
        .map(|(a, b)| (a - b).abs())
        .fold(0.0, f64::max);
    let scale = b.iter().map(|b| b.abs()).fold(floor, f64::max);
    diff / scale
}

/// Relative error of the analytic gradient against finite differences.
pub fn gradient_error(p: &dyn Potential, x: &DVector<f64>) -> f64 {
    let fd = gradient(p, x);
    relative_error(p.gradient(x).as_slice(), fd.as_slice(), 1.0)
}

/// Relative error of the analytic Hessian against differenced gradients.
pub fn hessian_error(p: &dyn Potential, x: &DVector<f64>) -> f64 {
    let fd = hessian(p, x);
    relative_error(p.hessian(x).as_slice(), fd.as_slice(), 1.0)
}

/// Relative asymmetry `‖H − Hᵀ‖∞ / max(‖H‖∞, 1)`.
pub fn asymmetry(p: &dyn Potential, x: &DVector<f64>) -> f64 {
    let h = p.hessian(x);
    relative_error(h.as_slice(), h.transpose().as_slice(), 1.0)
}
