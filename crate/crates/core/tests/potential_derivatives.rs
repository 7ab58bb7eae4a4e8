use nalgebra::{DMatrix, DVector};
use proptest::prelude::*;

use asearch_core::fd::{asymmetry, gradient_error, hessian_error};
use asearch_core::potentials::{
    build_mass_damping, build_rayleigh, Axis, CentralSpring2D, CoulombFrictionPseudoPotential, Gravity, IpcBarrier1D,
    NeoHookeanChain1D, OneSidedQuadraticBarrier, QuadraticSpring, Side,
};
use asearch_core::{CompositePotential, MassMatrix, Potential};

const GRAD_TOL: f64 = 1e-5;
const HESS_TOL: f64 = 1e-4;

fn check(p: &dyn Potential, x: &DVector<f64>) -> Result<(), TestCaseError> {
    prop_assert!(p.is_feasible(x), "infeasible sample {x:?}");
    let g = gradient_error(p, x);
    let h = hessian_error(p, x);
    prop_assert!(g < GRAD_TOL, "gradient error {g:e} at {x:?}");
    prop_assert!(h < HESS_TOL, "hessian error {h:e} at {x:?}");
    prop_assert!(asymmetry(p, x) < 1e-12);
    Ok(())
}

fn chain_point(elements: usize) -> impl Strategy<Value = DVector<f64>> {
    (-1.0..1.0f64, prop::collection::vec(0.5..1.6f64, elements)).prop_map(move |(x0, strains)| {
        let l0 = 1.0 / strains.len() as f64;
        let mut x = vec![x0];
        for s in strains {
            x.push(x.last().unwrap() + s * l0);
        }
        DVector::from_vec(x)
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn quadratic_spring(x in -3.0..3.0f64, k in 0.1..50.0f64) {
        check(&QuadraticSpring::new(k, 0.4).unwrap(), &DVector::from_element(1, x))?;
    }

    #[test]
    fn gravity(x in prop::collection::vec(-5.0..5.0f64, 4)) {
        let m = MassMatrix::from_slice(&[1.0, 2.0, 3.0, 4.0]).unwrap();
        check(&Gravity::new(9.81, &m, Axis::new(2, 1)), &DVector::from_vec(x))?;
    }

    #[test]
    fn central_spring(r in 0.2..3.0f64, th in 0.0..6.28f64, r2 in 0.2..3.0f64, th2 in 0.0..6.28f64) {
        let p = CentralSpring2D::new(3.0, 1.0, [0.5, -0.25]).unwrap();
        let x = DVector::from_vec(vec![0.5 + r * th.cos(), -0.25 + r * th.sin(), 0.5 + r2 * th2.cos(), -0.25 + r2 * th2.sin()]);
        check(&p, &x)?;
    }

    #[test]
    fn neo_hookean_chain(x in chain_point(6), e in 0.5..100.0f64) {
        check(&NeoHookeanChain1D::uniform(6, 1.0, e, 2.0).unwrap(), &x)?;
    }

    #[test]
    fn quadratic_barrier(x in prop_oneof![-2.0..-0.01f64, 0.01..2.0f64]) {
        check(&OneSidedQuadraticBarrier::new(40.0, 0.0, Side::Above).unwrap(), &DVector::from_element(1, x))?;
        check(&OneSidedQuadraticBarrier::new(40.0, 0.0, Side::Below).unwrap(), &DVector::from_element(1, x))?;
    }

    #[test]
    fn ipc_barrier(s in 0.05..1.5f64, kappa in 0.1..10.0f64) {
        let b = IpcBarrier1D::new(kappa, 0.1, 0.25, Side::Above).unwrap();
        check(&b, &DVector::from_element(1, 0.25 + 0.1 * s))?;
        let b = IpcBarrier1D::new(kappa, 0.1, 0.25, Side::Below).unwrap();
        check(&b, &DVector::from_element(1, 0.25 - 0.1 * s))?;
    }

    #[test]
    fn rayleigh_pseudo_potential(x in chain_point(5), xn in chain_point(5), h in 0.001..0.1f64) {
        let chain = NeoHookeanChain1D::uniform(5, 1.0, 10.0, 1.0).unwrap();
        check(&build_rayleigh(0.05, &chain, &xn, h).unwrap(), &x)?;
        check(&build_mass_damping(0.05, &chain.masses(), &xn, h).unwrap(), &x)?;
    }

    #[test]
    fn friction_pseudo_potential(x in prop::collection::vec(-1.0..1.0f64, 3), w in prop::collection::vec(0.0..5.0f64, 3)) {
        let p = CoulombFrictionPseudoPotential::new(0.3, DVector::from_vec(w), DVector::zeros(3), 0.01).unwrap();
        check(&p, &DVector::from_vec(x))?;
    }

    #[test]
    fn composite(x in chain_point(4)) {
        let chain = NeoHookeanChain1D::uniform(4, 1.0, 5.0, 1.0).unwrap();
        let m = chain.masses();
        let p = CompositePotential::new()
            .with(chain, 1.0)
            .with(Gravity::new(9.81, &m, Axis::SCALAR), 0.5)
            .with(IpcBarrier1D::new(1.0, 0.5, -1.5, Side::Above).unwrap(), 1.0);
        check(&p, &x)?;
    }

    #[test]
    fn rayleigh_clamps_indefinite(a in -5.0..5.0f64, b in -5.0..5.0f64, c in -5.0..5.0f64) {
        let k = DMatrix::from_row_slice(2, 2, &[a, b, b, c]);
        let p = asearch_core::potentials::RayleighDampingPseudoPotential::new(0.1, k, DVector::zeros(2), 0.1).unwrap();
        let eig = p.hessian(&DVector::zeros(2)).symmetric_eigen();
        prop_assert!(eig.eigenvalues.iter().all(|&l| l >= -1e-12));
    }
}
