use nalgebra::DVector;
use proptest::prelude::*;

use asearch_core::analysis::{
    build_update_matrix, collide, decoupled_alpha_closed_form, BarrierKind, CollisionScenario, LinearMethod,
};
use asearch_core::integrators::{solve_alpha, step_decoupled_linear, update_energy_target, Decay};
use asearch_core::potentials::NeoHookeanChain1D;
use asearch_core::{
    total_energy, IntegratorKind, IntegratorSpec, MassMatrix, NewtonSettings, Stepper, SystemState, Tableau,
};

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn decoupled_tableaux_are_area_preserving(exp in -3.0..8.0f64, idx in 0usize..5) {
        let t = &Tableau::catalog()[idx];
        let q = step_decoupled_linear(t, 10f64.powf(exp)).unwrap();
        prop_assert!((q.determinant() - 1.0).abs() < 1e-10, "{} det {}", t.name, q.determinant());
    }

    #[test]
    fn alpha_matrix_matches_closed_form(exp in -2.0..8.0f64, alpha in 0.0..2.0f64) {
        let hbar = 10f64.powf(exp);
        let q = build_update_matrix(&LinearMethod::Kind(IntegratorKind::A1), hbar, Some(alpha)).unwrap();
        let c = decoupled_alpha_closed_form(hbar, alpha);
        for (a, b) in q.q.iter().zip(c.iter()) {
            prop_assert!((a - b).abs() <= 1e-10 * a.abs().max(b.abs()).max(1.0));
        }
        prop_assert!((q.det() - (1.0 + (alpha - 1.0) * hbar / (1.0 + hbar))).abs() < 1e-9);
    }

    #[test]
    fn alpha_root_hits_target(
        w in prop::collection::vec(-3.0..3.0f64, 3),
        dv in prop::collection::vec(-3.0..3.0f64, 3),
        pot in 0.0..2.0f64,
        target_shift in -1.0..1.0f64,
    ) {
        let m = MassMatrix::from_slice(&[1.0, 2.0, 0.5]).unwrap();
        let w = DVector::from_vec(w);
        let dv = DVector::from_vec(dv);
        let h1 = pot + 0.5 * m.norm_squared(&(&w - &dv));
        let target = h1 + target_shift;
        let c = solve_alpha(pot, &w, &dv, &m, target, 0.0, 1.1);
        let v = &w - &dv * c.alpha;
        let h = pot + 0.5 * m.norm_squared(&v);
        prop_assert!((0.0..=1.1).contains(&c.alpha));
        if !c.clipped {
            prop_assert!((h - target).abs() <= 1e-9 * target.abs().max(1.0), "{h} vs {target}");
        }
    }

    #[test]
    fn decay_target_relaxes_toward_ground(e in 0.0..10.0f64, ground in 0.0..1.0f64, tau in 0.1..5.0f64) {
        let spec = IntegratorSpec::new(IntegratorKind::ASearch).with_decay(Decay { tau, ground, start_time: 0.0 });
        let next = update_energy_target(e + ground, 0.0, &spec, 0.01, 0.0);
        prop_assert!((next - ground - (-0.01 / tau).exp() * e).abs() < 1e-12);
    }

    #[test]
    fn a1_quadratic_collision_returns_unit_speed(beta in 0.05..0.95f64) {
        let r = collide(&CollisionScenario::with_hbar(BarrierKind::Quadratic, 1e8, beta), IntegratorKind::A1).unwrap();
        prop_assert_eq!(r.steps, 4);
        prop_assert!((r.exit_speed - 1.0).abs() < 1e-6);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn free_chain_keeps_momentum(
        v in prop::collection::vec(-1.0..1.0f64, 7),
        kind in prop::sample::select(vec![IntegratorKind::ImplicitEuler, IntegratorKind::Bdf2, IntegratorKind::A1, IntegratorKind::ASearch]),
    ) {
        let chain = NeoHookeanChain1D::uniform(6, 1.0, 10.0, 3.0).unwrap();
        let m = chain.masses();
        let mut s = SystemState::new(chain.rest_positions(0.0), DVector::from_vec(v)).unwrap();
        let mut st = Stepper::new(IntegratorSpec::new(kind), NewtonSettings::tight()).unwrap();
        st.init(&mut s, &m, &chain).unwrap();
        let p0: f64 = s.momentum(&m).sum();
        for _ in 0..50 {
            s = st.step(&s, &m, &chain, None, 0.02).unwrap().0;
        }
        let p1: f64 = s.momentum(&m).sum();
        prop_assert!((p1 - p0).abs() <= 1e-8 * p0.abs().max(m.total()));
        prop_assert!(total_energy(&s, &m, &chain).unwrap().is_finite());
    }
}
