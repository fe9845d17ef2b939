use lieocp::models::{heavy_top_system, unicycle_shifted_endpoints, unicycle_system, HeavyTopParams, UnicycleParams};
use lieocp::solver::{
    endpoint_state, order_study, reconstruct, shoot, shoot_continuation, BvpProblem, Mode, ReconstructionMethod,
};
use lieocp::{AlgebraVector, DualVector, GroupElement, LieAlgebra, Retraction};

fn forward_target(problem: &BvpProblem, mu: &DualVector) -> GroupElement {
    problem.propagate(mu, &problem.g0, 0.0, problem.steps).unwrap().final_group().clone()
}

#[test]
fn recovers_generating_momentum_from_forward_target() {
    let cases = [
        (
            heavy_top_system(&HeavyTopParams { mass: 0.0, ..Default::default() }).unwrap(),
            GroupElement::so3_from_rotation_vector(&[0.2, 0.1, -0.3]),
            [0.4, -0.5, 0.9],
        ),
        (unicycle_system(&UnicycleParams { kappa: 0.0 }).unwrap(), GroupElement::se2(-1.0, 0.5, 0.2), [0.3, 0.8, 0.25]),
    ];
    for (sys, g0, mu) in cases {
        for mode in [Mode::Continuous, Mode::Discrete] {
            let mu_star = DualVector::from_slice(&mu);
            let mut problem = BvpProblem::new(sys.clone(), g0.clone(), g0.clone(), 1.0, 50);
            problem.mode = mode;
            problem.g_target = forward_target(&problem, &mu_star);
            let res = shoot(&problem, &problem.default_guess().unwrap()).unwrap();
            assert!(res.converged && res.residual_norm <= 1e-8);
            assert!((&res.initial_mu - &mu_star).amax() <= 1e-6, "{:?} vs {:?}", res.initial_mu, mu_star);
            // residual history decreases and a re-run reproduces it exactly
            assert!(res.history.windows(2).all(|w| w[1] < w[0]));
            let again = problem.endpoint_residual(&res.initial_mu).unwrap().norm();
            assert!((again - res.residual_norm).abs() <= 1e-12);
        }
    }
}

#[test]
fn multiple_shooting_agrees_with_single_shooting() {
    let sys = unicycle_system(&UnicycleParams { kappa: 0.0 }).unwrap();
    let g0 = GroupElement::se2(0.0, 0.0, 0.0);
    let mu_star = DualVector::from_slice(&[0.6, 1.0, -0.2]);
    let mut problem = BvpProblem::new(sys, g0.clone(), g0, 2.0, 100);
    problem.g_target = forward_target(&problem, &mu_star);
    let single = shoot(&problem, &problem.default_guess().unwrap()).unwrap();
    for breakpoints in [vec![50], vec![80], vec![30, 60, 90]] {
        let p = BvpProblem { breakpoints: breakpoints.clone(), ..problem.clone() };
        let multi = shoot(&p, &p.default_guess().unwrap()).unwrap();
        assert_eq!(multi.segments, breakpoints.len() + 1);
        assert_eq!(multi.trajectory.len(), 101);
        assert!((&multi.initial_mu - &single.initial_mu).amax() <= 1e-6);
    }
}

#[test]
fn constant_rotation_reconstruction_matches_rodrigues() {
    let so3 = LieAlgebra::so3();
    let w = [0.3, -0.8, 0.5];
    let h = 1e-3;
    let u = vec![AlgebraVector::from_slice(&w); 1001];
    for method in [ReconstructionMethod::LeftPoint, ReconstructionMethod::Midpoint] {
        for kind in [Retraction::Cayley, Retraction::Exponential] {
            let path = reconstruct(&so3, kind, &GroupElement::identity(3), &u, h, method).unwrap();
            for (k, g) in path.iter().enumerate().step_by(100) {
                let t = k as f64 * h;
                let exact = GroupElement::so3_from_rotation_vector(&[w[0] * t, w[1] * t, w[2] * t]);
                assert!(g.distance(&exact) < 1e-6);
            }
        }
    }
}

#[test]
fn rk4_order_study_on_heavy_top() {
    let sys = heavy_top_system(&HeavyTopParams::default()).unwrap();
    let mu0 = DualVector::from_slice(&[0.5, -0.3, 0.8]);
    let g0 = GroupElement::so3_from_rotation_vector(&[0.3, 0.2, -0.1]);
    let f = |h| endpoint_state(&sys, Mode::Continuous, Retraction::Cayley, &mu0, &g0, 2.0, h);
    let rows = order_study(&[0.2, 0.1, 0.05], f).unwrap();
    for r in &rows[1..] {
        let p = r.order.unwrap();
        assert!((3.8..=4.2).contains(&p), "{rows:?}");
    }
    let again = order_study(&[0.2, 0.1, 0.05], f).unwrap();
    assert_eq!(rows, again);
}

#[test]
fn discrete_self_convergence_is_at_least_first_order() {
    let sys = heavy_top_system(&HeavyTopParams::default()).unwrap();
    let mu0 = DualVector::from_slice(&[0.5, -0.3, 0.8]);
    let g0 = GroupElement::so3_from_rotation_vector(&[0.3, 0.2, -0.1]);
    let f = |h| endpoint_state(&sys, Mode::Discrete, Retraction::Cayley, &mu0, &g0, 1.0, h);
    let rows = order_study(&[0.1, 0.05, 0.025], f).unwrap();
    for r in &rows[1..] {
        assert!(r.order.unwrap() >= 0.9, "{rows:?}");
    }
}

#[test]
fn obstacle_plan_keeps_clear_of_the_obstacle() {
    let sys = unicycle_system(&UnicycleParams { kappa: 0.1 }).unwrap();
    let (start, goal) = ((-2.0, -0.2, 0.0), (2.0, 0.2, 0.0));
    let problem = BvpProblem::new(
        sys.clone(),
        GroupElement::se2(start.0, start.1, start.2),
        GroupElement::se2(goal.0, goal.1, goal.2),
        5.0,
        500,
    );
    let ends = unicycle_shifted_endpoints(start, goal, (0.0, -2.0));
    let (a, b) = ends(0.0);
    let guess = BvpProblem { g0: a, g_target: b, ..problem.clone() }.default_guess().unwrap();
    let res = shoot_continuation(&problem, &guess, ends).unwrap();
    assert!(res.residual_norm <= 1e-8);
    assert!(res.trajectory.min_margin(&sys).unwrap() > 0.0);
    assert!(res.trajectory.final_group().distance(&problem.g_target) < 1e-7);
}
