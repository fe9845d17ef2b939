//! wasm-bindgen bindings for the browser demo in `www/`. Every export
//! returns a flat `Float64Array` of fixed-width rows.

use lieocp::models::{heavy_top_system, unicycle_shifted_endpoints, unicycle_system, HeavyTopParams, UnicycleParams};
use lieocp::solver::{endpoint_state, order_study_against, shoot_continuation, BvpProblem, Mode};
use lieocp::{simulate, DualVector, GroupElement, ReducedState, Retraction};
use wasm_bindgen::prelude::*;

const GOAL_X: f64 = 2.0;

/// Plans a path from `(−2, start_y, 0)` to `(2, goal_y, 0)` around the unit
/// obstacle, passing below it when `detour < 0` and above otherwise.
/// Rows: `x, y, θ, barrier gap`.
#[wasm_bindgen]
pub fn plan_around_obstacle(kappa: f64, start_y: f64, goal_y: f64, detour: f64) -> Result<Vec<f64>, String> {
    let sys = unicycle_system(&UnicycleParams { kappa }).map_err(|e| e.to_string())?;
    let (start, goal) = ((-GOAL_X, start_y, 0.0), (GOAL_X, goal_y, 0.0));
    let problem = BvpProblem::new(
        sys.clone(),
        GroupElement::se2(start.0, start.1, start.2),
        GroupElement::se2(goal.0, goal.1, goal.2),
        5.0,
        500,
    );
    let ends = unicycle_shifted_endpoints(start, goal, (0.0, 2.0_f64.copysign(detour)));
    let (a, b) = ends(0.0);
    let guess = BvpProblem { g0: a, g_target: b, ..problem.clone() }.default_guess().map_err(|e| e.to_string())?;
    let res = shoot_continuation(&problem, &guess, ends).map_err(|e| e.to_string())?;
    let mut out = Vec::with_capacity(4 * res.trajectory.len());
    for s in &res.trajectory.samples {
        let (x, y, th) = s.g.se2_pose();
        out.extend([x, y, th, x * x + y * y - 1.0]);
    }
    Ok(out)
}

/// Heavy top released with body angular velocity `omega` from a tilt about
/// the body x axis. Rows: `t, α₁, α₂, α₃, energy − energy(0)`.
#[wasm_bindgen]
pub fn spin_heavy_top(mass: f64, omega: Vec<f64>, tilt: f64, horizon: f64, h: f64) -> Result<Vec<f64>, String> {
    if omega.len() != 3 {
        return Err("omega needs three components".into());
    }
    let params = HeavyTopParams { mass, ..Default::default() };
    let sys = heavy_top_system(&params).map_err(|e| e.to_string())?;
    let steps = (horizon / h).round().max(1.0) as usize;
    let mu: Vec<f64> = (0..3).map(|i| params.inertia[(i, i)] * omega[i]).collect();
    let g0 = GroupElement::so3_from_rotation_vector(&[tilt, 0.0, 0.0]);
    let init = ReducedState { t: 0.0, mu: DualVector::from_slice(&mu), alpha: sys.advected_alpha(&g0) };
    let traj = simulate(&sys, &init, &g0, h, steps, Retraction::Cayley).map_err(|e| e.to_string())?;
    let energy = |s: &lieocp::Sample| {
        sys.hamiltonian(&ReducedState { t: s.t, mu: s.mu.clone(), alpha: s.alpha.clone() }).unwrap_or(f64::NAN)
    };
    let e0 = energy(traj.first());
    let mut out = Vec::with_capacity(5 * traj.len());
    for s in &traj.samples {
        out.extend([s.t, s.alpha[0], s.alpha[1], s.alpha[2], energy(s) - e0]);
    }
    Ok(out)
}

/// Endpoint errors of RK4 and the discrete stepper on the heavy top against
/// a fine RK4 reference. Rows: `h, RK4 error, discrete error`.
#[wasm_bindgen]
pub fn convergence(retraction: &str) -> Result<Vec<f64>, String> {
    let kind: Retraction = retraction.parse().map_err(|e: lieocp::Error| e.to_string())?;
    let sys = heavy_top_system(&HeavyTopParams::default()).map_err(|e| e.to_string())?;
    let mu0 = DualVector::from_slice(&[0.5, -0.3, 0.8]);
    let g0 = GroupElement::so3_from_rotation_vector(&[0.3, 0.2, -0.1]);
    let hs = [0.2, 0.1, 0.05, 0.025, 0.0125];
    let run = |mode, h| endpoint_state(&sys, mode, kind, &mu0, &g0, 1.0, h);
    let reference = run(Mode::Continuous, 0.001).map_err(|e| e.to_string())?;
    let rk4 = order_study_against(&hs, &reference, |h| run(Mode::Continuous, h)).map_err(|e| e.to_string())?;
    let dlp = order_study_against(&hs, &reference, |h| run(Mode::Discrete, h)).map_err(|e| e.to_string())?;
    Ok(rk4.iter().zip(&dlp).flat_map(|(a, b)| [a.h, a.error, b.error]).collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn obstacle_plan_clears_the_obstacle_both_ways() {
        for detour in [-1.0, 1.0] {
            let rows = plan_around_obstacle(0.1, -0.2, 0.2, detour).unwrap();
            assert_eq!(rows.len() % 4, 0);
            assert!(rows.chunks(4).all(|r| r[3] > 0.0));
            let last = &rows[rows.len() - 4..];
            assert!((last[0] - 2.0).abs() < 1e-6 && (last[1] - 0.2).abs() < 1e-6);
            let mid_y = rows[4 * 250 + 1];
            assert_eq!(mid_y.signum(), detour.signum());
        }
    }

    #[test]
    fn heavy_top_energy_is_flat() {
        let rows = spin_heavy_top(1.0, vec![0.5, -0.2, 1.5], 0.4, 5.0, 0.005).unwrap();
        let drift = rows.chunks(5).map(|r| r[4].abs()).fold(0.0, f64::max);
        assert!(drift < 1e-6, "{drift}");
        assert!(spin_heavy_top(1.0, vec![0.5], 0.4, 5.0, 0.005).is_err());
    }

    #[test]
    fn convergence_rows_show_both_orders() {
        let rows = convergence("cayley").unwrap();
        let r: Vec<&[f64]> = rows.chunks(3).collect();
        let rk4 = (r[3][1] / r[4][1]).log2();
        let dlp = (r[3][2] / r[4][2]).log2();
        assert!(rk4 > 3.5, "{rk4}");
        assert!(dlp > 0.9, "{dlp}");
        assert!(convergence("quaternion").is_err());
    }
}
