use lieocp::discrete::{discrete_momentum, discrete_trajectory, DiscreteState, StepperConfig};
use lieocp::models::{unicycle_el_oracle, unicycle_shifted_endpoints, unicycle_system, ElInitial, UnicycleParams};
use lieocp::retraction::{dtau_inv_star, tau};
use lieocp::solver::{endpoint_state, order_study, shoot, shoot_continuation, steps_for, BvpProblem, ShootResult};
use lieocp::{pair, simulate, AlgebraVector, DualVector, Error, LieAlgebra, ReducedState, SplitDynamics, Trajectory};
use nalgebra::{DVector, Vector3};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::{json, Map, Value};

use crate::config::{ModelKind, RunConfig};
use crate::output::{drift, plot_script, trajectory_csv};

#[derive(Debug)]
pub enum Failure {
    /// Bad configuration or arguments; nothing was written.
    Validation(String),
    /// A numerical routine failed.
    Solver(String),
}

impl Failure {
    pub fn exit_code(&self) -> i32 {
        match self {
            Failure::Validation(_) => 2,
            Failure::Solver(_) => 3,
        }
    }
}

impl std::fmt::Display for Failure {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Failure::Validation(m) => write!(f, "invalid input: {m}"),
            Failure::Solver(m) => write!(f, "solver failed: {m}"),
        }
    }
}

fn solver(e: Error) -> Failure {
    Failure::Solver(e.to_string())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Command {
    Simulate,
    Step,
    Shoot,
    OrderStudy,
    Oracle,
    Validate,
}

impl Command {
    pub fn name(self) -> &'static str {
        match self {
            Command::Simulate => "simulate",
            Command::Step => "step",
            Command::Shoot => "shoot",
            Command::OrderStudy => "order-study",
            Command::Oracle => "oracle",
            Command::Validate => "validate",
        }
    }
}

/// Files produced by a command, not yet written.
#[derive(Debug)]
pub struct Outcome {
    pub files: Vec<(String, String)>,
    pub manifest: Value,
    /// One-line human summary.
    pub summary: String,
}

pub fn execute(cmd: Command, cfg: &RunConfig, seed: u64) -> Result<Outcome, Failure> {
    let mut results = Map::new();
    let mut files = Vec::new();
    let summary = match cmd {
        Command::Simulate => {
            let traj = simulate_forward(cfg).map_err(solver)?;
            record_trajectory(cfg, &traj, &mut results, &mut files);
            format!("simulated {} steps", cfg.steps)
        }
        Command::Step => {
            let (traj, newton, momentum_drift) = step_forward(cfg).map_err(solver)?;
            record_trajectory(cfg, &traj, &mut results, &mut files);
            results.insert("newton".into(), newton);
            if let Some(d) = momentum_drift {
                results.insert("discrete_momentum_drift".into(), json!(d));
            }
            format!("stepped {} times", cfg.steps)
        }
        Command::Shoot => {
            let res = solve_bvp(cfg)?;
            record_trajectory(cfg, &res.trajectory, &mut results, &mut files);
            results.insert(
                "solver".into(),
                json!({
                    "initial_mu": res.initial_mu.to_vec(),
                    "residual_norm": res.residual_norm,
                    "iterations": res.iterations,
                    "segments": res.segments,
                    "history": res.history,
                    "final_distance": res.trajectory.final_group().distance(&cfg.target),
                }),
            );
            format!("shooting converged, residual {:.3e}", res.residual_norm)
        }
        Command::OrderStudy => {
            let rows = order_rows(cfg)?;
            let mut csv = String::from("h,error,order\n");
            for r in &rows {
                let order = r.order.map(|o| format!("{o:.16e}")).unwrap_or_default();
                csv.push_str(&format!("{:.16e},{:.16e},{order}\n", r.h, r.error));
            }
            files.push(("orders.csv".into(), csv));
            let orders: Vec<Value> =
                rows.iter().map(|r| json!({ "h": r.h, "error": r.error, "order": r.order })).collect();
            results.insert("orders".into(), Value::Array(orders));
            let last = rows.last().and_then(|r| r.order).unwrap_or(f64::NAN);
            format!("observed order {last:.3}")
        }
        Command::Oracle => {
            let report = oracle(cfg, seed).map_err(solver)?;
            let worst = report.values().filter_map(Value::as_f64).fold(0.0, f64::max);
            results.extend(report);
            format!("largest oracle discrepancy {worst:.3e}")
        }
        Command::Validate => {
            let report = validate(cfg, seed).map_err(solver)?;
            let failed: Vec<String> =
                report.iter().filter(|(_, v)| !v["pass"].as_bool().unwrap_or(false)).map(|(k, _)| k.clone()).collect();
            results.insert("checks".into(), Value::Object(report));
            if !failed.is_empty() {
                return Err(Failure::Solver(format!("checks failed: {}", failed.join(", "))));
            }
            "all checks passed".into()
        }
    };
    let manifest = json!({
        "command": cmd.name(),
        "seed": seed,
        "config": cfg.file,
        "steps": cfg.steps,
        "results": results,
    });
    let mut pretty = serde_json::to_string_pretty(&manifest).expect("manifest serializes");
    pretty.push('\n');
    files.push(("manifest.json".into(), pretty));
    Ok(Outcome { files, manifest, summary })
}

fn record_trajectory(
    cfg: &RunConfig,
    traj: &Trajectory,
    results: &mut Map<String, Value>,
    files: &mut Vec<(String, String)>,
) {
    let model = cfg.file.model;
    let drifts: Map<String, Value> =
        drift(model, &cfg.sys, traj).into_iter().map(|(k, v)| (k.into(), json!(v))).collect();
    results.insert("drift".into(), Value::Object(drifts));
    results.insert("advection_defect".into(), json!(traj.advection_defect(&cfg.sys)));
    results.insert("projections".into(), json!(traj.projections));
    if let Some(m) = traj.min_margin(&cfg.sys) {
        results.insert("min_margin".into(), json!(m));
    }
    files.push(("trajectory.csv".into(), trajectory_csv(model, traj)));
    files.push(("plot.py".into(), plot_script(model)));
}

fn initial_state(cfg: &RunConfig) -> ReducedState {
    ReducedState { t: 0.0, mu: DualVector::from_slice(&cfg.mu0), alpha: cfg.sys.advected_alpha(&cfg.g0) }
}

fn stepper(cfg: &RunConfig) -> Result<StepperConfig, Error> {
    let n = &cfg.file.numerics;
    let c = StepperConfig {
        newton_tol: n.newton_tol,
        newton_max_iters: n.newton_max_iters,
        ..StepperConfig::new(n.h, cfg.retraction)?
    };
    c.validate()?;
    Ok(c)
}

pub fn simulate_forward(cfg: &RunConfig) -> Result<Trajectory, Error> {
    simulate(&cfg.sys, &initial_state(cfg), &cfg.g0, cfg.file.numerics.h, cfg.steps, cfg.retraction)
}

/// Discrete run, its Newton statistics and, without a potential, the drift of
/// the discrete spatial momentum.
fn step_forward(cfg: &RunConfig) -> Result<(Trajectory, Value, Option<f64>), Error> {
    let sc = stepper(cfg)?;
    let init = DiscreteState::initial(&cfg.sys, DualVector::from_slice(&cfg.mu0), cfg.g0.clone());
    let run = discrete_trajectory(&cfg.sys, &sc, init, cfg.steps)?;
    let iterations: usize = run.newton.iter().map(|s| s.iterations).sum();
    let newton = json!({
        "max_residual": run.max_residual(),
        "total_iterations": iterations,
        "max_iterations": run.newton.iter().map(|s| s.iterations).max().unwrap_or(0),
    });
    let potential_free = match cfg.file.model {
        ModelKind::HeavyTop => cfg.file.heavytop.mass * cfg.file.heavytop.gravity * cfg.file.heavytop.length == 0.0,
        ModelKind::Unicycle => cfg.file.unicycle.kappa == 0.0,
    };
    let momentum = if potential_free {
        let m0 = discrete_momentum(&cfg.sys, &sc, &run.states[0])?;
        let mut worst: f64 = 0.0;
        for s in &run.states {
            worst = worst.max((discrete_momentum(&cfg.sys, &sc, s)? - &m0).amax());
        }
        Some(worst)
    } else {
        None
    };
    Ok((run.to_trajectory(&sc, 0.0), newton, momentum))
}

fn problem(cfg: &RunConfig) -> BvpProblem {
    let n = &cfg.file.numerics;
    let mut p = BvpProblem::new(cfg.sys.clone(), cfg.g0.clone(), cfg.target.clone(), n.horizon, cfg.steps);
    p.mode = cfg.mode;
    p.retraction = cfg.retraction;
    p.tol = n.shoot_tol;
    p.max_iters = n.max_iters;
    p.breakpoints = (1..n.segments).map(|i| i * cfg.steps / n.segments).collect();
    p
}

/// Shooting from the configured start to the target. For the unicycle a
/// nonzero continuation offset shoots a translated problem first and slides
/// it back to the requested endpoints.
pub fn solve_bvp(cfg: &RunConfig) -> Result<ShootResult, Failure> {
    let p = problem(cfg);
    p.validate().map_err(|e| Failure::Validation(e.to_string()))?;
    let offset = cfg.file.unicycle.continuation_offset;
    if cfg.file.model == ModelKind::Unicycle && offset != [0.0, 0.0] {
        let u = &cfg.file.unicycle;
        let ends = unicycle_shifted_endpoints(
            (u.start[0], u.start[1], u.start[2]),
            (u.goal[0], u.goal[1], u.goal[2]),
            (offset[0], offset[1]),
        );
        let (a, b) = ends(0.0);
        let guess = BvpProblem { g0: a, g_target: b, ..p.clone() }.default_guess().map_err(solver)?;
        shoot_continuation(&p, &guess, ends).map_err(solver)
    } else {
        let guess = p.default_guess().map_err(solver)?;
        shoot(&p, &guess).map_err(solver)
    }
}

fn order_rows(cfg: &RunConfig) -> Result<Vec<lieocp::solver::OrderRow>, Failure> {
    let n = &cfg.file.numerics;
    for &h in &n.order_steps {
        steps_for(n.horizon, h).map_err(|e| Failure::Validation(format!("numerics.order_steps: {e}")))?;
    }
    let mu0 = DualVector::from_slice(&cfg.mu0);
    order_study(&n.order_steps, |h| endpoint_state(&cfg.sys, cfg.mode, cfg.retraction, &mu0, &cfg.g0, n.horizon, h))
        .map_err(solver)
}

fn random3(rng: &mut ChaCha8Rng, scale: f64) -> DVector<f64> {
    DVector::from_fn(3, |_, _| rng.gen_range(-scale..scale))
}

/// Model equations against closed forms. Heavy top: the cross-product form
/// on random states. Unicycle: the reduced flow against the Cartesian
/// Euler–Lagrange system, without the barrier.
fn oracle(cfg: &RunConfig, seed: u64) -> Result<Map<String, Value>, Error> {
    let mut out = Map::new();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    match cfg.file.model {
        ModelKind::HeavyTop => {
            let s = &cfg.file.heavytop;
            let inertia = cfg.sys.cost_weight();
            let inv = inertia.clone().try_inverse().expect("inertia validated");
            let chi = Vector3::from_column_slice(&s.chi).normalize();
            let mgl = s.mass * s.gravity * s.length;
            let (mut e_mu, mut e_alpha) = (0.0_f64, 0.0_f64);
            for _ in 0..cfg.file.numerics.samples {
                let mu = random3(&mut rng, 2.0);
                let alpha = random3(&mut rng, 1.0);
                let rate =
                    cfg.sys.ep_rhs(&ReducedState { t: 0.0, mu: DualVector(mu.clone()), alpha: alpha.clone() })?;
                let omega = Vector3::from_column_slice((&inv * &mu).as_slice());
                let (m, a) = (Vector3::from_column_slice(mu.as_slice()), Vector3::from_column_slice(alpha.as_slice()));
                let mu_dot = m.cross(&omega) + a.cross(&chi) * mgl;
                let alpha_dot = a.cross(&omega);
                e_mu = e_mu.max((rate.mu_dot.0 - DVector::from_column_slice(mu_dot.as_slice())).amax());
                e_alpha = e_alpha.max((rate.alpha_dot - DVector::from_column_slice(alpha_dot.as_slice())).amax());
            }
            out.insert("mu_rate_error".into(), json!(e_mu));
            out.insert("alpha_rate_error".into(), json!(e_alpha));
        }
        ModelKind::Unicycle => {
            let sys = unicycle_system(&UnicycleParams { kappa: 0.0 })?;
            let u = &cfg.file.unicycle;
            let (x, y, th) = (u.start[0], u.start[1], u.start[2]);
            let [m1, m2, l] = cfg.mu0;
            let (u1, u2) = (m1 / 2.0, m2);
            let h = cfg.file.numerics.h;
            let el =
                ElInitial { x, y, theta: th, x_dot: u2 * th.cos(), y_dot: u2 * th.sin(), theta_dot: u1, lambda: l };
            let reference = unicycle_el_oracle(&el, h, cfg.steps)?;
            let init =
                ReducedState { t: 0.0, mu: DualVector::from_slice(&cfg.mu0), alpha: sys.advected_alpha(&cfg.g0) };
            let traj = simulate(&sys, &init, &cfg.g0, h, cfg.steps, cfg.retraction)?;
            let mut e_vel: f64 = 0.0;
            let mut e_pose: f64 = 0.0;
            for (s, o) in traj.samples.iter().zip(&reference) {
                e_vel = e_vel.max((s.u[0] - o.u1).abs()).max((s.u[1] - o.u2).abs()).max((s.mu[2] - o.lambda).abs());
                let (px, py, pt) = s.g.se2_pose();
                e_pose = e_pose.max((px - o.x).abs()).max((py - o.y).abs()).max((pt - o.theta).abs());
            }
            out.insert("velocity_error".into(), json!(e_vel));
            out.insert("pose_error".into(), json!(e_pose));
        }
    }
    Ok(out)
}

fn check(value: f64, tol: f64) -> Value {
    json!({ "value": value, "tolerance": tol, "pass": value <= tol })
}

/// Structural checks on random samples.
fn validate(cfg: &RunConfig, seed: u64) -> Result<Map<String, Value>, Error> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let sys = &cfg.sys;
    let alg: &LieAlgebra = sys.algebra();
    let n = cfg.file.numerics.samples;
    let mut out = Map::new();
    out.insert("antisymmetry".into(), check(alg.antisymmetry_residual(), 1e-12));
    out.insert("jacobi".into(), check(alg.jacobi_residual(), 1e-12));
    out.insert("commutator".into(), check(alg.commutator_residual(), 1e-12));

    let (mut adj, mut mom, mut lemma, mut split) = (0.0_f64, 0.0_f64, 0.0_f64, 0.0_f64);
    let splitter = SplitDynamics::new(sys).ok();
    for _ in 0..n {
        let u = AlgebraVector(random3(&mut rng, 1.0));
        let v = AlgebraVector(random3(&mut rng, 1.0));
        let m = DualVector(random3(&mut rng, 1.0));
        // ⟨ad*_u m, v⟩ = ⟨m, [u, v]⟩
        adj = adj.max((pair(&alg.ad_star(&u, &m), &v) - pair(&m, &alg.bracket(&u, &v))).abs());
        // ⟨J(x, α), ξ⟩ = ⟨α, [ξ, x]⟩ or −⟨x, [ξ, α]⟩
        let (x, a) = (random3(&mut rng, 1.0), random3(&mut rng, 1.0));
        let lhs = pair(&sys.momentum_map(&x, &a), &u);
        let rhs = match sys.advection() {
            lieocp::AdvectionCase::Adjoint => a.dot(&sys.generator(&u, &x)),
            lieocp::AdvectionCase::Coadjoint => -x.dot(&alg.bracket(&u, &AlgebraVector(a.clone())).0),
        };
        mom = mom.max((lhs - rhs).abs());
        // (dτ⁻¹_{−x})* m = Ad*_{τ(x)} (dτ⁻¹_x)* m
        let l = dtau_inv_star(cfg.retraction, alg, &-&u, &m)?;
        let r = alg.coadjoint(&tau(cfg.retraction, alg, &u)?, &dtau_inv_star(cfg.retraction, alg, &u, &m)?);
        lemma = lemma.max((l - r).amax());
        if let Some(sp) = &splitter {
            let mu = DualVector(random3(&mut rng, 1.0));
            let alpha = match cfg.file.model {
                ModelKind::HeavyTop => random3(&mut rng, 1.0),
                ModelKind::Unicycle => cfg.sys.advected_alpha(&cfg.g0),
            };
            let state = sp.state_from_mu(&mu, alpha.clone());
            let rate = sp.rhs(&state)?;
            let full = sys.ep_rhs(&ReducedState { t: 0.0, mu, alpha })?;
            split = split.max((rate.cost_grad_dot + rate.lambda_dot - full.mu_dot).amax());
        }
    }
    out.insert("coadjoint_duality".into(), check(adj, 1e-12));
    out.insert("momentum_map_identity".into(), check(mom, 1e-12));
    out.insert("retraction_lemma".into(), check(lemma, 1e-10));
    if splitter.is_some() {
        out.insert("split_recombination".into(), check(split, 1e-12));
    }
    Ok(out)
}
