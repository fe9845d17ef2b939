//! Boundary-value solvers: shooting on the initial momentum so that the
//! reconstructed group path hits a target, with optional multiple shooting
//! and endpoint continuation, plus step-size convergence studies.

use nalgebra::{DMatrix, DVector};

use crate::discrete::{discrete_trajectory, DiscreteState, StepperConfig};
use crate::dynamics::{ReducedState, ReducedSystem};
use crate::error::{Error, Result};
use crate::integrate::{simulate, Trajectory};
use crate::lie::{AlgebraVector, DualVector, GroupElement};
use crate::retraction::{tau, tau_inv, Retraction};

pub use crate::integrate::{reconstruct, ReconstructionMethod};

pub const MAX_SEGMENTS: usize = 4;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Mode {
    /// RK4 on the reduced flow.
    #[default]
    Continuous,
    /// The discrete Lie–Poisson stepper.
    Discrete,
}

impl std::str::FromStr for Mode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "continuous" => Ok(Mode::Continuous),
            "discrete" => Ok(Mode::Discrete),
            other => Err(Error::InvalidInput(format!("unknown mode `{other}`"))),
        }
    }
}

#[derive(Debug, Clone)]
pub struct BvpProblem {
    pub sys: ReducedSystem,
    pub g0: GroupElement,
    pub g_target: GroupElement,
    pub horizon: f64,
    pub steps: usize,
    pub mode: Mode,
    pub retraction: Retraction,
    pub tol: f64,
    pub max_iters: usize,
    /// Step indices where shooting segments begin, excluding 0. Empty means single shooting.
    pub breakpoints: Vec<usize>,
}

impl BvpProblem {
    pub fn new(sys: ReducedSystem, g0: GroupElement, g_target: GroupElement, horizon: f64, steps: usize) -> Self {
        Self {
            sys,
            g0,
            g_target,
            horizon,
            steps,
            mode: Mode::Continuous,
            retraction: Retraction::Cayley,
            tol: 1e-8,
            max_iters: 100,
            breakpoints: Vec::new(),
        }
    }

    pub fn h(&self) -> f64 {
        self.horizon / self.steps as f64
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.horizon > 0.0) || !self.horizon.is_finite() {
            return Err(Error::InvalidInput(format!("horizon must be positive, got {}", self.horizon)));
        }
        if self.steps == 0 {
            return Err(Error::InvalidInput("number of steps must be positive".into()));
        }
        let alg = self.sys.algebra();
        for (name, g) in [("g0", &self.g0), ("target", &self.g_target)] {
            let r = alg.group_residual(g);
            if !(r <= crate::lie::GROUP_TOL) {
                return Err(Error::InvalidInput(format!("{name} is not a group element (residual {r:.3e})")));
            }
        }
        let mut prev = 0;
        for &b in &self.breakpoints {
            if b <= prev || b >= self.steps {
                return Err(Error::InvalidInput(format!(
                    "breakpoints must increase strictly inside (0, {})",
                    self.steps
                )));
            }
            prev = b;
        }
        if self.breakpoints.len() + 1 > MAX_SEGMENTS {
            return Err(Error::InvalidInput(format!("at most {MAX_SEGMENTS} shooting segments")));
        }
        Ok(())
    }

    /// Forward simulation of `steps` steps from `(mu, g)`, with `α` read off `g`.
    pub fn propagate(&self, mu: &DualVector, g: &GroupElement, t0: f64, steps: usize) -> Result<Trajectory> {
        let h = self.h();
        match self.mode {
            Mode::Continuous => {
                let init = ReducedState { t: t0, mu: mu.clone(), alpha: self.sys.advected_alpha(g) };
                simulate(&self.sys, &init, g, h, steps, self.retraction)
            }
            Mode::Discrete => {
                let cfg = StepperConfig::new(h, self.retraction)?;
                let init = DiscreteState::initial(&self.sys, mu.clone(), g.clone());
                Ok(discrete_trajectory(&self.sys, &cfg, init, steps)?.to_trajectory(&cfg, t0))
            }
        }
    }

    /// `τ⁻¹(g(T)⁻¹ g_T)` for the trajectory started at `mu`.
    pub fn endpoint_residual(&self, mu: &DualVector) -> Result<AlgebraVector> {
        let traj = self.propagate(mu, &self.g0, 0.0, self.steps)?;
        chart_error(self, traj.final_group(), &self.g_target)
    }

    /// `μ₀` of the constant velocity `τ⁻¹(g₀⁻¹ g_T)/T` projected onto `e₀ + 𝔨`.
    pub fn default_guess(&self) -> Result<DualVector> {
        let alg = self.sys.algebra();
        let rel = self.g0.inverse().compose(&self.g_target);
        let mut u = tau_inv(self.retraction, alg, &rel)? * (1.0 / self.horizon);
        for &i in alg.subspace_p() {
            u[i] = self.sys.e0()[i];
        }
        self.sys.legendre(&u, &DualVector::zeros(alg.dim()))
    }
}

fn chart_error(problem: &BvpProblem, reached: &GroupElement, wanted: &GroupElement) -> Result<AlgebraVector> {
    tau_inv(problem.retraction, problem.sys.algebra(), &reached.inverse().compose(wanted))
}

#[derive(Debug, Clone)]
pub struct ShootResult {
    pub initial_mu: DualVector,
    pub trajectory: Trajectory,
    pub residual_norm: f64,
    pub iterations: usize,
    pub converged: bool,
    /// Residual norm after each accepted step, starting from the guess.
    pub history: Vec<f64>,
    pub segments: usize,
}

/// Unknowns: `μ` at each segment start, then a chart correction of each interior node.
struct Layout {
    starts: Vec<usize>,
    node_guess: Vec<GroupElement>,
    dim: usize,
}

impl Layout {
    fn segments(&self) -> usize {
        self.starts.len()
    }

    fn unknowns(&self) -> usize {
        (2 * self.segments() - 1) * self.dim
    }

    fn mu(&self, x: &DVector<f64>, i: usize) -> DualVector {
        DualVector(x.rows(i * self.dim, self.dim).into_owned())
    }

    fn node(&self, problem: &BvpProblem, x: &DVector<f64>, i: usize) -> Result<GroupElement> {
        if i == 0 {
            return Ok(problem.g0.clone());
        }
        let off = (self.segments() + i - 1) * self.dim;
        let xi = AlgebraVector(x.rows(off, self.dim).into_owned());
        Ok(self.node_guess[i].compose(&tau(problem.retraction, problem.sys.algebra(), &xi)?))
    }

    fn simulate(&self, problem: &BvpProblem, x: &DVector<f64>) -> Result<Vec<Trajectory>> {
        let mut out = Vec::with_capacity(self.segments());
        for i in 0..self.segments() {
            let start = self.starts[i];
            let end = self.starts.get(i + 1).copied().unwrap_or(problem.steps);
            let g = self.node(problem, x, i)?;
            out.push(problem.propagate(&self.mu(x, i), &g, start as f64 * problem.h(), end - start)?);
        }
        Ok(out)
    }

    fn residual(&self, problem: &BvpProblem, x: &DVector<f64>) -> Result<DVector<f64>> {
        let segs = self.simulate(problem, x)?;
        let d = self.dim;
        let mut r = DVector::zeros(self.unknowns());
        for (i, seg) in segs.iter().enumerate() {
            let end = seg.last();
            if i + 1 < self.segments() {
                let next_g = self.node(problem, x, i + 1)?;
                let gap = chart_error(problem, &end.g, &next_g)?;
                r.rows_mut(2 * i * d, d).copy_from(&gap.0);
                let dmu = &self.mu(x, i + 1).0 - &end.mu.0;
                r.rows_mut((2 * i + 1) * d, d).copy_from(&dmu);
            } else {
                let gap = chart_error(problem, &end.g, &problem.g_target)?;
                r.rows_mut(2 * i * d, d).copy_from(&gap.0);
            }
        }
        Ok(r)
    }

    fn stitch(&self, segs: Vec<Trajectory>) -> Trajectory {
        let mut it = segs.into_iter();
        let mut traj = it.next().expect("at least one segment");
        for seg in it {
            traj.projections += seg.projections;
            traj.samples.extend(seg.samples.into_iter().skip(1));
        }
        traj
    }
}

fn layout_for(problem: &BvpProblem, mu_guess: &DualVector, breakpoints: &[usize]) -> Result<(Layout, DVector<f64>)> {
    let d = problem.sys.dim();
    let mut starts = vec![0];
    starts.extend_from_slice(breakpoints);
    let mut node_guess = vec![problem.g0.clone()];
    let mut x = DVector::zeros((2 * starts.len() - 1) * d);
    x.rows_mut(0, d).copy_from(&mu_guess.0);
    if starts.len() > 1 {
        // seed nodes and momenta from a single guess trajectory, interpolated geodesically
        // where the guess trajectory fails
        let guess = problem.propagate(mu_guess, &problem.g0, 0.0, problem.steps).ok();
        let alg = problem.sys.algebra();
        for (i, &s) in starts.iter().enumerate().skip(1) {
            let (g, mu) = match &guess {
                Some(tr) => (tr.samples[s].g.clone(), tr.samples[s].mu.clone()),
                None => {
                    let frac = s as f64 / problem.steps as f64;
                    let rel = tau_inv(problem.retraction, alg, &problem.g0.inverse().compose(&problem.g_target))?;
                    (problem.g0.compose(&tau(problem.retraction, alg, &(rel * frac))?), mu_guess.clone())
                }
            };
            node_guess.push(g);
            x.rows_mut(i * d, d).copy_from(&mu.0);
        }
    }
    Ok((Layout { starts, node_guess, dim: d }, x))
}

fn even_breakpoints(steps: usize, segments: usize) -> Vec<usize> {
    (1..segments).map(|i| i * steps / segments).collect()
}

/// Levenberg–Marquardt on the boundary residual. Falls back to multiple
/// shooting with more segments when the residual chart is unavailable.
pub fn shoot(problem: &BvpProblem, mu_guess: &DualVector) -> Result<ShootResult> {
    problem.validate()?;
    crate::error::check_dim(problem.sys.dim(), mu_guess.dim())?;
    let mut breakpoints = problem.breakpoints.clone();
    loop {
        match shoot_with(problem, mu_guess, &breakpoints) {
            Err(Error::OutsideInjectivityDomain) if breakpoints.len() + 1 < MAX_SEGMENTS => {
                let segments = breakpoints.len() + 2;
                log::info!("endpoint chart unavailable; retrying with {segments} shooting segments");
                breakpoints = even_breakpoints(problem.steps, segments);
            }
            other => return other,
        }
    }
}

fn shoot_with(problem: &BvpProblem, mu_guess: &DualVector, breakpoints: &[usize]) -> Result<ShootResult> {
    let (layout, mut x) = layout_for(problem, mu_guess, breakpoints)?;
    let n = layout.unknowns();
    let mut r = layout.residual(problem, &x)?;
    let mut norm = r.norm();
    let mut history = vec![norm];
    let mut damping = 1e-3;
    let mut iterations = 0;
    while norm > problem.tol && iterations < problem.max_iters {
        iterations += 1;
        let mut jac = DMatrix::zeros(n, n);
        for j in 0..n {
            let eps = 1e-6 * x[j].abs().max(1.0);
            let mut xs = x.clone();
            xs[j] += eps;
            let col = match layout.residual(problem, &xs) {
                Ok(rs) => (rs - &r) / eps,
                Err(_) => {
                    xs[j] = x[j] - eps;
                    (&r - layout.residual(problem, &xs)?) / eps
                }
            };
            jac.set_column(j, &col);
        }
        let jtj = jac.tr_mul(&jac);
        let jtr = jac.tr_mul(&r);
        let scale = jtj.diagonal().max().max(f64::MIN_POSITIVE);
        let mut accepted = false;
        while damping < 1e12 {
            let mut lhs = jtj.clone();
            for i in 0..n {
                lhs[(i, i)] += damping * jtj[(i, i)].max(1e-8 * scale);
            }
            let Some(delta) = lhs.lu().solve(&(-&jtr)) else {
                damping *= 10.0;
                continue;
            };
            let trial = &x + delta;
            match layout.residual(problem, &trial) {
                Ok(rt) if rt.norm() < norm => {
                    x = trial;
                    r = rt;
                    norm = r.norm();
                    history.push(norm);
                    damping = (damping / 10.0).max(1e-12);
                    accepted = true;
                    break;
                }
                _ => damping *= 10.0,
            }
        }
        if !accepted {
            break;
        }
    }
    let converged = norm <= problem.tol;
    if !converged {
        return Err(Error::MaxItersExceeded { residual: norm, iterations });
    }
    let segments = layout.segments();
    let trajectory = layout.stitch(layout.simulate(problem, &x)?);
    Ok(ShootResult {
        initial_mu: layout.mu(&x, 0),
        trajectory,
        residual_norm: norm,
        iterations,
        converged,
        history,
        segments,
    })
}

/// Endpoint continuation: solves the problems with endpoints `endpoints(s)`
/// for `s` running from 0 to 1, warm-starting each from a secant prediction.
/// The parameter step halves after a failure and grows after a success.
pub fn shoot_continuation<F>(problem: &BvpProblem, mu_guess: &DualVector, endpoints: F) -> Result<ShootResult>
where
    F: Fn(f64) -> (GroupElement, GroupElement),
{
    let at = |s: f64| {
        let (g0, g_target) = endpoints(s);
        BvpProblem { g0, g_target, ..problem.clone() }
    };
    let mut current = shoot(&at(0.0), mu_guess)?;
    let mut total = current.iterations;
    let (mut s, mut ds) = (0.0_f64, 0.125_f64);
    let mut previous: Option<(f64, DualVector)> = None;
    while s < 1.0 {
        let next = (s + ds).min(1.0);
        let predicted = match &previous {
            Some((sp, mp)) => {
                let slope = (&current.initial_mu - mp) * (1.0 / (s - sp));
                &current.initial_mu + &(slope * (next - s))
            }
            None => current.initial_mu.clone(),
        };
        let stage = at(next);
        let attempt = shoot(&stage, &predicted).or_else(|_| shoot(&stage, &current.initial_mu));
        match attempt {
            Ok(res) => {
                log::debug!("continuation reached s = {next:.4} in {} iterations", res.iterations);
                total += res.iterations;
                previous = Some((s, current.initial_mu.clone()));
                current = res;
                s = next;
                ds = (ds * 1.5).min(0.25);
            }
            Err(e) => {
                ds *= 0.5;
                if ds < 1.0 / 4096.0 {
                    return Err(e);
                }
            }
        }
    }
    current.iterations = total;
    Ok(current)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OrderRow {
    pub h: f64,
    pub error: f64,
    /// `log(e_{i−1}/e_i) / log(h_{i−1}/h_i)`, absent for the first row.
    pub order: Option<f64>,
}

/// Errors of `f(h)` against `f(h_min / 10)` and the empirical orders between
/// successive step sizes.
pub fn order_study<F>(h_list: &[f64], f: F) -> Result<Vec<OrderRow>>
where
    F: Fn(f64) -> Result<DVector<f64>>,
{
    if h_list.len() < 3 {
        return Err(Error::InvalidInput("order study needs at least three step sizes".into()));
    }
    if h_list.windows(2).any(|w| !(w[1] < w[0])) || h_list.iter().any(|&h| !(h > 0.0)) {
        return Err(Error::InvalidInput("step sizes must be positive and strictly decreasing".into()));
    }
    let reference = f(h_list[h_list.len() - 1] / 10.0)?;
    order_study_against(h_list, &reference, f)
}

/// Like [`order_study`] with an externally supplied reference value.
pub fn order_study_against<F>(h_list: &[f64], reference: &DVector<f64>, f: F) -> Result<Vec<OrderRow>>
where
    F: Fn(f64) -> Result<DVector<f64>>,
{
    let mut rows: Vec<OrderRow> = Vec::with_capacity(h_list.len());
    for &h in h_list {
        let error = (f(h)? - reference).norm();
        let order = rows.last().map(|p| (p.error / error).ln() / (p.h / h).ln());
        rows.push(OrderRow { h, error, order });
    }
    Ok(rows)
}

/// Number of steps of size `h` covering `horizon`, requiring an integer ratio.
pub fn steps_for(horizon: f64, h: f64) -> Result<usize> {
    let n = (horizon / h).round();
    if !(n >= 1.0) || ((n * h - horizon).abs() > 1e-9 * horizon.max(1.0)) {
        return Err(Error::InvalidInput(format!("horizon {horizon} is not a multiple of step {h}")));
    }
    Ok(n as usize)
}

/// Final `(μ, α)` of a forward run, the quantity compared in order studies.
pub fn endpoint_state(
    sys: &ReducedSystem,
    mode: Mode,
    kind: Retraction,
    mu0: &DualVector,
    g0: &GroupElement,
    horizon: f64,
    h: f64,
) -> Result<DVector<f64>> {
    let steps = steps_for(horizon, h)?;
    let problem =
        BvpProblem { mode, retraction: kind, ..BvpProblem::new(sys.clone(), g0.clone(), g0.clone(), horizon, steps) };
    let traj = problem.propagate(mu0, g0, 0.0, steps)?;
    let last = traj.last();
    let d = sys.dim();
    let mut out = DVector::zeros(2 * d);
    out.rows_mut(0, d).copy_from(&last.mu.0);
    out.rows_mut(d, d).copy_from(&last.alpha);
    Ok(out)
}
