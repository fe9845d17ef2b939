//! Discrete-time Lie–Poisson stepper.
//!
//! With `C_d = hC` and `V_d = hV`, step `k` solves
//!
//! ```text
//! (dτ⁻¹_{h u_k})* μ_k = (dτ⁻¹_{−h u_{k−1}})* μ_{k−1} + h J_X(∂V/∂ᾱ_k, ᾱ_k)
//! ```
//!
//! for `μ_k`, with `u_k` recovered by the Legendre inverse, and then advances
//! `ᾱ_{k+1} = ρ*_{τ(h u_k)} ᾱ_k` and `g_{k+1} = g_k τ(h u_k)`.

use nalgebra::{DMatrix, DVector};

use crate::dynamics::{ReducedSystem, ABORT_MARGIN};
use crate::error::{Error, Result};
use crate::integrate::{maybe_project, Sample, Trajectory};
use crate::lie::{AlgebraVector, DualVector, GroupElement};
use crate::retraction::{dtau_inv_star, tau, Retraction};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StepperConfig {
    pub h: f64,
    pub retraction: Retraction,
    pub newton_tol: f64,
    pub newton_max_iters: usize,
}

impl StepperConfig {
    pub fn new(h: f64, retraction: Retraction) -> Result<Self> {
        let cfg = Self { h, retraction, newton_tol: 1e-10, newton_max_iters: 50 };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.h > 0.0) || !self.h.is_finite() {
            return Err(Error::InvalidInput(format!("step size must be positive, got {}", self.h)));
        }
        if !(self.newton_tol > 0.0) || self.newton_max_iters == 0 {
            return Err(Error::InvalidInput("Newton tolerance and iteration limit must be positive".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DiscreteState {
    pub k: usize,
    pub u: AlgebraVector,
    pub mu: DualVector,
    pub alpha: DVector<f64>,
    pub g: GroupElement,
}

impl DiscreteState {
    /// State at `k = 0` with `ᾱ₀ = ρ*_{g₀}(α₀)`.
    pub fn initial(sys: &ReducedSystem, mu0: DualVector, g0: GroupElement) -> Self {
        Self { k: 0, u: sys.velocity(&mu0), alpha: sys.advected_alpha(&g0), mu: mu0, g: g0 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct NewtonStats {
    pub iterations: usize,
    pub residual: f64,
}

/// `(dτ⁻¹_{h u(μ)})* μ − rhs`.
pub fn momentum_residual(
    sys: &ReducedSystem,
    cfg: &StepperConfig,
    mu: &DualVector,
    rhs: &DualVector,
) -> Result<DualVector> {
    let hu = sys.velocity(mu) * cfg.h;
    Ok(dtau_inv_star(cfg.retraction, sys.algebra(), &hu, mu)? - rhs)
}

/// Right-hand side of the momentum equation for step `k`, given the state at
/// `k − 1` and the advected parameter `ᾱ_k`.
pub fn step_rhs(
    sys: &ReducedSystem,
    cfg: &StepperConfig,
    prev: &DiscreteState,
    alpha_k: &DVector<f64>,
) -> Result<DualVector> {
    sys.check_margin(alpha_k, ABORT_MARGIN)?;
    let transported = dtau_inv_star(cfg.retraction, sys.algebra(), &(&prev.u * -cfg.h), &prev.mu)?;
    let grad = sys.potential().gradient(alpha_k)?;
    Ok(transported + sys.momentum_map(&grad, alpha_k) * cfg.h)
}

/// Damped Newton on [`momentum_residual`] with a forward-difference Jacobian.
pub fn solve_momentum(
    sys: &ReducedSystem,
    cfg: &StepperConfig,
    rhs: &DualVector,
    guess: &DualVector,
) -> Result<(DualVector, NewtonStats)> {
    let d = sys.dim();
    let mut mu = guess.clone();
    let mut r = momentum_residual(sys, cfg, &mu, rhs)?;
    let mut norm = r.norm();
    let mut polish = 0;
    for it in 0..cfg.newton_max_iters {
        if norm <= cfg.newton_tol {
            // a couple of extra iterations push the residual to round-off
            if polish >= 2 || norm == 0.0 {
                return Ok((mu, NewtonStats { iterations: it, residual: norm }));
            }
            polish += 1;
        }
        let mut jac = DMatrix::zeros(d, d);
        for j in 0..d {
            let eps = 1e-7 * mu[j].abs().max(1.0);
            let mut shifted = mu.clone();
            shifted[j] += eps;
            let col = (momentum_residual(sys, cfg, &shifted, rhs)? - &r) * (1.0 / eps);
            jac.set_column(j, &col.0);
        }
        let delta = jac.lu().solve(&(-&r.0)).ok_or(Error::NewtonDivergence { residual: norm, iterations: it })?;
        let mut t = 1.0;
        let accepted = loop {
            let trial = &mu + &DualVector(&delta * t);
            let rt = momentum_residual(sys, cfg, &trial, rhs)?;
            let nt = rt.norm();
            if nt < norm {
                break Some((trial, rt, nt));
            }
            t *= 0.5;
            if t < 1e-6 {
                break None;
            }
        };
        match accepted {
            Some((m, rt, nt)) => {
                mu = m;
                r = rt;
                norm = nt;
            }
            None if norm <= cfg.newton_tol => return Ok((mu, NewtonStats { iterations: it, residual: norm })),
            None => return Err(Error::NewtonDivergence { residual: norm, iterations: it }),
        }
    }
    if norm <= cfg.newton_tol {
        Ok((mu, NewtonStats { iterations: cfg.newton_max_iters, residual: norm }))
    } else {
        Err(Error::NewtonDivergence { residual: norm, iterations: cfg.newton_max_iters })
    }
}

/// Advances from the state at `k − 1` to the state at `k`.
pub fn discrete_step(
    sys: &ReducedSystem,
    cfg: &StepperConfig,
    prev: &DiscreteState,
) -> Result<(DiscreteState, NewtonStats)> {
    let alg = sys.algebra();
    let step = tau(cfg.retraction, alg, &(&prev.u * cfg.h))?;
    let alpha = sys.rho_star(&step, &prev.alpha);
    let g = prev.g.compose(&step);
    let rhs = step_rhs(sys, cfg, prev, &alpha)?;
    let (mu, stats) = solve_momentum(sys, cfg, &rhs, &prev.mu)?;
    Ok((DiscreteState { k: prev.k + 1, u: sys.velocity(&mu), mu, alpha, g }, stats))
}

#[derive(Debug, Clone, PartialEq)]
pub struct DiscreteRun {
    pub states: Vec<DiscreteState>,
    pub newton: Vec<NewtonStats>,
    pub projections: usize,
}

impl DiscreteRun {
    pub fn last(&self) -> &DiscreteState {
        self.states.last().expect("run has at least one state")
    }

    pub fn max_residual(&self) -> f64 {
        self.newton.iter().map(|s| s.residual).fold(0.0, f64::max)
    }

    pub fn to_trajectory(&self, cfg: &StepperConfig, t0: f64) -> Trajectory {
        let samples = self
            .states
            .iter()
            .map(|s| Sample {
                t: t0 + s.k as f64 * cfg.h,
                mu: s.mu.clone(),
                u: s.u.clone(),
                alpha: s.alpha.clone(),
                g: s.g.clone(),
            })
            .collect();
        Trajectory { samples, h: cfg.h, retraction: cfg.retraction, projections: self.projections }
    }
}

/// `n` steps from `init`.
pub fn discrete_trajectory(
    sys: &ReducedSystem,
    cfg: &StepperConfig,
    init: DiscreteState,
    n: usize,
) -> Result<DiscreteRun> {
    cfg.validate()?;
    crate::error::check_dim(sys.dim(), init.mu.dim())?;
    sys.check_margin(&init.alpha, crate::dynamics::START_MARGIN)?;
    let mut states = Vec::with_capacity(n + 1);
    let mut newton = Vec::with_capacity(n);
    let mut projections = 0;
    states.push(init);
    for _ in 0..n {
        let (mut next, stats) = discrete_step(sys, cfg, states.last().unwrap())?;
        next.g = maybe_project(sys.algebra(), next.g, &mut projections);
        states.push(next);
        newton.push(stats);
    }
    Ok(DiscreteRun { states, newton, projections })
}

/// `Ad*_{g_k⁻¹} (dτ⁻¹_{h u_k})* μ_k`, constant in `k` when the potential vanishes.
pub fn discrete_momentum(sys: &ReducedSystem, cfg: &StepperConfig, state: &DiscreteState) -> Result<DualVector> {
    let m = dtau_inv_star(cfg.retraction, sys.algebra(), &(&state.u * cfg.h), &state.mu)?;
    Ok(sys.algebra().coadjoint(&state.g.inverse(), &m))
}
