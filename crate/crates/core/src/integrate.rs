//! Fixed-step RK4 for the reduced flow, coupled with a Munthe-Kaas style
//! update of the group element in the retraction chart.

use nalgebra::DVector;

use crate::dynamics::{ReducedState, ReducedSystem, SplitDynamics, SplitState, ABORT_MARGIN, START_MARGIN};
use crate::error::{Error, Result};
use crate::lie::{AlgebraVector, DualVector, GroupElement, LieAlgebra, GROUP_TOL};
use crate::retraction::{dtau_inv_matrix, tau, Retraction};

/// One point of a trajectory.
#[derive(Debug, Clone, PartialEq)]
pub struct Sample {
    pub t: f64,
    pub mu: DualVector,
    pub u: AlgebraVector,
    pub alpha: DVector<f64>,
    pub g: GroupElement,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub samples: Vec<Sample>,
    pub h: f64,
    pub retraction: Retraction,
    /// Number of times the group element was projected back onto the group.
    pub projections: usize,
}

impl Trajectory {
    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn first(&self) -> &Sample {
        &self.samples[0]
    }

    pub fn last(&self) -> &Sample {
        self.samples.last().expect("trajectory has at least one sample")
    }

    pub fn final_group(&self) -> &GroupElement {
        &self.last().g
    }

    /// Largest deviation of `α_k` from `ρ*_{g_k}(α₀)`.
    pub fn advection_defect(&self, sys: &ReducedSystem) -> f64 {
        self.samples.iter().map(|s| (&s.alpha - sys.advected_alpha(&s.g)).amax()).fold(0.0, f64::max)
    }

    /// `max_t |f(t) − f(0)|` for a scalar quantity along the trajectory.
    pub fn drift<F: Fn(&Sample) -> f64>(&self, f: F) -> f64 {
        let f0 = f(self.first());
        self.samples.iter().map(|s| (f(s) - f0).abs()).fold(0.0, f64::max)
    }

    /// Smallest barrier gap along the trajectory, if the potential has one.
    pub fn min_margin(&self, sys: &ReducedSystem) -> Option<f64> {
        self.samples.iter().filter_map(|s| sys.potential().margin(&s.alpha)).reduce(f64::min)
    }
}

fn pack(mu: &DualVector, alpha: &DVector<f64>) -> DVector<f64> {
    let d = mu.dim();
    let mut y = DVector::zeros(2 * d);
    y.rows_mut(0, d).copy_from(&mu.0);
    y.rows_mut(d, d).copy_from(alpha);
    y
}

fn unpack(y: &DVector<f64>, d: usize, t: f64) -> ReducedState {
    ReducedState { t, mu: DualVector(y.rows(0, d).into_owned()), alpha: y.rows(d, d).into_owned() }
}

fn rhs(sys: &ReducedSystem, y: &DVector<f64>) -> Result<(DVector<f64>, AlgebraVector)> {
    let d = sys.dim();
    let state = unpack(y, d, 0.0);
    let rate = sys.ep_rhs(&state)?;
    Ok((pack(&rate.mu_dot, &rate.alpha_dot), sys.velocity(&state.mu)))
}

/// Projects `g` back onto the group when its invariant residual exceeds the drift tolerance.
pub(crate) fn maybe_project(alg: &LieAlgebra, g: GroupElement, count: &mut usize) -> GroupElement {
    let residual = alg.group_residual(&g);
    if residual > GROUP_TOL {
        log::debug!("projecting group element back to {} (residual {residual:.3e})", alg.name());
        *count += 1;
        alg.project_to_group(&g)
    } else {
        g
    }
}

/// One RK4 step of the reduced flow together with the chart update
/// `g ← g τ(Θ)`, where `Θ̇ = dτ⁻¹_{−Θ}(u)` is integrated by the same tableau.
pub fn rk4_step(
    sys: &ReducedSystem,
    kind: Retraction,
    y: &DVector<f64>,
    g: &GroupElement,
    h: f64,
) -> Result<(DVector<f64>, GroupElement)> {
    let alg = sys.algebra();
    let chart = |theta: &AlgebraVector, u: &AlgebraVector| -> Result<AlgebraVector> {
        Ok(AlgebraVector(dtau_inv_matrix(kind, alg, &-theta)? * &u.0 * h))
    };

    let (k1, u1) = rhs(sys, y)?;
    let w1 = &u1 * h;
    let (k2, u2) = rhs(sys, &(y + &k1 * (0.5 * h)))?;
    let w2 = chart(&(&w1 * 0.5), &u2)?;
    let (k3, u3) = rhs(sys, &(y + &k2 * (0.5 * h)))?;
    let w3 = chart(&(&w2 * 0.5), &u3)?;
    let (k4, u4) = rhs(sys, &(y + &k3 * h))?;
    let w4 = chart(&w3, &u4)?;

    let y_next = y + (k1 + (k2 + k3) * 2.0 + k4) * (h / 6.0);
    let theta = (w1 + (w2 + w3) * 2.0 + w4) * (1.0 / 6.0);
    let g_next = g.compose(&tau(kind, alg, &theta)?);
    Ok((y_next, g_next))
}

/// Integrates the reduced flow for `steps` steps of size `h` from `init`,
/// reconstructing `g` from `g0`.
pub fn simulate(
    sys: &ReducedSystem,
    init: &ReducedState,
    g0: &GroupElement,
    h: f64,
    steps: usize,
    kind: Retraction,
) -> Result<Trajectory> {
    if !(h > 0.0) || !h.is_finite() {
        return Err(Error::InvalidInput(format!("step size must be positive, got {h}")));
    }
    let d = sys.dim();
    crate::error::check_dim(d, init.mu.dim())?;
    crate::error::check_dim(d, init.alpha.len())?;
    sys.check_margin(&init.alpha, START_MARGIN)?;

    let alg = sys.algebra();
    let mut projections = 0;
    let mut samples = Vec::with_capacity(steps + 1);
    let mut y = pack(&init.mu, &init.alpha);
    let mut g = g0.clone();
    samples.push(Sample {
        t: init.t,
        mu: init.mu.clone(),
        u: sys.velocity(&init.mu),
        alpha: init.alpha.clone(),
        g: g.clone(),
    });
    for n in 1..=steps {
        let (y_next, g_next) = rk4_step(sys, kind, &y, &g, h)?;
        y = y_next;
        g = maybe_project(alg, g_next, &mut projections);
        let state = unpack(&y, d, init.t + n as f64 * h);
        if y.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidInput(format!("non-finite state at t = {}", state.t)));
        }
        sys.check_margin(&state.alpha, ABORT_MARGIN)?;
        samples.push(Sample { t: state.t, u: sys.velocity(&state.mu), mu: state.mu, alpha: state.alpha, g: g.clone() });
    }
    Ok(Trajectory { samples, h, retraction: kind, projections })
}

/// RK4 on the split variables `(u, λ, α)`; returns `steps + 1` states.
pub fn simulate_split(split: &SplitDynamics<'_>, init: &SplitState, h: f64, steps: usize) -> Result<Vec<SplitState>> {
    if !(h > 0.0) || !h.is_finite() {
        return Err(Error::InvalidInput(format!("step size must be positive, got {h}")));
    }
    let sys = split.system();
    sys.check_margin(&init.alpha, START_MARGIN)?;
    let d = sys.dim();
    let f = |y: &DVector<f64>| -> Result<DVector<f64>> {
        let state = SplitState {
            u: AlgebraVector(y.rows(0, d).into_owned()),
            lambda: DualVector(y.rows(d, d).into_owned()),
            alpha: y.rows(2 * d, d).into_owned(),
        };
        let rate = split.rhs(&state)?;
        let mut out = DVector::zeros(3 * d);
        out.rows_mut(0, d).copy_from(&split.u_dot(&rate).0);
        out.rows_mut(d, d).copy_from(&rate.lambda_dot.0);
        out.rows_mut(2 * d, d).copy_from(&rate.alpha_dot);
        Ok(out)
    };
    let mut y = DVector::zeros(3 * d);
    y.rows_mut(0, d).copy_from(&init.u.0);
    y.rows_mut(d, d).copy_from(&init.lambda.0);
    y.rows_mut(2 * d, d).copy_from(&init.alpha);
    let mut out = Vec::with_capacity(steps + 1);
    out.push(init.clone());
    for _ in 0..steps {
        let k1 = f(&y)?;
        let k2 = f(&(&y + &k1 * (0.5 * h)))?;
        let k3 = f(&(&y + &k2 * (0.5 * h)))?;
        let k4 = f(&(&y + &k3 * h))?;
        y += (k1 + (k2 + k3) * 2.0 + k4) * (h / 6.0);
        let state = SplitState {
            u: AlgebraVector(y.rows(0, d).into_owned()),
            lambda: DualVector(y.rows(d, d).into_owned()),
            alpha: y.rows(2 * d, d).into_owned(),
        };
        sys.check_margin(&state.alpha, ABORT_MARGIN)?;
        out.push(state);
    }
    Ok(out)
}

/// Quadrature used by [`reconstruct`] on sampled velocities.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ReconstructionMethod {
    /// `g_{k+1} = g_k τ(h u_k)`.
    #[default]
    LeftPoint,
    /// `g_{k+1} = g_k τ(h (u_k + u_{k+1})/2)`.
    Midpoint,
}

/// Group path from velocities sampled on a uniform grid.
pub fn reconstruct(
    alg: &LieAlgebra,
    kind: Retraction,
    g0: &GroupElement,
    velocities: &[AlgebraVector],
    h: f64,
    method: ReconstructionMethod,
) -> Result<Vec<GroupElement>> {
    let mut out = Vec::with_capacity(velocities.len());
    let mut projections = 0;
    out.push(g0.clone());
    if velocities.is_empty() {
        return Ok(out);
    }
    for k in 0..velocities.len() - 1 {
        let step = match method {
            ReconstructionMethod::LeftPoint => &velocities[k] * h,
            ReconstructionMethod::Midpoint => (&velocities[k] + &velocities[k + 1]) * (0.5 * h),
        };
        let next = out[k].compose(&tau(kind, alg, &step)?);
        out.push(maybe_project(alg, next, &mut projections));
    }
    Ok(out)
}
