//! The two worked systems: a heavy top on SO(3) and a unicycle steering
//! around a unit-radius obstacle at the origin on SE(2).

use std::sync::Arc;

use nalgebra::{DMatrix, DVector, Matrix3, Vector3};

use crate::dynamics::{AdvectionCase, Potential, QuadraticCost, ReducedSystem};
use crate::error::{Error, Result};
use crate::lie::{AlgebraVector, GroupElement, LieAlgebra};

#[derive(Debug, Clone, PartialEq)]
pub struct HeavyTopParams {
    /// Body inertia tensor, symmetric positive definite.
    pub inertia: Matrix3<f64>,
    pub mass: f64,
    pub gravity: f64,
    /// Distance from the pivot to the centre of mass.
    pub length: f64,
    /// Unit vector from the pivot towards the centre of mass, body frame.
    pub chi: Vector3<f64>,
}

impl Default for HeavyTopParams {
    fn default() -> Self {
        Self {
            inertia: Matrix3::from_diagonal(&Vector3::new(1.0, 2.0, 3.0)),
            mass: 1.0,
            gravity: 1.0,
            length: 1.0,
            chi: Vector3::new(0.0, 0.0, 1.0),
        }
    }
}

impl HeavyTopParams {
    pub fn mgl(&self) -> f64 {
        self.mass * self.gravity * self.length
    }

    pub fn validate(&self) -> Result<()> {
        if ((self.chi.norm() - 1.0).abs()) > 1e-12 {
            return Err(Error::InvalidInput(format!("chi must be a unit vector (norm {})", self.chi.norm())));
        }
        if !self.mgl().is_finite() {
            return Err(Error::InvalidInput("mass, gravity and length must be finite".into()));
        }
        Ok(())
    }
}

/// `V(α) = −mgl α·χ` with `α = gᵀ e₃` the vertical direction seen from the body.
#[derive(Debug, Clone)]
pub struct GravityPotential {
    pub mgl: f64,
    pub chi: Vector3<f64>,
}

impl Potential for GravityPotential {
    fn value(&self, alpha: &DVector<f64>) -> Result<f64> {
        crate::error::check_dim(3, alpha.len())?;
        Ok(-self.mgl * (alpha[0] * self.chi[0] + alpha[1] * self.chi[1] + alpha[2] * self.chi[2]))
    }

    fn gradient(&self, alpha: &DVector<f64>) -> Result<DVector<f64>> {
        crate::error::check_dim(3, alpha.len())?;
        Ok(DVector::from_iterator(3, self.chi.iter().map(|c| -self.mgl * c)))
    }
}

pub fn heavy_top_system(params: &HeavyTopParams) -> Result<ReducedSystem> {
    params.validate()?;
    let weight = DMatrix::from_iterator(3, 3, params.inertia.iter().copied());
    ReducedSystem::new(
        Arc::new(LieAlgebra::so3()),
        AlgebraVector::zeros(3),
        QuadraticCost::new(weight)?,
        Arc::new(GravityPotential { mgl: params.mgl(), chi: params.chi }),
        AdvectionCase::Adjoint,
        DVector::from_column_slice(&[0.0, 0.0, 1.0]),
    )
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct UnicycleParams {
    /// Barrier weight.
    pub kappa: f64,
}

impl Default for UnicycleParams {
    fn default() -> Self {
        Self { kappa: 0.1 }
    }
}

/// `x² + y² − 1` read off the advected parameter `α = Ad_{g⁻¹} e₁`.
pub fn barrier_gap(alpha: &DVector<f64>) -> f64 {
    alpha[1] * alpha[1] + alpha[2] * alpha[2] - 1.0
}

/// `V(α) = κ / (2 (x² + y² − 1))`, singular on the obstacle boundary.
#[derive(Debug, Clone, Copy)]
pub struct BarrierPotential {
    pub kappa: f64,
}

impl BarrierPotential {
    fn gap_checked(&self, alpha: &DVector<f64>) -> Result<f64> {
        crate::error::check_dim(3, alpha.len())?;
        let gap = barrier_gap(alpha);
        if gap.abs() <= 1e-12 {
            return Err(Error::BarrierSingular { gap });
        }
        Ok(gap)
    }
}

impl Potential for BarrierPotential {
    fn value(&self, alpha: &DVector<f64>) -> Result<f64> {
        if self.kappa == 0.0 {
            return Ok(0.0);
        }
        Ok(self.kappa / (2.0 * self.gap_checked(alpha)?))
    }

    fn gradient(&self, alpha: &DVector<f64>) -> Result<DVector<f64>> {
        if self.kappa == 0.0 {
            return Ok(DVector::zeros(3));
        }
        let gap = self.gap_checked(alpha)?;
        let s = -self.kappa / (gap * gap);
        Ok(DVector::from_column_slice(&[0.0, s * alpha[1], s * alpha[2]]))
    }

    fn margin(&self, alpha: &DVector<f64>) -> Option<f64> {
        (self.kappa != 0.0).then(|| barrier_gap(alpha))
    }
}

pub fn unicycle_system(params: &UnicycleParams) -> Result<ReducedSystem> {
    if !(params.kappa >= 0.0) || !params.kappa.is_finite() {
        return Err(Error::InvalidInput(format!("kappa must be non-negative, got {}", params.kappa)));
    }
    ReducedSystem::new(
        Arc::new(LieAlgebra::se2()),
        AlgebraVector::zeros(3),
        // trace norm on span{e1, e2}: C = (u¹)² + ½(u²)²
        QuadraticCost::new(DMatrix::from_diagonal(&DVector::from_column_slice(&[2.0, 1.0])))?,
        Arc::new(BarrierPotential { kappa: params.kappa }),
        AdvectionCase::Coadjoint,
        DVector::from_column_slice(&[1.0, 0.0, 0.0]),
    )
}

/// `Ad_{g⁻¹} e₁` for the pose `(x, y, θ)`.
pub fn unicycle_alpha(x: f64, y: f64, theta: f64) -> DVector<f64> {
    let (s, c) = theta.sin_cos();
    DVector::from_column_slice(&[1.0, x * s - y * c, x * c + y * s])
}

/// Initial data for the Cartesian Euler–Lagrange system of the
/// constrained problem with multiplier `λ`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ElInitial {
    pub x: f64,
    pub y: f64,
    pub theta: f64,
    pub x_dot: f64,
    pub y_dot: f64,
    pub theta_dot: f64,
    pub lambda: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ElSample {
    pub t: f64,
    pub x: f64,
    pub y: f64,
    pub theta: f64,
    /// Angular rate `θ̇`.
    pub u1: f64,
    /// Forward speed `ẋ cos θ + ẏ sin θ`.
    pub u2: f64,
    pub lambda: f64,
}

fn el_rhs(s: &[f64; 7]) -> [f64; 7] {
    let [_, _, th, xd, yd, thd, lam] = *s;
    let (sn, cs) = th.sin_cos();
    let fwd = xd * cs + yd * sn;
    let lam_dot = -thd * fwd;
    [xd, yd, thd, lam_dot * sn + lam * thd * cs, -lam_dot * cs + lam * thd * sn, -0.5 * lam * fwd, lam_dot]
}

/// Integrates the Cartesian Euler–Lagrange equations of the no-slip unicycle
/// with RK4 and reports `(θ̇, forward speed, λ)` at each step.
pub fn unicycle_el_oracle(init: &ElInitial, h: f64, steps: usize) -> Result<Vec<ElSample>> {
    if !(h > 0.0) {
        return Err(Error::InvalidInput(format!("step size must be positive, got {h}")));
    }
    let slip = init.x_dot * init.theta.sin() - init.y_dot * init.theta.cos();
    if slip.abs() > 1e-9 {
        return Err(Error::InvalidInput(format!("initial velocity violates the no-slip constraint by {slip:.3e}")));
    }
    let mut s = [init.x, init.y, init.theta, init.x_dot, init.y_dot, init.theta_dot, init.lambda];
    let sample = |t: f64, s: &[f64; 7]| ElSample {
        t,
        x: s[0],
        y: s[1],
        theta: s[2],
        u1: s[5],
        u2: s[3] * s[2].cos() + s[4] * s[2].sin(),
        lambda: s[6],
    };
    let mut out = Vec::with_capacity(steps + 1);
    out.push(sample(0.0, &s));
    let axpy = |a: &[f64; 7], k: &[f64; 7], c: f64| std::array::from_fn::<f64, 7, _>(|i| a[i] + c * k[i]);
    for n in 1..=steps {
        let k1 = el_rhs(&s);
        let k2 = el_rhs(&axpy(&s, &k1, 0.5 * h));
        let k3 = el_rhs(&axpy(&s, &k2, 0.5 * h));
        let k4 = el_rhs(&axpy(&s, &k3, h));
        s = std::array::from_fn(|i| s[i] + h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]));
        out.push(sample(n as f64 * h, &s));
    }
    Ok(out)
}

/// Endpoints for continuation around the obstacle: at parameter `s` both
/// poses are translated by `(1 − s)·offset`, so `s = 1` gives the requested
/// poses and `s = 0` a shifted problem whose straight path clears the obstacle.
pub fn unicycle_shifted_endpoints(
    start: (f64, f64, f64),
    goal: (f64, f64, f64),
    offset: (f64, f64),
) -> impl Fn(f64) -> (GroupElement, GroupElement) {
    move |s| {
        let (dx, dy) = (offset.0 * (1.0 - s), offset.1 * (1.0 - s));
        (GroupElement::se2(start.0 + dx, start.1 + dy, start.2), GroupElement::se2(goal.0 + dx, goal.1 + dy, goal.2))
    }
}
