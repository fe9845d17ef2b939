//! Continuous-time reduced equations with an advected parameter.
//!
//! The Lie–Poisson form evolves `(μ, α)`:
//!
//! ```text
//! μ̇ = ad*_u μ + J_X(∂V/∂α, α),    α̇ = ρ'*_u(α)
//! ```
//!
//! where `u` is recovered from `μ = ∂C/∂u + λ` by the Legendre inverse on the
//! control subspace `𝔨`, shifted by the drift `e₀`. The split form of
//! [`SplitDynamics`] evolves `(∂C/∂u, λ, α)` separately when the algebra
//! admits the `𝔨 ⊕ 𝔭` splitting.

use std::fmt;
use std::sync::Arc;

use nalgebra::{DMatrix, DVector};

use crate::error::{check_dim, Error, Result};
use crate::lie::{pair, AlgebraVector, DualVector, GroupElement, LieAlgebra};

/// Trajectories refuse to start closer than this to a barrier singular set.
pub const START_MARGIN: f64 = 0.05;
/// Integration aborts once the barrier gap falls below this value.
pub const ABORT_MARGIN: f64 = 1e-6;

/// How the group acts on the parameter space `X*`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AdvectionCase {
    /// `X = 𝔤`, `ρ = Ad`: `α ∈ 𝔤*`, `α = Ad*_g α₀`, `α̇ = ad*_u α`.
    Adjoint,
    /// `X = 𝔤*`, `ρ = Ad*_{g⁻¹}`: `α ∈ 𝔤`, `α = Ad_{g⁻¹} α₀`, `α̇ = −ad_u α`.
    Coadjoint,
}

/// Reduced extended potential `V(α) = V_ext(e, α)`.
pub trait Potential: Send + Sync + fmt::Debug {
    fn value(&self, alpha: &DVector<f64>) -> Result<f64>;

    /// Partial derivatives `∂V/∂α` in coordinates.
    fn gradient(&self, alpha: &DVector<f64>) -> Result<DVector<f64>>;

    /// Distance-like gap to the singular set, if the potential has one.
    fn margin(&self, _alpha: &DVector<f64>) -> Option<f64> {
        None
    }
}

#[derive(Debug, Clone, Copy, Default)]
pub struct NoPotential;

impl Potential for NoPotential {
    fn value(&self, _alpha: &DVector<f64>) -> Result<f64> {
        Ok(0.0)
    }

    fn gradient(&self, alpha: &DVector<f64>) -> Result<DVector<f64>> {
        Ok(DVector::zeros(alpha.len()))
    }
}

/// `C(u) = ½ (u−e₀)_𝔨ᵀ W (u−e₀)_𝔨` with `W` symmetric positive definite on `𝔨`.
#[derive(Debug, Clone)]
pub struct QuadraticCost {
    weight: DMatrix<f64>,
    weight_inv: DMatrix<f64>,
}

impl QuadraticCost {
    pub fn new(weight: DMatrix<f64>) -> Result<Self> {
        if !weight.is_square() {
            return Err(Error::LegendreSingular("cost weight must be square".into()));
        }
        if (&weight - weight.transpose()).amax() > 1e-12 * weight.amax().max(1.0) {
            return Err(Error::LegendreSingular("cost weight must be symmetric".into()));
        }
        let chol = weight
            .clone()
            .cholesky()
            .ok_or_else(|| Error::LegendreSingular("cost weight is not positive definite".into()))?;
        Ok(Self { weight_inv: chol.inverse(), weight })
    }

    pub fn weight(&self) -> &DMatrix<f64> {
        &self.weight
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ReducedState {
    pub t: f64,
    pub mu: DualVector,
    /// In `𝔤*` coordinates for [`AdvectionCase::Adjoint`], `𝔤` coordinates otherwise.
    pub alpha: DVector<f64>,
}

/// Time derivative of a [`ReducedState`].
#[derive(Debug, Clone, PartialEq)]
pub struct ReducedRate {
    pub mu_dot: DualVector,
    pub alpha_dot: DVector<f64>,
}

/// One reduced model: algebra, drift, cost on `𝔨`, potential and advection rule.
#[derive(Clone)]
pub struct ReducedSystem {
    algebra: Arc<LieAlgebra>,
    e0: AlgebraVector,
    cost: QuadraticCost,
    potential: Arc<dyn Potential>,
    advection: AdvectionCase,
    alpha0: DVector<f64>,
}

impl fmt::Debug for ReducedSystem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("ReducedSystem")
            .field("algebra", &self.algebra.name())
            .field("e0", &self.e0)
            .field("advection", &self.advection)
            .field("potential", &self.potential)
            .finish()
    }
}

impl ReducedSystem {
    pub fn new(
        algebra: Arc<LieAlgebra>,
        e0: AlgebraVector,
        cost: QuadraticCost,
        potential: Arc<dyn Potential>,
        advection: AdvectionCase,
        alpha0: DVector<f64>,
    ) -> Result<Self> {
        let d = algebra.dim();
        check_dim(d, e0.dim())?;
        check_dim(d, alpha0.len())?;
        check_dim(algebra.subspace_k().len(), cost.weight.nrows())?;
        if algebra.subspace_k().iter().any(|&i| e0[i] != 0.0) {
            return Err(Error::InvalidInput("drift e0 must lie in the complement subspace p".into()));
        }
        Ok(Self { algebra, e0, cost, potential, advection, alpha0 })
    }

    pub fn algebra(&self) -> &LieAlgebra {
        &self.algebra
    }

    pub fn algebra_arc(&self) -> Arc<LieAlgebra> {
        Arc::clone(&self.algebra)
    }

    pub fn dim(&self) -> usize {
        self.algebra.dim()
    }

    pub fn e0(&self) -> &AlgebraVector {
        &self.e0
    }

    pub fn cost_weight(&self) -> &DMatrix<f64> {
        self.cost.weight()
    }

    pub fn potential(&self) -> &dyn Potential {
        self.potential.as_ref()
    }

    pub fn advection(&self) -> AdvectionCase {
        self.advection
    }

    pub fn alpha0(&self) -> &DVector<f64> {
        &self.alpha0
    }

    /// Same model with the potential replaced.
    pub fn with_potential(&self, potential: Arc<dyn Potential>) -> Self {
        Self { potential, ..self.clone() }
    }

    fn k_coords(&self, v: &DVector<f64>) -> DVector<f64> {
        DVector::from_iterator(self.algebra.subspace_k().len(), self.algebra.subspace_k().iter().map(|&i| v[i]))
    }

    fn embed_k(&self, v: &DVector<f64>) -> DVector<f64> {
        let mut out = DVector::zeros(self.dim());
        for (c, &i) in self.algebra.subspace_k().iter().enumerate() {
            out[i] = v[c];
        }
        out
    }

    /// `C(u − e₀)`.
    pub fn cost(&self, u: &AlgebraVector) -> f64 {
        let w = self.k_coords(&(u - &self.e0).0);
        0.5 * w.dot(&(&self.cost.weight * &w))
    }

    /// `∂C/∂u`, supported on `𝔨*`.
    pub fn cost_grad(&self, u: &AlgebraVector) -> DualVector {
        let w = self.k_coords(&(u - &self.e0).0);
        DualVector(self.embed_k(&(&self.cost.weight * w)))
    }

    /// `μ = ∂C/∂u + λ`, requiring `u − e₀ ∈ 𝔨` and `λ ∈ 𝔭*`.
    pub fn legendre(&self, u: &AlgebraVector, lambda: &DualVector) -> Result<DualVector> {
        check_dim(self.dim(), u.dim())?;
        check_dim(self.dim(), lambda.dim())?;
        let shifted = u - &self.e0;
        for &i in self.algebra.subspace_p() {
            if shifted[i].abs() > 1e-12 {
                return Err(Error::InvalidInput(format!("u - e0 has a component along p (index {i})")));
            }
        }
        for &i in self.algebra.subspace_k() {
            if lambda[i].abs() > 1e-12 {
                return Err(Error::InvalidInput(format!("lambda has a component along k* (index {i})")));
            }
        }
        Ok(self.cost_grad(u) + lambda.clone())
    }

    /// Inverse Legendre map: `(u, λ)` with `u = e₀ + W⁻¹ μ_𝔨` and `λ = μ_𝔭`.
    pub fn legendre_inv(&self, mu: &DualVector) -> (AlgebraVector, DualVector) {
        let mk = self.k_coords(&mu.0);
        let u = AlgebraVector(self.embed_k(&(&self.cost.weight_inv * mk))) + self.e0.clone();
        let lambda = self.algebra.restrict(mu, self.algebra.subspace_p());
        (u, lambda)
    }

    pub fn velocity(&self, mu: &DualVector) -> AlgebraVector {
        self.legendre_inv(mu).0
    }

    /// `J_X(x, α)`: `−ad*_x α` (adjoint case) or `ad*_α x` (coadjoint case).
    pub fn momentum_map(&self, x: &DVector<f64>, alpha: &DVector<f64>) -> DualVector {
        let alg = &self.algebra;
        match self.advection {
            AdvectionCase::Adjoint => -alg.ad_star(&AlgebraVector(x.clone()), &DualVector(alpha.clone())),
            AdvectionCase::Coadjoint => alg.ad_star(&AlgebraVector(alpha.clone()), &DualVector(x.clone())),
        }
    }

    /// Infinitesimal generator `ξ_X(x)`: `ad_ξ x` or `−ad*_ξ x`.
    pub fn generator(&self, xi: &AlgebraVector, x: &DVector<f64>) -> DVector<f64> {
        let alg = &self.algebra;
        match self.advection {
            AdvectionCase::Adjoint => alg.bracket(xi, &AlgebraVector(x.clone())).0,
            AdvectionCase::Coadjoint => -alg.ad_star(xi, &DualVector(x.clone())).0,
        }
    }

    /// `ρ'*_u(α)`: `ad*_u α` or `−ad_u α`.
    pub fn advection_rate(&self, u: &AlgebraVector, alpha: &DVector<f64>) -> DVector<f64> {
        let alg = &self.algebra;
        match self.advection {
            AdvectionCase::Adjoint => alg.ad_star(u, &DualVector(alpha.clone())).0,
            AdvectionCase::Coadjoint => -alg.bracket(u, &AlgebraVector(alpha.clone())).0,
        }
    }

    /// `ρ*_g(α)`: `Ad*_g α` or `Ad_{g⁻¹} α`.
    pub fn rho_star(&self, g: &GroupElement, alpha: &DVector<f64>) -> DVector<f64> {
        let alg = &self.algebra;
        match self.advection {
            AdvectionCase::Adjoint => alg.coadjoint(g, &DualVector(alpha.clone())).0,
            AdvectionCase::Coadjoint => alg.adjoint(&g.inverse(), &AlgebraVector(alpha.clone())).0,
        }
    }

    /// `α = ρ*_{g}(α₀)`.
    pub fn advected_alpha(&self, g: &GroupElement) -> DVector<f64> {
        self.rho_star(g, &self.alpha0)
    }

    /// `V_ext(g, α) = V(ρ*_g(α))`.
    pub fn potential_ext(&self, g: &GroupElement, alpha: &DVector<f64>) -> Result<f64> {
        self.potential.value(&self.rho_star(g, alpha))
    }

    /// Errors when `alpha` is closer than `min_gap` to the potential's singular set.
    pub fn check_margin(&self, alpha: &DVector<f64>, min_gap: f64) -> Result<()> {
        match self.potential.margin(alpha) {
            Some(gap) if !(gap >= min_gap) => Err(Error::BarrierSingular { gap }),
            _ => Ok(()),
        }
    }

    pub fn ep_rhs(&self, state: &ReducedState) -> Result<ReducedRate> {
        check_dim(self.dim(), state.mu.dim())?;
        check_dim(self.dim(), state.alpha.len())?;
        let u = self.velocity(&state.mu);
        let grad = self.potential.gradient(&state.alpha)?;
        let mu_dot = self.algebra.ad_star(&u, &state.mu) + self.momentum_map(&grad, &state.alpha);
        let alpha_dot = self.advection_rate(&u, &state.alpha);
        Ok(ReducedRate { mu_dot, alpha_dot })
    }

    /// `h(μ, α) = ⟨μ, u⟩ − C(u − e₀) − V(α) − ⟨λ, u − e₀⟩`.
    pub fn hamiltonian(&self, state: &ReducedState) -> Result<f64> {
        let (u, lambda) = self.legendre_inv(&state.mu);
        let v = self.potential.value(&state.alpha)?;
        Ok(pair(&state.mu, &u) - self.cost(&u) - v - pair(&lambda, &(&u - &self.e0)))
    }
}

/// `(u, λ, α)` with `u − e₀ ∈ 𝔨` and `λ ∈ 𝔭*`.
#[derive(Debug, Clone, PartialEq)]
pub struct SplitState {
    pub u: AlgebraVector,
    pub lambda: DualVector,
    pub alpha: DVector<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SplitRate {
    /// `d/dt ∂C/∂u`, supported on `𝔨*`.
    pub cost_grad_dot: DualVector,
    /// `dλ/dt`, supported on `𝔭*`.
    pub lambda_dot: DualVector,
    pub alpha_dot: DVector<f64>,
}

/// Decoupled `(∂C/∂u, λ)` evolution, available when
/// `[𝔨,𝔨] ⊆ 𝔭`, `[𝔭,𝔨] ⊆ 𝔨` and `[𝔭,𝔭] ⊆ 𝔭`.
#[derive(Debug, Clone)]
pub struct SplitDynamics<'a> {
    sys: &'a ReducedSystem,
}

impl<'a> SplitDynamics<'a> {
    pub fn new(sys: &'a ReducedSystem) -> Result<Self> {
        let residual = sys.algebra.splitting_residual();
        if residual > crate::lie::ALGEBRA_TOL {
            return Err(Error::SplittingViolated(format!(
                "{} does not satisfy the k/p bracket relations (residual {residual:.3e})",
                sys.algebra.name()
            )));
        }
        Ok(Self { sys })
    }

    pub fn system(&self) -> &ReducedSystem {
        self.sys
    }

    pub fn state_from_mu(&self, mu: &DualVector, alpha: DVector<f64>) -> SplitState {
        let (u, lambda) = self.sys.legendre_inv(mu);
        SplitState { u, lambda, alpha }
    }

    pub fn rhs(&self, state: &SplitState) -> Result<SplitRate> {
        let sys = self.sys;
        let alg = &sys.algebra;
        let (k, p) = (alg.subspace_k(), alg.subspace_p());
        let cg = sys.cost_grad(&state.u);
        let shifted = &state.u - &sys.e0;
        let grad = sys.potential.gradient(&state.alpha)?;
        let j = sys.momentum_map(&grad, &state.alpha);

        let cost_grad_dot = alg.ad_star(&sys.e0, &cg) + alg.ad_star(&shifted, &state.lambda) + alg.restrict(&j, k);
        let lambda_dot = alg.ad_star(&sys.e0, &state.lambda) + alg.ad_star(&shifted, &cg) + alg.restrict(&j, p);
        let alpha_dot = sys.advection_rate(&state.u, &state.alpha);
        Ok(SplitRate { cost_grad_dot, lambda_dot, alpha_dot })
    }

    /// `u̇ = W⁻¹ (d/dt ∂C/∂u)` on `𝔨`.
    pub fn u_dot(&self, rate: &SplitRate) -> AlgebraVector {
        let sys = self.sys;
        let v = sys.embed_k(&(&sys.cost.weight_inv * sys.k_coords(&rate.cost_grad_dot.0)));
        AlgebraVector(v)
    }
}
