//! Retractions `τ: 𝔤 → G` (Cayley and exponential), their local inverses and
//! the inverse right-trivialized tangent `dτ⁻¹`.
//!
//! `dτ_x` is right-trivialized: `Dτ(x)·δ = dτ_x(δ) · τ(x)`. With that convention
//! `dτ⁻¹_{−x} = dτ⁻¹_x ∘ Ad_{τ(x)}`, which the discrete stepper relies on.

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::lie::{AlgebraVector, DualVector, GroupElement, GroupKind, LieAlgebra};

/// Largest admissible condition number of `I ∓ X/2` (Cayley) or `g + I` (inverses).
pub const MAX_CONDITION: f64 = 1e8;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Retraction {
    #[default]
    Cayley,
    Exponential,
}

impl Retraction {
    pub fn name(self) -> &'static str {
        match self {
            Retraction::Cayley => "cayley",
            Retraction::Exponential => "exponential",
        }
    }
}

impl std::str::FromStr for Retraction {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "cayley" | "cay" => Ok(Retraction::Cayley),
            "exponential" | "exp" => Ok(Retraction::Exponential),
            other => Err(Error::InvalidInput(format!("unknown retraction `{other}`"))),
        }
    }
}

fn checked_inverse(m: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    let inv = m.clone().try_inverse().ok_or(Error::SingularRetraction { condition: f64::INFINITY })?;
    let condition = m.norm() * inv.norm();
    if !condition.is_finite() || condition > MAX_CONDITION {
        return Err(Error::SingularRetraction { condition });
    }
    Ok(inv)
}

/// `τ(x)`.
pub fn tau(kind: Retraction, alg: &LieAlgebra, x: &AlgebraVector) -> Result<GroupElement> {
    let xm = alg.hat(x);
    let n = alg.matrix_size();
    let id = DMatrix::<f64>::identity(n, n);
    match kind {
        Retraction::Cayley => {
            let half = &xm * 0.5;
            let inv = checked_inverse(&(&id - &half))?;
            Ok(GroupElement(inv * (&id + half)))
        }
        Retraction::Exponential => Ok(GroupElement(xm.exp())),
    }
}

/// `τ⁻¹(g)` on the injectivity domain (rotation angle below π).
pub fn tau_inv(kind: Retraction, alg: &LieAlgebra, g: &GroupElement) -> Result<AlgebraVector> {
    let cay = cayley_inv(alg, g)?;
    match kind {
        Retraction::Cayley => Ok(cay),
        Retraction::Exponential => exp_inv_newton(alg, g, cay),
    }
}

/// `X = 2 (g − I)(g + I)⁻¹`.
fn cayley_inv(alg: &LieAlgebra, g: &GroupElement) -> Result<AlgebraVector> {
    let n = alg.matrix_size();
    let id = DMatrix::<f64>::identity(n, n);
    let inv = checked_inverse(&(&g.0 + &id)).map_err(|_| Error::OutsideInjectivityDomain)?;
    alg.vee(&((&g.0 - &id) * inv * 2.0))
}

/// Newton on `exp(x) = g`, warm-started from the Cayley chart:
/// `exp(x + δ) ≈ exp(dexp_x δ) exp(x)`, so `δ = dexp⁻¹_x(log(g exp(−x)))`
/// with the log approximated by the Cayley inverse near the identity.
fn exp_inv_newton(alg: &LieAlgebra, g: &GroupElement, start: AlgebraVector) -> Result<AlgebraVector> {
    if alg.kind() == GroupKind::SpecialOrthogonal3 {
        // angle near π: the branch is ambiguous
        let cos_angle = 0.5 * (g.0.trace() - 1.0);
        if cos_angle < -1.0 + 1e-10 {
            return Err(Error::OutsideInjectivityDomain);
        }
    }
    let mut x = start;
    for _ in 0..60 {
        let err = GroupElement(&g.0 * tau(Retraction::Exponential, alg, &-&x)?.0);
        let w = cayley_inv(alg, &err)?;
        let step = AlgebraVector(dtau_inv_matrix(Retraction::Exponential, alg, &x)? * &w.0);
        x += &step;
        if step.norm() <= 1e-15 * (1.0 + x.norm()) {
            return Ok(x);
        }
    }
    let back = tau(Retraction::Exponential, alg, &x)?;
    if back.distance(g) <= 1e-12 {
        Ok(x)
    } else {
        Err(Error::OutsideInjectivityDomain)
    }
}

/// Coordinate matrix of `dτ⁻¹_x`; column `j` holds the coordinates of `dτ⁻¹_x(e_j)`.
pub fn dtau_inv_matrix(kind: Retraction, alg: &LieAlgebra, x: &AlgebraVector) -> Result<DMatrix<f64>> {
    match kind {
        Retraction::Cayley if alg.kind() == GroupKind::SpecialEuclidean2 => Ok(se2_dcay_inv(x)),
        Retraction::Cayley => cayley_dtau_inv_matrix(alg, x),
        Retraction::Exponential => exp_dtau_inv_matrix(alg, x),
    }
}

/// Generic Cayley form `dcay⁻¹_x(y) = (I − X/2) y (I + X/2)`.
pub fn cayley_dtau_inv_matrix(alg: &LieAlgebra, x: &AlgebraVector) -> Result<DMatrix<f64>> {
    let n = alg.matrix_size();
    let id = DMatrix::<f64>::identity(n, n);
    let half = alg.hat(x) * 0.5;
    let left = &id - &half;
    let right = &id + &half;
    // same singular set as τ itself
    checked_inverse(&left)?;
    let d = alg.dim();
    let mut out = DMatrix::zeros(d, d);
    for j in 0..d {
        let col = alg.project(&(&left * alg.basis(j) * &right));
        out.set_column(j, &col.0);
    }
    Ok(out)
}

/// Closed-form `[dcay⁻¹_v]` on se(2) in the `(rotation, x, y)` basis.
pub fn se2_dcay_inv(v: &AlgebraVector) -> DMatrix<f64> {
    let (v1, v2, v3) = (v[0], v[1], v[2]);
    #[rustfmt::skip]
    let m = DMatrix::from_row_slice(3, 3, &[
        1.0 + v1 * v1 / 4.0, 0.0, 0.0,
        v1 * v2 / 4.0 - v3 / 2.0, 1.0, v1 / 2.0,
        v1 * v3 / 4.0 + v2 / 2.0, -v1 / 2.0, 1.0,
    ]);
    m
}

/// `dexp_x = Σ_j ad_x^j / (j+1)!` summed to convergence, then inverted.
fn exp_dtau_inv_matrix(alg: &LieAlgebra, x: &AlgebraVector) -> Result<DMatrix<f64>> {
    let d = alg.dim();
    let ad = alg.ad_matrix(x);
    let mut term = DMatrix::<f64>::identity(d, d);
    let mut sum = term.clone();
    for j in 1..80 {
        term = &ad * term / (j as f64 + 1.0);
        sum += &term;
        if term.amax() < 1e-18 * sum.amax() {
            break;
        }
    }
    checked_inverse(&sum)
}

/// `(dτ⁻¹_x)* m`: the transpose of [`dtau_inv_matrix`] applied to `m`.
pub fn dtau_inv_star(kind: Retraction, alg: &LieAlgebra, x: &AlgebraVector, m: &DualVector) -> Result<DualVector> {
    Ok(DualVector(dtau_inv_matrix(kind, alg, x)?.tr_mul(&m.0)))
}
