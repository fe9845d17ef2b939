#![allow(dead_code)]

use lieocp::{AlgebraVector, DualVector, GroupElement, GroupKind, LieAlgebra};
use nalgebra::DVector;
use proptest::prelude::*;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn uniform3(rng: &mut ChaCha8Rng, scale: f64) -> [f64; 3] {
    [rng.gen_range(-scale..scale), rng.gen_range(-scale..scale), rng.gen_range(-scale..scale)]
}

pub fn algebra_vector(rng: &mut ChaCha8Rng, scale: f64) -> AlgebraVector {
    AlgebraVector::from_slice(&uniform3(rng, scale))
}

pub fn dual_vector(rng: &mut ChaCha8Rng, scale: f64) -> DualVector {
    DualVector::from_slice(&uniform3(rng, scale))
}

pub fn vector(rng: &mut ChaCha8Rng, scale: f64) -> DVector<f64> {
    DVector::from_column_slice(&uniform3(rng, scale))
}

pub fn group_element(alg: &LieAlgebra, rng: &mut ChaCha8Rng) -> GroupElement {
    let v = uniform3(rng, 1.5);
    match alg.kind() {
        GroupKind::SpecialEuclidean2 => GroupElement::se2(2.0 * v[0], 2.0 * v[1], 2.0 * v[2]),
        _ => GroupElement::so3_from_rotation_vector(&v),
    }
}

pub fn algebras() -> [LieAlgebra; 2] {
    [LieAlgebra::so3(), LieAlgebra::se2()]
}

pub fn coords() -> impl Strategy<Value = [f64; 3]> {
    [-1.0..1.0f64, -1.0..1.0f64, -1.0..1.0f64]
}

pub fn group_from(alg: &LieAlgebra, c: [f64; 3]) -> GroupElement {
    match alg.kind() {
        GroupKind::SpecialEuclidean2 => GroupElement::se2(3.0 * c[0], 3.0 * c[1], 3.0 * c[2]),
        _ => GroupElement::so3_from_rotation_vector(&[2.0 * c[0], 2.0 * c[1], 2.0 * c[2]]),
    }
}
