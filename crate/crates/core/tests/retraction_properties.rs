mod common;

use common::{algebras, coords};
use lieocp::retraction::{cayley_dtau_inv_matrix, dtau_inv_matrix, dtau_inv_star, se2_dcay_inv, tau, tau_inv};
use lieocp::{AlgebraVector, DualVector, LieAlgebra, Retraction};
use nalgebra::DMatrix;
use proptest::prelude::*;

const KINDS: [Retraction; 2] = [Retraction::Cayley, Retraction::Exponential];

/// Right-trivialized tangent of `τ` by central differences.
fn dtau_fd(kind: Retraction, alg: &LieAlgebra, x: &AlgebraVector) -> DMatrix<f64> {
    let eps = 1e-5;
    let g_inv = tau(kind, alg, x).unwrap().inverse();
    let d = alg.dim();
    let mut out = DMatrix::zeros(d, d);
    for j in 0..d {
        let e = AlgebraVector::unit(d, j) * eps;
        let plus = tau(kind, alg, &(x + &e)).unwrap();
        let minus = tau(kind, alg, &(x - &e)).unwrap();
        let deriv = (plus.0 - minus.0) / (2.0 * eps) * &g_inv.0;
        out.set_column(j, &alg.vee(&deriv).unwrap().0);
    }
    out
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(100))]

    #[test]
    fn tau_of_negative_is_inverse(x in coords()) {
        for alg in algebras() {
            for kind in KINDS {
                let x = AlgebraVector::from_slice(&x);
                let prod = tau(kind, &alg, &x).unwrap().compose(&tau(kind, &alg, &-&x).unwrap());
                prop_assert!(prod.distance(&alg.identity()) <= 1e-10);
            }
        }
    }

    #[test]
    fn tau_inv_round_trip(x in coords()) {
        for alg in algebras() {
            for kind in KINDS {
                let x = AlgebraVector::from_slice(&x) * 0.5;
                let back = tau_inv(kind, &alg, &tau(kind, &alg, &x).unwrap()).unwrap();
                prop_assert!((back - &x).amax() <= 1e-9);
            }
        }
    }

    #[test]
    fn lemma_identity_for_dtau_inverse(x in coords(), m in coords()) {
        for alg in algebras() {
            for kind in KINDS {
                let x = AlgebraVector::from_slice(&x);
                let m = DualVector::from_slice(&m);
                let lhs = dtau_inv_star(kind, &alg, &-&x, &m).unwrap();
                let inner = dtau_inv_star(kind, &alg, &x, &m).unwrap();
                let rhs = alg.coadjoint(&tau(kind, &alg, &x).unwrap(), &inner);
                prop_assert!((lhs - rhs).amax() <= 1e-10);
            }
        }
    }

    #[test]
    fn dtau_inverse_inverts_finite_difference_tangent(x in coords()) {
        for alg in algebras() {
            for kind in KINDS {
                let x = AlgebraVector::from_slice(&x);
                let prod = dtau_inv_matrix(kind, &alg, &x).unwrap() * dtau_fd(kind, &alg, &x);
                prop_assert!((prod - DMatrix::identity(3, 3)).amax() <= 1e-6);
            }
        }
    }

    #[test]
    fn se2_fast_path_matches_generic_cayley(v in coords()) {
        let se2 = LieAlgebra::se2();
        let v = AlgebraVector::from_slice(&v) * 3.0;
        let generic = cayley_dtau_inv_matrix(&se2, &v).unwrap();
        prop_assert!((generic - se2_dcay_inv(&v)).amax() <= 1e-12);
    }
}

#[test]
fn exponential_and_cayley_agree_to_third_order() {
    for alg in algebras() {
        let x = AlgebraVector::from_slice(&[0.4, -0.3, 0.5]);
        let gap = |s: f64| {
            let xs = &x * s;
            (tau(Retraction::Exponential, &alg, &xs).unwrap().0 - tau(Retraction::Cayley, &alg, &xs).unwrap().0).norm()
        };
        let ratios: Vec<f64> = [1.0, 0.5, 0.25].iter().map(|&s| gap(s) / gap(s / 2.0)).collect();
        for r in ratios {
            assert!((r - 8.0).abs() < 0.6, "{}: halving ratio {r}", alg.name());
        }
    }
}
