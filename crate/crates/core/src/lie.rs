//! Fixed-basis realization of a finite-dimensional matrix Lie algebra and its group.
//!
//! Everything runs on coordinate vectors. An [`AlgebraVector`] holds the
//! coordinates `ξ^i` of `ξ = Σ ξ^i e_i`, a [`DualVector`] holds the coordinates
//! `μ_i` of `μ = Σ μ_i e^i` where `{e^i}` is the basis dual to `{e_i}` under the
//! trace pairing `⟨α, ξ⟩ = tr(α ξ)`. With that choice the pairing of coordinates
//! is the Euclidean dot product, and matrices only appear through [`LieAlgebra::hat`],
//! [`LieAlgebra::hat_dual`] and [`LieAlgebra::vee`].

use std::fmt;
use std::ops::{Add, AddAssign, Deref, DerefMut, Index, IndexMut, Mul, Neg, Sub, SubAssign};

use nalgebra::{DMatrix, DVector, Matrix3, Rotation3, Vector3};

use crate::error::{Error, Result};

/// Tolerance used when validating structure constants and basis matrices.
pub const ALGEBRA_TOL: f64 = 1e-12;
/// Tolerance on the group invariants (orthogonality, SE(2) bottom row).
pub const GROUP_TOL: f64 = 1e-9;

macro_rules! coord_vector {
    ($(#[$meta:meta])* $name:ident) => {
        $(#[$meta])*
        #[derive(Clone, PartialEq)]
        pub struct $name(pub DVector<f64>);

        impl $name {
            pub fn zeros(dim: usize) -> Self {
                Self(DVector::zeros(dim))
            }

            pub fn from_slice(coords: &[f64]) -> Self {
                Self(DVector::from_column_slice(coords))
            }

            /// The `i`-th unit vector.
            pub fn unit(dim: usize, i: usize) -> Self {
                let mut v = DVector::zeros(dim);
                v[i] = 1.0;
                Self(v)
            }

            pub fn dim(&self) -> usize {
                self.0.len()
            }

            pub fn into_inner(self) -> DVector<f64> {
                self.0
            }

            pub fn to_vec(&self) -> Vec<f64> {
                self.0.iter().copied().collect()
            }
        }

        impl fmt::Debug for $name {
            fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                write!(f, "{}({:?})", stringify!($name), self.0.as_slice())
            }
        }

        impl From<DVector<f64>> for $name {
            fn from(v: DVector<f64>) -> Self {
                Self(v)
            }
        }

        impl From<Vec<f64>> for $name {
            fn from(v: Vec<f64>) -> Self {
                Self(DVector::from_vec(v))
            }
        }

        impl Deref for $name {
            type Target = DVector<f64>;
            fn deref(&self) -> &DVector<f64> {
                &self.0
            }
        }

        impl DerefMut for $name {
            fn deref_mut(&mut self) -> &mut DVector<f64> {
                &mut self.0
            }
        }

        impl Index<usize> for $name {
            type Output = f64;
            fn index(&self, i: usize) -> &f64 {
                &self.0[i]
            }
        }

        impl IndexMut<usize> for $name {
            fn index_mut(&mut self, i: usize) -> &mut f64 {
                &mut self.0[i]
            }
        }

        impl Add for $name {
            type Output = $name;
            fn add(self, rhs: $name) -> $name {
                $name(self.0 + rhs.0)
            }
        }

        impl<'a> Add<&'a $name> for &'a $name {
            type Output = $name;
            fn add(self, rhs: &$name) -> $name {
                $name(&self.0 + &rhs.0)
            }
        }

        impl Sub for $name {
            type Output = $name;
            fn sub(self, rhs: $name) -> $name {
                $name(self.0 - rhs.0)
            }
        }

        impl<'a> Sub<&'a $name> for &'a $name {
            type Output = $name;
            fn sub(self, rhs: &$name) -> $name {
                $name(&self.0 - &rhs.0)
            }
        }

        impl Add<&$name> for $name {
            type Output = $name;
            fn add(self, rhs: &$name) -> $name {
                $name(self.0 + &rhs.0)
            }
        }

        impl Sub<&$name> for $name {
            type Output = $name;
            fn sub(self, rhs: &$name) -> $name {
                $name(self.0 - &rhs.0)
            }
        }

        impl AddAssign<&$name> for $name {
            fn add_assign(&mut self, rhs: &$name) {
                self.0 += &rhs.0;
            }
        }

        impl SubAssign<&$name> for $name {
            fn sub_assign(&mut self, rhs: &$name) {
                self.0 -= &rhs.0;
            }
        }

        impl Mul<f64> for $name {
            type Output = $name;
            fn mul(self, s: f64) -> $name {
                $name(self.0 * s)
            }
        }

        impl Mul<f64> for &$name {
            type Output = $name;
            fn mul(self, s: f64) -> $name {
                $name(&self.0 * s)
            }
        }

        impl Neg for $name {
            type Output = $name;
            fn neg(self) -> $name {
                $name(-self.0)
            }
        }

        impl Neg for &$name {
            type Output = $name;
            fn neg(self) -> $name {
                $name(-&self.0)
            }
        }
    };
}

coord_vector!(
    /// Coordinates of a Lie-algebra element in the fixed ordered basis.
    AlgebraVector
);
coord_vector!(
    /// Coordinates of a dual-algebra element in the trace-dual basis.
    DualVector
);

impl AlgebraVector {
    /// Reinterprets the coordinates as a dual vector (no metric applied).
    pub fn as_dual(&self) -> DualVector {
        DualVector(self.0.clone())
    }
}

impl DualVector {
    pub fn as_algebra(&self) -> AlgebraVector {
        AlgebraVector(self.0.clone())
    }
}

/// Coordinate pairing `⟨m, x⟩ = Σ m_i x^i`.
pub fn pair(m: &DualVector, x: &AlgebraVector) -> f64 {
    assert_eq!(m.dim(), x.dim(), "pair: dimension mismatch");
    m.0.dot(&x.0)
}

/// Which concrete matrix group the algebra exponentiates to. Used for the
/// group invariants and for drift projection.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GroupKind {
    SpecialOrthogonal3,
    SpecialEuclidean2,
    General,
}

/// Square real matrix representing a group element.
#[derive(Clone, PartialEq)]
pub struct GroupElement(pub DMatrix<f64>);

impl fmt::Debug for GroupElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "GroupElement{}", self.0)
    }
}

impl GroupElement {
    pub fn identity(n: usize) -> Self {
        Self(DMatrix::identity(n, n))
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.0
    }

    pub fn size(&self) -> usize {
        self.0.nrows()
    }

    pub fn inverse(&self) -> GroupElement {
        GroupElement(self.0.clone().try_inverse().expect("group elements are invertible"))
    }

    pub fn compose(&self, other: &GroupElement) -> GroupElement {
        GroupElement(&self.0 * &other.0)
    }

    /// SE(2) element at position `(x, y)` with heading `theta`.
    pub fn se2(x: f64, y: f64, theta: f64) -> Self {
        let (s, c) = theta.sin_cos();
        Self(DMatrix::from_row_slice(3, 3, &[c, -s, x, s, c, y, 0.0, 0.0, 1.0]))
    }

    /// `(x, y, theta)` of an SE(2) element; theta in `(-π, π]`.
    pub fn se2_pose(&self) -> (f64, f64, f64) {
        let m = &self.0;
        (m[(0, 2)], m[(1, 2)], m[(1, 0)].atan2(m[(0, 0)]))
    }

    /// SO(3) element from a rotation vector (axis times angle).
    pub fn so3_from_rotation_vector(v: &[f64; 3]) -> Self {
        let r = Rotation3::new(Vector3::new(v[0], v[1], v[2]));
        Self(DMatrix::from_iterator(3, 3, r.matrix().iter().copied()))
    }

    pub fn so3_rotation_vector(&self) -> [f64; 3] {
        let m = Matrix3::from_iterator(self.0.iter().copied());
        let v = Rotation3::from_matrix_unchecked(m).scaled_axis();
        [v[0], v[1], v[2]]
    }

    /// Frobenius distance between two group elements.
    pub fn distance(&self, other: &GroupElement) -> f64 {
        (&self.0 - &other.0).norm()
    }
}

/// A finite-dimensional matrix Lie algebra with a fixed ordered basis.
#[derive(Clone)]
pub struct LieAlgebra {
    name: String,
    kind: GroupKind,
    dim: usize,
    n: usize,
    basis: Vec<DMatrix<f64>>,
    dual_basis: Vec<DMatrix<f64>>,
    /// Flattened `c^k_{ij}` at `k * dim² + i * dim + j`.
    structure: Vec<f64>,
    /// Inverse of the Frobenius Gram matrix `tr(e_iᵀ e_j)`.
    gram_inv: DMatrix<f64>,
    subspace_k: Vec<usize>,
    subspace_p: Vec<usize>,
}

impl fmt::Debug for LieAlgebra {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("LieAlgebra")
            .field("name", &self.name)
            .field("dim", &self.dim)
            .field("subspace_k", &self.subspace_k)
            .field("subspace_p", &self.subspace_p)
            .finish()
    }
}

impl LieAlgebra {
    /// Builds an algebra from basis matrices and structure constants
    /// `structure[k][i][j] = c^k_{ij}`, validating antisymmetry, the Jacobi
    /// identity and agreement with the matrix commutators.
    pub fn new(
        name: &str,
        kind: GroupKind,
        basis: Vec<DMatrix<f64>>,
        structure: Vec<Vec<Vec<f64>>>,
        subspace_k: Vec<usize>,
    ) -> Result<Self> {
        let dim = basis.len();
        if dim == 0 {
            return Err(Error::InvalidAlgebra("empty basis".into()));
        }
        let n = basis[0].nrows();
        if basis.iter().any(|b| b.nrows() != n || b.ncols() != n) {
            return Err(Error::InvalidAlgebra("basis matrices must be square and of equal size".into()));
        }
        if structure.len() != dim || structure.iter().any(|s| s.len() != dim || s.iter().any(|r| r.len() != dim)) {
            return Err(Error::InvalidAlgebra(format!("structure constants must be {dim}x{dim}x{dim}")));
        }
        let mut flat = vec![0.0; dim * dim * dim];
        for k in 0..dim {
            for i in 0..dim {
                for j in 0..dim {
                    flat[k * dim * dim + i * dim + j] = structure[k][i][j];
                }
            }
        }

        let mut sorted_k = subspace_k.clone();
        sorted_k.sort_unstable();
        sorted_k.dedup();
        if sorted_k.len() != subspace_k.len() || sorted_k.iter().any(|&i| i >= dim) {
            return Err(Error::InvalidAlgebra("subspace_k must hold distinct basis indices".into()));
        }
        let subspace_p: Vec<usize> = (0..dim).filter(|i| !sorted_k.contains(i)).collect();

        let gram = DMatrix::from_fn(dim, dim, |i, j| basis[i].dot(&basis[j]));
        let gram_inv =
            gram.try_inverse().ok_or_else(|| Error::InvalidAlgebra("basis matrices are linearly dependent".into()))?;
        let dual_basis = (0..dim)
            .map(|i| {
                let mut m = DMatrix::zeros(n, n);
                for j in 0..dim {
                    m += basis[j].transpose() * gram_inv[(i, j)];
                }
                m
            })
            .collect();

        let alg = LieAlgebra {
            name: name.to_string(),
            kind,
            dim,
            n,
            basis,
            dual_basis,
            structure: flat,
            gram_inv,
            subspace_k: sorted_k,
            subspace_p,
        };

        let anti = alg.antisymmetry_residual();
        if anti > ALGEBRA_TOL {
            return Err(Error::InvalidAlgebra(format!("antisymmetry violated by {anti:.3e}")));
        }
        let jac = alg.jacobi_residual();
        if jac > ALGEBRA_TOL {
            return Err(Error::InvalidAlgebra(format!("Jacobi identity violated by {jac:.3e}")));
        }
        let mat = alg.commutator_residual();
        if mat > ALGEBRA_TOL {
            return Err(Error::InvalidAlgebra(format!(
                "structure constants disagree with matrix commutators by {mat:.3e}"
            )));
        }
        Ok(alg)
    }

    /// so(3) with `[e1,e2]=e3, [e2,e3]=e1, [e3,e1]=e2`; fully actuated.
    pub fn so3() -> Self {
        #[rustfmt::skip]
        let basis = vec![
            DMatrix::from_row_slice(3, 3, &[0., 0., 0., 0., 0., -1., 0., 1., 0.]),
            DMatrix::from_row_slice(3, 3, &[0., 0., 1., 0., 0., 0., -1., 0., 0.]),
            DMatrix::from_row_slice(3, 3, &[0., -1., 0., 1., 0., 0., 0., 0., 0.]),
        ];
        let mut c = vec![vec![vec![0.0; 3]; 3]; 3];
        // c^k_{ij} = ε_{ijk}
        for (i, j, k) in [(0, 1, 2), (1, 2, 0), (2, 0, 1)] {
            c[k][i][j] = 1.0;
            c[k][j][i] = -1.0;
        }
        Self::new("so3", GroupKind::SpecialOrthogonal3, basis, c, vec![0, 1, 2]).expect("so(3) tables are valid")
    }

    /// se(2) with `[e1,e2]=e3, [e2,e3]=0, [e3,e1]=e2`; controls on `e1, e2`.
    pub fn se2() -> Self {
        #[rustfmt::skip]
        let basis = vec![
            DMatrix::from_row_slice(3, 3, &[0., -1., 0., 1., 0., 0., 0., 0., 0.]),
            DMatrix::from_row_slice(3, 3, &[0., 0., 1., 0., 0., 0., 0., 0., 0.]),
            DMatrix::from_row_slice(3, 3, &[0., 0., 0., 0., 0., 1., 0., 0., 0.]),
        ];
        let mut c = vec![vec![vec![0.0; 3]; 3]; 3];
        c[2][0][1] = 1.0;
        c[2][1][0] = -1.0;
        c[1][2][0] = 1.0;
        c[1][0][2] = -1.0;
        Self::new("se2", GroupKind::SpecialEuclidean2, basis, c, vec![0, 1]).expect("se(2) tables are valid")
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn kind(&self) -> GroupKind {
        self.kind
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Size `n` of the `n × n` matrices.
    pub fn matrix_size(&self) -> usize {
        self.n
    }

    pub fn basis(&self, i: usize) -> &DMatrix<f64> {
        &self.basis[i]
    }

    pub fn dual_basis(&self, i: usize) -> &DMatrix<f64> {
        &self.dual_basis[i]
    }

    /// `c^k_{ij}` with `[e_i, e_j] = Σ_k c^k_{ij} e_k` (0-based indices).
    pub fn structure_constant(&self, k: usize, i: usize, j: usize) -> f64 {
        self.structure[k * self.dim * self.dim + i * self.dim + j]
    }

    pub fn subspace_k(&self) -> &[usize] {
        &self.subspace_k
    }

    pub fn subspace_p(&self) -> &[usize] {
        &self.subspace_p
    }

    pub fn hat(&self, a: &AlgebraVector) -> DMatrix<f64> {
        assert_eq!(a.dim(), self.dim, "hat: dimension mismatch");
        let mut m = DMatrix::zeros(self.n, self.n);
        for (i, b) in self.basis.iter().enumerate() {
            if a[i] != 0.0 {
                m += b * a[i];
            }
        }
        m
    }

    pub fn hat_dual(&self, m: &DualVector) -> DMatrix<f64> {
        assert_eq!(m.dim(), self.dim, "hat_dual: dimension mismatch");
        let mut out = DMatrix::zeros(self.n, self.n);
        for (i, b) in self.dual_basis.iter().enumerate() {
            if m[i] != 0.0 {
                out += b * m[i];
            }
        }
        out
    }

    /// Least-squares coordinates of `m` in the basis; no span check.
    pub fn project(&self, m: &DMatrix<f64>) -> AlgebraVector {
        let rhs = DVector::from_iterator(self.dim, self.basis.iter().map(|b| b.dot(m)));
        AlgebraVector(&self.gram_inv * rhs)
    }

    /// Coordinates of a matrix lying in the span of the basis.
    pub fn vee(&self, m: &DMatrix<f64>) -> Result<AlgebraVector> {
        let coords = self.project(m);
        let residual = (self.hat(&coords) - m).norm();
        if residual > GROUP_TOL * m.norm().max(1.0) {
            return Err(Error::OutOfAlgebra { residual });
        }
        Ok(coords)
    }

    /// Matrix of `ad_a` in coordinates: `[a, b] = ad_matrix(a) · b`.
    pub fn ad_matrix(&self, a: &AlgebraVector) -> DMatrix<f64> {
        assert_eq!(a.dim(), self.dim, "ad_matrix: dimension mismatch");
        let d = self.dim;
        DMatrix::from_fn(d, d, |k, j| (0..d).map(|i| self.structure_constant(k, i, j) * a[i]).sum())
    }

    pub fn bracket(&self, a: &AlgebraVector, b: &AlgebraVector) -> AlgebraVector {
        assert_eq!(b.dim(), self.dim, "bracket: dimension mismatch");
        AlgebraVector(self.ad_matrix(a) * &b.0)
    }

    /// `(ad*_u m)_j = Σ_{i,k} c^k_{ij} u^i m_k`.
    pub fn ad_star(&self, u: &AlgebraVector, m: &DualVector) -> DualVector {
        assert_eq!(m.dim(), self.dim, "ad_star: dimension mismatch");
        DualVector(self.ad_matrix(u).tr_mul(&m.0))
    }

    /// Matrix of `Ad_g` in coordinates.
    pub fn adjoint_matrix(&self, g: &GroupElement) -> DMatrix<f64> {
        let ginv = g.inverse();
        let mut out = DMatrix::zeros(self.dim, self.dim);
        for j in 0..self.dim {
            let col = self.project(&(&g.0 * &self.basis[j] * &ginv.0));
            out.set_column(j, &col.0);
        }
        out
    }

    /// `Ad_g x = g x g⁻¹`.
    pub fn adjoint(&self, g: &GroupElement, x: &AlgebraVector) -> AlgebraVector {
        let ginv = g.inverse();
        self.project(&(&g.0 * self.hat(x) * &ginv.0))
    }

    /// `Ad*_g m`, defined by `⟨Ad*_g m, x⟩ = ⟨m, Ad_g x⟩`.
    pub fn coadjoint(&self, g: &GroupElement, m: &DualVector) -> DualVector {
        DualVector(self.adjoint_matrix(g).tr_mul(&m.0))
    }

    /// Trace pairing `tr(hat_dual(m) · hat(x))`, the matrix-level counterpart of [`pair`].
    pub fn pair_trace(&self, m: &DualVector, x: &AlgebraVector) -> f64 {
        (self.hat_dual(m) * self.hat(x)).trace()
    }

    /// Projection onto the coordinates in `indices`, zeroing the rest.
    pub fn restrict<V: Clone + DerefMut<Target = DVector<f64>>>(&self, v: &V, indices: &[usize]) -> V {
        let mut out = v.clone();
        for i in 0..self.dim {
            if !indices.contains(&i) {
                out[i] = 0.0;
            }
        }
        out
    }

    pub fn antisymmetry_residual(&self) -> f64 {
        let d = self.dim;
        let mut worst: f64 = 0.0;
        for k in 0..d {
            for i in 0..d {
                for j in 0..d {
                    worst = worst.max((self.structure_constant(k, i, j) + self.structure_constant(k, j, i)).abs());
                }
            }
        }
        worst
    }

    /// Largest violation of `Σ_m (c^m_{ij} c^l_{mk} + c^m_{jk} c^l_{mi} + c^m_{ki} c^l_{mj}) = 0`.
    pub fn jacobi_residual(&self) -> f64 {
        let d = self.dim;
        let c = |k, i, j| self.structure_constant(k, i, j);
        let mut worst: f64 = 0.0;
        for i in 0..d {
            for j in 0..d {
                for k in 0..d {
                    for l in 0..d {
                        let s: f64 = (0..d)
                            .map(|m| c(m, i, j) * c(l, m, k) + c(m, j, k) * c(l, m, i) + c(m, k, i) * c(l, m, j))
                            .sum();
                        worst = worst.max(s.abs());
                    }
                }
            }
        }
        worst
    }

    /// Largest entrywise gap between `e_i e_j − e_j e_i` and `Σ_k c^k_{ij} e_k`.
    pub fn commutator_residual(&self) -> f64 {
        let d = self.dim;
        let mut worst: f64 = 0.0;
        for i in 0..d {
            for j in 0..d {
                let comm = &self.basis[i] * &self.basis[j] - &self.basis[j] * &self.basis[i];
                let mut expected = DMatrix::zeros(self.n, self.n);
                for k in 0..d {
                    expected += &self.basis[k] * self.structure_constant(k, i, j);
                }
                worst = worst.max((comm - expected).amax());
            }
        }
        worst
    }

    /// Largest component violating `[k,k] ⊆ p`, `[p,k] ⊆ k`, `[p,p] ⊆ p` over basis pairs.
    pub fn splitting_residual(&self) -> f64 {
        let k = &self.subspace_k;
        let p = &self.subspace_p;
        let mut worst: f64 = 0.0;
        let mut check = |i: usize, j: usize, target: &[usize]| {
            let b = self.bracket(&AlgebraVector::unit(self.dim, i), &AlgebraVector::unit(self.dim, j));
            for (c, v) in b.iter().enumerate() {
                if !target.contains(&c) {
                    worst = worst.max(v.abs());
                }
            }
        };
        for &i in k {
            for &j in k {
                check(i, j, p);
            }
        }
        for &i in p {
            for &j in k {
                check(i, j, k);
            }
            for &j in p {
                check(i, j, p);
            }
        }
        worst
    }

    pub fn satisfies_splitting(&self) -> bool {
        self.splitting_residual() <= ALGEBRA_TOL
    }

    /// Violation of the group invariant for this algebra's group.
    pub fn group_residual(&self, g: &GroupElement) -> f64 {
        let m = &g.0;
        match self.kind {
            GroupKind::SpecialOrthogonal3 => {
                let orth = (m.transpose() * m - DMatrix::identity(3, 3)).amax();
                orth.max((m.determinant() - 1.0).abs())
            }
            GroupKind::SpecialEuclidean2 => {
                let r = m.view((0, 0), (2, 2)).into_owned();
                let orth = (r.transpose() * &r - DMatrix::identity(2, 2)).amax();
                let row = m[(2, 0)].abs().max(m[(2, 1)].abs()).max((m[(2, 2)] - 1.0).abs());
                orth.max((r.determinant() - 1.0).abs()).max(row)
            }
            GroupKind::General => 0.0,
        }
    }

    /// Nearest group element: polar projection of the rotation block.
    pub fn project_to_group(&self, g: &GroupElement) -> GroupElement {
        match self.kind {
            GroupKind::SpecialOrthogonal3 => GroupElement(nearest_rotation(&g.0)),
            GroupKind::SpecialEuclidean2 => {
                let mut out = g.0.clone();
                let r = nearest_rotation(&g.0.view((0, 0), (2, 2)).into_owned());
                out.view_mut((0, 0), (2, 2)).copy_from(&r);
                out[(2, 0)] = 0.0;
                out[(2, 1)] = 0.0;
                out[(2, 2)] = 1.0;
                GroupElement(out)
            }
            GroupKind::General => g.clone(),
        }
    }

    pub fn identity(&self) -> GroupElement {
        GroupElement::identity(self.n)
    }
}

fn nearest_rotation(m: &DMatrix<f64>) -> DMatrix<f64> {
    let svd = m.clone().svd(true, true);
    let u = svd.u.expect("requested U");
    let vt = svd.v_t.expect("requested V^T");
    let mut r = &u * &vt;
    if r.determinant() < 0.0 {
        let mut u = u;
        let last = u.ncols() - 1;
        u.column_mut(last).neg_mut();
        r = u * vt;
    }
    r
}
