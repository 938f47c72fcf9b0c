//! Small fixed-size operator algebra for a single qubit.
//!
//! Basis ordering is `|0>` (upper level: `|e>` or `|psi_+>`), `|1>` (lower
//! level). `sigma_z = diag(1, -1)`, `sigma_+ = |0><1|`, `sigma_- = |1><0|`.
//!
//! Superoperators act on the column-stacked vectorization of a 2x2 matrix:
//! `vec(X) = (X00, X10, X01, X11)` and `vec(A X B) = (B^T kron A) vec(X)`.

use nalgebra::{Matrix2, Matrix4, Vector4};
use num_complex::Complex64;

pub type C64 = Complex64;
pub type Op2 = Matrix2<C64>;
pub type Op4 = Matrix4<C64>;
pub type Vec4 = Vector4<C64>;

pub const ZERO: C64 = C64::new(0.0, 0.0);
pub const ONE: C64 = C64::new(1.0, 0.0);
pub const I: C64 = C64::new(0.0, 1.0);

pub fn c(re: f64) -> C64 {
    C64::new(re, 0.0)
}

pub fn identity() -> Op2 {
    Op2::identity()
}

pub fn sigma_x() -> Op2 {
    Op2::new(ZERO, ONE, ONE, ZERO)
}

pub fn sigma_y() -> Op2 {
    Op2::new(ZERO, -I, I, ZERO)
}

pub fn sigma_z() -> Op2 {
    Op2::new(ONE, ZERO, ZERO, -ONE)
}

/// Raising operator `|0><1|`.
pub fn sigma_plus() -> Op2 {
    Op2::new(ZERO, ONE, ZERO, ZERO)
}

/// Lowering operator `|1><0|`.
pub fn sigma_minus() -> Op2 {
    Op2::new(ZERO, ZERO, ONE, ZERO)
}

/// Column-stacking vectorization.
pub fn vec(x: &Op2) -> Vec4 {
    Vec4::new(x[(0, 0)], x[(1, 0)], x[(0, 1)], x[(1, 1)])
}

pub fn unvec(v: &Vec4) -> Op2 {
    Op2::new(v[0], v[2], v[1], v[3])
}

/// Matrix of `X -> A X B` in the column-stacking convention.
pub fn sandwich(a: &Op2, b: &Op2) -> Op4 {
    b.transpose().kronecker(a)
}

/// Matrix of `X -> A X`.
pub fn left(a: &Op2) -> Op4 {
    sandwich(a, &identity())
}

/// Matrix of `X -> X B`.
pub fn right(b: &Op2) -> Op4 {
    sandwich(&identity(), b)
}

pub fn hermiticity_defect(x: &Op2) -> f64 {
    (x - x.adjoint()).norm()
}

pub fn trace(x: &Op2) -> C64 {
    x[(0, 0)] + x[(1, 1)]
}

/// Eigenvalues of a 2x2 Hermitian matrix in ascending order (closed form).
pub fn hermitian_eigenvalues_2(x: &Op2) -> [f64; 2] {
    let a = x[(0, 0)].re;
    let d = x[(1, 1)].re;
    let b = 0.5 * (x[(0, 1)] + x[(1, 0)].conj());
    let mean = 0.5 * (a + d);
    let half = 0.5 * (a - d);
    let r = (half * half + b.norm_sqr()).sqrt();
    [mean - r, mean + r]
}

/// Trace norm of a 2x2 Hermitian matrix.
pub fn trace_norm_2(x: &Op2) -> f64 {
    hermitian_eigenvalues_2(x).iter().map(|l| l.abs()).sum()
}

/// Eigenvalues of a 4x4 Hermitian matrix (symmetric eigendecomposition).
pub fn hermitian_eigenvalues_4(x: &Op4) -> [f64; 4] {
    let h = (x + x.adjoint()) * c(0.5);
    let eig = h.symmetric_eigenvalues();
    [eig[0], eig[1], eig[2], eig[3]]
}

/// Trace norm of a 4x4 Hermitian matrix: the sum of absolute eigenvalues.
pub fn trace_norm_4(x: &Op4) -> f64 {
    hermitian_eigenvalues_4(x).iter().map(|l| l.abs()).sum()
}
