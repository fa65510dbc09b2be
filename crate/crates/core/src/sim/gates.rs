//! Standard gate matrices.
//!
//! Rotations use the convention `R_P(θ) = exp(−iθP/2)`. Two-qubit matrices
//! are indexed by `2·b_hi + b_lo`.

use nalgebra::{Matrix2, Matrix4};
use num_complex::Complex64 as C64;

const ZERO: C64 = C64::new(0.0, 0.0);
const ONE: C64 = C64::new(1.0, 0.0);

pub fn identity2() -> Matrix2<C64> {
    Matrix2::identity()
}

pub fn hadamard() -> Matrix2<C64> {
    let h = C64::new(std::f64::consts::FRAC_1_SQRT_2, 0.0);
    Matrix2::new(h, h, h, -h)
}

pub fn pauli_x() -> Matrix2<C64> {
    Matrix2::new(ZERO, ONE, ONE, ZERO)
}

pub fn pauli_y() -> Matrix2<C64> {
    Matrix2::new(ZERO, C64::new(0.0, -1.0), C64::new(0.0, 1.0), ZERO)
}

pub fn pauli_z() -> Matrix2<C64> {
    Matrix2::new(ONE, ZERO, ZERO, -ONE)
}

pub fn rx(theta: f64) -> Matrix2<C64> {
    let (s, c) = (theta / 2.0).sin_cos();
    Matrix2::new(C64::new(c, 0.0), C64::new(0.0, -s), C64::new(0.0, -s), C64::new(c, 0.0))
}

pub fn ry(theta: f64) -> Matrix2<C64> {
    let (s, c) = (theta / 2.0).sin_cos();
    Matrix2::new(C64::new(c, 0.0), C64::new(-s, 0.0), C64::new(s, 0.0), C64::new(c, 0.0))
}

pub fn rz(theta: f64) -> Matrix2<C64> {
    Matrix2::new(
        C64::from_polar(1.0, -theta / 2.0),
        ZERO,
        ZERO,
        C64::from_polar(1.0, theta / 2.0),
    )
}

/// `R_Z(θ₃) R_Y(θ₂) R_Z(θ₁)`: the general single-qubit rotation layer element.
pub fn r3(theta1: f64, theta2: f64, theta3: f64) -> Matrix2<C64> {
    rz(theta3) * ry(theta2) * rz(theta1)
}

fn pauli_pair_rotation(p: Matrix2<C64>, theta: f64) -> Matrix4<C64> {
    let pp = p.kronecker(&p);
    let (s, c) = (theta / 2.0).sin_cos();
    Matrix4::identity() * C64::new(c, 0.0) - pp * C64::new(0.0, s)
}

pub fn rxx(theta: f64) -> Matrix4<C64> {
    pauli_pair_rotation(pauli_x(), theta)
}

pub fn ryy(theta: f64) -> Matrix4<C64> {
    pauli_pair_rotation(pauli_y(), theta)
}

pub fn rzz(theta: f64) -> Matrix4<C64> {
    pauli_pair_rotation(pauli_z(), theta)
}

/// `exp(iθ|11⟩⟨11|)`.
pub fn cz_theta(theta: f64) -> Matrix4<C64> {
    let mut m = Matrix4::identity();
    m[(3, 3)] = C64::from_polar(1.0, theta);
    m
}

/// `exp(iθ |1⟩⟨1| ⊗ |−⟩⟨−|)` with the control as the high bit.
pub fn cx_theta(theta: f64) -> Matrix4<C64> {
    let h = Matrix2::identity().kronecker(&hadamard());
    h * cz_theta(theta) * h
}

pub fn swap() -> Matrix4<C64> {
    let mut m = Matrix4::zeros();
    m[(0, 0)] = ONE;
    m[(1, 2)] = ONE;
    m[(2, 1)] = ONE;
    m[(3, 3)] = ONE;
    m
}

pub(crate) fn to_array2(u: &Matrix2<C64>) -> [[C64; 2]; 2] {
    [[u[(0, 0)], u[(0, 1)]], [u[(1, 0)], u[(1, 1)]]]
}

pub(crate) fn to_array4(u: &Matrix4<C64>) -> [[C64; 4]; 4] {
    let mut out = [[ZERO; 4]; 4];
    for (r, row) in out.iter_mut().enumerate() {
        for (c, v) in row.iter_mut().enumerate() {
            *v = u[(r, c)];
        }
    }
    out
}

/// Largest entry of `|u†u − I|`.
pub fn unitarity_defect<const D: usize>(u: &nalgebra::SMatrix<C64, D, D>) -> f64
where
    nalgebra::Const<D>: nalgebra::DimName,
{
    let prod = u.adjoint() * u;
    let mut worst = 0.0f64;
    for r in 0..D {
        for c in 0..D {
            let target = if r == c { ONE } else { ZERO };
            worst = worst.max((prod[(r, c)] - target).norm());
        }
    }
    worst
}
