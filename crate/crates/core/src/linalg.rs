//! Small dense operators and the phase-insensitive comparisons used
//! throughout the crate.
//!
//! Multi-qubit matrices use the same little-endian layout as state vectors:
//! in a matrix acting on sites `[a, b]`, row/column index `i` has the bit of
//! site `a` in position 0 and the bit of site `b` in position 1.

use std::f64::consts::{FRAC_1_SQRT_2, PI};

use nalgebra::DMatrix;
use num_complex::Complex64;

pub type C64 = Complex64;
pub type Matrix = DMatrix<C64>;

/// π/8, the unit from which every canonical angle is built.
pub const PI_8: f64 = PI / 8.0;

pub const ZERO: C64 = C64::new(0.0, 0.0);
pub const ONE: C64 = C64::new(1.0, 0.0);
pub const I: C64 = C64::new(0.0, 1.0);

/// `e^{i phi}`.
#[inline]
pub fn cis(phi: f64) -> C64 {
    let (s, c) = phi.sin_cos();
    C64::new(c, s)
}

pub fn identity(dim: usize) -> Matrix {
    Matrix::identity(dim, dim)
}

pub fn from_rows(dim: usize, entries: &[C64]) -> Matrix {
    assert_eq!(entries.len(), dim * dim);
    Matrix::from_row_slice(dim, dim, entries)
}

pub fn hadamard() -> Matrix {
    let h = C64::new(FRAC_1_SQRT_2, 0.0);
    from_rows(2, &[h, h, h, -h])
}

pub fn pauli_x() -> Matrix {
    from_rows(2, &[ZERO, ONE, ONE, ZERO])
}

pub fn pauli_y() -> Matrix {
    from_rows(2, &[ZERO, -I, I, ZERO])
}

pub fn pauli_z() -> Matrix {
    from_rows(2, &[ONE, ZERO, ZERO, -ONE])
}

/// `R_z(theta) = exp(-i theta Z / 2)`.
pub fn rz(theta: f64) -> Matrix {
    from_rows(2, &[cis(-theta / 2.0), ZERO, ZERO, cis(theta / 2.0)])
}

/// `Z^s`.
pub fn z_power(s: bool) -> Matrix {
    if s {
        pauli_z()
    } else {
        identity(2)
    }
}

/// `exp(i phi Z)` on one qubit.
pub fn z_phase(phi: f64) -> Matrix {
    from_rows(2, &[cis(phi), ZERO, ZERO, cis(-phi)])
}

/// Two-qubit operator acting as `first` on the lower site and `second` on
/// the higher one.
pub fn tensor(first: &Matrix, second: &Matrix) -> Matrix {
    second.kronecker(first)
}

pub fn cz() -> Matrix {
    Matrix::from_diagonal(&nalgebra::DVector::from_vec(vec![ONE, ONE, ONE, -ONE]))
}

/// `exp(i phi Z⊗Z)`.
pub fn zz_phase(phi: f64) -> Matrix {
    Matrix::from_diagonal(&nalgebra::DVector::from_vec(vec![cis(phi), cis(-phi), cis(-phi), cis(phi)]))
}

/// Largest entry of `|U†U − I|`.
pub fn unitarity_deviation(u: &Matrix) -> f64 {
    let dim = u.nrows();
    let product = u.adjoint() * u;
    let mut worst = 0.0f64;
    for r in 0..dim {
        for c in 0..dim {
            let target = if r == c { ONE } else { ZERO };
            worst = worst.max((product[(r, c)] - target).norm());
        }
    }
    worst
}

pub fn is_unitary(u: &Matrix, tol: f64) -> bool {
    u.is_square() && unitarity_deviation(u) <= tol
}

/// Normalized Hilbert–Schmidt overlap `|tr(A†B)| / (‖A‖_F ‖B‖_F)`.
///
/// Equals 1 exactly when `B` is a nonzero scalar multiple of `A`, so it
/// compares operators up to global phase (and normalization).
pub fn phase_fidelity(a: &Matrix, b: &Matrix) -> f64 {
    assert_eq!(a.shape(), b.shape());
    let overlap: C64 = a.iter().zip(b.iter()).map(|(x, y)| x.conj() * y).sum();
    let na = a.iter().map(|x| x.norm_sqr()).sum::<f64>().sqrt();
    let nb = b.iter().map(|x| x.norm_sqr()).sum::<f64>().sqrt();
    if na == 0.0 || nb == 0.0 {
        return 0.0;
    }
    (overlap.norm() / (na * nb)).min(1.0)
}

/// `|⟨u|v⟩| / (‖u‖ ‖v‖)` for state vectors.
pub fn vector_fidelity(u: &[C64], v: &[C64]) -> f64 {
    assert_eq!(u.len(), v.len());
    let overlap: C64 = u.iter().zip(v).map(|(x, y)| x.conj() * y).sum();
    let nu = u.iter().map(|x| x.norm_sqr()).sum::<f64>().sqrt();
    let nv = v.iter().map(|x| x.norm_sqr()).sum::<f64>().sqrt();
    if nu == 0.0 || nv == 0.0 {
        return 0.0;
    }
    (overlap.norm() / (nu * nv)).min(1.0)
}

/// Largest entry-wise deviation `max |A_ij − B_ij|`.
pub fn max_abs_diff(a: &Matrix, b: &Matrix) -> f64 {
    assert_eq!(a.shape(), b.shape());
    a.iter().zip(b.iter()).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max)
}

/// Reduces an angle to `[0, 2π)`.
pub fn wrap_angle(theta: f64) -> f64 {
    let two_pi = 2.0 * PI;
    let r = theta.rem_euclid(two_pi);
    if (two_pi - r).abs() < 1e-15 {
        0.0
    } else {
        r
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rz_of_pi_is_z_up_to_phase() {
        assert!(phase_fidelity(&rz(PI), &pauli_z()) > 1.0 - 1e-14);
    }

    #[test]
    fn rz_two_pi_is_minus_identity() {
        assert!(max_abs_diff(&rz(2.0 * PI), &(-identity(2))) < 1e-15);
    }

    #[test]
    fn tensor_places_first_factor_on_low_bit() {
        let xi = tensor(&pauli_x(), &identity(2));
        // |00> -> |01> in little-endian means index 0 -> index 1.
        assert_eq!(xi[(1, 0)], ONE);
        assert_eq!(xi[(2, 0)], ZERO);
    }

    #[test]
    fn gates_are_unitary() {
        for u in [hadamard(), pauli_x(), pauli_y(), pauli_z(), rz(0.3), cz(), zz_phase(0.7)] {
            assert!(is_unitary(&u, 1e-14));
        }
        let bad = from_rows(2, &[ONE, ONE, ZERO, ONE]);
        assert!(!is_unitary(&bad, 1e-10));
    }

    #[test]
    fn wrap_angle_reduces() {
        assert!((wrap_angle(PI_8 - PI / 2.0) - (PI_8 + 1.5 * PI)).abs() < 1e-12);
        assert_eq!(wrap_angle(2.0 * PI), 0.0);
    }
}
