//! 2x2 complex operators and the Bloch-ball picture of qubit densities.

use core::fmt;
use core::ops::{Add, AddAssign, Index, IndexMut, Mul, Neg, Sub};

use alloc::format;

#[allow(unused_imports)]
use num_traits::Float;

use crate::{Error, Result, C64};

/// Trace tolerance for a valid density.
pub const TRACE_TOL: f64 = 1e-12;
/// Hermiticity tolerance for a valid density.
pub const HERMITIAN_TOL: f64 = 1e-12;
/// Most negative eigenvalue accepted in a valid density.
pub const EIGEN_TOL: f64 = 1e-10;
/// Slack on |r| <= 1.
pub const BLOCH_TOL: f64 = 1e-10;

const ZERO: C64 = C64 { re: 0.0, im: 0.0 };
const ONE: C64 = C64 { re: 1.0, im: 0.0 };
const I: C64 = C64 { re: 0.0, im: 1.0 };

/// A complex 2x2 matrix in row-major layout.
#[derive(Clone, Copy, PartialEq, Default)]
pub struct Operator2(pub [[C64; 2]; 2]);

impl fmt::Debug for Operator2 {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let m = &self.0;
        write!(f, "[[{}, {}], [{}, {}]]", m[0][0], m[0][1], m[1][0], m[1][1])
    }
}

impl Operator2 {
    pub const fn new(a: C64, b: C64, c: C64, d: C64) -> Self {
        Operator2([[a, b], [c, d]])
    }

    pub const fn zero() -> Self {
        Operator2([[ZERO, ZERO], [ZERO, ZERO]])
    }

    pub const fn identity() -> Self {
        Operator2([[ONE, ZERO], [ZERO, ONE]])
    }

    pub const fn sigma_x() -> Self {
        Operator2([[ZERO, ONE], [ONE, ZERO]])
    }

    pub const fn sigma_y() -> Self {
        Operator2([[ZERO, C64 { re: 0.0, im: -1.0 }], [I, ZERO]])
    }

    pub const fn sigma_z() -> Self {
        Operator2([[ONE, ZERO], [ZERO, C64 { re: -1.0, im: 0.0 }]])
    }

    /// `[I, sigma_x, sigma_y, sigma_z]`.
    pub const fn pauli_basis() -> [Operator2; 4] {
        [Self::identity(), Self::sigma_x(), Self::sigma_y(), Self::sigma_z()]
    }

    /// Builds `v0 I + vx sx + vy sy + vz sz` with complex coefficients.
    pub fn from_pauli(v: [C64; 4]) -> Self {
        Operator2([
            [v[0] + v[3], v[1] - I * v[2]],
            [v[1] + I * v[2], v[0] - v[3]],
        ])
    }

    /// Hermitian operator with real Pauli coefficients.
    pub fn from_real_pauli(v: [f64; 4]) -> Self {
        Self::from_pauli([v[0].into(), v[1].into(), v[2].into(), v[3].into()])
    }

    /// Coefficients `v_k = tr(sigma_k A) / 2`, the inverse of [`Self::from_pauli`].
    pub fn pauli_coords(&self) -> [C64; 4] {
        let m = &self.0;
        [
            (m[0][0] + m[1][1]) * 0.5,
            (m[0][1] + m[1][0]) * 0.5,
            (m[1][0] - m[0][1]) * 0.5 * (-I),
            (m[0][0] - m[1][1]) * 0.5,
        ]
    }

    /// Real parts of [`Self::pauli_coords`]; exact for hermitian operators.
    pub fn real_pauli_coords(&self) -> [f64; 4] {
        self.pauli_coords().map(|c| c.re)
    }

    pub fn dagger(&self) -> Self {
        let m = &self.0;
        Operator2([[m[0][0].conj(), m[1][0].conj()], [m[0][1].conj(), m[1][1].conj()]])
    }

    pub fn trace(&self) -> C64 {
        self.0[0][0] + self.0[1][1]
    }

    pub fn commutator(&self, other: &Self) -> Self {
        *self * *other - *other * *self
    }

    pub fn anticommutator(&self, other: &Self) -> Self {
        *self * *other + *other * *self
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.0.iter().flatten().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    /// Largest entrywise modulus of `self - other`.
    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        self.0
            .iter()
            .flatten()
            .zip(other.0.iter().flatten())
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }

    pub fn hermiticity_error(&self) -> f64 {
        self.max_abs_diff(&self.dagger())
    }

    pub fn is_hermitian(&self, tol: f64) -> bool {
        self.hermiticity_error() <= tol
    }

    /// Eigenvalues of the hermitian part, largest first.
    pub fn hermitian_eigenvalues(&self) -> [f64; 2] {
        let a = self.0[0][0].re;
        let d = self.0[1][1].re;
        let b = (self.0[0][1] + self.0[1][0].conj()) * 0.5;
        let mean = 0.5 * (a + d);
        let half_gap = (0.25 * (a - d) * (a - d) + b.norm_sqr()).sqrt();
        [mean + half_gap, mean - half_gap]
    }

    /// Checks hermiticity, unit trace and positivity.
    pub fn validate_density(&self) -> Result<()> {
        let herm = self.hermiticity_error();
        if !(herm <= HERMITIAN_TOL) {
            return Err(Error::state(format!("operator is not hermitian (error {herm:e})")));
        }
        let tr = self.trace();
        if !((tr - 1.0).norm() <= TRACE_TOL) {
            return Err(Error::state(format!("trace is {tr}, expected 1")));
        }
        let [_, low] = self.hermitian_eigenvalues();
        if low < -EIGEN_TOL {
            return Err(Error::state(format!("negative eigenvalue {low:e}")));
        }
        Ok(())
    }

    pub fn scale(&self, s: C64) -> Self {
        Operator2(self.0.map(|row| row.map(|z| z * s)))
    }
}

impl Index<(usize, usize)> for Operator2 {
    type Output = C64;
    fn index(&self, (r, c): (usize, usize)) -> &C64 {
        &self.0[r][c]
    }
}

impl IndexMut<(usize, usize)> for Operator2 {
    fn index_mut(&mut self, (r, c): (usize, usize)) -> &mut C64 {
        &mut self.0[r][c]
    }
}

impl Add for Operator2 {
    type Output = Self;
    fn add(self, rhs: Self) -> Self {
        let (a, b) = (self.0, rhs.0);
        Operator2([
            [a[0][0] + b[0][0], a[0][1] + b[0][1]],
            [a[1][0] + b[1][0], a[1][1] + b[1][1]],
        ])
    }
}

impl AddAssign for Operator2 {
    fn add_assign(&mut self, rhs: Self) {
        *self = *self + rhs;
    }
}

impl Sub for Operator2 {
    type Output = Self;
    fn sub(self, rhs: Self) -> Self {
        self + (-rhs)
    }
}

impl Neg for Operator2 {
    type Output = Self;
    fn neg(self) -> Self {
        Operator2(self.0.map(|row| row.map(|z| -z)))
    }
}

impl Mul for Operator2 {
    type Output = Self;
    fn mul(self, rhs: Self) -> Self {
        let (a, b) = (self.0, rhs.0);
        Operator2([
            [a[0][0] * b[0][0] + a[0][1] * b[1][0], a[0][0] * b[0][1] + a[0][1] * b[1][1]],
            [a[1][0] * b[0][0] + a[1][1] * b[1][0], a[1][0] * b[0][1] + a[1][1] * b[1][1]],
        ])
    }
}

impl Mul<C64> for Operator2 {
    type Output = Self;
    fn mul(self, rhs: C64) -> Self {
        self.scale(rhs)
    }
}

impl Mul<f64> for Operator2 {
    type Output = Self;
    fn mul(self, rhs: f64) -> Self {
        self.scale(rhs.into())
    }
}

/// Real 3-vector image of a qubit density, `rho = (I + r . sigma) / 2`.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct BlochVector {
    pub x: f64,
    pub y: f64,
    pub z: f64,
}

impl BlochVector {
    pub const ORIGIN: BlochVector = BlochVector { x: 0.0, y: 0.0, z: 0.0 };

    pub const fn new(x: f64, y: f64, z: f64) -> Self {
        BlochVector { x, y, z }
    }

    pub fn norm(&self) -> f64 {
        self.dot(self).sqrt()
    }

    pub fn dot(&self, other: &Self) -> f64 {
        self.x * other.x + self.y * other.y + self.z * other.z
    }

    pub fn distance(&self, other: &Self) -> f64 {
        (*self - *other).norm()
    }

    pub fn scaled(&self, s: f64) -> Self {
        BlochVector::new(self.x * s, self.y * s, self.z * s)
    }

    pub fn to_array(self) -> [f64; 3] {
        [self.x, self.y, self.z]
    }
}

impl From<[f64; 3]> for BlochVector {
    fn from(v: [f64; 3]) -> Self {
        BlochVector::new(v[0], v[1], v[2])
    }
}

impl Add for BlochVector {
    type Output = Self;
    fn add(self, o: Self) -> Self {
        BlochVector::new(self.x + o.x, self.y + o.y, self.z + o.z)
    }
}

impl Sub for BlochVector {
    type Output = Self;
    fn sub(self, o: Self) -> Self {
        BlochVector::new(self.x - o.x, self.y - o.y, self.z - o.z)
    }
}

/// `(I + r . sigma) / 2`.
pub fn density_from_bloch(r: BlochVector) -> Result<Operator2> {
    let len = r.norm();
    if !(len <= 1.0 + BLOCH_TOL) {
        return Err(Error::state(format!("Bloch vector length {len} exceeds 1")));
    }
    Ok(Operator2::from_real_pauli([0.5, 0.5 * r.x, 0.5 * r.y, 0.5 * r.z]))
}

/// `r_k = tr(rho sigma_k)` for a valid density.
pub fn bloch_from_density(rho: &Operator2) -> Result<BlochVector> {
    rho.validate_density()?;
    Ok(bloch_unchecked(rho))
}

/// Bloch components of any operator's hermitian part, without validation.
pub(crate) fn bloch_unchecked(rho: &Operator2) -> BlochVector {
    let v = rho.real_pauli_coords();
    BlochVector::new(2.0 * v[1], 2.0 * v[2], 2.0 * v[3])
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    #[test]
    fn maximally_mixed_from_origin() {
        let rho = density_from_bloch(BlochVector::ORIGIN).unwrap();
        assert!(rho.max_abs_diff(&(Operator2::identity() * 0.5)) < 1e-15);
    }

    #[test]
    fn x_eigenstate_has_all_entries_half() {
        let rho = density_from_bloch(BlochVector::new(1.0, 0.0, 0.0)).unwrap();
        for z in rho.0.iter().flatten() {
            assert!((z - c(0.5, 0.0)).norm() < 1e-15);
        }
    }

    #[test]
    fn gibbs_bloch_vector_maps_to_closed_form() {
        let t = (1.0f64 / 3.0).tanh();
        assert!((t - 0.321513).abs() < 1e-6);
        let rho = density_from_bloch(BlochVector::new(0.0, 0.0, -t)).unwrap();
        let expected = Operator2::new(c(0.5 * (1.0 - t), 0.0), c(0.0, 0.0), c(0.0, 0.0), c(0.5 * (1.0 + t), 0.0));
        assert!(rho.max_abs_diff(&expected) < 1e-15);
    }

    #[test]
    fn rejects_vector_outside_ball() {
        assert!(matches!(density_from_bloch(BlochVector::new(0.8, 0.7, 0.0)), Err(Error::InvalidState(_))));
    }

    #[test]
    fn bloch_of_simple_states() {
        let r = bloch_from_density(&(Operator2::identity() * 0.5)).unwrap();
        assert!(r.norm() < 1e-15);
        let up = Operator2::new(c(1.0, 0.0), c(0.0, 0.0), c(0.0, 0.0), c(0.0, 0.0));
        assert_eq!(bloch_from_density(&up).unwrap(), BlochVector::new(0.0, 0.0, 1.0));
    }

    #[test]
    fn bloch_of_general_density_matches_brute_force_trace() {
        let rho = Operator2::new(c(0.7, 0.0), c(0.3, 0.1), c(0.3, -0.1), c(0.3, 0.0));
        let r = bloch_from_density(&rho).unwrap();
        // brute force tr(rho sigma_k)
        let brute = [Operator2::sigma_x(), Operator2::sigma_y(), Operator2::sigma_z()]
            .map(|s| (rho * s).trace());
        for z in brute {
            assert!(z.im.abs() < 1e-15);
        }
        assert!((r.x - brute[0].re).abs() < 1e-15 && (r.x - 0.6).abs() < 1e-12);
        assert!((r.y - brute[1].re).abs() < 1e-15 && (r.y + 0.2).abs() < 1e-12);
        assert!((r.z - brute[2].re).abs() < 1e-15 && (r.z - 0.4).abs() < 1e-12);
    }

    #[test]
    fn bloch_rejects_bad_operators() {
        let non_herm = Operator2::new(c(0.5, 0.0), c(0.1, 0.0), c(0.0, 0.0), c(0.5, 0.0));
        assert!(bloch_from_density(&non_herm).is_err());
        assert!(bloch_from_density(&(Operator2::identity() * 0.6)).is_err());
    }

    #[test]
    fn pauli_algebra() {
        let (x, y, z) = (Operator2::sigma_x(), Operator2::sigma_y(), Operator2::sigma_z());
        assert!((x * y).max_abs_diff(&(z * I)) < 1e-15);
        assert!(x.commutator(&z).max_abs_diff(&(y * c(0.0, -2.0))) < 1e-15);
        assert!(x.anticommutator(&x).max_abs_diff(&(Operator2::identity() * 2.0)) < 1e-15);
        let v = [c(0.1, 0.2), c(-0.3, 0.0), c(0.4, -0.5), c(0.0, 0.7)];
        let back = Operator2::from_pauli(v).pauli_coords();
        for k in 0..4 {
            assert!((back[k] - v[k]).norm() < 1e-15);
        }
    }
}
