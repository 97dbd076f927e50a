//! Commutator super-operators and their real matrices in the Pauli basis.

use crate::bath::KernelExpansion;
use crate::{Operator2, C64};

/// `S- A = [X, A]`.
pub fn apply_s_minus(a: &Operator2, x: &Operator2) -> Operator2 {
    x.commutator(a)
}

/// `S+ A = {X, A}`.
pub fn apply_s_plus(a: &Operator2, x: &Operator2) -> Operator2 {
    x.anticommutator(a)
}

/// `G_j A = Re(c_j) S- A + i Im(c_j) S+ A` for `j` in `{1, 2}`.
pub fn apply_g(j: usize, a: &Operator2, e: &KernelExpansion, x: &Operator2) -> Operator2 {
    let c = e.coefficient(j);
    apply_s_minus(a, x) * c.re + apply_s_plus(a, x) * C64::new(0.0, c.im)
}

/// Real 4x4 matrix acting on Pauli coordinates `(v0, vx, vy, vz)` of
/// `v0 I + v . sigma`.
pub(crate) type PauliMatrix = [[f64; 4]; 4];
pub(crate) type PauliVec = [f64; 4];

/// Matrix of a linear map that sends hermitian operators to hermitian
/// operators. Returns `None` if it does not.
pub(crate) fn pauli_matrix(map: impl Fn(&Operator2) -> Operator2) -> Option<PauliMatrix> {
    let mut m = [[0.0; 4]; 4];
    for (col, sigma) in Operator2::pauli_basis().iter().enumerate() {
        let image = map(sigma).pauli_coords();
        for row in 0..4 {
            if image[row].im.abs() > 1e-13 * (1.0 + image[row].re.abs()) {
                return None;
            }
            m[row][col] = image[row].re;
        }
    }
    Some(m)
}

#[inline(always)]
pub(crate) fn matvec(m: &PauliMatrix, v: &PauliVec) -> PauliVec {
    let mut out = [0.0; 4];
    for (o, row) in out.iter_mut().zip(m) {
        *o = row[0] * v[0] + row[1] * v[1] + row[2] * v[2] + row[3] * v[3];
    }
    out
}
