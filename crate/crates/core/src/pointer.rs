//! Pointer bases (eigenbases of the coupling operator) and dephasing in them.

use alloc::format;

#[allow(unused_imports)]
use num_traits::Float;

use crate::{Error, Operator2, Result, C64};

/// Minimum eigenvalue gap for a well-defined pointer basis.
const GAP_TOL: f64 = 1e-12;

/// Orthonormal eigenkets of a hermitian coupling operator.
///
/// `kets[0]` belongs to the larger eigenvalue. Each ket's largest-magnitude
/// amplitude is real and positive; on a tie the first amplitude wins.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PointerBasis {
    pub kets: [[C64; 2]; 2],
    pub eigenvalues: [f64; 2],
}

impl PointerBasis {
    /// Eigen-decomposition of a hermitian 2x2 operator.
    pub fn from_operator(x: &Operator2) -> Result<Self> {
        if !x.is_hermitian(1e-12) {
            return Err(Error::param("coupling", "operator is not hermitian"));
        }
        let eigenvalues = x.hermitian_eigenvalues();
        if eigenvalues[0] - eigenvalues[1] < GAP_TOL {
            return Err(Error::param("coupling", "degenerate coupling operator has no pointer basis"));
        }
        let a = x[(0, 0)].re;
        let d = x[(1, 1)].re;
        let b = x[(0, 1)];
        let kets = eigenvalues.map(|lam| {
            // two candidate null vectors of (X - lam); keep the better conditioned
            let u = [b, C64::from(lam - a)];
            let v = [C64::from(lam - d), b.conj()];
            let pick = if norm2(&u) >= norm2(&v) { u } else { v };
            fix_phase(normalize(pick))
        });
        Ok(PointerBasis { kets, eigenvalues })
    }

    /// `<p_i| A |p_j>`.
    pub fn element(&self, a: &Operator2, i: usize, j: usize) -> C64 {
        let (bra, ket) = (&self.kets[i], &self.kets[j]);
        let mut acc = C64::new(0.0, 0.0);
        for r in 0..2 {
            for c in 0..2 {
                acc += bra[r].conj() * a[(r, c)] * ket[c];
            }
        }
        acc
    }

    /// `|p_i><p_i|`.
    pub fn projector(&self, i: usize) -> Operator2 {
        let k = &self.kets[i];
        Operator2([
            [k[0] * k[0].conj(), k[0] * k[1].conj()],
            [k[1] * k[0].conj(), k[1] * k[1].conj()],
        ])
    }

    /// `sum_i x_i |p_i><p_i|`.
    pub fn reconstruct(&self) -> Operator2 {
        self.projector(0) * self.eigenvalues[0] + self.projector(1) * self.eigenvalues[1]
    }
}

fn norm2(v: &[C64; 2]) -> f64 {
    v[0].norm_sqr() + v[1].norm_sqr()
}

fn normalize(v: [C64; 2]) -> [C64; 2] {
    let n = norm2(&v).sqrt();
    v.map(|z| z / n)
}

fn fix_phase(v: [C64; 2]) -> [C64; 2] {
    let lead = if v[1].norm() > v[0].norm() + 1e-12 { v[1] } else { v[0] };
    let phase = lead.conj() / lead.norm();
    v.map(|z| z * phase)
}

/// Pointer basis of `X = ax sx + ay sy + az sz`.
pub fn pointer_basis(ax: f64, ay: f64, az: f64) -> Result<PointerBasis> {
    if !(ax.is_finite() && ay.is_finite() && az.is_finite()) {
        return Err(Error::param("coupling", format!("non-finite coefficients ({ax}, {ay}, {az})")));
    }
    if ax == 0.0 && ay == 0.0 && az == 0.0 {
        return Err(Error::param("coupling", "zero coupling vector, pointer basis undefined"));
    }
    PointerBasis::from_operator(&coupling_operator([ax, ay, az]))
}

/// `ax sx + ay sy + az sz`.
pub fn coupling_operator(a: [f64; 3]) -> Operator2 {
    Operator2::from_real_pauli([0.0, a[0], a[1], a[2]])
}

/// Dephases `rho` in the pointer basis: `sum_i |p_i><p_i| rho |p_i><p_i|`.
pub fn pointer_project(rho: &Operator2, basis: &PointerBasis) -> Result<Operator2> {
    rho.validate_density()?;
    Ok(project_unchecked(rho, basis))
}

pub(crate) fn project_unchecked(rho: &Operator2, basis: &PointerBasis) -> Operator2 {
    let mut out = Operator2::zero();
    for i in 0..2 {
        out += basis.projector(i) * basis.element(rho, i, i);
    }
    out
}

/// Density matrix elements in the pointer basis.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PointerElements {
    pub d1: f64,
    pub d2: f64,
    /// `<p_1| rho |p_2>`.
    pub offdiag: C64,
}

pub fn pointer_matrix_elements(rho: &Operator2, basis: &PointerBasis) -> Result<PointerElements> {
    rho.validate_density()?;
    Ok(elements_unchecked(rho, basis))
}

pub(crate) fn elements_unchecked(rho: &Operator2, basis: &PointerBasis) -> PointerElements {
    PointerElements {
        d1: basis.element(rho, 0, 0).re,
        d2: basis.element(rho, 1, 1).re,
        offdiag: basis.element(rho, 0, 1),
    }
}
