//! Index-naive right-hand side of the hierarchy, written straight from the
//! equation with complex 2x2 products and a map from `(n1, n2)` to members.

use alloc::collections::BTreeMap;
use alloc::vec::Vec;

use crate::heom::HierarchyState;
use crate::{Operator2, C64};

/// Derivative of every member of `state`, in layout order.
pub fn naive_derivative(state: &HierarchyState) -> Vec<Operator2> {
    let layout = state.layout();
    let depth = state.depth();
    let e = state.kernel();
    let (h, x) = (state.hamiltonian(), state.coupling());
    let z: BTreeMap<(usize, usize), Operator2> =
        state.ados().into_iter().enumerate().map(|(k, a)| (layout.indices(k), a)).collect();

    let i = C64::new(0.0, 1.0);
    let lambda = e.params.lambda;
    let get = |n1: usize, n2: usize| z.get(&(n1, n2)).copied().unwrap_or_else(Operator2::zero);
    let comm = |a: &Operator2, b: &Operator2| *a * *b - *b * *a;
    let anti = |a: &Operator2, b: &Operator2| *a * *b + *b * *a;
    let g = |c: C64, a: &Operator2| comm(x, a) * c.re + anti(x, a) * (i * c.im);

    let mut out = BTreeMap::new();
    for n1 in 0..=depth {
        for n2 in 0..=depth - n1 {
            let zeta = get(n1, n2);
            let mut d = comm(h, &zeta) * (-i);
            d = d - zeta * (e.gamma1 * n1 as f64 + e.gamma2 * n2 as f64);
            d = d - comm(x, &comm(x, &zeta)) * (lambda * e.c0);
            if n1 > 0 {
                d = d - g(e.c1, &get(n1 - 1, n2)) * (i * n1 as f64);
            }
            if n2 > 0 {
                d = d - g(C64::from(e.c2), &get(n1, n2 - 1)) * (i * n2 as f64);
            }
            if n1 + n2 < depth {
                let above = get(n1 + 1, n2) + get(n1, n2 + 1);
                d = d - comm(x, &above) * (i * lambda);
            }
            out.insert((n1, n2), d);
        }
    }
    (0..layout.len()).map(|k| out[&layout.indices(k)]).collect()
}
