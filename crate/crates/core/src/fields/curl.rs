//! Discrete curl of the cell-gradient field.

use crate::fields::energy::jump_edges_in;
use crate::fields::field::DeformationField;
use crate::linalg::{Mat2, Vec2};
use crate::scalar::{tree_sum, Scalar};

/// Circulation of the cell gradients around the dual plaquette of interior
/// node `(i, j)`: the loop through the centres of the four cells sharing the
/// node, with the trapezoid rule on each leg.
fn circulation<T: Scalar>(g: [Mat2<T>; 4], h: T) -> Vec2<T> {
    let [sw, se, ne, nw] = g;
    let half = T::half();
    let e1 = Vec2::new(h, T::zero());
    let e2 = Vec2::new(T::zero(), h);
    (sw + se).scale(half) * e1 + (se + ne).scale(half) * e2 - (ne + nw).scale(half) * e1 - (nw + sw).scale(half) * e2
}

/// Per-node circulation magnitudes at interior nodes whose four cells are
/// active and inside `region`; `None` elsewhere.
pub fn curl_density<T: Scalar>(f: &DeformationField<T>, region: Option<&[bool]>) -> Vec<Option<T>> {
    let (nx, ny) = (f.nx(), f.ny());
    let h = f.h();
    let inside = |c: usize| f.active[c] && region.map_or(true, |r| r[c]);
    let mut out = vec![None; (nx + 1) * (ny + 1)];
    for j in 1..ny {
        for i in 1..nx {
            let cells = [(j - 1) * nx + i - 1, (j - 1) * nx + i, j * nx + i, j * nx + i - 1];
            if !cells.iter().all(|&c| inside(c)) {
                continue;
            }
            let g = cells.map(|c| f.gradient(c).expect("active"));
            out[j * (nx + 1) + i] = Some(circulation(g, h).norm());
        }
    }
    out
}

/// `|curl ∇y|(region)`: total variation of the discrete curl.
pub fn curl_defect<T: Scalar>(f: &DeformationField<T>, region: Option<&[bool]>) -> T {
    let vals: Vec<T> = curl_density(f, region).into_iter().flatten().collect();
    tree_sum(&vals)
}

/// Curl defect together with the ratio `C = defect / (‖∇y‖_∞·H¹(J_y ∩ region))`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CurlReport<T> {
    pub defect: T,
    pub grad_bound: T,
    pub jump_length: T,
    /// `None` when the region holds no jump.
    pub ratio: Option<T>,
}

pub fn curl_report<T: Scalar>(f: &DeformationField<T>, region: Option<&[bool]>) -> CurlReport<T> {
    let defect = curl_defect(f, region);
    let grad_bound = f.grad_bound();
    let jump_length = T::from_count(jump_edges_in(f, region).count()) * f.h();
    let denom = grad_bound * jump_length;
    CurlReport { defect, grad_bound, jump_length, ratio: (denom > T::zero()).then(|| defect / denom) }
}
