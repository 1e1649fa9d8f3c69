//! Elastic bulk energy, Griffith and relaxed Griffith energies.

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};
use crate::fields::field::DeformationField;
use crate::grid::Edge;
use crate::linalg::{dist_sq_to_so2, Mat2};
use crate::scalar::{tree_sum, Scalar};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct EnergyBreakdown<T> {
    /// `(1/ε)·∫ dist²(∇y, SO(2))`.
    pub bulk: T,
    /// `H¹(J_y)` on the region.
    pub surface: T,
    /// `∫_{J_y} f_ε^ρ(|[y]|)` when a `ρ` was supplied.
    pub relaxed_surface: Option<T>,
    pub epsilon: T,
    pub rho: Option<T>,
}

impl<T: Scalar> EnergyBreakdown<T> {
    /// `E_ε = bulk + surface`.
    pub fn total(&self) -> T {
        self.bulk + self.surface
    }

    /// `E_ε^ρ = bulk + relaxed surface` (falls back to the sharp surface term).
    pub fn relaxed_total(&self) -> T {
        self.bulk + self.relaxed_surface.unwrap_or(self.surface)
    }
}

/// Per-cell `dist²(∇y, SO(2))` (0 on inactive cells).
pub fn energy_density<T: Scalar>(f: &DeformationField<T>) -> Vec<T> {
    (0..f.cell_count())
        .map(|c| f.gradient(c).and_then(dist_sq_to_so2).unwrap_or_else(T::zero))
        .collect()
}

/// `∫_Q dist²(∇y, SO(2))` by the midpoint rule over active cells of `region`
/// (`None` = every cell).
pub fn cell_energy<T: Scalar>(f: &DeformationField<T>, region: Option<&[bool]>) -> T {
    let h2 = f.h() * f.h();
    let vals: Vec<T> = (0..f.cell_count())
        .filter(|&c| region.map_or(true, |r| r[c]))
        .filter_map(|c| f.gradient(c).and_then(dist_sq_to_so2))
        .map(|d| d * h2)
        .collect();
    tree_sum(&vals)
}

/// `f_ε^ρ(x) = min{x/(√ε ρ), 1}`.
#[inline]
pub fn relaxed_density<T: Scalar>(x: T, eps: T, rho: T) -> T {
    (x / (eps.sqrt() * rho)).min(T::one())
}

pub fn griffith_energy<T: Scalar>(f: &DeformationField<T>, eps: T) -> Result<EnergyBreakdown<T>> {
    if !(eps > T::zero()) {
        return Err(invalid("epsilon must be positive"));
    }
    Ok(EnergyBreakdown {
        bulk: cell_energy(f, None) / eps,
        surface: f.jump_length(),
        relaxed_surface: None,
        epsilon: eps,
        rho: None,
    })
}

/// Jump edges with both neighbouring cells in `region`.
pub fn jump_edges_in<'a, T: Scalar>(
    f: &'a DeformationField<T>,
    region: Option<&'a [bool]>,
) -> impl Iterator<Item = usize> + 'a {
    let (nx, ny) = (f.nx(), f.ny());
    f.jumps.edges.iter().copied().filter(move |&e| match region {
        None => true,
        Some(r) => {
            let (a, b) = Edge::from_id(e, nx, ny).cells(nx, ny);
            a.map_or(false, |a| r[a]) && b.map_or(false, |b| r[b])
        }
    })
}

/// `E_ε^ρ(y, U)`: bulk on `U` plus the relaxed surface density on jump edges
/// inside `U`; also carries the sharp surface term on `U`.
pub fn relaxed_energy<T: Scalar>(
    f: &DeformationField<T>,
    eps: T,
    rho: T,
    region: Option<&[bool]>,
) -> Result<EnergyBreakdown<T>> {
    if !(eps > T::zero() && rho > T::zero()) {
        return Err(invalid("epsilon and rho must be positive"));
    }
    let h = f.h();
    let edges: Vec<usize> = jump_edges_in(f, region).collect();
    let relaxed: Vec<T> = edges.iter().map(|&e| relaxed_density(f.jump_amplitude(e), eps, rho) * h).collect();
    Ok(EnergyBreakdown {
        bulk: cell_energy(f, region) / eps,
        surface: T::from_count(edges.len()) * h,
        relaxed_surface: Some(tree_sum(&relaxed)),
        epsilon: eps,
        rho: Some(rho),
    })
}

/// `ē_R(F) = (RᵀF + FᵀR)/2 − Id`.
pub fn linear_strain<T: Scalar>(f: Mat2<T>, r: Mat2<T>) -> Result<Mat2<T>> {
    if !r.is_rotation(T::lit(1e-10)) {
        return Err(invalid("linear strain needs a rotation"));
    }
    Ok((r.transpose() * f).sym() - Mat2::identity())
}
