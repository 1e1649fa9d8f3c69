use std::collections::VecDeque;

use crate::error::{invalid, Result};
use crate::grid::lattice::{Edge, Lattice};
use crate::grid::measures;
use crate::scalar::Scalar;

const NONE: u32 = u32::MAX;

/// One complement component `X` of a grid set. Cells are sorted; a
/// component need not be connected after set arithmetic.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Component {
    pub cells: Vec<usize>,
    pub touches_boundary: bool,
}

impl Component {
    pub fn min_cell(&self) -> usize {
        self.cells.first().copied().unwrap_or(usize::MAX)
    }
}

/// A set of lattice cells together with the labelled components of its
/// complement inside the window and an explicit order on them.
#[derive(Clone, Debug, PartialEq)]
pub struct GridSet<T> {
    pub lattice: Lattice<T>,
    pub mask: Vec<bool>,
    pub components: Vec<Component>,
    pub ordering: Vec<usize>,
    label: Vec<u32>,
}

/// Boundary data of a single component under its set's ordering.
#[derive(Clone, Debug)]
pub struct BoundaryComponent {
    pub component: usize,
    /// Edge ids of `Γ = ∂X`, sorted.
    pub gamma: Vec<usize>,
    /// Edge ids of `Θ = Γ \ ⋃_{earlier} Γ`, sorted.
    pub theta: Vec<usize>,
    pub interior: bool,
}

/// 4-connected components of the cells selected by `select`, ordered by
/// smallest cell index. Each list is sorted.
pub fn connected_components(nx: usize, ny: usize, select: &[bool]) -> Vec<Vec<usize>> {
    let mut seen = vec![false; nx * ny];
    let mut out = Vec::new();
    let mut queue = VecDeque::new();
    for start in 0..nx * ny {
        if !select[start] || seen[start] {
            continue;
        }
        let mut cells = Vec::new();
        seen[start] = true;
        queue.push_back(start);
        while let Some(c) = queue.pop_front() {
            cells.push(c);
            let (i, j) = (c % nx, c / nx);
            let nb = [
                (i > 0).then(|| c - 1),
                (i + 1 < nx).then(|| c + 1),
                (j > 0).then(|| c - nx),
                (j + 1 < ny).then(|| c + nx),
            ];
            for n in nb.into_iter().flatten() {
                if select[n] && !seen[n] {
                    seen[n] = true;
                    queue.push_back(n);
                }
            }
        }
        cells.sort_unstable();
        out.push(cells);
    }
    out
}

impl<T: Scalar> GridSet<T> {
    /// Grid set whose complement components are the 4-connected components
    /// of `!mask`, in canonical order.
    pub fn extract_components(mask: Vec<bool>, lattice: Lattice<T>) -> Result<Self> {
        if mask.len() != lattice.cell_count() {
            return Err(invalid(format!(
                "mask has {} cells, lattice has {}",
                mask.len(),
                lattice.cell_count()
            )));
        }
        let complement: Vec<bool> = mask.iter().map(|&m| !m).collect();
        let components = connected_components(lattice.nx, lattice.ny, &complement)
            .into_iter()
            .map(|cells| {
                let touches_boundary = cells.iter().any(|&c| lattice.on_ring(c));
                Component { cells, touches_boundary }
            })
            .collect::<Vec<_>>();
        let mut set = Self::unordered(lattice, mask, components);
        set.ordering = set.canonical_ordering();
        Ok(set)
    }

    /// Validated constructor from explicit components and ordering.
    pub fn from_parts(
        lattice: Lattice<T>,
        mask: Vec<bool>,
        components: Vec<Vec<usize>>,
        ordering: Option<Vec<usize>>,
    ) -> Result<Self> {
        let n = lattice.cell_count();
        if mask.len() != n {
            return Err(invalid("mask size does not match lattice"));
        }
        let mut owner = vec![NONE; n];
        let mut comps = Vec::with_capacity(components.len());
        for (k, mut cells) in components.into_iter().enumerate() {
            cells.sort_unstable();
            cells.dedup();
            if cells.is_empty() {
                return Err(invalid(format!("component {k} is empty")));
            }
            for &c in &cells {
                if c >= n || mask[c] || owner[c] != NONE {
                    return Err(invalid(format!("component {k} is not disjoint from the set or other components")));
                }
                owner[c] = k as u32;
            }
            let touches_boundary = cells.iter().any(|&c| lattice.on_ring(c));
            comps.push(Component { cells, touches_boundary });
        }
        if (0..n).any(|c| !mask[c] && owner[c] == NONE) {
            return Err(invalid("components do not cover the complement"));
        }
        let mut set = Self::unordered(lattice, mask, comps);
        match ordering {
            Some(ord) => set.set_ordering(ord)?,
            None => set.ordering = set.canonical_ordering(),
        }
        Ok(set)
    }

    pub(crate) fn unordered(lattice: Lattice<T>, mask: Vec<bool>, components: Vec<Component>) -> Self {
        let mut label = vec![NONE; lattice.cell_count()];
        for (k, comp) in components.iter().enumerate() {
            for &c in &comp.cells {
                label[c] = k as u32;
            }
        }
        let ordering = (0..components.len()).collect();
        Self { lattice, mask, components, ordering, label }
    }

    /// Replace the ordering; interior components must precede boundary ones.
    pub fn set_ordering(&mut self, ordering: Vec<usize>) -> Result<()> {
        let n = self.components.len();
        let mut seen = vec![false; n];
        for &k in &ordering {
            if k >= n || seen[k] {
                return Err(invalid("ordering is not a permutation of the components"));
            }
            seen[k] = true;
        }
        if ordering.len() != n {
            return Err(invalid("ordering is not a permutation of the components"));
        }
        let first_boundary = ordering
            .iter()
            .position(|&k| self.components[k].touches_boundary)
            .unwrap_or(n);
        if ordering[first_boundary..].iter().any(|&k| !self.components[k].touches_boundary) {
            return Err(invalid("interior components must precede boundary components"));
        }
        self.ordering = ordering;
        Ok(())
    }

    /// Interior components by (|Γ|_∞ descending, smallest cell), then boundary
    /// components by smallest cell.
    pub fn canonical_ordering(&self) -> Vec<usize> {
        let mut interior: Vec<(u64, usize, usize)> = Vec::new();
        let mut boundary: Vec<(usize, usize)> = Vec::new();
        for (k, comp) in self.components.iter().enumerate() {
            if comp.touches_boundary {
                boundary.push((comp.min_cell(), k));
            } else {
                let (p1, p2) = measures::projection_counts(&self.lattice, &self.gamma(k));
                interior.push(((p1 * p1 + p2 * p2) as u64, comp.min_cell(), k));
            }
        }
        interior.sort_by(|a, b| b.0.cmp(&a.0).then(a.1.cmp(&b.1)));
        boundary.sort();
        interior.into_iter().map(|t| t.2).chain(boundary.into_iter().map(|t| t.1)).collect()
    }

    /// Component owning a complement cell.
    pub fn component_of(&self, cell: usize) -> Option<usize> {
        let l = self.label[cell];
        (l != NONE).then_some(l as usize)
    }

    /// Component ids of interior components in ordering.
    pub fn interior(&self) -> impl Iterator<Item = usize> + '_ {
        self.ordering.iter().copied().filter(|&k| !self.components[k].touches_boundary)
    }

    /// `Γ = ∂X` as sorted edge ids, including window-boundary edges of `X`.
    pub fn gamma(&self, k: usize) -> Vec<usize> {
        let lat = &self.lattice;
        let (nx, ny) = (lat.nx, lat.ny);
        let me = k as u32;
        let mut edges = Vec::new();
        for &c in &self.components[k].cells {
            let (i, j) = lat.ij(c);
            let (iu, ju) = (i as u32, j as u32);
            if j == 0 || self.label[c - nx] != me {
                edges.push(Edge::H { i: iu, j: ju }.id(nx, ny));
            }
            if j + 1 == ny || self.label[c + nx] != me {
                edges.push(Edge::H { i: iu, j: ju + 1 }.id(nx, ny));
            }
            if i == 0 || self.label[c - 1] != me {
                edges.push(Edge::V { i: iu, j: ju }.id(nx, ny));
            }
            if i + 1 == nx || self.label[c + 1] != me {
                edges.push(Edge::V { i: iu + 1, j: ju }.id(nx, ny));
            }
        }
        edges.sort_unstable();
        edges
    }

    /// Boundary data for every component, indexed by component id.
    pub fn boundary_components(&self) -> Vec<BoundaryComponent> {
        let ne = Edge::count(self.lattice.nx, self.lattice.ny);
        let mut claimed = vec![false; ne];
        let mut out: Vec<Option<BoundaryComponent>> = vec![None; self.components.len()];
        for &k in &self.ordering {
            let gamma = self.gamma(k);
            let theta: Vec<usize> = gamma.iter().copied().filter(|&e| !claimed[e]).collect();
            for &e in &gamma {
                claimed[e] = true;
            }
            out[k] = Some(BoundaryComponent {
                component: k,
                gamma,
                theta,
                interior: !self.components[k].touches_boundary,
            });
        }
        out.into_iter().map(|b| b.expect("ordering covers all components")).collect()
    }

    pub fn cell_count(&self) -> usize {
        self.mask.iter().filter(|&&m| m).count()
    }

    /// Mask of cells belonging to any interior component.
    pub fn interior_mask(&self) -> Vec<bool> {
        let mut m = vec![false; self.mask.len()];
        for k in self.interior() {
            for &c in &self.components[k].cells {
                m[c] = true;
            }
        }
        m
    }
}
