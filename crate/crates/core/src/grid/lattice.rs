use serde::{Deserialize, Serialize};

use crate::linalg::Vec2;
use crate::scalar::Scalar;

/// Offsets `z_1..z_4` of the four shifted lattices `s·z_i + 2sℤ²`.
pub const SHIFTS: [(u8, u8); 4] = [(0, 0), (1, 0), (0, 1), (1, 1)];

/// A finite window of the shifted square lattice: cells of side `2s`
/// centred at `origin + s·z_shift + 2s·(i, j)` for `0 ≤ i < nx`, `0 ≤ j < ny`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(bound(serialize = "T: Scalar + Serialize", deserialize = "T: Scalar + Deserialize<'de>"))]
pub struct Lattice<T> {
    pub spacing: T,
    pub shift: u8,
    pub nx: usize,
    pub ny: usize,
    pub origin: Vec2<T>,
}

impl<T: Scalar> Lattice<T> {
    pub fn new(spacing: T, shift: u8, nx: usize, ny: usize, origin: Vec2<T>) -> Self {
        assert!(spacing > T::zero(), "lattice spacing must be positive");
        assert!((1..=4).contains(&shift), "shift index must lie in 1..=4");
        Self { spacing, shift, nx, ny, origin }
    }

    /// Lattice whose cells have side `h` and whose node `(0, 0)` sits at `origin`.
    pub fn with_cell_side(h: T, nx: usize, ny: usize, origin: Vec2<T>) -> Self {
        Self::new(h * T::half(), 4, nx, ny, origin)
    }

    #[inline]
    pub fn cell_count(&self) -> usize {
        self.nx * self.ny
    }

    /// Side length `2s` of one cell.
    #[inline]
    pub fn cell_side(&self) -> T {
        self.spacing * T::two()
    }

    #[inline]
    pub fn idx(&self, i: usize, j: usize) -> usize {
        j * self.nx + i
    }

    #[inline]
    pub fn ij(&self, idx: usize) -> (usize, usize) {
        (idx % self.nx, idx / self.nx)
    }

    pub fn center(&self, i: usize, j: usize) -> Vec2<T> {
        let (zx, zy) = SHIFTS[self.shift as usize - 1];
        let s = self.spacing;
        let two_s = self.cell_side();
        Vec2::new(
            self.origin.x + s * T::from_count(zx as usize) + two_s * T::from_count(i),
            self.origin.y + s * T::from_count(zy as usize) + two_s * T::from_count(j),
        )
    }

    /// Lower-left corner of the cell window, i.e. node `(0, 0)`.
    pub fn corner(&self) -> Vec2<T> {
        let c = self.center(0, 0);
        Vec2::new(c.x - self.spacing, c.y - self.spacing)
    }

    /// Position of lattice node `(i, j)`, `0 ≤ i ≤ nx`, `0 ≤ j ≤ ny`.
    pub fn node(&self, i: usize, j: usize) -> Vec2<T> {
        let c = self.corner();
        let two_s = self.cell_side();
        Vec2::new(c.x + two_s * T::from_count(i), c.y + two_s * T::from_count(j))
    }

    /// Width and height of the window.
    pub fn extent(&self) -> (T, T) {
        let two_s = self.cell_side();
        (two_s * T::from_count(self.nx), two_s * T::from_count(self.ny))
    }

    /// 4-neighbours of a cell inside the window.
    pub fn neighbors4(&self, idx: usize) -> impl Iterator<Item = usize> + '_ {
        let (i, j) = self.ij(idx);
        let nx = self.nx;
        let ny = self.ny;
        [
            (i > 0).then(|| idx - 1),
            (i + 1 < nx).then(|| idx + 1),
            (j > 0).then(|| idx - nx),
            (j + 1 < ny).then(|| idx + nx),
        ]
        .into_iter()
        .flatten()
    }

    /// Whether a cell lies on the outer ring of the window.
    pub fn on_ring(&self, idx: usize) -> bool {
        let (i, j) = self.ij(idx);
        i == 0 || j == 0 || i + 1 == self.nx || j + 1 == self.ny
    }
}

/// An axis-aligned edge between lattice nodes, in integer node coordinates.
///
/// `H { i, j }` runs from node `(i, j)` to `(i + 1, j)` and separates cells
/// `(i, j − 1)` and `(i, j)`; `V { i, j }` runs from `(i, j)` to `(i, j + 1)`
/// and separates `(i − 1, j)` and `(i, j)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Edge {
    H { i: u32, j: u32 },
    V { i: u32, j: u32 },
}

impl Edge {
    /// Cells on either side as `(lower/left, upper/right)` indices, `None`
    /// outside the window.
    pub fn cells(self, nx: usize, ny: usize) -> (Option<usize>, Option<usize>) {
        match self {
            Edge::H { i, j } => {
                let (i, j) = (i as usize, j as usize);
                let below = (j > 0).then(|| (j - 1) * nx + i);
                let above = (j < ny).then(|| j * nx + i);
                (below, above)
            }
            Edge::V { i, j } => {
                let (i, j) = (i as usize, j as usize);
                let left = (i > 0).then(|| j * nx + i - 1);
                let right = (i < nx).then(|| j * nx + i);
                (left, right)
            }
        }
    }

    /// End nodes in increasing coordinate order.
    pub fn nodes(self) -> [(usize, usize); 2] {
        match self {
            Edge::H { i, j } => [(i as usize, j as usize), (i as usize + 1, j as usize)],
            Edge::V { i, j } => [(i as usize, j as usize), (i as usize, j as usize + 1)],
        }
    }

    /// Dense index in `0..Edge::count(nx, ny)`.
    pub fn id(self, nx: usize, ny: usize) -> usize {
        match self {
            Edge::H { i, j } => j as usize * nx + i as usize,
            Edge::V { i, j } => nx * (ny + 1) + j as usize * (nx + 1) + i as usize,
        }
    }

    pub fn from_id(id: usize, nx: usize, ny: usize) -> Edge {
        let nh = nx * (ny + 1);
        if id < nh {
            Edge::H { i: (id % nx) as u32, j: (id / nx) as u32 }
        } else {
            let k = id - nh;
            Edge::V { i: (k % (nx + 1)) as u32, j: (k / (nx + 1)) as u32 }
        }
    }

    pub fn count(nx: usize, ny: usize) -> usize {
        nx * (ny + 1) + (nx + 1) * ny
    }

    pub fn is_horizontal(self) -> bool {
        matches!(self, Edge::H { .. })
    }
}

/// Side of a cell.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Side {
    N,
    S,
    E,
    W,
}

impl Side {
    pub const ALL: [Side; 4] = [Side::S, Side::E, Side::N, Side::W];

    /// The lattice edge on this side of cell `(i, j)`.
    pub fn edge(self, i: usize, j: usize) -> Edge {
        let (i, j) = (i as u32, j as u32);
        match self {
            Side::S => Edge::H { i, j },
            Side::N => Edge::H { i, j: j + 1 },
            Side::W => Edge::V { i, j },
            Side::E => Edge::V { i: i + 1, j },
        }
    }

    /// Corner slots (SW = 0, SE = 1, NE = 2, NW = 3) at this side's end
    /// nodes, in increasing coordinate order.
    pub fn corner_slots(self) -> [usize; 2] {
        match self {
            Side::S => [0, 1],
            Side::N => [3, 2],
            Side::W => [0, 3],
            Side::E => [1, 2],
        }
    }

    pub fn opposite(self) -> Side {
        match self {
            Side::N => Side::S,
            Side::S => Side::N,
            Side::E => Side::W,
            Side::W => Side::E,
        }
    }
}

/// Half-open rectangle of cells `[i0, i1) × [j0, j1)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct CellRect {
    pub i0: usize,
    pub j0: usize,
    pub i1: usize,
    pub j1: usize,
}

impl CellRect {
    pub fn new(i0: usize, j0: usize, i1: usize, j1: usize) -> Self {
        debug_assert!(i0 <= i1 && j0 <= j1);
        Self { i0, j0, i1, j1 }
    }

    pub fn width(&self) -> usize {
        self.i1 - self.i0
    }

    pub fn height(&self) -> usize {
        self.j1 - self.j0
    }

    pub fn area(&self) -> usize {
        self.width() * self.height()
    }

    pub fn is_empty(&self) -> bool {
        self.area() == 0
    }

    pub fn contains(&self, i: usize, j: usize) -> bool {
        i >= self.i0 && i < self.i1 && j >= self.j0 && j < self.j1
    }

    pub fn contains_rect(&self, other: &CellRect) -> bool {
        other.is_empty()
            || (other.i0 >= self.i0 && other.i1 <= self.i1 && other.j0 >= self.j0 && other.j1 <= self.j1)
    }

    /// Intersection with the window `[0, nx) × [0, ny)` of an
    /// integer rectangle given with signed corners.
    pub fn clipped(i0: i64, j0: i64, i1: i64, j1: i64, nx: usize, ny: usize) -> Self {
        let c = |v: i64, n: usize| v.clamp(0, n as i64) as usize;
        let (a, b, c2, d) = (c(i0, nx), c(j0, ny), c(i1, nx), c(j1, ny));
        Self::new(a, b, c2.max(a), d.max(b))
    }

    pub fn cells(&self, nx: usize) -> impl Iterator<Item = usize> + '_ {
        (self.j0..self.j1).flat_map(move |j| (self.i0..self.i1).map(move |i| j * nx + i))
    }

    /// Whether the interiors overlap.
    pub fn intersects(&self, other: &CellRect) -> bool {
        self.i0 < other.i1 && other.i0 < self.i1 && self.j0 < other.j1 && other.j0 < self.j1
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn centres_follow_shift() {
        let lat = Lattice::new(0.5, 2, 3, 3, Vec2::zero());
        assert_eq!(lat.center(0, 0), Vec2::new(0.5, 0.0));
        assert_eq!(lat.center(2, 1), Vec2::new(2.5, 1.0));
    }

    #[test]
    fn cell_side_constructor_places_node_zero() {
        let lat = Lattice::with_cell_side(0.25, 4, 2, Vec2::new(1.0, -1.0));
        assert_eq!(lat.node(0, 0), Vec2::new(1.0, -1.0));
        assert_eq!(lat.node(4, 2), Vec2::new(2.0, -0.5));
        assert_eq!(lat.center(0, 0), Vec2::new(1.125, -0.875));
    }

    #[test]
    fn edge_ids_round_trip() {
        let (nx, ny) = (5, 3);
        for id in 0..Edge::count(nx, ny) {
            assert_eq!(Edge::from_id(id, nx, ny).id(nx, ny), id);
        }
    }

    #[test]
    fn side_edges_and_cells_agree() {
        let (nx, ny) = (4, 4);
        let idx = 2 * nx + 1;
        for side in Side::ALL {
            let (lo, hi) = side.edge(1, 2).cells(nx, ny);
            assert!(lo == Some(idx) || hi == Some(idx));
        }
    }
}
