use crate::grid::{Edge, Lattice, Side};
use crate::linalg::{Mat2, Vec2};
use crate::scalar::Scalar;

/// Corner slots of a cell: SW, SE, NE, NW.
pub const SW: usize = 0;
pub const SE: usize = 1;
pub const NE: usize = 2;
pub const NW: usize = 3;

/// Node offsets of the corner slots.
pub const CORNER_OFFSETS: [(usize, usize); 4] = [(0, 0), (1, 0), (1, 1), (0, 1)];

/// Edges between two active cells across which the field is discontinuous.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct JumpSet {
    /// Sorted edge ids.
    pub edges: Vec<usize>,
}

impl JumpSet {
    pub fn len(&self) -> usize {
        self.edges.len()
    }

    pub fn is_empty(&self) -> bool {
        self.edges.is_empty()
    }

    pub fn contains(&self, edge_id: usize) -> bool {
        self.edges.binary_search(&edge_id).is_ok()
    }
}

/// A discrete SBV map: every cell carries its own four corner values
/// (bilinear inside the cell), so a crack along an edge is represented
/// exactly by differing corner values on its two sides.
#[derive(Clone, Debug, PartialEq)]
pub struct DeformationField<T> {
    /// Cell lattice; the cell side is `h = 2·spacing`.
    pub lattice: Lattice<T>,
    pub corners: Vec<[Vec2<T>; 4]>,
    pub active: Vec<bool>,
    pub jumps: JumpSet,
}

impl<T: Scalar> DeformationField<T> {
    /// Field from per-cell corner values; jump edges are detected by exact
    /// comparison of the shared corner values of neighbouring active cells.
    pub fn new(lattice: Lattice<T>, corners: Vec<[Vec2<T>; 4]>, active: Vec<bool>) -> Self {
        assert_eq!(corners.len(), lattice.cell_count());
        assert_eq!(active.len(), lattice.cell_count());
        let mut f = Self { lattice, corners, active, jumps: JumpSet::default() };
        f.recompute_jumps();
        f
    }

    /// Evaluate `map(cell, x)` at the corners of every cell.
    pub fn from_fn(lattice: Lattice<T>, active: Vec<bool>, map: impl Fn(usize, Vec2<T>) -> Vec2<T>) -> Self {
        let corners = (0..lattice.cell_count())
            .map(|c| {
                let (i, j) = lattice.ij(c);
                CORNER_OFFSETS.map(|(di, dj)| map(c, lattice.node(i + di, j + dj)))
            })
            .collect();
        Self::new(lattice, corners, active)
    }

    /// Continuous field from nodal values, row-major over `(nx+1)·(ny+1)` nodes.
    pub fn from_nodal(lattice: Lattice<T>, values: &[Vec2<T>], active: Vec<bool>) -> Self {
        let nxn = lattice.nx + 1;
        assert_eq!(values.len(), nxn * (lattice.ny + 1));
        let corners = (0..lattice.cell_count())
            .map(|c| {
                let (i, j) = lattice.ij(c);
                CORNER_OFFSETS.map(|(di, dj)| values[(j + dj) * nxn + i + di])
            })
            .collect();
        Self::new(lattice, corners, active)
    }

    /// Cell side `h`.
    #[inline]
    pub fn h(&self) -> T {
        self.lattice.cell_side()
    }

    #[inline]
    pub fn nx(&self) -> usize {
        self.lattice.nx
    }

    #[inline]
    pub fn ny(&self) -> usize {
        self.lattice.ny
    }

    pub fn cell_count(&self) -> usize {
        self.lattice.cell_count()
    }

    /// Corner positions of a cell in slot order.
    pub fn corner_positions(&self, cell: usize) -> [Vec2<T>; 4] {
        let (i, j) = self.lattice.ij(cell);
        CORNER_OFFSETS.map(|(di, dj)| self.lattice.node(i + di, j + dj))
    }

    /// Bilinear gradient at the cell centre; `None` for inactive cells.
    #[inline]
    pub fn gradient(&self, cell: usize) -> Option<Mat2<T>> {
        if !self.active[cell] {
            return None;
        }
        Some(corner_gradient(&self.corners[cell], self.h()))
    }

    /// Values on one side of a cell at the side's two end nodes.
    pub fn side_values(&self, cell: usize, side: Side) -> [Vec2<T>; 2] {
        let [a, b] = side.corner_slots();
        [self.corners[cell][a], self.corners[cell][b]]
    }

    /// `[y] = y⁺ − y⁻` at the two end nodes of an edge, with `−` the lower/left
    /// cell. `None` unless both cells are active.
    pub fn jump_at(&self, edge: Edge) -> Option<[Vec2<T>; 2]> {
        let (lo, hi) = edge.cells(self.nx(), self.ny());
        let (lo, hi) = (lo?, hi?);
        if !self.active[lo] || !self.active[hi] {
            return None;
        }
        let (sl, sh) = if edge.is_horizontal() { (Side::N, Side::S) } else { (Side::E, Side::W) };
        let m = self.side_values(lo, sl);
        let p = self.side_values(hi, sh);
        Some([p[0] - m[0], p[1] - m[1]])
    }

    /// `|[y]|` at the edge midpoint.
    pub fn jump_amplitude(&self, edge_id: usize) -> T {
        let e = Edge::from_id(edge_id, self.nx(), self.ny());
        match self.jump_at(e) {
            Some([a, b]) => (a + b).scale(T::half()).norm(),
            None => T::zero(),
        }
    }

    pub fn recompute_jumps(&mut self) {
        let (nx, ny) = (self.nx(), self.ny());
        let mut edges = Vec::new();
        for j in 0..ny {
            for i in 0..nx {
                let c = j * nx + i;
                if !self.active[c] {
                    continue;
                }
                if i + 1 < nx && self.active[c + 1] {
                    let a = self.side_values(c, Side::E);
                    let b = self.side_values(c + 1, Side::W);
                    if a != b {
                        edges.push(Edge::V { i: (i + 1) as u32, j: j as u32 }.id(nx, ny));
                    }
                }
                if j + 1 < ny && self.active[c + nx] {
                    let a = self.side_values(c, Side::N);
                    let b = self.side_values(c + nx, Side::S);
                    if a != b {
                        edges.push(Edge::H { i: i as u32, j: (j + 1) as u32 }.id(nx, ny));
                    }
                }
            }
        }
        edges.sort_unstable();
        self.jumps = JumpSet { edges };
    }

    /// `H¹(J_y)`.
    pub fn jump_length(&self) -> T {
        T::from_count(self.jumps.len()) * self.h()
    }

    /// `max |∇y|` over active cells (the `M` of the field).
    pub fn grad_bound(&self) -> T {
        (0..self.cell_count())
            .filter_map(|c| self.gradient(c))
            .map(|g| g.norm())
            .fold(T::zero(), T::max)
    }

    /// Cells adjacent to at least one jump edge.
    pub fn jump_adjacent(&self) -> Vec<bool> {
        let (nx, ny) = (self.nx(), self.ny());
        let mut out = vec![false; self.cell_count()];
        for &e in &self.jumps.edges {
            let (a, b) = Edge::from_id(e, nx, ny).cells(nx, ny);
            for c in [a, b].into_iter().flatten() {
                out[c] = true;
            }
        }
        out
    }

    /// Same lattice and mask with `op` applied to every corner value.
    pub fn map_values(&self, op: impl Fn(Vec2<T>, Vec2<T>) -> Vec2<T>) -> Self {
        let corners = (0..self.cell_count())
            .map(|c| {
                let xs = self.corner_positions(c);
                let ys = self.corners[c];
                [op(xs[0], ys[0]), op(xs[1], ys[1]), op(xs[2], ys[2]), op(xs[3], ys[3])]
            })
            .collect();
        Self::new(self.lattice, corners, self.active.clone())
    }

    /// Pointwise difference of two fields on the same lattice.
    pub fn difference(&self, other: &Self) -> Self {
        assert_eq!(self.lattice, other.lattice);
        let corners = self
            .corners
            .iter()
            .zip(&other.corners)
            .map(|(a, b)| [a[0] - b[0], a[1] - b[1], a[2] - b[2], a[3] - b[3]])
            .collect();
        Self::new(self.lattice, corners, self.active.clone())
    }

    /// Nodal values averaged over the active cells touching each node, with
    /// `None` where no active cell touches it.
    pub fn nodal_average(&self, cells: &[bool]) -> Vec<Option<Vec2<T>>> {
        let nxn = self.nx() + 1;
        let nodes = nxn * (self.ny() + 1);
        let mut sum = vec![Vec2::zero(); nodes];
        let mut cnt = vec![0usize; nodes];
        let mut first: Vec<Option<Vec2<T>>> = vec![None; nodes];
        let mut uniform = vec![true; nodes];
        for c in 0..self.cell_count() {
            if !cells[c] || !self.active[c] {
                continue;
            }
            let (i, j) = self.lattice.ij(c);
            for (slot, (di, dj)) in CORNER_OFFSETS.iter().enumerate() {
                let n = (j + dj) * nxn + i + di;
                let v = self.corners[c][slot];
                sum[n] += v;
                cnt[n] += 1;
                match first[n] {
                    None => first[n] = Some(v),
                    Some(f) if f != v => uniform[n] = false,
                    _ => {}
                }
            }
        }
        // Agreeing values are returned bit-exactly.
        (0..nodes)
            .map(|n| match first[n] {
                Some(v) if uniform[n] => Some(v),
                Some(_) => Some(sum[n].scale(T::one() / T::from_count(cnt[n]))),
                None => None,
            })
            .collect()
    }
}

/// Bilinear gradient at the centre of a cell of side `h` from SW, SE, NE, NW values.
#[inline]
pub fn corner_gradient<T: Scalar>(v: &[Vec2<T>; 4], h: T) -> Mat2<T> {
    let inv = T::one() / (T::two() * h);
    let d1 = ((v[SE] - v[SW]) + (v[NE] - v[NW])).scale(inv);
    let d2 = ((v[NW] - v[SW]) + (v[NE] - v[SE])).scale(inv);
    Mat2::from_cols(d1, d2)
}
