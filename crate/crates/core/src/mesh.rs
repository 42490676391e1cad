//! Nested hierarchy of uniform Cartesian quadrilateral meshes on a box.
//!
//! Cells and vertices are numbered lexicographically (x fastest) on every
//! level. Level `s` has `base * 2^s` cells per direction, so parent/child
//! relations and vertex stars follow from index arithmetic and nothing is
//! stored besides the level-0 layout.

use crate::error::{Error, Result};

/// Axis-aligned rectangle `[lower, upper]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DomainBox {
    pub lower: [f64; 2],
    pub upper: [f64; 2],
}

impl DomainBox {
    pub const UNIT_SQUARE: DomainBox = DomainBox {
        lower: [0.0, 0.0],
        upper: [1.0, 1.0],
    };

    pub fn extent(&self) -> [f64; 2] {
        [self.upper[0] - self.lower[0], self.upper[1] - self.lower[1]]
    }

    pub fn volume(&self) -> f64 {
        let e = self.extent();
        e[0] * e[1]
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Mesh {
    domain: DomainBox,
    base_cells: [usize; 2],
    levels: usize,
}

/// The cells sharing one vertex.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct VertexStarPatch {
    pub vertex: usize,
    pub cells: Vec<usize>,
}

impl Mesh {
    pub fn build_cartesian(domain: DomainBox, base_cells: [usize; 2], levels: usize) -> Result<Self> {
        if base_cells.contains(&0) {
            return Err(Error::InvalidArgument(
                "base mesh needs at least one cell per direction".into(),
            ));
        }
        if levels == 0 {
            return Err(Error::InvalidArgument("mesh hierarchy needs at least one level".into()));
        }
        let ext = domain.extent();
        if !(ext[0] > 0.0 && ext[1] > 0.0) {
            return Err(Error::InvalidArgument(format!("non-positive domain extents {ext:?}")));
        }
        Ok(Self {
            domain,
            base_cells,
            levels,
        })
    }

    /// Unit square with one base cell, refined so that the finest level has
    /// `2^c x 2^c` cells.
    pub fn unit_square_refined(c: usize) -> Self {
        Self::build_cartesian(DomainBox::UNIT_SQUARE, [1, 1], c + 1).expect("valid unit square mesh")
    }

    pub fn dim(&self) -> usize {
        2
    }

    pub fn domain(&self) -> DomainBox {
        self.domain
    }

    pub fn n_levels(&self) -> usize {
        self.levels
    }

    pub fn finest_level(&self) -> usize {
        self.levels - 1
    }

    pub fn check_level(&self, level: usize) -> Result<()> {
        if level >= self.levels {
            return Err(Error::InvalidArgument(format!(
                "level {level} out of range (mesh has {} levels)",
                self.levels
            )));
        }
        Ok(())
    }

    pub fn cells_per_dim(&self, level: usize) -> [usize; 2] {
        [self.base_cells[0] << level, self.base_cells[1] << level]
    }

    pub fn n_cells(&self, level: usize) -> usize {
        let n = self.cells_per_dim(level);
        n[0] * n[1]
    }

    pub fn vertices_per_dim(&self, level: usize) -> [usize; 2] {
        let n = self.cells_per_dim(level);
        [n[0] + 1, n[1] + 1]
    }

    pub fn n_vertices(&self, level: usize) -> usize {
        let n = self.vertices_per_dim(level);
        n[0] * n[1]
    }

    /// Cell edge lengths on `level`.
    pub fn cell_size(&self, level: usize) -> [f64; 2] {
        let n = self.cells_per_dim(level);
        let e = self.domain.extent();
        [e[0] / n[0] as f64, e[1] / n[1] as f64]
    }

    /// Characteristic mesh size (longest cell edge).
    pub fn h(&self, level: usize) -> f64 {
        let s = self.cell_size(level);
        s[0].max(s[1])
    }

    pub fn cell_id(&self, level: usize, ij: [usize; 2]) -> usize {
        ij[1] * self.cells_per_dim(level)[0] + ij[0]
    }

    pub fn cell_ij(&self, level: usize, cell: usize) -> [usize; 2] {
        let nx = self.cells_per_dim(level)[0];
        [cell % nx, cell / nx]
    }

    /// Lower-left corner of a cell.
    pub fn cell_origin(&self, level: usize, cell: usize) -> [f64; 2] {
        let ij = self.cell_ij(level, cell);
        let h = self.cell_size(level);
        [
            self.domain.lower[0] + ij[0] as f64 * h[0],
            self.domain.lower[1] + ij[1] as f64 * h[1],
        ]
    }

    pub fn cell_centroid(&self, level: usize, cell: usize) -> [f64; 2] {
        let o = self.cell_origin(level, cell);
        let h = self.cell_size(level);
        [o[0] + 0.5 * h[0], o[1] + 0.5 * h[1]]
    }

    /// Level of the parent is `level - 1`.
    pub fn parent(&self, level: usize, cell: usize) -> Option<usize> {
        if level == 0 {
            return None;
        }
        let ij = self.cell_ij(level, cell);
        Some(self.cell_id(level - 1, [ij[0] / 2, ij[1] / 2]))
    }

    /// Children on `level + 1`, ordered lexicographically (x fastest).
    pub fn children(&self, level: usize, cell: usize) -> Option<[usize; 4]> {
        if level + 1 >= self.levels {
            return None;
        }
        let ij = self.cell_ij(level, cell);
        let c = |dx: usize, dy: usize| self.cell_id(level + 1, [2 * ij[0] + dx, 2 * ij[1] + dy]);
        Some([c(0, 0), c(1, 0), c(0, 1), c(1, 1)])
    }

    pub fn vertex_ij(&self, level: usize, vertex: usize) -> [usize; 2] {
        let nv = self.vertices_per_dim(level)[0];
        [vertex % nv, vertex / nv]
    }

    pub fn vertex_coords(&self, level: usize, vertex: usize) -> [f64; 2] {
        let ij = self.vertex_ij(level, vertex);
        let h = self.cell_size(level);
        [
            self.domain.lower[0] + ij[0] as f64 * h[0],
            self.domain.lower[1] + ij[1] as f64 * h[1],
        ]
    }

    /// Cells sharing `vertex`, sorted ascending.
    pub fn cells_of_vertex(&self, level: usize, vertex: usize) -> Result<Vec<usize>> {
        self.check_level(level)?;
        if vertex >= self.n_vertices(level) {
            return Err(Error::InvalidArgument(format!(
                "vertex {vertex} does not exist on level {level}"
            )));
        }
        let [vi, vj] = self.vertex_ij(level, vertex);
        let [nx, ny] = self.cells_per_dim(level);
        let mut cells = Vec::with_capacity(4);
        for cj in vj.saturating_sub(1)..=vj.min(ny - 1) {
            for ci in vi.saturating_sub(1)..=vi.min(nx - 1) {
                cells.push(self.cell_id(level, [ci, cj]));
            }
        }
        Ok(cells)
    }

    /// One patch per vertex, in vertex order.
    pub fn vertex_star_patches(&self, level: usize) -> Result<Vec<VertexStarPatch>> {
        self.check_level(level)?;
        (0..self.n_vertices(level))
            .map(|vertex| {
                Ok(VertexStarPatch {
                    vertex,
                    cells: self.cells_of_vertex(level, vertex)?,
                })
            })
            .collect()
    }
}
