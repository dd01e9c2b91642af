//! Quadrilateral and hexahedral meshes.
//!
//! Cells store their vertices in lexicographic order: local vertex `i` sits at
//! reference position `(i & 1, (i >> 1) & 1, (i >> 2) & 1)` of the unit cell
//! `[0,1]^d`. Local face `2k + s` is the face `x̂_k = s`.

mod generators;
pub(crate) mod mapping;
mod msh;

use std::collections::HashMap;
use std::io::Write;

pub use generators::{generate_hypercube, generate_lshape, generate_perturbed, lshape_graded, split_triangles_to_quads};
pub use mapping::CellMapping;
pub use msh::{read_msh, write_msh};

use crate::error::{Error, Result};

/// Physical or reference coordinates. In 2D the third entry is zero.
pub type Point = [f64; 3];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct BoundaryFace {
    pub cell: usize,
    pub face: u8,
    pub id: u32,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Mesh {
    dim: usize,
    vertices: Vec<Point>,
    cells: Vec<usize>,
    boundary_faces: Vec<BoundaryFace>,
    level_id: usize,
}

/// Local vertex indices of face `face` of a cell in `dim` dimensions.
pub fn face_vertices(dim: usize, face: u8) -> Vec<usize> {
    let axis = (face / 2) as usize;
    let side = (face % 2) as usize;
    (0..1usize << dim).filter(|v| (v >> axis) & 1 == side).collect()
}

impl Mesh {
    /// Builds a mesh with explicitly given boundary faces and validates it.
    pub fn new(
        dim: usize,
        vertices: Vec<Point>,
        cells: Vec<usize>,
        boundary_faces: Vec<BoundaryFace>,
    ) -> Result<Self> {
        let mesh = Self { dim, vertices, cells, boundary_faces, level_id: 0 };
        mesh.validate()?;
        Ok(mesh)
    }

    /// Builds a mesh whose boundary faces are found topologically; `boundary_id`
    /// receives the face centroid and returns its id.
    pub fn from_cells(
        dim: usize,
        vertices: Vec<Point>,
        cells: Vec<usize>,
        boundary_id: impl Fn(&Point) -> u32,
    ) -> Result<Self> {
        let mut mesh = Self { dim, vertices, cells, boundary_faces: Vec::new(), level_id: 0 };
        mesh.check_connectivity()?;
        let faces = mesh.topological_boundary();
        mesh.boundary_faces = faces
            .into_iter()
            .map(|(cell, face)| {
                let c = mesh.face_centroid(cell, face);
                BoundaryFace { cell, face, id: boundary_id(&c) }
            })
            .collect();
        mesh.validate()?;
        Ok(mesh)
    }

    pub fn with_level_id(mut self, level: usize) -> Self {
        self.level_id = level;
        self
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn level_id(&self) -> usize {
        self.level_id
    }

    pub fn n_vertices(&self) -> usize {
        self.vertices.len()
    }

    pub fn n_cells(&self) -> usize {
        self.cells.len() >> self.dim
    }

    pub fn vertices_per_cell(&self) -> usize {
        1 << self.dim
    }

    pub fn vertices(&self) -> &[Point] {
        &self.vertices
    }

    pub fn vertex(&self, v: usize) -> &Point {
        &self.vertices[v]
    }

    /// Flat connectivity, `2^dim` entries per cell.
    pub fn cells(&self) -> &[usize] {
        &self.cells
    }

    pub fn cell_vertices(&self, cell: usize) -> &[usize] {
        let n = self.vertices_per_cell();
        &self.cells[cell * n..(cell + 1) * n]
    }

    pub fn boundary_faces(&self) -> &[BoundaryFace] {
        &self.boundary_faces
    }

    pub fn boundary_ids(&self) -> Vec<u32> {
        let mut ids: Vec<u32> = self.boundary_faces.iter().map(|f| f.id).collect();
        ids.sort_unstable();
        ids.dedup();
        ids
    }

    pub fn mapping(&self, cell: usize) -> CellMapping {
        let mut coords = [[0.0; 3]; 8];
        for (slot, &v) in coords.iter_mut().zip(self.cell_vertices(cell)) {
            *slot = self.vertices[v];
        }
        CellMapping::new(cell, self.dim, coords)
    }

    pub fn cell_centroid(&self, cell: usize) -> Point {
        let vs = self.cell_vertices(cell);
        let mut c = [0.0; 3];
        for &v in vs {
            for k in 0..3 {
                c[k] += self.vertices[v][k];
            }
        }
        c.map(|x| x / vs.len() as f64)
    }

    pub fn face_centroid(&self, cell: usize, face: u8) -> Point {
        let vs = self.cell_vertices(cell);
        let local = face_vertices(self.dim, face);
        let mut c = [0.0; 3];
        for &l in &local {
            for k in 0..3 {
                c[k] += self.vertices[vs[l]][k];
            }
        }
        c.map(|x| x / local.len() as f64)
    }

    /// Axis-aligned bounding box of the whole mesh.
    pub fn bounding_box(&self) -> (Point, Point) {
        let mut lo = [f64::INFINITY; 3];
        let mut hi = [f64::NEG_INFINITY; 3];
        for v in &self.vertices {
            for k in 0..self.dim {
                lo[k] = lo[k].min(v[k]);
                hi[k] = hi[k].max(v[k]);
            }
        }
        for k in self.dim..3 {
            lo[k] = 0.0;
            hi[k] = 0.0;
        }
        (lo, hi)
    }

    pub fn diameter(&self) -> f64 {
        let (lo, hi) = self.bounding_box();
        (0..3).map(|k| (hi[k] - lo[k]).powi(2)).sum::<f64>().sqrt()
    }

    /// Shortest cell edge in the mesh.
    pub fn min_edge_length(&self) -> f64 {
        let mut h = f64::INFINITY;
        for cell in 0..self.n_cells() {
            for (a, b) in cell_edges(self.dim) {
                let vs = self.cell_vertices(cell);
                h = h.min(dist(&self.vertices[vs[a]], &self.vertices[vs[b]]));
            }
        }
        h
    }

    /// Vertices lying on a boundary face.
    pub fn boundary_vertex_mask(&self) -> Vec<bool> {
        let mut mask = vec![false; self.n_vertices()];
        for f in &self.boundary_faces {
            let vs = self.cell_vertices(f.cell);
            for l in face_vertices(self.dim, f.face) {
                mask[vs[l]] = true;
            }
        }
        mask
    }

    fn check_connectivity(&self) -> Result<()> {
        if self.dim != 2 && self.dim != 3 {
            return Err(Error::InvalidMesh(format!("dimension {} not supported", self.dim)));
        }
        let n = self.vertices_per_cell();
        if !self.cells.len().is_multiple_of(n) {
            return Err(Error::InvalidMesh("connectivity length is not a multiple of 2^dim".into()));
        }
        for cell in 0..self.n_cells() {
            let vs = self.cell_vertices(cell);
            for (i, &v) in vs.iter().enumerate() {
                if v >= self.vertices.len() {
                    return Err(Error::InvalidMesh(format!("cell {cell} references vertex {v} out of range")));
                }
                if vs[..i].contains(&v) {
                    return Err(Error::InvalidMesh(format!("cell {cell} repeats vertex {v}")));
                }
            }
        }
        Ok(())
    }

    /// Faces that belong to exactly one cell, in (cell, face) order.
    fn topological_boundary(&self) -> Vec<(usize, u8)> {
        let mut count: HashMap<Vec<usize>, usize> = HashMap::new();
        for cell in 0..self.n_cells() {
            for face in 0..2 * self.dim as u8 {
                *count.entry(self.face_key(cell, face)).or_default() += 1;
            }
        }
        let mut out = Vec::new();
        for cell in 0..self.n_cells() {
            for face in 0..2 * self.dim as u8 {
                if count[&self.face_key(cell, face)] == 1 {
                    out.push((cell, face));
                }
            }
        }
        out
    }

    pub(crate) fn face_key(&self, cell: usize, face: u8) -> Vec<usize> {
        let vs = self.cell_vertices(cell);
        let mut key: Vec<usize> = face_vertices(self.dim, face).into_iter().map(|l| vs[l]).collect();
        key.sort_unstable();
        key
    }

    /// Checks connectivity, boundary consistency and positivity of the
    /// Jacobian at corners and Gauss points.
    pub fn validate(&self) -> Result<()> {
        self.check_connectivity()?;
        let mut expected = self.topological_boundary();
        expected.sort_unstable();
        let mut given: Vec<(usize, u8)> = self.boundary_faces.iter().map(|f| (f.cell, f.face)).collect();
        given.sort_unstable();
        if given.windows(2).any(|w| w[0] == w[1]) {
            return Err(Error::InvalidMesh("boundary face listed twice".into()));
        }
        if given != expected {
            return Err(Error::InvalidMesh("boundary faces do not match the topological boundary".into()));
        }
        let g = 0.5 - 0.5 / 3f64.sqrt();
        let samples = [0.0, g, 1.0 - g, 1.0];
        for cell in 0..self.n_cells() {
            let map = self.mapping(cell);
            let nz = if self.dim == 3 { 4 } else { 1 };
            for iz in 0..nz {
                for iy in 0..4 {
                    for ix in 0..4 {
                        let xh = [samples[ix], samples[iy], if self.dim == 3 { samples[iz] } else { 0.0 }];
                        let det = map.jacobian_det(&xh);
                        let scale = map.diameter().powi(self.dim as i32);
                        if !(det > 1e-14 * scale) {
                            return Err(Error::NonPositiveJacobian { cell, det });
                        }
                    }
                }
            }
        }
        Ok(())
    }

    /// Writes `x,y,z` rows, one per vertex.
    pub fn write_csv_vertices(&self, mut out: impl Write) -> std::io::Result<()> {
        writeln!(out, "x,y,z")?;
        for v in &self.vertices {
            writeln!(out, "{},{},{}", v[0], v[1], v[2])?;
        }
        Ok(())
    }

    /// Writes one row of vertex indices per cell.
    pub fn write_csv_cells(&self, mut out: impl Write) -> std::io::Result<()> {
        let header: Vec<String> = (0..self.vertices_per_cell()).map(|i| format!("v{i}")).collect();
        writeln!(out, "{}", header.join(","))?;
        for cell in 0..self.n_cells() {
            let row: Vec<String> = self.cell_vertices(cell).iter().map(|v| v.to_string()).collect();
            writeln!(out, "{}", row.join(","))?;
        }
        Ok(())
    }
}

pub(crate) fn cell_edges(dim: usize) -> Vec<(usize, usize)> {
    let mut edges = Vec::new();
    for v in 0..1usize << dim {
        for k in 0..dim {
            if (v >> k) & 1 == 0 {
                edges.push((v, v | (1 << k)));
            }
        }
    }
    edges
}

pub(crate) fn dist(a: &Point, b: &Point) -> f64 {
    ((a[0] - b[0]).powi(2) + (a[1] - b[1]).powi(2) + (a[2] - b[2]).powi(2)).sqrt()
}

/// Cell-to-rank assignment for a simulated distributed run.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PartitionLabels {
    owner_rank: Vec<usize>,
    n_ranks: usize,
}

impl PartitionLabels {
    pub fn new(owner_rank: Vec<usize>, n_ranks: usize) -> Result<Self> {
        if n_ranks == 0 {
            return Err(Error::Config("partition needs at least one rank".into()));
        }
        if let Some(&r) = owner_rank.iter().find(|&&r| r >= n_ranks) {
            return Err(Error::Config(format!("rank {r} out of range 0..{n_ranks}")));
        }
        Ok(Self { owner_rank, n_ranks })
    }

    pub fn single_rank(n_cells: usize) -> Self {
        Self { owner_rank: vec![0; n_cells], n_ranks: 1 }
    }

    pub fn n_ranks(&self) -> usize {
        self.n_ranks
    }

    pub fn n_cells(&self) -> usize {
        self.owner_rank.len()
    }

    pub fn rank_of(&self, cell: usize) -> usize {
        self.owner_rank[cell]
    }

    pub fn ranks(&self) -> &[usize] {
        &self.owner_rank
    }

    /// Number of cells owned by each rank.
    pub fn counts(&self) -> Vec<usize> {
        let mut c = vec![0; self.n_ranks];
        for &r in &self.owner_rank {
            c[r] += 1;
        }
        c
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_repeated_vertex() {
        let v = vec![[0.0, 0.0, 0.0], [1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [1.0, 1.0, 0.0]];
        let err = Mesh::from_cells(2, v, vec![0, 1, 1, 3], |_| 0).unwrap_err();
        assert!(matches!(err, Error::InvalidMesh(_)));
    }

    #[test]
    fn rejects_inverted_cell() {
        let v = vec![[0.0, 0.0, 0.0], [1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [1.0, 1.0, 0.0]];
        let err = Mesh::from_cells(2, v, vec![1, 0, 3, 2], |_| 0).unwrap_err();
        assert!(matches!(err, Error::NonPositiveJacobian { .. }));
    }

    #[test]
    fn boundary_faces_must_cover_boundary() {
        let v = vec![[0.0, 0.0, 0.0], [1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [1.0, 1.0, 0.0]];
        let faces = vec![BoundaryFace { cell: 0, face: 0, id: 0 }];
        assert!(Mesh::new(2, v, vec![0, 1, 2, 3], faces).is_err());
    }

    #[test]
    fn face_vertex_tables() {
        assert_eq!(face_vertices(2, 0), vec![0, 2]);
        assert_eq!(face_vertices(2, 3), vec![2, 3]);
        assert_eq!(face_vertices(3, 5), vec![4, 5, 6, 7]);
        assert_eq!(cell_edges(3).len(), 12);
    }

    #[test]
    fn partition_labels_range() {
        assert!(PartitionLabels::new(vec![0, 3], 3).is_err());
        let p = PartitionLabels::new(vec![0, 1, 1], 2).unwrap();
        assert_eq!(p.counts(), vec![1, 2]);
    }
}
