//! Matrix-free non-nested geometric multigrid for continuous Lagrange
//! elements on quadrilateral and hexahedral meshes.

#![allow(clippy::needless_range_loop, clippy::neg_cmp_op_on_partial_ord)]

pub mod cases;
pub mod error;
pub mod fespace;
pub mod geosearch;
pub mod linalg;
pub mod mesh;
pub mod metrics;
pub mod mfoperator;
pub mod multigrid;
pub mod solvers;
pub mod transfer;

pub use error::{Error, Result};
pub use fespace::{Constraints, FESpace, Shape1D};
pub use mesh::{BoundaryFace, CellMapping, Mesh, PartitionLabels, Point};
