use crate::mesh::{Mesh, Point};

/// Axis-aligned box.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Aabb {
    pub lo: Point,
    pub hi: Point,
}

impl Aabb {
    pub fn empty() -> Self {
        Self { lo: [f64::INFINITY; 3], hi: [f64::NEG_INFINITY; 3] }
    }

    pub fn of_cell(mesh: &Mesh, cell: usize) -> Self {
        let mut b = Self::empty();
        for &v in mesh.cell_vertices(cell) {
            b.include(mesh.vertex(v));
        }
        b
    }

    pub fn include(&mut self, x: &Point) {
        for k in 0..3 {
            self.lo[k] = self.lo[k].min(x[k]);
            self.hi[k] = self.hi[k].max(x[k]);
        }
    }

    pub fn merge(&mut self, other: &Aabb) {
        self.include(&other.lo);
        self.include(&other.hi);
    }

    pub fn padded(&self, pad: f64) -> Self {
        Self { lo: self.lo.map(|v| v - pad), hi: self.hi.map(|v| v + pad) }
    }

    pub fn contains(&self, x: &Point) -> bool {
        (0..3).all(|k| self.lo[k] <= x[k] && x[k] <= self.hi[k])
    }

    pub fn contains_box(&self, other: &Aabb) -> bool {
        (0..3).all(|k| self.lo[k] <= other.lo[k] && other.hi[k] <= self.hi[k])
    }

    fn center(&self, k: usize) -> f64 {
        0.5 * (self.lo[k] + self.hi[k])
    }
}

#[derive(Debug, Clone)]
enum Node {
    Leaf { bbox: Aabb, cell: usize },
    Inner { bbox: Aabb, left: usize, right: usize },
}

impl Node {
    fn bbox(&self) -> &Aabb {
        match self {
            Node::Leaf { bbox, .. } | Node::Inner { bbox, .. } => bbox,
        }
    }
}

/// Bounding-volume hierarchy over padded cell boxes.
#[derive(Debug, Clone)]
pub struct AabbTree {
    nodes: Vec<Node>,
    root: usize,
    padding: f64,
}

/// Tree over all cells of `mesh` with boxes padded by `padding`.
pub fn build_tree(mesh: &Mesh, padding: f64) -> AabbTree {
    let cells: Vec<usize> = (0..mesh.n_cells()).collect();
    AabbTree::build(mesh, &cells, padding)
}

impl AabbTree {
    /// Tree over a subset of cells (e.g. the cells owned by one rank).
    pub fn build(mesh: &Mesh, cells: &[usize], padding: f64) -> Self {
        assert!(!cells.is_empty(), "tree needs at least one cell");
        let mut items: Vec<(usize, Aabb)> = cells.iter().map(|&c| (c, Aabb::of_cell(mesh, c).padded(padding))).collect();
        let mut nodes = Vec::with_capacity(2 * items.len());
        let root = Self::split(&mut items, &mut nodes);
        Self { nodes, root, padding }
    }

    fn split(items: &mut [(usize, Aabb)], nodes: &mut Vec<Node>) -> usize {
        if items.len() == 1 {
            nodes.push(Node::Leaf { bbox: items[0].1, cell: items[0].0 });
            return nodes.len() - 1;
        }
        let mut centers = Aabb::empty();
        for (_, b) in items.iter() {
            centers.include(&[b.center(0), b.center(1), b.center(2)]);
        }
        let axis = (0..3)
            .max_by(|&a, &b| (centers.hi[a] - centers.lo[a]).total_cmp(&(centers.hi[b] - centers.lo[b])))
            .unwrap();
        items.sort_by(|a, b| a.1.center(axis).total_cmp(&b.1.center(axis)).then(a.0.cmp(&b.0)));
        let mid = items.len() / 2;
        let (l, r) = items.split_at_mut(mid);
        let left = Self::split(l, nodes);
        let right = Self::split(r, nodes);
        let mut bbox = *nodes[left].bbox();
        bbox.merge(nodes[right].bbox());
        nodes.push(Node::Inner { bbox, left, right });
        nodes.len() - 1
    }

    pub fn padding(&self) -> f64 {
        self.padding
    }

    pub fn root_box(&self) -> &Aabb {
        self.nodes[self.root].bbox()
    }

    pub fn is_leaf_root(&self) -> bool {
        matches!(self.nodes[self.root], Node::Leaf { .. })
    }

    /// Cells whose padded box contains `x`, ascending.
    pub fn query(&self, x: &Point) -> Vec<usize> {
        let mut out = Vec::new();
        let mut stack = vec![self.root];
        while let Some(i) = stack.pop() {
            let node = &self.nodes[i];
            if !node.bbox().contains(x) {
                continue;
            }
            match node {
                Node::Leaf { cell, .. } => out.push(*cell),
                Node::Inner { left, right, .. } => {
                    stack.push(*left);
                    stack.push(*right);
                }
            }
        }
        out.sort_unstable();
        out
    }

    /// Padded leaf boxes, keyed by cell.
    pub fn leaves(&self) -> impl Iterator<Item = (usize, &Aabb)> {
        self.nodes.iter().filter_map(|n| match n {
            Node::Leaf { bbox, cell } => Some((*cell, bbox)),
            Node::Inner { .. } => None,
        })
    }
}
