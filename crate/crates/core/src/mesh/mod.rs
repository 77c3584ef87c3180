//! Triangulations with labelled boundary edges and periodic vertex pairs.

mod generate;
mod periodic;
mod triangle;

use std::collections::{BTreeSet, HashMap};

pub use generate::{uniform_rect_mesh, Diagonal};
pub use periodic::{identify_periodic, Axis};
pub use triangle::{read_triangle_files, read_triangle_mesh};

use crate::error::{Error, Result};

/// Channel `[0, 2.2] x [0, 0.41]` around a 48-gon cylinder of radius 0.05 at
/// (0.2, 0.2), 2260 triangles, labelled with [`labels`] `CHANNEL_*`/`CYLINDER`.
pub fn bundled_cylinder_mesh() -> Result<Mesh> {
    read_triangle_mesh(
        include_str!("../../data/cylinder.node"),
        include_str!("../../data/cylinder.ele"),
        include_str!("../../data/cylinder.edge"),
    )
}

/// Rectangle side labels produced by [`uniform_rect_mesh`].
pub mod labels {
    pub const BOTTOM: u32 = 1;
    pub const RIGHT: u32 = 2;
    pub const TOP: u32 = 3;
    pub const LEFT: u32 = 4;

    /// Markers used by the bundled cylinder-channel mesh.
    pub const CHANNEL_WALLS: u32 = 1;
    pub const CHANNEL_INFLOW: u32 = 2;
    pub const CHANNEL_OUTFLOW: u32 = 3;
    pub const CYLINDER: u32 = 4;
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct BoundaryEdge {
    pub vertices: [usize; 2],
    pub label: u32,
}

/// `slave` sits at `master` translated along `axis`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PeriodicPair {
    pub master: usize,
    pub slave: usize,
    pub axis: Axis,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Mesh {
    vertices: Vec<[f64; 2]>,
    triangles: Vec<[usize; 3]>,
    boundary_edges: Vec<BoundaryEdge>,
    periodic_pairs: Vec<PeriodicPair>,
    // derived
    edges: Vec<[usize; 2]>,
    triangle_edges: Vec<[usize; 3]>,
}

fn signed_area(a: [f64; 2], b: [f64; 2], c: [f64; 2]) -> f64 {
    0.5 * ((b[0] - a[0]) * (c[1] - a[1]) - (c[0] - a[0]) * (b[1] - a[1]))
}

fn edge_key(a: usize, b: usize) -> [usize; 2] {
    if a < b {
        [a, b]
    } else {
        [b, a]
    }
}

impl Mesh {
    /// Validates the triangulation and fixes clockwise triangles.
    pub fn new(
        vertices: Vec<[f64; 2]>,
        mut triangles: Vec<[usize; 3]>,
        boundary_edges: Vec<BoundaryEdge>,
    ) -> Result<Self> {
        let nv = vertices.len();
        if vertices.iter().any(|v| !v[0].is_finite() || !v[1].is_finite()) {
            return Err(Error::Mesh("non-finite vertex coordinate".into()));
        }
        if triangles.is_empty() {
            return Err(Error::Mesh("no triangles".into()));
        }
        for (t, tri) in triangles.iter_mut().enumerate() {
            if let Some(&v) = tri.iter().find(|&&v| v >= nv) {
                return Err(Error::Mesh(format!("triangle {t} references vertex {v} of {nv}")));
            }
            let area = signed_area(vertices[tri[0]], vertices[tri[1]], vertices[tri[2]]);
            if area == 0.0 || tri[0] == tri[1] || tri[1] == tri[2] || tri[0] == tri[2] {
                return Err(Error::Mesh(format!("triangle {t} has zero area")));
            }
            if area < 0.0 {
                tri.swap(1, 2);
            }
        }

        let mut edge_index: HashMap<[usize; 2], usize> = HashMap::new();
        let mut edges = Vec::new();
        let mut edge_count: Vec<u8> = Vec::new();
        let mut triangle_edges = Vec::with_capacity(triangles.len());
        for tri in &triangles {
            let mut te = [0usize; 3];
            for (k, (a, b)) in [(tri[0], tri[1]), (tri[1], tri[2]), (tri[2], tri[0])].into_iter().enumerate() {
                let key = edge_key(a, b);
                let id = *edge_index.entry(key).or_insert_with(|| {
                    edges.push(key);
                    edge_count.push(0);
                    edges.len() - 1
                });
                edge_count[id] += 1;
                if edge_count[id] > 2 {
                    return Err(Error::Mesh(format!("edge {a}-{b} shared by more than two triangles")));
                }
                te[k] = id;
            }
            triangle_edges.push(te);
        }

        let mut labelled = vec![false; edges.len()];
        for be in &boundary_edges {
            let [a, b] = be.vertices;
            let id = edge_index
                .get(&edge_key(a, b))
                .copied()
                .ok_or_else(|| Error::Mesh(format!("boundary edge {a}-{b} is not an edge of the triangulation")))?;
            if edge_count[id] != 1 {
                return Err(Error::Mesh(format!("boundary edge {a}-{b} is interior")));
            }
            if labelled[id] {
                return Err(Error::Mesh(format!("boundary edge {a}-{b} listed twice")));
            }
            labelled[id] = true;
        }
        if let Some(id) = (0..edges.len()).find(|&e| edge_count[e] == 1 && !labelled[e]) {
            let [a, b] = edges[id];
            return Err(Error::Mesh(format!("boundary edge {a}-{b} carries no label")));
        }

        Ok(Self { vertices, triangles, boundary_edges, periodic_pairs: Vec::new(), edges, triangle_edges })
    }

    pub fn vertices(&self) -> &[[f64; 2]] {
        &self.vertices
    }

    pub fn triangles(&self) -> &[[usize; 3]] {
        &self.triangles
    }

    pub fn boundary_edges(&self) -> &[BoundaryEdge] {
        &self.boundary_edges
    }

    pub fn periodic_pairs(&self) -> &[PeriodicPair] {
        &self.periodic_pairs
    }

    pub(crate) fn push_periodic_pairs(&mut self, pairs: impl IntoIterator<Item = PeriodicPair>) {
        self.periodic_pairs.extend(pairs);
    }

    /// Unique edges as sorted vertex pairs.
    pub fn edges(&self) -> &[[usize; 2]] {
        &self.edges
    }

    /// Edge ids of local edges (0-1), (1-2), (2-0) of each triangle.
    pub fn triangle_edges(&self) -> &[[usize; 3]] {
        &self.triangle_edges
    }

    pub fn num_vertices(&self) -> usize {
        self.vertices.len()
    }

    pub fn num_triangles(&self) -> usize {
        self.triangles.len()
    }

    pub fn num_edges(&self) -> usize {
        self.edges.len()
    }

    pub fn triangle_area(&self, t: usize) -> f64 {
        let [a, b, c] = self.triangles[t];
        signed_area(self.vertices[a], self.vertices[b], self.vertices[c])
    }

    pub fn total_area(&self) -> f64 {
        (0..self.num_triangles()).map(|t| self.triangle_area(t)).sum()
    }

    /// `([xmin, ymin], [xmax, ymax])`
    pub fn bounding_box(&self) -> ([f64; 2], [f64; 2]) {
        let mut lo = [f64::INFINITY; 2];
        let mut hi = [f64::NEG_INFINITY; 2];
        for v in &self.vertices {
            for d in 0..2 {
                lo[d] = lo[d].min(v[d]);
                hi[d] = hi[d].max(v[d]);
            }
        }
        (lo, hi)
    }

    /// Longest edge length.
    pub fn h_max(&self) -> f64 {
        self.edges
            .iter()
            .map(|&[a, b]| {
                let (p, q) = (self.vertices[a], self.vertices[b]);
                (p[0] - q[0]).hypot(p[1] - q[1])
            })
            .fold(0.0, f64::max)
    }

    pub fn labels(&self) -> BTreeSet<u32> {
        self.boundary_edges.iter().map(|e| e.label).collect()
    }

    pub fn has_label(&self, label: u32) -> bool {
        self.boundary_edges.iter().any(|e| e.label == label)
    }

    /// Vertices touching an edge with this label.
    pub fn label_vertices(&self, label: u32) -> BTreeSet<usize> {
        self.boundary_edges.iter().filter(|e| e.label == label).flat_map(|e| e.vertices).collect()
    }

    /// Triangle owning each boundary edge, with the local edge index.
    pub fn boundary_edge_owners(&self) -> Vec<(usize, usize)> {
        let mut owner: HashMap<[usize; 2], (usize, usize)> = HashMap::new();
        for (t, tri) in self.triangles.iter().enumerate() {
            for k in 0..3 {
                owner.insert(edge_key(tri[k], tri[(k + 1) % 3]), (t, k));
            }
        }
        self.boundary_edges.iter().map(|e| owner[&edge_key(e.vertices[0], e.vertices[1])]).collect()
    }

    /// Number of boundary loops minus one.
    pub fn hole_count(&self) -> usize {
        // V - E + F = 1 - holes for a connected planar triangulation
        let chi = self.num_vertices() as i64 - self.num_edges() as i64 + self.num_triangles() as i64;
        (1 - chi).max(0) as usize
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bundled_cylinder_geometry() {
        let m = bundled_cylinder_mesh().unwrap();
        assert!((1500..=3000).contains(&m.num_triangles()));
        assert_eq!(m.hole_count(), 1);
        for v in m.label_vertices(labels::CYLINDER) {
            let [x, y] = m.vertices()[v];
            assert!(((x - 0.2).hypot(y - 0.2) - 0.05).abs() < 1e-3);
        }
        let exact = 2.2 * 0.41 - std::f64::consts::PI * 0.05 * 0.05;
        assert!((m.total_area() - exact).abs() / exact < 5e-3);
        assert_eq!(
            m.labels().into_iter().collect::<Vec<_>>(),
            vec![labels::CHANNEL_WALLS, labels::CHANNEL_INFLOW, labels::CHANNEL_OUTFLOW, labels::CYLINDER]
        );
    }

    #[test]
    fn clockwise_triangles_are_reoriented() {
        let v = vec![[0.0, 0.0], [1.0, 0.0], [0.0, 1.0]];
        let be = vec![
            BoundaryEdge { vertices: [0, 1], label: 1 },
            BoundaryEdge { vertices: [1, 2], label: 1 },
            BoundaryEdge { vertices: [2, 0], label: 1 },
        ];
        let m = Mesh::new(v, vec![[0, 2, 1]], be).unwrap();
        assert!(m.triangle_area(0) > 0.0);
    }

    #[test]
    fn unlabelled_boundary_is_rejected() {
        let v = vec![[0.0, 0.0], [1.0, 0.0], [0.0, 1.0]];
        let be = vec![BoundaryEdge { vertices: [0, 1], label: 1 }];
        assert!(matches!(Mesh::new(v, vec![[0, 1, 2]], be), Err(Error::Mesh(_))));
    }

    #[test]
    fn degenerate_triangle_is_rejected() {
        let v = vec![[0.0, 0.0], [1.0, 0.0], [2.0, 0.0]];
        assert!(Mesh::new(v, vec![[0, 1, 2]], vec![]).is_err());
    }
}
