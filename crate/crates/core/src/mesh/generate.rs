use serde::{Deserialize, Serialize};

use super::{labels, BoundaryEdge, Mesh};
use crate::error::{Error, Result};

/// How each grid cell is split into two triangles.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Diagonal {
    /// Diagonal direction flips in a checkerboard pattern.
    #[default]
    Alternating,
    /// Every cell split from lower-left to upper-right.
    Uniform,
}

/// Structured triangulation of `[0, x_extent] x [0, y_extent]`.
///
/// Vertex `(i, j)` has index `j * (nx + 1) + i`. Boundary edges are labelled
/// bottom/right/top/left and listed counterclockwise around the domain.
pub fn uniform_rect_mesh(nx: usize, ny: usize, x_extent: f64, y_extent: f64, diagonal: Diagonal) -> Result<Mesh> {
    if nx == 0 || ny == 0 {
        return Err(Error::precondition("mesh needs nx, ny >= 1"));
    }
    if !(x_extent > 0.0 && y_extent > 0.0) {
        return Err(Error::precondition("mesh extents must be positive"));
    }
    let id = |i: usize, j: usize| j * (nx + 1) + i;
    let mut vertices = Vec::with_capacity((nx + 1) * (ny + 1));
    for j in 0..=ny {
        for i in 0..=nx {
            vertices.push([x_extent * i as f64 / nx as f64, y_extent * j as f64 / ny as f64]);
        }
    }
    let mut triangles = Vec::with_capacity(2 * nx * ny);
    for j in 0..ny {
        for i in 0..nx {
            let (sw, se, ne, nw) = (id(i, j), id(i + 1, j), id(i + 1, j + 1), id(i, j + 1));
            let forward = match diagonal {
                Diagonal::Uniform => true,
                Diagonal::Alternating => (i + j) % 2 == 0,
            };
            if forward {
                triangles.push([sw, se, ne]);
                triangles.push([sw, ne, nw]);
            } else {
                triangles.push([sw, se, nw]);
                triangles.push([se, ne, nw]);
            }
        }
    }
    let mut boundary = Vec::with_capacity(2 * (nx + ny));
    for i in 0..nx {
        boundary.push(BoundaryEdge { vertices: [id(i, 0), id(i + 1, 0)], label: labels::BOTTOM });
    }
    for j in 0..ny {
        boundary.push(BoundaryEdge { vertices: [id(nx, j), id(nx, j + 1)], label: labels::RIGHT });
    }
    for i in (0..nx).rev() {
        boundary.push(BoundaryEdge { vertices: [id(i + 1, ny), id(i, ny)], label: labels::TOP });
    }
    for j in (0..ny).rev() {
        boundary.push(BoundaryEdge { vertices: [id(0, j + 1), id(0, j)], label: labels::LEFT });
    }
    Mesh::new(vertices, triangles, boundary)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn single_cell() {
        let m = uniform_rect_mesh(1, 1, 1.0, 1.0, Diagonal::Alternating).unwrap();
        assert_eq!(m.num_vertices(), 4);
        assert_eq!(m.num_triangles(), 2);
    }

    #[test]
    fn counts_and_h() {
        let m = uniform_rect_mesh(32, 32, 1.0, 1.0, Diagonal::Alternating).unwrap();
        assert_eq!(m.num_triangles(), 2048);
        assert_eq!(m.num_vertices(), 33 * 33);
        // legs are 1/32, diagonals sqrt(2)/32
        assert!((m.h_max() - 2f64.sqrt() / 32.0).abs() < 1e-15);
        let shortest = m
            .edges()
            .iter()
            .map(|&[a, b]| {
                let (p, q) = (m.vertices()[a], m.vertices()[b]);
                (p[0] - q[0]).hypot(p[1] - q[1])
            })
            .fold(f64::INFINITY, f64::min);
        assert!((shortest - 1.0 / 32.0).abs() < 1e-15);
    }

    #[test]
    fn fine_kh_resolution() {
        let m = uniform_rect_mesh(96, 96, 1.0, 1.0, Diagonal::Alternating).unwrap();
        assert_eq!(m.num_triangles(), 18432);
    }

    #[test]
    fn area_and_euler_characteristic() {
        for diag in [Diagonal::Alternating, Diagonal::Uniform] {
            let m = uniform_rect_mesh(5, 3, 2.0, 0.5, diag).unwrap();
            assert!((m.total_area() - 1.0).abs() < 1e-14);
            assert_eq!(m.hole_count(), 0);
            assert_eq!(m.boundary_edges().len(), 16);
        }
    }

    #[test]
    fn zero_cells_rejected() {
        assert!(uniform_rect_mesh(0, 3, 1.0, 1.0, Diagonal::Uniform).is_err());
    }
}
