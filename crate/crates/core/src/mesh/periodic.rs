use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use super::{Mesh, PeriodicPair};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Axis {
    X,
    Y,
}

impl Axis {
    pub fn index(self) -> usize {
        match self {
            Axis::X => 0,
            Axis::Y => 1,
        }
    }
}

/// Pairs every boundary vertex on the low side of `axis` (master) with the
/// vertex on the high side at the same transverse coordinate (slave).
///
/// `tolerance` is absolute; `None` means `1e-8` times the domain extent.
pub fn identify_periodic(mut mesh: Mesh, axis: Axis, tolerance: Option<f64>) -> Result<Mesh> {
    let d = axis.index();
    let t = 1 - d;
    let (lo, hi) = mesh.bounding_box();
    let extent = (hi[0] - lo[0]).max(hi[1] - lo[1]);
    let tol = tolerance.unwrap_or(1e-8 * extent);
    if !(tol > 0.0) {
        return Err(Error::precondition("periodic tolerance must be positive"));
    }
    if mesh.periodic_pairs().iter().any(|p| p.axis == axis) {
        return Err(Error::precondition(format!("axis {axis:?} already identified")));
    }
    let boundary: BTreeSet<usize> = mesh.boundary_edges().iter().flat_map(|e| e.vertices).collect();
    let v = mesh.vertices();
    let mut low: Vec<usize> = boundary.iter().copied().filter(|&i| (v[i][d] - lo[d]).abs() <= tol).collect();
    let mut high: Vec<usize> = boundary.iter().copied().filter(|&i| (v[i][d] - hi[d]).abs() <= tol).collect();
    low.sort_by(|&a, &b| v[a][t].total_cmp(&v[b][t]));
    high.sort_by(|&a, &b| v[a][t].total_cmp(&v[b][t]));

    let mut used = vec![false; high.len()];
    let mut pairs = Vec::with_capacity(low.len());
    for &m in &low {
        // sorted lists: binary search the nearest transverse coordinate
        let k = high.partition_point(|&s| v[s][t] < v[m][t] - tol);
        match high.get(k) {
            Some(&s) if !used[k] && (v[s][t] - v[m][t]).abs() <= tol => {
                used[k] = true;
                pairs.push(PeriodicPair { master: m, slave: s, axis });
            }
            _ => {
                return Err(Error::UnmatchedPeriodicVertex { vertex: m, x: v[m][0], y: v[m][1] });
            }
        }
    }
    if let Some(k) = used.iter().position(|u| !u) {
        let s = high[k];
        return Err(Error::UnmatchedPeriodicVertex { vertex: s, x: v[s][0], y: v[s][1] });
    }
    mesh.push_periodic_pairs(pairs);
    Ok(mesh)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::{uniform_rect_mesh, BoundaryEdge, Diagonal};

    #[test]
    fn unit_square_pairs() {
        let m = uniform_rect_mesh(5, 7, 1.0, 1.0, Diagonal::Alternating).unwrap();
        let m = identify_periodic(m, Axis::X, None).unwrap();
        assert_eq!(m.periodic_pairs().len(), 8);
    }

    #[test]
    fn four_by_three_translation() {
        let m = uniform_rect_mesh(4, 3, 1.0, 1.0, Diagonal::Alternating).unwrap();
        let m = identify_periodic(m, Axis::X, None).unwrap();
        assert_eq!(m.periodic_pairs().len(), 4);
        for p in m.periodic_pairs() {
            let (a, b) = (m.vertices()[p.master], m.vertices()[p.slave]);
            assert!((b[0] - a[0] - 1.0).abs() < 1e-15 && (b[1] - a[1]).abs() < 1e-15);
        }
    }

    #[test]
    fn perturbed_right_side_is_unmatched() {
        let m = uniform_rect_mesh(2, 2, 1.0, 1.0, Diagonal::Uniform).unwrap();
        let mut v = m.vertices().to_vec();
        v[5][1] += 1e-3; // (1, 0.5)
        let be: Vec<BoundaryEdge> = m.boundary_edges().to_vec();
        let m = Mesh::new(v, m.triangles().to_vec(), be).unwrap();
        match identify_periodic(m, Axis::X, None) {
            Err(Error::UnmatchedPeriodicVertex { x, y, .. }) => {
                assert_eq!((x, y), (0.0, 0.5));
            }
            other => panic!("expected unmatched vertex, got {other:?}"),
        }
    }

    #[test]
    fn both_axes() {
        let m = uniform_rect_mesh(3, 3, 2.0, 2.0, Diagonal::Alternating).unwrap();
        let m = identify_periodic(identify_periodic(m, Axis::X, None).unwrap(), Axis::Y, None).unwrap();
        assert_eq!(m.periodic_pairs().len(), 8);
        assert!(identify_periodic(m, Axis::Y, None).is_err());
    }
}
