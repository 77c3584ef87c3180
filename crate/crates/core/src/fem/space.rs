use std::collections::{BTreeMap, HashMap};
use std::fmt;
use std::sync::Arc;

use super::element::ElementTables;
use crate::error::{Error, Result};
use crate::mesh::{Axis, Mesh};

/// Boundary velocity `g(x, y, t)`.
pub type Profile = Arc<dyn Fn(f64, f64, f64) -> [f64; 2] + Send + Sync>;

#[derive(Clone)]
pub enum BoundaryCondition {
    NoSlip,
    Dirichlet(Profile),
    /// Normal component zero, tangential stress natural. Edges must be axis aligned.
    NoPenetration,
    /// Do-nothing outflow.
    Natural,
    /// Handled by the mesh's periodic pairs.
    Periodic,
}

impl BoundaryCondition {
    pub fn dirichlet(f: impl Fn(f64, f64, f64) -> [f64; 2] + Send + Sync + 'static) -> Self {
        Self::Dirichlet(Arc::new(f))
    }
}

impl fmt::Debug for BoundaryCondition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::NoSlip => f.write_str("NoSlip"),
            Self::Dirichlet(_) => f.write_str("Dirichlet(..)"),
            Self::NoPenetration => f.write_str("NoPenetration"),
            Self::Natural => f.write_str("Natural"),
            Self::Periodic => f.write_str("Periodic"),
        }
    }
}

pub type BoundaryMap = BTreeMap<u32, BoundaryCondition>;

#[derive(Debug, Clone, Copy, PartialEq)]
enum ConstraintValue {
    Zero,
    Profile { label: u32, comp: usize, x: f64, y: f64 },
}

/// P2 vector velocity / P1 pressure on a mesh, with periodic identification
/// and essential constraints.
///
/// Velocity unknowns are interleaved per node: `2 * node + component`.
/// Monolithic systems place the pressure block after all velocity unknowns.
#[derive(Clone)]
pub struct TaylorHoodSpace {
    mesh: Mesh,
    tables: ElementTables,
    node_of_raw: Vec<usize>,
    node_rep: Vec<usize>,
    elem_nodes: Vec<[usize; 6]>,
    pnode_of_vertex: Vec<usize>,
    n_pressure: usize,
    elem_pnodes: Vec<[usize; 3]>,
    constraints: Vec<(usize, ConstraintValue)>,
    constrained: Vec<bool>,
    pinned: Option<usize>,
    bcs: BoundaryMap,
    pressure_weights: Vec<f64>,
}

impl fmt::Debug for TaylorHoodSpace {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("TaylorHoodSpace")
            .field("triangles", &self.mesh.num_triangles())
            .field("n_velocity", &self.n_velocity())
            .field("n_pressure", &self.n_pressure)
            .field("constrained", &self.constraints.len())
            .field("pinned", &self.pinned)
            .finish()
    }
}

fn find(parent: &mut [usize], mut x: usize) -> usize {
    while parent[x] != x {
        parent[x] = parent[parent[x]];
        x = parent[x];
    }
    x
}

fn union(parent: &mut [usize], a: usize, b: usize) {
    let (ra, rb) = (find(parent, a), find(parent, b));
    if ra != rb {
        // smaller index becomes the representative
        let (lo, hi) = if ra < rb { (ra, rb) } else { (rb, ra) };
        parent[hi] = lo;
    }
}

impl TaylorHoodSpace {
    pub fn new(mesh: Mesh, bcs: BoundaryMap) -> Result<Self> {
        let labels = mesh.labels();
        if let Some(l) = bcs.keys().find(|l| !labels.contains(l)) {
            return Err(Error::Boundary(format!("condition given for label {l}, which no mesh edge carries")));
        }
        if let Some(l) = labels.iter().find(|l| !bcs.contains_key(l)) {
            return Err(Error::Boundary(format!("mesh label {l} has no boundary condition")));
        }
        let nv = mesh.num_vertices();
        let ne = mesh.num_edges();

        // periodic merging of P2 nodes
        let mut parent: Vec<usize> = (0..nv + ne).collect();
        let mut vparent: Vec<usize> = (0..nv).collect();
        let mut per_axis: HashMap<Axis, HashMap<usize, usize>> = HashMap::new();
        for p in mesh.periodic_pairs() {
            union(&mut parent, p.master, p.slave);
            union(&mut vparent, p.master, p.slave);
            per_axis.entry(p.axis).or_default().insert(p.slave, p.master);
        }
        if !per_axis.is_empty() {
            let edge_id: HashMap<[usize; 2], usize> = mesh.edges().iter().enumerate().map(|(i, e)| (*e, i)).collect();
            for (e, &[a, b]) in mesh.edges().iter().enumerate() {
                for map in per_axis.values() {
                    if let (Some(&ma), Some(&mb)) = (map.get(&a), map.get(&b)) {
                        let key = if ma < mb { [ma, mb] } else { [mb, ma] };
                        if let Some(&me) = edge_id.get(&key) {
                            union(&mut parent, nv + me, nv + e);
                        }
                    }
                }
            }
        }
        for (label, bc) in &bcs {
            if matches!(bc, BoundaryCondition::Periodic) {
                let paired: std::collections::HashSet<usize> =
                    mesh.periodic_pairs().iter().flat_map(|p| [p.master, p.slave]).collect();
                if let Some(v) = mesh.label_vertices(*label).into_iter().find(|v| !paired.contains(v)) {
                    return Err(Error::Boundary(format!(
                        "label {label} is periodic but vertex {v} has no periodic partner"
                    )));
                }
            }
        }

        let mut node_of_raw = vec![usize::MAX; nv + ne];
        let mut node_rep = Vec::new();
        for r in 0..nv + ne {
            let root = find(&mut parent, r);
            if root == r {
                node_of_raw[r] = node_rep.len();
                node_rep.push(r);
            }
        }
        for r in 0..nv + ne {
            let root = find(&mut parent, r);
            node_of_raw[r] = node_of_raw[root];
        }
        let mut pnode_of_vertex = vec![usize::MAX; nv];
        let mut n_pressure = 0;
        for v in 0..nv {
            let root = find(&mut vparent, v);
            if root == v {
                pnode_of_vertex[v] = n_pressure;
                n_pressure += 1;
            }
        }
        for v in 0..nv {
            let root = find(&mut vparent, v);
            pnode_of_vertex[v] = pnode_of_vertex[root];
        }

        let elem_nodes: Vec<[usize; 6]> = mesh
            .triangles()
            .iter()
            .zip(mesh.triangle_edges())
            .map(|(t, e)| {
                [
                    node_of_raw[t[0]],
                    node_of_raw[t[1]],
                    node_of_raw[t[2]],
                    node_of_raw[nv + e[0]],
                    node_of_raw[nv + e[1]],
                    node_of_raw[nv + e[2]],
                ]
            })
            .collect();
        let elem_pnodes: Vec<[usize; 3]> = mesh
            .triangles()
            .iter()
            .map(|t| [pnode_of_vertex[t[0]], pnode_of_vertex[t[1]], pnode_of_vertex[t[2]]])
            .collect();

        // essential constraints
        let n_vel = 2 * node_rep.len();
        let mut slot: Vec<Option<(ConstraintValue, bool)>> = vec![None; n_vel];
        let edge_id: HashMap<[usize; 2], usize> = mesh.edges().iter().enumerate().map(|(i, e)| (*e, i)).collect();
        let raw_xy = |r: usize| -> [f64; 2] {
            let v = mesh.vertices();
            if r < nv {
                v[r]
            } else {
                let [a, b] = mesh.edges()[r - nv];
                [0.5 * (v[a][0] + v[b][0]), 0.5 * (v[a][1] + v[b][1])]
            }
        };
        for be in mesh.boundary_edges() {
            let [a, b] = be.vertices;
            let e = edge_id[&if a < b { [a, b] } else { [b, a] }];
            let raws = [a, b, nv + e];
            let bc = &bcs[&be.label];
            let (comps, strong): (Vec<usize>, bool) = match bc {
                BoundaryCondition::NoSlip | BoundaryCondition::Dirichlet(_) => (vec![0, 1], true),
                BoundaryCondition::NoPenetration => {
                    let (p, q) = (mesh.vertices()[a], mesh.vertices()[b]);
                    let (dx, dy) = ((q[0] - p[0]).abs(), (q[1] - p[1]).abs());
                    let len = dx.hypot(dy);
                    if dy <= 1e-12 * len {
                        (vec![1], false)
                    } else if dx <= 1e-12 * len {
                        (vec![0], false)
                    } else {
                        return Err(Error::Boundary(format!(
                            "no-penetration edge {a}-{b} (label {}) is not axis aligned",
                            be.label
                        )));
                    }
                }
                BoundaryCondition::Natural | BoundaryCondition::Periodic => continue,
            };
            for &r in &raws {
                let node = node_of_raw[r];
                let [x, y] = raw_xy(r);
                for &c in &comps {
                    let value = match bc {
                        BoundaryCondition::Dirichlet(_) => ConstraintValue::Profile { label: be.label, comp: c, x, y },
                        _ => ConstraintValue::Zero,
                    };
                    let s = &mut slot[2 * node + c];
                    match s {
                        Some((_, true)) => {}
                        Some((_, false)) if !strong => {}
                        _ => *s = Some((value, strong)),
                    }
                }
            }
        }
        let constraints: Vec<(usize, ConstraintValue)> =
            slot.iter().enumerate().filter_map(|(d, s)| s.map(|(v, _)| (d, v))).collect();
        let mut constrained = vec![false; n_vel];
        for (d, _) in &constraints {
            constrained[*d] = true;
        }
        let has_natural = bcs.values().any(|b| matches!(b, BoundaryCondition::Natural));
        let pinned = if has_natural { None } else { Some(0) };

        let tables = ElementTables::new(&mesh);
        let mut pressure_weights = vec![0.0; n_pressure];
        for (t, pn) in elem_pnodes.iter().enumerate() {
            for &p in pn {
                pressure_weights[p] += tables.geometry[t].area / 3.0;
            }
        }

        Ok(Self {
            mesh,
            tables,
            node_of_raw,
            node_rep,
            elem_nodes,
            pnode_of_vertex,
            n_pressure,
            elem_pnodes,
            constraints,
            constrained,
            pinned,
            bcs,
            pressure_weights,
        })
    }

    pub fn mesh(&self) -> &Mesh {
        &self.mesh
    }

    pub fn tables(&self) -> &ElementTables {
        &self.tables
    }

    pub fn boundary_conditions(&self) -> &BoundaryMap {
        &self.bcs
    }

    pub fn n_nodes(&self) -> usize {
        self.node_rep.len()
    }

    pub fn n_velocity(&self) -> usize {
        2 * self.node_rep.len()
    }

    pub fn n_pressure(&self) -> usize {
        self.n_pressure
    }

    /// Size of the monolithic (velocity, pressure) system.
    pub fn n_total(&self) -> usize {
        self.n_velocity() + self.n_pressure
    }

    /// Merged P2 node of each raw node (vertices, then edge midpoints).
    pub fn node_of_raw(&self) -> &[usize] {
        &self.node_of_raw
    }

    pub fn pressure_node_of_vertex(&self) -> &[usize] {
        &self.pnode_of_vertex
    }

    pub fn element_nodes(&self, t: usize) -> &[usize; 6] {
        &self.elem_nodes[t]
    }

    pub fn element_pressure_nodes(&self, t: usize) -> &[usize; 3] {
        &self.elem_pnodes[t]
    }

    /// Coordinates of a merged node's representative.
    pub fn node_xy(&self, node: usize) -> [f64; 2] {
        let r = self.node_rep[node];
        let nv = self.mesh.num_vertices();
        let v = self.mesh.vertices();
        if r < nv {
            v[r]
        } else {
            let [a, b] = self.mesh.edges()[r - nv];
            [0.5 * (v[a][0] + v[b][0]), 0.5 * (v[a][1] + v[b][1])]
        }
    }

    pub fn is_constrained(&self, dof: usize) -> bool {
        self.constrained[dof]
    }

    pub fn constraint_mask(&self) -> &[bool] {
        &self.constrained
    }

    pub fn constrained_dofs(&self) -> impl Iterator<Item = usize> + '_ {
        self.constraints.iter().map(|(d, _)| *d)
    }

    /// Pressure unknown fixed to zero during solves, if the pressure is only
    /// determined up to a constant.
    pub fn pinned_pressure(&self) -> Option<usize> {
        self.pinned
    }

    /// `(dof, value)` for every constrained velocity unknown at time `t`.
    pub fn boundary_values(&self, t: f64) -> Vec<(usize, f64)> {
        self.constraints
            .iter()
            .map(|&(d, v)| {
                let val = match v {
                    ConstraintValue::Zero => 0.0,
                    ConstraintValue::Profile { label, comp, x, y } => match &self.bcs[&label] {
                        BoundaryCondition::Dirichlet(f) => f(x, y, t)[comp],
                        _ => 0.0,
                    },
                };
                (d, val)
            })
            .collect()
    }

    pub fn apply_boundary_values(&self, u: &mut [f64], t: f64) {
        for (d, v) in self.boundary_values(t) {
            u[d] = v;
        }
    }

    /// True if every constrained value is zero at time `t`.
    pub fn homogeneous(&self, t: f64) -> bool {
        self.boundary_values(t).iter().all(|(_, v)| *v == 0.0)
    }

    /// Nodal interpolant of `f(x, y)`.
    pub fn interpolate(&self, f: impl Fn(f64, f64) -> [f64; 2]) -> Vec<f64> {
        let mut u = vec![0.0; self.n_velocity()];
        for n in 0..self.n_nodes() {
            let [x, y] = self.node_xy(n);
            let v = f(x, y);
            u[2 * n] = v[0];
            u[2 * n + 1] = v[1];
        }
        u
    }

    pub fn interpolate_pressure(&self, f: impl Fn(f64, f64) -> f64) -> Vec<f64> {
        let mut p = vec![f64::NAN; self.n_pressure];
        for (v, &pn) in self.pnode_of_vertex.iter().enumerate() {
            if p[pn].is_nan() {
                let [x, y] = self.mesh.vertices()[v];
                p[pn] = f(x, y);
            }
        }
        p
    }

    /// `int psi_i` for each pressure basis function.
    pub fn pressure_weights(&self) -> &[f64] {
        &self.pressure_weights
    }

    pub fn domain_area(&self) -> f64 {
        self.pressure_weights.iter().sum()
    }

    /// Shifts `p` to zero mean.
    pub fn remove_pressure_mean(&self, p: &mut [f64]) {
        let mean = crate::numerics::dot(p, &self.pressure_weights) / self.domain_area();
        for v in p.iter_mut() {
            *v -= mean;
        }
    }

    pub fn check_velocity(&self, u: &[f64]) -> Result<()> {
        if u.len() != self.n_velocity() {
            return Err(Error::SpaceMismatch(format!(
                "velocity vector has {} entries, space has {}",
                u.len(),
                self.n_velocity()
            )));
        }
        Ok(())
    }

    pub fn check_pressure(&self, p: &[f64]) -> Result<()> {
        if p.len() != self.n_pressure {
            return Err(Error::SpaceMismatch(format!(
                "pressure vector has {} entries, space has {}",
                p.len(),
                self.n_pressure
            )));
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::{identify_periodic, labels, uniform_rect_mesh, Diagonal};

    fn all(bc: BoundaryCondition) -> BoundaryMap {
        [labels::BOTTOM, labels::RIGHT, labels::TOP, labels::LEFT].into_iter().map(|l| (l, bc.clone())).collect()
    }

    #[test]
    fn dof_counts_without_periodicity() {
        let m = uniform_rect_mesh(3, 2, 1.0, 1.0, Diagonal::Alternating).unwrap();
        let (nv, ne) = (m.num_vertices(), m.num_edges());
        let s = TaylorHoodSpace::new(m, all(BoundaryCondition::NoSlip)).unwrap();
        assert_eq!(s.n_velocity(), 2 * (nv + ne));
        assert_eq!(s.n_pressure(), nv);
        assert_eq!(s.pinned_pressure(), Some(0));
        // all boundary P2 nodes: 2 * (3 + 2) edges -> 20 nodes
        assert_eq!(s.constrained_dofs().count(), 2 * 20);
    }

    #[test]
    fn doubly_periodic_merging() {
        let m = uniform_rect_mesh(4, 4, 1.0, 1.0, Diagonal::Alternating).unwrap();
        let m = identify_periodic(identify_periodic(m, Axis::X, None).unwrap(), Axis::Y, None).unwrap();
        let s = TaylorHoodSpace::new(m, all(BoundaryCondition::Periodic)).unwrap();
        // torus: 16 vertices, 48 edges
        assert_eq!(s.n_pressure(), 16);
        assert_eq!(s.n_nodes(), 16 + 48);
        assert_eq!(s.constrained_dofs().count(), 0);
    }

    #[test]
    fn free_slip_constrains_only_normal_component() {
        let m = uniform_rect_mesh(4, 4, 1.0, 1.0, Diagonal::Alternating).unwrap();
        let m = identify_periodic(m, Axis::X, None).unwrap();
        let mut bcs = BoundaryMap::new();
        bcs.insert(labels::BOTTOM, BoundaryCondition::NoPenetration);
        bcs.insert(labels::TOP, BoundaryCondition::NoPenetration);
        bcs.insert(labels::LEFT, BoundaryCondition::Periodic);
        bcs.insert(labels::RIGHT, BoundaryCondition::Periodic);
        let s = TaylorHoodSpace::new(m, bcs).unwrap();
        let dofs: Vec<usize> = s.constrained_dofs().collect();
        assert!(dofs.iter().all(|d| d % 2 == 1));
        // 8 P2 nodes per periodic horizontal side
        assert_eq!(dofs.len(), 16);
        for n in 0..s.n_nodes() {
            let y = s.node_xy(n)[1];
            assert_eq!(s.is_constrained(2 * n + 1), y == 0.0 || y == 1.0);
            assert!(!s.is_constrained(2 * n));
        }
    }

    #[test]
    fn inflow_profile_value() {
        let m = uniform_rect_mesh(4, 4, 2.2, 0.41, Diagonal::Alternating).unwrap();
        let mut bcs = all(BoundaryCondition::NoSlip);
        bcs.insert(labels::LEFT, BoundaryCondition::dirichlet(|_, y, _| [6.0 / (0.41 * 0.41) * y * (0.41 - y), 0.0]));
        let s = TaylorHoodSpace::new(m, bcs).unwrap();
        let mut u = vec![0.0; s.n_velocity()];
        s.apply_boundary_values(&mut u, 0.0);
        let node = (0..s.n_nodes())
            .find(|&n| {
                let [x, y] = s.node_xy(n);
                x == 0.0 && (y - 0.205).abs() < 1e-12
            })
            .unwrap();
        assert!((u[2 * node] - 1.5).abs() < 1e-14);
    }

    #[test]
    fn label_errors() {
        let m = uniform_rect_mesh(2, 2, 1.0, 1.0, Diagonal::Alternating).unwrap();
        let mut bcs = all(BoundaryCondition::NoSlip);
        bcs.insert(9, BoundaryCondition::NoSlip);
        assert!(matches!(TaylorHoodSpace::new(m.clone(), bcs), Err(Error::Boundary(_))));
        let mut bcs = all(BoundaryCondition::NoSlip);
        bcs.remove(&labels::TOP);
        assert!(matches!(TaylorHoodSpace::new(m.clone(), bcs), Err(Error::Boundary(_))));
        // periodic label without identification
        let bcs = all(BoundaryCondition::Periodic);
        assert!(matches!(TaylorHoodSpace::new(m, bcs), Err(Error::Boundary(_))));
    }
}
