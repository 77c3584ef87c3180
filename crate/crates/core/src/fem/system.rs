//! Monolithic velocity-pressure systems and essential constraints.

use super::assembly::LinearOperators;
use super::space::TaylorHoodSpace;
use crate::error::{Error, Result};
use crate::numerics::{solve_sparse, SparseMatrix, TripletBuilder};

/// Sparsity pattern of `[[A, B^T], [B, 0]]` with explicit pressure diagonal,
/// and the value positions of every element's velocity block.
#[derive(Debug, Clone)]
pub struct SaddlePattern {
    pattern: SparseMatrix,
    elem_pos: Vec<usize>,
}

impl SaddlePattern {
    pub fn new(space: &TaylorHoodSpace) -> Self {
        let n = space.n_total();
        let nv = space.n_velocity();
        let ne = space.mesh().num_triangles();
        let mut b = TripletBuilder::with_capacity(n, n, ne * 216 + space.n_pressure());
        for t in 0..ne {
            let nodes = space.element_nodes(t);
            let pn = space.element_pressure_nodes(t);
            for i in 0..12 {
                let di = 2 * nodes[i / 2] + i % 2;
                for j in 0..12 {
                    b.add(di, 2 * nodes[j / 2] + j % 2, 0.0);
                }
                for &p in pn {
                    b.add(di, nv + p, 0.0);
                    b.add(nv + p, di, 0.0);
                }
            }
        }
        for p in 0..space.n_pressure() {
            b.add(nv + p, nv + p, 0.0);
        }
        let pattern = b.finalize();
        let mut elem_pos = Vec::with_capacity(ne * 144);
        for t in 0..ne {
            let nodes = space.element_nodes(t);
            for i in 0..12 {
                let di = 2 * nodes[i / 2] + i % 2;
                for j in 0..12 {
                    elem_pos.push(pattern.position(di, 2 * nodes[j / 2] + j % 2).expect("pattern"));
                }
            }
        }
        Self { pattern, elem_pos }
    }

    pub fn pattern(&self) -> &SparseMatrix {
        &self.pattern
    }

    /// Zero matrix with the saddle pattern.
    pub fn zeros(&self) -> SparseMatrix {
        self.pattern.clone()
    }

    /// Adds `alpha * block` with its (0, 0) entry placed at `(row_off, col_off)`.
    pub fn add_block(&self, m: &mut SparseMatrix, block: &SparseMatrix, alpha: f64, row_off: usize, col_off: usize) {
        for i in 0..block.rows() {
            for (j, v) in block.row_entries(i) {
                let k = m.position(row_off + i, col_off + j).expect("block outside saddle pattern");
                m.values_mut()[k] += alpha * v;
            }
        }
    }

    /// Adds `alpha * block^T` at `(row_off, col_off)`.
    pub fn add_block_transposed(
        &self,
        m: &mut SparseMatrix,
        block: &SparseMatrix,
        alpha: f64,
        row_off: usize,
        col_off: usize,
    ) {
        for i in 0..block.rows() {
            for (j, v) in block.row_entries(i) {
                let k = m.position(row_off + j, col_off + i).expect("block outside saddle pattern");
                m.values_mut()[k] += alpha * v;
            }
        }
    }

    pub(crate) fn add_element_velocity(&self, values: &mut [f64], t: usize, local: &[[f64; 12]; 12]) {
        let pos = &self.elem_pos[t * 144..(t + 1) * 144];
        for i in 0..12 {
            for j in 0..12 {
                values[pos[12 * i + j]] += local[i][j];
            }
        }
    }
}

/// Replaces the rows of `fixed` unknowns by identity rows with the given
/// values and eliminates their columns into the right-hand side.
pub fn eliminate(m: &mut SparseMatrix, rhs: &mut [f64], fixed: &[(usize, f64)]) -> Result<()> {
    let n = m.rows();
    if rhs.len() != n {
        return Err(Error::precondition("rhs length mismatch in constraint elimination"));
    }
    let mut val: Vec<Option<f64>> = vec![None; n];
    for &(i, g) in fixed {
        if i >= n {
            return Err(Error::precondition(format!("constraint on unknown {i} of {n}")));
        }
        val[i] = Some(g);
    }
    let row_ptr = m.row_ptr().to_vec();
    let col_idx = m.col_idx().to_vec();
    let values = m.values_mut();
    for i in 0..n {
        let range = row_ptr[i]..row_ptr[i + 1];
        if let Some(g) = val[i] {
            let mut has_diag = false;
            for k in range {
                if col_idx[k] == i {
                    values[k] = 1.0;
                    has_diag = true;
                } else {
                    values[k] = 0.0;
                }
            }
            if !has_diag {
                return Err(Error::Singular { row: i, detail: "constrained row has no diagonal entry".into() });
            }
            rhs[i] = g;
        } else {
            for k in range {
                if let Some(g) = val[col_idx[k]] {
                    rhs[i] -= values[k] * g;
                    values[k] = 0.0;
                }
            }
        }
    }
    Ok(())
}

/// Constrained unknowns of a velocity-only (`n_velocity`) or monolithic
/// (`n_total`) system of size `n`, with their values at time `t`; the pinned
/// pressure is fixed to zero. `t = None` gives homogeneous values, as needed
/// for Newton increments.
pub fn constraint_list(space: &TaylorHoodSpace, n: usize, t: Option<f64>) -> Result<Vec<(usize, f64)>> {
    let mut fixed: Vec<(usize, f64)> = match t {
        Some(t) => space.boundary_values(t),
        None => space.constrained_dofs().map(|d| (d, 0.0)).collect(),
    };
    if n == space.n_total() {
        if let Some(p) = space.pinned_pressure() {
            fixed.push((space.n_velocity() + p, 0.0));
        }
    } else if n != space.n_velocity() {
        return Err(Error::SpaceMismatch(format!(
            "system of size {n} is neither velocity ({}) nor monolithic ({})",
            space.n_velocity(),
            space.n_total()
        )));
    }
    Ok(fixed)
}

/// Imposes the space's essential values at time `t` (and the pressure pin) on
/// a velocity-only or monolithic system.
pub fn apply_constraints(space: &TaylorHoodSpace, m: &mut SparseMatrix, rhs: &mut [f64], t: f64) -> Result<()> {
    let fixed = constraint_list(space, m.rows(), Some(t))?;
    eliminate(m, rhs, &fixed)
}

/// L2-closest discretely divergence-free field with the essential values of
/// `u`: solves `M w + B^T p = M u`, `B w = 0`. `ops` with unit viscosity.
pub fn project_divergence_free(space: &TaylorHoodSpace, ops: &LinearOperators, u: &[f64]) -> Result<Vec<f64>> {
    space.check_velocity(u)?;
    let nv = space.n_velocity();
    let pat = SaddlePattern::new(space);
    let mut m = pat.zeros();
    pat.add_block(&mut m, &ops.mass, 1.0, 0, 0);
    pat.add_block_transposed(&mut m, &ops.divergence, 1.0, 0, nv);
    pat.add_block(&mut m, &ops.divergence, 1.0, nv, 0);
    let mut rhs = ops.mass.matvec(u);
    rhs.resize(space.n_total(), 0.0);
    let mut fixed: Vec<(usize, f64)> = space.constrained_dofs().map(|d| (d, u[d])).collect();
    if let Some(p) = space.pinned_pressure() {
        fixed.push((nv + p, 0.0));
    }
    eliminate(&mut m, &mut rhs, &fixed)?;
    let mut x = solve_sparse(&m, &rhs)?;
    x.truncate(nv);
    Ok(x)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn elimination_keeps_symmetry() {
        let mut b = TripletBuilder::new(3, 3);
        for (i, j, v) in [(0, 0, 2.0), (0, 1, -1.0), (1, 0, -1.0), (1, 1, 2.0), (1, 2, -1.0), (2, 1, -1.0), (2, 2, 2.0)]
        {
            b.add(i, j, v);
        }
        let mut m = b.finalize();
        let mut rhs = vec![0.0, 0.0, 0.0];
        eliminate(&mut m, &mut rhs, &[(0, 1.0)]).unwrap();
        assert_eq!(m.max_asymmetry(), 0.0);
        assert_eq!(rhs, vec![1.0, 1.0, 0.0]);
        let x = crate::numerics::solve_sparse(&m, &rhs).unwrap();
        // unconstrained rows keep their original equations
        assert!((x[0] - 1.0).abs() < 1e-14);
        assert!((2.0 * x[1] - x[2] - 1.0).abs() < 1e-14);
    }
}
