//! L2-orthonormal POD bases by the method of snapshots.
//!
//! The snapshot Gram matrix `C = U^T M U / m` is never formed. Snapshots are
//! first orthonormalized in the mass inner product, `U = Q R`, and the
//! one-sided Jacobi SVD of `(R / sqrt(m))^T` then gives the eigenvectors of
//! `C` as its left singular vectors and the eigenvalues of `C` as squared
//! singular values.
//! Small eigenvalues keep their relative accuracy this way.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fem::LinearOperators;
use crate::numerics::{dot, jacobi_svd, sign_rule, DenseMatrix, SparseMatrix};

/// Eigenvalues below this fraction of the largest are dropped.
pub const RANK_CUTOFF: f64 = 1e-12;

/// Columns `u_0 .. u_M` with their times.
#[derive(Debug, Clone, PartialEq)]
pub struct SnapshotSet {
    n_dofs: usize,
    times: Vec<f64>,
    columns: Vec<Vec<f64>>,
}

impl SnapshotSet {
    pub fn new(n_dofs: usize) -> Self {
        Self { n_dofs, times: Vec::new(), columns: Vec::new() }
    }

    pub fn from_columns(n_dofs: usize, times: Vec<f64>, columns: Vec<Vec<f64>>) -> Result<Self> {
        if times.len() != columns.len() {
            return Err(Error::precondition("snapshot times and columns differ in count"));
        }
        let mut s = Self::new(n_dofs);
        for (t, c) in times.into_iter().zip(columns) {
            s.push(t, c)?;
        }
        Ok(s)
    }

    pub fn push(&mut self, time: f64, u: Vec<f64>) -> Result<()> {
        if u.len() != self.n_dofs {
            return Err(Error::SpaceMismatch(format!("snapshot has {} entries, expected {}", u.len(), self.n_dofs)));
        }
        if self.times.last().is_some_and(|&last| !(time > last)) {
            return Err(Error::precondition("snapshot times must increase strictly"));
        }
        self.times.push(time);
        self.columns.push(u);
        Ok(())
    }

    pub fn n_dofs(&self) -> usize {
        self.n_dofs
    }

    pub fn len(&self) -> usize {
        self.columns.len()
    }

    pub fn is_empty(&self) -> bool {
        self.columns.is_empty()
    }

    pub fn times(&self) -> &[f64] {
        &self.times
    }

    pub fn columns(&self) -> &[Vec<f64>] {
        &self.columns
    }

    pub fn column(&self, j: usize) -> &[f64] {
        &self.columns[j]
    }

    /// Arithmetic mean of the columns.
    pub fn mean(&self) -> Vec<f64> {
        let mut m = vec![0.0; self.n_dofs];
        for c in &self.columns {
            for (a, b) in m.iter_mut().zip(c) {
                *a += b;
            }
        }
        let k = self.columns.len().max(1) as f64;
        m.iter_mut().for_each(|v| *v /= k);
        m
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Centering {
    #[default]
    None,
    Mean,
}

impl std::str::FromStr for Centering {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "none" => Ok(Self::None),
            "mean" => Ok(Self::Mean),
            _ => Err(Error::Config(format!("unknown centering '{s}' (expected none or mean)"))),
        }
    }
}

impl std::fmt::Display for Centering {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Self::None => "none",
            Self::Mean => "mean",
        })
    }
}

/// Modes `psi_1 .. psi_d` with eigenvalues and mode gradient norms.
#[derive(Debug, Clone, PartialEq)]
pub struct PodBasis {
    pub modes: Vec<Vec<f64>>,
    /// `lambda_1 >= .. >= lambda_d > 0`
    pub eigenvalues: Vec<f64>,
    /// `||grad psi_k||`
    pub grad_norms: Vec<f64>,
    pub mean: Option<Vec<f64>>,
    /// Every eigenvalue of the Gram matrix, including those under the cutoff.
    pub spectrum: Vec<f64>,
    pub n_snapshots: usize,
}

impl PodBasis {
    pub fn rank(&self) -> usize {
        self.modes.len()
    }

    pub fn n_dofs(&self) -> usize {
        self.modes.first().map_or(0, Vec::len)
    }

    pub fn centering(&self) -> Centering {
        if self.mean.is_some() {
            Centering::Mean
        } else {
            Centering::None
        }
    }

    fn check_r(&self, r: usize) -> Result<()> {
        if r > self.rank() {
            return Err(Error::RankExceeded { requested: r, rank: self.rank() });
        }
        Ok(())
    }

    /// `a_i = (u - mean, psi_i)` for `i < r`.
    pub fn project(&self, mass: &SparseMatrix, r: usize, u: &[f64]) -> Result<Vec<f64>> {
        self.check_r(r)?;
        if u.len() != self.n_dofs() {
            return Err(Error::SpaceMismatch(format!("field has {} entries, basis {}", u.len(), self.n_dofs())));
        }
        let w: Vec<f64> = match &self.mean {
            Some(m) => u.iter().zip(m).map(|(a, b)| a - b).collect(),
            None => u.to_vec(),
        };
        let mw = mass.matvec(&w);
        Ok(self.modes[..r].iter().map(|p| dot(p, &mw)).collect())
    }

    /// `mean + sum_j a_j psi_j`
    pub fn reconstruct(&self, a: &[f64]) -> Result<Vec<f64>> {
        self.check_r(a.len())?;
        let mut u = self.mean.clone().unwrap_or_else(|| vec![0.0; self.n_dofs()]);
        for (aj, p) in a.iter().zip(&self.modes) {
            for (x, y) in u.iter_mut().zip(p) {
                *x += aj * y;
            }
        }
        Ok(u)
    }

    /// Truncation to the leading `r` modes.
    pub fn truncated(&self, r: usize) -> Result<PodBasis> {
        self.check_r(r)?;
        let mut b = self.clone();
        b.modes.truncate(r);
        b.eigenvalues.truncate(r);
        b.grad_norms.truncate(r);
        Ok(b)
    }
}

/// Method of snapshots in the L2 inner product; `ops` carries the unit-viscosity
/// mass and stiffness matrices.
pub fn build_pod_basis(snapshots: &SnapshotSet, ops: &LinearOperators, centering: Centering) -> Result<PodBasis> {
    if snapshots.is_empty() {
        return Err(Error::precondition("at least one snapshot is required"));
    }
    let n = snapshots.n_dofs();
    if ops.mass.rows() != n {
        return Err(Error::SpaceMismatch(format!("snapshots have {n} entries, mass matrix {}", ops.mass.rows())));
    }
    let m = snapshots.len();
    let mean = match centering {
        Centering::Mean => Some(snapshots.mean()),
        Centering::None => None,
    };
    let cols: Vec<Vec<f64>> = snapshots
        .columns()
        .iter()
        .map(|c| match &mean {
            Some(mu) => c.iter().zip(mu).map(|(a, b)| a - b).collect(),
            None => c.clone(),
        })
        .collect();

    let (q, r) = mass_qr(&ops.mass, &cols);
    if q.is_empty() {
        return Err(Error::RankZero);
    }
    // (R / sqrt(m))^T has no more columns than R has rows; its left singular
    // vectors are the Gram eigenvectors in snapshot index
    let scale = 1.0 / (m as f64).sqrt();
    let mut rt = DenseMatrix::zeros(m, q.len());
    for (j, col) in r.iter().enumerate() {
        for (i, v) in col.iter().enumerate() {
            rt[(j, i)] = v * scale;
        }
    }
    let svd = jacobi_svd(&rt)?;
    let spectrum: Vec<f64> = svd.sigma.iter().map(|s| s * s).collect();
    let lambda1 = spectrum[0];
    if !(lambda1 > 0.0) {
        return Err(Error::RankZero);
    }
    let d = spectrum.iter().take_while(|&&l| l > RANK_CUTOFF * lambda1).count();
    let mut modes = Vec::with_capacity(d);
    let mut grad_norms = Vec::with_capacity(d);
    for k in 0..d {
        let sign = sign_rule(&svd.u.column(k));
        let mut psi = vec![0.0; n];
        for (i, qi) in q.iter().enumerate() {
            let c = sign * svd.v[(i, k)];
            for (x, y) in psi.iter_mut().zip(qi) {
                *x += c * y;
            }
        }
        grad_norms.push(ops.stiffness.bilinear(&psi, &psi).max(0.0).sqrt());
        modes.push(psi);
    }
    Ok(PodBasis { modes, eigenvalues: spectrum[..d].to_vec(), grad_norms, mean, spectrum, n_snapshots: m })
}

/// Mass-orthonormal `Q` and coefficients `R` (column `j` holds `(u_j, q_i)`)
/// by classical Gram-Schmidt with reorthogonalization. Columns whose
/// remainder falls to roundoff are absorbed without adding a direction.
fn mass_qr(mass: &SparseMatrix, cols: &[Vec<f64>]) -> (Vec<Vec<f64>>, Vec<Vec<f64>>) {
    let norm = |v: &[f64]| mass.bilinear(v, v).max(0.0).sqrt();
    let scale = cols.iter().map(|c| norm(c)).fold(0.0, f64::max);
    let mut q: Vec<Vec<f64>> = Vec::new();
    let mut mq: Vec<Vec<f64>> = Vec::new();
    let mut r = Vec::with_capacity(cols.len());
    for c in cols {
        let mut v = c.clone();
        let mut coef = vec![0.0; q.len()];
        for _ in 0..2 {
            let h: Vec<f64> = mq.iter().map(|mqi| dot(mqi, &v)).collect();
            for ((qi, hi), ci) in q.iter().zip(&h).zip(coef.iter_mut()) {
                *ci += hi;
                for (x, y) in v.iter_mut().zip(qi) {
                    *x -= hi * y;
                }
            }
        }
        let nv = norm(&v);
        if scale > 0.0 && nv > 1e-13 * scale {
            v.iter_mut().for_each(|x| *x /= nv);
            coef.push(nv);
            mq.push(mass.matvec(&v));
            q.push(v);
        }
        r.push(coef);
    }
    let k = q.len();
    for c in &mut r {
        c.resize(k, 0.0);
    }
    (q, r)
}

/// Both sides of the projection-error identity
/// `1/m sum_j ||grad(u_j - P_r u_j)||^2 = sum_{k>r} ||grad psi_k||^2 lambda_k`,
/// the left by direct evaluation over the snapshots.
pub fn pod_projection_error(
    basis: &PodBasis,
    snapshots: &SnapshotSet,
    ops: &LinearOperators,
    r: usize,
) -> Result<(f64, f64)> {
    basis.check_r(r)?;
    let mut lhs = 0.0;
    for u in snapshots.columns() {
        let a = basis.project(&ops.mass, r, u)?;
        let p = basis.reconstruct(&a)?;
        let e: Vec<f64> = u.iter().zip(&p).map(|(x, y)| x - y).collect();
        lhs += ops.stiffness.bilinear(&e, &e);
    }
    lhs /= snapshots.len() as f64;
    let rhs = basis.grad_norms[r..].iter().zip(&basis.eigenvalues[r..]).map(|(g, l)| g * g * l).sum();
    Ok((lhs, rhs))
}

/// Coefficients of the L2 projection of `u` onto `mean + span{psi_1..psi_r}`.
pub fn project_field(basis: &PodBasis, mass: &SparseMatrix, r: usize, u: &[f64]) -> Result<Vec<f64>> {
    basis.project(mass, r, u)
}
