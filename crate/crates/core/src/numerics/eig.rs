//! Symmetric eigensolver and one-sided Jacobi SVD.
//!
//! Both use Jacobi rotations: the matrices here are snapshot-sized (a few
//! hundred at most) and Jacobi gives eigenvectors orthonormal to working
//! precision together with small eigenvalues of high relative accuracy.

use super::dense::DenseMatrix;
use crate::error::{Error, Result};

const MAX_SWEEPS: usize = 100;

/// Eigen-decomposition of a symmetric matrix.
#[derive(Debug, Clone)]
pub struct SymEig {
    /// Eigenvalues in descending order.
    pub values: Vec<f64>,
    /// Eigenvectors stored column-wise, `vectors[(i, k)]` is entry `i` of vector `k`.
    pub vectors: DenseMatrix,
}

impl SymEig {
    pub fn vector(&self, k: usize) -> Vec<f64> {
        self.vectors.column(k)
    }
}

/// Eigenvalues (descending) and orthonormal eigenvectors of a symmetric
/// matrix. In each eigenvector the entry of largest magnitude is positive.
pub fn sym_eig(m: &DenseMatrix) -> Result<SymEig> {
    if !m.is_square() {
        return Err(Error::precondition(format!("sym_eig needs a square matrix, got {}x{}", m.rows(), m.cols())));
    }
    let asym = m.asymmetry();
    if asym > 1e-12 {
        return Err(Error::precondition(format!("sym_eig input is not symmetric (relative asymmetry {asym:.3e})")));
    }
    let n = m.rows();
    // symmetrize exactly so rotations act on a truly symmetric matrix
    let mut a = m.clone();
    for i in 0..n {
        for j in (i + 1)..n {
            let v = 0.5 * (a[(i, j)] + a[(j, i)]);
            a[(i, j)] = v;
            a[(j, i)] = v;
        }
    }
    let mut v = DenseMatrix::identity(n);
    let total: f64 = a.frobenius_norm();
    let target = f64::EPSILON * total;

    let mut converged = n < 2 || total == 0.0;
    let mut sweeps = 0;
    while !converged {
        if sweeps == MAX_SWEEPS {
            return Err(Error::EigenNoConvergence { sweeps, off_norm: off_diagonal_norm(&a) });
        }
        sweeps += 1;
        for p in 0..n {
            for q in (p + 1)..n {
                let apq = a[(p, q)];
                if apq == 0.0 {
                    continue;
                }
                let app = a[(p, p)];
                let aqq = a[(q, q)];
                // skip rotations that cannot change the diagonal in floating point
                if apq.abs() < 1e-3 * f64::EPSILON * (app.abs().min(aqq.abs())) {
                    a[(p, q)] = 0.0;
                    a[(q, p)] = 0.0;
                    continue;
                }
                let theta = (aqq - app) / (2.0 * apq);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                rotate_symmetric(&mut a, p, q, c, s);
                for k in 0..n {
                    let vkp = v[(k, p)];
                    let vkq = v[(k, q)];
                    v[(k, p)] = c * vkp - s * vkq;
                    v[(k, q)] = s * vkp + c * vkq;
                }
            }
        }
        converged = off_diagonal_norm(&a) <= target;
    }

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| a[(j, j)].partial_cmp(&a[(i, i)]).unwrap_or(std::cmp::Ordering::Equal));
    let values: Vec<f64> = order.iter().map(|&i| a[(i, i)]).collect();
    let mut vectors = DenseMatrix::zeros(n, n);
    for (k, &src) in order.iter().enumerate() {
        let sign = sign_rule(&v.column(src));
        for i in 0..n {
            vectors[(i, k)] = sign * v[(i, src)];
        }
    }
    Ok(SymEig { values, vectors })
}

fn rotate_symmetric(a: &mut DenseMatrix, p: usize, q: usize, c: f64, s: f64) {
    let n = a.rows();
    let app = a[(p, p)];
    let aqq = a[(q, q)];
    let apq = a[(p, q)];
    for k in 0..n {
        if k == p || k == q {
            continue;
        }
        let akp = a[(k, p)];
        let akq = a[(k, q)];
        let np = c * akp - s * akq;
        let nq = s * akp + c * akq;
        a[(k, p)] = np;
        a[(p, k)] = np;
        a[(k, q)] = nq;
        a[(q, k)] = nq;
    }
    a[(p, p)] = c * c * app - 2.0 * s * c * apq + s * s * aqq;
    a[(q, q)] = s * s * app + 2.0 * s * c * apq + c * c * aqq;
    a[(p, q)] = 0.0;
    a[(q, p)] = 0.0;
}

fn off_diagonal_norm(a: &DenseMatrix) -> f64 {
    let n = a.rows();
    let mut s = 0.0;
    for i in 0..n {
        for j in 0..n {
            if i != j {
                s += a[(i, j)] * a[(i, j)];
            }
        }
    }
    s.sqrt()
}

/// +1 or -1 so that the largest-magnitude entry becomes positive
/// (first such entry on ties).
pub fn sign_rule(v: &[f64]) -> f64 {
    let mut best = 0.0_f64;
    let mut sign = 1.0;
    for &x in v {
        if x.abs() > best.abs() {
            best = x;
            sign = if x < 0.0 { -1.0 } else { 1.0 };
        }
    }
    sign
}

/// Thin singular value decomposition `A = U diag(sigma) V^T`.
#[derive(Debug, Clone)]
pub struct Svd {
    /// Singular values, descending.
    pub sigma: Vec<f64>,
    /// Left singular vectors, column-wise (rows(A) x cols(A)); zero columns for zero sigma.
    pub u: DenseMatrix,
    /// Right singular vectors, column-wise (cols(A) x cols(A)).
    pub v: DenseMatrix,
}

/// One-sided (Hestenes) Jacobi SVD. The sign rule is applied to the right
/// singular vectors, and left vectors follow.
pub fn jacobi_svd(a: &DenseMatrix) -> Result<Svd> {
    let m = a.rows();
    let n = a.cols();
    // columns stored contiguously for the rotation kernel
    let mut cols: Vec<Vec<f64>> = (0..n).map(|j| a.column(j)).collect();
    let mut v = DenseMatrix::identity(n);
    let tol = f64::EPSILON * (m.max(n) as f64).sqrt();
    // columns at this level are numerically zero; rotating them only chases underflow
    let negligible = (f64::EPSILON * f64::EPSILON * 1e-8) * cols.iter().flatten().map(|x| x * x).sum::<f64>();

    let mut sweeps = 0;
    loop {
        let mut rotated = false;
        let mut worst: f64 = 0.0;
        for p in 0..n {
            for q in (p + 1)..n {
                let alpha: f64 = cols[p].iter().map(|x| x * x).sum();
                let beta: f64 = cols[q].iter().map(|x| x * x).sum();
                let gamma: f64 = cols[p].iter().zip(&cols[q]).map(|(x, y)| x * y).sum();
                if alpha <= negligible || beta <= negligible {
                    continue;
                }
                let rel = gamma.abs() / (alpha.sqrt() * beta.sqrt());
                worst = worst.max(rel);
                if rel <= tol {
                    continue;
                }
                rotated = true;
                let zeta = (beta - alpha) / (2.0 * gamma);
                let t = zeta.signum() / (zeta.abs() + (1.0 + zeta * zeta).sqrt());
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = c * t;
                let (lo, hi) = cols.split_at_mut(q);
                for (x, y) in lo[p].iter_mut().zip(hi[0].iter_mut()) {
                    let xp = *x;
                    let yq = *y;
                    *x = c * xp - s * yq;
                    *y = s * xp + c * yq;
                }
                for k in 0..n {
                    let vkp = v[(k, p)];
                    let vkq = v[(k, q)];
                    v[(k, p)] = c * vkp - s * vkq;
                    v[(k, q)] = s * vkp + c * vkq;
                }
            }
        }
        if !rotated {
            break;
        }
        sweeps += 1;
        if sweeps == MAX_SWEEPS {
            return Err(Error::EigenNoConvergence { sweeps, off_norm: worst });
        }
    }

    let norms: Vec<f64> = cols.iter().map(|c| c.iter().map(|x| x * x).sum::<f64>().sqrt()).collect();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| norms[j].partial_cmp(&norms[i]).unwrap_or(std::cmp::Ordering::Equal));

    let mut sigma = Vec::with_capacity(n);
    let mut u = DenseMatrix::zeros(m, n);
    let mut vs = DenseMatrix::zeros(n, n);
    for (k, &src) in order.iter().enumerate() {
        let s = norms[src];
        let sign = sign_rule(&v.column(src));
        sigma.push(s);
        for i in 0..n {
            vs[(i, k)] = sign * v[(i, src)];
        }
        if s > 0.0 {
            for i in 0..m {
                u[(i, k)] = sign * cols[src][i] / s;
            }
        }
    }
    Ok(Svd { sigma, u, v: vs })
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_symmetric(n: usize, seed: u64) -> DenseMatrix {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut a = DenseMatrix::zeros(n, n);
        for i in 0..n {
            for j in i..n {
                let x: f64 = rng.gen_range(-1.0..1.0);
                a[(i, j)] = x;
                a[(j, i)] = x;
            }
        }
        a
    }

    #[test]
    fn two_by_two_by_hand() {
        let a = DenseMatrix::from_rows(&[vec![2.0, 1.0], vec![1.0, 2.0]]).unwrap();
        let e = sym_eig(&a).unwrap();
        assert!((e.values[0] - 3.0).abs() < 1e-14);
        assert!((e.values[1] - 1.0).abs() < 1e-14);
        let r = 0.5_f64.sqrt();
        let v0 = e.vector(0);
        let v1 = e.vector(1);
        assert!((v0[0] - r).abs() < 1e-14 && (v0[1] - r).abs() < 1e-14);
        // sign rule: largest-magnitude entry positive; ties keep the first
        assert!((v1[0] - r).abs() < 1e-14 && (v1[1] + r).abs() < 1e-14);
    }

    #[test]
    fn identity_three() {
        let e = sym_eig(&DenseMatrix::identity(3)).unwrap();
        assert_eq!(e.values, vec![1.0, 1.0, 1.0]);
        let vtv = e.vectors.transpose().matmul(&e.vectors);
        assert!((vtv.frobenius_norm() - 3.0_f64.sqrt()).abs() < 1e-14);
    }

    #[test]
    fn rejects_asymmetric_and_rectangular() {
        let a = DenseMatrix::from_rows(&[vec![1.0, 2.0], vec![0.0, 1.0]]).unwrap();
        assert!(matches!(sym_eig(&a), Err(Error::Precondition(_))));
        let b = DenseMatrix::zeros(2, 3);
        assert!(matches!(sym_eig(&b), Err(Error::Precondition(_))));
    }

    #[test]
    fn residual_orthonormality_and_trace() {
        for seed in 0..5 {
            let a = random_symmetric(12, seed);
            let e = sym_eig(&a).unwrap();
            let scale = a.frobenius_norm();
            for k in 0..12 {
                let v = e.vector(k);
                let av = a.matvec(&v);
                let res: f64 = av.iter().zip(&v).map(|(x, y)| (x - e.values[k] * y).powi(2)).sum::<f64>().sqrt();
                assert!(res <= 1e-10 * scale, "residual {res}");
                let big = v.iter().cloned().fold(0.0_f64, |m, x| if x.abs() > m.abs() { x } else { m });
                assert!(big > 0.0);
            }
            for w in e.values.windows(2) {
                assert!(w[0] >= w[1]);
            }
            let vtv = e.vectors.transpose().matmul(&e.vectors);
            for i in 0..12 {
                for j in 0..12 {
                    let d = if i == j { 1.0 } else { 0.0 };
                    assert!((vtv[(i, j)] - d).abs() < 1e-10);
                }
            }
            let tr: f64 = e.values.iter().sum();
            assert!((tr - a.trace()).abs() <= 1e-10 * a.trace().abs().max(1.0));
        }
    }

    /// Power iteration with deflation, an independent route to the spectrum.
    fn power_iteration_spectrum(a: &DenseMatrix) -> Vec<f64> {
        let n = a.rows();
        let mut work = a.clone();
        let mut out = Vec::new();
        for k in 0..n {
            let mut x: Vec<f64> = (0..n).map(|i| 1.0 + ((i * 7 + k * 3) % 5) as f64).collect();
            let mut lambda = 0.0;
            for _ in 0..20000 {
                let y = work.matvec(&x);
                let nrm = y.iter().map(|v| v * v).sum::<f64>().sqrt();
                if nrm == 0.0 {
                    break;
                }
                let new_lambda: f64 = y.iter().zip(&x).map(|(a, b)| a * b).sum();
                x = y.iter().map(|v| v / nrm).collect();
                if (new_lambda - lambda).abs() <= 1e-15 * new_lambda.abs() {
                    lambda = new_lambda;
                    break;
                }
                lambda = new_lambda;
            }
            out.push(lambda);
            for i in 0..n {
                for j in 0..n {
                    work[(i, j)] -= lambda * x[i] * x[j];
                }
            }
        }
        out.sort_by(|a, b| b.partial_cmp(a).unwrap());
        out
    }

    #[test]
    fn gram_matrix_matches_power_iteration_oracle() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let snaps: Vec<Vec<f64>> = (0..4).map(|_| (0..30).map(|_| rng.gen_range(-1.0..1.0)).collect()).collect();
        let s = DenseMatrix::from_columns(&snaps).unwrap();
        let gram = s.transpose().matmul(&s);
        let e = sym_eig(&gram).unwrap();
        let oracle = power_iteration_spectrum(&gram);
        for (a, b) in e.values.iter().zip(&oracle) {
            assert!((a - b).abs() <= 1e-9 * b.abs(), "{a} vs {b}");
        }
    }

    #[test]
    fn svd_reconstructs_and_matches_gram_eigenvalues() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let a = DenseMatrix::from_row_major(9, 5, (0..45).map(|_| rng.gen_range(-1.0..1.0)).collect()).unwrap();
        let svd = jacobi_svd(&a).unwrap();
        let e = sym_eig(&a.transpose().matmul(&a)).unwrap();
        for (s, l) in svd.sigma.iter().zip(&e.values) {
            assert!((s * s - l).abs() < 1e-12 * e.values[0]);
        }
        for i in 0..9 {
            for j in 0..5 {
                let r: f64 = (0..5).map(|k| svd.u[(i, k)] * svd.sigma[k] * svd.v[(j, k)]).sum();
                assert!((r - a[(i, j)]).abs() < 1e-13);
            }
        }
    }

    #[test]
    fn svd_of_graded_matrix_keeps_small_values_accurate() {
        // columns scaled over 12 orders of magnitude, exact singular values
        let scales = [1.0, 1e-3, 1e-6, 1e-9, 1e-12];
        let mut a = DenseMatrix::zeros(5, 5);
        for (j, s) in scales.iter().enumerate() {
            a[(j, j)] = *s;
        }
        let svd = jacobi_svd(&a).unwrap();
        for (got, want) in svd.sigma.iter().zip(scales) {
            assert!((got - want).abs() <= 1e-15 * want);
        }
    }
}
