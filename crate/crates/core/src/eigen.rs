//! Cyclic Jacobi eigensolver for dense real symmetric matrices.

use nalgebra::DMatrix;

use crate::error::{Error, Result};

/// Convergence settings for [`jacobi_eigen`].
#[derive(Clone, Copy, Debug)]
pub struct JacobiSettings {
    /// Stop when the off-diagonal Frobenius norm falls below
    /// `tolerance × ‖A‖_F`.
    pub tolerance: f64,
    pub max_sweeps: usize,
}

impl Default for JacobiSettings {
    fn default() -> Self {
        JacobiSettings {
            tolerance: 1e-12,
            max_sweeps: 30,
        }
    }
}

#[derive(Clone, Debug)]
pub struct SymmetricEigen {
    /// Ascending.
    pub eigenvalues: Vec<f64>,
    /// Column `i` is the eigenvector of `eigenvalues[i]`, when requested.
    pub eigenvectors: Option<DMatrix<f64>>,
    pub sweeps: usize,
}

fn off_norm_sq(a: &[f64], n: usize) -> f64 {
    let mut s = 0.0;
    for i in 0..n {
        for j in (i + 1)..n {
            s += a[i * n + j] * a[i * n + j];
        }
    }
    2.0 * s
}

/// Eigen-decomposition of the symmetric matrix `m` (only the upper triangle
/// is trusted; the input is symmetrized first).
pub fn jacobi_eigen(
    m: &DMatrix<f64>,
    want_vectors: bool,
    settings: JacobiSettings,
) -> Result<SymmetricEigen> {
    let n = m.nrows();
    if m.ncols() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            got: m.ncols(),
        });
    }
    // Row-major working copy.
    let mut a = vec![0.0; n * n];
    for i in 0..n {
        for j in 0..n {
            a[i * n + j] = 0.5 * (m[(i, j)] + m[(j, i)]);
        }
    }
    let mut v = if want_vectors {
        let mut v = vec![0.0; n * n];
        for i in 0..n {
            v[i * n + i] = 1.0;
        }
        Some(v)
    } else {
        None
    };
    let total: f64 = a.iter().map(|x| x * x).sum::<f64>().sqrt();
    let target = settings.tolerance * total.max(f64::MIN_POSITIVE);
    let mut sweeps = 0;
    // Round-robin pairing: each sweep visits every (p, q) once, in `m − 1`
    // rounds of disjoint pairs whose rotations commute. Rows are rotated
    // pair by pair, then every row is swept once for the column update, so
    // all memory access is contiguous.
    let m = n + n % 2;
    let mut players: Vec<usize> = (0..m).collect();
    let mut rot: Vec<(usize, usize, f64, f64)> = Vec::with_capacity(m / 2);
    loop {
        let off = off_norm_sq(&a, n).sqrt();
        if off <= target || n < 2 {
            break;
        }
        if sweeps == settings.max_sweeps {
            return Err(Error::NoConvergence {
                sweeps,
                off_norm: off,
            });
        }
        sweeps += 1;
        for _round in 0..(m - 1) {
            rot.clear();
            for i in 0..m / 2 {
                let (x, y) = (players[i], players[m - 1 - i]);
                if x >= n || y >= n {
                    continue;
                }
                let (p, q) = (x.min(y), x.max(y));
                let apq = a[p * n + q];
                if apq == 0.0 {
                    continue;
                }
                let app = a[p * n + p];
                let aqq = a[q * n + q];
                // Negligible against both diagonal entries: annihilate.
                let tiny = 100.0 * apq.abs();
                if sweeps > 3 && app.abs() + tiny == app.abs() && aqq.abs() + tiny == aqq.abs() {
                    a[p * n + q] = 0.0;
                    a[q * n + p] = 0.0;
                    continue;
                }
                let theta = (aqq - app) / (2.0 * apq);
                let sign = if theta >= 0.0 { 1.0 } else { -1.0 };
                let t = sign / (theta.abs() + (theta * theta + 1.0).sqrt());
                let c = 1.0 / (t * t + 1.0).sqrt();
                rot.push((p, q, c, t * c));
            }
            // Rows p and q of A ← Jᵀ A.
            for &(p, q, c, s) in &rot {
                let (lo, hi) = a.split_at_mut(q * n);
                let row_p = &mut lo[p * n..(p + 1) * n];
                let row_q = &mut hi[..n];
                for (xp, xq) in row_p.iter_mut().zip(row_q.iter_mut()) {
                    let (u, v) = (*xp, *xq);
                    *xp = c * u - s * v;
                    *xq = s * u + c * v;
                }
            }
            // Columns: A ← A J, one row at a time.
            for row in a.chunks_exact_mut(n) {
                for &(p, q, c, s) in &rot {
                    let (u, v) = (row[p], row[q]);
                    row[p] = c * u - s * v;
                    row[q] = s * u + c * v;
                }
            }
            for &(p, q, _, _) in &rot {
                a[p * n + q] = 0.0;
                a[q * n + p] = 0.0;
            }
            if let Some(v) = v.as_mut() {
                for row in v.chunks_exact_mut(n) {
                    for &(p, q, c, s) in &rot {
                        let (u, w) = (row[p], row[q]);
                        row[p] = c * u - s * w;
                        row[q] = s * u + c * w;
                    }
                }
            }
            // Rotate every seat but the first.
            let last = players[m - 1];
            for i in (2..m).rev() {
                players[i] = players[i - 1];
            }
            players[1] = last;
        }
    }
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| a[i * n + i].total_cmp(&a[j * n + j]));
    let eigenvalues = order.iter().map(|&i| a[i * n + i]).collect();
    let eigenvectors = v.map(|v| DMatrix::from_fn(n, n, |r, c| v[r * n + order[c]]));
    Ok(SymmetricEigen {
        eigenvalues,
        eigenvectors,
        sweeps,
    })
}

/// Symmetric positive-definite square root and its determinant-free inverse:
/// returns `(M^{1/2}, M^{-1/2})`.
pub fn spd_sqrt(m: &DMatrix<f64>) -> Result<(DMatrix<f64>, DMatrix<f64>)> {
    let eig = jacobi_eigen(m, true, JacobiSettings::default())?;
    let v = eig.eigenvectors.expect("requested eigenvectors");
    if eig.eigenvalues.iter().any(|&l| l <= 0.0) {
        return Err(Error::SingularMetric { point: Vec::new() });
    }
    let n = m.nrows();
    let root = DMatrix::from_diagonal(&nalgebra::DVector::from_iterator(
        n,
        eig.eigenvalues.iter().map(|l| l.sqrt()),
    ));
    let inv_root = DMatrix::from_diagonal(&nalgebra::DVector::from_iterator(
        n,
        eig.eigenvalues.iter().map(|l| 1.0 / l.sqrt()),
    ));
    Ok((&v * root * v.transpose(), &v * inv_root * v.transpose()))
}
