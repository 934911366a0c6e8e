//! Small dense linear algebra used by the pointwise solvers.

use nalgebra::{DMatrix, DVector, SymmetricEigen};

/// Least-squares solution with diagnostics.
#[derive(Debug, Clone)]
pub struct LeastSquares {
    pub x: Vec<f64>,
    /// `|Ax - b| / max(|b|, 1)`.
    pub residual: f64,
    /// 1-norm condition number of the column-equilibrated system
    /// (infinite when it is numerically singular).
    pub condition: f64,
}

fn norm1_upper(r: &DMatrix<f64>) -> f64 {
    (0..r.ncols())
        .map(|j| (0..=j).map(|i| r[(i, j)].abs()).sum::<f64>())
        .fold(0.0, f64::max)
}

/// Inverse of an upper-triangular matrix by back substitution.
fn inverse_upper(r: &DMatrix<f64>) -> Option<DMatrix<f64>> {
    let n = r.ncols();
    let mut inv = DMatrix::zeros(n, n);
    for j in 0..n {
        for i in (0..=j).rev() {
            let mut s = if i == j { 1.0 } else { 0.0 };
            for k in i + 1..=j {
                s -= r[(i, k)] * inv[(k, j)];
            }
            let d = r[(i, i)];
            if d == 0.0 {
                return None;
            }
            inv[(i, j)] = s / d;
        }
    }
    inv.iter().all(|v| v.is_finite()).then_some(inv)
}

/// Solve `min |Ax - b|`. `rows` are the rows of `A`.
///
/// Columns are scaled to unit norm first so that a badly scaled unknown
/// (e.g. an angular component near a polar axis) is still resolved to
/// working precision. Full-column-rank systems go through Householder QR
/// plus one refinement step; singular or underdetermined ones fall back to
/// the minimum-norm SVD solution.
pub fn least_squares(rows: &[Vec<f64>], b: &[f64]) -> LeastSquares {
    let m = rows.len();
    let n = rows.first().map_or(0, |r| r.len());
    let a = DMatrix::from_fn(m, n, |i, j| rows[i][j]);
    let rhs = DVector::from_column_slice(b);
    let scale: Vec<f64> = (0..n)
        .map(|j| {
            let c = a.column(j).norm();
            if c > 0.0 { 1.0 / c } else { 1.0 }
        })
        .collect();
    let scaled = DMatrix::from_fn(m, n, |i, j| a[(i, j)] * scale[j]);

    let qr_solution = (m >= n).then(|| scaled.clone().qr()).and_then(|qr| {
        let r = qr.r();
        let inv = inverse_upper(&r)?;
        let condition = norm1_upper(&r) * norm1_upper(&inv);
        let q = qr.q();
        let mut x = &inv * (q.transpose() * &rhs);
        let res = &rhs - &scaled * &x;
        x += &inv * (q.transpose() * res);
        Some((x, condition))
    });
    let (mut x, condition) = qr_solution.unwrap_or_else(|| {
        let svd = scaled.clone().svd(true, true);
        let eps = svd.singular_values.max() * 1e-14;
        let x = svd.solve(&rhs, eps).unwrap_or_else(|_| DVector::zeros(n));
        (x, f64::INFINITY)
    });
    for j in 0..n {
        x[j] *= scale[j];
    }
    let res = (&a * &x - &rhs).norm() / rhs.norm().max(1.0);
    LeastSquares {
        x: x.iter().copied().collect(),
        residual: res,
        condition,
    }
}

/// Orthonormal basis (columns) of the `k` directions least stretched by `A`,
/// i.e. the kernel when `A` has corank `k`. Also returns the ratio of the
/// `k`-th smallest to the largest singular value of the complement
/// (`sigma_(k+1) / sigma_max`), which is small when the rank drops further.
pub fn kernel(rows: &[Vec<f64>], n: usize, k: usize) -> (DMatrix<f64>, f64) {
    let m = rows.len();
    let a = DMatrix::from_fn(m, n, |i, j| rows[i][j]);
    let ata = a.transpose() * &a;
    let eig = SymmetricEigen::new(ata);
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| eig.eigenvalues[i].total_cmp(&eig.eigenvalues[j]));
    let basis = DMatrix::from_fn(n, k, |i, c| eig.eigenvectors[(i, order[c])]);
    let largest = eig.eigenvalues[order[n - 1]].max(0.0).sqrt();
    let next = if k < n {
        eig.eigenvalues[order[k]].max(0.0).sqrt()
    } else {
        0.0
    };
    let ratio = if largest > 0.0 { next / largest } else { 0.0 };
    (basis, ratio)
}

/// Orthonormalise the given columns (thin QR).
pub fn orthonormal(cols: &[Vec<f64>]) -> DMatrix<f64> {
    let n = cols[0].len();
    let a = DMatrix::from_fn(n, cols.len(), |i, j| cols[j][i]);
    a.qr().q()
}

/// Sine of the largest principal angle between the spans of two
/// orthonormal column sets of equal size.
pub fn principal_sine(u: &DMatrix<f64>, w: &DMatrix<f64>) -> f64 {
    let proj = u * (u.transpose() * w);
    let diff = w - proj;
    diff.singular_values().max()
}

/// Smallest singular value over largest.
pub fn singular_ratio(rows: &[Vec<f64>], n: usize) -> f64 {
    let a = DMatrix::from_fn(rows.len(), n, |i, j| rows[i][j]);
    let s = a.singular_values();
    let smax = s.max();
    if smax == 0.0 {
        0.0
    } else {
        s.min() / smax
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn solves_overdetermined_consistent_system() {
        let rows = vec![vec![1.0, 0.0], vec![0.0, 2.0], vec![1.0, 1.0]];
        let ls = least_squares(&rows, &[1.0, 4.0, 3.0]);
        assert!((ls.x[0] - 1.0).abs() < 1e-14 && (ls.x[1] - 2.0).abs() < 1e-14);
        assert!(ls.residual < 1e-14);
        assert!(ls.condition.is_finite());
    }

    #[test]
    fn flags_dependent_columns_and_scales_columns() {
        let rows = vec![vec![1.0, 2.0], vec![2.0, 4.0], vec![3.0, 6.0]];
        let ls = least_squares(&rows, &[1.0, 2.0, 3.0]);
        assert!(!(1.0 / ls.condition > 1e-10), "{}", ls.condition);
        // tiny second column: equilibration keeps the condition O(1)
        let rows = vec![vec![1.0, 0.0], vec![0.0, 1e-9], vec![1.0, 1e-9]];
        let ls = least_squares(&rows, &[1.0, 0.0, 1.0]);
        assert!(ls.condition < 10.0 && ls.x[1] == 0.0 && (ls.x[0] - 1.0).abs() < 1e-15);
    }

    #[test]
    fn kernel_of_projection() {
        let rows = vec![vec![1.0, 0.0, 0.0, 0.0], vec![0.0, 1.0, 0.0, 0.0]];
        let (k, ratio) = kernel(&rows, 4, 2);
        let expected = orthonormal(&[vec![0.0, 0.0, 1.0, 0.0], vec![0.0, 0.0, 0.0, 1.0]]);
        assert!(principal_sine(&k, &expected) < 1e-12);
        assert!((ratio - 1.0).abs() < 1e-12);
    }

    #[test]
    fn principal_sine_of_rotated_line() {
        let a = orthonormal(&[vec![1.0, 0.0]]);
        let t: f64 = 0.3;
        let b = orthonormal(&[vec![t.cos(), t.sin()]]);
        assert!((principal_sine(&a, &b) - t.sin()).abs() < 1e-14);
    }
}
