//! Tiny dense linear-algebra helpers for the small systems this crate works
//! with (dimensions in the single digits).

use alloc::vec;
use alloc::vec::Vec;

pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub(crate) fn norm(a: &[f64]) -> f64 {
    libm::sqrt(dot(a, a))
}

pub(crate) fn norm_inf(a: &[f64]) -> f64 {
    a.iter().fold(0.0, |m, x| m.max(x.abs()))
}

pub(crate) fn scale(a: &[f64], s: f64) -> Vec<f64> {
    a.iter().map(|x| x * s).collect()
}

/// Solves `A x = b` for square `A` by Gaussian elimination with partial
/// pivoting. `None` when `A` is singular at the given tolerance.
pub(crate) fn solve_square(a: &[Vec<f64>], b: &[f64], tol: f64) -> Option<Vec<f64>> {
    let n = b.len();
    let mut m: Vec<Vec<f64>> = a
        .iter()
        .zip(b)
        .map(|(row, &rhs)| {
            let mut r = row.clone();
            r.push(rhs);
            r
        })
        .collect();
    for col in 0..n {
        let pivot = (col..n).max_by(|&i, &j| {
            m[i][col].abs().partial_cmp(&m[j][col].abs()).unwrap()
        })?;
        if m[pivot][col].abs() <= tol {
            return None;
        }
        m.swap(col, pivot);
        for row in 0..n {
            if row != col {
                let f = m[row][col] / m[col][col];
                if f != 0.0 {
                    for k in col..=n {
                        let sub = f * m[col][k];
                        m[row][k] -= sub;
                    }
                }
            }
        }
    }
    Some((0..n).map(|i| m[i][n] / m[i][i]).collect())
}

/// Orthonormal basis of the null space of the row set `rows` in `R^n`,
/// computed by projecting out the rows from the coordinate directions.
pub(crate) fn null_space_basis(rows: &[Vec<f64>], n: usize, tol: f64) -> Vec<Vec<f64>> {
    // Orthonormalize the rows first.
    let mut row_basis: Vec<Vec<f64>> = Vec::new();
    for r in rows {
        let mut v = r.clone();
        for b in &row_basis {
            let c = dot(&v, b);
            for (vi, bi) in v.iter_mut().zip(b) {
                *vi -= c * bi;
            }
        }
        let nv = norm(&v);
        if nv > tol {
            row_basis.push(scale(&v, 1.0 / nv));
        }
    }
    // Then complete from the coordinate directions.
    let mut out: Vec<Vec<f64>> = Vec::new();
    for k in 0..n {
        let mut v = vec![0.0; n];
        v[k] = 1.0;
        for b in row_basis.iter().chain(out.iter()) {
            let c = dot(&v, b);
            for (vi, bi) in v.iter_mut().zip(b) {
                *vi -= c * bi;
            }
        }
        let nv = norm(&v);
        if nv > tol {
            out.push(scale(&v, 1.0 / nv));
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    #[test]
    fn solves_small_system() {
        let a = vec![vec![2.0, 1.0], vec![1.0, 3.0]];
        let x = solve_square(&a, &[5.0, 10.0], 1e-12).unwrap();
        assert!((x[0] - 1.0).abs() < 1e-12);
        assert!((x[1] - 3.0).abs() < 1e-12);
    }

    #[test]
    fn singular_system_is_none() {
        let a = vec![vec![1.0, 2.0], vec![2.0, 4.0]];
        assert!(solve_square(&a, &[1.0, 2.0], 1e-12).is_none());
    }

    #[test]
    fn null_space_of_plane_in_r3() {
        let rows = vec![vec![0.0, 0.0, 1.0]];
        let basis = null_space_basis(&rows, 3, 1e-12);
        assert_eq!(basis.len(), 2);
        for b in &basis {
            assert!(b[2].abs() < 1e-12);
            assert!((norm(b) - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn full_rank_rows_leave_nothing() {
        let rows = vec![vec![1.0, 0.0], vec![0.0, 1.0]];
        assert!(null_space_basis(&rows, 2, 1e-12).is_empty());
    }
}
