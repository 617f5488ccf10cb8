//! Minimal dense linear algebra: Gaussian elimination with partial pivoting.
//!
//! The systems solved here are tiny (at most 9×9: quadrature moment systems,
//! stencil mean-matching matrices, smoothstep endpoint conditions), so a
//! hand-rolled direct solver keeps the dependency surface flat.

use crate::{invalid_input, Result};

/// Solve `A x = rhs` in place for a square row-major matrix.
pub fn solve(a: &[f64], rhs: &[f64], n: usize) -> Result<Vec<f64>> {
    debug_assert_eq!(a.len(), n * n);
    debug_assert_eq!(rhs.len(), n);
    let mut m = a.to_vec();
    let mut x = rhs.to_vec();

    for col in 0..n {
        let pivot_row = (col..n)
            .max_by(|&r, &s| {
                m[r * n + col]
                    .abs()
                    .total_cmp(&m[s * n + col].abs())
            })
            .unwrap();
        if m[pivot_row * n + col].abs() < 1e-300 {
            return Err(invalid_input!("singular {n}x{n} system"));
        }
        if pivot_row != col {
            for k in 0..n {
                m.swap(col * n + k, pivot_row * n + k);
            }
            x.swap(col, pivot_row);
        }
        let pivot = m[col * n + col];
        for row in col + 1..n {
            let factor = m[row * n + col] / pivot;
            if factor == 0.0 {
                continue;
            }
            for k in col..n {
                m[row * n + k] -= factor * m[col * n + k];
            }
            x[row] -= factor * x[col];
        }
    }

    for row in (0..n).rev() {
        let mut sum = x[row];
        for k in row + 1..n {
            sum -= m[row * n + k] * x[k];
        }
        x[row] = sum / m[row * n + row];
    }
    Ok(x)
}

/// Invert a square row-major matrix by eliminating against the identity.
pub fn invert(a: &[f64], n: usize) -> Result<Vec<f64>> {
    let mut inv = vec![0.0; n * n];
    let mut e = vec![0.0; n];
    for col in 0..n {
        e.fill(0.0);
        e[col] = 1.0;
        let x = solve(a, &e, n)?;
        for row in 0..n {
            inv[row * n + col] = x[row];
        }
    }
    Ok(inv)
}
