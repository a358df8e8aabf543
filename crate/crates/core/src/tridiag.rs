//! Tridiagonal solves (Thomas algorithm) for the real imaginary-time step and the
//! complex Crank-Nicolson step.

use std::ops::{Div, Mul, Sub};

/// Solves `lower[i] x[i-1] + diag[i] x[i] + upper[i] x[i+1] = rhs[i]` in place.
///
/// `lower[0]` and `upper[n-1]` are ignored. No pivoting: the matrix must be
/// diagonally dominant or otherwise safe for plain elimination.
pub fn solve_tridiagonal<T>(lower: &[T], diag: &[T], upper: &[T], rhs: &mut [T], scratch: &mut Vec<T>)
where
    T: Copy + Mul<Output = T> + Sub<Output = T> + Div<Output = T>,
{
    let n = rhs.len();
    assert!(diag.len() == n && lower.len() == n && upper.len() == n, "tridiagonal size mismatch");
    if n == 0 {
        return;
    }
    scratch.clear();
    scratch.reserve(n);
    // scratch holds the modified diagonal
    scratch.push(diag[0]);
    for i in 1..n {
        let m = lower[i] / scratch[i - 1];
        scratch.push(diag[i] - m * upper[i - 1]);
        rhs[i] = rhs[i] - m * rhs[i - 1];
    }
    rhs[n - 1] = rhs[n - 1] / scratch[n - 1];
    for i in (0..n - 1).rev() {
        rhs[i] = (rhs[i] - upper[i] * rhs[i + 1]) / scratch[i];
    }
}

/// y = A x for the same storage layout.
pub fn tridiagonal_apply<T>(lower: &[T], diag: &[T], upper: &[T], x: &[T]) -> Vec<T>
where
    T: Copy + Mul<Output = T> + std::ops::Add<Output = T>,
{
    let n = x.len();
    (0..n)
        .map(|i| {
            let mut y = diag[i] * x[i];
            if i > 0 {
                y = y + lower[i] * x[i - 1];
            }
            if i + 1 < n {
                y = y + upper[i] * x[i + 1];
            }
            y
        })
        .collect()
}
