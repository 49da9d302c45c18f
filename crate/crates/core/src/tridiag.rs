//! Thomas algorithm for tridiagonal systems.

/// Solves `T x = rhs` in place, where `T` has sub-diagonal `lower`, diagonal
/// `diag` and super-diagonal `upper`. `lower[0]` and `upper[n-1]` are unused.
///
/// No pivoting: the caller guarantees diagonal dominance.
pub fn solve(lower: &[f64], diag: &[f64], upper: &[f64], rhs: &mut [f64]) {
    let n = rhs.len();
    debug_assert!(lower.len() == n && diag.len() == n && upper.len() == n);
    if n == 0 {
        return;
    }
    let mut c = vec![0.0; n];
    let mut beta = diag[0];
    c[0] = upper[0] / beta;
    rhs[0] /= beta;
    for i in 1..n {
        beta = diag[i] - lower[i] * c[i - 1];
        c[i] = upper[i] / beta;
        rhs[i] = (rhs[i] - lower[i] * rhs[i - 1]) / beta;
    }
    for i in (0..n - 1).rev() {
        rhs[i] -= c[i] * rhs[i + 1];
    }
}

/// Solves the constant-coefficient system with `1, 4, 1` rows that arises for
/// clamped cubic splines on a uniform grid.
pub fn solve_spline_system(rhs: &mut [f64]) {
    let n = rhs.len();
    if n == 0 {
        return;
    }
    let mut c = vec![0.0; n];
    let mut beta = 4.0;
    c[0] = 1.0 / beta;
    rhs[0] /= beta;
    for i in 1..n {
        beta = 4.0 - c[i - 1];
        c[i] = 1.0 / beta;
        rhs[i] = (rhs[i] - rhs[i - 1]) / beta;
    }
    for i in (0..n - 1).rev() {
        rhs[i] -= c[i] * rhs[i + 1];
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn dense_mul(lower: &[f64], diag: &[f64], upper: &[f64], x: &[f64]) -> Vec<f64> {
        let n = x.len();
        (0..n)
            .map(|i| {
                let mut s = diag[i] * x[i];
                if i > 0 {
                    s += lower[i] * x[i - 1];
                }
                if i + 1 < n {
                    s += upper[i] * x[i + 1];
                }
                s
            })
            .collect()
    }

    #[test]
    fn recovers_known_solution() {
        let n = 9;
        let lower: Vec<f64> = (0..n).map(|i| 0.3 + 0.1 * i as f64).collect();
        let upper: Vec<f64> = (0..n).map(|i| -0.7 + 0.05 * i as f64).collect();
        let diag: Vec<f64> = (0..n).map(|i| 3.0 + (i % 3) as f64).collect();
        let x: Vec<f64> = (0..n).map(|i| (i as f64 * 0.37).sin()).collect();
        let mut rhs = dense_mul(&lower, &diag, &upper, &x);
        solve(&lower, &diag, &upper, &mut rhs);
        for (a, b) in rhs.iter().zip(&x) {
            assert!((a - b).abs() < 1e-14);
        }
    }

    #[test]
    fn spline_system_matches_general_solver() {
        for n in 1..8 {
            let rhs: Vec<f64> = (0..n).map(|i| 1.0 + i as f64 * i as f64).collect();
            let mut a = rhs.clone();
            let mut b = rhs.clone();
            solve(&vec![1.0; n], &vec![4.0; n], &vec![1.0; n], &mut a);
            solve_spline_system(&mut b);
            for (p, q) in a.iter().zip(&b) {
                assert!((p - q).abs() < 1e-14);
            }
        }
    }
}
