//! Chebyshev-Lobatto nodes, differentiation and Clenshaw-Curtis weights on
//! `[-1, 1]`, nodes ascending.

use std::f64::consts::PI;

/// `x_i = -cos(pi i / (n - 1))`.
pub fn nodes(n: usize) -> Vec<f64> {
    let m = (n - 1) as f64;
    (0..n).map(|i| -(PI * i as f64 / m).cos()).collect()
}

/// Row-major `n x n` differentiation matrix.
pub fn diff_matrix(n: usize) -> Vec<f64> {
    let x = nodes(n);
    let c = |i: usize| if i == 0 || i == n - 1 { 2.0 } else { 1.0 };
    let mut d = vec![0.0; n * n];
    for i in 0..n {
        let mut row = 0.0;
        for j in 0..n {
            if i != j {
                let sign = if (i + j) % 2 == 0 { 1.0 } else { -1.0 };
                let v = c(i) / c(j) * sign / (x[i] - x[j]);
                d[i * n + j] = v;
                row += v;
            }
        }
        d[i * n + i] = -row;
    }
    d
}

/// Clenshaw-Curtis quadrature weights for the nodes of [`nodes`].
pub fn cc_weights(n: usize) -> Vec<f64> {
    let m = n - 1;
    let mf = m as f64;
    (0..n)
        .map(|j| {
            let cj = if j == 0 || j == m { 1.0 } else { 2.0 };
            let mut s = 1.0;
            for k in 1..=m / 2 {
                let bk = if 2 * k == m { 1.0 } else { 2.0 };
                let kk = k as f64;
                s -= bk / (4.0 * kk * kk - 1.0) * (2.0 * kk * j as f64 * PI / mf).cos();
            }
            cj / mf * s
        })
        .collect()
}
