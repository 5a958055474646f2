//! Small dense kernels: Householder QR with column equilibration and a
//! Cholesky solve. Matrices are column-major `Vec<T>` with `m` rows.

use crate::error::{Error, Result};
use crate::precision::Real;

/// Thin QR factorization `A S = Q R` of an `m x n` matrix, `m >= n`,
/// where `S` scales every column of `A` to unit norm.
#[derive(Clone, Debug)]
pub struct Qr<T> {
    pub m: usize,
    pub n: usize,
    /// `m x n`, orthonormal columns.
    pub q: Vec<T>,
    /// `n x n` upper triangular, column-major.
    pub r: Vec<T>,
    /// Column norms of the input.
    pub scale: Vec<T>,
}

fn dot<T: Real>(a: &[T], b: &[T]) -> T {
    let mut s = T::zero();
    for (x, y) in a.iter().zip(b) {
        s += *x * *y;
    }
    s
}

fn norm<T: Real>(a: &[T]) -> T {
    let big = a.iter().fold(T::zero(), |m, x| m.max(x.abs()));
    if big == T::zero() {
        return big;
    }
    let mut s = T::zero();
    for x in a {
        let t = *x / big;
        s += t * t;
    }
    big * s.sqrt()
}

impl<T: Real> Qr<T> {
    pub fn new(a: &[T], m: usize, n: usize) -> Result<Self> {
        if m < n || a.len() != m * n {
            return Err(Error::InvalidArgument(format!(
                "QR of a {m} x {n} matrix with {} entries",
                a.len()
            )));
        }
        let mut w = a.to_vec();
        let mut scale = Vec::with_capacity(n);
        for j in 0..n {
            let c = &mut w[j * m..(j + 1) * m];
            let s = norm(c);
            if !(s.to_f64() > 0.0) || !s.is_finite() {
                return Err(Error::RankDeficient(format!("column {j} has norm {s}")));
            }
            for x in c.iter_mut() {
                *x /= s;
            }
            scale.push(s);
        }
        // Householder vectors overwrite the lower part of `w`.
        let mut betas = vec![T::zero(); n];
        let mut r = vec![T::zero(); n * n];
        for k in 0..n {
            let col = &mut w[k * m..(k + 1) * m];
            let alpha = norm(&col[k..]);
            if alpha.to_f64() == 0.0 {
                return Err(Error::RankDeficient(format!("column {k} is dependent")));
            }
            let alpha = if col[k] > T::zero() { -alpha } else { alpha };
            col[k] -= alpha;
            let vnorm2 = dot(&col[k..], &col[k..]);
            betas[k] = if vnorm2 == T::zero() {
                T::zero()
            } else {
                T::from_f64(2.0) / vnorm2
            };
            r[k * n + k] = alpha;
            let v: Vec<T> = col[k..].to_vec();
            for j in k + 1..n {
                let c = &mut w[j * m..(j + 1) * m];
                let t = dot(&v, &c[k..]) * betas[k];
                for (ci, vi) in c[k..].iter_mut().zip(&v) {
                    *ci -= t * *vi;
                }
                r[j * n + k] = c[k];
            }
        }
        let rmax = (0..n).fold(0.0f64, |a, k| a.max(r[k * n + k].abs().to_f64()));
        for k in 0..n {
            if r[k * n + k].abs().to_f64() <= 10.0 * T::eps() * rmax {
                return Err(Error::RankDeficient(format!(
                    "pivot {k} of {n} is below working precision"
                )));
            }
        }
        // Explicit thin Q: apply the reflectors to the leading identity columns.
        let mut q = vec![T::zero(); m * n];
        for j in 0..n {
            let c = &mut q[j * m..(j + 1) * m];
            c[j] = T::one();
            for k in (0..=j.min(n - 1)).rev() {
                let v = &w[k * m + k..(k + 1) * m];
                let t = dot(v, &c[k..]) * betas[k];
                for (ci, vi) in c[k..].iter_mut().zip(v) {
                    *ci -= t * *vi;
                }
            }
        }
        Ok(Qr { m, n, q, r, scale })
    }

    pub fn qcol(&self, j: usize) -> &[T] {
        &self.q[j * self.m..(j + 1) * self.m]
    }

    /// `Q^T b`.
    pub fn qt(&self, b: &[T]) -> Vec<T> {
        (0..self.n).map(|j| dot(self.qcol(j), b)).collect()
    }

    /// `Q z`.
    pub fn qz(&self, z: &[T]) -> Vec<T> {
        let mut out = vec![T::zero(); self.m];
        for (j, zj) in z.iter().enumerate() {
            for (o, qi) in out.iter_mut().zip(self.qcol(j)) {
                *o += *zj * *qi;
            }
        }
        out
    }

    /// `(I - Q Q^T) b`.
    pub fn project_out(&self, b: &[T]) -> Vec<T> {
        let mut out = b.to_vec();
        for j in 0..self.n {
            let c = self.qcol(j);
            let t = dot(c, &out);
            for (o, qi) in out.iter_mut().zip(c) {
                *o -= t * *qi;
            }
        }
        out
    }

    /// Solves `R z = c`.
    pub fn solve_r(&self, c: &[T]) -> Vec<T> {
        let n = self.n;
        let mut z = c.to_vec();
        for i in (0..n).rev() {
            let mut s = z[i];
            for j in i + 1..n {
                s -= self.r[j * n + i] * z[j];
            }
            z[i] = s / self.r[i * n + i];
        }
        z
    }

    /// Solves `R^T z = c`.
    pub fn solve_rt(&self, c: &[T]) -> Vec<T> {
        let n = self.n;
        let mut z = c.to_vec();
        for i in 0..n {
            let mut s = z[i];
            for j in 0..i {
                s -= self.r[i * n + j] * z[j];
            }
            z[i] = s / self.r[i * n + i];
        }
        z
    }

    /// Least-squares solution of `A x = b`.
    pub fn solve_ls(&self, b: &[T]) -> Vec<T> {
        let mut x = self.solve_r(&self.qt(b));
        for (xi, s) in x.iter_mut().zip(&self.scale) {
            *xi /= *s;
        }
        x
    }

    /// `(A^+)^T c = Q R^{-T} S^{-1} c`.
    pub fn pinv_t(&self, c: &[T]) -> Vec<T> {
        let scaled: Vec<T> = c.iter().zip(&self.scale).map(|(a, s)| *a / *s).collect();
        self.qz(&self.solve_rt(&scaled))
    }
}

/// Solves the symmetric positive definite system `H x = b` by Cholesky;
/// `h` is `n x n` column-major.
pub fn cholesky_solve(h: &[f64], b: &[f64]) -> Result<Vec<f64>> {
    let n = b.len();
    let mut l = vec![0.0; n * n];
    for j in 0..n {
        let mut d = h[j * n + j];
        for k in 0..j {
            d -= l[k * n + j] * l[k * n + j];
        }
        if !(d > 0.0) {
            return Err(Error::RankDeficient(format!("normal matrix pivot {j}")));
        }
        let d = d.sqrt();
        l[j * n + j] = d;
        for i in j + 1..n {
            let mut s = h[j * n + i];
            for k in 0..j {
                s -= l[k * n + i] * l[k * n + j];
            }
            l[j * n + i] = s / d;
        }
    }
    let mut y = b.to_vec();
    for i in 0..n {
        for k in 0..i {
            y[i] -= l[k * n + i] * y[k];
        }
        y[i] /= l[i * n + i];
    }
    for i in (0..n).rev() {
        for k in i + 1..n {
            y[i] -= l[i * n + k] * y[k];
        }
        y[i] /= l[i * n + i];
    }
    Ok(y)
}

/// Ordinary least squares `min |A x - b|` in `f64`.
pub fn lstsq(a: &[f64], m: usize, n: usize, b: &[f64]) -> Result<Vec<f64>> {
    Ok(Qr::new(a, m, n)?.solve_ls(b))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::precision::Dd;

    #[test]
    fn qr_reproduces_matrix_and_solves() {
        let (m, n) = (7, 3);
        let a: Vec<f64> = (0..m * n)
            .map(|i| ((i * 37 % 11) as f64 - 5.0) / 3.0 + if i % 8 == 0 { 2.0 } else { 0.0 })
            .collect();
        let qr = Qr::new(&a, m, n).unwrap();
        for i in 0..n {
            for j in 0..n {
                let d = dot(qr.qcol(i), qr.qcol(j));
                assert!((d - if i == j { 1.0 } else { 0.0 }).abs() < 1e-14);
            }
        }
        let x0 = [1.0, -2.0, 0.5];
        let b: Vec<f64> = (0..m)
            .map(|i| (0..n).map(|j| a[j * m + i] * x0[j]).sum())
            .collect();
        let x = qr.solve_ls(&b);
        for (u, v) in x.iter().zip(&x0) {
            assert!((u - v).abs() < 1e-13);
        }
        let p = qr.project_out(&b);
        assert!(p.iter().all(|v| v.abs() < 1e-13));
    }

    #[test]
    fn extended_qr_is_more_accurate() {
        // Hilbert-like columns.
        let (m, n) = (12, 8);
        let a: Vec<Dd> = (0..m * n)
            .map(|k| Dd::ONE / Dd::from_f64(((k / m) + (k % m) + 1) as f64))
            .collect();
        let x0: Vec<Dd> = (0..n).map(|j| Dd::from_f64(j as f64 - 3.0)).collect();
        let b: Vec<Dd> = (0..m)
            .map(|i| (0..n).map(|j| a[j * m + i] * x0[j]).sum())
            .collect();
        let x = Qr::new(&a, m, n).unwrap().solve_ls(&b);
        for (u, v) in x.iter().zip(&x0) {
            assert!((*u - *v).abs().to_f64() < 1e-18);
        }
    }

    #[test]
    fn cholesky_small() {
        let h = [4.0, 2.0, 2.0, 3.0];
        let x = cholesky_solve(&h, &[2.0, 1.0]).unwrap();
        assert!((x[0] - 0.5).abs() < 1e-15 && x[1].abs() < 1e-15);
        assert!(cholesky_solve(&[0.0], &[1.0]).is_err());
    }

    #[test]
    fn dependent_columns_rejected() {
        let a = [1.0, 2.0, 3.0, 2.0, 4.0, 6.0];
        assert!(matches!(Qr::new(&a, 3, 2), Err(Error::RankDeficient(_))));
    }
}
