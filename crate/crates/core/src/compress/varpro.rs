//! Variable projection for `sum_n gamma_n / (s - beta_n)` on the imaginary
//! axis.
//!
//! Poles come in conjugate pairs `beta = -e^u - i e^v` (plus optional real
//! poles `-e^u`), so every iterate lies in the open left half-plane. For
//! fixed poles the residues solve a weighted linear least-squares problem;
//! Levenberg-Marquardt moves the poles on the projected residual using the
//! full Golub-Pereyra Jacobian.

use num_complex::{Complex, Complex64};

use super::linalg::{cholesky_solve, Qr};
use crate::error::{Error, Result};
use crate::precision::{c_dd, ComplexExt, Dd, Real};

/// Samples `f(i y_j)` with row weights `w_j`.
#[derive(Clone, Debug)]
pub struct FitData {
    pub ys: Vec<f64>,
    pub values: Vec<Complex<Dd>>,
    pub weights: Vec<f64>,
}

impl FitData {
    pub fn len(&self) -> usize {
        self.ys.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ys.is_empty()
    }

    fn values_c64(&self) -> Vec<Complex64> {
        self.values.iter().map(|v| v.to_c64()).collect()
    }
}

/// Log-parametrized poles: `u` holds the pairs' real parts followed by
/// the real poles, `v` the pairs' imaginary parts.
#[derive(Clone, Debug, PartialEq)]
pub struct PoleParams {
    pub u: Vec<f64>,
    pub v: Vec<f64>,
}

impl PoleParams {
    pub fn from_poles(pairs: &[Complex64], reals: &[f64]) -> Result<Self> {
        let mut u = Vec::new();
        let mut v = Vec::new();
        for b in pairs {
            if !(b.re < 0.0 && b.im != 0.0) {
                return Err(Error::InvalidArgument(format!("bad pole guess {b}")));
            }
            u.push((-b.re).ln());
            v.push(b.im.abs().ln());
        }
        for r in reals {
            if !(*r < 0.0) {
                return Err(Error::InvalidArgument(format!("bad real pole guess {r}")));
            }
            u.push((-r).ln());
        }
        Ok(PoleParams { u, v })
    }

    pub fn n_pairs(&self) -> usize {
        self.v.len()
    }

    pub fn n_real(&self) -> usize {
        self.u.len() - self.v.len()
    }

    /// Total pole count including conjugates.
    pub fn d(&self) -> usize {
        2 * self.n_pairs() + self.n_real()
    }

    /// Lower half-plane members of each pair.
    pub fn pairs(&self) -> Vec<Complex64> {
        self.v
            .iter()
            .zip(&self.u)
            .map(|(v, u)| Complex64::new(-u.exp(), -v.exp()))
            .collect()
    }

    pub fn reals(&self) -> Vec<f64> {
        self.u[self.n_pairs()..].iter().map(|u| -u.exp()).collect()
    }

    /// Replaces every pair with `|Im beta| < tol |Re beta|` by one real
    /// pole at its real part. Such pairs act as a near double pole with
    /// large cancelling residues. Returns whether anything changed.
    pub fn collapse_pairs(&mut self, tol: f64) -> bool {
        let n = self.n_pairs();
        let lt = tol.ln();
        let keep: Vec<bool> = (0..n).map(|k| self.v[k] >= self.u[k] + lt).collect();
        if keep.iter().all(|k| *k) {
            return false;
        }
        let mut u = Vec::new();
        let mut v = Vec::new();
        let mut reals = self.u[n..].to_vec();
        for k in 0..n {
            if keep[k] {
                u.push(self.u[k]);
                v.push(self.v[k]);
            } else {
                reals.push(self.u[k]);
            }
        }
        u.extend(reals);
        self.u = u;
        self.v = v;
        true
    }

    fn theta(&self) -> Vec<f64> {
        self.u.iter().chain(&self.v).copied().collect()
    }

    fn from_theta(&self, th: &[f64]) -> Self {
        let nu = self.u.len();
        PoleParams {
            u: th[..nu].to_vec(),
            v: th[nu..].to_vec(),
        }
    }
}

/// Weighted real design matrix, rows `Re` then `Im`, generic in precision.
fn design<T: Real>(ys: &[f64], w: &[f64], pairs: &[Complex<T>], reals: &[T]) -> Vec<T> {
    let n_rows = ys.len();
    let m = 2 * n_rows;
    let n = 2 * pairs.len() + reals.len();
    let mut a = vec![T::zero(); m * n];
    for (i, (&y, &wi)) in ys.iter().zip(w).enumerate() {
        let s = Complex::new(T::zero(), T::from_f64(y));
        let wt = T::from_f64(wi);
        for (k, b) in pairs.iter().enumerate() {
            let e1 = Complex::new(T::one(), T::zero()) / (s - b);
            let e2 = Complex::new(T::one(), T::zero()) / (s - b.conj());
            let c0 = e1 + e2;
            let d = e1 - e2;
            let c1 = Complex::new(-d.im, d.re);
            let (j0, j1) = (2 * k, 2 * k + 1);
            a[j0 * m + i] = c0.re * wt;
            a[j0 * m + n_rows + i] = c0.im * wt;
            a[j1 * m + i] = c1.re * wt;
            a[j1 * m + n_rows + i] = c1.im * wt;
        }
        for (k, b) in reals.iter().enumerate() {
            let e = Complex::new(T::one(), T::zero()) / (s - Complex::new(*b, T::zero()));
            let j = 2 * pairs.len() + k;
            a[j * m + i] = e.re * wt;
            a[j * m + n_rows + i] = e.im * wt;
        }
    }
    a
}

fn rhs<T: Real>(vals: &[Complex<T>], w: &[f64]) -> Vec<T> {
    let n = vals.len();
    let mut b = vec![T::zero(); 2 * n];
    for (i, (v, &wi)) in vals.iter().zip(w).enumerate() {
        b[i] = v.re * T::from_f64(wi);
        b[n + i] = v.im * T::from_f64(wi);
    }
    b
}

/// Residues from the linear coefficient vector.
fn residues_from_x<T: Real>(x: &[T], n_pairs: usize) -> (Vec<Complex<T>>, Vec<T>) {
    let pairs = (0..n_pairs)
        .map(|k| Complex::new(x[2 * k], x[2 * k + 1]))
        .collect();
    (pairs, x[2 * n_pairs..].to_vec())
}

struct Linearized {
    r: Vec<f64>,
    jac: Vec<f64>,
    cost: f64,
}

fn residual_and_jacobian(data: &FitData, vals: &[Complex64], p: &PoleParams) -> Result<Linearized> {
    let pairs = p.pairs();
    let reals = p.reals();
    let a = design::<f64>(&data.ys, &data.weights, &pairs, &reals);
    let b = rhs(vals, &data.weights);
    let m = b.len();
    let n = 2 * pairs.len() + reals.len();
    let qr = Qr::new(&a, m, n)?;
    let x = qr.solve_ls(&b);
    let mut r = vec![0.0; m];
    for (j, xj) in x.iter().enumerate() {
        for (ri, aij) in r.iter_mut().zip(&a[j * m..(j + 1) * m]) {
            *ri += aij * xj;
        }
    }
    for (ri, bi) in r.iter_mut().zip(&b) {
        *ri -= bi;
    }
    let cost = r.iter().map(|v| v * v).sum();

    let n_rows = data.len();
    let np = p.u.len() + p.v.len();
    let mut jac = vec![0.0; m * np];
    // d(column)/d(beta) for a pole pair, weighted and stacked.
    let pair_cols = |k: usize, db: Complex64| -> (Vec<f64>, Vec<f64>) {
        let bk = pairs[k];
        let mut d0 = vec![0.0; m];
        let mut d1 = vec![0.0; m];
        for i in 0..n_rows {
            let s = Complex64::new(0.0, data.ys[i]);
            let e1 = 1.0 / ((s - bk) * (s - bk));
            let e2 = 1.0 / ((s - bk.conj()) * (s - bk.conj()));
            let c0 = e1 * db + e2 * db.conj();
            let c1 = Complex64::i() * (e1 * db - e2 * db.conj());
            let w = data.weights[i];
            d0[i] = c0.re * w;
            d0[n_rows + i] = c0.im * w;
            d1[i] = c1.re * w;
            d1[n_rows + i] = c1.im * w;
        }
        (d0, d1)
    };
    let dotr = |v: &[f64]| v.iter().zip(&r).map(|(a, b)| a * b).sum::<f64>();
    let mut put = |col: usize, dx: Vec<f64>, dtr: Vec<f64>| {
        let pdx = qr.project_out(&dx);
        let apt = qr.pinv_t(&dtr);
        for i in 0..m {
            jac[col * m + i] = pdx[i] - apt[i];
        }
    };
    let nu = p.u.len();
    for k in 0..pairs.len() {
        for (which, db) in [
            (0usize, Complex64::new(-p.u[k].exp(), 0.0)),
            (1, Complex64::new(0.0, -p.v[k].exp())),
        ] {
            let (d0, d1) = pair_cols(k, db);
            let dx: Vec<f64> = d0
                .iter()
                .zip(&d1)
                .map(|(a, b)| a * x[2 * k] + b * x[2 * k + 1])
                .collect();
            let mut dtr = vec![0.0; n];
            dtr[2 * k] = dotr(&d0);
            dtr[2 * k + 1] = dotr(&d1);
            let col = if which == 0 { k } else { nu + k };
            put(col, dx, dtr);
        }
    }
    for (i, b) in reals.iter().enumerate() {
        let c = 2 * pairs.len() + i;
        let db = -p.u[pairs.len() + i].exp();
        let mut d = vec![0.0; m];
        for row in 0..n_rows {
            let s = Complex64::new(0.0, data.ys[row]);
            let e = db / ((s - b) * (s - b));
            d[row] = e.re * data.weights[row];
            d[n_rows + row] = e.im * data.weights[row];
        }
        let dx: Vec<f64> = d.iter().map(|v| v * x[c]).collect();
        let mut dtr = vec![0.0; n];
        dtr[c] = dotr(&d);
        put(pairs.len() + i, dx, dtr);
    }
    Ok(Linearized { r, jac, cost })
}

/// Controls for [`levenberg_marquardt`].
#[derive(Clone, Debug, PartialEq)]
pub struct LmOptions {
    pub max_iters: usize,
    /// Stop when an accepted step lowers the cost by less than this fraction.
    pub rel_tol: f64,
    /// Componentwise clip on the log-parameter step.
    pub max_step: f64,
}

impl Default for LmOptions {
    fn default() -> Self {
        LmOptions {
            max_iters: 400,
            rel_tol: 1e-14,
            max_step: 1.0,
        }
    }
}

#[derive(Clone, Debug)]
pub struct LmOutcome {
    pub params: PoleParams,
    /// Weighted residual norm squared.
    pub cost: f64,
    pub iterations: usize,
}

pub fn levenberg_marquardt(
    data: &FitData,
    start: &PoleParams,
    opts: &LmOptions,
) -> Result<LmOutcome> {
    let vals = data.values_c64();
    let mut p = start.clone();
    let mut th = p.theta();
    let np = th.len();
    let mut lin = residual_and_jacobian(data, &vals, &p)?;
    let m = lin.r.len();
    let mut lam = 1e-3;
    let mut it = 0;
    while it < opts.max_iters {
        it += 1;
        let mut g = vec![0.0; np];
        let mut h = vec![0.0; np * np];
        for a in 0..np {
            let ja = &lin.jac[a * m..(a + 1) * m];
            g[a] = ja.iter().zip(&lin.r).map(|(x, y)| x * y).sum();
            for b in 0..=a {
                let jb = &lin.jac[b * m..(b + 1) * m];
                let v: f64 = ja.iter().zip(jb).map(|(x, y)| x * y).sum();
                h[a * np + b] = v;
                h[b * np + a] = v;
            }
        }
        let diag: Vec<f64> = (0..np).map(|a| h[a * np + a].max(1e-300)).collect();
        let mut accepted = None;
        for _ in 0..30 {
            let mut hl = h.clone();
            for a in 0..np {
                hl[a * np + a] += lam * diag[a];
            }
            let neg_g: Vec<f64> = g.iter().map(|v| -v).collect();
            let step = match cholesky_solve(&hl, &neg_g) {
                Ok(s) => s,
                Err(_) => {
                    lam *= 10.0;
                    continue;
                }
            };
            let th2: Vec<f64> = th
                .iter()
                .zip(&step)
                .map(|(t, s)| t + s.clamp(-opts.max_step, opts.max_step))
                .collect();
            let p2 = p.from_theta(&th2);
            match residual_and_jacobian(data, &vals, &p2) {
                Ok(l2) if l2.cost < lin.cost => {
                    accepted = Some((th2, p2, l2));
                    lam = (lam / 5.0).max(1e-15);
                    break;
                }
                _ => lam *= 8.0,
            }
        }
        match accepted {
            Some((th2, p2, l2)) => {
                let rel = (lin.cost - l2.cost) / lin.cost;
                th = th2;
                p = p2;
                lin = l2;
                if rel < opts.rel_tol {
                    break;
                }
            }
            None => break,
        }
    }
    Ok(LmOutcome {
        params: p,
        cost: lin.cost,
        iterations: it,
    })
}

/// Residues for fixed poles by weighted least squares in double-double.
/// Returns `(pairs, reals)` as pole/residue lists, lower pairs only.
#[allow(clippy::type_complexity)]
pub fn solve_residues(
    data: &FitData,
    p: &PoleParams,
) -> Result<(Vec<(Complex<Dd>, Complex<Dd>)>, Vec<(Dd, Dd)>)> {
    let pairs: Vec<Complex<Dd>> = p.pairs().into_iter().map(c_dd).collect();
    let reals: Vec<Dd> = p.reals().into_iter().map(Dd::from_f64).collect();
    let a = design::<Dd>(&data.ys, &data.weights, &pairs, &reals);
    let b = rhs(&data.values, &data.weights);
    let n = 2 * pairs.len() + reals.len();
    let x = Qr::new(&a, b.len(), n)?.solve_ls(&b);
    let (gp, gr) = residues_from_x(&x, pairs.len());
    Ok((
        pairs.into_iter().zip(gp).collect(),
        reals.into_iter().zip(gr).collect(),
    ))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn synthetic(ys: &[f64], poles: &[(Complex64, Complex64)]) -> FitData {
        let values: Vec<Complex<Dd>> = ys
            .iter()
            .map(|&y| {
                let s = Complex64::new(0.0, y);
                let v: Complex64 = poles
                    .iter()
                    .map(|(b, g)| g / (s - b) + g.conj() / (s - b.conj()))
                    .sum();
                c_dd(v)
            })
            .collect();
        let weights = values.iter().map(|v| 1.0 / v.to_c64().norm()).collect();
        FitData {
            ys: ys.to_vec(),
            values,
            weights,
        }
    }

    #[test]
    fn recovers_two_pairs() {
        let ys: Vec<f64> = (0..300).map(|i| 0.05 * i as f64).collect();
        let truth = [
            (Complex64::new(-0.7, -1.3), Complex64::new(0.4, -0.2)),
            (Complex64::new(-2.0, -4.0), Complex64::new(-1.1, 0.3)),
        ];
        let data = synthetic(&ys, &truth);
        let start = PoleParams::from_poles(
            &[Complex64::new(-1.0, -1.0), Complex64::new(-1.5, -5.0)],
            &[],
        )
        .unwrap();
        let out = levenberg_marquardt(&data, &start, &LmOptions::default()).unwrap();
        assert!(out.cost < 1e-20, "cost {}", out.cost);
        let (pairs, _) = solve_residues(&data, &out.params).unwrap();
        for (b, g) in &truth {
            let hit = pairs
                .iter()
                .any(|(pb, pg)| (pb.to_c64() - b).norm() < 1e-8 && (pg.to_c64() - g).norm() < 1e-8);
            assert!(hit, "{b} not recovered: {pairs:?}");
        }
    }

    #[test]
    fn jacobian_matches_finite_differences() {
        let ys: Vec<f64> = (0..40).map(|i| 0.2 * i as f64).collect();
        let truth = [
            (Complex64::new(-0.7, -1.3), Complex64::new(0.4, -0.2)),
            (Complex64::new(-2.0, -4.0), Complex64::new(-1.1, 0.3)),
        ];
        let mut data = synthetic(&ys, &truth);
        // a real pole in the model and a real component in the data
        for (v, y) in data.values.iter_mut().zip(&ys) {
            *v += c_dd(Complex64::new(0.5, 0.0) / Complex64::new(0.8, *y));
        }
        let vals = data.values_c64();
        let p = PoleParams::from_poles(
            &[Complex64::new(-1.0, -1.0), Complex64::new(-1.5, -5.0)],
            &[-0.5],
        )
        .unwrap();
        let lin = residual_and_jacobian(&data, &vals, &p).unwrap();
        let m = lin.r.len();
        let th = p.theta();
        for a in 0..th.len() {
            let h = 1e-6;
            let mut tp = th.clone();
            tp[a] += h;
            let mut tm = th.clone();
            tm[a] -= h;
            let rp = residual_and_jacobian(&data, &vals, &p.from_theta(&tp))
                .unwrap()
                .r;
            let rm = residual_and_jacobian(&data, &vals, &p.from_theta(&tm))
                .unwrap()
                .r;
            for i in 0..m {
                let fd = (rp[i] - rm[i]) / (2.0 * h);
                let an = lin.jac[a * m + i];
                assert!(
                    (fd - an).abs() < 1e-6 * (1.0 + an.abs()),
                    "param {a} row {i}: {fd} vs {an}"
                );
            }
        }
    }
}
