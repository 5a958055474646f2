//! Time-domain teleportation by recursive convolution with a
//! sum-of-exponentials kernel, plus the closed-form `l = 2` test problem.

use num_complex::{Complex, Complex64};

use crate::error::{Error, Result};
use crate::exact::kernel_at_t0;
use crate::precision::{c_dd, Dd, Precision};
use crate::table::{KernelKind, PoleTable};

/// Uniformly sampled multipole signal at a fixed radius.
#[derive(Clone, Debug, PartialEq)]
pub struct TimeSeries {
    pub t0: f64,
    pub dt: f64,
    pub samples: Vec<f64>,
    /// `f64::INFINITY` for an asymptotic signal.
    pub radius: f64,
    pub ell: usize,
    pub m: i32,
}

impl TimeSeries {
    pub fn new(t0: f64, dt: f64, samples: Vec<f64>, radius: f64, ell: usize) -> Result<Self> {
        let ts = TimeSeries {
            t0,
            dt,
            samples,
            radius,
            ell,
            m: 0,
        };
        ts.validate()?;
        Ok(ts)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.dt > 0.0 && self.dt.is_finite()) {
            return Err(Error::InvalidArgument(format!("dt = {}", self.dt)));
        }
        if !(self.radius > 0.0) {
            return Err(Error::InvalidArgument(format!("radius = {}", self.radius)));
        }
        if let Some(i) = self.samples.iter().position(|v| !v.is_finite()) {
            return Err(Error::NotFinite(i));
        }
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn time(&self, k: usize) -> f64 {
        self.t0 + k as f64 * self.dt
    }

    pub fn times(&self) -> Vec<f64> {
        (0..self.len()).map(|k| self.time(k)).collect()
    }

    /// Samples from `f` at `t0 + k dt`, `k < n`.
    pub fn sample<F: Fn(f64) -> f64>(
        f: F,
        t0: f64,
        dt: f64,
        n: usize,
        radius: f64,
        ell: usize,
    ) -> Result<Self> {
        TimeSeries::new(
            t0,
            dt,
            (0..n).map(|k| f(t0 + k as f64 * dt)).collect(),
            radius,
            ell,
        )
    }

    /// Discrete `L1` norm (trapezoidal) and sup norm.
    pub fn norms(&self) -> (f64, f64) {
        let n = self.len();
        let mut l1 = 0.0;
        for k in 0..n.saturating_sub(1) {
            l1 += 0.5 * self.dt * (self.samples[k].abs() + self.samples[k + 1].abs());
        }
        let linf = self.samples.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        (l1, linf)
    }
}

/// One exponential term `gamma e^{beta t}` with multiplicity 2 for a
/// conjugate pair (the conjugate's contribution is the complex conjugate).
#[derive(Clone, Copy, Debug)]
struct Term {
    beta: Complex64,
    gamma: Complex64,
    pair: bool,
    decay: Complex64,
    w0: Complex64,
    w1: Complex64,
}

/// `phi_1(z) = (e^z - 1)/z` and `phi_2(z) = (e^z - 1 - z)/z^2`.
fn phi12(z: Complex64) -> (Complex64, Complex64) {
    if z.norm() < 0.5 {
        let mut p1 = Complex64::new(0.0, 0.0);
        let mut p2 = Complex64::new(0.0, 0.0);
        let mut term = Complex64::new(1.0, 0.0);
        // z^k / (k+1)! and z^k / (k+2)!
        let mut f1 = 1.0;
        for k in 0..30 {
            f1 *= (k + 1) as f64;
            let f2 = f1 * (k + 2) as f64;
            p1 += term / f1;
            p2 += term / f2;
            term *= z;
        }
        (p1, p2)
    } else {
        let e = z.exp();
        ((e - 1.0) / z, (e - 1.0 - z) / (z * z))
    }
}

/// Per-pole accumulators `I_n(t) = int_0^t e^{beta_n (t - tau)} u(tau) dtau`.
#[derive(Clone, Debug)]
pub struct ConvolutionState {
    terms: Vec<Term>,
    acc: Vec<Complex64>,
    last: f64,
}

impl ConvolutionState {
    /// Prepares the exact exponential update over steps of `dt` with a
    /// piecewise-linear input.
    pub fn new(kernel: &PoleTable, dt: f64) -> Result<Self> {
        if !(dt > 0.0) {
            return Err(Error::InvalidArgument(format!("dt = {dt}")));
        }
        kernel.check_stable()?;
        if !kernel.is_conjugate_closed() {
            return Err(Error::InvalidArgument(
                "kernel is not closed under conjugation".into(),
            ));
        }
        let mut terms = Vec::new();
        for (b, g) in kernel.betas.iter().zip(&kernel.gammas) {
            let beta = Complex64::new(b.re.to_f64(), b.im.to_f64());
            let gamma = Complex64::new(g.re.to_f64(), g.im.to_f64());
            if beta.im > 0.0 {
                continue;
            }
            let z = beta * dt;
            let (p1, p2) = phi12(z);
            terms.push(Term {
                beta,
                gamma,
                pair: beta.im < 0.0,
                decay: z.exp(),
                w0: (p1 - p2) * dt,
                w1: p2 * dt,
            });
        }
        let n = terms.len();
        Ok(ConvolutionState {
            terms,
            acc: vec![Complex64::new(0.0, 0.0); n],
            last: 0.0,
        })
    }

    /// Number of stored accumulators (one per pair or real pole).
    pub fn len(&self) -> usize {
        self.acc.len()
    }

    pub fn is_empty(&self) -> bool {
        self.acc.is_empty()
    }

    pub fn accumulators(&self) -> &[Complex64] {
        &self.acc
    }

    /// `sum_n gamma_n I_n`, real by construction.
    pub fn value(&self) -> f64 {
        let mut s = 0.0;
        for (t, i) in self.terms.iter().zip(&self.acc) {
            let v = (t.gamma * i).re;
            s += if t.pair { 2.0 * v } else { v };
        }
        s
    }

    /// Sets the input at the first sample without advancing.
    pub fn start(&mut self, u0: f64) {
        self.last = u0;
    }

    /// Advances one step to the new input sample.
    pub fn step(&mut self, u: f64) {
        for (t, i) in self.terms.iter().zip(self.acc.iter_mut()) {
            *i = t.decay * *i + t.w0 * self.last + t.w1 * u;
        }
        self.last = u;
    }

    /// Slowest decay rate `max Re beta`.
    pub fn slowest_rate(&self) -> f64 {
        self.terms
            .iter()
            .map(|t| t.beta.re)
            .fold(f64::NEG_INFINITY, f64::max)
    }
}

/// Applies the kernel for `(r1, r2)` to a signal recorded at `r1`.
///
/// The input is taken to vanish before its first sample. Sample `k` of the
/// output belongs to time `t0 + k dt + (r2 - r1)` for finite `r2`; for
/// `r2 = infinity` no shift is applied and the output is labelled by the
/// input's times.
pub fn teleport_series(input: &TimeSeries, kernel: &PoleTable) -> Result<TimeSeries> {
    input.validate()?;
    if kernel.kind != KernelKind::Teleport {
        return Err(Error::InvalidArgument("not a teleportation kernel".into()));
    }
    if (kernel.r1 - input.radius).abs() > 1e-12 * input.radius {
        return Err(Error::InvalidArgument(format!(
            "kernel starts at r1 = {}, series is at r = {}",
            kernel.r1, input.radius
        )));
    }
    let mut state = ConvolutionState::new(kernel, input.dt)?;
    let mut out = Vec::with_capacity(input.len());
    for (k, &u) in input.samples.iter().enumerate() {
        if k == 0 {
            state.start(u);
        } else {
            state.step(u);
        }
        out.push(u + state.value());
    }
    let t0 = if kernel.r2.is_finite() {
        input.t0 + (kernel.r2 - kernel.r1)
    } else {
        input.t0
    };
    Ok(TimeSeries {
        t0,
        dt: input.dt,
        samples: out,
        radius: kernel.r2,
        ell: input.ell,
        m: input.m,
    })
}

/// The exact far-field kernel for `l = 2`: poles `z_pm / r1` with
/// `z_pm = (-3 pm i sqrt 3)/2`, residues summing to `-3 / r1`.
pub fn awe_kernel_l2(r1: f64) -> Result<PoleTable> {
    if !(r1 > 0.0 && r1.is_finite()) {
        return Err(Error::InvalidArgument(format!("r1 = {r1}")));
    }
    let s3 = Dd::from_f64(3.0).sqrt();
    let half = Dd::from_f64(0.5);
    let zm = Complex::new(Dd::from_f64(-1.5), -(s3 * half));
    let r = Dd::from_f64(r1);
    // residue at z_-/r1 is  i (sqrt 3 / 3) z_-^2 / r1
    let zm2 = zm * zm;
    let c = s3 / Dd::from_f64(3.0) / r;
    let g = Complex::new(-zm2.im * c, zm2.re * c);
    let beta = Complex::new(zm.re / r, zm.im / r);
    let mut t = PoleTable::new(KernelKind::Teleport, 2, r1, f64::INFINITY);
    t.betas = vec![beta, beta.conj()];
    t.gammas = vec![g, g.conj()];
    t.precision = Precision::Extended;
    t.set_meta("source", "closed form");
    Ok(t)
}

/// Parameters of `f(u) = sin(f0 (u - u0)) exp(-c (u - u0)^2)`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SineGaussian {
    pub f0: f64,
    pub c: f64,
    pub u0: f64,
}

impl Default for SineGaussian {
    fn default() -> Self {
        SineGaussian {
            f0: 1.0,
            c: 2.5,
            u0: -6.0,
        }
    }
}

impl SineGaussian {
    /// `f, f', ..., f''''` at retarded time `u`.
    pub fn derivatives(&self, u: f64) -> [f64; 5] {
        let x = u - self.u0;
        let (s, co) = (self.f0 * x).sin_cos();
        let g = (-self.c * x * x).exp();
        // f = Im(exp(i f0 x - c x^2)); derivatives of the complex
        // exponent e^{q(x)}, q' = i f0 - 2 c x, q'' = -2c.
        let q1 = Complex64::new(-2.0 * self.c * x, self.f0);
        let q2 = -2.0 * self.c;
        let h0 = Complex64::new(1.0, 0.0);
        let h1 = q1;
        let h2 = q1 * q1 + q2;
        let h3 = q1 * q1 * q1 + 3.0 * q1 * q2;
        let h4 = q1.powi(4) + 6.0 * q1 * q1 * q2 + 3.0 * q2 * q2;
        let e = Complex64::new(co, s) * g;
        [h0, h1, h2, h3, h4].map(|h| (h * e).im)
    }
}

/// `Psi = f''(t - r) + 3 f'(t - r) / r + 3 f(t - r) / r^2`.
pub fn exact_outgoing_l2(f: &SineGaussian, r: f64, t: f64) -> f64 {
    outgoing_l2_retarded(f, r, t - r)
}

/// The outgoing solution at radius `r` and retarded time `u = t - r`.
pub fn outgoing_l2_retarded(f: &SineGaussian, r: f64, u: f64) -> f64 {
    let d = f.derivatives(u);
    d[2] + 3.0 * d[1] / r + 3.0 * d[0] / (r * r)
}

/// `(Psi, d_t Psi, d_r Psi)` of the outgoing `l = 2` solution.
pub fn exact_outgoing_l2_all(f: &SineGaussian, r: f64, t: f64) -> [f64; 3] {
    let d = f.derivatives(t - r);
    let psi = d[2] + 3.0 * d[1] / r + 3.0 * d[0] / (r * r);
    let psi_t = d[3] + 3.0 * d[2] / r + 3.0 * d[1] / (r * r);
    let psi_r = -psi_t - 3.0 * d[1] / (r * r) - 6.0 * d[0] / (r * r * r);
    [psi, psi_t, psi_r]
}

/// The far-field signal `f''(u)` at `T = t - r1 - u0`, i.e. `u = T + u0`.
pub fn asymptotic_signal_l2(f: &SineGaussian, big_t: f64) -> f64 {
    let t = big_t;
    let (s, c) = (f.f0 * t).sin_cos();
    (-4.0 * f.c * f.f0 * t * c + (-2.0 * f.c - f.f0 * f.f0 + 4.0 * f.c * f.c * t * t) * s)
        * (-f.c * t * t).exp()
}

/// `|Phi(t = 0)|`, used as the kernel's sup norm.
pub fn kernel_linf_at_zero(ell: usize, r1: f64, r2: f64) -> f64 {
    kernel_at_t0(ell, r1, r2).abs()
}

/// `||Phi||_inf ||dPsi||_1 + ||dPsi||_inf`.
pub fn error_bound(kernel_linf: f64, delta_l1: f64, delta_linf: f64) -> Result<f64> {
    if !(kernel_linf >= 0.0 && delta_l1 >= 0.0 && delta_linf >= 0.0) {
        return Err(Error::InvalidArgument("norms must be nonnegative".into()));
    }
    Ok(kernel_linf * delta_l1 + delta_linf)
}

/// A table holding the given double-precision poles and residues.
pub fn table_from_c64(
    kind: KernelKind,
    ell: usize,
    r1: f64,
    r2: f64,
    betas: &[Complex64],
    gammas: &[Complex64],
) -> PoleTable {
    let mut t = PoleTable::new(kind, ell, r1, r2);
    t.betas = betas.iter().map(|b| c_dd(*b)).collect();
    t.gammas = gammas.iter().map(|g| c_dd(*g)).collect();
    t.precision = Precision::Double;
    t
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn awe_kernel_values() {
        let t = awe_kernel_l2(10.0).unwrap();
        let b = t.betas_c64();
        let g = t.gammas_c64();
        assert!((b[0] * 10.0 - Complex64::new(-1.5, -(3f64.sqrt()) / 2.0)).norm() < 1e-15);
        assert!((g[0] - Complex64::new(-0.15, 0.3 / 12f64.sqrt())).norm() < 1e-15);
        assert!((t.residue_sum().re + 0.3).abs() < 1e-15);
        assert!(t.is_conjugate_closed());
        let exact =
            crate::exact::exact_residues(2, 7.0, f64::INFINITY, Precision::Extended).unwrap();
        let t7 = awe_kernel_l2(7.0).unwrap();
        for (a, b) in exact.residues_c64().iter().zip(t7.gammas_c64()) {
            assert!((a - b).norm() < 1e-15);
        }
    }

    #[test]
    fn sine_gaussian_derivatives_by_differences() {
        let f = SineGaussian::default();
        let h = 1e-4;
        for u in [-7.0, -6.3, -5.9, -5.0] {
            let d = f.derivatives(u);
            let p = f.derivatives(u + h);
            let m = f.derivatives(u - h);
            for k in 0..4 {
                let fd = (p[k] - m[k]) / (2.0 * h);
                assert!(
                    (fd - d[k + 1]).abs() < 1e-6 * (1.0 + d[k + 1].abs()),
                    "k={k} u={u}"
                );
            }
        }
    }

    #[test]
    fn outgoing_solution_satisfies_the_equation() {
        let f = SineGaussian::default();
        let h = 1e-3;
        for (r, t) in [(10.0, 4.2), (6.0, 0.3), (8.0, 2.0)] {
            let psi = |r: f64, t: f64| exact_outgoing_l2(&f, r, t);
            let tt = (psi(r, t + h) - 2.0 * psi(r, t) + psi(r, t - h)) / (h * h);
            let rr = (psi(r + h, t) - 2.0 * psi(r, t) + psi(r - h, t)) / (h * h);
            let res = tt - rr + 6.0 / (r * r) * psi(r, t);
            assert!(res.abs() < 1e-4, "residual {res}");
            let all = exact_outgoing_l2_all(&f, r, t);
            assert!((all[1] - (psi(r, t + h) - psi(r, t - h)) / (2.0 * h)).abs() < 1e-4);
            assert!((all[2] - (psi(r + h, t) - psi(r - h, t)) / (2.0 * h)).abs() < 1e-4);
        }
    }

    #[test]
    fn asymptotic_limit() {
        let f = SineGaussian::default();
        assert_eq!(asymptotic_signal_l2(&f, 0.0), 0.0);
        for k in 0..10 {
            let big_t = -1.5 + 0.3 * k as f64;
            let u = big_t + f.u0;
            let v = outgoing_l2_retarded(&f, 1e14, u);
            assert!((v - asymptotic_signal_l2(&f, big_t)).abs() < 1e-12);
        }
        let pure = SineGaussian {
            f0: 1.3,
            c: 0.0,
            u0: 0.0,
        };
        assert!((asymptotic_signal_l2(&pure, 0.7) + 1.69 * (1.3f64 * 0.7).sin()).abs() < 1e-14);
    }

    #[test]
    fn bounds() {
        assert!((kernel_linf_at_zero(2, 10.0, f64::INFINITY) - 0.3).abs() < 1e-15);
        assert!((kernel_linf_at_zero(64, 15.0, 240.0) - 130.0).abs() < 1e-12);
        assert_eq!(error_bound(0.0, 5.0, 0.25).unwrap(), 0.25);
        assert!(error_bound(-1.0, 0.0, 0.0).is_err());
    }

    #[test]
    fn empty_kernel_is_identity() {
        let k = PoleTable::new(KernelKind::Teleport, 0, 5.0, 9.0);
        let s = TimeSeries::sample(|t| t.sin(), 0.0, 0.1, 50, 5.0, 0).unwrap();
        let o = teleport_series(&s, &k).unwrap();
        assert_eq!(o.samples, s.samples);
        assert_eq!(o.t0, 4.0);
        assert_eq!(o.radius, 9.0);
    }

    #[test]
    fn phi_functions_continuous() {
        let z = Complex64::new(-0.49999, 0.1);
        let w = Complex64::new(-0.50001, 0.1);
        let (a1, a2) = phi12(z);
        let (b1, b2) = phi12(w);
        assert!((a1 - b1).norm() < 1e-5 && (a2 - b2).norm() < 1e-5);
    }
}
