//! Kernel values on the imaginary axis `s = i y`.
//!
//! `Phi(s; r1, r2) = W(s r2) / W(s r1) - 1 = exp(int_{r1}^{r2} Omega(s eta) / eta deta) - 1`.
//! The integrand is smooth on the imaginary axis and the exponent is
//! formed without cancellation, unlike the direct pole sum whose residues
//! grow like `10^{l/4}`.

use num_complex::{Complex, Complex64};

use super::gk::{integrate, GkRule, ORDERS};
use super::omega::omega_cf;
use crate::error::{Error, Result};
use crate::exact::{check_radii, kernel_at_s0};
use crate::par;
use crate::precision::{ComplexExt, Dd, Precision, Real};
use crate::special::BesselPoly;
use crate::table::PoleTable;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Spacing {
    Uniform,
    Logarithmic,
}

#[derive(Clone, Debug, PartialEq)]
pub struct QuadratureSpec {
    /// Subintervals of `[r1, r2]` (in `ln eta` for logarithmic spacing).
    pub n_composite: usize,
    /// Kronrod node count.
    pub gk_order: usize,
    pub spacing: Spacing,
    /// Accepted embedded error estimate, relative to `|Phi|`.
    pub tol: f64,
    /// Doublings of `n_composite` allowed when the estimate exceeds `tol`.
    pub max_refine: usize,
}

impl QuadratureSpec {
    /// Subinterval count that resolves the poles of `Omega` nearest to the
    /// imaginary axis; their angular distance shrinks like `l^{-2/3}`.
    pub fn for_kernel(ell: usize, r1: f64, r2: f64, precision: Precision) -> Self {
        let ratio = if r2.is_infinite() { 1e3 } else { r2 / r1 };
        let dist = 1.6 * (ell.max(1) as f64).powf(-2.0 / 3.0);
        let h = match precision {
            Precision::Double => dist / 0.9,
            Precision::Extended => dist / 2.4,
        };
        let n = (ratio.ln() / (2.0 * h)).ceil().max(2.0) as usize;
        QuadratureSpec {
            n_composite: n,
            gk_order: 31,
            spacing: Spacing::Logarithmic,
            tol: match precision {
                Precision::Double => 1e-13,
                Precision::Extended => 1e-24,
            },
            max_refine: 4,
        }
    }

    /// A different but equally accurate rule, for independent verification.
    pub fn perturbed(&self) -> Self {
        QuadratureSpec {
            n_composite: self.n_composite + self.n_composite / 3 + 1,
            gk_order: if self.gk_order == 41 { 61 } else { 41 },
            ..self.clone()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_composite == 0 {
            return Err(Error::InvalidArgument(
                "n_composite must be positive".into(),
            ));
        }
        if !ORDERS.contains(&self.gk_order) {
            return Err(Error::InvalidArgument(format!(
                "gk_order {} not in {ORDERS:?}",
                self.gk_order
            )));
        }
        Ok(())
    }
}

/// Value of the kernel and the quadrature error estimate.
#[derive(Clone, Copy, Debug)]
pub struct PhiValue<T> {
    pub value: Complex<T>,
    pub error_estimate: f64,
}

/// `int_{r1}^{r2} Omega(i y eta) / eta deta` on a fixed composite rule.
fn log_ratio_integral<T: Real>(
    ell: usize,
    r1: f64,
    r2: f64,
    y: f64,
    n: usize,
    rule: &GkRule<T>,
    spacing: Spacing,
) -> Result<(Complex<T>, f64)> {
    let yt = T::from_f64(y);
    let failed = std::cell::Cell::new(None);
    let (v, e) = match spacing {
        Spacing::Logarithmic => {
            let f = |u: T| {
                let z = Complex::new(T::zero(), yt * u.exp());
                omega_cf(ell, z).unwrap_or_else(|err| {
                    failed.set(Some(err.to_string()));
                    Complex::new(T::zero(), T::zero())
                })
            };
            integrate(&f, T::from_f64(r1).ln(), T::from_f64(r2).ln(), n, rule)
        }
        Spacing::Uniform => {
            let f = |eta: T| {
                let z = Complex::new(T::zero(), yt * eta);
                let w = omega_cf(ell, z).unwrap_or_else(|err| {
                    failed.set(Some(err.to_string()));
                    Complex::new(T::zero(), T::zero())
                });
                w.scale(T::one() / eta)
            };
            integrate(&f, T::from_f64(r1), T::from_f64(r2), n, rule)
        }
    };
    if let Some(msg) = failed.take() {
        return Err(Error::NoConvergence(msg));
    }
    Ok((v, e))
}

/// `Phi(i y; r1, r2)` for finite `r2` from the integral representation.
/// The composite rule is refined by doubling until the embedded estimate
/// meets `quad.tol`.
pub fn phi_via_integral<T: Real>(
    ell: usize,
    r1: f64,
    r2: f64,
    y: f64,
    quad: &QuadratureSpec,
) -> Result<PhiValue<T>> {
    check_radii(r1, r2)?;
    quad.validate()?;
    if r2.is_infinite() {
        return Err(Error::InvalidArgument(
            "the integral representation needs a finite r2".into(),
        ));
    }
    if ell == 0 {
        return Ok(PhiValue {
            value: Complex::new(T::zero(), T::zero()),
            error_estimate: 0.0,
        });
    }
    if y == 0.0 {
        return Ok(PhiValue {
            value: Complex::new(T::from_f64(kernel_at_s0(ell, r1, r2)), T::zero()),
            error_estimate: 0.0,
        });
    }
    let rule = GkRule::<T>::new(quad.gk_order)?;
    let mut n = quad.n_composite;
    let mut last = None;
    for _ in 0..=quad.max_refine {
        let (int, err) = log_ratio_integral(ell, r1, r2, y, n, &rule, quad.spacing)?;
        let value = int.cexpm1();
        let est = relative_estimate(err, value.to_c64());
        last = Some(PhiValue {
            value,
            error_estimate: est,
        });
        if est <= quad.tol {
            return Ok(last.expect("set above"));
        }
        n *= 2;
    }
    let v = last.expect("at least one pass");
    Err(Error::Quadrature {
        y,
        estimate: v.error_estimate,
        tol: quad.tol,
    })
}

/// An absolute error `err` in the exponent `I` of `Phi = exp(I) - 1`
/// perturbs `Phi` by `|1 + Phi| err`.
fn relative_estimate(err: f64, phi: Complex64) -> f64 {
    err * (phi + 1.0).norm() / phi.norm().max(1e-300)
}

/// `W(z) - 1` without cancellation, for `|z|` well beyond `nu`.
fn w_minus_one<T: Real>(poly: &BesselPoly, z: Complex<T>) -> Complex<T> {
    let nu = T::from_f64(poly.nu());
    let u = Complex::new(nu, T::zero()) / z;
    let c = poly.scaled_coeffs();
    let ell = poly.ell();
    let coef = |k: usize| Complex::new(T::from_f64(c[k].hi) + T::from_f64(c[k].lo), T::zero());
    let mut p = coef(ell);
    for k in (1..ell).rev() {
        p = p * u + coef(k);
    }
    p * u
}

/// `Phi(i y; r1, inf) = 1 / W(i y r1) - 1`. The integral is carried out to
/// a radius `R` where `W(i y R)` is within a few percent of one, and the
/// remainder is evaluated directly.
pub fn phi_far<T: Real>(ell: usize, r1: f64, y: f64, quad: &QuadratureSpec) -> Result<PhiValue<T>> {
    quad.validate()?;
    if ell == 0 {
        return Ok(PhiValue {
            value: Complex::new(T::zero(), T::zero()),
            error_estimate: 0.0,
        });
    }
    if y == 0.0 {
        return Ok(PhiValue {
            value: Complex::new(-T::one(), T::zero()),
            error_estimate: 0.0,
        });
    }
    let poly = BesselPoly::new(ell);
    let nu = poly.nu();
    let big_r = 40.0 * nu / y.abs();
    let one = Complex::new(T::one(), T::zero());
    let zr = |r: f64| Complex::new(T::zero(), T::from_f64(y) * T::from_f64(r));
    if big_r <= r1 {
        let wm1 = w_minus_one(&poly, zr(r1));
        let value = -(wm1 / (one + wm1));
        return Ok(PhiValue {
            value,
            error_estimate: 0.0,
        });
    }
    // ln W(s r1) = ln W(s R) - int_{r1}^{R} Omega / eta
    let wm1 = w_minus_one(&poly, zr(big_r));
    let ln_wr = log1p(wm1);
    let mut q = quad.clone();
    q.n_composite = quad.n_composite.max(2);
    let rule = GkRule::<T>::new(q.gk_order)?;
    let mut n = q.n_composite;
    let mut last = None;
    for _ in 0..=q.max_refine {
        let (int, err) = log_ratio_integral(ell, r1, big_r, y, n, &rule, q.spacing)?;
        let value = (int - ln_wr).cexpm1();
        let est = relative_estimate(err, value.to_c64());
        last = Some(PhiValue {
            value,
            error_estimate: est,
        });
        if est <= q.tol {
            return Ok(last.expect("set above"));
        }
        n *= 2;
    }
    let v = last.expect("at least one pass");
    Err(Error::Quadrature {
        y,
        estimate: v.error_estimate,
        tol: q.tol,
    })
}

/// `ln(1 + w)` accurate for small `|w|`.
fn log1p<T: Real>(w: Complex<T>) -> Complex<T> {
    let one = Complex::new(T::one(), T::zero());
    if w.to_c64().norm() > 0.1 {
        return (one + w).cln();
    }
    // series: w - w^2/2 + w^3/3 - ...
    let mut term = w;
    let mut acc = w;
    let mut k = 1.0;
    loop {
        k += 1.0;
        term = -(term * w);
        let add = term.scale(T::one() / T::from_f64(k));
        acc += add;
        if add.to_c64().norm() <= T::eps() * acc.to_c64().norm() {
            break;
        }
    }
    acc
}

/// The kernel at `s = i y` for finite or infinite `r2`.
pub fn phi_truth<T: Real>(
    ell: usize,
    r1: f64,
    r2: f64,
    y: f64,
    quad: &QuadratureSpec,
) -> Result<PhiValue<T>> {
    if r2.is_infinite() {
        check_radii(r1, r2)?;
        phi_far(ell, r1, y, quad)
    } else {
        phi_via_integral(ell, r1, r2, y, quad)
    }
}

/// Sampling of the nonnegative imaginary axis: a uniform block on
/// `[0, y_max]` plus a geometric block from `y_min` to `y_far`.
#[derive(Clone, Debug, PartialEq)]
pub struct GridSpec {
    pub y_max: f64,
    /// Uniform points on `[0, y_max]`.
    pub j: usize,
    pub y_min: f64,
    pub y_far: f64,
    /// Geometric points on `[y_min, y_far]`.
    pub n_geom: usize,
}

impl GridSpec {
    pub fn for_kernel(ell: usize, r1: f64) -> Self {
        let nu = ell as f64 + 0.5;
        GridSpec {
            y_max: 6.0 * nu / r1,
            j: 800,
            y_min: 1e-6 / r1,
            y_far: 1e4 * nu / r1,
            n_geom: 400,
        }
    }

    /// A denser grid whose interior points differ from this one's.
    pub fn refined(&self, factor: usize) -> Self {
        GridSpec {
            j: self.j * factor + 1,
            n_geom: self.n_geom * factor + 1,
            ..self.clone()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.y_max > 0.0 && self.y_min > 0.0 && self.y_far > self.y_min) || self.j < 2 {
            return Err(Error::InvalidArgument(format!("bad grid {self:?}")));
        }
        Ok(())
    }

    /// Ratio between consecutive geometric points.
    pub fn geometric_ratio(&self) -> f64 {
        (self.y_far / self.y_min).powf(1.0 / (self.n_geom.max(2) - 1) as f64)
    }

    /// Sorted distinct points in `[0, max(y_max, y_far)]`, starting at 0.
    pub fn nonnegative_points(&self) -> Vec<f64> {
        let mut pts = Vec::with_capacity(self.j + self.n_geom + 1);
        for i in 0..self.j {
            pts.push(self.y_max * i as f64 / (self.j - 1) as f64);
        }
        if self.n_geom >= 2 {
            let q = self.geometric_ratio();
            let mut y = self.y_min;
            for _ in 0..self.n_geom {
                pts.push(y);
                y *= q;
            }
        }
        pts.sort_by(|a, b| a.partial_cmp(b).expect("finite grid"));
        pts.dedup_by(|a, b| (*a - *b).abs() <= 1e-14 * b.abs());
        pts
    }
}

/// Trapezoidal weights for sorted nodes.
pub fn trapezoid_weights(y: &[f64]) -> Vec<f64> {
    let n = y.len();
    let mut w = vec![0.0; n];
    for i in 0..n.saturating_sub(1) {
        let h = 0.5 * (y[i + 1] - y[i]);
        w[i] += h;
        w[i + 1] += h;
    }
    w
}

#[derive(Clone, Debug)]
pub struct KernelSampleSet {
    pub ell: usize,
    pub r1: f64,
    pub r2: f64,
    /// Symmetric about zero, ascending.
    pub grid: Vec<f64>,
    pub values: Vec<Complex<Dd>>,
    /// Trapezoidal weights on the grid.
    pub weights: Vec<f64>,
    pub precision: Precision,
    /// Largest quadrature error estimate over the grid.
    pub max_error_estimate: f64,
    /// Time-domain kernel at `t = 0`, the coefficient of `1/s` as
    /// `|s| -> infinity`, when known in closed form.
    pub t0_value: Option<f64>,
}

impl KernelSampleSet {
    /// Indices of the points with `y >= 0`.
    pub fn nonnegative(&self) -> impl Iterator<Item = usize> + '_ {
        (0..self.grid.len()).filter(move |&i| self.grid[i] >= 0.0)
    }

    /// `(y, Phi(iy))` for `y >= 0` in double precision.
    pub fn half_c64(&self) -> (Vec<f64>, Vec<Complex64>) {
        self.nonnegative()
            .map(|i| (self.grid[i], self.values[i].to_c64()))
            .unzip()
    }

    /// Builds a symmetric set from values on the nonnegative half.
    pub fn from_half(
        ell: usize,
        r1: f64,
        r2: f64,
        ys: &[f64],
        vals: &[Complex<Dd>],
        precision: Precision,
        max_error_estimate: f64,
    ) -> Self {
        let mut grid = Vec::with_capacity(2 * ys.len());
        let mut values = Vec::with_capacity(2 * ys.len());
        for (y, v) in ys.iter().zip(vals).rev() {
            if *y > 0.0 {
                grid.push(-*y);
                values.push(v.conj());
            }
        }
        for (y, v) in ys.iter().zip(vals) {
            grid.push(*y);
            values.push(*v);
        }
        let weights = trapezoid_weights(&grid);
        KernelSampleSet {
            ell,
            r1,
            r2,
            grid,
            values,
            weights,
            precision,
            max_error_estimate,
            t0_value: None,
        }
    }
}

/// Evaluates `f` on every `y` of the half grid, in parallel when enabled.
pub fn sample_half<F>(ys: &[f64], f: F) -> Result<Vec<(Complex<Dd>, f64)>>
where
    F: Fn(f64) -> Result<(Complex<Dd>, f64)> + Sync + Send,
{
    par::map(ys, |&y| f(y)).into_iter().collect()
}

/// Truth profile on the grid, computed for `y >= 0` and reflected.
pub fn phi_truth_profile(
    ell: usize,
    r1: f64,
    r2: f64,
    grid: &GridSpec,
    quad: &QuadratureSpec,
    precision: Precision,
) -> Result<KernelSampleSet> {
    check_radii(r1, r2)?;
    grid.validate()?;
    quad.validate()?;
    let ys = grid.nonnegative_points();
    let eval = |y: f64| -> Result<(Complex<Dd>, f64)> {
        match precision {
            Precision::Extended => {
                let v = phi_truth::<Dd>(ell, r1, r2, y, quad)?;
                Ok((v.value, v.error_estimate))
            }
            Precision::Double => {
                let v = phi_truth::<f64>(ell, r1, r2, y, quad)?;
                Ok((crate::precision::c_dd(v.value), v.error_estimate))
            }
        }
    };
    let out = sample_half(&ys, eval)?;
    let max_err = out.iter().map(|(_, e)| *e).fold(0.0, f64::max);
    let vals: Vec<Complex<Dd>> = out.into_iter().map(|(v, _)| v).collect();
    let mut set = KernelSampleSet::from_half(ell, r1, r2, &ys, &vals, precision, max_err);
    set.t0_value = Some(crate::exact::kernel_at_t0(ell, r1, r2));
    Ok(set)
}

/// Samples of the boundary kernel `z W'(z) / W(z)` at `z = i y b`, i.e.
/// the Laplace-domain radiation kernel at radius `b`.
pub fn omega_profile(ell: usize, b: f64, grid: &GridSpec) -> Result<KernelSampleSet> {
    check_radii(b, f64::INFINITY)?;
    grid.validate()?;
    let ys = grid.nonnegative_points();
    let out = sample_half(&ys, |y| {
        let v = if y == 0.0 {
            Complex64::new(-(ell as f64), 0.0)
        } else {
            omega_cf::<f64>(ell, Complex64::new(0.0, y * b))?
        };
        Ok((crate::precision::c_dd(v), 0.0))
    })?;
    let vals: Vec<Complex<Dd>> = out.into_iter().map(|(v, _)| v).collect();
    let mut set = KernelSampleSet::from_half(ell, b, b, &ys, &vals, Precision::Double, 0.0);
    set.t0_value = Some(-((ell * (ell + 1)) as f64) / (2.0 * b));
    Ok(set)
}

/// Kernel for `(r1, r1 * 10^{P+1})` assembled from decade kernels:
/// `Phi = -1 + prod_{p=0}^{P} (1 + Xi_p(i y r1))`, where `Xi_p` is
/// `decade_kernels[p]` if present, otherwise `decade_kernels[0]` evaluated
/// at `s 10^p`. The decade kernels are normalized to `r1 = 1`.
pub fn phi_via_decades(
    ell: usize,
    r1: f64,
    p: usize,
    decade_kernels: &[PoleTable],
    y: f64,
) -> Result<Complex64> {
    let base = decade_kernels
        .first()
        .ok_or_else(|| Error::InvalidArgument("missing decade kernel".into()))?;
    if base.ell != ell {
        return Err(Error::InvalidArgument(format!(
            "decade kernel is for l = {}, not {ell}",
            base.ell
        )));
    }
    let s = Complex::new(Dd::ZERO, Dd::from_f64(y) * Dd::from_f64(r1));
    let one = Complex::new(Dd::ONE, Dd::ZERO);
    let mut prod = one;
    for q in 0..=p {
        let xi = match decade_kernels.get(q) {
            Some(k) if q > 0 => k.eval_dd(s),
            _ => {
                let f = Dd::from_f64(10f64.powi(q as i32));
                base.eval_dd(s.scale(f))
            }
        };
        prod *= one + xi;
    }
    Ok((prod - one).to_c64())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exact::{exact_residues, polesum_eval};

    #[test]
    fn closed_form_at_origin() {
        let q = QuadratureSpec::for_kernel(2, 1.0, 2.0, Precision::Extended);
        let v = phi_via_integral::<Dd>(2, 1.0, 2.0, 0.0, &q).unwrap();
        assert!((v.value.re + Dd::from_f64(0.75)).abs().to_f64() < 1e-30);
        let v = phi_via_integral::<f64>(0, 1.0, 2.0, 3.0, &q).unwrap();
        assert_eq!(v.value, Complex64::new(0.0, 0.0));
    }

    #[test]
    fn matches_pole_sum_for_small_degree() {
        let k = exact_residues(2, 10.0, 1e4, Precision::Extended).unwrap();
        let q = QuadratureSpec::for_kernel(2, 10.0, 1e4, Precision::Extended);
        let v = phi_via_integral::<Dd>(2, 10.0, 1e4, 1.0, &q)
            .unwrap()
            .value
            .to_c64();
        let w = polesum_eval(&k, Complex64::new(0.0, 1.0)).unwrap();
        assert!((v - w).norm() <= 1e-10 * w.norm(), "{v} {w}");
    }

    #[test]
    fn far_field_matches_pole_sum() {
        for ell in [1usize, 2, 5, 8] {
            let k = exact_residues(ell, 10.0, f64::INFINITY, Precision::Extended).unwrap();
            let q = QuadratureSpec::for_kernel(ell, 10.0, f64::INFINITY, Precision::Extended);
            for y in [1e-4, 0.05, 0.3, 1.0, 7.0, 1e3] {
                let v = phi_far::<Dd>(ell, 10.0, y, &q).unwrap().value.to_c64();
                let w = polesum_eval(&k, Complex64::new(0.0, y)).unwrap();
                assert!((v - w).norm() <= 1e-12 * w.norm(), "l={ell} y={y}: {v} {w}");
            }
        }
    }

    #[test]
    fn profile_is_conjugate_symmetric() {
        let g = GridSpec {
            y_max: 5.0,
            j: 11,
            y_min: 1e-3,
            y_far: 100.0,
            n_geom: 9,
        };
        let q = QuadratureSpec::for_kernel(4, 1.0, 4.0, Precision::Double);
        let s = phi_truth_profile(4, 1.0, 4.0, &g, &q, Precision::Double).unwrap();
        let n = s.grid.len();
        for i in 0..n {
            assert_eq!(s.grid[i], -s.grid[n - 1 - i]);
            assert_eq!(s.values[i], s.values[n - 1 - i].conj());
        }
    }
}
