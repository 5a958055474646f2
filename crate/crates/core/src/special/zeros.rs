//! Zeros of the Bessel polynomials (MacDonald-function zeros).
//!
//! The zeros of `theta(z) = z^l W_l(z)` are extremely sensitive to the
//! coefficients: the condition number grows like `10^{0.56 l}`. They are
//! found by Aberth-Ehrlich iteration with the polynomial evaluated in
//! binary floating point of `2 l + 160` bits, then rounded to
//! double-double. Only the lower half-plane roots (and the real root for
//! odd `l`) are iterated; the upper half is their exact reflection.

use std::collections::HashMap;
use std::sync::{Arc, Mutex, OnceLock};

use num_complex::{Complex, Complex64};

use super::airy::{airy_zeros, AiryMode};
use super::bessel_poly::BesselPoly;
use super::curve::{curve_point, REAL_CROSSING};
use crate::error::{Error, Result};
use crate::precision::mp::{self, Mc};
use crate::precision::Dd;

/// Backward-error acceptance: `|W/W'| < RESIDUAL_FACTOR * eps * |b|`.
pub const RESIDUAL_FACTOR: f64 = 10.0;

const MAX_SWEEPS: usize = 400;

#[derive(Clone, Debug)]
pub struct ZeroSet {
    pub ell: usize,
    /// Ordered by increasing imaginary part.
    pub zeros: Vec<Complex<Dd>>,
    /// `zeros / (l + 1/2)`.
    pub scaled_zeros: Vec<Complex<Dd>>,
}

impl ZeroSet {
    pub fn zeros_c64(&self) -> Vec<Complex64> {
        self.zeros
            .iter()
            .map(|z| Complex64::new(z.re.to_f64(), z.im.to_f64()))
            .collect()
    }

    pub fn scaled_c64(&self) -> Vec<Complex64> {
        self.scaled_zeros
            .iter()
            .map(|z| Complex64::new(z.re.to_f64(), z.im.to_f64()))
            .collect()
    }

    /// Roots strictly below the real axis, bottom first.
    pub fn lower(&self) -> &[Complex<Dd>] {
        &self.zeros[..self.ell / 2]
    }
}

/// First guesses for the lower half-plane zeros, bottom first, from the
/// limiting curve and the Airy zeros.
pub fn asymptotic_lower_zeros(ell: usize, mode: AiryMode) -> Result<Vec<Complex64>> {
    let m = ell / 2;
    if m == 0 {
        return Ok(Vec::new());
    }
    let nu = ell as f64 + 0.5;
    let airy = airy_zeros(m, mode)?;
    Ok(airy
        .roots
        .iter()
        .map(|a| curve_point(a.abs() * nu.powf(-2.0 / 3.0)) * nu)
        .collect())
}

pub fn macdonald_zeros(ell: usize) -> Result<ZeroSet> {
    if ell == 0 {
        return Err(Error::InvalidArgument("W_0 has no zeros".into()));
    }
    let poly = BesselPoly::new(ell);
    let nu = ell as f64 + 0.5;
    let odd = ell % 2 == 1;
    let prec = mp::bits_for_degree(ell);
    let coeffs = poly.mp_coeffs(prec);

    let mut guesses = asymptotic_lower_zeros(ell, AiryMode::Exact)?;
    if odd {
        guesses.push(Complex64::new(-REAL_CROSSING * nu, 0.0));
    }
    let mut roots: Vec<Mc> = guesses.iter().map(|g| Mc::from_c64(*g, prec)).collect();
    let n = roots.len();

    let mut converged = false;
    for _ in 0..MAX_SWEEPS {
        let approx: Vec<Complex64> = roots.iter().map(|r| r.to_c64()).collect();
        let mut max_rel = 0.0f64;
        for i in 0..n {
            let z = &roots[i];
            let (p, dp) = BesselPoly::theta_mp(&coeffs, z);
            let newton = p.div(&dp).to_c64();
            let zi = approx[i];
            let mut s = Complex64::new(0.0, 0.0);
            for (k, zk) in approx.iter().enumerate() {
                if k != i {
                    s += 1.0 / (zi - zk);
                }
                if zk.im != 0.0 {
                    s += 1.0 / (zi - zk.conj());
                }
            }
            let w = newton / (Complex64::new(1.0, 0.0) - newton * s);
            let mut next = z.sub(&Mc::from_c64(w, prec));
            if odd && i == n - 1 {
                next.im = mp::mf_from_f64(0.0, prec);
            }
            roots[i] = next;
            max_rel = max_rel.max(w.norm() / zi.norm());
        }
        if !max_rel.is_finite() {
            break;
        }
        if max_rel < 1e-34 {
            converged = true;
            break;
        }
    }
    if !converged {
        return Err(Error::NoConvergence(format!(
            "Aberth iteration for l = {ell} did not converge in {MAX_SWEEPS} sweeps"
        )));
    }

    let mut lower: Vec<Complex<Dd>> = Vec::with_capacity(n);
    for r in &roots {
        let b = r.to_cdd();
        // backward error at the rounded root
        let bm = Mc::from_cdd(b, prec);
        let (p, dp) = BesselPoly::theta_mp(&coeffs, &bm);
        let step = p.div(&dp).abs_f64();
        let bound = RESIDUAL_FACTOR * Dd::EPSILON * b.re.to_f64().hypot(b.im.to_f64());
        if !(step < bound) || b.re.to_f64() >= 0.0 {
            return Err(Error::NoConvergence(format!(
                "zero {b:?} of W_{ell} fails the residual check ({step:e} >= {bound:e})"
            )));
        }
        lower.push(b);
    }
    let real = if odd { lower.pop() } else { None };
    lower.sort_by(|a, b| a.im.partial_cmp(&b.im).expect("finite"));
    if lower.iter().any(|z| z.im.to_f64() >= 0.0) {
        return Err(Error::NoConvergence(format!(
            "Aberth iteration for l = {ell} left the lower half plane"
        )));
    }

    let mut zeros = lower.clone();
    zeros.extend(real);
    zeros.extend(lower.iter().rev().map(|z| z.conj()));
    let nud = Dd::from_f64(nu);
    let scaled_zeros = zeros
        .iter()
        .map(|z| Complex::new(z.re / nud, z.im / nud))
        .collect();
    Ok(ZeroSet {
        ell,
        zeros,
        scaled_zeros,
    })
}

/// Memoized [`macdonald_zeros`]; the high-degree cases take seconds.
pub fn macdonald_zeros_cached(ell: usize) -> Result<Arc<ZeroSet>> {
    static CACHE: OnceLock<Mutex<HashMap<usize, Arc<ZeroSet>>>> = OnceLock::new();
    let cache = CACHE.get_or_init(|| Mutex::new(HashMap::new()));
    if let Some(z) = cache.lock().expect("cache lock").get(&ell) {
        return Ok(z.clone());
    }
    let z = Arc::new(macdonald_zeros(ell)?);
    cache.lock().expect("cache lock").insert(ell, z.clone());
    Ok(z)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn degree_one_and_two() {
        let z = macdonald_zeros(1).unwrap();
        assert_eq!(z.zeros.len(), 1);
        assert!((z.zeros[0].re + Dd::ONE).abs().to_f64() < 1e-31);
        assert_eq!(z.zeros[0].im, Dd::ZERO);

        let z = macdonald_zeros(2).unwrap();
        let s3h = Dd::from_f64(3.0).sqrt() / 2.0;
        assert!((z.zeros[0].re + Dd::from_f64(1.5)).abs().to_f64() < 1e-30);
        assert!((z.zeros[0].im + s3h).abs().to_f64() < 1e-30);
        assert_eq!(z.zeros[1], z.zeros[0].conj());
    }

    #[test]
    fn degree_three_listing() {
        let z = macdonald_zeros(3).unwrap().zeros_c64();
        assert!((z[0] - Complex64::new(-1.8389, -1.7544)).norm() < 1e-4);
        assert!((z[1] - Complex64::new(-2.3222, 0.0)).norm() < 1e-4);
        assert_eq!(z[2], z[0].conj());
    }

    #[test]
    fn scaled_zeros_follow_limiting_curve() {
        let samples = super::super::curve::curve_samples(400);
        for ell in [4usize, 9, 16, 33, 64] {
            let z = macdonald_zeros(ell).unwrap();
            for b in z.scaled_c64() {
                let d = super::super::curve::distance_to_curve(b, &samples);
                assert!(d < 0.2, "l = {ell}: {b} at distance {d}");
            }
            let conj: Vec<_> = z.zeros.iter().rev().map(|b| b.conj()).collect();
            assert_eq!(conj, z.zeros);
        }
    }

    #[test]
    #[ignore]
    fn timing_large_degree() {
        for ell in [64usize, 128, 256] {
            let t = std::time::Instant::now();
            let z = macdonald_zeros(ell).unwrap();
            eprintln!("l = {ell}: {:?}, b_1 = {:?}", t.elapsed(), z.zeros_c64()[0]);
        }
    }
}
