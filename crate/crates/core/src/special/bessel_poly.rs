//! Bessel polynomials `W_l(z) = sum_k c_k z^{-k}`.
//!
//! The coefficients `c_k = (l+k)! / (2^k k! (l-k)!)` are kept as exact
//! integers; the largest one has about 580 decimal digits at `l = 256`.
//! Fast evaluation uses the rescaled coefficients `c_k / nu^k` with
//! `nu = l + 1/2`, which stay within a few orders of magnitude of one.

use dashu_int::IBig;
use num_complex::Complex;

use crate::error::{Error, Result};
use crate::precision::mp::{self, Mc, Mf};
use crate::precision::{Dd, Real};

#[derive(Clone, Debug)]
pub struct BesselPoly {
    ell: usize,
    coeffs: Vec<IBig>,
    scaled: Vec<Dd>,
}

impl BesselPoly {
    pub fn new(ell: usize) -> Self {
        let mut coeffs = Vec::with_capacity(ell + 1);
        coeffs.push(IBig::from(1u8));
        for k in 1..=ell {
            let prev = &coeffs[k - 1];
            let num = prev * IBig::from((ell + k) as u64) * IBig::from((ell - k + 1) as u64);
            coeffs.push(num / IBig::from(2 * k as u64));
        }
        let prec = 256;
        let nu = mp::mf_from_f64(ell as f64 + 0.5, prec);
        let mut nu_pow = mp::mf_from_f64(1.0, prec);
        let mut scaled = Vec::with_capacity(ell + 1);
        for c in &coeffs {
            let v = mp::mf_from_int(c, prec) / &nu_pow;
            scaled.push(Dd::from_fbig(&v));
            nu_pow = &nu_pow * &nu;
        }
        BesselPoly {
            ell,
            coeffs,
            scaled,
        }
    }

    pub fn ell(&self) -> usize {
        self.ell
    }

    pub fn nu(&self) -> f64 {
        self.ell as f64 + 0.5
    }

    /// Exact coefficients `c_0, ..., c_l`.
    pub fn coeffs(&self) -> &[IBig] {
        &self.coeffs
    }

    /// `c_k / nu^k` rounded to double-double.
    pub fn scaled_coeffs(&self) -> &[Dd] {
        &self.scaled
    }

    /// `W_l(z)` by Horner's scheme in `nu / z`.
    pub fn eval<T: Real>(&self, z: Complex<T>) -> Result<Complex<T>> {
        Ok(self.eval_with_deriv(z)?.0)
    }

    /// `(W_l(z), W_l'(z))`.
    pub fn eval_with_deriv<T: Real>(&self, z: Complex<T>) -> Result<(Complex<T>, Complex<T>)> {
        let zero = T::zero();
        if z.re == zero && z.im == zero {
            return Err(Error::Domain("W_l is singular at z = 0".into()));
        }
        let nu = T::from_f64(self.nu());
        let u = Complex::new(nu, zero) / z;
        let c = |k: usize| {
            Complex::new(
                T::from_f64(self.scaled[k].hi) + T::from_f64(self.scaled[k].lo),
                zero,
            )
        };
        // p(u) = sum c~_k u^k, q(u) = sum k c~_k u^k = u p'(u)
        let mut p = c(self.ell);
        let mut dp = Complex::new(zero, zero);
        for k in (0..self.ell).rev() {
            dp = dp * u + p;
            p = p * u + c(k);
        }
        // d/dz = -(u/z) d/du
        let dw = -(dp * u) / z;
        Ok((p, dw))
    }

    /// Coefficients converted to binary floats of `prec` bits.
    pub fn mp_coeffs(&self, prec: usize) -> Vec<Mf> {
        self.coeffs
            .iter()
            .map(|c| mp::mf_from_int(c, prec))
            .collect()
    }

    /// `(theta(z), theta'(z))` for the reverse polynomial
    /// `theta(z) = z^l W_l(z) = sum_k c_k z^{l-k}`, using coefficients
    /// from [`Self::mp_coeffs`].
    pub fn theta_mp(coeffs: &[Mf], z: &Mc) -> (Mc, Mc) {
        let prec = z.re.precision().max(coeffs[0].precision());
        let mut p = Mc::from_real(coeffs[0].clone());
        let mut dp = Mc::zero(prec);
        for c in &coeffs[1..] {
            dp = dp.mul(z).add(&p);
            p = p.mul(z);
            p.re = &p.re + c;
        }
        (p, dp)
    }

    /// `(W_l(z), W_l'(z))` in arbitrary precision.
    pub fn eval_mp(&self, coeffs: &[Mf], z: &Mc) -> (Mc, Mc) {
        let (t, dt) = Self::theta_mp(coeffs, z);
        let zinv = z.recip();
        let mut zl = Mc::from_real(mp::mf_from_f64(1.0, z.re.precision()));
        for _ in 0..self.ell {
            zl = zl.mul(&zinv);
        }
        let w = t.mul(&zl);
        // W' = z^{-l} (theta' - l theta / z)
        let l = mp::mf_from_f64(self.ell as f64, z.re.precision());
        let dw = dt.sub(&t.mul(&zinv).mul_real(&l)).mul(&zl);
        (w, dw)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn small_degree_coefficients() {
        let to_u = |p: &BesselPoly| p.coeffs().iter().map(|c| c.to_string()).collect::<Vec<_>>();
        assert_eq!(to_u(&BesselPoly::new(0)), ["1"]);
        assert_eq!(to_u(&BesselPoly::new(2)), ["1", "3", "3"]);
        assert_eq!(to_u(&BesselPoly::new(4)), ["1", "10", "45", "105", "105"]);
    }

    #[test]
    fn evaluation_at_one_sums_coefficients() {
        let p = BesselPoly::new(4);
        let w = p.eval(Complex::new(1.0f64, 0.0)).unwrap();
        assert!((w.re - 266.0).abs() < 1e-12 && w.im == 0.0);
        let w = p.eval(Complex::new(Dd::ONE, Dd::ZERO)).unwrap();
        assert!((w.re - Dd::from_f64(266.0)).abs().to_f64() < 1e-28);
    }

    #[test]
    fn derivative_matches_difference_quotient() {
        let p = BesselPoly::new(7);
        let z = Complex::new(1.3f64, -0.7);
        let h = 1e-6;
        let (_, dw) = p.eval_with_deriv(z).unwrap();
        let fd = (p.eval(z + h).unwrap() - p.eval(z - h).unwrap()) / (2.0 * h);
        assert!((dw - fd).norm() < 1e-6 * dw.norm());
    }

    #[test]
    fn zero_argument_is_a_domain_error() {
        assert!(BesselPoly::new(3).eval(Complex::new(0.0f64, 0.0)).is_err());
    }

    #[test]
    fn mp_evaluation_agrees_with_double_double() {
        let p = BesselPoly::new(12);
        let z = Complex::new(-3.25f64, 5.5);
        let (w, dw) = p.eval_with_deriv(crate::precision::c_dd(z)).unwrap();
        let c = p.mp_coeffs(300);
        let (wm, dwm) = p.eval_mp(&c, &Mc::from_c64(z, 300));
        let e1 = (wm.to_cdd() - w).to_f64_norm();
        let e2 = (dwm.to_cdd() - dw).to_f64_norm();
        assert!(e1 < 1e-28 * w.re.to_f64().abs().max(1.0), "{e1}");
        assert!(e2 < 1e-28, "{e2}");
    }

    trait Norm {
        fn to_f64_norm(&self) -> f64;
    }
    impl Norm for Complex<Dd> {
        fn to_f64_norm(&self) -> f64 {
            self.re.to_f64().hypot(self.im.to_f64())
        }
    }
}
