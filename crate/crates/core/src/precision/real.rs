//! Scalar abstraction shared by the `f64` and double-double code paths.

use std::fmt::{Debug, Display};
use std::ops::{AddAssign, DivAssign, MulAssign, Neg, SubAssign};

use num_complex::Complex;

use super::dd::Dd;

pub trait Real:
    Copy
    + Send
    + Sync
    + Debug
    + Display
    + PartialOrd
    + num_traits::NumAssign
    + Neg<Output = Self>
    + AddAssign
    + SubAssign
    + MulAssign
    + DivAssign
    + 'static
{
    fn from_f64(x: f64) -> Self;
    fn to_f64(self) -> f64;
    fn abs(self) -> Self;
    fn sqrt(self) -> Self;
    fn exp(self) -> Self;
    fn ln(self) -> Self;
    fn sin_cos(self) -> (Self, Self);
    fn atan2(self, x: Self) -> Self;
    fn hypot(self, other: Self) -> Self;
    fn powi(self, n: i32) -> Self;
    fn pi() -> Self;
    /// Unit roundoff.
    fn eps() -> f64;
    fn is_finite(self) -> bool;

    #[inline]
    fn from_usize(n: usize) -> Self {
        Self::from_f64(n as f64)
    }

    #[inline]
    fn max(self, other: Self) -> Self {
        if self >= other {
            self
        } else {
            other
        }
    }

    #[inline]
    fn min(self, other: Self) -> Self {
        if self <= other {
            self
        } else {
            other
        }
    }
}

impl Real for f64 {
    #[inline]
    fn from_f64(x: f64) -> Self {
        x
    }
    #[inline]
    fn to_f64(self) -> f64 {
        self
    }
    #[inline]
    fn abs(self) -> Self {
        f64::abs(self)
    }
    #[inline]
    fn sqrt(self) -> Self {
        f64::sqrt(self)
    }
    #[inline]
    fn exp(self) -> Self {
        f64::exp(self)
    }
    #[inline]
    fn ln(self) -> Self {
        f64::ln(self)
    }
    #[inline]
    fn sin_cos(self) -> (Self, Self) {
        f64::sin_cos(self)
    }
    #[inline]
    fn atan2(self, x: Self) -> Self {
        f64::atan2(self, x)
    }
    #[inline]
    fn hypot(self, other: Self) -> Self {
        f64::hypot(self, other)
    }
    #[inline]
    fn powi(self, n: i32) -> Self {
        f64::powi(self, n)
    }
    #[inline]
    fn pi() -> Self {
        std::f64::consts::PI
    }
    #[inline]
    fn eps() -> f64 {
        f64::EPSILON / 2.0
    }
    #[inline]
    fn is_finite(self) -> bool {
        f64::is_finite(self)
    }
}

impl Real for Dd {
    #[inline]
    fn from_f64(x: f64) -> Self {
        Dd::from_f64(x)
    }
    #[inline]
    fn to_f64(self) -> f64 {
        Dd::to_f64(self)
    }
    #[inline]
    fn abs(self) -> Self {
        Dd::abs(self)
    }
    #[inline]
    fn sqrt(self) -> Self {
        Dd::sqrt(self)
    }
    #[inline]
    fn exp(self) -> Self {
        Dd::exp(self)
    }
    #[inline]
    fn ln(self) -> Self {
        Dd::ln(self)
    }
    #[inline]
    fn sin_cos(self) -> (Self, Self) {
        Dd::sin_cos(self)
    }
    #[inline]
    fn atan2(self, x: Self) -> Self {
        Dd::atan2(self, x)
    }
    #[inline]
    fn hypot(self, other: Self) -> Self {
        Dd::hypot(self, other)
    }
    #[inline]
    fn powi(self, n: i32) -> Self {
        Dd::powi(self, n)
    }
    #[inline]
    fn pi() -> Self {
        Dd::PI
    }
    #[inline]
    fn eps() -> f64 {
        Dd::EPSILON
    }
    #[inline]
    fn is_finite(self) -> bool {
        Dd::is_finite(self)
    }
}

/// Elementary functions on `Complex<T>` for any [`Real`] scalar.
///
/// Method names are distinct from the inherent `Complex<f64>` methods so
/// that generic and concrete code resolve to the same implementation.
pub trait ComplexExt<T: Real>: Sized {
    fn modulus(&self) -> T;
    fn argument(&self) -> T;
    fn csqrt(&self) -> Self;
    fn cexp(&self) -> Self;
    fn cln(&self) -> Self;
    /// `exp(z) - 1` without cancellation for small `|z|`.
    fn cexpm1(&self) -> Self;
    fn cpowf(&self, p: T) -> Self;
    fn to_c64(&self) -> Complex<f64>;
    fn from_c64(z: Complex<f64>) -> Self;
    fn scale(&self, t: T) -> Self;
}

impl<T: Real> ComplexExt<T> for Complex<T> {
    #[inline]
    fn modulus(&self) -> T {
        self.re.hypot(self.im)
    }

    #[inline]
    fn argument(&self) -> T {
        self.im.atan2(self.re)
    }

    fn csqrt(&self) -> Self {
        let zero = T::zero();
        if self.re == zero && self.im == zero {
            return Complex::new(zero, zero);
        }
        let m = self.modulus();
        let half = T::from_f64(0.5);
        if self.re >= zero {
            let t = ((m + self.re) * half).sqrt();
            Complex::new(t, self.im / (t + t))
        } else {
            let t = ((m - self.re) * half).sqrt();
            let t = if self.im < zero { -t } else { t };
            Complex::new(self.im / (t + t), t)
        }
    }

    fn cexp(&self) -> Self {
        let e = self.re.exp();
        let (s, c) = self.im.sin_cos();
        Complex::new(e * c, e * s)
    }

    fn cln(&self) -> Self {
        Complex::new(self.modulus().ln(), self.argument())
    }

    fn cexpm1(&self) -> Self {
        let a = self.re;
        let b = self.im;
        if a.abs().to_f64() > 0.5 || b.abs().to_f64() > 0.5 {
            return self.cexp() - Complex::new(T::one(), T::zero());
        }
        // exp(a+ib) - 1 = expm1(a) e^{ib} + (e^{ib} - 1),
        // with e^{ib} - 1 = 2i sin(b/2) e^{ib/2}
        let em1 = real_expm1(a);
        let (s, c) = b.sin_cos();
        let half = T::from_f64(0.5);
        let (sh, ch) = (b * half).sin_cos();
        let two = T::from_f64(2.0);
        let eib_m1 = Complex::new(-two * sh * sh, two * sh * ch);
        Complex::new(em1 * c, em1 * s) + eib_m1
    }

    fn cpowf(&self, p: T) -> Self {
        let zero = T::zero();
        if self.re == zero && self.im == zero {
            return Complex::new(zero, zero);
        }
        let l = self.cln();
        Complex::new(l.re * p, l.im * p).cexp()
    }

    #[inline]
    fn to_c64(&self) -> Complex<f64> {
        Complex::new(self.re.to_f64(), self.im.to_f64())
    }

    #[inline]
    fn from_c64(z: Complex<f64>) -> Self {
        Complex::new(T::from_f64(z.re), T::from_f64(z.im))
    }

    #[inline]
    fn scale(&self, t: T) -> Self {
        Complex::new(self.re * t, self.im * t)
    }
}

/// `exp(x) - 1` for a real argument.
pub fn real_expm1<T: Real>(x: T) -> T {
    if x.abs().to_f64() > 0.5 {
        return x.exp() - T::one();
    }
    let mut term = x;
    let mut s = x;
    let mut n = 2.0;
    let tol = T::eps() * 0.25;
    loop {
        term = term * x / T::from_f64(n);
        s += term;
        if term.abs().to_f64() <= tol * s.abs().to_f64() {
            break;
        }
        n += 1.0;
    }
    s
}

/// Converts a complex scalar between precisions through `f64` parts when
/// narrowing, or exactly when widening.
pub fn c_dd(z: Complex<f64>) -> Complex<Dd> {
    Complex::new(Dd::from_f64(z.re), Dd::from_f64(z.im))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn complex_sqrt_principal_branch() {
        let z = Complex::new(-4.0f64, -1e-30);
        let r = z.csqrt();
        assert!((r.im + 2.0).abs() < 1e-15 && r.re.abs() < 1e-15);
        let w = Complex::new(Dd::from_f64(3.0), Dd::from_f64(4.0)).csqrt();
        assert!((w.re - Dd::from_f64(2.0)).abs().to_f64() < 1e-30);
        assert!((w.im - Dd::from_f64(1.0)).abs().to_f64() < 1e-30);
    }

    #[test]
    fn expm1_small_argument() {
        let z = Complex::new(1e-20f64, 1e-20);
        let e = z.cexpm1();
        assert!((e.re - 1e-20).abs() < 1e-35);
        assert!((e.im - 1e-20).abs() < 1e-35);
        let z = Complex::new(0.3f64, -0.2);
        let e = z.cexpm1();
        let r = z.exp() - 1.0;
        assert!((e - r).norm() < 1e-15);
    }
}
