//! Arbitrary-precision complex arithmetic for the ill-conditioned parts of
//! the offline stage (zeros and residues of high-degree polynomials).

use dashu_float::round::mode::HalfEven;
use dashu_float::FBig;
use dashu_int::IBig;
use num_complex::Complex;

use super::dd::Dd;

pub type Mf = FBig<HalfEven, 2>;

/// Binary precision (bits) sufficient to resolve the zeros and residues of
/// a degree-`ell` Bessel polynomial to double-double accuracy.
pub fn bits_for_degree(ell: usize) -> usize {
    (2 * ell + 160).max(200)
}

pub fn mf_from_f64(x: f64, prec: usize) -> Mf {
    Mf::try_from(x)
        .expect("finite value")
        .with_precision(prec)
        .value()
}

pub fn mf_from_int(n: &IBig, prec: usize) -> Mf {
    Mf::from(n.clone()).with_precision(prec).value()
}

pub fn mf_from_dd(x: Dd, prec: usize) -> Mf {
    x.to_fbig().with_precision(prec).value()
}

#[derive(Clone, Debug)]
pub struct Mc {
    pub re: Mf,
    pub im: Mf,
}

impl Mc {
    pub fn zero(prec: usize) -> Self {
        Mc {
            re: mf_from_f64(0.0, prec),
            im: mf_from_f64(0.0, prec),
        }
    }

    pub fn from_c64(z: Complex<f64>, prec: usize) -> Self {
        Mc {
            re: mf_from_f64(z.re, prec),
            im: mf_from_f64(z.im, prec),
        }
    }

    pub fn from_cdd(z: Complex<Dd>, prec: usize) -> Self {
        Mc {
            re: mf_from_dd(z.re, prec),
            im: mf_from_dd(z.im, prec),
        }
    }

    pub fn from_real(x: Mf) -> Self {
        let p = x.precision();
        Mc {
            re: x,
            im: mf_from_f64(0.0, p),
        }
    }

    pub fn to_c64(&self) -> Complex<f64> {
        Complex::new(self.re.to_f64().value(), self.im.to_f64().value())
    }

    pub fn to_cdd(&self) -> Complex<Dd> {
        Complex::new(Dd::from_fbig(&self.re), Dd::from_fbig(&self.im))
    }

    pub fn conj(&self) -> Self {
        Mc {
            re: self.re.clone(),
            im: -self.im.clone(),
        }
    }

    pub fn add(&self, o: &Mc) -> Mc {
        Mc {
            re: &self.re + &o.re,
            im: &self.im + &o.im,
        }
    }

    pub fn sub(&self, o: &Mc) -> Mc {
        Mc {
            re: &self.re - &o.re,
            im: &self.im - &o.im,
        }
    }

    pub fn mul(&self, o: &Mc) -> Mc {
        Mc {
            re: &self.re * &o.re - &self.im * &o.im,
            im: &self.re * &o.im + &self.im * &o.re,
        }
    }

    pub fn mul_real(&self, x: &Mf) -> Mc {
        Mc {
            re: &self.re * x,
            im: &self.im * x,
        }
    }

    pub fn norm_sqr(&self) -> Mf {
        &self.re * &self.re + &self.im * &self.im
    }

    pub fn div(&self, o: &Mc) -> Mc {
        let d = o.norm_sqr();
        Mc {
            re: (&self.re * &o.re + &self.im * &o.im) / &d,
            im: (&self.im * &o.re - &self.re * &o.im) / &d,
        }
    }

    pub fn recip(&self) -> Mc {
        let d = self.norm_sqr();
        Mc {
            re: &self.re / &d,
            im: -(&self.im / &d),
        }
    }

    /// Modulus as a double; adequate for convergence tests.
    pub fn abs_f64(&self) -> f64 {
        let z = self.to_c64();
        if z.re.is_finite() && z.im.is_finite() && (z.re != 0.0 || z.im != 0.0) {
            return z.norm();
        }
        // exponent-aware fallback for values outside the double range
        let n = self.norm_sqr();
        if n == Mf::ZERO {
            return 0.0;
        }
        n.ln().to_f64().value().mul_add(0.5, 0.0).exp()
    }

    /// Natural log of the modulus as a double.
    pub fn ln_abs_f64(&self) -> f64 {
        let n = self.norm_sqr();
        if n == Mf::ZERO {
            return f64::NEG_INFINITY;
        }
        0.5 * n.ln().to_f64().value()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn complex_division_inverts_multiplication() {
        let p = 300;
        let a = Mc::from_c64(Complex::new(1.5, -2.25), p);
        let b = Mc::from_c64(Complex::new(-0.75, 3.0), p);
        let q = a.mul(&b).div(&b);
        let e = q.sub(&a).to_c64().norm();
        assert!(e < 1e-80, "{e}");
    }

    #[test]
    fn conversion_to_dd_is_faithful() {
        let p = 300;
        let three = mf_from_f64(3.0, p);
        let one = mf_from_f64(1.0, p);
        let third = Dd::from_fbig(&(one / three));
        let back = third * 3.0 - 1.0;
        assert!(back.abs().to_f64() < 1e-31);
    }

    #[test]
    fn huge_modulus_log() {
        let p = 400;
        let big = mf_from_int(&(IBig::from(10u8).pow(400)), p);
        let z = Mc::from_real(big);
        assert!((z.ln_abs_f64() - 400.0 * std::f64::consts::LN_10).abs() < 1e-9);
    }
}
