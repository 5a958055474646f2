//! The auxiliary kernel `Omega_l(z) = z W_l'(z) / W_l(z)` from its finite
//! continued fraction
//!
//! `Omega_l(z) = -a_1 / (2(z+1) + a_2 / (2(z+2) + ... + a_l / (2(z+l))))`,
//! `a_k = (l - k + 1)(l + k)`.

use num_complex::Complex;

use crate::error::{Error, Result};
use crate::precision::{ComplexExt, Real};

#[inline]
fn partial_num(ell: usize, k: usize) -> f64 {
    ((ell - k + 1) * (ell + k)) as f64
}

/// Steed's forward algorithm; falls back to modified Lentz if a
/// denominator nearly vanishes. Stops early once the last two increments
/// are below working precision.
pub fn omega_cf<T: Real>(ell: usize, z: Complex<T>) -> Result<Complex<T>> {
    if ell == 0 {
        return Ok(Complex::new(T::zero(), T::zero()));
    }
    match steed(ell, z) {
        Some(v) => Ok(v),
        None => lentz(ell, z),
    }
}

fn b_k<T: Real>(z: Complex<T>, k: usize) -> Complex<T> {
    let two = T::from_f64(2.0);
    Complex::new(two * (z.re + T::from_usize(k)), two * z.im)
}

fn steed<T: Real>(ell: usize, z: Complex<T>) -> Option<Complex<T>> {
    let eps = T::eps();
    let tiny = 1e-290;
    let b1 = b_k(z, 1);
    if b1.to_c64().norm() < tiny {
        return None;
    }
    let one = Complex::new(T::one(), T::zero());
    let mut d = one / b1;
    let mut dh = d.scale(T::from_f64(-partial_num(ell, 1)));
    let mut h = dh;
    let mut small = 0;
    for k in 2..=ell {
        let ak = T::from_f64(partial_num(ell, k));
        let den = b_k(z, k) + d.scale(ak);
        if den.to_c64().norm() < tiny * b_k(z, k).to_c64().norm() {
            return None;
        }
        d = one / den;
        dh = dh * (b_k(z, k) * d - one);
        h += dh;
        if dh.to_c64().norm() <= eps * h.to_c64().norm() {
            small += 1;
            if small >= 2 {
                break;
            }
        } else {
            small = 0;
        }
    }
    Some(h)
}

fn lentz<T: Real>(ell: usize, z: Complex<T>) -> Result<Complex<T>> {
    let tiny = 1e-150;
    let fix = |x: Complex<T>| {
        if x.to_c64().norm() < tiny {
            Complex::new(T::from_f64(tiny), T::zero())
        } else {
            x
        }
    };
    let one = Complex::new(T::one(), T::zero());
    // g = b_1 + a_2/(b_2 + a_3/(...)), result -a_1 / g
    let mut f = fix(b_k(z, 1));
    let mut c = f;
    let mut d = Complex::new(T::zero(), T::zero());
    for k in 2..=ell {
        let ak = T::from_f64(partial_num(ell, k));
        let bk = b_k(z, k);
        d = one / fix(bk + d.scale(ak));
        c = fix(bk + Complex::new(ak, T::zero()) / c);
        f = f * c * d;
    }
    let v = Complex::new(T::from_f64(-partial_num(ell, 1)), T::zero()) / f;
    let v64 = v.to_c64();
    if !(v64.re.is_finite() && v64.im.is_finite()) {
        return Err(Error::NoConvergence(format!(
            "continued fraction for l = {ell} at z = {}",
            z.to_c64()
        )));
    }
    Ok(v)
}

/// Backward evaluation from the innermost level; an independent check.
pub fn omega_backward<T: Real>(ell: usize, z: Complex<T>) -> Complex<T> {
    if ell == 0 {
        return Complex::new(T::zero(), T::zero());
    }
    let mut t = b_k(z, ell);
    for k in (1..ell).rev() {
        t = b_k(z, k) + Complex::new(T::from_f64(partial_num(ell, k + 1)), T::zero()) / t;
    }
    Complex::new(T::from_f64(-partial_num(ell, 1)), T::zero()) / t
}
