//! Double-double arithmetic.
//!
//! A [`Dd`] stores an unevaluated sum `hi + lo` of two `f64` values with
//! `|lo| <= ulp(hi) / 2`, giving roughly 32 significant decimal digits.
//! The basic operations are built on the error-free transformations
//! TwoSum and FMA-based TwoProd.

use std::cmp::Ordering;
use std::fmt;
use std::iter::Sum;
use std::ops::{Add, AddAssign, Div, DivAssign, Mul, MulAssign, Neg, Rem, Sub, SubAssign};
use std::str::FromStr;

use dashu_float::round::mode::HalfEven;
use dashu_float::{DBig, FBig};

#[derive(Clone, Copy, Debug, Default)]
pub struct Dd {
    pub hi: f64,
    pub lo: f64,
}

#[inline]
fn two_sum(a: f64, b: f64) -> (f64, f64) {
    let s = a + b;
    let v = s - a;
    let e = (a - (s - v)) + (b - v);
    (s, e)
}

#[inline]
fn quick_two_sum(a: f64, b: f64) -> (f64, f64) {
    let s = a + b;
    let e = b - (s - a);
    (s, e)
}

#[inline]
fn two_prod(a: f64, b: f64) -> (f64, f64) {
    let p = a * b;
    let e = a.mul_add(b, -p);
    (p, e)
}

impl Dd {
    pub const ZERO: Dd = Dd { hi: 0.0, lo: 0.0 };
    pub const ONE: Dd = Dd { hi: 1.0, lo: 0.0 };
    pub const PI: Dd = Dd {
        hi: std::f64::consts::PI,
        lo: 1.224_646_799_147_353_2e-16,
    };
    pub const FRAC_PI_2: Dd = Dd {
        hi: std::f64::consts::FRAC_PI_2,
        lo: 6.123_233_995_736_766e-17,
    };
    pub const LN_2: Dd = Dd {
        hi: std::f64::consts::LN_2,
        lo: 2.319_046_813_846_299_6e-17,
    };
    /// 2^-104, the unit roundoff of the format.
    pub const EPSILON: f64 = 4.930_380_657_631_324e-32;

    #[inline]
    pub const fn new(hi: f64, lo: f64) -> Self {
        Dd { hi, lo }
    }

    #[inline]
    pub fn from_sum(a: f64, b: f64) -> Self {
        let (hi, lo) = two_sum(a, b);
        Dd { hi, lo }
    }

    #[inline]
    pub fn from_f64(x: f64) -> Self {
        Dd { hi: x, lo: 0.0 }
    }

    #[inline]
    pub fn to_f64(self) -> f64 {
        self.hi + self.lo
    }

    #[inline]
    pub fn is_finite(self) -> bool {
        self.hi.is_finite() && self.lo.is_finite()
    }

    #[inline]
    pub fn is_sign_negative(self) -> bool {
        self.hi < 0.0 || (self.hi == 0.0 && self.lo < 0.0)
    }

    #[inline]
    pub fn abs(self) -> Self {
        if self.is_sign_negative() {
            -self
        } else {
            self
        }
    }

    /// Multiplication by an exact power of two.
    #[inline]
    pub fn ldexp(self, k: i32) -> Self {
        let s = 2f64.powi(k);
        Dd {
            hi: self.hi * s,
            lo: self.lo * s,
        }
    }

    #[inline]
    pub fn sqr(self) -> Self {
        let (p, e) = two_prod(self.hi, self.hi);
        let e = e + 2.0 * self.hi * self.lo + self.lo * self.lo;
        let (hi, lo) = quick_two_sum(p, e);
        Dd { hi, lo }
    }

    pub fn sqrt(self) -> Self {
        if self.hi <= 0.0 {
            return if self.hi == 0.0 {
                Dd::ZERO
            } else {
                Dd::new(f64::NAN, f64::NAN)
            };
        }
        let y = self.hi.sqrt();
        let y2 = Dd::from_f64(y).sqr();
        let corr = (self - y2).hi / (2.0 * y);
        Dd::from_sum(y, corr)
    }

    pub fn powi(self, n: i32) -> Self {
        if n == 0 {
            return Dd::ONE;
        }
        let mut base = self;
        let mut k = n.unsigned_abs();
        let mut acc = Dd::ONE;
        while k > 0 {
            if k & 1 == 1 {
                acc = acc * base;
            }
            base = base.sqr();
            k >>= 1;
        }
        if n < 0 {
            Dd::ONE / acc
        } else {
            acc
        }
    }

    pub fn round(self) -> Self {
        let hi = self.hi.round();
        if hi == self.hi {
            let lo = self.lo.round();
            let (hi, lo) = quick_two_sum(hi, lo);
            Dd { hi, lo }
        } else if (hi - self.hi).abs() == 0.5 && self.lo != 0.0 {
            // tie in the leading part broken by the tail
            let hi = if self.lo > 0.0 {
                self.hi.ceil()
            } else {
                self.hi.floor()
            };
            Dd::from_f64(hi)
        } else {
            Dd::from_f64(hi)
        }
    }

    pub fn exp(self) -> Self {
        if self.hi > 709.78 {
            return Dd::from_f64(f64::INFINITY);
        }
        if self.hi < -745.2 {
            return Dd::ZERO;
        }
        if self.hi == 0.0 && self.lo == 0.0 {
            return Dd::ONE;
        }
        let k = (self.hi / std::f64::consts::LN_2).round();
        let r = (self - Dd::LN_2 * k).ldexp(-10);
        // expm1 on the reduced argument, then undo the halvings with
        // (e^r - 1)(e^r + 1) = e^{2r} - 1.
        let mut term = r;
        let mut s = r;
        let mut n = 2.0;
        loop {
            term = term * r / n;
            s += term;
            if term.hi.abs() <= 1e-36 * s.hi.abs().max(1e-300) {
                break;
            }
            n += 1.0;
        }
        for _ in 0..10 {
            s = s * (s + 2.0);
        }
        (s + 1.0).ldexp(k as i32)
    }

    pub fn ln(self) -> Self {
        if self.hi <= 0.0 {
            return if self.hi == 0.0 {
                Dd::from_f64(f64::NEG_INFINITY)
            } else {
                Dd::new(f64::NAN, f64::NAN)
            };
        }
        if !self.hi.is_finite() {
            return self;
        }
        let mut y = Dd::from_f64(self.hi.ln());
        for _ in 0..2 {
            y = y + self * (-y).exp() - 1.0;
        }
        y
    }

    /// Simultaneous sine and cosine.
    pub fn sin_cos(self) -> (Self, Self) {
        if self.hi == 0.0 && self.lo == 0.0 {
            return (Dd::ZERO, Dd::ONE);
        }
        let k = (self.hi / std::f64::consts::FRAC_PI_2).round();
        let r = self - Dd::FRAC_PI_2 * k;
        let r2 = r.sqr();
        // Taylor series on |r| <= pi/4
        let mut sin = r;
        let mut term = r;
        let mut n = 1.0;
        loop {
            term = -(term * r2) / ((n + 1.0) * (n + 2.0));
            sin += term;
            n += 2.0;
            if term.hi.abs() <= 1e-36 {
                break;
            }
        }
        let mut cos = Dd::ONE;
        let mut term = Dd::ONE;
        let mut n = 0.0;
        loop {
            term = -(term * r2) / ((n + 1.0) * (n + 2.0));
            cos += term;
            n += 2.0;
            if term.hi.abs() <= 1e-36 {
                break;
            }
        }
        match (k as i64).rem_euclid(4) {
            0 => (sin, cos),
            1 => (cos, -sin),
            2 => (-sin, -cos),
            _ => (-cos, sin),
        }
    }

    pub fn atan2(self, x: Dd) -> Self {
        let t0 = self.hi.atan2(x.hi);
        if !t0.is_finite() || (self.hi == 0.0 && x.hi == 0.0) {
            return Dd::from_f64(t0);
        }
        let (s, c) = Dd::from_f64(t0).sin_cos();
        let num = self * c - x * s;
        let den = x * c + self * s;
        let t = num / den;
        // atan(t) = t - t^3/3 for the tiny correction
        Dd::from_f64(t0) + t - t * t.sqr() / 3.0
    }

    pub fn hypot(self, other: Dd) -> Self {
        let a = self.abs();
        let b = other.abs();
        let (big, small) = if a > b { (a, b) } else { (b, a) };
        if big.hi == 0.0 {
            return Dd::ZERO;
        }
        let q = small / big;
        big * (q.sqr() + 1.0).sqrt()
    }

    /// Correctly rounded conversion from an arbitrary precision binary float.
    pub fn from_fbig(x: &FBig<HalfEven, 2>) -> Self {
        let hi = x.to_f64().value();
        if !hi.is_finite() {
            return Dd::from_f64(hi);
        }
        let rest = x - FBig::<HalfEven, 2>::try_from(hi).expect("finite f64");
        let lo = rest.to_f64().value();
        let (hi, lo) = quick_two_sum(hi, lo);
        Dd { hi, lo }
    }

    /// Exact conversion to an arbitrary precision binary float.
    pub fn to_fbig(self) -> FBig<HalfEven, 2> {
        let hi = FBig::<HalfEven, 2>::try_from(self.hi).expect("finite double-double");
        let lo = FBig::<HalfEven, 2>::try_from(self.lo).expect("finite double-double");
        // widen so that the sum is exact
        let hi = hi.with_precision(2200).value();
        hi + lo
    }

    /// Decimal representation with `digits` significant digits.
    pub fn to_decimal_string(self, digits: usize) -> String {
        if !self.is_finite() {
            return format!("{}", self.hi);
        }
        if self.hi == 0.0 {
            return format!("{:.*e}", digits.saturating_sub(1), 0.0);
        }
        let exact = self.to_fbig();
        let dec: FBig<HalfEven, 10> = exact.with_base_and_precision::<10>(digits).value();
        let (sig, exp) = dec.into_repr().into_parts();
        format_sci(sig, exp, digits)
    }
}

fn format_sci(sig: dashu_int::IBig, exp: isize, digits: usize) -> String {
    let neg = sig < dashu_int::IBig::ZERO;
    let mut s = sig.to_string().trim_start_matches('-').to_string();
    let mut e10 = exp as i64;
    // strip or pad to the requested digit count
    while s.len() > digits && s.ends_with('0') {
        s.pop();
        e10 += 1;
    }
    while s.len() < digits {
        s.push('0');
        e10 -= 1;
    }
    let lead_exp = e10 + s.len() as i64 - 1;
    let (head, tail) = s.split_at(1);
    format!(
        "{}{}.{}e{}",
        if neg { "-" } else { "" },
        head,
        tail,
        lead_exp
    )
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ParseDdError(pub String);

impl fmt::Display for ParseDdError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "invalid double-double literal `{}`", self.0)
    }
}

impl std::error::Error for ParseDdError {}

impl FromStr for Dd {
    type Err = ParseDdError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let t = s.trim();
        match t {
            "inf" | "+inf" | "infinity" => return Ok(Dd::from_f64(f64::INFINITY)),
            "-inf" | "-infinity" => return Ok(Dd::from_f64(f64::NEG_INFINITY)),
            _ => {}
        }
        let cleaned: String = t.chars().filter(|c| *c != '_').collect();
        let dec = DBig::from_str(&cleaned).map_err(|_| ParseDdError(s.to_string()))?;
        let bin: FBig<HalfEven, 2> = dec
            .with_rounding::<HalfEven>()
            .with_base_and_precision::<2>(240)
            .value();
        Ok(Dd::from_fbig(&bin))
    }
}

impl fmt::Display for Dd {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let digits = f.precision().map(|p| p + 1).unwrap_or(32);
        f.write_str(&self.to_decimal_string(digits))
    }
}

impl PartialEq for Dd {
    fn eq(&self, other: &Self) -> bool {
        self.hi == other.hi && self.lo == other.lo
    }
}

impl PartialOrd for Dd {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        match self.hi.partial_cmp(&other.hi) {
            Some(Ordering::Equal) => self.lo.partial_cmp(&other.lo),
            o => o,
        }
    }
}

impl From<f64> for Dd {
    fn from(x: f64) -> Self {
        Dd::from_f64(x)
    }
}

impl Neg for Dd {
    type Output = Dd;
    #[inline]
    fn neg(self) -> Dd {
        Dd {
            hi: -self.hi,
            lo: -self.lo,
        }
    }
}

impl Add for Dd {
    type Output = Dd;
    #[inline]
    fn add(self, b: Dd) -> Dd {
        let (s1, s2) = two_sum(self.hi, b.hi);
        let (t1, t2) = two_sum(self.lo, b.lo);
        let s2 = s2 + t1;
        let (s1, s2) = quick_two_sum(s1, s2);
        let s2 = s2 + t2;
        let (hi, lo) = quick_two_sum(s1, s2);
        Dd { hi, lo }
    }
}

impl Add<f64> for Dd {
    type Output = Dd;
    #[inline]
    fn add(self, b: f64) -> Dd {
        let (s1, s2) = two_sum(self.hi, b);
        let s2 = s2 + self.lo;
        let (hi, lo) = quick_two_sum(s1, s2);
        Dd { hi, lo }
    }
}

impl Sub for Dd {
    type Output = Dd;
    #[inline]
    fn sub(self, b: Dd) -> Dd {
        self + (-b)
    }
}

impl Sub<f64> for Dd {
    type Output = Dd;
    #[inline]
    fn sub(self, b: f64) -> Dd {
        self + (-b)
    }
}

impl Mul for Dd {
    type Output = Dd;
    #[inline]
    fn mul(self, b: Dd) -> Dd {
        let (p, e) = two_prod(self.hi, b.hi);
        let e = e + (self.hi * b.lo + self.lo * b.hi);
        let (hi, lo) = quick_two_sum(p, e);
        Dd { hi, lo }
    }
}

impl Mul<f64> for Dd {
    type Output = Dd;
    #[inline]
    fn mul(self, b: f64) -> Dd {
        let (p, e) = two_prod(self.hi, b);
        let e = e + self.lo * b;
        let (hi, lo) = quick_two_sum(p, e);
        Dd { hi, lo }
    }
}

impl Div for Dd {
    type Output = Dd;
    #[inline]
    fn div(self, b: Dd) -> Dd {
        let q1 = self.hi / b.hi;
        if !q1.is_finite() {
            return Dd::from_f64(q1);
        }
        let r = self - b * q1;
        let q2 = r.hi / b.hi;
        let r = r - b * q2;
        let q3 = r.hi / b.hi;
        let (q1, q2) = quick_two_sum(q1, q2);
        Dd { hi: q1, lo: q2 } + q3
    }
}

impl Div<f64> for Dd {
    type Output = Dd;
    #[inline]
    fn div(self, b: f64) -> Dd {
        let q1 = self.hi / b;
        if !q1.is_finite() {
            return Dd::from_f64(q1);
        }
        let (p, e) = two_prod(q1, b);
        let (s, t) = two_sum(self.hi, -p);
        let t = t - e + self.lo;
        let q2 = (s + t) / b;
        let (hi, lo) = quick_two_sum(q1, q2);
        Dd { hi, lo }
    }
}

impl Rem for Dd {
    type Output = Dd;
    fn rem(self, b: Dd) -> Dd {
        let q = self / b;
        let q = Dd::from_f64(q.hi.trunc()) + q.lo.trunc();
        self - b * q
    }
}

impl std::ops::RemAssign for Dd {
    fn rem_assign(&mut self, b: Dd) {
        *self = *self % b;
    }
}

macro_rules! assign_ops {
    ($($tr:ident $m:ident $op:tt),*) => {$(
        impl $tr for Dd {
            #[inline]
            fn $m(&mut self, b: Dd) { *self = *self $op b; }
        }
        impl $tr<f64> for Dd {
            #[inline]
            fn $m(&mut self, b: f64) { *self = *self $op b; }
        }
    )*};
}
assign_ops!(AddAssign add_assign +, SubAssign sub_assign -, MulAssign mul_assign *, DivAssign div_assign /);

impl Sum for Dd {
    fn sum<I: Iterator<Item = Dd>>(iter: I) -> Dd {
        iter.fold(Dd::ZERO, |a, b| a + b)
    }
}

impl num_traits::Zero for Dd {
    fn zero() -> Self {
        Dd::ZERO
    }
    fn is_zero(&self) -> bool {
        self.hi == 0.0 && self.lo == 0.0
    }
}

impl num_traits::One for Dd {
    fn one() -> Self {
        Dd::ONE
    }
}

impl num_traits::Num for Dd {
    type FromStrRadixErr = ParseDdError;
    fn from_str_radix(s: &str, radix: u32) -> Result<Self, Self::FromStrRadixErr> {
        if radix != 10 {
            return Err(ParseDdError(s.to_string()));
        }
        s.parse()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn close(a: Dd, b: Dd, tol: f64) -> bool {
        ((a - b).abs().to_f64()) <= tol * b.abs().to_f64().max(1e-300)
    }

    #[test]
    fn division_recovers_thirds() {
        let third = Dd::ONE / 3.0;
        let back = third * 3.0;
        assert!(close(back, Dd::ONE, 1e-31));
        let third2 = Dd::ONE / Dd::from_f64(3.0);
        assert!(close(third, third2, 1e-31));
    }

    #[test]
    fn sqrt_two_squared() {
        let r = Dd::from_f64(2.0).sqrt();
        assert!(close(r.sqr(), Dd::from_f64(2.0), 1e-31));
    }

    #[test]
    fn exp_ln_round_trip() {
        for &x in &[1e-20, 0.3, 1.0, 2.5, 17.25, -40.0, 300.0] {
            let v = Dd::from_f64(x);
            assert!(close(v.exp().ln(), v, 1e-30), "x = {x}");
        }
        let e: Dd = "2.718281828459045235360287471352662497757".parse().unwrap();
        assert!(close(Dd::ONE.exp(), e, 1e-31));
    }

    #[test]
    fn trig_identities() {
        for &x in &[0.1, 1.0, 2.0, -3.0, 10.0, 123.456] {
            let (s, c) = Dd::from_f64(x).sin_cos();
            assert!(close(s.sqr() + c.sqr(), Dd::ONE, 1e-30), "x = {x}");
            assert!((s.to_f64() - x.sin()).abs() < 1e-15);
        }
        let (s, _) = (Dd::PI / 6.0).sin_cos();
        assert!(close(s, Dd::from_f64(0.5), 1e-30));
    }

    #[test]
    fn atan2_matches_reference_quadrants() {
        let y = Dd::ONE;
        let x = Dd::ONE;
        let q = y.atan2(x) * 4.0;
        assert!(close(q, Dd::PI, 1e-31));
        let a = Dd::from_f64(-1.0).atan2(Dd::from_f64(-1.0));
        assert!(close(a, -(Dd::PI * 0.75), 1e-31));
    }

    #[test]
    fn decimal_round_trip() {
        let x = Dd::ONE / 7.0;
        let s = x.to_decimal_string(36);
        let y: Dd = s.parse().unwrap();
        assert_eq!(x, y, "{s}");
        let z: Dd = "-1.8389073226869572035442646446479840075e+00"
            .parse()
            .unwrap();
        assert_eq!(z, z.to_decimal_string(36).parse::<Dd>().unwrap());
    }
}
