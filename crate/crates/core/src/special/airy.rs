//! Airy function `Ai` on the real line and its negative zeros.

use crate::error::{Error, Result};
use crate::precision::Dd;

/// Switch between the power series and the asymptotic expansion.
pub const SERIES_LIMIT: f64 = 8.0;

const C1: &str = "0.355028053887817239260063186004183176397979174199177";
const C2: &str = "0.258819403792806798405183560189203963479091138354934";

/// `(Ai(x), Ai'(x))` for `|x| <= SERIES_LIMIT` from the Maclaurin series,
/// summed in double-double to absorb the cancellation for negative `x`.
pub fn airy_series(x: f64) -> (f64, f64) {
    let c1: Dd = C1.parse().expect("constant");
    let c2: Dd = C2.parse().expect("constant");
    let xd = Dd::from_f64(x);
    let x3 = xd * xd * xd;
    let tiny = 1e-40;

    // f = sum x^{3k} / (3^k k! * 2*5*...*(3k-1)) and friends
    let mut f = Dd::ONE;
    let mut t = Dd::ONE;
    let mut k = 1.0;
    loop {
        t = t * x3 / ((3.0 * k - 1.0) * (3.0 * k));
        f += t;
        if t.abs().to_f64() < tiny && k > 3.0 {
            break;
        }
        k += 1.0;
    }
    let mut g = xd;
    let mut t = xd;
    let mut k = 1.0;
    loop {
        t = t * x3 / ((3.0 * k) * (3.0 * k + 1.0));
        g += t;
        if t.abs().to_f64() < tiny && k > 3.0 {
            break;
        }
        k += 1.0;
    }
    let mut fp = Dd::ZERO;
    let mut u = xd * xd * 0.5;
    fp += u;
    let mut k = 2.0;
    loop {
        u = u * x3 / ((3.0 * k - 1.0) * (3.0 * k - 3.0));
        fp += u;
        if u.abs().to_f64() < tiny && k > 3.0 {
            break;
        }
        k += 1.0;
    }
    let mut gp = Dd::ONE;
    let mut v = Dd::ONE;
    let mut k = 1.0;
    loop {
        v = v * x3 / ((3.0 * k) * (3.0 * k - 2.0));
        gp += v;
        if v.abs().to_f64() < tiny && k > 3.0 {
            break;
        }
        k += 1.0;
    }
    let ai = c1 * f - c2 * g;
    let aip = c1 * fp - c2 * gp;
    (ai.to_f64(), aip.to_f64())
}

/// Coefficients `u_k` and `v_k` of the large-argument expansions.
fn asymptotic_coeffs(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut c = vec![1.0];
    let mut d = vec![1.0];
    for k in 1..n {
        let kf = k as f64;
        let ck = c[k - 1] * (6.0 * kf - 5.0) * (6.0 * kf - 3.0) * (6.0 * kf - 1.0)
            / ((2.0 * kf - 1.0) * 216.0 * kf);
        c.push(ck);
        d.push(-(6.0 * kf + 1.0) / (6.0 * kf - 1.0) * ck);
    }
    (c, d)
}

/// `(Ai(x), Ai'(x))` for `x < -SERIES_LIMIT` from the oscillatory
/// asymptotic expansion, truncated before the smallest term.
fn airy_asymptotic_negative(x: f64) -> (f64, f64) {
    let z = -x;
    let zeta = 2.0 / 3.0 * z.powf(1.5);
    let (c, d) = asymptotic_coeffs(60);
    let mut p = 0.0;
    let mut q = 0.0;
    let mut r = 0.0;
    let mut s = 0.0;
    let mut last = f64::INFINITY;
    let mut zpow = 1.0;
    for k in 0..c.len() {
        let term = c[k].abs() * zpow;
        if term > last {
            break;
        }
        last = term;
        let sign = if (k / 2) % 2 == 0 { 1.0 } else { -1.0 };
        if k % 2 == 0 {
            p += sign * c[k] * zpow;
            r += sign * d[k] * zpow;
        } else {
            q += sign * c[k] * zpow;
            s += sign * d[k] * zpow;
        }
        zpow /= zeta;
    }
    let ph = zeta + std::f64::consts::FRAC_PI_4;
    let (sn, cs) = ph.sin_cos();
    let rp = 1.0 / std::f64::consts::PI.sqrt();
    let ai = rp * z.powf(-0.25) * (sn * p - cs * q);
    let aip = -rp * z.powf(0.25) * (cs * r + sn * s);
    (ai, aip)
}

/// `(Ai(x), Ai'(x))` for real `x` with `x <= SERIES_LIMIT`.
pub fn airy(x: f64) -> (f64, f64) {
    if x < -SERIES_LIMIT {
        airy_asymptotic_negative(x)
    } else {
        airy_series(x)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum AiryMode {
    /// Roots refined on an accurate evaluation of `Ai`.
    Exact,
    /// Large-index closed forms.
    Asymptotic,
}

#[derive(Clone, Debug)]
pub struct AiryZeros {
    pub roots: Vec<f64>,
    pub derivs: Vec<f64>,
}

/// Large-index approximation of the `j`-th zero (1-based) of `Ai`.
pub fn zero_estimate(j: usize) -> f64 {
    let t = 1.5 * std::f64::consts::PI * (j as f64 - 0.25);
    -t.powf(2.0 / 3.0)
}

/// Large-index approximation of `Ai'` at the `j`-th zero.
pub fn deriv_estimate(j: usize) -> f64 {
    let t = 1.5 * std::f64::consts::PI;
    let sign = if j % 2 == 1 { 1.0 } else { -1.0 };
    sign / std::f64::consts::PI.sqrt() * t.powf(1.0 / 6.0) * (j as f64 - 0.25).powf(1.0 / 6.0)
}

fn refine_zero(j: usize) -> Result<(f64, f64)> {
    let est = zero_estimate(j);
    let half = 0.45 * std::f64::consts::PI / (-est).sqrt().max(1.0);
    let (mut lo, mut hi) = (est - half, est + half);
    let (mut flo, _) = airy(lo);
    let (fhi, _) = airy(hi);
    if flo.signum() == fhi.signum() {
        return Err(Error::NoConvergence(format!(
            "no sign change bracketing Airy zero {j} in [{lo}, {hi}]"
        )));
    }
    let mut x = est;
    for _ in 0..200 {
        let (f, fp) = airy(x);
        if f == 0.0 {
            return Ok((x, fp));
        }
        if f.signum() == flo.signum() {
            lo = x;
            flo = f;
        } else {
            hi = x;
        }
        let newton = x - f / fp;
        let next = if newton > lo.min(hi) && newton < lo.max(hi) {
            newton
        } else {
            0.5 * (lo + hi)
        };
        if (next - x).abs() <= 4.0 * f64::EPSILON * x.abs() {
            let (_, fp) = airy(next);
            return Ok((next, fp));
        }
        x = next;
    }
    Err(Error::NoConvergence(format!("Airy zero {j} refinement")))
}

pub fn airy_zeros(count: usize, mode: AiryMode) -> Result<AiryZeros> {
    if count == 0 {
        return Err(Error::InvalidArgument("count must be positive".into()));
    }
    let mut roots = Vec::with_capacity(count);
    let mut derivs = Vec::with_capacity(count);
    for j in 1..=count {
        let (a, d) = match mode {
            AiryMode::Exact => refine_zero(j)?,
            AiryMode::Asymptotic => (zero_estimate(j), deriv_estimate(j)),
        };
        roots.push(a);
        derivs.push(d);
    }
    Ok(AiryZeros { roots, derivs })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn reference_values() {
        let (ai, aip) = airy(0.0);
        assert!((ai - 0.355_028_053_887_817_2).abs() < 1e-16);
        assert!((aip + 0.258_819_403_792_806_8).abs() < 1e-16);
        let (ai, _) = airy(1.0);
        assert!((ai - 0.135_292_416_312_881_4).abs() < 1e-15);
        let (ai, _) = airy(-5.0);
        assert!((ai - 0.350_761_009_024_114_1).abs() < 1e-14);
    }

    #[test]
    fn series_and_asymptotic_agree_in_overlap() {
        for &x in &[-8.0, -9.0, -10.0] {
            let (a, ap) = airy_series(x);
            let (b, bp) = airy_asymptotic_negative(x);
            assert!((a - b).abs() < 1e-11, "x = {x}: {a} vs {b}");
            assert!((ap - bp).abs() < 1e-10, "x = {x}: {ap} vs {bp}");
        }
    }

    #[test]
    fn first_zero() {
        let z = airy_zeros(3, AiryMode::Exact).unwrap();
        assert!((z.roots[0] + 2.338_107_410_459_767).abs() < 1e-13);
        assert!((z.derivs[0] - 0.701_210_822_720_691_4).abs() < 1e-13);
        assert!((z.roots[1] + 4.087_949_444_130_970_6).abs() < 1e-13);
        let e = airy_zeros(1, AiryMode::Asymptotic).unwrap();
        assert!((e.roots[0] + 2.3203).abs() < 1e-4);
    }

    #[test]
    fn zeros_decrease_and_derivatives_alternate() {
        let z = airy_zeros(40, AiryMode::Exact).unwrap();
        for j in 1..40 {
            assert!(z.roots[j] < z.roots[j - 1]);
            assert!(z.derivs[j] * z.derivs[j - 1] < 0.0);
        }
        assert!(z.derivs[0] > 0.0);
    }

    #[test]
    fn modes_agree_for_large_index() {
        let e = airy_zeros(10, AiryMode::Exact).unwrap();
        let a = airy_zeros(10, AiryMode::Asymptotic).unwrap();
        let rel = ((e.roots[9] - a.roots[9]) / e.roots[9]).abs();
        assert!(rel < 1e-4, "{rel}");
        let relp = ((e.derivs[9] - a.derivs[9]) / e.derivs[9]).abs();
        assert!(relp < 1e-3, "{relp}");
    }
}
