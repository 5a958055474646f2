//! Limiting curve of the scaled zeros `b / (l + 1/2)` as `l -> infinity`.
//!
//! A point on the curve is `-i w` where `w` solves
//! `ln((1 + sqrt(1 - w^2)) / w) - sqrt(1 - w^2) = (2/3) i t^{3/2}`
//! for a real parameter `t` in `(0, T_END]`. The `j`-th lower zero is
//! approximated by the parameter `t = |a_j| nu^{-2/3}` with `a_j` the
//! `j`-th zero of `Ai`.

use num_complex::Complex64;

/// Parameter value where the curve meets the negative real axis.
pub const T_END: f64 = 1.770_682_754_000_227;

/// Real point where the curve meets the negative real axis (negated).
pub const REAL_CROSSING: f64 = 0.662_743_419_349_181_6;

fn residual(w: Complex64, t: f64) -> (Complex64, Complex64) {
    let one = Complex64::new(1.0, 0.0);
    let s = (one - w * w).sqrt();
    let f = ((one + s) / w).ln() - s - Complex64::new(0.0, 2.0 / 3.0 * t.powf(1.5));
    let df = -s / w;
    (f, df)
}

/// The scaled curve point for parameter `t`, marching from `t = 0`.
pub fn curve_point(t: f64) -> Complex64 {
    let t = t.clamp(1e-6, T_END);
    let t0 = (1e-3f64).min(t);
    let zeta = Complex64::from_polar(t0, std::f64::consts::FRAC_PI_3);
    let mut w = Complex64::new(1.0, 0.0) - zeta * 2f64.powf(-1.0 / 3.0);
    let steps = ((t - t0) / 0.01).ceil().max(1.0) as usize;
    for i in 0..=steps {
        let ti = t0 + (t - t0) * i as f64 / steps as f64;
        for _ in 0..50 {
            let (f, df) = residual(w, ti);
            let dw = f / df;
            w -= dw;
            if dw.norm() < 1e-15 * w.norm() {
                break;
            }
        }
    }
    Complex64::new(0.0, -1.0) * w
}

/// `n` points along the whole curve, from the bottom to the real axis.
pub fn curve_samples(n: usize) -> Vec<Complex64> {
    // march once, recording as we go
    let mut out = Vec::with_capacity(n);
    let t0 = 1e-4;
    let zeta = Complex64::from_polar(t0, std::f64::consts::FRAC_PI_3);
    let mut w = Complex64::new(1.0, 0.0) - zeta * 2f64.powf(-1.0 / 3.0);
    let sub = 8;
    let total = n.max(2) * sub;
    for i in 0..=total {
        let ti = t0 + (T_END - t0) * i as f64 / total as f64;
        for _ in 0..50 {
            let (f, df) = residual(w, ti);
            let dw = f / df;
            w -= dw;
            if dw.norm() < 1e-15 * w.norm() {
                break;
            }
        }
        if i % sub == 0 {
            out.push(Complex64::new(0.0, -1.0) * w);
        }
    }
    out
}

/// Distance from `z` to the sampled curve or its mirror image.
pub fn distance_to_curve(z: Complex64, samples: &[Complex64]) -> f64 {
    let zl = if z.im > 0.0 { z.conj() } else { z };
    samples
        .windows(2)
        .map(|w| segment_distance(zl, w[0], w[1]))
        .fold(f64::INFINITY, f64::min)
}

fn segment_distance(p: Complex64, a: Complex64, b: Complex64) -> f64 {
    let ab = b - a;
    let l2 = ab.norm_sqr();
    if l2 == 0.0 {
        return (p - a).norm();
    }
    let t = ((p - a).re * ab.re + (p - a).im * ab.im) / l2;
    let t = t.clamp(0.0, 1.0);
    (p - (a + ab * t)).norm()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn curve_starts_at_minus_i_and_ends_on_real_axis() {
        let start = curve_point(1e-6);
        assert!((start - Complex64::new(0.0, -1.0)).norm() < 1e-3);
        let end = curve_point(T_END);
        assert!(end.im.abs() < 1e-6, "{end}");
        assert!((end.re + REAL_CROSSING).abs() < 1e-6, "{end}");
    }

    #[test]
    fn curve_stays_in_third_quadrant() {
        for p in curve_samples(50).iter().skip(1) {
            assert!(p.re < 0.0 && p.im <= 1e-9, "{p}");
        }
    }
}
