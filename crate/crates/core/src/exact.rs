//! The exact teleportation kernel as a sum of `l` simple poles.
//!
//! In the Laplace domain the kernel is
//! `Phi(s; r1, r2) = sum_j a_j / (s - b_j / r1)` where `b_j` are the zeros
//! of `W_l` and `a_j = W_l(b_j r2 / r1) / (r1 W_l'(b_j))`. For `r2 = inf`
//! the numerator is `W_l(inf) = 1`.

use num_complex::{Complex, Complex64};

use crate::error::{Error, Result};
use crate::precision::mp::{self, Mc, Mf};
use crate::precision::{ComplexExt, Dd, Precision};
use crate::special::airy::{airy_zeros, AiryMode};
use crate::special::{macdonald_zeros_cached, BesselPoly};

#[derive(Clone, Debug)]
pub struct ExactKernel {
    pub ell: usize,
    pub r1: f64,
    /// `f64::INFINITY` for the far-field kernel.
    pub r2: f64,
    pub poles: Vec<Complex<Dd>>,
    pub residues: Vec<Complex<Dd>>,
    pub precision: Precision,
}

impl ExactKernel {
    pub fn poles_c64(&self) -> Vec<Complex64> {
        self.poles.iter().map(|p| p.to_c64()).collect()
    }

    pub fn residues_c64(&self) -> Vec<Complex64> {
        self.residues.iter().map(|p| p.to_c64()).collect()
    }

    pub fn residue_sum(&self) -> Complex<Dd> {
        self.residues
            .iter()
            .fold(Complex::new(Dd::ZERO, Dd::ZERO), |a, b| a + b)
    }

    pub fn max_residue(&self) -> f64 {
        self.residues
            .iter()
            .map(|a| a.to_c64().norm())
            .fold(0.0, f64::max)
    }

    pub fn min_residue(&self) -> f64 {
        self.residues
            .iter()
            .map(|a| a.to_c64().norm())
            .fold(f64::INFINITY, f64::min)
    }
}

pub(crate) fn check_radii(r1: f64, r2: f64) -> Result<()> {
    if !(r1 > 0.0 && r1.is_finite()) {
        return Err(Error::InvalidArgument(format!(
            "r1 = {r1} must be positive"
        )));
    }
    if !(r2 > r1) {
        return Err(Error::InvalidArgument(format!(
            "r2 = {r2} must exceed r1 = {r1}"
        )));
    }
    Ok(())
}

/// Time-domain kernel at `t = 0`, which equals the residue sum:
/// `(1/r1) * l(l+1)/2 * (r1/r2 - 1)`.
pub fn kernel_at_t0(ell: usize, r1: f64, r2: f64) -> f64 {
    let l = ell as f64;
    let ratio = if r2.is_infinite() { 0.0 } else { r1 / r2 };
    l * (l + 1.0) / 2.0 * (ratio - 1.0) / r1
}

/// Laplace-domain kernel at `s = 0`: `(r1/r2)^l - 1`.
pub fn kernel_at_s0(ell: usize, r1: f64, r2: f64) -> f64 {
    if r2.is_infinite() {
        if ell == 0 {
            0.0
        } else {
            -1.0
        }
    } else {
        (r1 / r2).powi(ell as i32) - 1.0
    }
}

pub fn exact_residues(ell: usize, r1: f64, r2: f64, precision: Precision) -> Result<ExactKernel> {
    check_radii(r1, r2)?;
    if ell == 0 {
        return Ok(ExactKernel {
            ell,
            r1,
            r2,
            poles: Vec::new(),
            residues: Vec::new(),
            precision,
        });
    }
    let zs = macdonald_zeros_cached(ell)?;
    let poly = BesselPoly::new(ell);
    let r1d = Dd::from_f64(r1);
    let poles: Vec<Complex<Dd>> = zs
        .zeros
        .iter()
        .map(|b| Complex::new(b.re / r1d, b.im / r1d))
        .collect();
    let residues = match precision {
        Precision::Extended => residues_mp(&poly, &zs.zeros, r1, r2),
        Precision::Double => residues_double(&poly, &zs.zeros, r1, r2)?,
    };
    Ok(ExactKernel {
        ell,
        r1,
        r2,
        poles,
        residues,
        precision,
    })
}

/// Residues with all polynomial work in arbitrary precision; only the
/// lower half-plane and real roots are evaluated, the rest reflected.
fn residues_mp(poly: &BesselPoly, zeros: &[Complex<Dd>], r1: f64, r2: f64) -> Vec<Complex<Dd>> {
    let ell = poly.ell();
    let prec = mp::bits_for_degree(ell) + 64;
    let coeffs = poly.mp_coeffs(prec);
    let r1m = mp::mf_from_f64(r1, prec);
    let rho: Option<Mf> = if r2.is_infinite() {
        None
    } else {
        Some(mp::mf_from_f64(r2, prec) / &r1m)
    };
    let half = ell.div_ceil(2);
    let mut lower = Vec::with_capacity(half);
    for b in &zeros[..half] {
        let bm = Mc::from_cdd(*b, prec);
        let (_, dtheta) = BesselPoly::theta_mp(&coeffs, &bm);
        // W'(b) = theta'(b) / b^l at a root
        let mut bl = Mc::from_real(mp::mf_from_f64(1.0, prec));
        for _ in 0..ell {
            bl = bl.mul(&bm);
        }
        let a = match &rho {
            None => bl.div(&dtheta.mul_real(&r1m)),
            Some(rho) => {
                let z = bm.mul_real(rho);
                let (theta, _) = BesselPoly::theta_mp(&coeffs, &z);
                // W(b rho) b^l / theta'(b) = theta(b rho) / (rho^l theta'(b))
                let mut rl = rho.clone();
                for _ in 1..ell {
                    rl = &rl * rho;
                }
                theta.div(&dtheta.mul_real(&(&rl * &r1m)))
            }
        };
        lower.push(a.to_cdd());
    }
    assemble(lower, ell)
}

/// Residues from double-precision Horner evaluation at the zeros rounded
/// to `f64`. Accurate only for small `l`; kept for conditioning studies.
fn residues_double(
    poly: &BesselPoly,
    zeros: &[Complex<Dd>],
    r1: f64,
    r2: f64,
) -> Result<Vec<Complex<Dd>>> {
    let ell = poly.ell();
    let half = ell.div_ceil(2);
    let mut lower = Vec::with_capacity(half);
    for b in &zeros[..half] {
        let b = b.to_c64();
        let (_, dw) = poly.eval_with_deriv(b)?;
        let num = if r2.is_infinite() {
            Complex64::new(1.0, 0.0)
        } else {
            poly.eval(b * (r2 / r1))?
        };
        let a = num / (dw * r1);
        if !(a.re.is_finite() && a.im.is_finite()) {
            return Err(Error::Overflow(format!(
                "double-precision residue at b = {b} for l = {ell}"
            )));
        }
        lower.push(crate::precision::c_dd(a));
    }
    Ok(assemble(lower, ell))
}

/// Full residue list in the zero ordering from the lower half (bottom
/// first, then the real root for odd `l`).
fn assemble(mut lower: Vec<Complex<Dd>>, ell: usize) -> Vec<Complex<Dd>> {
    let m = ell / 2;
    if ell % 2 == 1 {
        let last = lower.len() - 1;
        lower[last].im = Dd::ZERO;
    }
    let mut out = lower.clone();
    out.extend(lower[..m].iter().rev().map(|a| a.conj()));
    out
}

/// Direct summation `sum_j a_j / (s - p_j)` in double-double.
pub fn polesum_eval_dd(kernel: &ExactKernel, s: Complex<Dd>) -> Result<Complex<Dd>> {
    let mut acc = Complex::new(Dd::ZERO, Dd::ZERO);
    for (a, p) in kernel.residues.iter().zip(&kernel.poles) {
        let d = s - p;
        let dn = d.to_c64().norm();
        if dn <= 1e-14 * p.to_c64().norm().max(1e-300) {
            return Err(Error::PoleCollision(format!("{}", s.to_c64())));
        }
        acc += a / d;
    }
    Ok(acc)
}

/// Direct pole summation. Ill-conditioned for large `l` because the
/// residues are huge and alternate in phase.
pub fn polesum_eval(kernel: &ExactKernel, s: Complex64) -> Result<Complex64> {
    Ok(polesum_eval_dd(kernel, crate::precision::c_dd(s))?.to_c64())
}

/// The same kernel expressed for inner radius `new_r1` with the ratio
/// `r2 / r1` held fixed.
pub fn scale_kernel(kernel: &ExactKernel, new_r1: f64) -> Result<ExactKernel> {
    if !(new_r1 > 0.0 && new_r1.is_finite()) {
        return Err(Error::InvalidArgument(format!("new r1 = {new_r1}")));
    }
    if new_r1 == kernel.r1 {
        return Ok(kernel.clone());
    }
    let f = Dd::from_f64(kernel.r1) / Dd::from_f64(new_r1);
    let sc = |z: &Complex<Dd>| Complex::new(z.re * f, z.im * f);
    Ok(ExactKernel {
        ell: kernel.ell,
        r1: new_r1,
        r2: kernel.r2 * (new_r1 / kernel.r1),
        poles: kernel.poles.iter().map(sc).collect(),
        residues: kernel.residues.iter().map(sc).collect(),
        precision: kernel.precision,
    })
}

/// Residues from the pole-product form `prod(b_j rho - b_k) / prod(b_j - b_k)`
/// route; a cross-check for small `l` only.
pub fn residues_by_product(ell: usize, r1: f64, r2: f64) -> Result<Vec<Complex64>> {
    check_radii(r1, r2)?;
    let zs = macdonald_zeros_cached(ell)?;
    let b: Vec<Complex<Dd>> = zs.zeros.clone();
    let mut out = Vec::with_capacity(ell);
    // W(z) = prod(1 - b_k / z) since theta is monic with roots b_k
    // W'(b_j) = (1 / b_j) prod_{k != j} (1 - b_k / b_j)
    for j in 0..ell {
        let bj = b[j];
        let mut dw = Complex::new(Dd::ONE, Dd::ZERO) / bj;
        for (k, bk) in b.iter().enumerate() {
            if k != j {
                dw *= Complex::new(Dd::ONE, Dd::ZERO) - bk / bj;
            }
        }
        let num = if r2.is_infinite() {
            Complex::new(Dd::ONE, Dd::ZERO)
        } else {
            let z = bj.scale(Dd::from_f64(r2) / Dd::from_f64(r1));
            b.iter().fold(Complex::new(Dd::ONE, Dd::ZERO), |acc, bk| {
                acc * (Complex::new(Dd::ONE, Dd::ZERO) - bk / z)
            })
        };
        out.push((num / dw.scale(Dd::from_f64(r1))).to_c64());
    }
    Ok(out)
}

#[derive(Clone, Debug)]
pub struct AsymptoticResidues {
    pub ell: usize,
    pub r1: f64,
    pub r2: f64,
    /// Same ordering as the zeros.
    pub residues: Vec<Complex64>,
    /// `psi_j` for the lower-quadrant roots, bottom first.
    pub exponents: Vec<Complex64>,
}

impl AsymptoticResidues {
    pub fn max_residue(&self) -> f64 {
        self.residues.iter().map(|a| a.norm()).fold(0.0, f64::max)
    }
    pub fn min_residue(&self) -> f64 {
        self.residues
            .iter()
            .map(|a| a.norm())
            .fold(f64::INFINITY, f64::min)
    }
}

/// Large-`l` approximation of the residues, driven by the Airy zeros
/// `a_j` and `Ai'(a_j)`.
pub fn asymptotic_residues(
    ell: usize,
    r1: f64,
    r2: f64,
    airy_mode: AiryMode,
) -> Result<AsymptoticResidues> {
    check_radii(r1, r2)?;
    if r2.is_infinite() {
        return Err(Error::InvalidArgument(
            "asymptotic residues require a finite r2".into(),
        ));
    }
    if ell == 0 {
        return Err(Error::InvalidArgument("l must be positive".into()));
    }
    let zs = macdonald_zeros_cached(ell)?;
    let half = ell.div_ceil(2);
    let airy = airy_zeros(half, airy_mode)?;
    let nu = ell as f64 + 0.5;
    let rho = r2 / r1;
    let pi = std::f64::consts::PI;
    let one = Complex::new(Dd::ONE, Dd::ZERO);
    let i = Complex::new(Dd::ZERO, Dd::ONE);
    let rhod = Dd::from_f64(r2) / Dd::from_f64(r1);

    let mut lower = Vec::with_capacity(half);
    let mut exponents = Vec::with_capacity(half);
    for j in 0..half {
        let bt = zs.scaled_zeros[j];
        let arg = bt.im.to_f64().atan2(bt.re.to_f64());
        let arg = if bt.im.to_f64() == 0.0 { -pi } else { arg };
        if !(-pi..-pi / 2.0).contains(&arg) {
            return Err(Error::Domain(format!(
                "scaled zero {} outside the lower-left quadrant",
                bt.to_c64()
            )));
        }
        // i b~ rho must lie in the closed fourth quadrant
        let ib = (i * bt.scale(rhod)).to_c64();
        if ib.re < 0.0 || ib.im > 1e-12 * ib.norm() {
            return Err(Error::Domain(format!(
                "rotated argument {ib} outside the fourth quadrant"
            )));
        }
        let q = (one + (bt * bt).scale(rhod * rhod)).csqrt();
        let psi = bt.scale(rhod - Dd::ONE) - ((one + q) / (i * bt.scale(rhod))).cln() + q;
        let e = psi.scale(Dd::from_f64(nu)).cexp().to_c64();
        let btc = bt.to_c64();
        let pre = Complex64::new(0.0, 1.0) * btc / (2.0 * r1)
            * (rho / pi).sqrt()
            * (1.0 + btc * btc).powf(-0.25)
            * (1.0 + btc * btc * rho * rho).powf(-0.25);
        let aj = Complex64::new(airy.roots[j], 0.0);
        let den = aj.powf(-0.25) * airy.derivs[j];
        lower.push(pre * e / den);
        exponents.push(psi.to_c64());
    }
    let m = ell / 2;
    if ell % 2 == 1 {
        lower[half - 1].im = 0.0;
    }
    let mut residues = lower.clone();
    residues.extend(lower[..m].iter().rev().map(|a| a.conj()));
    Ok(AsymptoticResidues {
        ell,
        r1,
        r2,
        residues,
        exponents,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn degree_one_residue() {
        let k = exact_residues(1, 1.0, f64::INFINITY, Precision::Extended).unwrap();
        assert_eq!(k.residues.len(), 1);
        assert!((k.residues[0].re + Dd::ONE).abs().to_f64() < 1e-30);
    }

    #[test]
    fn degree_two_far_field_residue() {
        let k = exact_residues(2, 10.0, f64::INFINITY, Precision::Extended).unwrap();
        let a = k.residues_c64();
        // pole (-3/2 - i sqrt(3)/2) / 10
        assert!(
            (a[0] - Complex64::new(-0.15, 0.3 / 12f64.sqrt())).norm() < 1e-15,
            "{a:?}"
        );
        assert_eq!(a[1], a[0].conj());
        let s = k.residue_sum().to_c64();
        assert!((s.re + 0.3).abs() < 1e-15 && s.im.abs() < 1e-30);
    }

    #[test]
    fn pole_sum_at_origin_matches_closed_form() {
        for ell in 1..=8 {
            for (r1, r2) in [(1.0, 2.0), (3.0, 12.0), (10.0, f64::INFINITY)] {
                let k = exact_residues(ell, r1, r2, Precision::Extended).unwrap();
                let v = polesum_eval(&k, Complex64::new(0.0, 0.0)).unwrap();
                let want = kernel_at_s0(ell, r1, r2);
                assert!(
                    (v.re - want).abs() <= 1e-12 * want.abs(),
                    "l={ell} {v} {want}"
                );
                assert!(v.im.abs() < 1e-14);
            }
        }
    }

    #[test]
    fn table_extremes_at_degree_64() {
        let k = exact_residues(64, 15.0, 240.0, Precision::Extended).unwrap();
        assert!((k.min_residue() / 1.9086e1 - 1.0).abs() < 5e-5);
        assert!((k.max_residue() / 4.3234e15 - 1.0).abs() < 5e-5);
        let s = k.residue_sum().to_c64();
        assert!((s.re + 130.0).abs() < 1e-10 * 130.0);
        let k = exact_residues(64, 120.0, 240.0, Precision::Extended).unwrap();
        assert!((k.max_residue() / 7.4516e5 - 1.0).abs() < 5e-5);
    }

    #[test]
    fn product_form_agrees_for_small_degree() {
        for ell in 1..=8 {
            let k = exact_residues(ell, 2.0, 5.0, Precision::Extended).unwrap();
            let p = residues_by_product(ell, 2.0, 5.0).unwrap();
            for (a, b) in k.residues_c64().iter().zip(&p) {
                assert!((a - b).norm() < 1e-12 * a.norm(), "l={ell} {a} {b}");
            }
        }
    }

    #[test]
    fn rescaling_degree_one() {
        let k = exact_residues(1, 1.0, 2.0, Precision::Extended).unwrap();
        let s = scale_kernel(&k, 10.0).unwrap();
        assert!((s.residues[0].to_c64() - Complex64::new(-0.05, 0.0)).norm() < 1e-16);
        assert!((s.poles[0].to_c64() - Complex64::new(-0.1, 0.0)).norm() < 1e-16);
        assert_eq!(s.r2, 20.0);
        let same = scale_kernel(&k, 1.0).unwrap();
        assert_eq!(same.residues, k.residues);
    }

    #[test]
    fn asymptotic_requires_finite_outer_radius() {
        assert!(asymptotic_residues(8, 1.0, f64::INFINITY, AiryMode::Exact).is_err());
    }
}
