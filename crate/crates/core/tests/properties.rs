use num_complex::Complex64;
use proptest::prelude::*;

use farfield::exact::{exact_residues, scale_kernel};
use farfield::io::{table_from_str, table_to_string};
use farfield::precision::Precision;
use farfield::table::{KernelKind, PoleTable};
use farfield::teleport::{table_from_c64, teleport_series, TimeSeries};

fn kernel_from(pairs: &[(f64, f64, f64, f64)], reals: &[(f64, f64)], r1: f64) -> PoleTable {
    let mut b = Vec::new();
    let mut g = Vec::new();
    for &(re, im, gre, gim) in pairs {
        b.push(Complex64::new(-re, -im));
        g.push(Complex64::new(gre, gim));
        b.push(Complex64::new(-re, im));
        g.push(Complex64::new(gre, -gim));
    }
    for &(re, gre) in reals {
        b.push(Complex64::new(-re, 0.0));
        g.push(Complex64::new(gre, 0.0));
    }
    table_from_c64(KernelKind::Teleport, 3, r1, f64::INFINITY, &b, &g)
}

fn pair() -> impl Strategy<Value = (f64, f64, f64, f64)> {
    (0.05f64..3.0, 0.01f64..4.0, -2.0f64..2.0, -2.0f64..2.0)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn exact_kernels_are_conjugate_closed(ell in 1usize..24, r1 in 0.5f64..5.0, ratio in 1.5f64..30.0) {
        let k = PoleTable::from(&exact_residues(ell, r1, r1 * ratio, Precision::Extended).unwrap());
        prop_assert!(k.is_conjugate_closed());
        prop_assert!(k.check_stable().is_ok());
    }

    #[test]
    fn residues_scale_inversely_with_radius(ell in 1usize..20, r1 in 0.5f64..5.0, ratio in 1.5f64..30.0, f in 0.1f64..10.0) {
        let base = exact_residues(ell, r1, r1 * ratio, Precision::Extended).unwrap();
        let scaled = scale_kernel(&base, r1 * f).unwrap();
        let direct = exact_residues(ell, r1 * f, r1 * f * ratio, Precision::Extended).unwrap();
        for (a, b) in scaled.residues_c64().iter().zip(direct.residues_c64()) {
            prop_assert!((a - b).norm() <= 1e-12 * b.norm(), "{a} {b}");
        }
    }

    #[test]
    fn teleport_is_linear(
        pairs in prop::collection::vec(pair(), 1..4),
        a in -3.0f64..3.0,
        b in -3.0f64..3.0,
        u in prop::collection::vec(-1.0f64..1.0, 50..200),
        v_seed in -1.0f64..1.0,
    ) {
        let k = kernel_from(&pairs, &[(0.3, 0.5)], 10.0);
        let v: Vec<f64> = (0..u.len()).map(|i| (v_seed * i as f64).sin()).collect();
        let w: Vec<f64> = u.iter().zip(&v).map(|(x, y)| a * x + b * y).collect();
        let ts = |s: Vec<f64>| TimeSeries::new(0.0, 0.05, s, 10.0, 3).unwrap();
        let tu = teleport_series(&ts(u.clone()), &k).unwrap();
        let tv = teleport_series(&ts(v), &k).unwrap();
        let tw = teleport_series(&ts(w), &k).unwrap();
        let scale = 1.0 + tw.samples.iter().fold(0.0f64, |m, x| m.max(x.abs()));
        for i in 0..tw.len() {
            let lin = a * tu.samples[i] + b * tv.samples[i];
            prop_assert!((tw.samples[i] - lin).abs() <= 1e-12 * scale);
        }
    }

    #[test]
    fn teleport_output_is_real_and_order_independent(pairs in prop::collection::vec(pair(), 1..5)) {
        let k = kernel_from(&pairs, &[], 10.0);
        let mut rev = k.clone();
        rev.betas.reverse();
        rev.gammas.reverse();
        let ts = TimeSeries::sample(|t| (-(t - 3.0) * (t - 3.0)).exp(), 0.0, 0.02, 400, 10.0, 3).unwrap();
        let a = teleport_series(&ts, &k).unwrap();
        let b = teleport_series(&ts, &rev).unwrap();
        for (x, y) in a.samples.iter().zip(&b.samples) {
            prop_assert!(x.is_finite());
            prop_assert!((x - y).abs() <= 1e-13 * (1.0 + x.abs()));
        }
    }

    #[test]
    fn double_tables_round_trip(pairs in prop::collection::vec(pair(), 0..5), reals in prop::collection::vec((0.01f64..5.0, -3.0f64..3.0), 0..3)) {
        let k = kernel_from(&pairs, &reals, 7.5).to_double();
        let back = table_from_str(&table_to_string(&k)).unwrap();
        prop_assert_eq!(back, k);
    }
}

#[test]
fn output_decays_at_the_slowest_rate() {
    let slow = 0.2;
    let k = kernel_from(&[(1.5, 2.0, 0.7, -0.3)], &[(slow, 0.8)], 10.0);
    let dt = 0.01;
    let ts = TimeSeries::sample(
        |t| if t < 2.0 { (3.0 * t).sin() } else { 0.0 },
        0.0,
        dt,
        6000,
        10.0,
        3,
    )
    .unwrap();
    let out = teleport_series(&ts, &k).unwrap();
    // log-slope over t in [30, 60], where the fast pair has died out
    let pts: Vec<(f64, f64)> = (3000..6000)
        .step_by(50)
        .map(|i| (out.time(i), out.samples[i].abs().ln()))
        .collect();
    let n = pts.len() as f64;
    let mt = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let slope = pts.iter().map(|p| (p.0 - mt) * (p.1 - my)).sum::<f64>()
        / pts.iter().map(|p| (p.0 - mt).powi(2)).sum::<f64>();
    assert!((slope + slow).abs() < 1e-6, "slope {slope}");
}
