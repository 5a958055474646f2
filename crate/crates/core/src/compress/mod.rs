//! Compression of a sampled kernel into a short sum of poles.
//!
//! The fit starts from a few poles on the scaled limiting curve and grows
//! one conjugate pair at a time, inserting the new pair near the point of
//! largest error, until the sup-norm relative error on a separate, finer
//! verification set drops below the target.

pub mod linalg;
pub mod scaling;
pub mod varpro;

use num_complex::{Complex, Complex64};

use crate::error::{Error, Result};
use crate::eval::profile::{omega_profile, KernelSampleSet};
use crate::eval::{phi_truth_profile, phi_via_decades, GridSpec, QuadratureSpec};
use crate::exact::kernel_at_t0;
use crate::precision::{c_dd, ComplexExt, Precision};
use crate::special::curve::{curve_point, REAL_CROSSING, T_END};
use crate::table::{KernelKind, PoleTable};
pub use scaling::{
    fit_scalings, scaling_sweep, sweep_config, ScalingFit, ScalingModel, ScalingRecord, SweepSpec,
};
use varpro::{levenberg_marquardt, solve_residues, FitData, LmOptions, PoleParams};

/// Below this fraction of `sup |Phi|` the verification error is measured
/// against the floor instead of the local value.
pub const RELATIVE_FLOOR: f64 = 1e-3;

#[derive(Clone, Debug, PartialEq)]
pub struct CompressionConfig {
    /// Target sup-norm relative error.
    pub epsilon: f64,
    /// Starting pole count; odd counts carry one real pole.
    pub d_init: usize,
    pub d_max: usize,
    /// Fitting grid; `None` picks [`GridSpec::for_kernel`].
    pub grid: Option<GridSpec>,
    /// Refinement factor for the verification grid.
    pub verify_grid_factor: usize,
    /// Cap on ladder stages, restarts included.
    pub max_outer_iters: usize,
    pub lm: LmOptions,
    /// Quadrature for the truth profile; `None` picks
    /// [`QuadratureSpec::for_kernel`]. Verification uses its perturbation.
    pub quad: Option<QuadratureSpec>,
    pub truth_precision: Precision,
    /// Also try each rung plus one real pole, so odd pole counts are found.
    pub odd_probes: bool,
}

impl Default for CompressionConfig {
    fn default() -> Self {
        CompressionConfig {
            epsilon: 1e-8,
            d_init: 2,
            d_max: 80,
            grid: None,
            verify_grid_factor: 2,
            max_outer_iters: 120,
            lm: LmOptions::default(),
            quad: None,
            truth_precision: Precision::Double,
            odd_probes: true,
        }
    }
}

impl CompressionConfig {
    pub fn with_epsilon(epsilon: f64) -> Self {
        CompressionConfig {
            epsilon,
            ..Default::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.epsilon > 0.0 && self.epsilon < 1.0) {
            return Err(Error::InvalidArgument(format!(
                "epsilon = {} is not in (0, 1)",
                self.epsilon
            )));
        }
        if self.d_init < 1 || self.d_init > self.d_max {
            return Err(Error::InvalidArgument(format!(
                "need 1 <= d_init <= d_max, got {} and {}",
                self.d_init, self.d_max
            )));
        }
        if self.verify_grid_factor < 2 {
            return Err(Error::InvalidArgument(
                "verification grid must be strictly finer (factor >= 2)".into(),
            ));
        }
        if let Some(g) = &self.grid {
            g.validate()?;
        }
        Ok(())
    }

    pub fn grid_for(&self, ell: usize, r1: f64) -> GridSpec {
        self.grid
            .clone()
            .unwrap_or_else(|| GridSpec::for_kernel(ell, r1))
    }
}

/// One rung of the ladder.
#[derive(Clone, Debug)]
pub struct LadderStage {
    pub d: usize,
    pub epsilon: f64,
    pub lm_iterations: usize,
    pub restart: bool,
    /// A side fit: the previous rung plus one real pole. The ladder does
    /// not continue from it.
    pub probe: bool,
    pub table: PoleTable,
}

/// Outcome of [`verify_report`].
#[derive(Clone, Debug, PartialEq)]
pub struct VerifyReport {
    /// `max(sup_j err_j, tail)`.
    pub epsilon: f64,
    /// Point of the largest pointwise error.
    pub worst_y: f64,
    /// Number of points where the floor replaced `|Phi|`.
    pub floored: usize,
    /// `|sum gamma / Phi(t=0) - 1|`, the relative error as `|y| -> infinity`.
    pub tail: f64,
}

pub fn verify_report(kernel: &PoleTable, truth: &KernelSampleSet) -> Result<VerifyReport> {
    if truth.grid.is_empty() {
        return Err(Error::InvalidArgument("empty truth set".into()));
    }
    if kernel.ell != truth.ell {
        return Err(Error::InvalidArgument(format!(
            "kernel for l = {} checked against truth for l = {}",
            kernel.ell, truth.ell
        )));
    }
    let sup = truth
        .values
        .iter()
        .map(|v| v.to_c64().norm())
        .fold(0.0, f64::max);
    let floor = RELATIVE_FLOOR * sup;
    let mut worst = (0.0f64, 0.0f64);
    let mut floored = 0;
    for i in truth.nonnegative() {
        let y = truth.grid[i];
        let t = truth.values[i];
        if !t.re.is_finite() || !t.im.is_finite() {
            return Err(Error::NotFinite(i));
        }
        let s = Complex::new(
            crate::precision::Dd::ZERO,
            crate::precision::Dd::from_f64(y),
        );
        let diff = (kernel.eval_dd(s) - t).to_c64().norm();
        let mag = t.to_c64().norm();
        let den = if mag < floor {
            floored += 1;
            floor
        } else {
            mag
        };
        let e = diff / den;
        if !(e <= worst.0) {
            worst = (e, y);
        }
    }
    let tail = match truth.t0_value {
        Some(t0) if t0 != 0.0 => (kernel.residue_sum() / t0 - 1.0).norm(),
        _ => 0.0,
    };
    Ok(VerifyReport {
        epsilon: worst.0.max(tail),
        worst_y: worst.1,
        floored,
        tail,
    })
}

/// Achieved sup-norm relative error of `kernel` against `truth`.
pub fn verify(kernel: &PoleTable, truth: &KernelSampleSet) -> Result<f64> {
    Ok(verify_report(kernel, truth)?.epsilon)
}

/// Weighted fitting data from the nonnegative half of a sample set,
/// keeping every `stride`-th point.
pub fn fit_data(samples: &KernelSampleSet, stride: usize) -> Result<FitData> {
    let idx: Vec<usize> = samples.nonnegative().collect();
    let mut data = FitData {
        ys: Vec::new(),
        values: Vec::new(),
        weights: Vec::new(),
    };
    for (k, &i) in idx.iter().enumerate() {
        if k % stride.max(1) != 0 && k + 1 != idx.len() {
            continue;
        }
        let v = samples.values[i];
        let mag = v.to_c64().norm();
        if !(mag.is_finite()) {
            return Err(Error::NotFinite(i));
        }
        if mag == 0.0 {
            continue;
        }
        data.ys.push(samples.grid[i]);
        data.values.push(v);
        // relative error is the target, so rows are scaled by 1/|Phi|
        data.weights.push(1.0 / mag);
    }
    if data.is_empty() {
        return Err(Error::InvalidArgument("no usable samples".into()));
    }
    Ok(data)
}

fn initial_params(d: usize, ell: usize, r1: f64) -> Result<PoleParams> {
    let nu = ell.max(1) as f64 + 0.5;
    let m = d / 2;
    let pairs: Vec<Complex64> = (0..m)
        .map(|k| curve_point(T_END * (k as f64 + 0.5) / m as f64) * (nu / r1))
        .collect();
    let reals = if d % 2 == 1 {
        vec![-REAL_CROSSING * nu / r1]
    } else {
        Vec::new()
    };
    PoleParams::from_poles(&pairs, &reals)
}

fn table_from_fit(
    data: &FitData,
    params: &PoleParams,
    kind: KernelKind,
    ell: usize,
    r1: f64,
    r2: f64,
) -> Result<PoleTable> {
    let (pairs, reals) = solve_residues(data, params)?;
    let mut t = PoleTable::new(kind, ell, r1, r2);
    for (b, g) in &pairs {
        t.betas.push(*b);
        t.gammas.push(*g);
    }
    for (b, g) in &reals {
        t.betas.push(Complex::new(*b, crate::precision::Dd::ZERO));
        t.gammas.push(Complex::new(*g, crate::precision::Dd::ZERO));
    }
    for (b, g) in pairs.iter().rev() {
        t.betas.push(b.conj());
        t.gammas.push(g.conj());
    }
    t.precision = Precision::Extended;
    Ok(t)
}

fn closest_pole(params: &PoleParams, z: Complex64) -> Option<(usize, f64)> {
    params
        .pairs()
        .iter()
        .enumerate()
        .map(|(k, b)| (k, (b - z).norm() / z.norm().max(1e-300)))
        .min_by(|a, b| a.1.total_cmp(&b.1))
}

fn insertion_point(y: f64, ell: usize, r1: f64) -> Complex64 {
    let nu = ell.max(1) as f64 + 0.5;
    Complex64::new(-(0.3 * y + 1e-3 * nu / r1), -(y + 1e-6 * nu / r1))
}

/// Pairs flatter than this relative to their real part become real poles.
const COLLAPSE_TOL: f64 = 1e-3;

fn fit_rung(data: &FitData, start: &PoleParams, opts: &LmOptions) -> Result<varpro::LmOutcome> {
    let mut lm = levenberg_marquardt(data, start, opts)?;
    for _ in 0..3 {
        let mut p = lm.params.clone();
        if !p.collapse_pairs(COLLAPSE_TOL) {
            break;
        }
        lm = levenberg_marquardt(data, &p, opts)?;
    }
    Ok(lm)
}

/// Runs the ladder, returning every stage. Stops at the first stage
/// meeting `config.epsilon` or when `d_max` would be exceeded.
pub fn compress_ladder(
    fit: &KernelSampleSet,
    check: &KernelSampleSet,
    kind: KernelKind,
    fit_stride: usize,
    config: &CompressionConfig,
) -> Result<Vec<LadderStage>> {
    config.validate()?;
    let (ell, r1, r2) = (fit.ell, fit.r1, fit.r2);
    let data = fit_data(fit, fit_stride)?;
    let mut params = initial_params(config.d_init, ell, r1)?;
    let mut stages: Vec<LadderStage> = Vec::new();
    let mut restarted_at: Option<usize> = None;
    let mut prev: Option<f64> = None;
    for _ in 0..config.max_outer_iters {
        // Rank loss after an insertion ends the ladder; earlier rungs stand.
        let fitted = fit_rung(&data, &params, &config.lm).and_then(|lm| {
            let t = table_from_fit(&data, &lm.params, kind, ell, r1, r2)?;
            Ok((lm, t))
        });
        let (lm, table) = match fitted {
            Ok(v) => v,
            Err(Error::RankDeficient(_)) if !stages.is_empty() => break,
            Err(e) => return Err(e),
        };
        params = lm.params;
        let rep = verify_report(&table, check)?;
        let d = params.d();
        let restart = restarted_at == Some(d);
        let last_eps = prev.replace(rep.epsilon);
        stages.push(LadderStage {
            d,
            epsilon: rep.epsilon,
            lm_iterations: lm.iterations,
            restart,
            probe: false,
            table,
        });
        if rep.epsilon <= config.epsilon {
            break;
        }
        let target = insertion_point(rep.worst_y, ell, r1);
        // A stalled rung gets one restart: the pair with the smallest
        // residue moves to the worst point.
        let stalled = matches!(last_eps, Some(p) if rep.epsilon > 0.9 * p);
        if stalled && restarted_at != Some(d) && params.n_pairs() > 1 {
            let gam = &stages.last().expect("stage").table.gammas;
            let k = (0..params.n_pairs())
                .min_by(|a, b| gam[*a].to_c64().norm().total_cmp(&gam[*b].to_c64().norm()))
                .expect("pairs");
            params.u[k] = (-target.re).ln();
            params.v[k] = (-target.im).ln();
            restarted_at = Some(d);
            continue;
        }
        if config.odd_probes && d < config.d_max {
            let mut trial = params.clone();
            trial.u.push(target.norm().ln());
            let probed = fit_rung(&data, &trial, &config.lm).and_then(|lm| {
                let t = table_from_fit(&data, &lm.params, kind, ell, r1, r2)?;
                Ok((lm, t))
            });
            match probed {
                Ok((lm, table)) => {
                    let eps = verify_report(&table, check)?.epsilon;
                    stages.push(LadderStage {
                        d: lm.params.d(),
                        epsilon: eps,
                        lm_iterations: lm.iterations,
                        restart: false,
                        probe: true,
                        table,
                    });
                    if eps <= config.epsilon {
                        break;
                    }
                }
                Err(Error::RankDeficient(_)) => {}
                Err(e) => return Err(e),
            }
        }
        if d + 2 > config.d_max {
            break;
        }
        let mut z = target;
        if let Some((_, dist)) = closest_pole(&params, z) {
            if dist < 0.05 {
                z = insertion_point(1.5 * rep.worst_y + 1e-2 * (ell as f64 + 0.5) / r1, ell, r1);
            }
        }
        let npair = params.n_pairs();
        params.u.insert(npair, (-z.re).ln());
        params.v.push((-z.im).ln());
    }
    Ok(stages)
}

fn check_collisions(t: &PoleTable, eps: f64) -> Result<()> {
    let b = t.betas_c64();
    for i in 0..b.len() {
        for j in i + 1..b.len() {
            if (b[i] - b[j]).norm() <= eps * b[i].norm() {
                return Err(Error::DegenerateFit(format!(
                    "poles {} and {} coincide within {eps:e}",
                    b[i], b[j]
                )));
            }
        }
    }
    Ok(())
}

/// Smallest accepted kernel from a ladder, or the unreachable-tolerance
/// error carrying the best error seen.
pub fn accept(stages: &[LadderStage], config: &CompressionConfig) -> Result<PoleTable> {
    if let Some(s) = stages.iter().find(|s| s.epsilon <= config.epsilon) {
        let mut t = s.table.clone();
        t.epsilon_achieved = s.epsilon;
        check_collisions(&t, config.epsilon)?;
        t.check_stable()?;
        t.set_meta("d_init", config.d_init);
        t.set_meta("ladder_stages", stages.len());
        t.set_meta("target_epsilon", format!("{:e}", config.epsilon));
        return Ok(t);
    }
    let achieved = stages
        .iter()
        .map(|s| s.epsilon)
        .fold(f64::INFINITY, f64::min);
    Err(Error::ToleranceUnreachable {
        target: config.epsilon,
        achieved,
        d_max: config.d_max,
    })
}

/// Compresses a sample set, fitting on every other point and verifying on
/// all of them.
pub fn compress(samples: &KernelSampleSet, config: &CompressionConfig) -> Result<PoleTable> {
    let kind = if samples.r1 == samples.r2 {
        KernelKind::Rbc
    } else {
        KernelKind::Teleport
    };
    let stages = compress_ladder(samples, samples, kind, 2, config)?;
    accept(&stages, config)
}

/// Truth sets for fitting and for verification on the refined grid with
/// perturbed quadrature.
pub fn truth_sets(
    ell: usize,
    r1: f64,
    r2: f64,
    config: &CompressionConfig,
) -> Result<(KernelSampleSet, KernelSampleSet)> {
    let grid = config.grid_for(ell, r1);
    let quad = config
        .quad
        .clone()
        .unwrap_or_else(|| QuadratureSpec::for_kernel(ell, r1, r2, config.truth_precision));
    let fit = phi_truth_profile(ell, r1, r2, &grid, &quad, config.truth_precision)?;
    let check = phi_truth_profile(
        ell,
        r1,
        r2,
        &grid.refined(config.verify_grid_factor),
        &quad.perturbed(),
        config.truth_precision,
    )?;
    Ok((fit, check))
}

/// End-to-end compression of the teleportation kernel for `(r1, r2)`.
pub fn compress_kernel(
    ell: usize,
    r1: f64,
    r2: f64,
    config: &CompressionConfig,
) -> Result<PoleTable> {
    config.validate()?;
    let (fit, check) = truth_sets(ell, r1, r2, config)?;
    let stages = compress_ladder(&fit, &check, KernelKind::Teleport, 1, config)?;
    let mut t = accept(&stages, config)?;
    annotate(&mut t, config, &config.grid_for(ell, r1));
    Ok(t)
}

/// Records the grid and truth settings in the table metadata.
pub fn annotate(t: &mut PoleTable, config: &CompressionConfig, grid: &GridSpec) {
    t.set_meta("grid_y_max", grid.y_max);
    t.set_meta("grid_j", grid.j);
    t.set_meta("grid_y_min", grid.y_min);
    t.set_meta("grid_y_far", grid.y_far);
    t.set_meta("grid_n_geom", grid.n_geom);
    t.set_meta("verify_grid_factor", config.verify_grid_factor);
    t.set_meta("truth_precision", config.truth_precision);
    t.set_meta("fit_weights", "1/|Phi|");
}

/// Same kernel for a new inner radius with `r2 / r1` fixed.
pub fn transfer_scaling(kernel: &PoleTable, new_r1: f64) -> Result<PoleTable> {
    kernel.rescaled(new_r1)
}

/// Kernel for `(1, 10^{P+1})` compressed from the product of decade
/// kernels, each a rescaled copy of the `(1, 10)` kernel.
pub fn compress_far(ell: usize, p: usize, config: &CompressionConfig) -> Result<PoleTable> {
    config.validate()?;
    if p == 0 {
        return compress_kernel(ell, 1.0, 10.0, config);
    }
    let base_cfg = CompressionConfig {
        epsilon: config.epsilon / (2.0 * (p + 1) as f64),
        ..config.clone()
    };
    let base = compress_kernel(ell, 1.0, 10.0, &base_cfg)?;
    let r2 = 10f64.powi(p as i32 + 1);
    let grid = config.grid_for(ell, 1.0);
    let product_set = |g: &GridSpec| -> Result<KernelSampleSet> {
        let ys = g.nonnegative_points();
        let vals = crate::par::map(&ys, |&y| {
            phi_via_decades(ell, 1.0, p, std::slice::from_ref(&base), y)
        })
        .into_iter()
        .collect::<Result<Vec<_>>>()?;
        let vals: Vec<_> = vals.into_iter().map(c_dd).collect();
        let mut s = KernelSampleSet::from_half(ell, 1.0, r2, &ys, &vals, Precision::Double, 0.0);
        s.t0_value = Some(kernel_at_t0(ell, 1.0, r2));
        Ok(s)
    };
    let fit = product_set(&grid)?;
    let check = product_set(&grid.refined(config.verify_grid_factor))?;
    let stages = compress_ladder(&fit, &check, KernelKind::Teleport, 1, config)?;
    let mut t = accept(&stages, config)?;
    annotate(&mut t, config, &grid);
    t.set_meta("source", format!("decade product, P = {p}"));
    t.set_meta("decade_kernel_d", base.d());
    t.set_meta(
        "decade_kernel_epsilon",
        format!("{:e}", base.epsilon_achieved),
    );
    Ok(t)
}

/// Radiation-boundary kernel `Omega(s, b)` compressed to `epsilon`.
/// Falls back to the exact `l`-pole kernel when the fit cannot reach the
/// tolerance with fewer poles.
pub fn compress_omega(ell: usize, b: f64, epsilon: f64) -> Result<PoleTable> {
    let exact = exact_omega(ell, b)?;
    if ell == 0 {
        return Ok(exact);
    }
    let grid = GridSpec::for_kernel(ell, b);
    let fit = omega_profile(ell, b, &grid)?;
    let check = omega_profile(ell, b, &grid.refined(2))?;
    let config = CompressionConfig {
        epsilon,
        d_init: if ell == 1 { 1 } else { 2 },
        d_max: ell,
        ..Default::default()
    };
    let stages = compress_ladder(&fit, &check, KernelKind::Rbc, 1, &config)?;
    match accept(&stages, &config) {
        Ok(mut t) => {
            t.set_meta("source", "compressed");
            Ok(t)
        }
        Err(Error::ToleranceUnreachable { .. }) => {
            let mut t = exact;
            t.epsilon_achieved = verify(&t, &check)?;
            Ok(t)
        }
        Err(e) => Err(e),
    }
}

/// `Omega(s, b) = sum_k (b_k / b) / (s - b_k / b)` over the zeros `b_k`.
pub fn exact_omega(ell: usize, b: f64) -> Result<PoleTable> {
    crate::exact::check_radii(b, f64::INFINITY)?;
    let mut t = PoleTable::new(KernelKind::Rbc, ell, b, b);
    if ell > 0 {
        let z = crate::special::macdonald_zeros_cached(ell)?;
        let bd = crate::precision::Dd::from_f64(b);
        for zk in &z.zeros {
            let p = Complex::new(zk.re / bd, zk.im / bd);
            t.betas.push(p);
            t.gammas.push(p);
        }
    }
    t.set_meta("source", "exact");
    Ok(t)
}
