//! Least-squares fits of pole count and residue growth across a sweep.

use std::collections::BTreeMap;

use super::linalg::lstsq;
use super::{compress_ladder, truth_sets, CompressionConfig};
use crate::error::{Error, Result};
use crate::table::KernelKind;

/// One compressed kernel's summary.
#[derive(Clone, Debug, PartialEq)]
pub struct ScalingRecord {
    pub ell: usize,
    pub d: usize,
    pub epsilon: f64,
    /// `r2 / r1`.
    pub ratio: f64,
    pub max_gamma: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub enum ScalingModel {
    /// `d = a1 + a2 log10(1/eps)` at fixed `l` and ratio.
    DVsEps,
    /// `d = a1 + a2 ln l + a3 l` at fixed `eps` and ratio.
    DVsEll,
    /// `d = a1 + a2 ln l`.
    DVsLogEll,
    /// `d = a1 + a2 l`.
    DVsLinEll,
    /// `ln max|gamma| = a1 ln l + a2` at fixed `eps` and ratio.
    MaxResVsEll,
}

impl ScalingModel {
    pub fn as_str(self) -> &'static str {
        match self {
            ScalingModel::DVsEps => "d_vs_eps",
            ScalingModel::DVsEll => "d_vs_ell",
            ScalingModel::DVsLogEll => "d_vs_log_ell",
            ScalingModel::DVsLinEll => "d_vs_lin_ell",
            ScalingModel::MaxResVsEll => "maxres_vs_ell",
        }
    }

    fn features(self, r: &ScalingRecord) -> Vec<f64> {
        let l = r.ell as f64;
        match self {
            ScalingModel::DVsEps => vec![1.0, (1.0 / r.epsilon).log10()],
            ScalingModel::DVsEll => vec![1.0, l.ln(), l],
            ScalingModel::DVsLogEll => vec![1.0, l.ln()],
            ScalingModel::DVsLinEll => vec![1.0, l],
            ScalingModel::MaxResVsEll => vec![l.ln(), 1.0],
        }
    }

    fn target(self, r: &ScalingRecord) -> f64 {
        match self {
            ScalingModel::MaxResVsEll => r.max_gamma.ln(),
            _ => r.d as f64,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ScalingFit {
    pub model: ScalingModel,
    /// Group label, e.g. `ell=16 ratio=2`.
    pub group: String,
    pub coefficients: Vec<f64>,
    /// Residual sum of squares.
    pub rss: f64,
    /// Coefficient of determination.
    pub r_squared: f64,
    pub n: usize,
}

/// Minimum records for a fit.
pub const MIN_RECORDS: usize = 6;

/// Ordinary least squares of one model over the given records.
pub fn fit_model(
    model: ScalingModel,
    group: &str,
    records: &[&ScalingRecord],
) -> Result<ScalingFit> {
    if records.len() < MIN_RECORDS {
        return Err(Error::InvalidArgument(format!(
            "{} fit for {group} needs at least {MIN_RECORDS} records, got {}",
            model.as_str(),
            records.len()
        )));
    }
    let rows: Vec<Vec<f64>> = records.iter().map(|r| model.features(r)).collect();
    let y: Vec<f64> = records.iter().map(|r| model.target(r)).collect();
    if y.iter().any(|v| !v.is_finite()) {
        return Err(Error::InvalidArgument(format!(
            "non-finite target in {group}"
        )));
    }
    let m = rows.len();
    let n = rows[0].len();
    let mut a = vec![0.0; m * n];
    for (i, row) in rows.iter().enumerate() {
        for (j, v) in row.iter().enumerate() {
            a[j * m + i] = *v;
        }
    }
    let coef = lstsq(&a, m, n, &y).map_err(|e| match e {
        Error::RankDeficient(msg) => {
            Error::RankDeficient(format!("{} fit for {group}: {msg}", model.as_str()))
        }
        other => other,
    })?;
    let mean = y.iter().sum::<f64>() / m as f64;
    let mut rss = 0.0;
    let mut tss = 0.0;
    for (row, yi) in rows.iter().zip(&y) {
        let p: f64 = row.iter().zip(&coef).map(|(a, b)| a * b).sum();
        rss += (yi - p) * (yi - p);
        tss += (yi - mean) * (yi - mean);
    }
    let r_squared = if tss > 0.0 { 1.0 - rss / tss } else { 1.0 };
    Ok(ScalingFit {
        model,
        group: group.to_string(),
        coefficients: coef,
        rss,
        r_squared,
        n: m,
    })
}

fn key(x: f64) -> String {
    format!("{x:e}")
}

/// All fits a sweep supports: `d` against `eps` for each `(l, ratio)`,
/// and the three `d`-against-`l` models plus the residue law for each
/// `(eps, ratio)`. Groups with too few records are skipped.
pub fn fit_scalings(records: &[ScalingRecord]) -> Result<Vec<ScalingFit>> {
    if records.len() < MIN_RECORDS {
        return Err(Error::InvalidArgument(format!(
            "scaling fits need at least {MIN_RECORDS} records, got {}",
            records.len()
        )));
    }
    let mut by_ell: BTreeMap<(usize, String), Vec<&ScalingRecord>> = BTreeMap::new();
    let mut by_eps: BTreeMap<(String, String), Vec<&ScalingRecord>> = BTreeMap::new();
    for r in records {
        by_ell.entry((r.ell, key(r.ratio))).or_default().push(r);
        by_eps
            .entry((key(r.ratio), key(r.epsilon)))
            .or_default()
            .push(r);
    }
    let mut out = Vec::new();
    for ((ell, ratio), rs) in &by_ell {
        if rs.len() >= MIN_RECORDS {
            out.push(fit_model(
                ScalingModel::DVsEps,
                &format!("ell={ell} ratio={ratio}"),
                rs,
            )?);
        }
    }
    for ((ratio, eps), rs) in &by_eps {
        if rs.len() >= MIN_RECORDS {
            let g = format!("ratio={ratio} eps={eps}");
            for m in [
                ScalingModel::DVsEll,
                ScalingModel::DVsLogEll,
                ScalingModel::DVsLinEll,
                ScalingModel::MaxResVsEll,
            ] {
                out.push(fit_model(m, &g, rs)?);
            }
        }
    }
    if out.is_empty() {
        return Err(Error::InvalidArgument(format!(
            "no group has {MIN_RECORDS} records"
        )));
    }
    Ok(out)
}

/// Grid of `(l, r2/r1, eps)` for a scaling sweep.
#[derive(Clone, Debug, PartialEq)]
pub struct SweepSpec {
    pub ells: Vec<usize>,
    pub ratios: Vec<f64>,
    pub epsilons: Vec<f64>,
    pub r1: f64,
}

impl Default for SweepSpec {
    /// `l` from 8 to 64, `eps` at half decades from `1e-4` to `1e-8`,
    /// ratios 2 and 16.
    fn default() -> Self {
        SweepSpec {
            ells: vec![8, 12, 16, 24, 32, 48, 64],
            ratios: vec![2.0, 16.0],
            epsilons: (0..9).map(|k| 10f64.powf(-4.0 - 0.5 * k as f64)).collect(),
            r1: 1.0,
        }
    }
}

/// Compression settings for sweeps: the tight end of the tolerance range
/// sits near the double-precision floor, where LM needs more iterations.
pub fn sweep_config() -> CompressionConfig {
    let mut c = CompressionConfig::default();
    c.lm.max_iters = 2000;
    c
}

/// One ladder per `(l, ratio)`; `d(eps)` is the first rung meeting `eps`.
/// Tolerances the ladder never reaches produce no record.
pub fn scaling_sweep(spec: &SweepSpec, base: &CompressionConfig) -> Result<Vec<ScalingRecord>> {
    if spec.ells.is_empty() || spec.ratios.is_empty() || spec.epsilons.is_empty() {
        return Err(Error::InvalidArgument("empty sweep".into()));
    }
    if let Some(r) = spec.ratios.iter().find(|r| !(**r > 1.0 && r.is_finite())) {
        return Err(Error::InvalidArgument(format!("ratio {r} must exceed 1")));
    }
    let target = spec.epsilons.iter().copied().fold(f64::INFINITY, f64::min);
    let config = CompressionConfig {
        epsilon: target,
        ..base.clone()
    };
    config.validate()?;
    let jobs: Vec<(usize, f64)> = spec
        .ells
        .iter()
        .flat_map(|l| spec.ratios.iter().map(move |r| (*l, *r)))
        .collect();
    let ladders = crate::par::map(&jobs, |(ell, ratio)| {
        let (fit, check) = truth_sets(*ell, spec.r1, spec.r1 * ratio, &config)?;
        compress_ladder(&fit, &check, KernelKind::Teleport, 1, &config)
    });
    let mut out = Vec::new();
    for ((ell, ratio), stages) in jobs.iter().zip(ladders) {
        let stages = stages?;
        for eps in &spec.epsilons {
            if let Some(s) = stages.iter().find(|s| s.epsilon <= *eps) {
                out.push(ScalingRecord {
                    ell: *ell,
                    d: s.d,
                    epsilon: *eps,
                    ratio: *ratio,
                    max_gamma: s.table.max_gamma(),
                });
            }
        }
    }
    Ok(out)
}
