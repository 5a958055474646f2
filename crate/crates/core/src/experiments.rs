//! End-to-end experiments: far-field evaluation of the `l = 2` closed-form
//! solution and teleportation of a Gaussian pulse between domains.

use crate::compress::{compress_kernel, compress_omega, CompressionConfig};
use crate::error::{Error, Result};
use crate::io::Manifest;
use crate::table::PoleTable;
use crate::teleport::{
    asymptotic_signal_l2, awe_kernel_l2, error_bound, exact_outgoing_l2, exact_outgoing_l2_all,
    kernel_linf_at_zero, teleport_series, SineGaussian, TimeSeries,
};
use crate::wave::{evolve, InitialData, OuterBc, SimulationConfig, Solver};

#[derive(Clone, Debug, PartialEq)]
pub struct AweConfig {
    pub a: f64,
    pub r1: f64,
    pub n_sub: usize,
    pub nodes_per_sub: usize,
    pub courant: f64,
    pub t_final: f64,
    pub signal: SineGaussian,
}

impl Default for AweConfig {
    fn default() -> Self {
        AweConfig {
            a: 2.0,
            r1: 10.0,
            n_sub: 8,
            nodes_per_sub: 12,
            courant: 0.2,
            t_final: 30.0,
            signal: SineGaussian::default(),
        }
    }
}

impl AweConfig {
    pub fn manifest(&self, m: &mut Manifest) {
        m.set("awe.a", self.a);
        m.set("awe.r1", self.r1);
        m.set("awe.n_sub", self.n_sub);
        m.set("awe.nodes_per_sub", self.nodes_per_sub);
        m.set("awe.courant", self.courant);
        m.set("awe.t_final", self.t_final);
        m.set("awe.f0", self.signal.f0);
        m.set("awe.c", self.signal.c);
        m.set("awe.u0", self.signal.u0);
        m.set("awe.outer_bc", "rbc exact l = 2");
    }
}

#[derive(Clone, Debug)]
pub struct AweResult {
    /// `T = t - r1 - u0` per sample.
    pub big_t: Vec<f64>,
    pub recorded: TimeSeries,
    pub recorded_exact: Vec<f64>,
    pub teleported: TimeSeries,
    /// The exact far-field signal.
    pub asymptotic: Vec<f64>,
    pub boundary_linf: f64,
    pub boundary_l1: f64,
    /// `max |teleported - asymptotic|`.
    pub teleport_linf: f64,
    /// `max |recorded exact - asymptotic|`, the error of reading off at `r1`.
    pub systematic_linf: f64,
    /// Teleporting the exact recorded signal: the convolution error alone.
    pub convolution_linf: f64,
    pub kernel_linf: f64,
    pub bound: f64,
}

impl AweResult {
    pub fn solver_dominated(&self) -> bool {
        self.teleport_linf <= 2.0 * self.boundary_linf
    }

    pub fn bound_holds(&self) -> bool {
        self.teleport_linf <= self.bound
    }

    /// Columns `T, recorded, teleported, asymptotic, systematic error,
    /// teleport error, bound`.
    pub fn rows(&self) -> Vec<Vec<f64>> {
        (0..self.big_t.len())
            .map(|k| {
                vec![
                    self.big_t[k],
                    self.recorded.samples[k],
                    self.teleported.samples[k],
                    self.asymptotic[k],
                    (self.recorded.samples[k] - self.asymptotic[k]).abs(),
                    (self.teleported.samples[k] - self.asymptotic[k]).abs(),
                    self.bound,
                ]
            })
            .collect()
    }

    pub const HEADER: [&'static str; 7] = [
        "T",
        "recorded",
        "teleported",
        "asymptotic",
        "systematic_error",
        "teleport_error",
        "bound",
    ];
}

/// Evolves the outgoing `l = 2` solution, records it at `r1` and
/// teleports the record to infinity.
pub fn awe_experiment(cfg: &AweConfig) -> Result<AweResult> {
    let f = cfg.signal;
    let mut sim =
        SimulationConfig::new(2, cfg.a, cfg.r1, cfg.n_sub, cfg.nodes_per_sub, cfg.t_final);
    sim.dt = sim.stable_dt(cfg.courant);
    sim.outer_bc = OuterBc::Rbc(crate::compress::exact_omega(2, cfg.r1)?);
    let solver = Solver::new(&sim)?;
    let init = InitialData::from_fn(&solver.grid, |r| exact_outgoing_l2_all(&f, r, 0.0));
    let ev = evolve(&sim, &init)?;
    let recorded = ev.series.into_iter().next().expect("one record radius");
    let n = recorded.len();
    let recorded_exact: Vec<f64> = (0..n)
        .map(|k| exact_outgoing_l2(&f, cfg.r1, recorded.time(k)))
        .collect();
    let big_t: Vec<f64> = (0..n).map(|k| recorded.time(k) - cfg.r1 - f.u0).collect();
    let asymptotic: Vec<f64> = big_t.iter().map(|t| asymptotic_signal_l2(&f, *t)).collect();
    let kernel = awe_kernel_l2(cfg.r1)?;
    let teleported = teleport_series(&recorded, &kernel)?;
    let exact_series =
        TimeSeries::new(recorded.t0, recorded.dt, recorded_exact.clone(), cfg.r1, 2)?;
    let teleported_exact = teleport_series(&exact_series, &kernel)?;

    let delta = TimeSeries::new(
        recorded.t0,
        recorded.dt,
        recorded_exact
            .iter()
            .zip(&recorded.samples)
            .map(|(e, h)| e - h)
            .collect(),
        cfg.r1,
        2,
    )?;
    let (boundary_l1, boundary_linf) = delta.norms();
    let max_diff = |a: &[f64], b: &[f64]| {
        a.iter()
            .zip(b)
            .map(|(x, y)| (x - y).abs())
            .fold(0.0, f64::max)
    };
    let kernel_linf = kernel_linf_at_zero(2, cfg.r1, f64::INFINITY);
    Ok(AweResult {
        teleport_linf: max_diff(&teleported.samples, &asymptotic),
        systematic_linf: max_diff(&recorded_exact, &asymptotic),
        convolution_linf: max_diff(&teleported_exact.samples, &asymptotic),
        bound: error_bound(kernel_linf, boundary_l1, boundary_linf)?,
        big_t,
        recorded,
        recorded_exact,
        teleported,
        asymptotic,
        boundary_linf,
        boundary_l1,
        kernel_linf,
    })
}

#[derive(Clone, Debug, PartialEq)]
pub struct PulseConfig {
    pub ell: usize,
    pub a: f64,
    /// Outer radii; the largest provides the reference.
    pub radii: Vec<f64>,
    pub center: f64,
    /// Target subinterval length.
    pub sub_length: f64,
    pub nodes_per_sub: usize,
    pub courant: f64,
    /// The window starts at `b_ref - align_offset`.
    pub align_offset: f64,
    pub window: f64,
    pub kernel_epsilon: f64,
    pub rbc_epsilon: f64,
}

impl Default for PulseConfig {
    fn default() -> Self {
        PulseConfig {
            ell: 16,
            a: 2.0,
            radii: vec![15.0, 30.0, 240.0],
            center: 8.0,
            sub_length: 2.0,
            nodes_per_sub: 22,
            courant: 0.5,
            align_offset: 12.0,
            window: 40.0,
            kernel_epsilon: 1e-8,
            rbc_epsilon: 1e-12,
        }
    }
}

impl PulseConfig {
    /// `l = 64` on the fine grid of the original runs: 120 subintervals of
    /// 42 nodes on `[2, 240]` with `dt` near `4e-5`.
    pub fn full_scale() -> Self {
        PulseConfig {
            ell: 64,
            sub_length: 238.0 / 120.0,
            nodes_per_sub: 42,
            courant: 0.014,
            ..Default::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.radii.len() < 2 {
            return Err(Error::InvalidArgument(
                "need at least two outer radii".into(),
            ));
        }
        if self
            .radii
            .iter()
            .any(|b| !(*b > self.center && b.fract() == 0.0))
        {
            return Err(Error::InvalidArgument(format!(
                "outer radii must be integers beyond the pulse center: {:?}",
                self.radii
            )));
        }
        if !(self.a > 0.0 && self.a < self.center && self.sub_length > 0.0 && self.window > 0.0) {
            return Err(Error::InvalidArgument("bad pulse geometry".into()));
        }
        Ok(())
    }

    fn b_ref(&self) -> f64 {
        self.radii.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }

    fn sim(&self, b: f64) -> SimulationConfig {
        let n_sub = ((b - self.a) / self.sub_length).ceil().max(1.0) as usize;
        SimulationConfig::new(self.ell, self.a, b, n_sub, self.nodes_per_sub, 0.0)
    }

    /// Common step `1/m`, so every radius difference is a whole number of
    /// steps.
    pub fn dt(&self) -> f64 {
        let raw = self
            .radii
            .iter()
            .map(|b| self.sim(*b).stable_dt(self.courant))
            .fold(f64::INFINITY, f64::min);
        1.0 / (1.0 / raw).ceil()
    }

    pub fn manifest(&self, m: &mut Manifest) {
        m.set("pulse.ell", self.ell);
        m.set("pulse.a", self.a);
        m.set(
            "pulse.radii",
            self.radii
                .iter()
                .map(|r| r.to_string())
                .collect::<Vec<_>>()
                .join(" "),
        );
        m.set(
            "pulse.initial_data",
            format!("exp(-(r - {})^2), Pi = -Psi_r", self.center),
        );
        m.set("pulse.sub_length", self.sub_length);
        m.set("pulse.nodes_per_sub", self.nodes_per_sub);
        m.set("pulse.courant", self.courant);
        m.set("pulse.dt", format!("{:e}", self.dt()));
        m.set("pulse.align_offset", self.align_offset);
        m.set("pulse.window", self.window);
        m.set("pulse.kernel_epsilon", format!("{:e}", self.kernel_epsilon));
        m.set("pulse.rbc_epsilon", format!("{:e}", self.rbc_epsilon));
    }
}

#[derive(Clone, Debug)]
pub struct PulseRun {
    pub b: f64,
    pub kernel: PoleTable,
    /// The `b` record shifted by `b_ref - b`, on the window.
    pub raw: Vec<f64>,
    pub teleported: Vec<f64>,
    pub raw_linf: f64,
    pub teleport_linf: f64,
}

#[derive(Clone, Debug)]
pub struct PulseResult {
    pub b_ref: f64,
    pub times: Vec<f64>,
    pub reference: Vec<f64>,
    pub amplitude: f64,
    pub runs: Vec<PulseRun>,
}

impl PulseResult {
    /// Columns `t, reference`, then `raw_b, teleported_b` per radius.
    pub fn header(&self) -> Vec<String> {
        let mut h = vec!["t".to_string(), format!("reference_{}", self.b_ref)];
        for r in &self.runs {
            h.push(format!("raw_{}", r.b));
            h.push(format!("teleported_{}", r.b));
        }
        h
    }

    pub fn rows(&self) -> Vec<Vec<f64>> {
        (0..self.times.len())
            .map(|k| {
                let mut row = vec![self.times[k], self.reference[k]];
                for r in &self.runs {
                    row.push(r.raw[k]);
                    row.push(r.teleported[k]);
                }
                row
            })
            .collect()
    }
}

fn pulse_record(cfg: &PulseConfig, b: f64, dt: f64, t_final: f64) -> Result<TimeSeries> {
    let mut sim = cfg.sim(b);
    sim.dt = dt;
    sim.t_final = t_final;
    sim.outer_bc = OuterBc::Rbc(compress_omega(cfg.ell, b, cfg.rbc_epsilon)?);
    let solver = Solver::new(&sim)?;
    let c = cfg.center;
    let init = InitialData::from_fn(&solver.grid, |r| {
        let g = (-(r - c) * (r - c)).exp();
        let gr = -2.0 * (r - c) * g;
        [g, -gr, gr]
    });
    let ev = evolve(&sim, &init)?;
    Ok(ev.series.into_iter().next().expect("one record radius"))
}

/// Evolves the pulse on every domain, teleports each record to the
/// largest radius and compares against the record made there.
pub fn pulse_experiment(cfg: &PulseConfig) -> Result<PulseResult> {
    cfg.validate()?;
    let dt = cfg.dt();
    let b_ref = cfg.b_ref();
    let start = b_ref - cfg.align_offset;
    let end = start + cfg.window;
    let steps = |t: f64| (t / dt).round() as usize;
    let jobs: Vec<f64> = cfg.radii.clone();
    let records = crate::par::map(&jobs, |b| {
        let shift = b_ref - b;
        pulse_record(cfg, *b, dt, end - shift + dt)
    });
    let mut by_radius = Vec::new();
    for (b, rec) in jobs.iter().zip(records) {
        by_radius.push((*b, rec?));
    }
    let reference = &by_radius
        .iter()
        .find(|(b, _)| *b == b_ref)
        .expect("reference radius present")
        .1;
    let j0 = steps(start);
    let j1 = steps(end);
    let times: Vec<f64> = (j0..=j1).map(|j| j as f64 * dt).collect();
    let ref_window: Vec<f64> = reference.samples[j0..=j1].to_vec();
    let amplitude = ref_window.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let mut runs = Vec::new();
    for (b, rec) in &by_radius {
        if *b == b_ref {
            continue;
        }
        let kernel = compress_kernel(
            cfg.ell,
            *b,
            b_ref,
            &CompressionConfig::with_epsilon(cfg.kernel_epsilon),
        )?;
        let tele = teleport_series(rec, &kernel)?;
        let shift = steps(b_ref - b);
        let raw: Vec<f64> = (j0..=j1).map(|j| rec.samples[j - shift]).collect();
        let teleported: Vec<f64> = (j0..=j1).map(|j| tele.samples[j - shift]).collect();
        let diff = |x: &[f64]| {
            x.iter()
                .zip(&ref_window)
                .map(|(a, r)| (a - r).abs())
                .fold(0.0, f64::max)
        };
        runs.push(PulseRun {
            b: *b,
            raw_linf: diff(&raw),
            teleport_linf: diff(&teleported),
            kernel,
            raw,
            teleported,
        });
    }
    Ok(PulseResult {
        b_ref,
        times,
        reference: ref_window,
        amplitude,
        runs,
    })
}
