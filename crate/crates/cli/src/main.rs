//! Command-line front end: kernel construction, compression, teleportation
//! and the demonstration experiments. Every command writes CSV and a
//! `<command>.manifest` with the resolved parameters into `--out`.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};

use farfield::compress::{
    accept, annotate, compress_far, compress_ladder, fit_scalings, scaling_sweep, sweep_config,
    truth_sets, CompressionConfig, SweepSpec,
};
use farfield::eval::{phi_truth_profile, GridSpec, QuadratureSpec};
use farfield::exact::exact_residues;
use farfield::experiments::{awe_experiment, pulse_experiment, AweConfig, AweResult, PulseConfig};
use farfield::io::{self, Manifest};
use farfield::precision::Precision;
use farfield::special::macdonald_zeros;
use farfield::table::{KernelKind, PoleTable};
use farfield::teleport::teleport_series;

#[derive(Parser, Debug)]
#[command(
    name = "farfield",
    version,
    about = "Teleportation kernels for radial wave multipoles"
)]
struct Cli {
    /// Output directory.
    #[arg(long, global = true, default_value = ".")]
    out: PathBuf,
    /// Run the preset behind a figure instead of a command.
    #[arg(long, value_enum)]
    seed_experiment: Option<Seed>,
    #[command(subcommand)]
    command: Option<Command>,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum Seed {
    Fig6,
    Fig7,
    Fig8,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum PrecisionArg {
    Double,
    Extended,
}

impl From<PrecisionArg> for Precision {
    fn from(p: PrecisionArg) -> Self {
        match p {
            PrecisionArg::Double => Precision::Double,
            PrecisionArg::Extended => Precision::Extended,
        }
    }
}

fn parse_radius(s: &str) -> std::result::Result<f64, String> {
    match s {
        "inf" | "infinity" => Ok(f64::INFINITY),
        _ => s.parse::<f64>().map_err(|e| format!("{s}: {e}")),
    }
}

#[derive(Args, Debug, Clone)]
struct KernelArgs {
    #[arg(long)]
    ell: usize,
    #[arg(long, default_value_t = 1.0)]
    r1: f64,
    /// Outer radius; `inf` for the far field.
    #[arg(long, value_parser = parse_radius, default_value = "inf")]
    r2: f64,
    #[arg(long, value_enum, default_value = "double")]
    precision: PrecisionArg,
    /// Uniform-grid extent on the imaginary axis.
    #[arg(long)]
    grid_ymax: Option<f64>,
    /// Uniform-grid point count.
    #[arg(long)]
    grid_j: Option<usize>,
    /// Composite quadrature subintervals.
    #[arg(long)]
    quad_nc: Option<usize>,
    /// Kronrod node count (15, 21, 31, 41, 51 or 61).
    #[arg(long)]
    quad_order: Option<usize>,
}

impl KernelArgs {
    fn grid(&self) -> GridSpec {
        let mut g = GridSpec::for_kernel(self.ell, self.r1);
        if let Some(y) = self.grid_ymax {
            g.y_max = y;
        }
        if let Some(j) = self.grid_j {
            g.j = j;
        }
        g
    }

    fn quad(&self) -> QuadratureSpec {
        let mut q = QuadratureSpec::for_kernel(self.ell, self.r1, self.r2, self.precision.into());
        if let Some(n) = self.quad_nc {
            q.n_composite = n;
        }
        if let Some(o) = self.quad_order {
            q.gk_order = o;
        }
        q
    }

    fn manifest(&self, m: &mut Manifest) {
        m.set("ell", self.ell);
        m.set("r1", self.r1);
        m.set("r2", radius_str(self.r2));
        m.set("precision", Precision::from(self.precision));
        record_grid(m, &self.grid());
        record_quad(m, &self.quad());
    }
}

#[derive(Args, Debug, Clone)]
struct FitArgs {
    #[arg(long, default_value_t = 1e-8)]
    eps: f64,
    #[arg(long, default_value_t = 2)]
    d_init: usize,
    #[arg(long, default_value_t = 80)]
    d_max: usize,
}

impl FitArgs {
    fn config(&self, k: &KernelArgs) -> CompressionConfig {
        CompressionConfig {
            epsilon: self.eps,
            d_init: self.d_init,
            d_max: self.d_max,
            grid: Some(k.grid()),
            quad: Some(k.quad()),
            truth_precision: k.precision.into(),
            ..Default::default()
        }
    }
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Zeros of the Bessel polynomial of degree l.
    Zeros {
        #[arg(long)]
        ell: usize,
    },
    /// Exact poles and residues of the teleportation kernel.
    Residues {
        #[command(flatten)]
        kernel: KernelArgs,
    },
    /// Kernel samples on the imaginary axis.
    EvalProfile {
        #[command(flatten)]
        kernel: KernelArgs,
    },
    /// Compressed kernel table.
    Compress {
        #[command(flatten)]
        kernel: KernelArgs,
        #[command(flatten)]
        fit: FitArgs,
    },
    /// Kernel for `(1, 10^(P+1))` built from decade kernels.
    CompressFar {
        #[arg(long)]
        ell: usize,
        /// Decade count minus one.
        #[arg(long, default_value_t = 1)]
        p: usize,
        #[arg(long, default_value_t = 1e-8)]
        eps: f64,
        #[arg(long, value_enum, default_value = "double")]
        precision: PrecisionArg,
    },
    /// Applies a kernel table to a recorded time series.
    Teleport {
        #[arg(long)]
        table: PathBuf,
        #[arg(long)]
        input: PathBuf,
    },
    /// Far-field evaluation of the closed-form l = 2 solution.
    AweDemo {
        #[arg(long, default_value_t = 8)]
        n_sub: usize,
        #[arg(long, default_value_t = 12)]
        nodes_per_sub: usize,
        #[arg(long, default_value_t = 0.2)]
        courant: f64,
    },
    /// Gaussian pulse teleported between domains.
    PulseDemo {
        #[arg(long, default_value_t = 16)]
        ell: usize,
        /// Original resolution at l = 64.
        #[arg(long)]
        full_scale: bool,
        #[arg(long, default_value_t = 1e-8)]
        eps: f64,
    },
    /// Pole-count and residue scaling sweep with fits.
    Scalings {
        #[arg(long, value_delimiter = ',', default_values_t = SweepSpec::default().ells)]
        ells: Vec<usize>,
        #[arg(long, value_delimiter = ',', default_values_t = SweepSpec::default().ratios)]
        ratios: Vec<f64>,
    },
}

fn radius_str(r: f64) -> String {
    if r.is_infinite() {
        "inf".into()
    } else {
        r.to_string()
    }
}

fn record_grid(m: &mut Manifest, g: &GridSpec) {
    m.set("grid.y_max", g.y_max);
    m.set("grid.j", g.j);
    m.set("grid.y_min", g.y_min);
    m.set("grid.y_far", g.y_far);
    m.set("grid.n_geom", g.n_geom);
}

fn record_quad(m: &mut Manifest, q: &QuadratureSpec) {
    m.set("quad.n_composite", q.n_composite);
    m.set("quad.gk_order", q.gk_order);
    m.set("quad.spacing", format!("{:?}", q.spacing));
    m.set("quad.tol", format!("{:e}", q.tol));
    m.set("quad.max_refine", q.max_refine);
}

fn record_config(m: &mut Manifest, c: &CompressionConfig) {
    m.set("fit.epsilon", format!("{:e}", c.epsilon));
    m.set("fit.d_init", c.d_init);
    m.set("fit.d_max", c.d_max);
    m.set("fit.verify_grid_factor", c.verify_grid_factor);
    m.set("fit.max_outer_iters", c.max_outer_iters);
    m.set("fit.odd_probes", c.odd_probes);
    m.set("fit.weights", "1/|Phi|");
    m.set("lm.max_iters", c.lm.max_iters);
    m.set("lm.rel_tol", format!("{:e}", c.lm.rel_tol));
    m.set("lm.max_step", c.lm.max_step);
}

fn record_table(m: &mut Manifest, t: &PoleTable) {
    m.set("result.d", t.d());
    m.set(
        "result.epsilon_achieved",
        format!("{:e}", t.epsilon_achieved),
    );
    m.set("result.max_gamma", format!("{:e}", t.max_gamma()));
    m.set("result.min_gamma", format!("{:e}", t.min_gamma()));
}

struct Out {
    dir: PathBuf,
    manifest: Manifest,
    name: String,
}

impl Out {
    fn new(dir: &Path, name: &str) -> Result<Self> {
        fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
        Ok(Out {
            dir: dir.to_path_buf(),
            manifest: Manifest::new(name),
            name: name.to_string(),
        })
    }

    fn path(&self, file: &str) -> PathBuf {
        self.dir.join(file)
    }

    fn csv(&mut self, file: &str, header: &[&str], rows: &[Vec<f64>]) -> Result<()> {
        io::write_csv(&self.path(file), header, rows)?;
        self.manifest.set(&format!("output.{file}"), rows.len());
        Ok(())
    }

    fn table(&mut self, file: &str, t: &PoleTable) -> Result<()> {
        io::save_table(t, &self.path(file))?;
        self.manifest.set(&format!("output.{file}"), t.d());
        Ok(())
    }

    fn finish(self) -> Result<()> {
        self.manifest
            .save(&self.path(&format!("{}.manifest", self.name)))?;
        Ok(())
    }
}

fn run(cli: Cli) -> Result<()> {
    let command = match (cli.command, cli.seed_experiment) {
        (Some(c), _) => c,
        (None, Some(Seed::Fig6)) => Command::PulseDemo {
            ell: 16,
            full_scale: false,
            eps: 1e-8,
        },
        (None, Some(Seed::Fig7 | Seed::Fig8)) => Command::AweDemo {
            n_sub: 8,
            nodes_per_sub: 12,
            courant: 0.2,
        },
        (None, None) => {
            return Err(
                farfield::Error::InvalidArgument("no command given; see --help".into()).into(),
            )
        }
    };
    let dir = cli.out;
    match command {
        Command::Zeros { ell } => {
            let mut out = Out::new(&dir, "zeros")?;
            out.manifest.set("ell", ell);
            let z = macdonald_zeros(ell)?;
            let rows: Vec<Vec<f64>> = z
                .zeros_c64()
                .iter()
                .enumerate()
                .map(|(j, b)| vec![ell as f64, (j + 1) as f64, b.re, b.im])
                .collect();
            for r in &rows {
                println!("b{}{} = {:.10} {:+.10}i", ell, r[1], r[2], r[3]);
            }
            out.csv("zeros.csv", &["ell", "j", "Re(b)", "Im(b)"], &rows)?;
            out.finish()
        }
        Command::Residues { kernel } => {
            let mut out = Out::new(&dir, "residues")?;
            out.manifest.set("ell", kernel.ell);
            out.manifest.set("r1", kernel.r1);
            out.manifest.set("r2", radius_str(kernel.r2));
            out.manifest
                .set("precision", Precision::from(kernel.precision));
            let k = exact_residues(kernel.ell, kernel.r1, kernel.r2, Precision::Extended)?;
            let mut t = PoleTable::from(&k);
            if Precision::from(kernel.precision) == Precision::Double {
                t = t.to_double();
            }
            let rows: Vec<Vec<f64>> = k
                .poles_c64()
                .iter()
                .zip(k.residues_c64())
                .enumerate()
                .map(|(j, (b, a))| vec![(j + 1) as f64, b.re, b.im, a.re, a.im, a.norm()])
                .collect();
            out.manifest
                .set("result.max_residue", format!("{:e}", k.max_residue()));
            out.manifest
                .set("result.min_residue", format!("{:e}", k.min_residue()));
            out.manifest.set(
                "result.residue_sum",
                format!("{:e}", k.residue_sum().re.to_f64()),
            );
            out.csv(
                "residues.csv",
                &["j", "Re(beta)", "Im(beta)", "Re(a)", "Im(a)", "abs(a)"],
                &rows,
            )?;
            out.table("exact.table", &t)?;
            out.finish()
        }
        Command::EvalProfile { kernel } => {
            let mut out = Out::new(&dir, "eval-profile")?;
            kernel.manifest(&mut out.manifest);
            let set = phi_truth_profile(
                kernel.ell,
                kernel.r1,
                kernel.r2,
                &kernel.grid(),
                &kernel.quad(),
                kernel.precision.into(),
            )?;
            let rows: Vec<Vec<f64>> = (0..set.grid.len())
                .map(|i| {
                    let v = set.values[i].to_c64_pair();
                    vec![set.grid[i], v.0, v.1, set.weights[i]]
                })
                .collect();
            out.manifest.set(
                "result.max_error_estimate",
                format!("{:e}", set.max_error_estimate),
            );
            out.csv("profile.csv", &["y", "Re", "Im", "weight"], &rows)?;
            out.finish()
        }
        Command::Compress { kernel, fit } => {
            let mut out = Out::new(&dir, "compress")?;
            kernel.manifest(&mut out.manifest);
            let config = fit.config(&kernel);
            record_config(&mut out.manifest, &config);
            let (fit_set, check) = truth_sets(kernel.ell, kernel.r1, kernel.r2, &config)?;
            let stages = compress_ladder(&fit_set, &check, KernelKind::Teleport, 1, &config)?;
            let rows: Vec<Vec<f64>> = stages
                .iter()
                .map(|s| {
                    vec![
                        s.d as f64,
                        s.epsilon,
                        s.table.max_gamma(),
                        s.lm_iterations as f64,
                        s.probe as u8 as f64,
                    ]
                })
                .collect();
            out.csv(
                "ladder.csv",
                &["d", "epsilon", "max_gamma", "lm_iterations", "probe"],
                &rows,
            )?;
            let best = stages
                .iter()
                .map(|s| s.epsilon)
                .fold(f64::INFINITY, f64::min);
            out.manifest.set("result.best_epsilon", format!("{best:e}"));
            match accept(&stages, &config) {
                Ok(mut t) => {
                    annotate(&mut t, &config, &kernel.grid());
                    if Precision::from(kernel.precision) == Precision::Double {
                        t = t.to_double();
                    }
                    record_table(&mut out.manifest, &t);
                    out.table("kernel.table", &t)?;
                    out.finish()
                }
                Err(e) => {
                    out.manifest.set("result.error", &e);
                    out.finish()?;
                    Err(e.into())
                }
            }
        }
        Command::CompressFar {
            ell,
            p,
            eps,
            precision,
        } => {
            let mut out = Out::new(&dir, "compress-far")?;
            out.manifest.set("ell", ell);
            out.manifest.set("p", p);
            out.manifest.set("r1", 1.0);
            out.manifest.set("r2", 10f64.powi(p as i32 + 1));
            let config = CompressionConfig {
                epsilon: eps,
                truth_precision: precision.into(),
                ..Default::default()
            };
            record_config(&mut out.manifest, &config);
            record_grid(&mut out.manifest, &GridSpec::for_kernel(ell, 1.0));
            let t = compress_far(ell, p, &config)?;
            record_table(&mut out.manifest, &t);
            let rows: Vec<Vec<f64>> = t
                .betas_c64()
                .iter()
                .zip(t.gammas_c64())
                .map(|(b, g)| vec![b.re, b.im, g.re, g.im])
                .collect();
            out.csv(
                "poles.csv",
                &["Re(beta)", "Im(beta)", "Re(gamma)", "Im(gamma)"],
                &rows,
            )?;
            out.table("kernel.table", &t)?;
            out.finish()
        }
        Command::Teleport { table, input } => {
            let mut out = Out::new(&dir, "teleport")?;
            out.manifest.set("table", table.display());
            out.manifest.set("input", input.display());
            let k = io::load_table(&table)?;
            let ts = io::load_series(&input)?;
            let res = teleport_series(&ts, &k)?;
            out.manifest.set("kernel.ell", k.ell);
            out.manifest.set("kernel.r1", k.r1);
            out.manifest.set("kernel.r2", radius_str(k.r2));
            out.manifest.set("kernel.d", k.d());
            out.manifest.set(
                "kernel.epsilon_achieved",
                format!("{:e}", k.epsilon_achieved),
            );
            out.manifest.set("series.dt", format!("{:e}", ts.dt));
            out.manifest.set("series.samples", ts.len());
            io::save_series(&res, &out.path("teleported.csv"))?;
            out.manifest.set("output.teleported.csv", res.len());
            out.finish()
        }
        Command::AweDemo {
            n_sub,
            nodes_per_sub,
            courant,
        } => {
            let mut out = Out::new(&dir, "awe-demo")?;
            let cfg = AweConfig {
                n_sub,
                nodes_per_sub,
                courant,
                ..Default::default()
            };
            cfg.manifest(&mut out.manifest);
            let r = awe_experiment(&cfg)?;
            record_awe(&mut out.manifest, &r);
            out.csv("awe.csv", &AweResult::HEADER, &r.rows())?;
            io::save_series(&r.recorded, &out.path("recorded.csv"))?;
            io::save_series(&r.teleported, &out.path("teleported.csv"))?;
            out.finish()
        }
        Command::PulseDemo {
            ell,
            full_scale,
            eps,
        } => {
            let mut out = Out::new(&dir, "pulse-demo")?;
            let mut cfg = if full_scale {
                PulseConfig::full_scale()
            } else {
                PulseConfig {
                    ell,
                    ..Default::default()
                }
            };
            cfg.kernel_epsilon = eps;
            cfg.manifest(&mut out.manifest);
            let r = pulse_experiment(&cfg)?;
            out.manifest
                .set("result.amplitude", format!("{:e}", r.amplitude));
            for run in &r.runs {
                let b = run.b;
                out.manifest
                    .set(&format!("result.b{b}.kernel_d"), run.kernel.d());
                out.manifest.set(
                    &format!("result.b{b}.kernel_epsilon"),
                    format!("{:e}", run.kernel.epsilon_achieved),
                );
                out.manifest.set(
                    &format!("result.b{b}.raw_linf"),
                    format!("{:e}", run.raw_linf),
                );
                out.manifest.set(
                    &format!("result.b{b}.teleport_linf"),
                    format!("{:e}", run.teleport_linf),
                );
                out.table(&format!("kernel_b{b}.table"), &run.kernel)?;
            }
            let header = r.header();
            let h: Vec<&str> = header.iter().map(|s| s.as_str()).collect();
            out.csv("pulse.csv", &h, &r.rows())?;
            out.finish()
        }
        Command::Scalings { ells, ratios } => {
            let mut out = Out::new(&dir, "scalings")?;
            let spec = SweepSpec {
                ells,
                ratios,
                ..Default::default()
            };
            let config = sweep_config();
            out.manifest.set("sweep.ells", format!("{:?}", spec.ells));
            out.manifest
                .set("sweep.ratios", format!("{:?}", spec.ratios));
            out.manifest
                .set("sweep.epsilons", format!("{:?}", spec.epsilons));
            out.manifest.set("sweep.r1", spec.r1);
            record_config(&mut out.manifest, &config);
            out.manifest.set("grid", "default per (l, r1)");
            let recs = scaling_sweep(&spec, &config)?;
            let rows: Vec<Vec<f64>> = recs
                .iter()
                .map(|r| vec![r.ell as f64, r.d as f64, r.epsilon, r.ratio, r.max_gamma])
                .collect();
            out.csv(
                "scaling.csv",
                &["ell", "d", "epsilon", "ratio", "max_gamma"],
                &rows,
            )?;
            let fits = fit_scalings(&recs)?;
            let mut text = String::from("model, group, r_squared, rss, n, coefficients\n");
            for f in &fits {
                let c: Vec<String> = f.coefficients.iter().map(|v| format!("{v:e}")).collect();
                text.push_str(&format!(
                    "{}, {}, {:e}, {:e}, {}, {}\n",
                    f.model.as_str(),
                    f.group,
                    f.r_squared,
                    f.rss,
                    f.n,
                    c.join(" ")
                ));
            }
            fs::write(out.path("fits.csv"), text)?;
            out.manifest.set("output.fits.csv", fits.len());
            out.finish()
        }
    }
}

fn record_awe(m: &mut Manifest, r: &AweResult) {
    m.set("result.boundary_linf", format!("{:e}", r.boundary_linf));
    m.set("result.boundary_l1", format!("{:e}", r.boundary_l1));
    m.set("result.teleport_linf", format!("{:e}", r.teleport_linf));
    m.set("result.systematic_linf", format!("{:e}", r.systematic_linf));
    m.set(
        "result.convolution_linf",
        format!("{:e}", r.convolution_linf),
    );
    m.set("result.kernel_linf", r.kernel_linf);
    m.set("result.bound", format!("{:e}", r.bound));
    m.set("result.solver_dominated", r.solver_dominated());
    m.set("result.bound_holds", r.bound_holds());
}

trait PairExt {
    fn to_c64_pair(&self) -> (f64, f64);
}

impl PairExt for num_complex::Complex<farfield::precision::Dd> {
    fn to_c64_pair(&self) -> (f64, f64) {
        (self.re.to_f64(), self.im.to_f64())
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            let code = match e.downcast_ref::<farfield::Error>() {
                Some(fe) if fe.is_validation() => 2,
                Some(_) => 3,
                None => 2,
            };
            eprintln!("error: {e:#}");
            ExitCode::from(code)
        }
    }
}
