//! `scatterbound` command-line front end.

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use log::info;

use scatterbound::forward::{far_field_matrix, ForwardConfig};
use scatterbound::inversion_bounds::{
    calibrate_orientation, constant_bound_search, linear_refinement, linear_test_family, reduced_offsets,
    reduced_slopes, default_offsets, default_slopes, synthesize_linear_bank, uniform_values, Annulus, ConstantBank,
    Orientation, SearchConfig, DEFAULT_INIT_MAGNITUDE, DEFAULT_SAMPLES_PER_EDGE,
};
use scatterbound::inversion_fm::{
    fm_indicator_map, msharp_indicator_map_with, synthesized_psd_tol, IndicatorMap, SamplingGrid, DEFAULT_ALPHA,
};
use scatterbound::io;
use scatterbound::model::{ComputationalGrid, ContrastField, DirectionSet, Rect, WaveContext};
use scatterbound::operators::{operator_diagnostics, FarFieldMatrix};
use scatterbound::spectral::{eig_general, PicardExponent};
use scatterbound::{Error, Result};

const EXIT_PRECONDITION: u8 = 2;
const EXIT_NUMERICAL: u8 = 3;
const EXIT_USAGE: u8 = 64;

#[derive(Parser)]
#[command(name = "scatterbound", version, about = "Inverse medium scattering: far field synthesis, support indicators and contrast bounds")]
struct Cli {
    /// Worker threads (default: logical cores).
    #[arg(long, global = true, env = "SCATTERBOUND_THREADS")]
    threads: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Synthesise the far field operator of a contrast and write an ffo-v1 file.
    Forward {
        #[command(flatten)]
        setup: Setup,
        #[command(flatten)]
        solver: Solver,
        /// Contrast: qc, qr, qv, demo, zero, or a JSON descriptor file.
        #[arg(long)]
        contrast: String,
        #[arg(long)]
        out: PathBuf,
    },
    /// Eigenvalues of the weighted far field operator and operator diagnostics.
    Spectrum {
        #[arg(long)]
        data: PathBuf,
        /// CSV with columns index,re,im,abs,residual.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Factorization-method indicator of the scatterer support.
    ShapeFm {
        #[arg(long)]
        data: PathBuf,
        #[command(flatten)]
        sampling: Sampling,
    },
    /// Indicator of the support of a perturbation of a known background.
    ShapeMsharp {
        #[arg(long)]
        data: PathBuf,
        /// Background contrast, same syntax as `forward --contrast`.
        #[arg(long)]
        background: String,
        #[command(flatten)]
        solver: Solver,
        #[command(flatten)]
        sampling: Sampling,
        /// Relative PSD tolerance for M# (default: 10 × solver tolerance).
        #[arg(long)]
        psd_tol: Option<f64>,
        /// Power of the M# eigenvalues in the Picard sum.
        #[arg(long, value_enum, default_value_t = Exponent::One)]
        exponent: Exponent,
    },
    /// Constant lower and upper bounds on the boundary values of the contrast.
    Bounds {
        #[arg(long)]
        data: PathBuf,
        /// Constant bank directory.
        #[arg(long)]
        bank: PathBuf,
        #[command(flatten)]
        annulus: AnnulusArgs,
        #[arg(long, default_value_t = 0.1)]
        step: f64,
        /// Skip calibration and use this orientation.
        #[arg(long)]
        orientation: Option<Orientation>,
        /// CSV with columns c,m_plus,m_minus,verdict.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Pointwise boundary bounds from a bank of linear test contrasts.
    BoundsLinear {
        #[arg(long)]
        data: PathBuf,
        /// Linear bank directory.
        #[arg(long)]
        bank: PathBuf,
        /// Constant bank used to calibrate the orientation.
        #[arg(long)]
        const_bank: Option<PathBuf>,
        #[arg(long)]
        orientation: Option<Orientation>,
        #[command(flatten)]
        annulus: AnnulusArgs,
        #[arg(long, default_value_t = DEFAULT_SAMPLES_PER_EDGE)]
        per_edge: usize,
        #[arg(long, default_value_t = DEFAULT_INIT_MAGNITUDE)]
        init_magnitude: f64,
        /// CSV with columns s_arclength,x,y,q_minus,q_plus.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Determine which eigenvalue count vanishes for a test contrast below the data.
    Calibrate {
        #[command(flatten)]
        setup: Setup,
        #[command(flatten)]
        solver: Solver,
        #[command(flatten)]
        annulus: AnnulusArgs,
        /// Reference contrast with known boundary value `b`.
        #[arg(long, default_value = "qc")]
        reference: String,
        #[arg(long, default_value_t = 0.4)]
        b: f64,
        /// Constant probe values; all must yield the same orientation.
        #[arg(long, value_delimiter = ',', default_values_t = [0.0, 0.8])]
        probe: Vec<f64>,
        /// JSON file recording the orientation and annulus.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Synthesise a contrast and print its operator diagnostics.
    Selftest {
        #[command(flatten)]
        setup: Setup,
        #[command(flatten)]
        solver: Solver,
        #[arg(long, default_value = "zero")]
        contrast: String,
        /// Largest acceptable diagnostic residual.
        #[arg(long, default_value_t = 1e-3)]
        max_residual: f64,
    },
    /// Precompute a bank of test-contrast operators.
    Bank {
        #[command(flatten)]
        setup: Setup,
        #[command(flatten)]
        solver: Solver,
        #[arg(long, value_enum)]
        kind: BankKind,
        /// Constant values as `lo:hi:count`.
        #[arg(long, default_value = "-0.4:1.5:20")]
        values: String,
        /// Linear family: 5 slopes × 6 offsets instead of 11 × 11.
        #[arg(long)]
        reduced: bool,
        #[arg(long, default_value_t = 12)]
        n_points: usize,
        #[arg(long, default_value_t = 0.7)]
        half_width: f64,
        #[arg(long)]
        out: PathBuf,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum Exponent {
    One,
    Half,
}

impl From<Exponent> for PicardExponent {
    fn from(e: Exponent) -> Self {
        match e {
            Exponent::One => PicardExponent::One,
            Exponent::Half => PicardExponent::Half,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum BankKind {
    Const,
    Linear,
}

#[derive(Args)]
struct Setup {
    #[arg(long, default_value_t = 2.0 * std::f64::consts::PI)]
    k: f64,
    #[arg(long, default_value_t = 32)]
    n_dir: usize,
}

#[derive(Args)]
struct Solver {
    /// Grid points per axis.
    #[arg(long, default_value_t = 256)]
    grid: usize,
    /// Half-width of the computational box.
    #[arg(long, default_value_t = 2.0)]
    box_radius: f64,
    /// GMRES relative residual tolerance.
    #[arg(long, default_value_t = 1e-8)]
    tol: f64,
}

#[derive(Args)]
struct AnnulusArgs {
    #[arg(long, default_value_t = 1e-8)]
    rmin: f64,
    #[arg(long, default_value_t = 1e-2)]
    rmax: f64,
}

#[derive(Args)]
struct Sampling {
    /// Sampling box `x_min,x_max,y_min,y_max`.
    #[arg(long, value_delimiter = ',', num_args = 4, default_values_t = [-1.2, 1.2, -1.2, 1.2])]
    bbox: Vec<f64>,
    #[arg(long, default_value_t = 61)]
    resolution: usize,
    #[arg(long, default_value_t = DEFAULT_ALPHA)]
    alpha: f64,
    /// CSV with columns x,y,value.
    #[arg(long)]
    csv: Option<PathBuf>,
    /// 8-bit binary PGM image.
    #[arg(long)]
    pgm: Option<PathBuf>,
}

impl Setup {
    fn build(&self) -> Result<(WaveContext, DirectionSet)> {
        Ok((WaveContext::new(self.k)?, DirectionSet::new(self.n_dir)?))
    }
}

impl Solver {
    fn config(&self) -> Result<ForwardConfig> {
        let cfg = ForwardConfig::with_grid(ComputationalGrid::new(self.box_radius, self.grid)?).with_tol(self.tol);
        cfg.validate()?;
        Ok(cfg)
    }
}

impl AnnulusArgs {
    fn annulus(&self) -> Result<Annulus> {
        Annulus::new(self.rmin, self.rmax)
    }
}

impl Sampling {
    fn grid(&self) -> Result<SamplingGrid> {
        let b = &self.bbox;
        SamplingGrid::new(
            Rect {
                x_min: b[0],
                x_max: b[1],
                y_min: b[2],
                y_max: b[3],
            },
            self.resolution,
        )
    }

    fn export(&self, map: &IndicatorMap) -> Result<()> {
        if let Some(path) = &self.csv {
            io::write_file(path, io::indicator_csv(map).as_bytes())?;
        }
        if let Some(path) = &self.pgm {
            io::write_file(path, &io::indicator_pgm(map))?;
        }
        let best = (0..map.values.len()).find(|&i| map.values[i] == 1.0).unwrap_or(0);
        let p = map.grid.point(best);
        println!("max at ({}, {})", p[0], p[1]);
        Ok(())
    }
}

fn parse_contrast(spec: &str) -> Result<ContrastField> {
    Ok(match spec {
        "qc" => ContrastField::paper_qc(),
        "qr" => ContrastField::PaperQr,
        "qv" => ContrastField::paper_qv(),
        "demo" => ContrastField::SignChangingDemo,
        "zero" => ContrastField::zero(),
        path => io::read_contrast(Path::new(path))?,
    })
}

fn parse_range(spec: &str) -> Result<Vec<f64>> {
    let bad = || Error::Precondition(format!("expected lo:hi:count, got {spec:?}"));
    let parts: Vec<&str> = spec.split(':').collect();
    let [lo, hi, count] = parts.as_slice() else {
        return Err(bad());
    };
    let lo: f64 = lo.parse().map_err(|_| bad())?;
    let hi: f64 = hi.parse().map_err(|_| bad())?;
    let count: usize = count.parse().map_err(|_| bad())?;
    if count == 0 || lo.is_nan() || hi.is_nan() || lo > hi {
        return Err(bad());
    }
    Ok(uniform_values(lo, hi, count))
}

fn run(command: Command) -> Result<u8> {
    match command {
        Command::Forward {
            setup,
            solver,
            contrast,
            out,
        } => {
            let (ctx, dirs) = setup.build()?;
            let q = parse_contrast(&contrast)?;
            let f = far_field_matrix(&ctx, &q, &dirs, &solver.config()?)?;
            io::ffo_write(&out, &f)?;
            println!("wrote {} (k = {}, n = {})", out.display(), ctx.k(), dirs.len());
        }
        Command::Spectrum { data, out } => {
            let f = io::ffo_read(&data)?;
            let spec = eig_general(&f.weighted())?;
            let d = operator_diagnostics(&f);
            println!(
                "unitarity={:e} normality={:e} reciprocity={:e}",
                d.unitarity, d.normality, d.reciprocity
            );
            println!("eigenvalues={} max_residual={:e}", spec.len(), spec.max_residual());
            if let Some(path) = out {
                io::write_file(&path, io::spectrum_csv(&spec).as_bytes())?;
            }
        }
        Command::ShapeFm { data, sampling } => {
            let f = io::ffo_read(&data)?;
            let map = fm_indicator_map(&f, &sampling.grid()?, sampling.alpha)?;
            sampling.export(&map)?;
        }
        Command::ShapeMsharp {
            data,
            background,
            solver,
            sampling,
            psd_tol,
            exponent,
        } => {
            let f1 = io::ffo_read(&data)?;
            let q2 = parse_contrast(&background)?;
            let cfg = solver.config()?;
            let tol = psd_tol.unwrap_or_else(|| synthesized_psd_tol(&cfg));
            let map = msharp_indicator_map_with(&f1, &q2, &sampling.grid()?, sampling.alpha, &cfg, tol, exponent.into())?;
            sampling.export(&map)?;
        }
        Command::Bounds {
            data,
            bank,
            annulus,
            step,
            orientation,
            out,
        } => {
            let f = io::ffo_read(&data)?;
            let bank = io::read_constant_bank(&bank)?;
            check_bank(&f, bank.entries().iter().map(|(_, op)| op))?;
            let annulus = annulus.annulus()?;
            let orientation = match orientation {
                Some(o) => o,
                None => bank.calibrate(annulus)?,
            };
            let values = bank.values();
            let cfg = SearchConfig {
                step,
                c_lo: values[0],
                c_hi: values[values.len() - 1],
                orientation,
                annulus,
            };
            let result = constant_bound_search(&f, &bank, cfg)?;
            if let Some(path) = out {
                io::write_file(&path, io::bounds_csv(&result).as_bytes())?;
            }
            println!("orientation={orientation}");
            println!("c_lo={} c_hi={}", result.c_star, result.c_upper);
        }
        Command::BoundsLinear {
            data,
            bank,
            const_bank,
            orientation,
            annulus,
            per_edge,
            init_magnitude,
            out,
        } => {
            let f = io::ffo_read(&data)?;
            let annulus = annulus.annulus()?;
            let bank = io::read_linear_bank(&bank)?;
            check_bank(&f, bank.iter().map(|(_, op)| op))?;
            let orientation = match (orientation, const_bank) {
                (Some(o), _) => o,
                (None, Some(dir)) => {
                    let constants = io::read_constant_bank(&dir)?;
                    check_bank(&f, constants.entries().iter().map(|(_, op)| op))?;
                    constants.calibrate(annulus)?
                }
                (None, None) => {
                    return Err(Error::Precondition(
                        "bounds-linear needs --orientation or --const-bank for calibration".into(),
                    ))
                }
            };
            let trace = linear_refinement(&f, &bank, orientation, annulus, init_magnitude, per_edge)?;
            if let Some(path) = out {
                io::write_file(&path, io::trace_csv(&trace).as_bytes())?;
            }
            let lo = trace.q_minus.iter().cloned().fold(f64::INFINITY, f64::min);
            let hi = trace.q_plus.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
            println!("orientation={orientation}");
            println!("q_minus_min={lo} q_plus_max={hi}");
        }
        Command::Calibrate {
            setup,
            solver,
            annulus,
            reference,
            b,
            probe,
            out,
        } => {
            let (ctx, dirs) = setup.build()?;
            let cfg = solver.config()?;
            let q = parse_contrast(&reference)?;
            let annulus = annulus.annulus()?;
            let mut found: Option<Orientation> = None;
            for c in &probe {
                let o = calibrate_orientation(&ctx, &dirs, &cfg, &q, b, *c, annulus)?;
                info!("probe {c}: {o}");
                if found.is_some_and(|prev| prev != o) {
                    return Err(Error::CalibrationIndeterminate { m_plus: 0, m_minus: 0 });
                }
                found = Some(o);
            }
            let orientation = found.ok_or_else(|| Error::Precondition("no calibration probe given".into()))?;
            if let Some(path) = out {
                let record = serde_json::json!({
                    "orientation": orientation,
                    "r_min": annulus.r_min,
                    "r_max": annulus.r_max,
                    "reference": q,
                    "b": b,
                    "probes": probe,
                });
                io::write_file(&path, serde_json::to_string_pretty(&record)?.as_bytes())?;
            }
            println!("orientation={orientation}");
        }
        Command::Selftest {
            setup,
            solver,
            contrast,
            max_residual,
        } => {
            let (ctx, dirs) = setup.build()?;
            let q = parse_contrast(&contrast)?;
            let f = far_field_matrix(&ctx, &q, &dirs, &solver.config()?)?;
            let d = operator_diagnostics(&f);
            println!("unitarity={} normality={} reciprocity={}", d.unitarity, d.normality, d.reciprocity);
            let worst = d.unitarity.max(d.normality).max(d.reciprocity);
            if worst > max_residual {
                eprintln!("selftest failed: residual {worst:e} exceeds {max_residual:e}");
                return Ok(EXIT_NUMERICAL);
            }
        }
        Command::Bank {
            setup,
            solver,
            kind,
            values,
            reduced,
            n_points,
            half_width,
            out,
        } => {
            let (ctx, dirs) = setup.build()?;
            let cfg = solver.config()?;
            let count = match kind {
                BankKind::Const => {
                    let support = Rect::square([0.0, 0.0], half_width);
                    let bank = ConstantBank::synthesize(&ctx, &dirs, &cfg, &support, &parse_range(&values)?)?;
                    io::write_constant_bank(&out, &bank)?;
                    bank.len()
                }
                BankKind::Linear => {
                    let (slopes, offsets) = if reduced {
                        (reduced_slopes(), reduced_offsets())
                    } else {
                        (default_slopes(), default_offsets())
                    };
                    let family = linear_test_family(n_points, &slopes, &offsets, half_width)?;
                    let bank = synthesize_linear_bank(&ctx, &dirs, &cfg, &family)?;
                    io::write_linear_bank(&out, &bank)?;
                    bank.len()
                }
            };
            println!("wrote {count} operators to {}", out.display());
        }
    }
    Ok(0)
}

/// Rejects bank operators synthesised at a different `k` or direction count.
fn check_bank<'a>(data: &FarFieldMatrix, bank: impl IntoIterator<Item = &'a FarFieldMatrix>) -> Result<()> {
    for f in bank {
        if f.ctx.k() != data.ctx.k() || f.n() != data.n() {
            return Err(Error::Precondition(format!(
                "bank operator (k = {}, n = {}) does not match the data (k = {}, n = {})",
                f.ctx.k(),
                f.n(),
                data.ctx.k(),
                data.n()
            )));
        }
    }
    Ok(())
}

fn exit_code(e: &Error) -> u8 {
    if e.is_numerical() {
        EXIT_NUMERICAL
    } else {
        EXIT_PRECONDITION
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(EXIT_USAGE)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    if let Some(n) = cli.threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n).build_global() {
            eprintln!("error: cannot configure {n} threads: {e}");
            return ExitCode::from(EXIT_USAGE);
        }
    }
    match run(cli.command) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}
