//! Command-line front end.
//!
//! Exit codes: 0 success, 2 usage or validation error, 3 I/O error,
//! 4 numerical failure (failed fit, empty photon stream).

use std::fmt;
use std::fs::File;
use std::io::{BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};
use serde_json::json;

use crate::dipole::{make_nv_emitter, Nv100Ensemble, SurfaceOrientation};
use crate::efficiency::{
    efficiency_100_averaged, efficiency_monte_carlo, quadrature_convergence, sweep_na, EfficiencyResult,
    MonteCarloConfig, QuadratureConfig,
};
use crate::error::Error;
use crate::interface::{CollectionOptics, Geometry, InterfaceConfig};
use crate::io::{self, Report};
use crate::photophysics::{
    correlate, enhancement_ratio, fit_saturation_with, hbt_split, saturation_intensity_reduction,
    simulate_two_level_stream, Channel, FitOptions, Ratio, SaturationFit, TwoLevelEmitterParams,
};

pub const EXIT_USAGE: i32 = 2;
pub const EXIT_IO: i32 = 3;
pub const EXIT_NUMERICAL: i32 = 4;

#[derive(Debug)]
pub struct CliError {
    pub code: i32,
    pub message: String,
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.message)
    }
}

impl std::error::Error for CliError {}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        let code = match e {
            Error::InvalidArgument(_) | Error::Parse(_) => EXIT_USAGE,
            Error::Io(_) => EXIT_IO,
            Error::FitFailure(_) | Error::EmptyStream(_) => EXIT_NUMERICAL,
        };
        Self {
            code,
            message: e.to_string(),
        }
    }
}

fn io_error(path: &Path, e: std::io::Error) -> CliError {
    CliError {
        code: EXIT_IO,
        message: format!("{}: {e}", path.display()),
    }
}

#[derive(Debug, Parser)]
#[command(name = "diamond-sil", version, about = "NV collection efficiency, HBT g2 and saturation analysis")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Collection efficiency vs NA for planar surface and SIL
    Sweep(SweepArgs),
    /// Collection efficiency at a single NA
    Efficiency(EfficiencyArgs),
    /// Fit R = R∞ I / (I + I_sat) to a count-rate file
    FitSat(FitSatArgs),
    /// g2(τ) histogram from simulated or recorded photon streams
    Hbt(HbtArgs),
    /// Write a simulated photon stream
    Simulate(SimulateArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum OutputFormat {
    Csv,
    Json,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum GeometryArg {
    Planar,
    Sil,
}

impl From<GeometryArg> for Geometry {
    fn from(g: GeometryArg) -> Self {
        match g {
            GeometryArg::Planar => Geometry::Planar,
            GeometryArg::Sil => Geometry::HemisphericalSil,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum MethodArg {
    Quad,
    Mc,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct IndexArgs {
    /// Refractive index of diamond
    #[arg(long = "nd", default_value_t = 2.4)]
    pub nd: f64,
    /// Refractive index of the collection medium
    #[arg(long = "nc", default_value_t = 1.0)]
    pub nc: f64,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct QuadArgs {
    #[arg(long, default_value_t = 128)]
    pub n_theta: usize,
    #[arg(long, default_value_t = 256)]
    pub n_phi: usize,
    #[arg(long, default_value_t = 1e-6)]
    pub rel_tol: f64,
    /// Strain azimuths averaged per NV orientation
    #[arg(long, default_value_t = 16)]
    pub strain_samples: usize,
}

impl QuadArgs {
    fn config(&self) -> Result<QuadratureConfig, CliError> {
        Ok(QuadratureConfig::new(self.n_theta, self.n_phi, self.rel_tol)?)
    }
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct SweepArgs {
    #[arg(long, default_value_t = 0.05)]
    pub na_min: f64,
    #[arg(long, default_value_t = 0.95)]
    pub na_max: f64,
    #[arg(long, default_value_t = 19)]
    pub steps: usize,
    #[command(flatten)]
    pub indices: IndexArgs,
    #[command(flatten)]
    pub quad: QuadArgs,
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = OutputFormat::Csv)]
    pub format: OutputFormat,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct EfficiencyArgs {
    #[arg(long, value_enum, default_value_t = GeometryArg::Sil)]
    pub geometry: GeometryArg,
    #[arg(long, default_value_t = 0.85)]
    pub na: f64,
    #[command(flatten)]
    pub indices: IndexArgs,
    #[arg(long, value_enum, default_value_t = MethodArg::Quad)]
    pub method: MethodArg,
    #[arg(long, default_value_t = 1_000_000)]
    pub rays: u64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value_t = MonteCarloConfig::DEFAULT_PARTITIONS)]
    pub partitions: usize,
    #[command(flatten)]
    pub quad: QuadArgs,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct FitSatArgs {
    /// CSV with header `intensity_uW,rate_cps[,rate_err_cps]`
    #[arg(long, short)]
    pub input: PathBuf,
    /// Fit an additional linear background term c·I
    #[arg(long)]
    pub background: bool,
    /// Earlier fit-sat JSON report to compare against
    #[arg(long)]
    pub compare: Option<PathBuf>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct EmitterArgs {
    /// Excitation rate, 1/s
    #[arg(long, default_value_t = 2e7)]
    pub pump_rate: f64,
    /// Excited-state decay rate, 1/s
    #[arg(long, default_value_t = 8e7)]
    pub decay_rate: f64,
    #[arg(long, default_value_t = 0.1)]
    pub detection_efficiency: f64,
    /// Uncorrelated background, counts/s
    #[arg(long, default_value_t = 0.0)]
    pub background_rate: f64,
    /// Set the background so that this fraction of counts is signal
    #[arg(long, conflicts_with = "background_rate")]
    pub signal_fraction: Option<f64>,
    /// Acquisition time, seconds
    #[arg(long, default_value_t = 1.0)]
    pub duration: f64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
}

impl EmitterArgs {
    fn params(&self) -> Result<TwoLevelEmitterParams, CliError> {
        let p = TwoLevelEmitterParams::new(
            self.pump_rate,
            self.decay_rate,
            self.detection_efficiency,
            self.background_rate,
        )?;
        Ok(match self.signal_fraction {
            Some(rho) => p.with_signal_fraction(rho)?,
            None => p,
        })
    }
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct HbtArgs {
    /// Two stream CSVs (detector A, detector B) instead of simulating
    #[arg(long, num_args = 2, value_names = ["A", "B"])]
    pub streams: Option<Vec<PathBuf>>,
    /// Acquisition time of the stream files; defaults to the last timestamp
    #[arg(long, requires = "streams")]
    pub stream_duration: Option<f64>,
    #[command(flatten)]
    pub emitter: EmitterArgs,
    #[arg(long, default_value_t = 0.5)]
    pub bin_width_ns: f64,
    #[arg(long, default_value_t = 100.0)]
    pub tau_max_ns: f64,
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = OutputFormat::Csv)]
    pub format: OutputFormat,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct SimulateArgs {
    #[command(flatten)]
    pub emitter: EmitterArgs,
    /// Split through a 50/50 beamsplitter into `<out>.a.csv` / `<out>.b.csv`
    #[arg(long, requires = "out")]
    pub split: bool,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

fn write_output(out: Option<&Path>, stdout: &mut dyn Write, f: impl FnOnce(&mut dyn Write) -> crate::Result<()>) -> Result<(), CliError> {
    match out {
        Some(path) => {
            let file = File::create(path).map_err(|e| io_error(path, e))?;
            let mut w = BufWriter::new(file);
            f(&mut w)?;
            w.flush().map_err(|e| io_error(path, e))
        }
        None => Ok(f(stdout)?),
    }
}

fn open(path: &Path) -> Result<BufReader<File>, CliError> {
    File::open(path).map(BufReader::new).map_err(|e| io_error(path, e))
}

/// Run one parsed command, writing primary output to `out` or `stdout`.
pub fn run(cli: &Cli, stdout: &mut dyn Write, stderr: &mut dyn Write) -> Result<(), CliError> {
    match &cli.command {
        Command::Sweep(a) => cmd_sweep(a, stdout),
        Command::Efficiency(a) => cmd_efficiency(a, stdout),
        Command::FitSat(a) => cmd_fit_sat(a, stdout),
        Command::Hbt(a) => cmd_hbt(a, stdout, stderr),
        Command::Simulate(a) => cmd_simulate(a, stdout),
    }
}

pub fn cmd_sweep(args: &SweepArgs, stdout: &mut dyn Write) -> Result<(), CliError> {
    let indices = InterfaceConfig::new(args.indices.nd, args.indices.nc, Geometry::Planar)?;
    let quad = args.quad.config()?;
    let curve = sweep_na(&indices, args.na_min, args.na_max, args.steps, &quad, args.quad.strain_samples)?;
    write_output(args.out.as_deref(), stdout, |w| match args.format {
        OutputFormat::Csv => io::write_curve_csv(&curve, w),
        OutputFormat::Json => io::write_json(
            &Report {
                config: args,
                result: &curve,
                diagnostics: json!({ "rows": curve.rows.len() }),
            },
            w,
        ),
    })
}

pub fn cmd_efficiency(args: &EfficiencyArgs, stdout: &mut dyn Write) -> Result<(), CliError> {
    let interface = InterfaceConfig::new(args.indices.nd, args.indices.nc, args.geometry.into())?;
    let optics = CollectionOptics::new(args.na)?;
    let quad = args.quad.config()?;
    let (result, diagnostics): (EfficiencyResult, _) = match args.method {
        MethodArg::Quad => {
            let r = efficiency_100_averaged(&interface, &optics, &quad, args.quad.strain_samples)?;
            let probe = make_nv_emitter(SurfaceOrientation::Cut100, 0, 0.0)?;
            let change = quadrature_convergence(&probe, &interface, &optics, &quad)?;
            (
                r,
                json!({
                    "quadrature_rel_change_on_refinement": change,
                    "converged": change < quad.target_rel_tol,
                }),
            )
        }
        MethodArg::Mc => {
            let mc = MonteCarloConfig {
                partitions: args.partitions,
                ..MonteCarloConfig::new(args.rays, args.seed)?
            };
            let ensemble = Nv100Ensemble::new(args.quad.strain_samples)?;
            let r = efficiency_monte_carlo(&ensemble, &interface, &optics, &mc)?;
            let se = r.std_error.unwrap_or(0.0);
            (r, json!({ "relative_std_error": if r.eta > 0.0 { se / r.eta } else { 0.0 } }))
        }
    };
    write_output(args.out.as_deref(), stdout, |w| {
        io::write_json(
            &Report {
                config: args,
                result: &result,
                diagnostics,
            },
            w,
        )
    })
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct FitSatResult {
    pub fit: SaturationFit,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub comparison: Option<FitComparison>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct FitComparison {
    /// `R∞(this) / R∞(other)`
    pub enhancement_ratio: Ratio,
    /// `I_sat(other) / I_sat(this)`
    pub saturation_intensity_reduction: Ratio,
}

pub fn cmd_fit_sat(args: &FitSatArgs, stdout: &mut dyn Write) -> Result<(), CliError> {
    let data = io::read_saturation_csv(open(&args.input)?)?;
    let options = FitOptions {
        linear_background: args.background,
        ..FitOptions::default()
    };
    let fit = fit_saturation_with(&data, &options)?;
    let comparison = match &args.compare {
        Some(path) => {
            let other: Report<serde_json::Value, FitSatResult, serde_json::Value> = io::read_json(open(path)?)?;
            Some(FitComparison {
                enhancement_ratio: enhancement_ratio(&fit, &other.result.fit)?,
                saturation_intensity_reduction: saturation_intensity_reduction(&fit, &other.result.fit)?,
            })
        }
        None => None,
    };
    let diagnostics = json!({
        "points": data.points.len(),
        "iterations": fit.iterations,
        "reduced_chi_squared": fit.chi_squared / fit.dof.max(1) as f64,
    });
    let report = Report {
        config: args,
        result: FitSatResult { fit, comparison },
        diagnostics,
    };
    write_output(args.out.as_deref(), stdout, |w| io::write_json(&report, w))
}

pub fn cmd_hbt(args: &HbtArgs, stdout: &mut dyn Write, stderr: &mut dyn Write) -> Result<(), CliError> {
    let (a, b, expected) = match &args.streams {
        Some(paths) => {
            let a = io::read_stream_csv(open(&paths[0])?, args.stream_duration, Channel::A)?;
            let b = io::read_stream_csv(open(&paths[1])?, args.stream_duration, Channel::B)?;
            (a, b, None)
        }
        None => {
            let params = args.emitter.params()?;
            let stream = simulate_two_level_stream(&params, args.emitter.duration, args.emitter.seed)?;
            let (a, b) = hbt_split(&stream, args.emitter.seed.wrapping_add(1));
            let rho = params.signal_fraction();
            (a, b, Some((params, rho)))
        }
    };
    let hist = correlate(&a, &b, args.bin_width_ns * 1e-9, args.tau_max_ns * 1e-9)?;
    let rows = io::histogram_rows(&hist);
    let g2_zero = hist.g2_at_zero();
    write_output(args.out.as_deref(), stdout, |w| match args.format {
        OutputFormat::Csv => io::write_histogram_csv(&rows, w),
        OutputFormat::Json => io::write_json(
            &Report {
                config: args,
                result: json!({ "g2_zero": g2_zero, "histogram": rows }),
                diagnostics: json!({
                    "events_a": a.len(),
                    "events_b": b.len(),
                    "poisson_level": hist.poisson_level,
                    "signal_fraction": expected.map(|(_, rho)| rho),
                }),
            },
            w,
        ),
    })?;
    let line = format!("g2(0) = {g2_zero:.4} ± {:.4}", hist.g2_std_error()[hist.zero_bin()]);
    let sink: &mut dyn Write = if args.out.is_some() { stdout } else { stderr };
    writeln!(sink, "{line}").map_err(|e| CliError {
        code: EXIT_IO,
        message: e.to_string(),
    })
}

pub fn cmd_simulate(args: &SimulateArgs, stdout: &mut dyn Write) -> Result<(), CliError> {
    let params = args.emitter.params()?;
    let stream = simulate_two_level_stream(&params, args.emitter.duration, args.emitter.seed)?;
    match (&args.out, args.split) {
        (Some(out), true) => {
            let (a, b) = hbt_split(&stream, args.emitter.seed.wrapping_add(1));
            let stem = out.with_extension("");
            for (s, tag) in [(a, "a"), (b, "b")] {
                let path = PathBuf::from(format!("{}.{tag}.csv", stem.display()));
                write_output(Some(&path), stdout, |w| io::write_stream_csv(&s, w))?;
            }
            Ok(())
        }
        _ => write_output(args.out.as_deref(), stdout, |w| io::write_stream_csv(&stream, w)),
    }
}
