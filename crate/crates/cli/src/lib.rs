//! Command-line front end for the curvemom wire solver: configuration,
//! the experiment recipes and their file outputs.

// negated float comparisons are used on purpose: they also reject NaN
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod config;
pub mod output;
pub mod plot;
pub mod recipes;

use std::ffi::OsString;
use std::path::PathBuf;

use anyhow::{Context, Result};
use clap::{Args, Parser, Subcommand};
use curvemom_core::format::{fmt9, fmt9_trim};
use curvemom_core::geometry::{build_curved_monopole, build_linear_array, ArrayLayout};
use curvemom_core::mom::GroundModel;
use curvemom_core::nec::export_nec_cards;

use config::{config_error, ConfigError, Format, Overrides, RunConfig, SweepParameter};
use output::OutputDir;

pub const EXIT_OK: i32 = 0;
pub const EXIT_CONFIG: i32 = 1;
pub const EXIT_PARTIAL: i32 = 2;
pub const EXIT_SOLVER: i32 = 3;

#[derive(Debug, Parser)]
#[command(name = "curvemom", version, about = "Curved-monopole wire antenna experiments")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Sweep the arc curvature at fixed straight length.
    SweepKappa(CommonArgs),
    /// Sweep the straight-section length at fixed curvature.
    SweepStraight(CommonArgs),
    /// Compare the configured design against the straight monopole.
    Compare(CommonArgs),
    /// Steered linear array of curved and straight elements.
    Array(CommonArgs),
    /// Render CSV files as SVG plots.
    Plot(PlotArgs),
    /// Write NEC card decks for the element, its reference and the array.
    ExportNec(CommonArgs),
}

#[derive(Debug, Args, Clone, Default)]
pub struct CommonArgs {
    /// TOML run configuration; flags override it.
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long)]
    pub freq_start: Option<f64>,
    #[arg(long)]
    pub freq_stop: Option<f64>,
    #[arg(long)]
    pub freq_points: Option<usize>,
    /// Arc curvature (1/m).
    #[arg(long, allow_negative_numbers = true)]
    pub kappa: Option<f64>,
    #[arg(long)]
    pub l_straight: Option<f64>,
    #[arg(long)]
    pub l_ref: Option<f64>,
    #[arg(long)]
    pub n_elements: Option<usize>,
    #[arg(long)]
    pub spacing: Option<f64>,
    #[arg(long)]
    pub steer_theta_deg: Option<f64>,
    /// pec-infinite or free-space.
    #[arg(long, value_parser = parse_ground)]
    pub ground: Option<GroundModel>,
    /// Comma-separated subset of csv,s1p,json,svg.
    #[arg(long, value_delimiter = ',')]
    pub formats: Option<Vec<Format>>,
    /// Comma-separated sweep values.
    #[arg(long, value_delimiter = ',', allow_negative_numbers = true)]
    pub values: Option<Vec<f64>>,
}

#[derive(Debug, Args, Clone)]
pub struct PlotArgs {
    /// CSV files: first column is x, every other column one series.
    #[arg(required = true)]
    pub inputs: Vec<PathBuf>,
    #[arg(long)]
    pub out: PathBuf,
    /// Polar plot of (angle in degrees, dB) instead of a line plot.
    #[arg(long)]
    pub polar: bool,
}

fn parse_ground(s: &str) -> std::result::Result<GroundModel, String> {
    match s {
        "pec-infinite" => Ok(GroundModel::InfinitePec),
        "free-space" => Ok(GroundModel::FreeSpace),
        other => Err(format!("unknown ground `{other}` (expected pec-infinite or free-space)")),
    }
}

impl CommonArgs {
    fn overrides(&self) -> Overrides {
        Overrides {
            out: self.out.clone(),
            freq_start: self.freq_start,
            freq_stop: self.freq_stop,
            freq_points: self.freq_points,
            kappa: self.kappa,
            l_straight: self.l_straight,
            l_ref: self.l_ref,
            n_elements: self.n_elements,
            spacing: self.spacing,
            steer_theta_deg: self.steer_theta_deg,
            ground: self.ground,
            formats: self.formats.clone(),
            values: self.values.clone(),
        }
    }

    /// Config file (or defaults) with the flags applied, validated.
    pub fn resolve(&self) -> Result<RunConfig> {
        let mut cfg = match &self.config {
            Some(p) => RunConfig::load(p)?,
            None => RunConfig::default(),
        };
        cfg.apply(&self.overrides());
        cfg.validate()?;
        Ok(cfg)
    }
}

/// Maps an error chain to the process exit code.
pub fn exit_code_for(err: &anyhow::Error) -> i32 {
    for cause in err.chain() {
        if cause.is::<ConfigError>() || cause.is::<std::io::Error>() || cause.is::<csv::Error>() {
            return EXIT_CONFIG;
        }
        if cause.is::<curvemom_core::Error>() {
            return EXIT_SOLVER;
        }
    }
    EXIT_CONFIG
}

/// Geometry that is not being swept must be buildable up front.
fn check_geometry(cfg: &RunConfig) -> Result<()> {
    cfg.geometry
        .validate()
        .map_err(|e| config_error(format!("geometry: {e}")))
}

/// Runs one command and returns its exit code on success paths.
pub fn execute(cli: &Cli) -> Result<i32> {
    match &cli.command {
        Command::SweepKappa(a) => sweep(a, SweepParameter::Kappa, "sweep-kappa"),
        Command::SweepStraight(a) => sweep(a, SweepParameter::LStraight, "sweep-straight"),
        Command::Compare(a) => {
            let cfg = a.resolve()?;
            check_geometry(&cfg)?;
            let c = recipes::run_compare(&cfg)?;
            let mut out = OutputDir::create(&cfg.out)?;
            output::write_manifest(&mut out, "compare", &cfg)?;
            output::write_compare(&mut out, &cfg, &c)?;
            let d = &c.deltas;
            println!(
                "peak realized gain: reference {} dBi, optimized {} dBi",
                fmt9(c.reference.peak_rg_dbi()),
                fmt9(c.optimized.peak_rg_dbi())
            );
            println!(
                "delta peak {} dB ({}%), delta bandwidth {} Hz",
                fmt9(d.delta_peak_rg_db),
                fmt9(d.percent_increase),
                fmt9(d.delta_bandwidth_hz)
            );
            Ok(EXIT_OK)
        }
        Command::Array(a) => {
            let cfg = a.resolve()?;
            check_geometry(&cfg)?;
            let r = recipes::run_array(&cfg)?;
            let mut out = OutputDir::create(&cfg.out)?;
            output::write_manifest(&mut out, "array", &cfg)?;
            output::write_array(&mut out, &cfg, &r)?;
            println!(
                "gain at steer: curved {} dBi, reference {} dBi, delta {} dB",
                fmt9(r.curved.result.gain_at_steering),
                fmt9(r.reference.result.gain_at_steering),
                fmt9(r.delta_gain_at_steer_db)
            );
            Ok(EXIT_OK)
        }
        Command::Plot(p) => {
            let mut out = OutputDir::create(&p.out)?;
            output::plot_files(&p.inputs, &mut out, p.polar)?;
            out.write(
                "manifest.toml",
                &format!(
                    "# curvemom {}\n# command: plot\npolar = {}\ninputs = [{}]\n",
                    env!("CARGO_PKG_VERSION"),
                    p.polar,
                    p.inputs
                        .iter()
                        .map(|i| format!("{:?}", i.display().to_string()))
                        .collect::<Vec<_>>()
                        .join(", ")
                ),
            )?;
            Ok(EXIT_OK)
        }
        Command::ExportNec(a) => {
            let cfg = a.resolve()?;
            check_geometry(&cfg)?;
            let element = build_curved_monopole(&cfg.geometry)?;
            let reference = build_curved_monopole(&cfg.geometry.straight_reference())?;
            let array = build_linear_array(&ArrayLayout {
                element: cfg.geometry,
                n_elements: cfg.array.n_elements,
                spacing: cfg.array.spacing,
            })?;
            let mut out = OutputDir::create(&cfg.out)?;
            output::write_manifest(&mut out, "export-nec", &cfg)?;
            out.write("element.nec", &export_nec_cards(&element))?;
            out.write("reference.nec", &export_nec_cards(&reference))?;
            out.write("array.nec", &export_nec_cards(&array))?;
            if cfg.wants(Format::Json) {
                let text = serde_json::to_string_pretty(&element).context("serializing model")?;
                out.write("element.json", &(text + "\n"))?;
            }
            println!("{} segments in the element, {} in the array", element.segments().len(), array.segments().len());
            Ok(EXIT_OK)
        }
    }
}

fn sweep(a: &CommonArgs, parameter: SweepParameter, command: &str) -> Result<i32> {
    let cfg = a.resolve()?;
    let report = recipes::run_sweep(&cfg, parameter)?;
    let mut out = OutputDir::create(&cfg.out)?;
    output::write_manifest(&mut out, command, &cfg)?;
    output::write_sweep(&mut out, &cfg, &report)?;
    for r in &report.records {
        match &r.outcome {
            Ok(d) => println!(
                "{} = {}: best return loss {} dB, bandwidth {} Hz, peak {} dBi",
                parameter.name(),
                fmt9_trim(r.value),
                d.best_return_loss.map_or("n/a".into(), |b| fmt9(b.0)),
                fmt9(d.bandwidth.bandwidth),
                fmt9(d.peak_rg_dbi())
            ),
            Err(e) => println!("{} = {}: failed: {e}", parameter.name(), fmt9_trim(r.value)),
        }
    }
    if let Some(i) = report.best_match() {
        println!("best match at {} = {}", parameter.name(), fmt9_trim(report.records[i].value));
    }
    if let Some(i) = report.best_bandwidth() {
        println!("widest band at {} = {}", parameter.name(), fmt9_trim(report.records[i].value));
    }
    if report.failures() > 0 {
        eprintln!("{} of {} sweep points failed", report.failures(), report.records.len());
        return Ok(EXIT_PARTIAL);
    }
    Ok(EXIT_OK)
}

fn init_threads() {
    if let Some(n) = std::env::var("CURVEMOM_THREADS").ok().and_then(|v| v.parse::<usize>().ok()) {
        // a pool that already exists keeps its size
        let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    }
}

/// Parses `args`, runs the command and returns the exit code.
pub fn run_from_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_CONFIG } else { EXIT_OK };
            let _ = e.print();
            return code;
        }
    };
    init_threads();
    match execute(&cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            exit_code_for(&e)
        }
    }
}
