//! Run-configuration ingestion: TOML parsing, validation, CLI overrides,
//! and resolution into executable units.

use std::fmt;
use std::path::{Path, PathBuf};

use fqt_core::currents::{SweepAxis, SweepConfig, WeightsBackend};
use fqt_core::model::{BathSpec, ModulationScheme, SystemParams};
use serde::{Deserialize, Serialize};

use crate::presets;
use crate::RunArgs;

/// Errors of the driver, partitioned by exit code.
#[derive(Debug)]
pub enum CliError {
    /// Bad flags or configuration (exit 1).
    Config(String),
    /// The solver rejected the physics or failed outright (exit 2).
    Solver(fqt_core::Error),
    /// I/O failure writing artifacts (exit 2).
    Io(std::io::Error),
    /// `--check` found inconsistent output (exit 3).
    Check(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => 1,
            CliError::Solver(_) | CliError::Io(_) => 2,
            CliError::Check(_) => 3,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Config(msg) => write!(f, "configuration error: {msg}"),
            CliError::Solver(e) => write!(f, "solver error: {e}"),
            CliError::Io(e) => write!(f, "i/o error: {e}"),
            CliError::Check(msg) => write!(f, "check failed: {msg}"),
        }
    }
}

impl From<fqt_core::Error> for CliError {
    fn from(e: fqt_core::Error) -> Self {
        CliError::Solver(e)
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Io(e)
    }
}

pub type CliResult<T> = Result<T, CliError>;

fn config_err<T>(msg: impl Into<String>) -> CliResult<T> {
    Err(CliError::Config(msg.into()))
}

/// `[system]`: the six level-splitting coefficients. Defaults to the
/// canonical transistor (ω_E = ω_0 = ω_C = ω_CE = 0, ω_EB = ω_BC = 1).
#[derive(Debug, Clone, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct SystemSection {
    #[serde(default)]
    pub omega_e: f64,
    #[serde(default)]
    pub omega_0: f64,
    #[serde(default)]
    pub omega_c: f64,
    #[serde(default = "one")]
    pub omega_eb: f64,
    #[serde(default = "one")]
    pub omega_bc: f64,
    #[serde(default)]
    pub omega_ce: f64,
}

fn one() -> f64 {
    1.0
}

impl Default for SystemSection {
    fn default() -> Self {
        SystemSection {
            omega_e: 0.0,
            omega_0: 0.0,
            omega_c: 0.0,
            omega_eb: 1.0,
            omega_bc: 1.0,
            omega_ce: 0.0,
        }
    }
}

/// `[baths]`: temperatures and the ohmic coefficient.
#[derive(Debug, Clone, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct BathsSection {
    pub t_e: f64,
    pub t_b: f64,
    pub t_c: f64,
    #[serde(default = "one")]
    pub kappa: f64,
}

/// `[modulation]`: drive scheme and its parameters.
#[derive(Debug, Clone, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct ModulationSection {
    pub scheme: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub lambda: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub nu: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub waveform: Option<Vec<f64>>,
}

/// `[run]`: what to compute.
#[derive(Debug, Clone, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct RunSection {
    pub mode: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub preset: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub grid_min: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub grid_max: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub grid_points: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub weights: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub q_max: Option<u32>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub renormalize: Option<bool>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub threads: Option<usize>,
}

/// `[output]`: artifact destination.
#[derive(Debug, Clone, Default, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct OutputSection {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub path: Option<PathBuf>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub format: Option<String>,
}

/// A whole configuration document.
#[derive(Debug, Clone, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct RawConfig {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub system: Option<SystemSection>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub baths: Option<BathsSection>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub modulation: Option<ModulationSection>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub run: Option<RunSection>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub output: Option<OutputSection>,
}

/// Output format of a run.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Format {
    Csv,
    Json,
}

impl Format {
    pub fn extension(self) -> &'static str {
        match self {
            Format::Csv => "csv",
            Format::Json => "json",
        }
    }
}

/// One executable computation with its output file.
#[derive(Debug, Clone)]
pub struct RunUnit {
    /// Scheme label distinguishing the files of a two-scheme preset.
    pub label: Option<String>,
    /// Fully resolved configuration echo (what JSON metadata reports).
    pub echo: RawConfig,
    pub kind: UnitKind,
    pub out: PathBuf,
}

#[derive(Debug, Clone)]
pub enum UnitKind {
    Point {
        params: SystemParams,
        baths: BathSpec,
        backend: WeightsBackend,
        q_max: u32,
        renormalize: bool,
    },
    Sweep(SweepConfig),
}

/// Everything `fqt run` needs to execute.
#[derive(Debug, Clone)]
pub struct ResolvedRun {
    pub units: Vec<RunUnit>,
    pub format: Format,
    /// 0 = worker-pool default (available parallelism).
    pub threads: usize,
    pub check: bool,
    /// Human name for the summary line (mode or preset name).
    pub mode_name: String,
}

pub fn parse_file(path: &Path) -> CliResult<RawConfig> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))?;
    parse_str(&text)
}

pub fn parse_str(text: &str) -> CliResult<RawConfig> {
    toml::from_str(text).map_err(|e| CliError::Config(e.to_string()))
}

fn parse_format(s: &str) -> CliResult<Format> {
    match s {
        "csv" => Ok(Format::Csv),
        "json" => Ok(Format::Json),
        other => config_err(format!("format must be csv or json, got {other}")),
    }
}

fn parse_backend(s: &str) -> CliResult<WeightsBackend> {
    match s {
        "closed" => Ok(WeightsBackend::ClosedForm),
        "quadrature" => Ok(WeightsBackend::Quadrature),
        other => config_err(format!("weights must be closed or quadrature, got {other}")),
    }
}

fn build_modulation(section: Option<&ModulationSection>) -> CliResult<ModulationScheme> {
    let Some(m) = section else {
        return Ok(ModulationScheme::Unmodulated);
    };
    let reject = |key: &str, wanted: &str| -> CliResult<ModulationScheme> {
        config_err(format!("key {key} is only meaningful for the {wanted} scheme"))
    };
    match m.scheme.as_str() {
        "unmodulated" => {
            if m.lambda.is_some() {
                return reject("lambda", "sinusoidal");
            }
            if m.nu.is_some() {
                return reject("nu", "modulated");
            }
            if m.waveform.is_some() {
                return reject("waveform", "tabulated");
            }
            Ok(ModulationScheme::Unmodulated)
        }
        "sinusoidal" => {
            if m.waveform.is_some() {
                return reject("waveform", "tabulated");
            }
            let lambda = m
                .lambda
                .ok_or_else(|| CliError::Config("sinusoidal scheme needs lambda".into()))?;
            let nu = m
                .nu
                .ok_or_else(|| CliError::Config("sinusoidal scheme needs nu".into()))?;
            Ok(ModulationScheme::Sinusoidal { lambda, nu })
        }
        "piflip" => {
            if m.lambda.is_some() {
                return reject("lambda", "sinusoidal");
            }
            if m.waveform.is_some() {
                return reject("waveform", "tabulated");
            }
            let nu = m
                .nu
                .ok_or_else(|| CliError::Config("piflip scheme needs nu".into()))?;
            Ok(ModulationScheme::PiFlip { nu })
        }
        "tabulated" => {
            if m.lambda.is_some() {
                return reject("lambda", "sinusoidal");
            }
            let waveform = m
                .waveform
                .clone()
                .ok_or_else(|| CliError::Config("tabulated scheme needs waveform".into()))?;
            let nu = m
                .nu
                .ok_or_else(|| CliError::Config("tabulated scheme needs nu".into()))?;
            Ok(ModulationScheme::Tabulated { waveform, nu })
        }
        other => config_err(format!(
            "scheme must be unmodulated, sinusoidal, piflip, or tabulated, got {other}"
        )),
    }
}

fn linear_grid(min: f64, max: f64, n: usize) -> Vec<f64> {
    (0..n)
        .map(|i| min + (max - min) * i as f64 / (n - 1) as f64)
        .collect()
}

fn log_grid(min: f64, max: f64, n: usize) -> Vec<f64> {
    (0..n)
        .map(|i| (min.ln() + (max.ln() - min.ln()) * i as f64 / (n - 1) as f64).exp())
        .collect()
}

pub const DEFAULT_GRID_POINTS: usize = 200;

/// Turn one raw document into one executable unit (everything but the
/// output path, which depends on sibling units).
fn build_unit(raw: &RawConfig, label: Option<String>) -> CliResult<(RawConfig, UnitKind)> {
    let run = raw
        .run
        .as_ref()
        .ok_or_else(|| CliError::Config("missing [run] section".into()))?;
    let baths_section = raw
        .baths
        .as_ref()
        .ok_or_else(|| CliError::Config("missing [baths] section".into()))?;
    let system = raw.system.clone().unwrap_or_default();

    // A frequency sweep supplies ν at every grid point, so the scheme may
    // omit it; the placeholder is replaced before any physics runs.
    let mut modulation_section = raw.modulation.clone();
    if run.mode == "sweep-nu" {
        if let Some(m) = modulation_section.as_mut() {
            if m.scheme != "unmodulated" && m.nu.is_none() {
                m.nu = Some(run.grid_min.unwrap_or(0.1));
            }
        }
    }
    let modulation = build_modulation(modulation_section.as_ref())?;
    let params = SystemParams {
        omega_e: system.omega_e,
        omega_0: system.omega_0,
        omega_c: system.omega_c,
        omega_eb: system.omega_eb,
        omega_bc: system.omega_bc,
        omega_ce: system.omega_ce,
        modulation: modulation.clone(),
    };
    let baths = BathSpec {
        t_e: baths_section.t_e,
        t_b: baths_section.t_b,
        t_c: baths_section.t_c,
        kappa: baths_section.kappa,
    };
    // Reject invalid physics while still in configuration territory.
    params.validate().map_err(|e| CliError::Config(e.to_string()))?;
    baths.validate().map_err(|e| CliError::Config(e.to_string()))?;

    let modulated = !matches!(modulation, ModulationScheme::Unmodulated);
    let backend = parse_backend(run.weights.as_deref().unwrap_or("quadrature"))?;
    let q_max = run.q_max.unwrap_or(u32::from(modulated));
    let renormalize = run.renormalize.unwrap_or(false);
    let points = run.grid_points.unwrap_or(DEFAULT_GRID_POINTS);

    let kind = match run.mode.as_str() {
        "point" => UnitKind::Point {
            params,
            baths,
            backend,
            q_max,
            renormalize,
        },
        "sweep-tb" => {
            let min = run.grid_min.unwrap_or(0.01);
            let max = run.grid_max.unwrap_or(0.2);
            if !(min > 0.0 && max > min) {
                return config_err(
                    "base-temperature sweeps need 0 < grid_min < grid_max (logarithmic grid)",
                );
            }
            UnitKind::Sweep(SweepConfig {
                params,
                baths,
                axis: SweepAxis::BaseTemperature(log_grid(min, max, points)),
                weights_backend: backend,
                q_max,
                renormalize,
            })
        }
        "sweep-nu" => {
            if !modulated {
                return config_err("a drive-frequency sweep needs a modulated scheme");
            }
            let min = run.grid_min.unwrap_or(0.1);
            let max = run.grid_max.unwrap_or(4.0);
            if !(min > 0.0 && max > min) {
                return config_err("drive-frequency sweeps need 0 < grid_min < grid_max");
            }
            UnitKind::Sweep(SweepConfig {
                params,
                baths,
                axis: SweepAxis::DriveFrequency(linear_grid(min, max, points)),
                weights_backend: backend,
                q_max,
                renormalize,
            })
        }
        "figure-preset" => {
            return config_err("figure-preset documents are expanded before unit construction")
        }
        other => {
            return config_err(format!(
                "mode must be point, sweep-tb, sweep-nu, or figure-preset, got {other}"
            ))
        }
    };
    if let UnitKind::Sweep(cfg) = &kind {
        // A degenerate grid is a configuration mistake, not a solver failure.
        fqt_core::currents::check_grid(cfg.axis.grid())
            .map_err(|e| CliError::Config(e.to_string()))?;
    }

    // The echo reflects every default that was filled in.
    let mut echo = raw.clone();
    echo.system = Some(system);
    if let Some(r) = echo.run.as_mut() {
        r.weights = Some(
            match backend {
                WeightsBackend::ClosedForm => "closed",
                WeightsBackend::Quadrature => "quadrature",
            }
            .to_string(),
        );
        r.q_max = Some(q_max);
        r.renormalize = Some(renormalize);
        if matches!(kind, UnitKind::Sweep(_)) {
            r.grid_points = Some(points);
        }
    }
    let _ = label;
    Ok((echo, kind))
}

/// Output path for one unit: CLI `--out` wins, then `[output].path`, then
/// a name derived from the run; two-file presets insert the scheme label
/// before the extension.
fn unit_out_path(
    cli_out: Option<&Path>,
    section: Option<&OutputSection>,
    base_name: &str,
    label: Option<&str>,
    multi: bool,
    format: Format,
) -> PathBuf {
    let base: PathBuf = cli_out
        .map(Path::to_path_buf)
        .or_else(|| section.and_then(|o| o.path.clone()))
        .unwrap_or_else(|| PathBuf::from(format!("{base_name}.{}", format.extension())));
    if !multi {
        return base;
    }
    let label = label.unwrap_or("run");
    let stem = base
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| base_name.to_string());
    let ext = base
        .extension()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| format.extension().to_string());
    base.with_file_name(format!("{stem}_{label}.{ext}"))
}

/// Resolve command-line arguments (and any configuration file or preset
/// they name) into executable units.
pub fn resolve(args: &RunArgs) -> CliResult<ResolvedRun> {
    let (mut documents, mode_name): (Vec<(Option<String>, RawConfig)>, String) =
        match (&args.config, &args.preset) {
            (Some(_), Some(_)) => {
                return config_err("pass exactly one of --config or --preset, not both")
            }
            (None, None) => return config_err("pass one of --config <path> or --preset <name>"),
            (None, Some(name)) => (presets::expand(name)?, name.clone()),
            (Some(path), None) => {
                let raw = parse_file(path)?;
                let run = raw
                    .run
                    .as_ref()
                    .ok_or_else(|| CliError::Config("missing [run] section".into()))?;
                if run.mode == "figure-preset" {
                    let name = run.preset.clone().ok_or_else(|| {
                        CliError::Config("figure-preset mode needs the preset key".into())
                    })?;
                    (presets::expand(&name)?, name)
                } else {
                    let mode = run.mode.clone();
                    (vec![(None, raw)], mode)
                }
            }
        };

    // CLI overrides are applied to every document before unit construction.
    for (_, raw) in documents.iter_mut() {
        if let Some(run) = raw.run.as_mut() {
            if let Some(w) = &args.weights {
                run.weights = Some(w.clone());
            }
            if let Some(q) = args.qmax {
                run.q_max = Some(q);
            }
            if let Some(t) = args.threads {
                run.threads = Some(t);
            }
        }
    }

    let format_str = args
        .format
        .clone()
        .or_else(|| {
            documents
                .first()
                .and_then(|(_, raw)| raw.output.as_ref())
                .and_then(|o| o.format.clone())
        })
        .unwrap_or_else(|| "csv".to_string());
    let format = parse_format(&format_str)?;

    let threads = args
        .threads
        .or_else(|| {
            documents
                .first()
                .and_then(|(_, raw)| raw.run.as_ref())
                .and_then(|r| r.threads)
        })
        .unwrap_or(0);

    let multi = documents.len() > 1;
    let mut units = Vec::with_capacity(documents.len());
    for (label, raw) in &documents {
        let (mut echo, kind) = build_unit(raw, label.clone())?;
        let out = unit_out_path(
            args.out.as_deref(),
            raw.output.as_ref(),
            &mode_name,
            label.as_deref(),
            multi,
            format,
        );
        // The echo describes the computation, not the artifact location:
        // leaving the path out keeps reruns byte-identical wherever written.
        echo.output = None;
        units.push(RunUnit {
            label: label.clone(),
            echo,
            kind,
            out,
        });
    }

    Ok(ResolvedRun {
        units,
        format,
        threads,
        check: args.check,
        mode_name,
    })
}
