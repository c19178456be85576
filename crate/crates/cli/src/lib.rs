//! Command-line driver for the modulated thermal-transistor simulator.
//!
//! The binary (`fqt`) parses flags, resolves a configuration file or a
//! named preset into run units, executes them through a worker pool, and
//! writes deterministic CSV or JSON artifacts.

pub mod config;
pub mod emit;
pub mod pipeline;
pub mod presets;

use std::path::PathBuf;

/// Flags of `fqt run`.
#[derive(Debug, Clone, Default, clap::Args)]
pub struct RunArgs {
    /// TOML configuration file describing the run.
    #[arg(long, value_name = "PATH", conflicts_with = "preset")]
    pub config: Option<PathBuf>,

    /// Named parameter set (fig4, fig5, fig6, fig8, fig10, fig11).
    #[arg(long, value_name = "NAME")]
    pub preset: Option<String>,

    /// Output file path (two-scheme presets insert the scheme label).
    #[arg(long, value_name = "PATH")]
    pub out: Option<PathBuf>,

    /// Output format: csv or json.
    #[arg(long, value_name = "FMT")]
    pub format: Option<String>,

    /// Worker threads (0 = all available cores).
    #[arg(long, value_name = "N")]
    pub threads: Option<usize>,

    /// Re-verify every solved point and exit 3 on any inconsistency.
    #[arg(long)]
    pub check: bool,

    /// Harmonic-weight backend: closed or quadrature.
    #[arg(long, value_name = "BACKEND")]
    pub weights: Option<String>,

    /// Highest sideband order retained.
    #[arg(long, value_name = "N")]
    pub qmax: Option<u32>,
}
