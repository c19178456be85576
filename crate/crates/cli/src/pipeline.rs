//! Run execution: drive the solver over every unit, write artifacts, and
//! collect the summary and exit code.

use fqt_core::currents::{
    assemble_sweep, build_weights, solve_point, sweep_point, sweep_weights, CurrentsReport,
    PointOutcome,
};
use fqt_core::lindblad::NEGATIVITY_FLOOR;
use fqt_core::model::build_level_table;
use rayon::prelude::*;

use crate::config::{CliError, CliResult, Format, ResolvedRun, RunUnit, UnitKind};
use crate::emit;

/// What `fqt run` reports back: a one-line summary for stdout, any check
/// diagnostics for stderr, and the process exit code.
pub struct RunSummary {
    pub line: String,
    pub diagnostics: Vec<String>,
    pub exit: i32,
}

/// Internal-consistency test of one solved report, used by `--check`.
/// Verifies finiteness, a normalized non-negative population vector, and
/// the steady-state energy balance J_E + J_B + J_C + P_drive = 0 within
/// 1e-10 of the dominant current scale.
fn check_report(r: &CurrentsReport, energy_scale: f64) -> Option<String> {
    if [r.j_e, r.j_b, r.j_c, r.conservation_residual, r.drive_power]
        .iter()
        .any(|v| !v.is_finite())
    {
        return Some("non-finite current".to_string());
    }
    let sum: f64 = r.populations.values.iter().sum();
    if (sum - 1.0).abs() > 1e-9 {
        return Some(format!("populations sum to {sum:.17e}"));
    }
    if let Some(p) = r.populations.values.iter().find(|&&p| p < NEGATIVITY_FLOOR) {
        return Some(format!("negative population {p:.3e}"));
    }
    let pp = &r.parameter_point;
    let floor = pp.kappa * energy_scale * energy_scale * (-energy_scale / pp.t_e).exp();
    let scale = r.j_e.abs().max(r.j_c.abs()).max(floor);
    let closure = (r.conservation_residual + r.drive_power).abs();
    if closure > 1e-10 * scale {
        return Some(format!(
            "energy balance violated: |J_E + J_B + J_C + P_drive| = {closure:.3e} exceeds {:.3e}",
            1e-10 * scale
        ));
    }
    None
}

fn with_pool<T: Send>(pool: Option<&rayon::ThreadPool>, f: impl FnOnce() -> T + Send) -> T {
    match pool {
        Some(p) => p.install(f),
        None => f(),
    }
}

fn write_artifact(unit: &RunUnit, text: &str) -> CliResult<()> {
    std::fs::write(&unit.out, text).map_err(|e| {
        CliError::Io(std::io::Error::new(
            e.kind(),
            format!("{}: {e}", unit.out.display()),
        ))
    })
}

/// Running tallies across all units of a run.
#[derive(Default)]
struct Tally {
    points: usize,
    failed: usize,
    bm_flags: usize,
    max_residual: f64,
    violations: Vec<String>,
}

impl Tally {
    fn absorb_report(&mut self, r: &CurrentsReport) {
        self.max_residual = self.max_residual.max(r.conservation_residual.abs());
        self.bm_flags += usize::from(r.born_markov_flag);
    }
}

pub fn execute(run: &ResolvedRun) -> CliResult<RunSummary> {
    let pool = if run.threads > 0 {
        Some(
            rayon::ThreadPoolBuilder::new()
                .num_threads(run.threads)
                .build()
                .map_err(|e| CliError::Config(format!("cannot build worker pool: {e}")))?,
        )
    } else {
        None
    };

    let mut tally = Tally::default();
    for unit in &run.units {
        let where_ = unit.out.display().to_string();
        log::debug!("solving unit -> {where_}");
        match &unit.kind {
            UnitKind::Point {
                params,
                baths,
                backend,
                q_max,
                renormalize,
            } => {
                let energy_scale = build_level_table(params)?.energy_scale();
                let weights = build_weights(&params.modulation, *backend, *q_max, *renormalize)?;
                let report = solve_point(params, baths, &weights)?;
                tally.points += 1;
                tally.absorb_report(&report);
                if run.check {
                    if let Some(msg) = check_report(&report, energy_scale) {
                        tally.violations.push(format!("{where_}: {msg}"));
                    }
                }
                let text = match run.format {
                    Format::Csv => emit::point_csv(&report),
                    Format::Json => emit::point_json(&report, &unit.echo),
                };
                write_artifact(unit, &text)?;
            }
            UnitKind::Sweep(config) => {
                let energy_scale = build_level_table(&config.params)?.energy_scale();
                let cached = sweep_weights(config)?;
                let outcomes: Vec<PointOutcome> = with_pool(pool.as_ref(), || {
                    config
                        .axis
                        .grid()
                        .par_iter()
                        .map(|&s| match sweep_point(config, s, cached.as_ref()) {
                            Ok(r) => PointOutcome::Solved(Box::new(r)),
                            Err(e) => PointOutcome::Failed {
                                code: e.code().to_string(),
                                message: e.to_string(),
                            },
                        })
                        .collect()
                });
                let result = assemble_sweep(config, outcomes)?;
                tally.points += result.rows.len();
                for (s, outcome) in result.grid.iter().zip(&result.rows) {
                    match outcome {
                        PointOutcome::Solved(r) => {
                            tally.absorb_report(r);
                            if run.check {
                                if let Some(msg) = check_report(r, energy_scale) {
                                    tally.violations.push(format!(
                                        "{where_} at {} = {s:.8e}: {msg}",
                                        result.axis_name
                                    ));
                                }
                            }
                        }
                        PointOutcome::Failed { code, .. } => {
                            tally.failed += 1;
                            if run.check {
                                tally.violations.push(format!(
                                    "{where_} at {} = {s:.8e}: point failed ({code})",
                                    result.axis_name
                                ));
                            }
                        }
                    }
                }
                let text = match run.format {
                    Format::Csv => emit::sweep_csv(&result),
                    Format::Json => emit::sweep_json(&result, &unit.echo),
                };
                write_artifact(unit, &text)?;
            }
        }
    }

    let exit = if run.check && !tally.violations.is_empty() {
        3
    } else if tally.failed > 0 {
        2
    } else {
        0
    };
    let line = format!(
        "{}: {} points, max residual {:.3e}, {} BM flags",
        run.mode_name, tally.points, tally.max_residual, tally.bm_flags
    );
    Ok(RunSummary {
        line,
        diagnostics: tally.violations,
        exit,
    })
}
