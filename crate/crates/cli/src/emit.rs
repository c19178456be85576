//! Deterministic output rendering. Identical runs must produce
//! byte-identical files, so everything here is plain formatting: fixed
//! 17-significant-digit floats, `\n` line endings, no timestamps.

use fqt_core::currents::{Beta, CurrentsReport, PointOutcome, SweepResult};
use serde::Serialize;

use crate::config::RawConfig;

pub const CSV_HEADER: &str = "axis,j_e,j_b,j_c,beta_plus,beta_minus,residual,bm_flag,status";

/// 17 significant digits: enough to round-trip any f64 exactly.
fn num(v: f64) -> String {
    format!("{v:.16e}")
}

/// β cell: empty at endpoints and across failed stencils, `inf`/`-inf`
/// where the base-current slope vanishes.
fn beta_cell(b: Option<&Option<Beta>>) -> String {
    match b {
        None | Some(None) => String::new(),
        Some(Some(Beta::Finite(v))) => num(*v),
        Some(Some(Beta::Divergent { positive: true })) => "inf".to_string(),
        Some(Some(Beta::Divergent { positive: false })) => "-inf".to_string(),
    }
}

fn csv_row(
    axis: f64,
    outcome: &PointOutcome,
    beta_plus: Option<&Option<Beta>>,
    beta_minus: Option<&Option<Beta>>,
) -> String {
    match outcome {
        PointOutcome::Solved(r) => format!(
            "{},{},{},{},{},{},{},{},ok",
            num(axis),
            num(r.j_e),
            num(r.j_b),
            num(r.j_c),
            beta_cell(beta_plus),
            beta_cell(beta_minus),
            num(r.conservation_residual),
            u8::from(r.born_markov_flag),
        ),
        PointOutcome::Failed { code, .. } => format!(
            "{},nan,nan,nan,,,nan,0,error:{code}",
            num(axis),
        ),
    }
}

/// Render a sweep as CSV. β columns are defined at interior grid points
/// only; the two endpoint rows have empty β cells.
pub fn sweep_csv(result: &SweepResult) -> String {
    let n = result.grid.len();
    let mut out = String::with_capacity(128 * (n + 1));
    out.push_str(CSV_HEADER);
    out.push('\n');
    for (i, (s, outcome)) in result.grid.iter().zip(&result.rows).enumerate() {
        let interior = i >= 1 && i + 1 < n;
        let (bp, bm) = if interior {
            (
                result.beta_plus.get(i - 1),
                result.beta_minus.get(i - 1),
            )
        } else {
            (None, None)
        };
        out.push_str(&csv_row(*s, outcome, bp, bm));
        out.push('\n');
    }
    out
}

/// Render a single-point run as a one-row CSV. The axis column echoes the
/// base temperature so the row can be re-fed as a point configuration.
pub fn point_csv(report: &CurrentsReport) -> String {
    let outcome = PointOutcome::Solved(Box::new(report.clone()));
    let mut out = String::new();
    out.push_str(CSV_HEADER);
    out.push('\n');
    out.push_str(&csv_row(report.parameter_point.t_b, &outcome, None, None));
    out.push('\n');
    out
}

/// β cell in JSON: a number, the strings `"inf"`/`"-inf"`, or null.
fn beta_json(b: Option<&Option<Beta>>) -> serde_json::Value {
    match b {
        None | Some(None) => serde_json::Value::Null,
        Some(Some(Beta::Finite(v))) => serde_json::json!(v),
        Some(Some(Beta::Divergent { positive })) => {
            serde_json::Value::String(if *positive { "inf" } else { "-inf" }.to_string())
        }
    }
}

#[derive(Serialize)]
struct JsonRow<'a> {
    axis: f64,
    status: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    message: Option<&'a str>,
    #[serde(skip_serializing_if = "Option::is_none")]
    report: Option<&'a CurrentsReport>,
    beta_plus: serde_json::Value,
    beta_minus: serde_json::Value,
}

#[derive(Serialize)]
struct JsonDocument<'a> {
    version: &'static str,
    config: &'a RawConfig,
    axis_name: &'a str,
    rows: Vec<JsonRow<'a>>,
}

fn json_rows<'a>(
    grid: &[f64],
    rows: &'a [PointOutcome],
    beta_plus: &[Option<Beta>],
    beta_minus: &[Option<Beta>],
) -> Vec<JsonRow<'a>> {
    let n = grid.len();
    grid.iter()
        .zip(rows)
        .enumerate()
        .map(|(i, (s, outcome))| {
            let interior = i >= 1 && i + 1 < n;
            let (bp, bm) = if interior {
                (beta_plus.get(i - 1), beta_minus.get(i - 1))
            } else {
                (None, None)
            };
            match outcome {
                PointOutcome::Solved(r) => JsonRow {
                    axis: *s,
                    status: "ok".to_string(),
                    message: None,
                    report: Some(r),
                    beta_plus: beta_json(bp),
                    beta_minus: beta_json(bm),
                },
                PointOutcome::Failed { code, message } => JsonRow {
                    axis: *s,
                    status: format!("error:{code}"),
                    message: Some(message),
                    report: None,
                    beta_plus: serde_json::Value::Null,
                    beta_minus: serde_json::Value::Null,
                },
            }
        })
        .collect()
}

/// Render a sweep as JSON: the resolved configuration echo plus one row per
/// grid point with the full report.
pub fn sweep_json(result: &SweepResult, echo: &RawConfig) -> String {
    let doc = JsonDocument {
        version: env!("CARGO_PKG_VERSION"),
        config: echo,
        axis_name: &result.axis_name,
        rows: json_rows(
            &result.grid,
            &result.rows,
            &result.beta_plus,
            &result.beta_minus,
        ),
    };
    let mut text = serde_json::to_string_pretty(&doc).expect("plain data serializes");
    text.push('\n');
    text
}

/// Render a single-point run as JSON.
pub fn point_json(report: &CurrentsReport, echo: &RawConfig) -> String {
    let outcome = [PointOutcome::Solved(Box::new(report.clone()))];
    let grid = [report.parameter_point.t_b];
    let doc = JsonDocument {
        version: env!("CARGO_PKG_VERSION"),
        config: echo,
        axis_name: "t_b",
        rows: json_rows(&grid, &outcome, &[], &[]),
    };
    let mut text = serde_json::to_string_pretty(&doc).expect("plain data serializes");
    text.push('\n');
    text
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn numbers_render_with_seventeen_significant_digits() {
        assert_eq!(num(1.0), "1.0000000000000000e0");
        assert_eq!(num(-0.5), "-5.0000000000000000e-1");
        // Round-trips exactly.
        let v = 0.1234567890123456_f64;
        assert_eq!(num(v).parse::<f64>().unwrap(), v);
    }

    #[test]
    fn beta_cells_cover_all_variants() {
        assert_eq!(beta_cell(None), "");
        assert_eq!(beta_cell(Some(&None)), "");
        assert_eq!(beta_cell(Some(&Some(Beta::Finite(2.0)))), num(2.0));
        assert_eq!(
            beta_cell(Some(&Some(Beta::Divergent { positive: true }))),
            "inf"
        );
        assert_eq!(
            beta_cell(Some(&Some(Beta::Divergent { positive: false }))),
            "-inf"
        );
    }
}
