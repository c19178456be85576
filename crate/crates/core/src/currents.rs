//! Steady-state heat currents, amplification factors, and parameter sweeps.
//!
//! Heat-current bookkeeping: each bath's current is the energy it exchanges
//! with the system per unit time, positive into the system. E- and C-bath
//! channels carry their bare gap. For the driven base qubit each sideband
//! channel of a bare transition (gap > 0) carries its effective quantum
//! ω_ij + qν. The zero-gap base channels move no bath heat at q = 0 and
//! their q = ±1 sidebands exchange energy with the drive, not the bath's
//! thermal budget, so they are excluded from J_B.
//!
//! With that split, steady-state energy balance reads
//! J_E + J_B + J_C + P_drive = 0, where P_drive = ν Σ q Γ is the power the
//! drive injects through the sidebands. The raw sum J_E + J_B + J_C is
//! reported as `conservation_residual`; it equals −P_drive and is therefore
//! nonzero at modulated operating points.

use crate::error::{Error, Result};
use crate::floquet::{closed_form_weights, quadrature_weights, HarmonicWeights};
use crate::lindblad::{build_generator, steady_state, Populations, RateGenerator};
use crate::model::{build_level_table, Bath, BathSpec, LevelTable, ModulationScheme, SystemParams};

/// Echo of the inputs a report was computed from.
#[derive(Debug, Clone, PartialEq, serde::Serialize)]
pub struct ParameterPoint {
    pub t_e: f64,
    pub t_b: f64,
    pub t_c: f64,
    pub kappa: f64,
    /// Modulation description.
    pub scheme: String,
    /// Drive frequency, if modulated.
    pub nu: Option<f64>,
    /// Swept-axis name and value when this point belongs to a sweep.
    pub axis: Option<AxisEcho>,
}

/// Name and value of the swept parameter at one grid point.
#[derive(Debug, Clone, PartialEq, serde::Serialize)]
pub struct AxisEcho {
    pub name: String,
    pub value: f64,
}

/// Steady-state currents and diagnostics at one parameter point.
///
/// Currents are in units of κħΔ², positive into the system.
#[derive(Debug, Clone, PartialEq, serde::Serialize)]
pub struct CurrentsReport {
    pub j_e: f64,
    pub j_b: f64,
    pub j_c: f64,
    /// Raw J_E + J_B + J_C. Equals −`drive_power` at a true steady state,
    /// so it vanishes only where the drive does no net work.
    pub conservation_residual: f64,
    /// Net power ν Σ q Γ injected by the drive through the sidebands.
    pub drive_power: f64,
    pub populations: Populations,
    /// Max per-level net transition rate over the system energy scale.
    pub born_markov_ratio: f64,
    /// True when `born_markov_ratio` > 0.1: weak-coupling treatment suspect.
    pub born_markov_flag: bool,
    pub parameter_point: ParameterPoint,
}

/// Evaluate the steady-state heat currents of a full 8-state generator.
///
/// `rho` must be the steady state of `gen`; this is enforced through the
/// energy-balance identity |J_E + J_B + J_C + P_drive| below threshold,
/// which holds algebraically at the exact steady state and fails for any
/// state that is not stationary (or any generator/current inconsistency).
pub fn heat_currents(
    gen: &RateGenerator,
    rho: &Populations,
    table: &LevelTable,
    weights: &HarmonicWeights,
) -> Result<CurrentsReport> {
    if rho.values.len() != gen.dimension {
        return Err(Error::InvalidParam {
            name: "rho",
            value: rho.values.len() as f64,
            constraint: "population length must match the generator dimension",
        });
    }
    debug_assert!(gen
        .per_channel_rates
        .iter()
        .all(|c| c.bath != Bath::B || (c.weight - weights.weight(c.q)).abs() <= 1e-15));

    let nu = gen.nu.unwrap_or(0.0);
    let mut j_e = 0.0;
    let mut j_b = 0.0;
    let mut j_c = 0.0;
    let mut drive_sum = 0.0;
    let mut level_rate = vec![0.0f64; gen.dimension];
    for ch in &gen.per_channel_rates {
        let flow = ch.net_flow(&rho.values);
        level_rate[ch.upper] += flow.abs();
        level_rate[ch.lower] += flow.abs();
        match ch.bath {
            Bath::E => j_e -= ch.effective_gap * flow,
            Bath::C => j_c -= ch.effective_gap * flow,
            Bath::B => {
                if ch.bare_gap > 0.0 {
                    j_b -= ch.effective_gap * flow;
                    drive_sum += ch.q as f64 * flow;
                }
            }
        }
    }
    let drive_power = nu * drive_sum;

    let conservation_residual = j_e + j_b + j_c;
    let closure = conservation_residual + drive_power;
    let delta = table.energy_scale();
    let t_e = gen.point.temperatures.0;
    let scale = j_e
        .abs()
        .max(j_c.abs())
        .max(gen.kappa * delta * delta * (-delta / t_e).exp());
    let tol = 1e-10 * scale;
    if closure.abs() >= tol {
        return Err(Error::EnergyBalance {
            imbalance: closure.abs(),
            tol,
            point: gen.point.clone(),
        });
    }

    let bm = crate::approx::born_markov_guard(&level_rate, gen.energy_scale);
    if bm.flag {
        log::warn!(
            "weak-coupling guard: per-level net rate reaches {:.3e} of the \
             system energy scale at {}",
            bm.ratio,
            gen.point
        );
    }

    Ok(CurrentsReport {
        j_e,
        j_b,
        j_c,
        conservation_residual,
        drive_power,
        populations: rho.clone(),
        born_markov_ratio: bm.ratio,
        born_markov_flag: bm.flag,
        parameter_point: ParameterPoint {
            t_e: gen.point.temperatures.0,
            t_b: gen.point.temperatures.1,
            t_c: gen.point.temperatures.2,
            kappa: gen.kappa,
            scheme: gen.point.scheme.clone(),
            nu: gen.nu,
            axis: None,
        },
    })
}

/// One amplification factor: a derivative ratio that may diverge where the
/// base current passes through an extremum.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Beta {
    Finite(f64),
    /// |dJ_B/ds| fell below 1e-14 of the other slopes; `positive` is the
    /// sign the ratio diverges with.
    Divergent { positive: bool },
}

impl Beta {
    pub fn as_finite(self) -> Option<f64> {
        match self {
            Beta::Finite(v) => Some(v),
            Beta::Divergent { .. } => None,
        }
    }

    pub fn is_divergent(self) -> bool {
        matches!(self, Beta::Divergent { .. })
    }
}

impl serde::Serialize for Beta {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            Beta::Finite(v) => s.serialize_f64(*v),
            Beta::Divergent { .. } => s.serialize_str("divergent"),
        }
    }
}

fn ratio_sign(num: f64, den: f64) -> bool {
    if den != 0.0 {
        num / den >= 0.0
    } else {
        num >= 0.0
    }
}

/// β_± from the current differences across one central-difference stencil.
/// The grid spacing cancels in the ratio, so only the neighbor reports are
/// needed.
fn beta_pair(prev: &CurrentsReport, next: &CurrentsReport) -> (Beta, Beta) {
    let d_e = next.j_e - prev.j_e;
    let d_b = next.j_b - prev.j_b;
    let d_c = next.j_c - prev.j_c;
    let scale = d_e.abs().max(d_c.abs()).max(f64::MIN_POSITIVE);
    if d_b.abs() < 1e-14 * scale {
        (
            Beta::Divergent {
                positive: ratio_sign(d_c, d_b),
            },
            Beta::Divergent {
                positive: ratio_sign(d_e, d_b),
            },
        )
    } else {
        (Beta::Finite(d_c / d_b), Beta::Finite(d_e / d_b))
    }
}

/// Amplification factors β_+ = dJ_C/dJ_B and β_− = dJ_E/dJ_B along a sweep,
/// by central differences over the sweep parameter.
///
/// Every report must carry an axis echo from the same sweep; the grid must
/// be strictly increasing with at least 3 points. Returns one (β_+, β_−)
/// pair per interior point.
pub fn amplification(rows: &[&CurrentsReport]) -> Result<(Vec<Beta>, Vec<Beta>)> {
    if rows.len() < 3 {
        return Err(Error::BadGrid {
            detail: format!("{} point(s)", rows.len()),
        });
    }
    let mut s_prev = f64::NEG_INFINITY;
    for r in rows {
        let axis = r.parameter_point.axis.as_ref().ok_or_else(|| Error::BadGrid {
            detail: "report carries no sweep-axis echo".to_string(),
        })?;
        if !(axis.value > s_prev) {
            return Err(Error::BadGrid {
                detail: format!(
                    "axis not strictly increasing at {} = {}",
                    axis.name, axis.value
                ),
            });
        }
        s_prev = axis.value;
    }
    let mut plus = Vec::with_capacity(rows.len() - 2);
    let mut minus = Vec::with_capacity(rows.len() - 2);
    for w in rows.windows(3) {
        let (p, m) = beta_pair(w[0], w[2]);
        plus.push(p);
        minus.push(m);
    }
    Ok((plus, minus))
}

/// Which backend produces the harmonic weights of a run.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize)]
pub enum WeightsBackend {
    /// Truncated closed forms (default; what the reproduction targets use).
    ClosedForm,
    /// Exact quadrature of the phase integral.
    Quadrature,
}

/// Build weights for a scheme with the chosen backend.
pub fn build_weights(
    scheme: &ModulationScheme,
    backend: WeightsBackend,
    q_max: u32,
    renormalize: bool,
) -> Result<HarmonicWeights> {
    let q_max = if matches!(scheme, ModulationScheme::Unmodulated) {
        0
    } else {
        q_max
    };
    let w = match backend {
        WeightsBackend::ClosedForm => closed_form_weights(scheme, q_max)?,
        WeightsBackend::Quadrature => {
            quadrature_weights(scheme, q_max, crate::floquet::MIN_QUADRATURE_STEPS)?
        }
    };
    Ok(if renormalize { w.renormalized() } else { w })
}

/// Solve one parameter point end to end: weights are supplied by the caller
/// (so sweeps can reuse them), everything else is built here.
pub fn solve_point(
    params: &SystemParams,
    baths: &BathSpec,
    weights: &HarmonicWeights,
) -> Result<CurrentsReport> {
    let table = build_level_table(params)?;
    let gen = build_generator(&table, baths, weights)?;
    let rho = steady_state(&gen)?;
    heat_currents(&gen, &rho, &table, weights)
}

/// The swept parameter of a sweep.
#[derive(Debug, Clone, PartialEq, serde::Serialize)]
pub enum SweepAxis {
    /// Sweep the base bath temperature at fixed modulation.
    BaseTemperature(Vec<f64>),
    /// Sweep the drive frequency ν at fixed bath temperatures.
    DriveFrequency(Vec<f64>),
}

impl SweepAxis {
    pub fn name(&self) -> &'static str {
        match self {
            SweepAxis::BaseTemperature(_) => "t_b",
            SweepAxis::DriveFrequency(_) => "nu",
        }
    }

    pub fn grid(&self) -> &[f64] {
        match self {
            SweepAxis::BaseTemperature(g) | SweepAxis::DriveFrequency(g) => g,
        }
    }
}

/// Full description of a sweep.
#[derive(Debug, Clone, PartialEq, serde::Serialize)]
pub struct SweepConfig {
    pub params: SystemParams,
    pub baths: BathSpec,
    pub axis: SweepAxis,
    pub weights_backend: WeightsBackend,
    pub q_max: u32,
    pub renormalize: bool,
}

/// Outcome of one grid point: a report, or an error marker (never silently
/// dropped).
#[derive(Debug, Clone, PartialEq, serde::Serialize)]
pub enum PointOutcome {
    Solved(Box<CurrentsReport>),
    Failed { code: String, message: String },
}

impl PointOutcome {
    pub fn report(&self) -> Option<&CurrentsReport> {
        match self {
            PointOutcome::Solved(r) => Some(r),
            PointOutcome::Failed { .. } => None,
        }
    }
}

/// Results of a parameter sweep: per-point outcomes in grid order plus the
/// amplification factors at interior points.
#[derive(Debug, Clone, PartialEq, serde::Serialize)]
pub struct SweepResult {
    pub axis_name: String,
    pub grid: Vec<f64>,
    pub rows: Vec<PointOutcome>,
    /// β_+ per interior grid point; `None` where the stencil touches a
    /// failed row. Two fewer entries than the grid.
    pub beta_plus: Vec<Option<Beta>>,
    /// β_− per interior grid point, same layout.
    pub beta_minus: Vec<Option<Beta>>,
}

/// Validate a sweep grid: at least three points (central differences need
/// interior points), strictly increasing, finite.
pub fn check_grid(grid: &[f64]) -> Result<()> {
    if grid.len() < 3 {
        return Err(Error::BadGrid {
            detail: format!("{} point(s)", grid.len()),
        });
    }
    for w in grid.windows(2) {
        if !(w[1] > w[0]) {
            return Err(Error::BadGrid {
                detail: format!("grid not strictly increasing at {} → {}", w[0], w[1]),
            });
        }
    }
    if grid.iter().any(|v| !v.is_finite()) {
        return Err(Error::BadGrid {
            detail: "grid contains non-finite values".to_string(),
        });
    }
    Ok(())
}

/// Materialize the per-point inputs of a sweep: (params, baths) at one grid
/// value.
pub fn point_inputs(config: &SweepConfig, s: f64) -> Result<(SystemParams, BathSpec)> {
    match &config.axis {
        SweepAxis::BaseTemperature(_) => {
            let baths = BathSpec {
                t_b: s,
                ..config.baths
            };
            Ok((config.params.clone(), baths))
        }
        SweepAxis::DriveFrequency(_) => {
            if matches!(config.params.modulation, ModulationScheme::Unmodulated) {
                return Err(Error::InvalidParam {
                    name: "axis",
                    value: s,
                    constraint: "a drive-frequency sweep needs a modulated scheme",
                });
            }
            let mut params = config.params.clone();
            params.modulation = params.modulation.with_nu(s);
            Ok((params, config.baths))
        }
    }
}

/// Whether the weights of this sweep can be computed once and reused at
/// every grid point. True except for tabulated waveforms on a ν axis,
/// whose phase integral depends on the period length.
fn weights_reusable(config: &SweepConfig) -> bool {
    match &config.axis {
        SweepAxis::BaseTemperature(_) => true,
        SweepAxis::DriveFrequency(_) => {
            !matches!(config.params.modulation, ModulationScheme::Tabulated { .. })
        }
    }
}

/// Evaluate one grid point of a sweep, including the axis echo.
pub fn sweep_point(
    config: &SweepConfig,
    s: f64,
    cached_weights: Option<&HarmonicWeights>,
) -> Result<CurrentsReport> {
    let (params, baths) = point_inputs(config, s)?;
    let owned;
    let weights = match cached_weights {
        Some(w) => w,
        None => {
            owned = build_weights(
                &params.modulation,
                config.weights_backend,
                config.q_max,
                config.renormalize,
            )?;
            &owned
        }
    };
    let mut report = solve_point(&params, &baths, weights)?;
    report.parameter_point.axis = Some(AxisEcho {
        name: config.axis.name().to_string(),
        value: s,
    });
    Ok(report)
}

/// Weights to cache for a whole sweep, if the sweep allows it.
pub fn sweep_weights(config: &SweepConfig) -> Result<Option<HarmonicWeights>> {
    if !weights_reusable(config) {
        return Ok(None);
    }
    let (params, _) = point_inputs(config, config.axis.grid()[0])?;
    build_weights(
        &params.modulation,
        config.weights_backend,
        config.q_max,
        config.renormalize,
    )
    .map(Some)
}

/// Assemble outcomes (in grid order) into a SweepResult with β arrays.
pub fn assemble_sweep(
    config: &SweepConfig,
    outcomes: Vec<PointOutcome>,
) -> Result<SweepResult> {
    let grid = config.axis.grid();
    debug_assert_eq!(outcomes.len(), grid.len());
    let mut beta_plus = Vec::with_capacity(grid.len() - 2);
    let mut beta_minus = Vec::with_capacity(grid.len() - 2);
    for i in 1..grid.len() - 1 {
        match (outcomes[i - 1].report(), outcomes[i + 1].report()) {
            (Some(prev), Some(next)) => {
                let (p, m) = beta_pair(prev, next);
                beta_plus.push(Some(p));
                beta_minus.push(Some(m));
            }
            _ => {
                beta_plus.push(None);
                beta_minus.push(None);
            }
        }
    }
    Ok(SweepResult {
        axis_name: config.axis.name().to_string(),
        grid: grid.to_vec(),
        rows: outcomes,
        beta_plus,
        beta_minus,
    })
}

/// Run a sweep serially in grid order. (The CLI drives the same per-point
/// entry through a worker pool; results are identical because each point is
/// independent and assembly is ordered.)
pub fn run_sweep(config: &SweepConfig) -> Result<SweepResult> {
    config.params.validate()?;
    config.baths.validate()?;
    check_grid(config.axis.grid())?;
    let cached = sweep_weights(config)?;
    let outcomes: Vec<PointOutcome> = config
        .axis
        .grid()
        .iter()
        .map(|&s| match sweep_point(config, s, cached.as_ref()) {
            Ok(report) => PointOutcome::Solved(Box::new(report)),
            Err(e) => PointOutcome::Failed {
                code: e.code().to_string(),
                message: e.to_string(),
            },
        })
        .collect();
    assemble_sweep(config, outcomes)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn transistor_baths(t_b: f64) -> BathSpec {
        BathSpec {
            t_e: 0.2,
            t_b,
            t_c: 0.02,
            kappa: 1.0,
        }
    }

    fn report_at(scheme: ModulationScheme, t_b: f64) -> CurrentsReport {
        let params = SystemParams::canonical(scheme);
        let weights = build_weights(&params.modulation, WeightsBackend::ClosedForm, 1, false)
            .unwrap();
        solve_point(&params, &transistor_baths(t_b), &weights).unwrap()
    }

    #[test]
    fn equilibrium_currents_vanish() {
        let params = SystemParams::canonical(ModulationScheme::Unmodulated);
        let baths = BathSpec {
            t_e: 0.1,
            t_b: 0.1,
            t_c: 0.1,
            kappa: 1.0,
        };
        let weights = build_weights(&params.modulation, WeightsBackend::ClosedForm, 1, false)
            .unwrap();
        let r = solve_point(&params, &baths, &weights).unwrap();
        assert!(r.j_e.abs() < 1e-12);
        assert!(r.j_b.abs() < 1e-12);
        assert!(r.j_c.abs() < 1e-12);
        assert_eq!(r.drive_power, 0.0);
        assert!(!r.born_markov_flag);
    }

    #[test]
    fn unmodulated_transistor_point_structure() {
        let r = report_at(ModulationScheme::Unmodulated, 0.118);
        // Emitter feeds heat in, collector dumps it out, base trickles.
        assert!(r.j_e > 0.0);
        assert!(r.j_c < 0.0);
        assert!(r.j_b < 0.0);
        assert!(r.j_b.abs() < 0.05 * r.j_e.abs());
        // J_E ≈ κΔ²ρ_IV ≈ −J_C.
        let rho_iv = r.populations.sum_of(&[3, 4]);
        assert!((r.j_e - rho_iv).abs() < 0.02 * rho_iv);
        assert!((r.j_e + r.j_c).abs() < 0.05 * r.j_e.abs());
        // No drive: the raw sum closes to machine precision.
        assert_eq!(r.drive_power, 0.0);
        assert!(r.conservation_residual.abs() < 1e-14);
    }

    #[test]
    fn modulated_point_reports_drive_power() {
        let r = report_at(ModulationScheme::PiFlip { nu: 1.0 }, 0.118);
        assert!(r.drive_power != 0.0);
        // Raw sum equals −drive power at the steady state.
        assert!((r.conservation_residual + r.drive_power).abs() < 1e-14);
    }

    #[test]
    fn stale_populations_fail_energy_balance() {
        let params = SystemParams::canonical(ModulationScheme::Unmodulated);
        let baths = transistor_baths(0.118);
        let weights = build_weights(&params.modulation, WeightsBackend::ClosedForm, 1, false)
            .unwrap();
        let table = build_level_table(&params).unwrap();
        let gen = build_generator(&table, &baths, &weights).unwrap();
        let mut rho = steady_state(&gen).unwrap();
        rho.values[2] += 0.01;
        rho.values[3] -= 0.01;
        let err = heat_currents(&gen, &rho, &table, &weights).unwrap_err();
        assert!(matches!(err, Error::EnergyBalance { .. }));
    }

    #[test]
    fn beta_identity_on_unmodulated_sweep() {
        let grid: Vec<f64> = (0..40).map(|i| 0.04 + 0.002 * i as f64).collect();
        let config = SweepConfig {
            params: SystemParams::canonical(ModulationScheme::Unmodulated),
            baths: transistor_baths(0.118),
            axis: SweepAxis::BaseTemperature(grid),
            weights_backend: WeightsBackend::ClosedForm,
            q_max: 1,
            renormalize: false,
        };
        let sweep = run_sweep(&config).unwrap();
        assert_eq!(sweep.beta_plus.len(), sweep.grid.len() - 2);
        let mut checked = 0;
        for (p, m) in sweep.beta_plus.iter().zip(&sweep.beta_minus) {
            if let (Some(Beta::Finite(p)), Some(Beta::Finite(m))) = (p, m) {
                assert!((p + m + 1.0).abs() < 1e-6, "β_+ + β_− = {}", p + m);
                checked += 1;
            }
        }
        assert!(checked > 30);
    }

    #[test]
    fn amplification_requires_monotone_axis() {
        let a = report_at(ModulationScheme::Unmodulated, 0.1);
        let rows = vec![&a, &a, &a];
        // No axis echo at all:
        assert!(matches!(
            amplification(&rows),
            Err(Error::BadGrid { .. })
        ));
    }

    #[test]
    fn sweep_rejects_degenerate_grids() {
        let mk = |grid: Vec<f64>| SweepConfig {
            params: SystemParams::canonical(ModulationScheme::Unmodulated),
            baths: transistor_baths(0.118),
            axis: SweepAxis::BaseTemperature(grid),
            weights_backend: WeightsBackend::ClosedForm,
            q_max: 1,
            renormalize: false,
        };
        assert!(matches!(
            run_sweep(&mk(vec![0.1])),
            Err(Error::BadGrid { .. })
        ));
        assert!(matches!(
            run_sweep(&mk(vec![0.1, 0.2, 0.15])),
            Err(Error::BadGrid { .. })
        ));
        assert!(matches!(run_sweep(&mk(vec![])), Err(Error::BadGrid { .. })));
    }

    #[test]
    fn nu_sweep_needs_modulation() {
        // A ν sweep of a static scheme is invalid by construction at every
        // point, so the sweep as a whole is rejected up front.
        let config = SweepConfig {
            params: SystemParams::canonical(ModulationScheme::Unmodulated),
            baths: transistor_baths(0.118),
            axis: SweepAxis::DriveFrequency(vec![0.5, 1.0, 1.5]),
            weights_backend: WeightsBackend::ClosedForm,
            q_max: 1,
            renormalize: false,
        };
        let err = run_sweep(&config).unwrap_err();
        assert_eq!(err.code(), "invalid_param");
        assert!(err.to_string().contains("drive-frequency sweep"));
    }

    #[test]
    fn divergent_beta_has_sentinel() {
        // Synthetic stencil with flat J_B.
        let mut a = report_at(ModulationScheme::Unmodulated, 0.1);
        let mut b = a.clone();
        a.parameter_point.axis = Some(AxisEcho {
            name: "t_b".into(),
            value: 0.1,
        });
        b.j_e = a.j_e + 1e-6;
        b.j_c = a.j_c - 1e-6;
        b.j_b = a.j_b; // exactly flat
        b.parameter_point.axis = Some(AxisEcho {
            name: "t_b".into(),
            value: 0.3,
        });
        let mut mid = a.clone();
        mid.parameter_point.axis = Some(AxisEcho {
            name: "t_b".into(),
            value: 0.2,
        });
        let rows = vec![&a, &mid, &b];
        let (plus, minus) = amplification(&rows).unwrap();
        assert!(plus[0].is_divergent());
        assert!(minus[0].is_divergent());
    }
}
