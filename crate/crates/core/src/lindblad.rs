//! Rate-equation generator on the level populations and its steady-state
//! solvers.
//!
//! Under the secular approximation the density matrix stays diagonal in the
//! quasi-energy basis, so the dynamics is a classical master equation
//! dρ/dt = L ρ on the 8 populations. Each bath contributes gain/loss pairs
//! across its four transitions; the periodically driven base qubit splits
//! each of its transitions into sidebands at ω ± qν weighted by the harmonic
//! weights P_q.
//!
//! Three independent steady-state routes are provided: a dense linear solve
//! of the full 8-state system, a 4-state degeneracy-class solve available in
//! the canonical configuration, and explicit relaxation of the ODE. They are
//! cross-checked against each other in the test suite.

use crate::error::{Error, PointLabel, Result};
use crate::floquet::HarmonicWeights;
use crate::linalg::Matrix;
use crate::model::{Bath, BathSpec, LevelTable, SystemParams};
use crate::ode::{integrate_until, OdeOptions, StopReason};

/// Condition-number threshold beyond which the trace-closed steady-state
/// system is treated as numerically singular.
pub const COND_LIMIT: f64 = 1e14;

/// Populations below this are treated as a rate-sign bug, not roundoff.
pub const NEGATIVITY_FLOOR: f64 = -1e-12;

/// Residual ‖Lρ‖_∞ above this rejects a computed steady state.
pub const RESIDUAL_LIMIT: f64 = 1e-10;

/// Bath spectral response at signed frequency ω:
/// G(ω) = κ ω (1 + n̄(ω, T)) with n̄ the Bose occupation.
///
/// Evaluated as κω/(1 − e^{−ω/T}), which is a single expression valid for
/// both signs of ω and encodes detailed balance G(−ω) = e^{−ω/T} G(ω)
/// identically. Continuous at ω = 0 with G(0) = κT; at T = 0 it reduces to
/// κω for ω > 0 and 0 for ω ≤ 0 (a cold bath cannot excite).
pub fn spectral_function(omega: f64, temperature: f64, kappa: f64) -> f64 {
    if temperature == 0.0 {
        return if omega > 0.0 { kappa * omega } else { 0.0 };
    }
    let x = omega / temperature;
    if x.abs() < 1e-8 {
        // Laurent expansion ω/(1 − e^{−x}) = T + ω/2 + O(ω x).
        return kappa * (temperature + 0.5 * omega);
    }
    // -expm1(-x) = 1 − e^{−x}, accurate for small |x| and overflow-safe:
    // large negative x gives −∞ in the denominator and hence a clean 0.
    kappa * omega / (-(-x).exp_m1())
}

/// One gain/loss rate pair: bath, level pair, sideband index, and the two
/// directed rates it feeds into the generator.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChannelRate {
    pub bath: Bath,
    /// Upper level of the bare transition, 0-based (table convention).
    pub upper: usize,
    /// Lower level, 0-based.
    pub lower: usize,
    /// Bare transition gap ω_ij ≥ 0.
    pub bare_gap: f64,
    /// Sideband index; always 0 for the E and C baths.
    pub q: i32,
    /// Harmonic weight P_q of this sideband.
    pub weight: f64,
    /// Effective gap Ω = ω_ij + qν; may be negative for red sidebands.
    pub effective_gap: f64,
    /// Rate feeding `lower` from `upper`: P_q G(Ω).
    pub down: f64,
    /// Rate feeding `upper` from `lower`: P_q G(−Ω).
    pub up: f64,
}

impl ChannelRate {
    /// Relative deviation of this pair from detailed balance
    /// up/down = e^{−Ω/T}. Computed in whichever direction keeps the
    /// Boltzmann factor ≤ 1, so it never overflows; 0 when both rates
    /// vanish. At T = 0 the defect is simply the rate that should be zero.
    pub fn kms_relative_defect(&self, temperature: f64) -> f64 {
        if temperature == 0.0 {
            return if self.effective_gap > 0.0 {
                self.up.abs()
            } else if self.effective_gap < 0.0 {
                self.down.abs()
            } else {
                (self.up - self.down).abs()
            };
        }
        let (big, small, x) = if self.effective_gap >= 0.0 {
            (self.down, self.up, -self.effective_gap / temperature)
        } else {
            (self.up, self.down, self.effective_gap / temperature)
        };
        let expect = big * x.exp();
        let scale = small.abs().max(expect.abs());
        if scale == 0.0 {
            0.0
        } else {
            (small - expect).abs() / scale
        }
    }

    /// Net probability flow upper → lower at the given populations:
    /// Γ = down·ρ_upper − up·ρ_lower.
    pub fn net_flow(&self, rho: &[f64]) -> f64 {
        self.down * rho[self.upper] - self.up * rho[self.lower]
    }
}

/// Assembled population-space generator L plus the per-channel rates it was
/// built from (retained for current evaluation and audits).
#[derive(Debug, Clone)]
pub struct RateGenerator {
    /// 8 for the full system, 4 for the degeneracy-class system.
    pub dimension: usize,
    /// Rate matrix L with dρ/dt = L ρ; columns sum to zero.
    pub matrix: Matrix,
    /// Every gain/loss pair that was added into L.
    pub per_channel_rates: Vec<ChannelRate>,
    /// Sideband spacing of the drive, if modulated.
    pub nu: Option<f64>,
    /// Ohmic coefficient, kept for unit conversions in reports.
    pub kappa: f64,
    /// Half the spectral span of the levels (Δ in the canonical setup).
    pub energy_scale: f64,
    /// Parameter-point tag for error reporting.
    pub point: PointLabel,
}

impl RateGenerator {
    /// ‖Lρ‖_∞, the stationarity defect of a candidate state.
    pub fn residual(&self, rho: &[f64]) -> f64 {
        self.matrix
            .matvec(rho)
            .iter()
            .fold(0.0f64, |m, v| m.max(v.abs()))
    }
}

fn accumulate(l: &mut Matrix, ch: &ChannelRate) {
    l.add(ch.lower, ch.upper, ch.down);
    l.add(ch.upper, ch.upper, -ch.down);
    l.add(ch.upper, ch.lower, ch.up);
    l.add(ch.lower, ch.lower, -ch.up);
}

/// Build the full 8-state generator from a level table, bath temperatures,
/// and harmonic weights.
///
/// E- and C-bath transitions carry only their bare gap. Each B-bath
/// transition is split into one channel per harmonic with P_q > 0, at
/// effective gap ω_ij + qν; red sidebands (Ω < 0) are handled by the signed
/// spectral function, which swaps the roles of emission and absorption.
pub fn build_generator(
    table: &LevelTable,
    baths: &BathSpec,
    weights: &HarmonicWeights,
) -> Result<RateGenerator> {
    baths.validate()?;
    let nu = table.modulation.nu();
    let has_sidebands = weights.iter_nonzero().any(|(q, _)| q != 0);
    if has_sidebands && nu.is_none() {
        return Err(Error::InvalidParam {
            name: "weights",
            value: 0.0,
            constraint: "sideband weights (q ≠ 0) require a modulated scheme",
        });
    }

    let point = PointLabel {
        temperatures: (baths.t_e, baths.t_b, baths.t_c),
        scheme: table.modulation.tag(),
    };

    let mut matrix = Matrix::zeros(crate::model::N_LEVELS);
    let mut per_channel_rates = Vec::new();
    for tr in &table.transitions {
        let temperature = baths.temperature(tr.bath);
        let sidebands: Vec<(i32, f64)> = match tr.bath {
            Bath::B => weights.iter_nonzero().collect(),
            Bath::E | Bath::C => vec![(0, 1.0)],
        };
        for (q, weight) in sidebands {
            let effective_gap = tr.gap + q as f64 * nu.unwrap_or(0.0);
            let ch = ChannelRate {
                bath: tr.bath,
                upper: tr.upper,
                lower: tr.lower,
                bare_gap: tr.gap,
                q,
                weight,
                effective_gap,
                down: weight * spectral_function(effective_gap, temperature, baths.kappa),
                up: weight * spectral_function(-effective_gap, temperature, baths.kappa),
            };
            accumulate(&mut matrix, &ch);
            per_channel_rates.push(ch);
        }
    }

    Ok(RateGenerator {
        dimension: crate::model::N_LEVELS,
        matrix,
        per_channel_rates,
        nu,
        kappa: baths.kappa,
        energy_scale: table.energy_scale(),
        point,
    })
}

/// Steady state of a rate generator (populations, residual, level names).
#[derive(Debug, Clone, PartialEq, serde::Serialize)]
pub struct Populations {
    /// Probability per level (or per degeneracy class).
    pub values: Vec<f64>,
    /// ‖Lρ‖_∞ at the returned solution, measured on the unmodified L.
    pub residual_norm: f64,
    /// Level names ("1".."8") or class names ("I".."IV").
    pub labels: Vec<String>,
}

impl Populations {
    /// Sum of selected entries (e.g. one degeneracy class).
    pub fn sum_of(&self, members: &[usize]) -> f64 {
        members.iter().map(|&i| self.values[i]).sum()
    }
}

fn level_labels(dim: usize) -> Vec<String> {
    if dim == 4 {
        ["I", "II", "III", "IV"].iter().map(|s| s.to_string()).collect()
    } else {
        (1..=dim).map(|i| i.to_string()).collect()
    }
}

/// Solve L ρ = 0, Σρ = 1 by replacing the last row of L with ones and the
/// right-hand side with (0,…,0,1); verify against the unmodified L.
fn solve_trace_closed(l: &Matrix, point: &PointLabel) -> Result<Populations> {
    let n = l.n();
    let mut a = l.clone();
    for j in 0..n {
        a.set(n - 1, j, 1.0);
    }
    let lu = a.lu();
    let cond = a.cond_one(&lu);
    if !cond.is_finite() || cond > COND_LIMIT {
        return Err(Error::IllConditioned {
            cond,
            point: point.clone(),
        });
    }
    let mut b = vec![0.0; n];
    b[n - 1] = 1.0;
    let mut values = lu.solve(&b);

    for (i, v) in values.iter().enumerate() {
        if *v < NEGATIVITY_FLOOR {
            return Err(Error::NegativePopulation {
                level: i + 1,
                value: *v,
                point: point.clone(),
            });
        }
    }
    for v in values.iter_mut() {
        // Sub-floor negatives are solver roundoff; clamp so downstream
        // logs and KL divergences stay well-defined.
        if *v < 0.0 {
            *v = 0.0;
        }
    }

    let residual_norm = l
        .matvec(&values)
        .iter()
        .fold(0.0f64, |m, v| m.max(v.abs()));
    if residual_norm >= RESIDUAL_LIMIT {
        return Err(Error::ResidualTooLarge {
            residual: residual_norm,
            tol: RESIDUAL_LIMIT,
            point: point.clone(),
        });
    }

    Ok(Populations {
        labels: level_labels(values.len()),
        values,
        residual_norm,
    })
}

/// Steady state of the full 8-state generator by dense LU with partial
/// pivoting, with an exact 1-norm condition check on the trace-closed
/// system.
pub fn steady_state(gen: &RateGenerator) -> Result<Populations> {
    solve_trace_closed(&gen.matrix, &gen.point)
}

/// Degeneracy classes of the canonical configuration, as index sets into
/// the 8-level table: I = {1,8}, II = {2,7}, III = {3,6}, IV = {4,5}
/// (1-based).
pub const CANONICAL_CLASSES: [[usize; 2]; 4] = [[0, 7], [1, 6], [2, 5], [3, 4]];

/// Build the 4×4 degeneracy-class generator for the canonical configuration.
///
/// The class structure collapses the 12 transitions into 6 class channels:
/// E couples I↔IV and II↔III at gap Δ, C couples I↔II and IV↔III at gap Δ,
/// B couples I↔III at gap 2Δ and II↔IV at gap 0, the B channels once per
/// harmonic. Each class channel carries the same per-channel rate as its two
/// underlying level transitions (the spin-flip symmetry halves the member
/// populations and the two members double the flow, which cancels), so the
/// class solve is algebraically exact, not an approximation.
pub fn build_reduced_generator(
    params: &SystemParams,
    baths: &BathSpec,
    weights: &HarmonicWeights,
) -> Result<RateGenerator> {
    params.validate()?;
    baths.validate()?;
    if !params.is_canonical_static() {
        return Err(Error::NotReducible {
            detail: format!(
                "requires ω_E = ω_0 = ω_C = ω_CE = 0 and ω_EB = ω_BC > 0, got \
                 ω_E={}, ω_0={}, ω_C={}, ω_EB={}, ω_BC={}, ω_CE={}; use the full solver",
                params.omega_e,
                params.omega_0,
                params.omega_c,
                params.omega_eb,
                params.omega_bc,
                params.omega_ce
            ),
        });
    }
    let delta = params.omega_eb;
    let nu = params.modulation.nu();
    let has_sidebands = weights.iter_nonzero().any(|(q, _)| q != 0);
    if has_sidebands && nu.is_none() {
        return Err(Error::InvalidParam {
            name: "weights",
            value: 0.0,
            constraint: "sideband weights (q ≠ 0) require a modulated scheme",
        });
    }

    // Class indices: I=0, II=1, III=2, IV=3.
    // (bath, upper class, lower class, bare gap)
    let class_channels = [
        (Bath::E, 0usize, 3usize, delta),
        (Bath::E, 1, 2, delta),
        (Bath::C, 0, 1, delta),
        (Bath::C, 3, 2, delta),
        (Bath::B, 0, 2, 2.0 * delta),
        (Bath::B, 1, 3, 0.0),
    ];

    let point = PointLabel {
        temperatures: (baths.t_e, baths.t_b, baths.t_c),
        scheme: format!("{} [4-state]", params.modulation.tag()),
    };

    let mut matrix = Matrix::zeros(4);
    let mut per_channel_rates = Vec::new();
    for (bath, upper, lower, bare_gap) in class_channels {
        let temperature = baths.temperature(bath);
        let sidebands: Vec<(i32, f64)> = match bath {
            Bath::B => weights.iter_nonzero().collect(),
            Bath::E | Bath::C => vec![(0, 1.0)],
        };
        for (q, weight) in sidebands {
            let effective_gap = bare_gap + q as f64 * nu.unwrap_or(0.0);
            let ch = ChannelRate {
                bath,
                upper,
                lower,
                bare_gap,
                q,
                weight,
                effective_gap,
                down: weight * spectral_function(effective_gap, temperature, baths.kappa),
                up: weight * spectral_function(-effective_gap, temperature, baths.kappa),
            };
            accumulate(&mut matrix, &ch);
            per_channel_rates.push(ch);
        }
    }

    Ok(RateGenerator {
        dimension: 4,
        matrix,
        per_channel_rates,
        nu,
        kappa: baths.kappa,
        energy_scale: delta,
        point,
    })
}

/// Steady state of the 4-state degeneracy-class system (canonical
/// configuration only).
///
/// Returns class populations (ρ_I, ρ_II, ρ_III, ρ_IV); each equals the sum
/// of its two member levels in the full solve. T_B = 0 needs no special
/// casing: the zero-gap channel rate P_0 κ T_B vanishes smoothly.
pub fn reduced_steady_state(
    params: &SystemParams,
    baths: &BathSpec,
    weights: &HarmonicWeights,
) -> Result<Populations> {
    let gen = build_reduced_generator(params, baths, weights)?;
    solve_trace_closed(&gen.matrix, &gen.point)
}

/// Relax dρ/dt = Lρ from `rho0` with an adaptive explicit integrator until
/// ‖Lρ‖_∞ < tol, as an independent check on the linear solves.
///
/// Errors if `t_max` runs out first. The returned populations are
/// renormalized to unit sum (the integrator conserves the sum only to
/// roundoff per step) and the residual is measured after renormalization.
pub fn relax_to_steady_state(
    gen: &RateGenerator,
    rho0: &[f64],
    t_max: f64,
    tol: f64,
) -> Result<Populations> {
    if rho0.len() != gen.dimension {
        return Err(Error::InvalidParam {
            name: "rho0",
            value: rho0.len() as f64,
            constraint: "length must match the generator dimension",
        });
    }
    let sum: f64 = rho0.iter().sum();
    if rho0.iter().any(|v| *v < NEGATIVITY_FLOOR) || (sum - 1.0).abs() > 1e-9 {
        return Err(Error::InvalidParam {
            name: "rho0",
            value: sum,
            constraint: "must be a probability vector (entries ≥ 0, sum 1)",
        });
    }
    if !(t_max > 0.0) || !(tol > 0.0) {
        return Err(Error::InvalidParam {
            name: "t_max/tol",
            value: t_max,
            constraint: "integration horizon and tolerance must be positive",
        });
    }

    let finish = |mut values: Vec<f64>| -> Result<Populations> {
        let s: f64 = values.iter().sum();
        for v in values.iter_mut() {
            *v /= s;
        }
        for (i, v) in values.iter().enumerate() {
            if *v < NEGATIVITY_FLOOR {
                return Err(Error::NegativePopulation {
                    level: i + 1,
                    value: *v,
                    point: gen.point.clone(),
                });
            }
        }
        for v in values.iter_mut() {
            if *v < 0.0 {
                *v = 0.0;
            }
        }
        let residual_norm = gen.residual(&values);
        Ok(Populations {
            labels: level_labels(values.len()),
            values,
            residual_norm,
        })
    };

    let mut y = rho0.to_vec();
    if gen.residual(&y) < tol {
        return finish(y);
    }

    // Track the integrator's local accuracy to the requested stationarity:
    // with a loose rtol the step controller lets fast modes hover at the
    // local-error budget, flooring the reachable residual above `tol`.
    let opts = OdeOptions {
        rtol: (tol * 10.0).clamp(1e-13, 1e-9),
        ..OdeOptions::default()
    };
    let matrix = &gen.matrix;
    let reason = integrate_until(
        |y, dy| {
            let out = matrix.matvec(y);
            dy.copy_from_slice(&out);
        },
        &mut y,
        t_max,
        &opts,
        |y| gen.residual(y) < tol,
    );
    match reason {
        StopReason::Converged { .. } => finish(y),
        StopReason::TimeExhausted | StopReason::StepBudgetExhausted => {
            Err(Error::RelaxationTimeout {
                residual: gen.residual(&y),
                tol,
                t_max,
            })
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::floquet::closed_form_weights;
    use crate::model::{build_level_table, ModulationScheme};

    fn canonical_setup(
        scheme: ModulationScheme,
        baths: BathSpec,
        q_max: u32,
    ) -> (RateGenerator, LevelTable) {
        let params = SystemParams::canonical(scheme);
        let table = build_level_table(&params).unwrap();
        let weights = closed_form_weights(&params.modulation, q_max).unwrap();
        let gen = build_generator(&table, &baths, &weights).unwrap();
        (gen, table)
    }

    fn transistor_baths(t_b: f64) -> BathSpec {
        BathSpec {
            t_e: 0.2,
            t_b,
            t_c: 0.02,
            kappa: 1.0,
        }
    }

    #[test]
    fn spectral_function_limits() {
        assert_eq!(spectral_function(1.0, 0.0, 1.0), 1.0);
        assert_eq!(spectral_function(-1.0, 0.0, 1.0), 0.0);
        assert_eq!(spectral_function(0.0, 0.0, 1.0), 0.0);
        assert!((spectral_function(0.0, 0.2, 1.0) - 0.2).abs() < 1e-15);
        // Linear-in-ω correction near zero: G ≈ κ(T + ω/2).
        let g = spectral_function(1e-10, 0.2, 1.0);
        assert!((g - (0.2 + 5e-11)).abs() < 1e-16);
        // Detailed balance at ω = 2, T = 0.118.
        let ratio = spectral_function(-2.0, 0.118, 1.0) / spectral_function(2.0, 0.118, 1.0);
        assert!((ratio - (-2.0 / 0.118f64).exp()).abs() < 1e-18);
        // Deep-negative argument underflows to a clean zero.
        assert_eq!(spectral_function(-2.0, 0.002, 1.0), 0.0);
    }

    #[test]
    fn generator_columns_sum_to_zero() {
        let (gen, _) = canonical_setup(
            ModulationScheme::PiFlip { nu: 1.0 },
            transistor_baths(0.118),
            1,
        );
        for j in 0..8 {
            let s: f64 = (0..8).map(|i| gen.matrix.get(i, j)).sum();
            assert!(s.abs() < 1e-14, "column {j} sums to {s}");
        }
        for i in 0..8 {
            for j in 0..8 {
                if i != j {
                    assert!(gen.matrix.get(i, j) >= 0.0);
                }
            }
        }
    }

    #[test]
    fn kms_holds_per_channel() {
        let (gen, _) = canonical_setup(
            ModulationScheme::PiFlip { nu: 3.0 },
            transistor_baths(0.118),
            1,
        );
        let baths = transistor_baths(0.118);
        for ch in &gen.per_channel_rates {
            let defect = ch.kms_relative_defect(baths.temperature(ch.bath));
            assert!(defect < 1e-12, "{:?} defect {defect}", ch);
        }
    }

    #[test]
    fn negative_effective_gap_swaps_roles() {
        // ν = 3Δ puts the q = −1 sideband of the 2Δ transition at −Δ: a
        // cold base then pumps upward (up > 0) and cannot emit (down = 0).
        let (gen, _) = canonical_setup(
            ModulationScheme::PiFlip { nu: 3.0 },
            transistor_baths(0.0),
            1,
        );
        let red = gen
            .per_channel_rates
            .iter()
            .find(|c| c.bath == Bath::B && c.bare_gap > 0.0 && c.q == -1)
            .unwrap();
        assert_eq!(red.effective_gap, -1.0);
        assert_eq!(red.down, 0.0);
        let p1 = 4.0 / (std::f64::consts::PI * std::f64::consts::PI);
        assert!((red.up - p1).abs() < 1e-15);
    }

    #[test]
    fn zero_gap_channels_carry_thermal_rate() {
        // The gap-0 pair picks up P_0 κ T_B at q = 0 and P_1 κν(2n̄+1)
        // summed over q = ±1.
        let baths = transistor_baths(0.118);
        let nu = 0.7;
        let (gen, _) = canonical_setup(ModulationScheme::Sinusoidal { lambda: 0.8, nu }, baths, 1);
        let zero_gap: Vec<_> = gen
            .per_channel_rates
            .iter()
            .filter(|c| c.bath == Bath::B && c.bare_gap == 0.0)
            .collect();
        // Two degenerate pairs, three sidebands each.
        assert_eq!(zero_gap.len(), 6);
        let n_bar = 1.0 / ((nu / 0.118f64).exp() - 1.0);
        let expected = 0.68 * 0.118 + 0.16 * nu * (2.0 * n_bar + 1.0);
        let pairs: std::collections::BTreeSet<_> =
            zero_gap.iter().map(|c| (c.upper, c.lower)).collect();
        assert_eq!(pairs.len(), 2);
        for &(u, l) in &pairs {
            let down_sum: f64 = zero_gap
                .iter()
                .filter(|c| c.upper == u && c.lower == l)
                .map(|c| c.down)
                .sum();
            let up_sum: f64 = zero_gap
                .iter()
                .filter(|c| c.upper == u && c.lower == l)
                .map(|c| c.up)
                .sum();
            assert!((down_sum - expected).abs() < 1e-14);
            assert!((up_sum - expected).abs() < 1e-14);
        }
    }

    #[test]
    fn equilibrium_steady_state_is_gibbs() {
        let baths = BathSpec {
            t_e: 0.1,
            t_b: 0.1,
            t_c: 0.1,
            kappa: 1.0,
        };
        let (gen, table) = canonical_setup(ModulationScheme::Unmodulated, baths, 0);
        let rho = steady_state(&gen).unwrap();
        let z: f64 = table.energies.iter().map(|e| (-e / 0.1).exp()).sum();
        for (v, e) in rho.values.iter().zip(table.energies.iter()) {
            let gibbs = (-e / 0.1).exp() / z;
            assert!((v - gibbs).abs() < 1e-13, "{v} vs {gibbs}");
        }
        assert!(rho.residual_norm < 1e-12);
    }

    #[test]
    fn detailed_balance_at_equilibrium() {
        let baths = BathSpec {
            t_e: 0.1,
            t_b: 0.1,
            t_c: 0.1,
            kappa: 1.0,
        };
        let (gen, _) = canonical_setup(ModulationScheme::Unmodulated, baths, 0);
        let rho = steady_state(&gen).unwrap();
        for ch in &gen.per_channel_rates {
            assert!(ch.net_flow(&rho.values).abs() < 1e-12);
        }
    }

    #[test]
    fn spin_flip_symmetry_of_steady_state() {
        let (gen, _) = canonical_setup(
            ModulationScheme::Sinusoidal { lambda: 0.8, nu: 1.3 },
            transistor_baths(0.118),
            1,
        );
        let rho = steady_state(&gen).unwrap();
        for [a, b] in CANONICAL_CLASSES {
            assert!((rho.values[a] - rho.values[b]).abs() < 1e-12);
        }
    }

    #[test]
    fn reduced_matches_full_class_sums() {
        let params = SystemParams::canonical(ModulationScheme::PiFlip { nu: 1.0 });
        let baths = transistor_baths(0.118);
        let weights = closed_form_weights(&params.modulation, 1).unwrap();
        let table = build_level_table(&params).unwrap();
        let full = steady_state(&build_generator(&table, &baths, &weights).unwrap()).unwrap();
        let reduced = reduced_steady_state(&params, &baths, &weights).unwrap();
        for (ci, members) in CANONICAL_CLASSES.iter().enumerate() {
            let class_sum = full.sum_of(members);
            assert!(
                (class_sum - reduced.values[ci]).abs() < 1e-12,
                "class {ci}: {class_sum} vs {}",
                reduced.values[ci]
            );
        }
    }

    #[test]
    fn reduced_rejects_non_canonical() {
        let mut params = SystemParams::canonical(ModulationScheme::Unmodulated);
        params.omega_e = 0.3;
        let weights = closed_form_weights(&params.modulation, 0).unwrap();
        let err = reduced_steady_state(&params, &transistor_baths(0.118), &weights).unwrap_err();
        assert!(matches!(err, Error::NotReducible { .. }));
    }

    #[test]
    fn relaxation_reproduces_linear_solve() {
        let (gen, _) = canonical_setup(
            ModulationScheme::Unmodulated,
            transistor_baths(0.118),
            0,
        );
        let direct = steady_state(&gen).unwrap();
        let uniform = vec![1.0 / 8.0; 8];
        let relaxed = relax_to_steady_state(&gen, &uniform, 1e5, 1e-12).unwrap();
        for (a, b) in direct.values.iter().zip(relaxed.values.iter()) {
            assert!((a - b).abs() < 1e-8);
        }
        // Concentrated start converges to the same fixed point.
        let mut spike = vec![0.0; 8];
        spike[0] = 1.0;
        let from_spike = relax_to_steady_state(&gen, &spike, 1e5, 1e-12).unwrap();
        for (a, b) in direct.values.iter().zip(from_spike.values.iter()) {
            assert!((a - b).abs() < 1e-8);
        }
    }

    #[test]
    fn relaxation_returns_immediately_at_fixed_point() {
        let (gen, _) = canonical_setup(
            ModulationScheme::Unmodulated,
            transistor_baths(0.118),
            0,
        );
        let direct = steady_state(&gen).unwrap();
        let again = relax_to_steady_state(&gen, &direct.values, 1e-3, 1e-10).unwrap();
        assert!(again.residual_norm < 1e-10);
    }

    #[test]
    fn relaxation_times_out_honestly() {
        let (gen, _) = canonical_setup(
            ModulationScheme::Unmodulated,
            transistor_baths(0.118),
            0,
        );
        let uniform = vec![1.0 / 8.0; 8];
        let err = relax_to_steady_state(&gen, &uniform, 1e-3, 1e-12).unwrap_err();
        assert!(matches!(err, Error::RelaxationTimeout { .. }));
    }
}
