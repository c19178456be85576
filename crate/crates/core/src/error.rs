//! Error type shared by all simulator modules.

use thiserror::Error;

/// A human-readable tag for the parameter point at which a solver failed.
///
/// Carried inside solver errors so that sweep drivers can report which grid
/// point went wrong without holding on to the full configuration.
#[derive(Debug, Clone, PartialEq)]
pub struct PointLabel {
    /// Bath temperatures (T_E, T_B, T_C) in units of ħΔ/k_B.
    pub temperatures: (f64, f64, f64),
    /// Modulation description, e.g. `"piflip(nu=1.5)"`.
    pub scheme: String,
}

impl std::fmt::Display for PointLabel {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let (te, tb, tc) = self.temperatures;
        write!(f, "T_E={te}, T_B={tb}, T_C={tc}, {}", self.scheme)
    }
}

/// Everything that can go wrong while building or solving a transistor model.
#[derive(Debug, Error)]
pub enum Error {
    /// A physical parameter violates its documented constraint.
    #[error("invalid parameter `{name}` = {value}: {constraint}")]
    InvalidParam {
        name: &'static str,
        value: f64,
        constraint: &'static str,
    },

    /// A parameter is NaN or infinite.
    #[error("parameter `{name}` must be a finite real number")]
    NonFinite { name: &'static str },

    /// A tabulated waveform whose period average differs from the declared
    /// mean frequency.
    #[error(
        "tabulated waveform mean {mean} deviates from omega_0 = {expected} \
         beyond 1e-9 relative tolerance"
    )]
    WaveformMeanMismatch { mean: f64, expected: f64 },

    /// Closed-form harmonic weights requested for a scheme that has none.
    #[error("no closed-form harmonic weights for {scheme}; use quadrature_weights")]
    ClosedFormUnavailable { scheme: String },

    /// Quadrature refinement hit the step cap before successive weight
    /// iterates settled. Both final iterates are returned for diagnosis.
    #[error(
        "harmonic-weight quadrature did not converge at {steps} steps: \
         successive max difference {diff:.3e} (tolerance {tol:.1e})"
    )]
    QuadratureNotConverged {
        steps: usize,
        diff: f64,
        tol: f64,
        /// P_q map from the second-to-last refinement, indexed −q_max..=q_max.
        penultimate: Vec<f64>,
        /// P_q map from the last refinement, same indexing.
        last: Vec<f64>,
    },

    /// The trace-augmented steady-state system is numerically singular.
    #[error("steady-state system ill-conditioned (cond ~ {cond:.3e}) at {point}")]
    IllConditioned { cond: f64, point: PointLabel },

    /// The linear solve returned a population below the negativity floor,
    /// which indicates a rate-sign bug rather than roundoff.
    #[error("negative population {value:.3e} at level {level} at {point}")]
    NegativePopulation {
        level: usize,
        value: f64,
        point: PointLabel,
    },

    /// The steady-state residual ‖Lρ‖_∞ exceeds the acceptance threshold.
    #[error("steady-state residual {residual:.3e} exceeds {tol:.1e} at {point}")]
    ResidualTooLarge {
        residual: f64,
        tol: f64,
        point: PointLabel,
    },

    /// The heat-current energy balance (including drive power) failed, which
    /// signals an inconsistency between the generator and the currents.
    #[error(
        "energy balance violated: |J_E + J_B + J_C + P_drive| = {imbalance:.3e} \
         exceeds {tol:.3e} at {point}"
    )]
    EnergyBalance {
        imbalance: f64,
        tol: f64,
        point: PointLabel,
    },

    /// The 4-state reduced solver only covers the degenerate configuration
    /// (all bare frequencies zero, omega_EB = omega_BC, omega_CE = 0).
    #[error("reduced solver requires the degenerate configuration: {detail}")]
    NotReducible { detail: String },

    /// ODE relaxation ran out of integration time before reaching tolerance.
    #[error(
        "relaxation did not reach residual {tol:.1e} within t = {t_max}: \
         final residual {residual:.3e}"
    )]
    RelaxationTimeout { residual: f64, tol: f64, t_max: f64 },

    /// Fewer than three points, or a non-monotone grid, for derivatives.
    #[error("amplification needs >= 3 strictly increasing grid points: {detail}")]
    BadGrid { detail: String },

    /// Closed-form approximations only cover harmonics |q| <= 1.
    #[error("closed-form approximation limited to |q| <= 1, got P_{q} != 0")]
    HarmonicOutOfScope { q: i32 },
}

impl Error {
    /// Short stable token identifying the error class, for machine-readable
    /// status fields (e.g. `status=error:<code>` rows in sweep output).
    pub fn code(&self) -> &'static str {
        match self {
            Error::InvalidParam { .. } => "invalid_param",
            Error::NonFinite { .. } => "non_finite",
            Error::WaveformMeanMismatch { .. } => "waveform_mean",
            Error::ClosedFormUnavailable { .. } => "no_closed_form",
            Error::QuadratureNotConverged { .. } => "quadrature",
            Error::IllConditioned { .. } => "ill_conditioned",
            Error::NegativePopulation { .. } => "negative_population",
            Error::ResidualTooLarge { .. } => "residual",
            Error::EnergyBalance { .. } => "energy_balance",
            Error::NotReducible { .. } => "not_reducible",
            Error::RelaxationTimeout { .. } => "relaxation_timeout",
            Error::BadGrid { .. } => "bad_grid",
            Error::HarmonicOutOfScope { .. } => "harmonic_scope",
        }
    }
}

/// Crate-wide result alias.
pub type Result<T> = std::result::Result<T, Error>;
