//! Harmonic weights P_q of the periodic base-qubit drive.
//!
//! A periodic modulation of ω_B(t) splits every base-qubit transition into
//! sidebands at ω ± qν. The weight of the q-th sideband is P_q = |ξ(q)|² with
//!
//!   ξ(q) = (1/τ) ∫₀^τ exp(−i Φ(t)) e^{iqνt} dt,   Φ(t) = ∫₀^t (ω_B(s) − ω_0) ds,
//!
//! where τ = 2π/ν. Two backends are provided: the truncated closed forms
//! used by all reproduction targets, and exact quadrature of ξ(q).

use crate::error::{Error, Result};
use crate::model::ModulationScheme;

/// Harmonic weights P_q for q ∈ [−q_max, q_max].
#[derive(Debug, Clone, PartialEq, serde::Serialize)]
pub struct HarmonicWeights {
    /// Truncation order.
    pub q_max: u32,
    /// P_q indexed by q + q_max (so index 0 holds P_{−q_max}).
    weights: Vec<f64>,
    /// 1 − Σ_{|q| ≤ q_max} P_q. Recorded, not corrected.
    pub normalization_defect: f64,
}

/// Highest truncation order accepted anywhere.
pub const Q_MAX_LIMIT: u32 = 10;

impl HarmonicWeights {
    fn from_map(q_max: u32, weights: Vec<f64>) -> Self {
        debug_assert_eq!(weights.len(), 2 * q_max as usize + 1);
        let sum: f64 = weights.iter().sum();
        HarmonicWeights {
            q_max,
            weights,
            normalization_defect: 1.0 - sum,
        }
    }

    /// P_q; zero outside the truncation window.
    pub fn weight(&self, q: i32) -> f64 {
        if q.unsigned_abs() > self.q_max {
            0.0
        } else {
            self.weights[(q + self.q_max as i32) as usize]
        }
    }

    /// Iterate (q, P_q) over the truncation window, ascending in q.
    pub fn iter(&self) -> impl Iterator<Item = (i32, f64)> + '_ {
        let q_max = self.q_max as i32;
        (-q_max..=q_max).map(move |q| (q, self.weight(q)))
    }

    /// Iterate only the harmonics that contribute, i.e. P_q > 0.
    pub fn iter_nonzero(&self) -> impl Iterator<Item = (i32, f64)> + '_ {
        self.iter().filter(|(_, p)| *p > 0.0)
    }

    /// Divide all weights by their sum so they add to 1 exactly.
    ///
    /// Opt-in: the truncated sum is deliberately kept as-is by default
    /// because rescaling shifts every downstream current (by ~23% for the
    /// π-flip truncated at |q| = 1).
    pub fn renormalized(&self) -> HarmonicWeights {
        let sum = 1.0 - self.normalization_defect;
        let weights = self.weights.iter().map(|p| p / sum).collect();
        HarmonicWeights::from_map(self.q_max, weights)
    }
}

fn check_q_max(scheme: &ModulationScheme, q_max: u32) -> Result<()> {
    if q_max > Q_MAX_LIMIT {
        return Err(Error::InvalidParam {
            name: "q_max",
            value: q_max as f64,
            constraint: "q_max ≤ 10",
        });
    }
    let modulated = !matches!(scheme, ModulationScheme::Unmodulated);
    if modulated && q_max < 1 {
        return Err(Error::InvalidParam {
            name: "q_max",
            value: q_max as f64,
            constraint: "q_max ≥ 1 for modulated schemes",
        });
    }
    Ok(())
}

/// Truncated closed-form weights.
///
/// Unmodulated → P_0 = 1. Sinusoidal → P_0 = 1 − λ²/2, P_{±1} = λ²/4.
/// π-flip → P_0 = 0, P_{±1} = 4/π². Higher harmonics are zero; the
/// truncation defect is recorded in `normalization_defect`.
pub fn closed_form_weights(scheme: &ModulationScheme, q_max: u32) -> Result<HarmonicWeights> {
    check_q_max(scheme, q_max)?;
    let n = 2 * q_max as usize + 1;
    let mut w = vec![0.0; n];
    let center = q_max as usize;
    match scheme {
        ModulationScheme::Unmodulated => {
            w[center] = 1.0;
        }
        ModulationScheme::Sinusoidal { lambda, nu } => {
            check_modulated(*lambda, *nu)?;
            w[center] = 1.0 - lambda * lambda / 2.0;
            w[center - 1] = lambda * lambda / 4.0;
            w[center + 1] = lambda * lambda / 4.0;
        }
        ModulationScheme::PiFlip { nu } => {
            check_modulated(0.0, *nu)?;
            let p1 = 4.0 / (std::f64::consts::PI * std::f64::consts::PI);
            w[center - 1] = p1;
            w[center + 1] = p1;
        }
        ModulationScheme::Tabulated { .. } => {
            return Err(Error::ClosedFormUnavailable {
                scheme: scheme.tag(),
            });
        }
    }
    Ok(HarmonicWeights::from_map(q_max, w))
}

fn check_modulated(lambda: f64, nu: f64) -> Result<()> {
    if !lambda.is_finite() || !(0.0..=1.0).contains(&lambda) {
        return Err(Error::InvalidParam {
            name: "lambda",
            value: lambda,
            constraint: "0 ≤ λ ≤ 1",
        });
    }
    if !nu.is_finite() || nu <= 0.0 {
        return Err(Error::InvalidParam {
            name: "nu",
            value: nu,
            constraint: "ν > 0 for modulated schemes",
        });
    }
    Ok(())
}

/// Accumulated phase deviation Φ at scaled time s = t/τ ∈ [0, 1], divided
/// into segments between phase discontinuities. The drive frequency ν drops
/// out of Φ for the built-in schemes, leaving the weights ν-independent;
/// tabulated waveforms keep their ν through the integral of (ω_B − ω_0) dt.
struct PhaseProfile {
    /// Segment boundaries in s, starting at 0 and ending at 1, ascending.
    breaks: Vec<f64>,
    /// Φ(s) evaluator, smooth within each segment.
    phase: Box<dyn Fn(f64) -> f64>,
}

fn phase_profile(scheme: &ModulationScheme) -> PhaseProfile {
    match scheme {
        ModulationScheme::Unmodulated => PhaseProfile {
            breaks: vec![0.0, 1.0],
            phase: Box::new(|_| 0.0),
        },
        ModulationScheme::Sinusoidal { lambda, .. } => {
            // Φ(t) = ∫₀^t λν sin(νs) ds = λ(1 − cos νt).
            let lambda = *lambda;
            PhaseProfile {
                breaks: vec![0.0, 1.0],
                phase: Box::new(move |s| {
                    lambda * (1.0 - (2.0 * std::f64::consts::PI * s).cos())
                }),
            }
        }
        ModulationScheme::PiFlip { .. } => {
            // Phase kicks of ±π at s = 1/4 and 3/4: Φ alternates 0, π, 0.
            PhaseProfile {
                breaks: vec![0.0, 0.25, 0.75, 1.0],
                phase: Box::new(|s| {
                    if (0.25..0.75).contains(&s) {
                        std::f64::consts::PI
                    } else {
                        0.0
                    }
                }),
            }
        }
        ModulationScheme::Tabulated { waveform, nu } => {
            // Piecewise-linear interpolant of ω_B − ω_0 on a uniform periodic
            // grid; Φ is its exact integral (piecewise quadratic in s).
            let tau = 2.0 * std::f64::consts::PI / nu;
            let n = waveform.len();
            let mean = waveform.iter().sum::<f64>() / n as f64;
            let dev: Vec<f64> = waveform.iter().map(|w| w - mean).collect();
            // Cumulative integral of the interpolant up to each node, in t.
            let h = tau / n as f64;
            let mut cum = Vec::with_capacity(n + 1);
            cum.push(0.0);
            for k in 0..n {
                let a = dev[k];
                let b = dev[(k + 1) % n];
                cum.push(cum[k] + 0.5 * (a + b) * h);
            }
            let breaks: Vec<f64> = (0..=n).map(|k| k as f64 / n as f64).collect();
            PhaseProfile {
                breaks,
                phase: Box::new(move |s| {
                    let x = (s * n as f64).clamp(0.0, n as f64);
                    let k = (x.floor() as usize).min(n - 1);
                    let frac = x - k as f64;
                    let a = dev[k];
                    let b = dev[(k + 1) % n];
                    // ∫ over the partial cell: linear ramp a → b.
                    cum[k] + h * frac * (a + 0.5 * frac * (b - a))
                }),
            }
        }
    }
}

/// ξ(q) for all q at a given resolution: composite trapezoid on each smooth
/// segment of the phase profile, nodes distributed proportional to segment
/// length (at least 2 per segment).
fn xi_all(profile: &PhaseProfile, q_max: u32, n_steps: usize) -> Vec<f64> {
    let nq = 2 * q_max as usize + 1;
    let mut re = vec![0.0f64; nq];
    let mut im = vec![0.0f64; nq];
    let two_pi = 2.0 * std::f64::consts::PI;
    for seg in profile.breaks.windows(2) {
        let (s0, s1) = (seg[0], seg[1]);
        let len = s1 - s0;
        if len <= 0.0 {
            continue;
        }
        let n = ((n_steps as f64 * len).round() as usize).max(2);
        let h = len / n as f64;
        for node in 0..=n {
            let s = s0 + node as f64 * h;
            // Evaluate Φ just inside the segment at its endpoints so jump
            // discontinuities resolve to this segment's branch.
            let eps = 1e-12 * len;
            let s_eval = if node == 0 {
                s + eps
            } else if node == n {
                s - eps
            } else {
                s
            };
            let phi = (profile.phase)(s_eval);
            let w = if node == 0 || node == n { 0.5 } else { 1.0 };
            for (qi, q) in (-(q_max as i32)..=q_max as i32).enumerate() {
                // exp(i(qνt − Φ)) with νt = 2πs.
                let arg = two_pi * q as f64 * s - phi;
                re[qi] += w * h * arg.cos();
                im[qi] += w * h * arg.sin();
            }
        }
    }
    re.iter()
        .zip(im.iter())
        .map(|(r, i)| r * r + i * i)
        .collect()
}

/// Minimum quadrature resolution.
pub const MIN_QUADRATURE_STEPS: usize = 1024;

/// Resolution cap for quadrature refinement.
pub const MAX_QUADRATURE_STEPS: usize = 1 << 20;

/// Exact harmonic weights by trapezoidal quadrature of the phase integral.
///
/// Starting from `n_steps` (raised to at least 1024), the resolution doubles
/// until every P_q changes by less than 1e-10 between refinements. The
/// smooth profiles converge at the first doubling; the π-flip profile with
/// its phase jumps needs O(10⁵) nodes. A profile still moving at 2²⁰ steps
/// is reported as an error carrying the last two iterates.
pub fn quadrature_weights(
    scheme: &ModulationScheme,
    q_max: u32,
    n_steps: usize,
) -> Result<HarmonicWeights> {
    check_q_max(scheme, q_max)?;
    if let ModulationScheme::Sinusoidal { lambda, nu } = scheme {
        check_modulated(*lambda, *nu)?;
    }
    const TOL: f64 = 1e-10;
    let profile = phase_profile(scheme);
    let mut n = n_steps.max(MIN_QUADRATURE_STEPS);
    let mut prev = xi_all(&profile, q_max, n);
    loop {
        let next_n = n * 2;
        let next = xi_all(&profile, q_max, next_n);
        let diff = prev
            .iter()
            .zip(next.iter())
            .fold(0.0f64, |m, (a, b)| m.max((a - b).abs()));
        if diff < TOL {
            return Ok(HarmonicWeights::from_map(q_max, next));
        }
        if next_n >= MAX_QUADRATURE_STEPS {
            return Err(Error::QuadratureNotConverged {
                steps: next_n,
                diff,
                tol: TOL,
                penultimate: prev,
                last: next,
            });
        }
        prev = next;
        n = next_n;
    }
}
