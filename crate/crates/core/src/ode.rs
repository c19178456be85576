//! Adaptive explicit Runge–Kutta integration (Dormand–Prince 5(4)).
//!
//! Used as an independent relaxation oracle for the steady-state solve: the
//! population dynamics is integrated forward until it stops moving. The
//! 8-dimensional rate systems here are mildly stiff at most (the slowest
//! relaxation mode is set by the hottest bath's excitation rate), so an
//! explicit pair with step control is adequate and keeps this route fully
//! independent of the linear-algebra route.

/// Step-control settings.
#[derive(Debug, Clone, Copy)]
pub struct OdeOptions {
    /// Relative tolerance of the embedded error estimate.
    pub rtol: f64,
    /// Absolute tolerance of the embedded error estimate.
    pub atol: f64,
    /// Initial step size.
    pub h_init: f64,
    /// Hard cap on attempted steps.
    pub max_steps: usize,
}

impl Default for OdeOptions {
    fn default() -> Self {
        OdeOptions {
            rtol: 1e-9,
            atol: 1e-16,
            h_init: 1e-3,
            max_steps: 50_000_000,
        }
    }
}

/// Why integration stopped.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum StopReason {
    /// The caller's stop predicate returned true at time t.
    Converged { t: f64 },
    /// Reached t_max without the predicate firing.
    TimeExhausted,
    /// Step budget exhausted (pathological tolerances or dynamics).
    StepBudgetExhausted,
}

// Dormand–Prince 5(4) tableau (autonomous form; stage times not needed).
const A: [[f64; 6]; 6] = [
    [0.2, 0.0, 0.0, 0.0, 0.0, 0.0],
    [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
    [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
    [
        19372.0 / 6561.0,
        -25360.0 / 2187.0,
        64448.0 / 6561.0,
        -212.0 / 729.0,
        0.0,
        0.0,
    ],
    [
        9017.0 / 3168.0,
        -355.0 / 33.0,
        46732.0 / 5247.0,
        49.0 / 176.0,
        -5103.0 / 18656.0,
        0.0,
    ],
    [
        35.0 / 384.0,
        0.0,
        500.0 / 1113.0,
        125.0 / 192.0,
        -2187.0 / 6784.0,
        11.0 / 84.0,
    ],
];
// 5th-order minus 4th-order weights, per stage; h·Σ E_j k_j is the local
// error estimate. The last A row doubles as the 5th-order weights (FSAL).
const E: [f64; 7] = [
    71.0 / 57600.0,
    0.0,
    -71.0 / 16695.0,
    71.0 / 1920.0,
    -17253.0 / 339200.0,
    22.0 / 525.0,
    -1.0 / 40.0,
];

/// Integrate y' = f(y) (autonomous) from t = 0 to at most `t_max`, calling
/// `stop(y)` after every accepted step and returning early when it fires.
pub fn integrate_until<F, S>(
    f: F,
    y: &mut [f64],
    t_max: f64,
    opts: &OdeOptions,
    mut stop: S,
) -> StopReason
where
    F: Fn(&[f64], &mut [f64]),
    S: FnMut(&[f64]) -> bool,
{
    let n = y.len();
    let mut k = vec![vec![0.0f64; n]; 7];
    let mut y_stage = vec![0.0f64; n];
    let mut y_new = vec![0.0f64; n];

    let mut t = 0.0f64;
    let mut h = opts.h_init.min(t_max).max(f64::MIN_POSITIVE);
    f(y, &mut k[0]);

    for _ in 0..opts.max_steps {
        if t >= t_max {
            return StopReason::TimeExhausted;
        }
        if t + h > t_max {
            h = t_max - t;
        }

        for s in 0..6 {
            for i in 0..n {
                let mut acc = 0.0;
                for (j, kj) in k.iter().enumerate().take(s + 1) {
                    let a = A[s][j];
                    if a != 0.0 {
                        acc += a * kj[i];
                    }
                }
                y_stage[i] = y[i] + h * acc;
            }
            f(&y_stage, &mut k[s + 1]);
        }
        // The last stage was evaluated at the 5th-order solution itself.
        y_new.copy_from_slice(&y_stage);

        let mut err_sq = 0.0f64;
        for i in 0..n {
            let e: f64 = h * k.iter().zip(E.iter()).map(|(kj, ej)| ej * kj[i]).sum::<f64>();
            let scale = opts.atol + opts.rtol * y[i].abs().max(y_new[i].abs());
            err_sq += (e / scale) * (e / scale);
        }
        let err = (err_sq / n as f64).sqrt();

        if err.is_finite() && err <= 1.0 {
            t += h;
            y.copy_from_slice(&y_new);
            // FSAL: the 7th stage of the accepted step is f at the new y.
            k.swap(0, 6);
            if stop(y) {
                return StopReason::Converged { t };
            }
            let grow = if err == 0.0 {
                5.0
            } else {
                (0.9 * err.powf(-0.2)).clamp(0.2, 5.0)
            };
            h *= grow;
        } else if err.is_finite() {
            h *= (0.9 * err.powf(-0.2)).clamp(0.1, 0.5);
        } else {
            h *= 0.1;
        }
    }
    StopReason::StepBudgetExhausted
}
