//! Physical parameter space, the 8-level quasi-energy spectrum, and the
//! bath-driven transition graph of the three-qubit thermal transistor.
//!
//! Units throughout: ħ = k_B = 1, frequencies in units of the coupling Δ,
//! temperatures in units of ħΔ/k_B, heat currents in units of κħΔ².

use crate::error::{Error, Result};

/// Number of levels in the composite three-qubit system.
pub const N_LEVELS: usize = 8;

/// Number of bath-driven transitions (4 per bath).
pub const N_TRANSITIONS: usize = 12;

/// Which thermal reservoir drives a transition.
///
/// E couples to the emitter qubit, B to the base, C to the collector.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, serde::Serialize)]
pub enum Bath {
    E,
    B,
    C,
}

impl Bath {
    /// All baths in the fixed enumeration order used for the transition table.
    pub const ALL: [Bath; 3] = [Bath::B, Bath::E, Bath::C];
}

impl std::fmt::Display for Bath {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Bath::E => write!(f, "E"),
            Bath::B => write!(f, "B"),
            Bath::C => write!(f, "C"),
        }
    }
}

/// Periodic drive applied to the base qubit frequency ω_B(t).
///
/// The drive is characterized by its angular frequency ν and the shape of
/// ω_B(t) − ω_0 over one period τ = 2π/ν.
#[derive(Debug, Clone, PartialEq, serde::Serialize)]
pub enum ModulationScheme {
    /// Static base frequency: ω_B(t) = ω_0.
    Unmodulated,
    /// ω_B(t) = ω_0 + λν sin νt, amplitude 0 ≤ λ ≤ 1.
    Sinusoidal { lambda: f64, nu: f64 },
    /// Square-wave phase kicks: φ(t) jumps by ±π twice per period, so the
    /// accumulated phase alternates between 0 and π for half a period each.
    PiFlip { nu: f64 },
    /// Arbitrary sampled ω_B(t) over one period, uniform grid starting at
    /// t = 0; the period average must equal ω_0.
    Tabulated { waveform: Vec<f64>, nu: f64 },
}

impl ModulationScheme {
    /// Modulation angular frequency, `None` for the static case.
    pub fn nu(&self) -> Option<f64> {
        match self {
            ModulationScheme::Unmodulated => None,
            ModulationScheme::Sinusoidal { nu, .. }
            | ModulationScheme::PiFlip { nu }
            | ModulationScheme::Tabulated { nu, .. } => Some(*nu),
        }
    }

    /// Same scheme at a different drive frequency; the static scheme is
    /// returned unchanged.
    pub fn with_nu(&self, nu: f64) -> ModulationScheme {
        match self {
            ModulationScheme::Unmodulated => ModulationScheme::Unmodulated,
            ModulationScheme::Sinusoidal { lambda, .. } => ModulationScheme::Sinusoidal {
                lambda: *lambda,
                nu,
            },
            ModulationScheme::PiFlip { .. } => ModulationScheme::PiFlip { nu },
            ModulationScheme::Tabulated { waveform, .. } => ModulationScheme::Tabulated {
                waveform: waveform.clone(),
                nu,
            },
        }
    }

    /// Short descriptive tag, e.g. for error labels and output file names.
    pub fn tag(&self) -> String {
        match self {
            ModulationScheme::Unmodulated => "unmodulated".to_string(),
            ModulationScheme::Sinusoidal { lambda, nu } => {
                format!("sinusoidal(lambda={lambda}, nu={nu})")
            }
            ModulationScheme::PiFlip { nu } => format!("piflip(nu={nu})"),
            ModulationScheme::Tabulated { waveform, nu } => {
                format!("tabulated({} samples, nu={nu})", waveform.len())
            }
        }
    }

    fn validate(&self) -> Result<()> {
        match self {
            ModulationScheme::Unmodulated => Ok(()),
            ModulationScheme::Sinusoidal { lambda, nu } => {
                if !lambda.is_finite() {
                    return Err(Error::NonFinite { name: "lambda" });
                }
                if !(0.0..=1.0).contains(lambda) {
                    return Err(Error::InvalidParam {
                        name: "lambda",
                        value: *lambda,
                        constraint: "0 ≤ λ ≤ 1",
                    });
                }
                check_nu(*nu)
            }
            ModulationScheme::PiFlip { nu } => check_nu(*nu),
            ModulationScheme::Tabulated { waveform, nu } => {
                check_nu(*nu)?;
                if waveform.is_empty() {
                    return Err(Error::InvalidParam {
                        name: "waveform",
                        value: 0.0,
                        constraint: "at least one sample per period",
                    });
                }
                if waveform.iter().any(|w| !w.is_finite()) {
                    return Err(Error::NonFinite { name: "waveform" });
                }
                Ok(())
            }
        }
    }
}

fn check_nu(nu: f64) -> Result<()> {
    if !nu.is_finite() {
        return Err(Error::NonFinite { name: "nu" });
    }
    if nu <= 0.0 {
        return Err(Error::InvalidParam {
            name: "nu",
            value: nu,
            constraint: "ν > 0 for modulated schemes",
        });
    }
    Ok(())
}

/// Static frequencies and couplings of the three-qubit Hamiltonian, plus the
/// base-qubit modulation. All in units of Δ.
#[derive(Debug, Clone, PartialEq, serde::Serialize)]
pub struct SystemParams {
    /// Emitter qubit bare frequency ω_E.
    pub omega_e: f64,
    /// Time-averaged base qubit frequency ω_0.
    pub omega_0: f64,
    /// Collector qubit bare frequency ω_C.
    pub omega_c: f64,
    /// Emitter–base coupling ω_EB.
    pub omega_eb: f64,
    /// Base–collector coupling ω_BC.
    pub omega_bc: f64,
    /// Collector–emitter coupling ω_CE.
    pub omega_ce: f64,
    /// Periodic drive on the base qubit.
    pub modulation: ModulationScheme,
}

impl SystemParams {
    /// The transistor working point: ω_E = ω_0 = ω_C = ω_CE = 0 and
    /// ω_EB = ω_BC = Δ = 1, with the given modulation.
    pub fn canonical(modulation: ModulationScheme) -> Self {
        SystemParams {
            omega_e: 0.0,
            omega_0: 0.0,
            omega_c: 0.0,
            omega_eb: 1.0,
            omega_bc: 1.0,
            omega_ce: 0.0,
            modulation,
        }
    }

    /// Whether the static part matches the canonical transistor configuration
    /// (the only configuration the 4-state reduced solver covers).
    pub fn is_canonical_static(&self) -> bool {
        self.omega_e == 0.0
            && self.omega_0 == 0.0
            && self.omega_c == 0.0
            && self.omega_ce == 0.0
            && self.omega_eb == self.omega_bc
            && self.omega_eb > 0.0
    }

    /// Validate finiteness, modulation constraints, and the period-average
    /// constraint for tabulated waveforms.
    pub fn validate(&self) -> Result<()> {
        for (name, v) in [
            ("omega_e", self.omega_e),
            ("omega_0", self.omega_0),
            ("omega_c", self.omega_c),
            ("omega_eb", self.omega_eb),
            ("omega_bc", self.omega_bc),
            ("omega_ce", self.omega_ce),
        ] {
            if !v.is_finite() {
                return Err(Error::NonFinite { name });
            }
        }
        self.modulation.validate()?;
        if let ModulationScheme::Tabulated { waveform, .. } = &self.modulation {
            // Period average of ω_B(t) must reproduce ω_0 (trapezoid on a
            // periodic uniform grid = plain sample mean).
            let mean = waveform.iter().sum::<f64>() / waveform.len() as f64;
            let scale = self
                .omega_0
                .abs()
                .max(waveform.iter().fold(0.0f64, |m, w| m.max(w.abs())));
            let tol = if scale == 0.0 { 1e-9 } else { 1e-9 * scale };
            if (mean - self.omega_0).abs() > tol {
                return Err(Error::WaveformMeanMismatch {
                    mean,
                    expected: self.omega_0,
                });
            }
        }
        Ok(())
    }
}

/// Temperatures of the three reservoirs and the shared ohmic coefficient.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize)]
pub struct BathSpec {
    /// Emitter bath temperature T_E.
    pub t_e: f64,
    /// Base bath temperature T_B (T_B = 0 is a supported limit).
    pub t_b: f64,
    /// Collector bath temperature T_C.
    pub t_c: f64,
    /// Ohmic coefficient κ, identical for all three baths.
    pub kappa: f64,
}

impl BathSpec {
    /// Temperature of one reservoir.
    pub fn temperature(&self, bath: Bath) -> f64 {
        match bath {
            Bath::E => self.t_e,
            Bath::B => self.t_b,
            Bath::C => self.t_c,
        }
    }

    /// Validate positivity constraints (T_B may be exactly zero).
    pub fn validate(&self) -> Result<()> {
        for (name, v) in [
            ("t_e", self.t_e),
            ("t_b", self.t_b),
            ("t_c", self.t_c),
            ("kappa", self.kappa),
        ] {
            if !v.is_finite() {
                return Err(Error::NonFinite { name });
            }
        }
        if self.t_e <= 0.0 {
            return Err(Error::InvalidParam {
                name: "t_e",
                value: self.t_e,
                constraint: "T_E > 0",
            });
        }
        if self.t_c <= 0.0 {
            return Err(Error::InvalidParam {
                name: "t_c",
                value: self.t_c,
                constraint: "T_C > 0",
            });
        }
        if self.t_b < 0.0 {
            return Err(Error::InvalidParam {
                name: "t_b",
                value: self.t_b,
                constraint: "T_B ≥ 0",
            });
        }
        if self.kappa <= 0.0 {
            return Err(Error::InvalidParam {
                name: "kappa",
                value: self.kappa,
                constraint: "κ > 0",
            });
        }
        Ok(())
    }
}

/// One bath-driven transition between two levels.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Transition {
    /// Reservoir driving this transition.
    pub bath: Bath,
    /// Upper level, 0-based. For a degenerate pair the lower index plays
    /// the role of "upper" by convention.
    pub upper: usize,
    /// Lower level, 0-based.
    pub lower: usize,
    /// Bare gap ω_upper − ω_lower ≥ 0.
    pub gap: f64,
}

/// The 8 quasi-energy levels of the time-averaged Hamiltonian and the 12
/// single-spin-flip transitions between them.
///
/// Levels are indexed 0..8 in the binary order of (s_E, s_B, s_C) with the
/// emitter spin most significant and bit 0 ↦ spin +1, so index 0 = |↑↑↑⟩
/// through index 7 = |↓↓↓⟩.
#[derive(Debug, Clone, PartialEq)]
pub struct LevelTable {
    /// Quasi-energy ω_j of each level.
    pub energies: [f64; N_LEVELS],
    /// Spin triple (s_E, s_B, s_C) of each level, entries ±1.
    pub spins: [[i8; 3]; N_LEVELS],
    /// The 12 transitions, grouped by bath in the order B, E, C.
    pub transitions: Vec<Transition>,
    /// The base-qubit drive the table was built with; downstream rate
    /// assembly reads the sideband spacing ν from here.
    pub modulation: ModulationScheme,
}

/// Flip pairs per bath, 0-based, lower index first. Each pair differs in
/// exactly the one spin its bath couples to.
const FLIP_PAIRS: [(Bath, [(usize, usize); 4]); 3] = [
    (Bath::B, [(0, 2), (1, 3), (4, 6), (5, 7)]),
    (Bath::E, [(0, 4), (1, 5), (2, 6), (3, 7)]),
    (Bath::C, [(0, 1), (2, 3), (4, 5), (6, 7)]),
];

/// Quasi-energy of one spin configuration:
/// (1/2)(ω_E s_E + ω_0 s_B + ω_C s_C + ω_EB s_E s_B + ω_BC s_B s_C + ω_CE s_C s_E).
fn quasi_energy(p: &SystemParams, s: [i8; 3]) -> f64 {
    let (se, sb, sc) = (f64::from(s[0]), f64::from(s[1]), f64::from(s[2]));
    0.5 * (p.omega_e * se
        + p.omega_0 * sb
        + p.omega_c * sc
        + p.omega_eb * se * sb
        + p.omega_bc * sb * sc
        + p.omega_ce * sc * se)
}

/// Build the level spectrum and transition graph for the given parameters.
pub fn build_level_table(params: &SystemParams) -> Result<LevelTable> {
    params.validate()?;

    let mut spins = [[0i8; 3]; N_LEVELS];
    let mut energies = [0.0f64; N_LEVELS];
    for (idx, (spin_out, energy_out)) in spins.iter_mut().zip(energies.iter_mut()).enumerate() {
        // bit 2 = E, bit 1 = B, bit 0 = C; bit clear ↦ spin +1.
        let spin = [
            if idx & 0b100 == 0 { 1 } else { -1 },
            if idx & 0b010 == 0 { 1 } else { -1 },
            if idx & 0b001 == 0 { 1 } else { -1 },
        ];
        *spin_out = spin;
        *energy_out = quasi_energy(params, spin);
    }

    let mut transitions = Vec::with_capacity(N_TRANSITIONS);
    for (bath, pairs) in FLIP_PAIRS {
        for (a, b) in pairs {
            // `a < b`, so the ≥ keeps the lower index as "upper" on exact ties.
            let (upper, lower) = if energies[a] >= energies[b] {
                (a, b)
            } else {
                (b, a)
            };
            transitions.push(Transition {
                bath,
                upper,
                lower,
                gap: energies[upper] - energies[lower],
            });
        }
    }

    Ok(LevelTable {
        energies,
        spins,
        transitions,
        modulation: params.modulation.clone(),
    })
}

impl LevelTable {
    /// Half the spectral span, (max ω_j − min ω_j)/2. Used as the system
    /// energy scale when judging weak-coupling validity; equals Δ in the
    /// canonical configuration.
    pub fn energy_scale(&self) -> f64 {
        let max = self.energies.iter().fold(f64::NEG_INFINITY, |m, e| m.max(*e));
        let min = self.energies.iter().fold(f64::INFINITY, |m, e| m.min(*e));
        0.5 * (max - min)
    }

    /// The transitions driven by one bath, in table order.
    pub fn transitions_of(&self, bath: Bath) -> impl Iterator<Item = &Transition> {
        self.transitions.iter().filter(move |t| t.bath == bath)
    }
}

/// One group of mutually degenerate levels.
#[derive(Debug, Clone, PartialEq)]
pub struct DegeneracyClass {
    /// 0-based level indices, ascending.
    pub members: Vec<usize>,
    /// Representative quasi-energy (of the smallest member).
    pub energy: f64,
}

/// Partition the levels into degeneracy classes.
///
/// Levels join the same class when their quasi-energies agree within 1e-12
/// absolute AND they are dynamically interchangeable: for each bath, the
/// quasi-energy of their single-flip partner under that bath also agrees
/// within 1e-12. The second condition separates groups that share an energy
/// but couple to different gaps (equal-energy levels whose partners differ
/// relax at different rates, so lumping them would misstate the dynamics).
///
/// In the canonical configuration this yields the four classes
/// {1,8}, {2,7}, {3,6}, {4,5} (1-based), conventionally named I..IV; the
/// classes are returned ordered by smallest member, which reproduces that
/// naming order.
pub fn degeneracy_classes(table: &LevelTable) -> Vec<DegeneracyClass> {
    const TOL: f64 = 1e-12;

    // partner[level][bath] = flip partner of `level` under that bath.
    let mut partner = [[usize::MAX; 3]; N_LEVELS];
    for t in &table.transitions {
        let b = match t.bath {
            Bath::E => 0,
            Bath::B => 1,
            Bath::C => 2,
        };
        partner[t.upper][b] = t.lower;
        partner[t.lower][b] = t.upper;
    }

    // key = (own energy, partner energies per bath); classes match keys
    // entrywise within TOL against their first member.
    let key = |level: usize| -> [f64; 4] {
        [
            table.energies[level],
            table.energies[partner[level][0]],
            table.energies[partner[level][1]],
            table.energies[partner[level][2]],
        ]
    };

    let mut classes: Vec<DegeneracyClass> = Vec::new();
    let mut keys: Vec<[f64; 4]> = Vec::new();
    for level in 0..N_LEVELS {
        let k = key(level);
        let found = keys
            .iter()
            .position(|rep| rep.iter().zip(k.iter()).all(|(a, b)| (a - b).abs() <= TOL));
        match found {
            Some(ci) => classes[ci].members.push(level),
            None => {
                classes.push(DegeneracyClass {
                    members: vec![level],
                    energy: table.energies[level],
                });
                keys.push(k);
            }
        }
    }
    // First-seen order is ascending in smallest member already.
    classes
}

#[cfg(test)]
mod tests {
    use super::*;

    fn canonical_table() -> LevelTable {
        build_level_table(&SystemParams::canonical(ModulationScheme::Unmodulated)).unwrap()
    }

    #[test]
    fn canonical_energies() {
        let t = canonical_table();
        let expected = [1.0, 0.0, -1.0, 0.0, 0.0, -1.0, 0.0, 1.0];
        for (e, want) in t.energies.iter().zip(expected) {
            assert_eq!(*e, want);
        }
    }

    #[test]
    fn null_hamiltonian_all_zero() {
        let p = SystemParams {
            omega_e: 0.0,
            omega_0: 0.0,
            omega_c: 0.0,
            omega_eb: 0.0,
            omega_bc: 0.0,
            omega_ce: 0.0,
            modulation: ModulationScheme::Unmodulated,
        };
        let t = build_level_table(&p).unwrap();
        assert!(t.energies.iter().all(|e| *e == 0.0));
        assert!(t.transitions.iter().all(|tr| tr.gap == 0.0));
        // Degenerate pairs keep the lower index as upper.
        assert!(t.transitions.iter().all(|tr| tr.upper < tr.lower));
    }

    #[test]
    fn generic_energies_match_direct_enumeration() {
        let p = SystemParams {
            omega_e: 0.3,
            omega_0: 0.1,
            omega_c: 0.2,
            omega_eb: 1.0,
            omega_bc: 1.0,
            omega_ce: 0.5,
            modulation: ModulationScheme::Unmodulated,
        };
        let t = build_level_table(&p).unwrap();
        // Independent enumeration: iterate sign triples in the same binary
        // order and apply the energy formula written out longhand.
        let mut idx = 0;
        for se in [1f64, -1.0] {
            for sb in [1f64, -1.0] {
                for sc in [1f64, -1.0] {
                    let e = 0.5
                        * (0.3 * se + 0.1 * sb + 0.2 * sc
                            + 1.0 * se * sb
                            + 1.0 * sb * sc
                            + 0.5 * sc * se);
                    assert!((t.energies[idx] - e).abs() < 1e-15);
                    idx += 1;
                }
            }
        }
    }

    #[test]
    fn canonical_classes() {
        let classes = degeneracy_classes(&canonical_table());
        let members: Vec<Vec<usize>> = classes.iter().map(|c| c.members.clone()).collect();
        assert_eq!(members, vec![vec![0, 7], vec![1, 6], vec![2, 5], vec![3, 4]]);
        assert_eq!(classes[0].energy, 1.0);
        assert_eq!(classes[2].energy, -1.0);
    }

    #[test]
    fn generic_params_give_singletons() {
        let p = SystemParams {
            omega_e: 0.3,
            omega_0: 0.1,
            omega_c: 0.2,
            omega_eb: 1.0,
            omega_bc: 0.9,
            omega_ce: 0.5,
            modulation: ModulationScheme::Unmodulated,
        };
        let t = build_level_table(&p).unwrap();
        let classes = degeneracy_classes(&t);
        assert_eq!(classes.len(), 8);
        for (i, c) in classes.iter().enumerate() {
            assert_eq!(c.members, vec![i]);
        }
    }

    #[test]
    fn partially_degenerate_classes_follow_partner_energies() {
        // ω_E = ω_C = 0.5 makes levels 2,4,5,7 (1-based) share energy 0 while
        // their flip partners differ, so they stay separate classes.
        let p = SystemParams {
            omega_e: 0.5,
            omega_0: 0.0,
            omega_c: 0.5,
            omega_eb: 1.0,
            omega_bc: 1.0,
            omega_ce: 0.0,
            modulation: ModulationScheme::Unmodulated,
        };
        let t = build_level_table(&p).unwrap();
        assert_eq!(t.energies, [1.5, 0.0, -0.5, 0.0, 0.0, -1.5, 0.0, 0.5]);
        let classes = degeneracy_classes(&t);
        assert_eq!(classes.len(), 8, "equal energy but distinct partner gaps");
    }

    #[test]
    fn lambda_out_of_range_rejected() {
        let p = SystemParams::canonical(ModulationScheme::Sinusoidal {
            lambda: 1.5,
            nu: 1.0,
        });
        let err = build_level_table(&p).unwrap_err();
        assert!(err.to_string().contains("0 ≤ λ ≤ 1"));
    }

    #[test]
    fn tabulated_mean_enforced() {
        let p = SystemParams::canonical(ModulationScheme::Tabulated {
            waveform: vec![0.5, 0.5, 0.5, 0.5],
            nu: 1.0,
        });
        assert!(matches!(
            p.validate(),
            Err(Error::WaveformMeanMismatch { .. })
        ));
        let ok = SystemParams::canonical(ModulationScheme::Tabulated {
            waveform: vec![0.5, -0.5, 0.5, -0.5],
            nu: 1.0,
        });
        ok.validate().unwrap();
    }

    #[test]
    fn bath_validation() {
        let bad = BathSpec {
            t_e: 0.2,
            t_b: -0.1,
            t_c: 0.02,
            kappa: 1.0,
        };
        assert!(bad.validate().is_err());
        let zero_base = BathSpec {
            t_e: 0.2,
            t_b: 0.0,
            t_c: 0.02,
            kappa: 1.0,
        };
        zero_base.validate().unwrap();
    }
}
