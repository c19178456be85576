//! Randomized structural properties of the mechanical layers: level
//! tables, harmonic weights, rate generators, and steady states.

use fqt_core::error::Error;
use fqt_core::floquet::{closed_form_weights, quadrature_weights};
use fqt_core::lindblad::{build_generator, steady_state};
use fqt_core::model::{
    build_level_table, degeneracy_classes, Bath, BathSpec, ModulationScheme, SystemParams,
    N_TRANSITIONS,
};
use proptest::prelude::*;

fn arb_scheme() -> impl Strategy<Value = ModulationScheme> {
    prop_oneof![
        Just(ModulationScheme::Unmodulated),
        (0.0..=1.0f64, 0.2..3.0f64)
            .prop_map(|(lambda, nu)| ModulationScheme::Sinusoidal { lambda, nu }),
        (0.2..3.0f64).prop_map(|nu| ModulationScheme::PiFlip { nu }),
    ]
}

fn arb_params() -> impl Strategy<Value = SystemParams> {
    (
        -1.5..1.5f64,
        -1.5..1.5f64,
        -1.5..1.5f64,
        -1.5..1.5f64,
        -1.5..1.5f64,
        -1.5..1.5f64,
        arb_scheme(),
    )
        .prop_map(
            |(omega_e, omega_0, omega_c, omega_eb, omega_bc, omega_ce, modulation)| SystemParams {
                omega_e,
                omega_0,
                omega_c,
                omega_eb,
                omega_bc,
                omega_ce,
                modulation,
            },
        )
}

fn arb_baths() -> impl Strategy<Value = BathSpec> {
    (0.05..1.0f64, 0.0..1.0f64, 0.05..1.0f64, 0.1..3.0f64).prop_map(|(t_e, t_b, t_c, kappa)| {
        BathSpec {
            t_e,
            t_b,
            t_c,
            kappa,
        }
    })
}

/// Level-index bit toggled by a flip of this qubit.
fn bath_mask(bath: Bath) -> usize {
    match bath {
        Bath::E => 4,
        Bath::B => 2,
        Bath::C => 1,
    }
}

/// Position of this qubit in the per-level spin triple.
fn spin_index(bath: Bath) -> usize {
    match bath {
        Bath::E => 0,
        Bath::B => 1,
        Bath::C => 2,
    }
}

fn weights_for(scheme: &ModulationScheme) -> fqt_core::floquet::HarmonicWeights {
    let q_max = if matches!(scheme, ModulationScheme::Unmodulated) {
        0
    } else {
        1
    };
    closed_form_weights(scheme, q_max).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn level_table_structure(params in arb_params()) {
        let table = build_level_table(&params).unwrap();
        prop_assert_eq!(table.transitions.len(), N_TRANSITIONS);
        for bath in Bath::ALL {
            prop_assert_eq!(table.transitions_of(bath).count(), 4);
        }
        for tr in &table.transitions {
            // Partner levels differ in exactly the flipped qubit.
            prop_assert_eq!(tr.upper ^ tr.lower, bath_mask(tr.bath));
            let su = table.spins[tr.upper];
            let sl = table.spins[tr.lower];
            for k in 0..3 {
                if k == spin_index(tr.bath) {
                    prop_assert_eq!(su[k], -sl[k]);
                } else {
                    prop_assert_eq!(su[k], sl[k]);
                }
            }
            // Upper is never below lower; exact ties keep the smaller index
            // on the upper side.
            let gap = table.energies[tr.upper] - table.energies[tr.lower];
            prop_assert!(gap >= 0.0);
            prop_assert_eq!(tr.gap, gap);
            if gap == 0.0 {
                prop_assert!(tr.upper < tr.lower);
            }
        }
        // Degeneracy classes partition the levels with consistent energies.
        let classes = degeneracy_classes(&table);
        let mut seen = [false; 8];
        for class in &classes {
            for &m in &class.members {
                prop_assert!(!seen[m]);
                seen[m] = true;
                prop_assert!((table.energies[m] - class.energy).abs() <= 1e-9);
            }
        }
        prop_assert!(seen.iter().all(|s| *s));
    }

    #[test]
    fn generator_is_stochastic_with_detailed_balance_rates(
        params in arb_params(),
        baths in arb_baths(),
    ) {
        let table = build_level_table(&params).unwrap();
        let weights = weights_for(&params.modulation);
        let gen = build_generator(&table, &baths, &weights).unwrap();
        let n = gen.dimension;
        let scale = 1.0 + gen.matrix.norm_one();
        for j in 0..n {
            let mut col = 0.0;
            for i in 0..n {
                let v = gen.matrix.get(i, j);
                if i != j {
                    prop_assert!(v >= 0.0, "negative off-diagonal {v} at ({i},{j})");
                }
                col += v;
            }
            prop_assert!(col.abs() <= 1e-12 * scale, "column {j} sums to {col}");
        }
        for ch in &gen.per_channel_rates {
            let t = baths.temperature(ch.bath);
            prop_assert!(ch.kms_relative_defect(t) <= 1e-12);
        }
    }

    #[test]
    fn steady_state_is_distribution(
        params in arb_params(),
        baths in arb_baths(),
    ) {
        let table = build_level_table(&params).unwrap();
        let weights = weights_for(&params.modulation);
        let gen = build_generator(&table, &baths, &weights).unwrap();
        match steady_state(&gen) {
            Ok(rho) => {
                prop_assert!(rho.values.iter().all(|v| *v >= 0.0));
                let sum: f64 = rho.values.iter().sum();
                prop_assert!((sum - 1.0).abs() <= 1e-12);
                prop_assert!(rho.residual_norm <= 1e-10);
            }
            // Extreme random corners (frozen baths, huge condition numbers)
            // may legitimately trip the conditioning or positivity guards;
            // those rejections are the guards working, not solver defects.
            Err(Error::IllConditioned { .. }) | Err(Error::NegativePopulation { .. }) => {}
            Err(e) => prop_assert!(false, "unexpected error: {e}"),
        }
    }

    #[test]
    fn canonical_complement_symmetry(
        t_e in 0.05..1.0f64,
        t_b in 0.01..1.0f64,
        t_c in 0.05..1.0f64,
        kappa in 0.1..3.0f64,
        scheme in arb_scheme(),
    ) {
        // The canonical quasi-energies are invariant under flipping all
        // three spins, and the flip permutes each bath's transitions among
        // themselves, so steady-state populations come in mirror pairs
        // ρ_i = ρ_{complement(i)} at any temperatures.
        let params = SystemParams::canonical(scheme);
        let table = build_level_table(&params).unwrap();
        let weights = weights_for(&params.modulation);
        let baths = BathSpec { t_e, t_b, t_c, kappa };
        let gen = build_generator(&table, &baths, &weights).unwrap();
        if let Ok(rho) = steady_state(&gen) {
            for i in 0..4 {
                let diff = (rho.values[i] - rho.values[7 - i]).abs();
                prop_assert!(diff <= 1e-9, "levels {} vs {}: {diff}", i + 1, 8 - i);
            }
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn sinusoidal_weights_symmetric_and_subnormalized(
        lambda in 0.0..=1.0f64,
        nu in 0.2..3.0f64,
    ) {
        let scheme = ModulationScheme::Sinusoidal { lambda, nu };
        let w = quadrature_weights(&scheme, 3, 1024).unwrap();
        let mut sum = 0.0;
        for q in 0..=3i32 {
            prop_assert!((w.weight(q) - w.weight(-q)).abs() <= 1e-12);
            prop_assert!(w.weight(q) >= 0.0);
            sum += if q == 0 { w.weight(0) } else { 2.0 * w.weight(q) };
        }
        prop_assert!(sum <= 1.0 + 1e-9);
    }
}
