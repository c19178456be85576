//! Named figure presets: hard-coded parameter sets that reproduce the
//! reference sweeps without a configuration file.

use crate::config::{
    BathsSection, CliError, CliResult, ModulationSection, RawConfig, RunSection, SystemSection,
};

/// Names accepted by `--preset`, in help-text order.
pub const PRESET_NAMES: [&str; 6] = ["fig4", "fig5", "fig6", "fig8", "fig10", "fig11"];

fn caption_baths(t_b: f64) -> BathsSection {
    BathsSection {
        t_e: 0.2,
        t_b,
        t_c: 0.02,
        kappa: 1.0,
    }
}

fn base_temperature_run(grid_min: f64, grid_max: f64) -> RunSection {
    RunSection {
        mode: "sweep-tb".to_string(),
        preset: None,
        grid_min: Some(grid_min),
        grid_max: Some(grid_max),
        grid_points: Some(200),
        weights: None,
        q_max: None,
        renormalize: None,
        threads: None,
    }
}

fn drive_frequency_run(grid_min: f64, grid_max: f64) -> RunSection {
    RunSection {
        mode: "sweep-nu".to_string(),
        preset: None,
        grid_min: Some(grid_min),
        grid_max: Some(grid_max),
        grid_points: Some(200),
        weights: None,
        q_max: None,
        renormalize: None,
        threads: None,
    }
}

fn unmodulated_sweep(grid_min: f64, grid_max: f64, t_b: f64) -> RawConfig {
    RawConfig {
        system: Some(SystemSection::default()),
        baths: Some(caption_baths(t_b)),
        modulation: Some(ModulationSection {
            scheme: "unmodulated".to_string(),
            lambda: None,
            nu: None,
            waveform: None,
        }),
        run: Some(base_temperature_run(grid_min, grid_max)),
        output: None,
    }
}

/// Both driven schemes over one drive-frequency window; `nu` carries the
/// grid start as a placeholder since the sweep overrides it per point.
fn two_scheme_frequency_sweep(
    grid_min: f64,
    grid_max: f64,
    t_b: f64,
) -> Vec<(Option<String>, RawConfig)> {
    let base = RawConfig {
        system: Some(SystemSection::default()),
        baths: Some(caption_baths(t_b)),
        modulation: None,
        run: Some(drive_frequency_run(grid_min, grid_max)),
        output: None,
    };
    let mut sinusoidal = base.clone();
    sinusoidal.modulation = Some(ModulationSection {
        scheme: "sinusoidal".to_string(),
        lambda: Some(0.8),
        nu: Some(grid_min),
        waveform: None,
    });
    let mut piflip = base;
    piflip.modulation = Some(ModulationSection {
        scheme: "piflip".to_string(),
        lambda: None,
        nu: Some(grid_min),
        waveform: None,
    });
    vec![
        (Some("sinusoidal".to_string()), sinusoidal),
        (Some("piflip".to_string()), piflip),
    ]
}

/// Expand a preset name into the configuration documents it stands for.
pub fn expand(name: &str) -> CliResult<Vec<(Option<String>, RawConfig)>> {
    match name {
        "fig4" => Ok(vec![(None, unmodulated_sweep(0.01, 0.2, 0.118))]),
        "fig5" => Ok(vec![(None, unmodulated_sweep(0.02, 0.15, 0.118))]),
        "fig6" | "fig8" => Ok(two_scheme_frequency_sweep(0.5, 3.0, 0.118)),
        "fig10" | "fig11" => Ok(two_scheme_frequency_sweep(0.1, 4.0, 0.0)),
        other => Err(CliError::Config(format!(
            "unknown preset {other}; available: {}",
            PRESET_NAMES.join(", ")
        ))),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn every_preset_expands() {
        for name in PRESET_NAMES {
            let docs = expand(name).unwrap();
            assert!(!docs.is_empty(), "{name} expanded to nothing");
            for (_, raw) in &docs {
                let baths = raw.baths.as_ref().unwrap();
                assert_eq!(baths.t_e, 0.2);
                assert_eq!(baths.t_c, 0.02);
                assert_eq!(baths.kappa, 1.0);
            }
        }
    }

    #[test]
    fn frequency_presets_switch_schemes() {
        let docs = expand("fig6").unwrap();
        assert_eq!(docs.len(), 2);
        assert_eq!(docs[0].0.as_deref(), Some("sinusoidal"));
        assert_eq!(docs[1].0.as_deref(), Some("piflip"));
        let sin = docs[0].1.modulation.as_ref().unwrap();
        assert_eq!(sin.lambda, Some(0.8));
        let run = docs[0].1.run.as_ref().unwrap();
        assert_eq!(run.grid_min, Some(0.5));
        assert_eq!(run.grid_max, Some(3.0));
        assert_eq!(run.grid_points, Some(200));
    }

    #[test]
    fn frozen_base_presets_use_zero_base_temperature() {
        for name in ["fig10", "fig11"] {
            for (_, raw) in expand(name).unwrap() {
                assert_eq!(raw.baths.as_ref().unwrap().t_b, 0.0);
                let run = raw.run.as_ref().unwrap();
                assert_eq!(run.grid_min, Some(0.1));
                assert_eq!(run.grid_max, Some(4.0));
            }
        }
    }

    #[test]
    fn unknown_preset_is_rejected() {
        let err = expand("fig99").unwrap_err();
        assert!(matches!(err, CliError::Config(_)));
        assert!(err.to_string().contains("fig99"));
    }
}
