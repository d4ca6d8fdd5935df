//! Bundled configuration presets: the measured circuit/cylinder values
//! for the high- and low-resistance settings, and three ready-to-run
//! simulation scenarios.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::circuit::PhaseCircuit;
use crate::cylinder::CylinderParams;
use crate::dynamics::Scenario;

#[derive(Debug, Error)]
pub enum PresetError {
    #[error("unknown preset '{0}'")]
    Unknown(String),
    #[error("preset '{name}' failed to parse: {source}")]
    Parse {
        name: String,
        source: serde_json::Error,
    },
}

/// Circuit-and-cylinder preset for sweeps, maps, and fits.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CircuitsPreset {
    #[serde(default)]
    pub description: String,
    pub circuits: Vec<PhaseCircuit>,
    pub cylinder: CylinderParams,
    #[serde(default)]
    pub sweep: SweepSection,
    #[serde(default)]
    pub map: MapSection,
}

/// Frequency grid and rotation rates for the sweep command.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepSection {
    pub f_start: f64,
    pub f_stop: f64,
    pub points: usize,
    pub rotations: Vec<f64>,
}

impl Default for SweepSection {
    fn default() -> Self {
        SweepSection {
            f_start: 1050.0,
            f_stop: 1260.0,
            points: 421,
            rotations: vec![0.0, 550.0, 600.0, 643.0, 660.0, 700.0],
        }
    }
}

/// Grid for the stability-map command.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MapSection {
    pub f_start: f64,
    pub f_stop: f64,
    pub f_points: usize,
    pub rot_start: f64,
    pub rot_stop: f64,
    pub rot_points: usize,
}

impl Default for MapSection {
    fn default() -> Self {
        MapSection {
            f_start: 1100.0,
            f_stop: 1260.0,
            f_points: 33,
            rot_start: 400.0,
            rot_stop: 800.0,
            rot_points: 81,
        }
    }
}

impl SweepSection {
    pub fn f_grid(&self) -> Vec<f64> {
        linspace(self.f_start, self.f_stop, self.points)
    }
}

impl MapSection {
    pub fn f_grid(&self) -> Vec<f64> {
        linspace(self.f_start, self.f_stop, self.f_points)
    }

    pub fn rot_grid(&self) -> Vec<f64> {
        linspace(self.rot_start, self.rot_stop, self.rot_points)
    }
}

fn linspace(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    if n <= 1 {
        return vec![lo];
    }
    (0..n)
        .map(|i| lo + (hi - lo) * i as f64 / (n - 1) as f64)
        .collect()
}

/// Name and raw JSON of every bundled preset.
pub const PRESETS: [(&str, &str); 5] = [
    ("table1_highR", include_str!("../presets/table1_highR.json")),
    ("table1_lowR", include_str!("../presets/table1_lowR.json")),
    (
        "fig4_openloop_643",
        include_str!("../presets/fig4_openloop_643.json"),
    ),
    (
        "fig4_openloop_660",
        include_str!("../presets/fig4_openloop_660.json"),
    ),
    ("closedloop_700", include_str!("../presets/closedloop_700.json")),
];

/// Raw JSON of a bundled preset; accepts the bare name or `name.json`.
pub fn preset_json(name: &str) -> Option<&'static str> {
    let stem = name.strip_suffix(".json").unwrap_or(name);
    PRESETS
        .iter()
        .find(|(n, _)| *n == stem)
        .map(|(_, json)| *json)
}

pub fn load_circuits(name: &str) -> Result<CircuitsPreset, PresetError> {
    let json = preset_json(name).ok_or_else(|| PresetError::Unknown(name.into()))?;
    serde_json::from_str(json).map_err(|source| PresetError::Parse {
        name: name.into(),
        source,
    })
}

pub fn load_scenario(name: &str) -> Result<Scenario, PresetError> {
    let json = preset_json(name).ok_or_else(|| PresetError::Unknown(name.into()))?;
    serde_json::from_str(json).map_err(|source| PresetError::Parse {
        name: name.into(),
        source,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn all_presets_parse_and_validate() {
        for name in ["table1_highR", "table1_lowR"] {
            let p = load_circuits(name).unwrap();
            assert_eq!(p.circuits.len(), 3, "{name}");
            for c in &p.circuits {
                c.validate().unwrap();
            }
            p.cylinder.validate().unwrap();
        }
        for name in ["fig4_openloop_643", "fig4_openloop_660", "closedloop_700"] {
            let sc = load_scenario(name).unwrap();
            sc.validate().unwrap();
        }
        assert!(preset_json("nonsense").is_none());
        assert!(preset_json("table1_highR.json").is_some());
    }

    #[test]
    fn table1_capacitances_match_measured_values() {
        let p = load_circuits("table1_highR").unwrap();
        let c: Vec<f64> = p.circuits.iter().map(|c| c.c * 1e9).collect();
        assert_eq!(c, vec![149.9, 149.7, 149.7]);
        let low = load_circuits("table1_lowR").unwrap();
        let dr: Vec<f64> = p
            .circuits
            .iter()
            .zip(&low.circuits)
            .map(|(h, l)| l.r_var - h.r_var)
            .collect();
        for (got, want) in dr.iter().zip([-21.2, -26.0, -22.6]) {
            assert!((got - want).abs() < 1e-9);
        }
    }
}
