use std::path::Path;

use serde::{Deserialize, Serialize};
use serde_json::{Map, Value};

use crate::error::{Error, Result};
use crate::evolve::{Integrator, SimConfig};
use crate::kslab::{KsConfig, KsInit, DEFAULT_DIVERGENCE_THRESHOLD, DEFAULT_T_END};
use crate::linstab::basis::KGrid;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ScenarioId {
    Fig1,
    Fig2,
    Fig3,
    Fig4,
    Fig5,
    Linstab,
    Custom,
    KsSensitivity,
}

impl ScenarioId {
    pub const ALL: [ScenarioId; 8] = [
        Self::Fig1,
        Self::Fig2,
        Self::Fig3,
        Self::Fig4,
        Self::Fig5,
        Self::Linstab,
        Self::Custom,
        Self::KsSensitivity,
    ];
}

/// Nonlinear interaction evaluation path.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum RhsPath {
    PseudoSpectral,
    Direct,
}

/// `(k, m, amplitude)` with amplitude measured as `dk |A|`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Seed(pub f64, pub usize, pub f64);

/// Flat scenario description. Keys absent from a config file take the values
/// of the named preset.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioConfig {
    pub scenario: ScenarioId,
    pub h: f64,
    pub re: f64,
    pub dk: f64,
    pub k_max: f64,
    pub modes: usize,
    pub n_r: usize,
    pub dt: f64,
    pub t_end: f64,
    pub snapshot_every: f64,
    pub seeds: Vec<Seed>,
    /// Time at which `perturbations` are added; `None` for none.
    pub perturb_at: Option<f64>,
    pub perturbations: Vec<Seed>,
    pub rhs: RhsPath,
    pub padding: f64,
    /// Repeat the run at `dt / 2` and report the change of the final `E(k)`.
    pub publishable: bool,
    pub frequency_window: f64,
    pub pair_tol: f64,
    pub resonance_tol: f64,
    pub field_points: usize,
    pub k_samples: usize,
    pub k_lo: f64,
    pub k_hi: f64,
    pub ks_n_modes: usize,
    pub ks_l_domain: f64,
    pub ks_dts: Vec<f64>,
    pub ks_t_end: f64,
    pub ks_snapshot_every: f64,
    pub ks_threshold: f64,
    pub out: Option<String>,
}

impl ScenarioConfig {
    pub fn preset(id: ScenarioId) -> Self {
        let base = Self {
            scenario: id,
            h: 0.5,
            re: 88.1,
            dk: 0.25,
            k_max: 12.0,
            modes: 20,
            n_r: 48,
            dt: 1e-3,
            t_end: 40.0,
            snapshot_every: 0.5,
            seeds: vec![Seed(3.0, 1, 1e-3)],
            perturb_at: None,
            perturbations: Vec::new(),
            rhs: RhsPath::PseudoSpectral,
            padding: 1.5,
            publishable: false,
            frequency_window: crate::diagnostics::tables::DEFAULT_FREQUENCY_WINDOW,
            pair_tol: 0.01,
            resonance_tol: 1e-4,
            field_points: crate::diagnostics::field::DEFAULT_FIELD_POINTS,
            k_samples: 200,
            k_lo: 0.25,
            k_hi: 8.0,
            ks_n_modes: 64,
            ks_l_domain: 22.0,
            ks_dts: vec![0.01, 0.005],
            ks_t_end: DEFAULT_T_END,
            ks_snapshot_every: 1.0,
            ks_threshold: DEFAULT_DIVERGENCE_THRESHOLD,
            out: None,
        };
        match id {
            ScenarioId::Fig2 | ScenarioId::Fig5 => Self {
                seeds: vec![Seed(1.75, 1, 1e-3)],
                ..base
            },
            ScenarioId::Fig3 => Self {
                seeds: vec![Seed(3.25, 1, 1e-3)],
                perturb_at: Some(20.0),
                perturbations: vec![Seed(3.5, 1, 0.1)],
                t_end: 80.0,
                ..base
            },
            ScenarioId::Fig4 => Self {
                seeds: vec![Seed(3.25, 1, 1e-3)],
                perturb_at: Some(20.0),
                perturbations: vec![Seed(3.5, 1, 0.075)],
                t_end: 80.0,
                ..base
            },
            _ => base,
        }
    }

    /// Parses a JSON object; missing keys come from the preset named by its
    /// `scenario` key (default `custom`).
    pub fn parse(text: &str) -> Result<Self> {
        let value: Value = serde_json::from_str(text)
            .map_err(|e| Error::Config(format!("line {}, column {}: {e}", e.line(), e.column())))?;
        let Value::Object(user) = value else {
            return Err(Error::Config("config must be a JSON object of key-value pairs".into()));
        };
        let id = match user.get("scenario") {
            None => ScenarioId::Custom,
            Some(v) => serde_json::from_value(v.clone())
                .map_err(|e| Error::Config(format!("key `scenario`: {e}")))?,
        };
        let Value::Object(mut merged) = serde_json::to_value(Self::preset(id))? else {
            unreachable!("configs serialize to objects")
        };
        let known: Map<String, Value> = merged.clone();
        for (k, v) in user {
            if !known.contains_key(&k) {
                return Err(Error::Config(format!("unknown key `{k}`")));
            }
            let mut probe = merged.clone();
            probe.insert(k.clone(), v.clone());
            if let Err(e) = serde_json::from_value::<Self>(Value::Object(probe)) {
                return Err(Error::Config(format!("key `{k}`: {e}")));
            }
            merged.insert(k, v);
        }
        let cfg: Self = serde_json::from_value(Value::Object(merged))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("cannot read config {}: {e}", path.display())))?;
        Self::parse(&text).map_err(|e| match e {
            Error::Config(m) => Error::Config(format!("{}: {m}", path.display())),
            other => other,
        })
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("configs always serialize")
    }

    pub fn sim_config(&self) -> SimConfig {
        SimConfig {
            dk: self.dk,
            k_max: self.k_max,
            modes: self.modes,
            dt: self.dt,
            t_end: self.t_end,
            snapshot_every: self.snapshot_every,
            integrator: Integrator::IfRk4,
            equilibrium_tol: 1e-8,
            stop_at_equilibrium: false,
        }
    }

    pub fn ks_config(&self) -> KsConfig {
        KsConfig {
            n_modes: self.ks_n_modes,
            l_domain: self.ks_l_domain,
            dt: self.ks_dts.first().copied().unwrap_or(0.01),
            t_end: self.ks_t_end,
            snapshot_every: self.ks_snapshot_every,
        }
    }

    pub fn ks_init(&self) -> KsInit {
        KsInit::Multimode
    }

    pub fn validate(&self) -> Result<()> {
        let kg = KGrid::new(self.dk, self.k_max)?;
        self.sim_config().validate()?;
        if self.n_r < crate::linstab::grid::MIN_POINTS {
            return Err(Error::Config(format!("n_r={} below {}", self.n_r, crate::linstab::grid::MIN_POINTS)));
        }
        for (name, list) in [("seeds", &self.seeds), ("perturbations", &self.perturbations)] {
            for s in list {
                if kg.index_of(s.0).is_none() {
                    return Err(Error::Config(format!("{name}: k={} is not on the grid (dk={})", s.0, self.dk)));
                }
                if s.1 == 0 || s.1 > self.modes {
                    return Err(Error::Config(format!("{name}: mode {} outside 1..={}", s.1, self.modes)));
                }
                if !(s.2 >= 0.0) {
                    return Err(Error::Config(format!("{name}: amplitude {} must be >= 0", s.2)));
                }
            }
        }
        if let Some(tp) = self.perturb_at {
            if !(tp >= 0.0 && tp <= self.t_end) {
                return Err(Error::Config(format!("perturb_at={tp} outside [0, t_end]")));
            }
        }
        if !(self.k_lo < self.k_hi) || self.k_samples < 2 {
            return Err(Error::Config("need k_lo < k_hi and k_samples >= 2".into()));
        }
        if self.ks_dts.len() < 2 || self.ks_dts.iter().any(|d| !(*d > 0.0)) {
            return Err(Error::Config(format!("ks_dts needs at least two positive steps, got {:?}", self.ks_dts)));
        }
        if !(self.padding >= 1.0) {
            return Err(Error::Config(format!("padding={} must be >= 1", self.padding)));
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn presets_validate_and_round_trip() {
        for id in ScenarioId::ALL {
            let c = ScenarioConfig::preset(id);
            c.validate().unwrap();
            assert_eq!(ScenarioConfig::parse(&c.to_json()).unwrap(), c);
        }
    }

    #[test]
    fn overrides_apply_on_top_of_preset() {
        let c = ScenarioConfig::parse(r#"{"scenario": "fig3", "modes": 15, "perturbations": [[3.5, 1, 0.2]]}"#).unwrap();
        assert_eq!(c.modes, 15);
        assert_eq!(c.perturbations, vec![Seed(3.5, 1, 0.2)]);
        assert_eq!(c.seeds, vec![Seed(3.25, 1, 1e-3)]);
    }

    #[test]
    fn errors_name_the_key() {
        let e = ScenarioConfig::parse(r#"{"modez": 3}"#).unwrap_err().to_string();
        assert!(e.contains("modez"), "{e}");
        let e = ScenarioConfig::parse(r#"{"dt": "fast"}"#).unwrap_err().to_string();
        assert!(e.contains("`dt`"), "{e}");
        let e = ScenarioConfig::parse("{\n\"dt\": 1e-3,\n}").unwrap_err().to_string();
        assert!(e.contains("line 3"), "{e}");
        assert!(ScenarioConfig::parse(r#"{"seeds": [[3.1, 1, 0.001]]}"#).is_err());
        assert!(ScenarioConfig::parse(r#"{"ks_dts": [0.01]}"#).is_err());
        assert!(ScenarioConfig::parse("[1, 2]").is_err());
    }
}
