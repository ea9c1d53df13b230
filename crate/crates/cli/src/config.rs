//! Flat TOML run configuration. Every key is optional; command-line flags
//! override file values key by key, and the merged result is echoed in
//! every report.

use std::path::Path;

use barista::estimate::{GaConfig, GridAxis, QcConfig, SafePoints};
use barista::select::SelectConfig;
use barista::{BaristaParams, FamilyKind, Seed};
use serde::{Deserialize, Serialize};

use crate::error::{CliError, Result};
use crate::units::{ClampPolicy, Unit};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum Method {
    Qc,
    Grid,
    Ga,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum Family {
    OneStage,
    TwoStage,
    ThreeStage,
}

impl From<Family> for FamilyKind {
    fn from(f: Family) -> Self {
        match f {
            Family::OneStage => FamilyKind::OneStage,
            Family::TwoStage => FamilyKind::TwoStage,
            Family::ThreeStage => FamilyKind::ThreeStage,
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Config {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub horizon: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub unit: Option<Unit>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub clamp_policy: Option<ClampPolicy>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub method: Option<Method>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub family: Option<Family>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub bootstrap: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub windows: Option<String>,

    // simulation parameters, durations in the working unit
    #[serde(skip_serializing_if = "Option::is_none")]
    pub alpha1: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub alpha2: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub alpha3: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub d1: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub d2: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub c: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub n: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub poisson: Option<bool>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub auctions: Option<usize>,

    // genetic algorithm
    #[serde(skip_serializing_if = "Option::is_none")]
    pub population_size: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub elite_fraction: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub offspring_pairs: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub generations: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub refine_iterations: Option<usize>,

    // quick-and-crude windows, in the working unit
    #[serde(skip_serializing_if = "Option::is_none")]
    pub qc_stage1_window: Option<[f64; 2]>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub qc_stage2_window: Option<[f64; 2]>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub qc_stage3_points: Option<[f64; 2]>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub qc_safe_points: Option<[f64; 4]>,

    // grid axes: `[value]` or `[lo, hi, steps]`
    #[serde(skip_serializing_if = "Option::is_none")]
    pub grid_steps: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub grid_alpha: Option<Vec<f64>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub grid_alpha1: Option<Vec<f64>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub grid_alpha2: Option<Vec<f64>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub grid_alpha3: Option<Vec<f64>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub grid_d1: Option<Vec<f64>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub grid_d2: Option<Vec<f64>>,

    // model selection
    #[serde(skip_serializing_if = "Option::is_none")]
    pub alpha_level: Option<f64>,
}

pub const DEFAULT_SEED: u64 = 0;
pub const DEFAULT_N: usize = 1000;
pub const DEFAULT_GRID_STEPS: usize = 6;
pub const DEFAULT_REFINE_ITERATIONS: usize = 50;
pub const DEFAULT_WINDOWS: &str = "7d,1d,3h,5min";

impl Config {
    pub fn parse(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| CliError::Config(e.message().to_string()))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
        Self::parse(&text).map_err(|e| match e {
            CliError::Config(m) => CliError::Config(format!("{}: {m}", path.display())),
            other => other,
        })
    }

    /// `self` with every key set in `over` replaced.
    pub fn overlay(&self, over: &Config) -> Config {
        let mut base = serde_json::to_value(self).expect("config serializes");
        let top = serde_json::to_value(over).expect("config serializes");
        if let (Some(b), serde_json::Value::Object(t)) = (base.as_object_mut(), top) {
            b.extend(t);
        }
        serde_json::from_value(base).expect("merged config deserializes")
    }

    pub fn seed(&self) -> u64 {
        self.seed.unwrap_or(DEFAULT_SEED)
    }

    pub fn unit(&self) -> Unit {
        self.unit.unwrap_or(Unit::Days)
    }

    pub fn clamp_policy(&self) -> ClampPolicy {
        self.clamp_policy.unwrap_or(ClampPolicy::Reject)
    }

    /// Simulation parameters. Unset keys default to a seven-day auction
    /// with `(alpha1, alpha2, alpha3) = (3, 0.4, 1)`, `d1` 2.5 days, `d2`
    /// five minutes and one bid per day, all converted to the working unit.
    pub fn sim_params(&self) -> Result<BaristaParams> {
        let unit = self.unit();
        let days = Unit::Days.seconds() / unit.seconds();
        let horizon = self.horizon.unwrap_or(7.0 * days);
        let d2_default = 5.0 * Unit::Minutes.seconds() / unit.seconds();
        Ok(BaristaParams::new(
            self.alpha1.unwrap_or(3.0),
            self.alpha2.unwrap_or(0.4),
            self.alpha3.unwrap_or(1.0),
            self.d1.unwrap_or(2.5 * days),
            self.d2.unwrap_or(d2_default),
            self.c.unwrap_or(1.0 / days),
            horizon,
        )?)
    }

    fn apply_ga(&self, cfg: &mut GaConfig) {
        if let Some(v) = self.population_size {
            cfg.population_size = v;
        }
        if let Some(v) = self.elite_fraction {
            cfg.elite_fraction = v;
        }
        if let Some(v) = self.offspring_pairs {
            cfg.offspring_pairs = v;
        }
        if let Some(v) = self.generations {
            cfg.generations = v;
        }
    }

    pub fn ga(&self, kind: FamilyKind, horizon: f64) -> GaConfig {
        let mut cfg = GaConfig::for_family(kind, horizon, Seed(self.seed()));
        self.apply_ga(&mut cfg);
        cfg
    }

    pub fn refine_iterations(&self) -> usize {
        self.refine_iterations.unwrap_or(DEFAULT_REFINE_ITERATIONS)
    }

    pub fn select(&self, horizon: f64) -> SelectConfig {
        let mut cfg = SelectConfig::defaults(horizon, Seed(self.seed()));
        self.apply_ga(&mut cfg.two_stage);
        self.apply_ga(&mut cfg.three_stage);
        if let Some(a) = self.alpha_level {
            cfg.alpha_level = a;
        }
        cfg.refine_iterations = self.refine_iterations();
        cfg
    }

    pub fn qc(&self, horizon: f64) -> QcConfig {
        let mut cfg = QcConfig::seven_day_study(horizon);
        if let Some([a, b]) = self.qc_stage1_window {
            cfg.stage1_window = (a, b);
        }
        if let Some([a, b]) = self.qc_stage2_window {
            cfg.stage2_window = (a, b);
        }
        if let Some([a, b]) = self.qc_stage3_points {
            cfg.stage3_points = (a, b);
        }
        if let Some([t1, t2p, t2, t3]) = self.qc_safe_points {
            cfg.safe_points = SafePoints { t1, t2p, t2, t3 };
        }
        cfg
    }

    /// Grid axes in parameter order. Unset axes span the GA search box
    /// with `grid_steps` points.
    pub fn grid(&self, kind: FamilyKind, horizon: f64) -> Result<Vec<GridAxis>> {
        let steps = self.grid_steps.unwrap_or(DEFAULT_GRID_STEPS);
        let bounds = GaConfig::for_family(kind, horizon, Seed(0)).bounds;
        let keys: Vec<(&str, &Option<Vec<f64>>)> = match kind {
            FamilyKind::OneStage => vec![("grid_alpha", &self.grid_alpha)],
            FamilyKind::TwoStage => vec![
                ("grid_alpha2", &self.grid_alpha2),
                ("grid_alpha3", &self.grid_alpha3),
                ("grid_d2", &self.grid_d2),
            ],
            FamilyKind::ThreeStage => vec![
                ("grid_alpha1", &self.grid_alpha1),
                ("grid_alpha2", &self.grid_alpha2),
                ("grid_alpha3", &self.grid_alpha3),
                ("grid_d1", &self.grid_d1),
                ("grid_d2", &self.grid_d2),
            ],
        };
        keys.into_iter()
            .zip(bounds)
            .map(|((name, spec), (lo, hi))| match spec.as_deref() {
                None => Ok(GridAxis::linspace(lo, hi, steps)),
                Some(&[v]) => Ok(GridAxis::point(v)),
                Some(&[lo, hi, n]) if n >= 1.0 && n.fract() == 0.0 => {
                    Ok(GridAxis::linspace(lo, hi, n as usize))
                }
                Some(_) => Err(CliError::Config(format!(
                    "{name} must be [value] or [lo, hi, steps]"
                ))),
            })
            .collect()
    }
}
