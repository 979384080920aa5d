use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use super::synth::SyntheticProfile;
use super::{open, IoError, MissionSchema};
use crate::annual::{EnvelopeMethod, YearLength};
use crate::dynamics::SimOptions;
use crate::model::{DesignVariant, ModelConstants};
use crate::steady::ComfortRequirement;

/// Controller used by dynamic runs.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ControllerChoice {
    /// Hourly steady solutions replayed as setpoints.
    #[default]
    Replay,
    /// Setpoint profiles and curtain thresholds extracted from a year of
    /// steady solutions.
    Causal,
}

/// Everything a command needs; command-line flags override fields.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    /// Model constants; the design variant lives here too.
    pub constants: ModelConstants,
    /// Designs compared by a sweep; empty means the design in `constants`.
    pub designs: Vec<DesignVariant>,
    /// Comfort boxes as `[psi_min, psi_max]`.
    pub comfort: Vec<[f64; 2]>,
    pub controller: ControllerChoice,
    pub seed: u64,
    pub mission: Option<PathBuf>,
    pub weather: Option<PathBuf>,
    pub synthetic: Option<SyntheticProfile>,
    pub schema: MissionSchema,
    pub out: PathBuf,
    pub sim: SimOptions,
    pub envelope: EnvelopeMethod,
    pub year_length: YearLength,
    /// Hysteresis half-width of the extracted mode state machine [K].
    pub hysteresis: f64,
    /// Days per month of the synthetic year.
    pub days_per_month: usize,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            constants: ModelConstants::default(),
            designs: Vec::new(),
            comfort: vec![[-0.5, 0.5], [-1.0, 1.0], [-1.5, 1.5]],
            controller: ControllerChoice::Replay,
            seed: 42,
            mission: None,
            weather: None,
            synthetic: None,
            schema: MissionSchema::default(),
            out: PathBuf::from("out"),
            sim: SimOptions::default(),
            envelope: EnvelopeMethod::ConstrainedLeastSquares,
            year_length: YearLength::Common,
            hysteresis: 1.0,
            days_per_month: 6,
        }
    }
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<Self, IoError> {
        let cfg: RunConfig = serde_json::from_reader(std::io::BufReader::new(open(path)?))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<(), IoError> {
        self.constants.validate()?;
        self.requirements()?;
        if !(self.hysteresis >= 0.0) {
            return Err(IoError::Config(format!("hysteresis {}", self.hysteresis)));
        }
        if self.days_per_month == 0 {
            return Err(IoError::Config("days_per_month must be positive".into()));
        }
        Ok(())
    }

    /// Designs to evaluate, in order.
    pub fn design_list(&self) -> Vec<DesignVariant> {
        if self.designs.is_empty() {
            vec![self.constants.design.clone()]
        } else {
            self.designs.clone()
        }
    }

    pub fn requirements(&self) -> Result<Vec<ComfortRequirement>, IoError> {
        self.comfort
            .iter()
            .map(|[lo, hi]| ComfortRequirement::new(*lo, *hi).map_err(|e| IoError::Config(e.to_string())))
            .collect()
    }
}

/// Parses `min:max[,min:max...]`.
pub fn parse_comfort_list(s: &str) -> Result<Vec<[f64; 2]>, IoError> {
    s.split(',')
        .map(|part| {
            let (lo, hi) = part
                .split_once(':')
                .ok_or_else(|| IoError::Config(format!("comfort box `{part}` is not min:max")))?;
            let parse = |v: &str| {
                v.trim()
                    .parse::<f64>()
                    .map_err(|_| IoError::Config(format!("comfort bound `{v}`")))
            };
            let bounds = [parse(lo)?, parse(hi)?];
            ComfortRequirement::new(bounds[0], bounds[1]).map_err(|e| IoError::Config(e.to_string()))?;
            Ok(bounds)
        })
        .collect()
}

/// SHA-256 of the canonical JSON form of the configuration. The output
/// directory does not affect results and is left out.
pub fn config_hash(cfg: &RunConfig) -> String {
    let mut canonical = cfg.clone();
    canonical.out = PathBuf::new();
    let json = serde_json::to_vec(&canonical).expect("config serializes");
    hex::encode(Sha256::digest(&json))
}
