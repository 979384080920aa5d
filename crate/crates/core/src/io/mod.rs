//! Configuration, data loading, synthetic data and result export.

mod config;
mod export;
mod mission;
mod synth;

pub use config::{config_hash, parse_comfort_list, ControllerChoice, RunConfig};
pub use export::{
    write_json, write_pareto_csv, write_trajectory_csv, RunSummary, SolutionTable, TOOL_VERSION,
};
pub use mission::{
    join_weather, load_mission, load_mission_trace, load_weather, read_mission, read_weather,
    save_trace_csv, write_trace_csv, MissionData, MissionRow, MissionSchema, WeatherRecord, DOOR_SHARE,
};
pub use synth::{synth_mission, synth_year, SyntheticProfile};

use crate::dynamics::SimError;
use crate::model::ModelError;

#[derive(Debug, thiserror::Error)]
pub enum IoError {
    #[error("{path}: {source}")]
    File {
        path: String,
        source: std::io::Error,
    },
    #[error("line {line}: {message}")]
    Row { line: u64, message: String },
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
    #[error("schema: {0}")]
    Schema(String),
    #[error("config: {0}")]
    Config(String),
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Sim(#[from] SimError),
}

pub(crate) fn open(path: &std::path::Path) -> Result<std::fs::File, IoError> {
    std::fs::File::open(path).map_err(|source| IoError::File {
        path: path.display().to_string(),
        source,
    })
}

pub(crate) fn create(path: &std::path::Path) -> Result<std::fs::File, IoError> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir).map_err(|source| IoError::File {
            path: dir.display().to_string(),
            source,
        })?;
    }
    std::fs::File::create(path).map_err(|source| IoError::File {
        path: path.display().to_string(),
        source,
    })
}
