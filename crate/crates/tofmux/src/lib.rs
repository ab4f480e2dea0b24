//! Scenario files, CSV artifacts and the four experiment pipelines built on
//! [`tofmux_core`].

use std::path::PathBuf;

use thiserror::Error;
use tofmux_core::detector::DetectorError;
use tofmux_core::scheduler::ScheduleError;
use tofmux_core::simulator::SimError;
use tofmux_core::timing::TimingError;

pub mod artifacts;
pub mod experiment;
pub mod scenario;

pub use experiment::{run, RunReport};
pub use scenario::{ExperimentKind, ScenarioFile};

#[derive(Debug, Error)]
pub enum Error {
    #[error("{}", path.display())]
    Io { path: PathBuf, source: std::io::Error },
    #[error("{}", path.display())]
    Csv { path: PathBuf, source: csv::Error },
    #[error("{}", path.display())]
    Toml { path: PathBuf, source: toml::de::Error },
    #[error(transparent)]
    Parse(#[from] toml::de::Error),
    #[error("invalid scenario: {0}")]
    Invalid(String),
    #[error("scenario is for `{found}`, not `{requested}`")]
    WrongExperiment { found: ExperimentKind, requested: ExperimentKind },
    #[error(transparent)]
    Timing(#[from] TimingError),
    #[error(transparent)]
    Schedule(#[from] ScheduleError),
    #[error(transparent)]
    Sim(#[from] SimError),
    #[error(transparent)]
    Detector(#[from] DetectorError),
}
