//! End-to-end drivers behind the command-line tool: dataset generation,
//! training and evaluation, scenario runs and frame inspection.

mod config;
mod gen;
mod inspect;
mod scenario;
mod train;

use std::path::Path;

use thiserror::Error;

use crate::attack::AttackError;
use crate::codec::CodecError;
use crate::grid::GridError;
use crate::ml::MlError;
use crate::scada::ScadaError;
use crate::sim::{SimError, SystemSim};

pub use config::{
    DatasetSection, EventConfig, FaultConfig, PathsConfig, RestorationConfig, ScadaSection, ScenarioConfig,
    NOMINAL_FREQUENCY_HZ,
};
pub use gen::{
    enumerate_conditions, generate_dataset, Condition, GenOptions, GeneratedDataset, Manifest, SampleDiagnostics,
    EVENT_SAMPLE,
};
pub use inspect::inspect_frame;
pub use scenario::{run_scenario, Check, ScenarioOutcome, Verdict};
pub use train::{evaluate_model, train_all, ModelResult, TrainOutcome};

#[derive(Debug, Error)]
pub enum HarnessError {
    #[error("config: {0}")]
    Config(String),
    #[error("{path}: {message}")]
    Io { path: String, message: String },
    #[error(transparent)]
    Sim(#[from] SimError),
    #[error(transparent)]
    Grid(#[from] GridError),
    #[error(transparent)]
    Attack(#[from] AttackError),
    #[error(transparent)]
    Ml(#[from] MlError),
    #[error(transparent)]
    Scada(#[from] ScadaError),
    #[error(transparent)]
    Codec(#[from] CodecError),
    #[error("{0}")]
    Generation(String),
}

impl HarnessError {
    pub fn io(path: &Path, e: std::io::Error) -> HarnessError {
        HarnessError::Io {
            path: path.display().to_string(),
            message: e.to_string(),
        }
    }
}

/// Runs to `target`, skipping whole quiet cycles when possible.
pub fn advance_to(sim: &mut SystemSim, target: u64) -> Result<(), SimError> {
    while sim.sample() < target {
        if sim.quiescent_until(target).is_ok() {
            sim.fast_forward(target)?;
            if sim.sample() >= target {
                break;
            }
        }
        sim.step()?;
    }
    Ok(())
}

/// Per-run seed from the master seed and a run index (splitmix64).
pub fn derive_seed(seed: u64, index: u64) -> u64 {
    let mut z = seed ^ index.wrapping_add(1).wrapping_mul(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}
