//! Sample-stepped digital substation simulation.

mod cb;
mod dft;
mod engine;
mod events;
mod ied;
mod layout;
mod mu;
mod pmu;
mod settings;
mod substation;
mod switch;

use thiserror::Error;

pub use cb::{CircuitBreaker, TripInput, CB_DELAY_SAMPLES};
pub use dft::SlidingDft;
pub use engine::{Action, SimConfig, SystemSim};
pub use events::{Event, EventKind, EventLog};
pub use ied::{goose_template, Element, Evaluation, GoosePublisher, Ied, IedConfig};
pub use layout::{
    dat_set, device_mac, gocb_ref, goose_appid, goose_mac, ied_name, substation_layouts, sv_appid, sv_id, sv_mac, Bay,
    SubstationLayout, ROLE_CIED, ROLE_IED, ROLE_MU,
};
pub use mu::{quantize, MergingUnit, Scaling};
pub use pmu::{NoiseConfig, Pmu, WINDOW_REPORTS};
pub use settings::{ProtectionSettings, SettingRules};
pub use substation::{BayStatus, Cied, Substation, SubstationFeed};
pub use switch::{Delivery, Device, Forwarded, Port, PortId, SdnSwitch};

use crate::codec::CodecError;
use crate::grid::GridError;

pub const SAMPLES_PER_CYCLE: u64 = 80;
pub const SAMPLES_PER_SECOND: u64 = 4800;

/// Capture timestamp of sample `n`: the microsecond at or after it.
pub fn sample_micros(n: u64) -> u64 {
    (n * 625).div_ceil(3)
}

/// Sample interval containing microsecond `us`.
pub fn micros_to_sample(us: u64) -> u64 {
    us * 3 / 625
}

pub fn seconds_to_sample(t: f64) -> u64 {
    (t * SAMPLES_PER_SECOND as f64).round().max(0.0) as u64
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SimError {
    #[error(transparent)]
    Grid(#[from] GridError),
    #[error(transparent)]
    Codec(#[from] CodecError),
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
    #[error("no IED {bay} at bus {bus}")]
    UnknownIed { bus: usize, bay: u8 },
    #[error("unknown bus {0}")]
    UnknownBus(usize),
    #[error("unknown port {0}")]
    UnknownPort(PortId),
    #[error("port {port} of {switch} is not the monitoring port")]
    NotMonitorPort { switch: String, port: PortId },
    #[error("CIED at bus {bus} already covers IED {active}; cannot also take IED {requested}")]
    CiedBusy { bus: usize, active: u8, requested: u8 },
    #[error("cannot fast-forward: {0}")]
    NotQuiescent(&'static str),
    #[error("internal: {0}")]
    Internal(&'static str),
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn micro_stamps_map_back_to_samples() {
        for n in 0..20_000u64 {
            let us = sample_micros(n);
            assert_eq!(micros_to_sample(us), n);
            assert_eq!(micros_to_sample(us + 207), n);
        }
    }
}
