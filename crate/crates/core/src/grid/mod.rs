//! Quasi-static phasor model of a transmission network: Newton power flow,
//! symmetrical-component fault analysis and post-trip states.

mod case;
mod fault;
mod network;
mod powerflow;
mod sequence;
mod snapshot;
mod state;

pub use case::{build_ieee14, parse_case, write_case};
pub use fault::{
    apply_fault, bus_fault_state, faulted_state, unfaulted_state, FaultSpec, FaultType, DEFAULT_IMPEDANCES_OHM,
    DEFAULT_LOCATIONS,
};
pub use network::{
    Branch, Bus, BusKind, Generator, Load, NetworkModel, Sequence, SequenceBranch, TABLE_BRANCHES,
    TABLE_GENERATORS, TABLE_LOADS,
};
pub use powerflow::{post_trip_state, solve_power_flow, PowerFlow, PowerFlowOptions};
pub use sequence::{phase_to_sequence, sequence_to_phase, ALPHA};
pub use snapshot::{BusPhasors, SystemSnapshot};
pub(crate) use snapshot::wrap_angle;
pub use state::{End, OpenSet, PhasorState, Terminal};

use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum GridError {
    #[error("unknown bus {0}")]
    UnknownBus(usize),
    #[error("unknown branch {0}")]
    UnknownBranch(usize),
    #[error("invalid network: {0}")]
    Invalid(String),
    #[error("buses {0:?} are disconnected from the slack bus")]
    Islanded(Vec<usize>),
    #[error("case file line {line}: {message}")]
    CaseParse { line: usize, message: String },
    #[error("power flow did not converge after {iterations} iterations (worst mismatch {worst_mismatch:.3e} pu at bus {bus})")]
    NoConvergence {
        iterations: usize,
        worst_mismatch: f64,
        bus: usize,
    },
    #[error("singular {0} matrix")]
    Singular(&'static str),
    #[error("invalid fault: {0}")]
    InvalidFault(String),
}
