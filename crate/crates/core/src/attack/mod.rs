//! Replay and false-data-injection attacks launched from the process-bus
//! monitoring port of one substation.

use std::fmt;
use std::io::{Read, Write};
use std::str::FromStr;

use thiserror::Error;

use crate::codec::{
    decode_frame, encode_goose, encode_sv, read_capture, write_capture, CodecError, GooseEntry, GooseFrame, RawFrame,
    SvFrame,
};
use crate::grid::{faulted_state, FaultSpec, GridError, Terminal};
use crate::sim::{
    goose_appid, micros_to_sample, quantize, seconds_to_sample, sv_appid, Action, EventKind, Scaling, SimError,
    SystemSim, SAMPLES_PER_SECOND,
};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum AttackError {
    #[error(transparent)]
    Sim(#[from] SimError),
    #[error(transparent)]
    Grid(#[from] GridError),
    #[error(transparent)]
    Codec(#[from] CodecError),
    #[error("capture is empty")]
    EmptyCapture,
    #[error("capture timestamps not strictly increasing at frame {0}")]
    UnorderedCapture(usize),
    #[error("signature branch {branch} is not local to bus {bus} bay {bay}")]
    NonLocalSignature { branch: usize, bus: usize, bay: u8 },
    #[error("invalid attack: {0}")]
    Invalid(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum AttackKind {
    ReplaySv,
    ReplayGoose,
    FdiSv,
    FdiGoose,
}

impl AttackKind {
    pub const ALL: [AttackKind; 4] = [AttackKind::ReplaySv, AttackKind::ReplayGoose, AttackKind::FdiSv, AttackKind::FdiGoose];

    pub fn as_str(self) -> &'static str {
        match self {
            AttackKind::ReplaySv => "REPLAY_SV",
            AttackKind::ReplayGoose => "REPLAY_GOOSE",
            AttackKind::FdiSv => "FDI_SV",
            AttackKind::FdiGoose => "FDI_GOOSE",
        }
    }

    pub fn is_sv(self) -> bool {
        matches!(self, AttackKind::ReplaySv | AttackKind::FdiSv)
    }
}

impl fmt::Display for AttackKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for AttackKind {
    type Err = AttackError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        AttackKind::ALL
            .into_iter()
            .find(|k| k.as_str().eq_ignore_ascii_case(s))
            .ok_or_else(|| AttackError::Invalid(format!("unknown attack kind '{s}'")))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct AttackSpec {
    pub kind: AttackKind,
    pub bus: usize,
    pub bay: u8,
    pub start_s: f64,
    pub duration_s: f64,
    /// Fault to mimic, for FDI_SV.
    pub signature: Option<FaultSpec>,
    /// Dataset entry written by FDI_GOOSE.
    pub trip_payload: GooseEntry,
}

impl AttackSpec {
    pub fn validate(&self) -> Result<(), AttackError> {
        if !(self.start_s > 0.0 && self.start_s.is_finite()) {
            return Err(AttackError::Invalid(format!("start time {} must be positive", self.start_s)));
        }
        if !(self.duration_s > 0.0 && self.duration_s.is_finite()) {
            return Err(AttackError::Invalid(format!("duration {} must be positive", self.duration_s)));
        }
        if self.kind == AttackKind::FdiSv && self.signature.is_none() {
            return Err(AttackError::Invalid("FDI_SV needs a fault signature".into()));
        }
        Ok(())
    }

    pub fn start_sample(&self) -> u64 {
        seconds_to_sample(self.start_s)
    }

    pub fn duration_samples(&self) -> u64 {
        seconds_to_sample(self.duration_s).max(1)
    }

    pub fn label(&self) -> String {
        format!("{} bus {} bay {}", self.kind, self.bus, self.bay)
    }
}

/// Frames copied off a monitoring port.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CaptureBuffer {
    pub port: u32,
    pub frames: Vec<RawFrame>,
}

impl CaptureBuffer {
    pub fn new(port: u32, frames: Vec<RawFrame>) -> Result<CaptureBuffer, AttackError> {
        let c = CaptureBuffer { port, frames };
        c.validate()?;
        Ok(c)
    }

    pub fn validate(&self) -> Result<(), AttackError> {
        for (i, w) in self.frames.windows(2).enumerate() {
            if w[1].timestamp_us <= w[0].timestamp_us {
                return Err(AttackError::UnorderedCapture(i + 1));
            }
        }
        for f in &self.frames {
            decode_frame(f)?;
        }
        Ok(())
    }

    /// Frames of one bay: its SV stream and its GOOSE control block.
    pub fn bay_frames(&self, bus: usize, bay: u8, kind: AttackKind) -> CaptureBuffer {
        let sv = sv_appid(bus, bay);
        let goose = goose_appid(bus, bay);
        let frames = self
            .frames
            .iter()
            .filter(|f| match decode_frame(f) {
                Ok(crate::codec::Frame::Sv(s)) => kind.is_sv() && s.appid == sv,
                Ok(crate::codec::Frame::Goose(g)) => !kind.is_sv() && g.appid == goose,
                Err(_) => false,
            })
            .cloned()
            .collect();
        CaptureBuffer { port: self.port, frames }
    }

    pub fn write_to<W: Write>(&self, w: W) -> Result<(), AttackError> {
        Ok(write_capture(w, self.port, &self.frames)?)
    }

    pub fn read_from<R: Read>(r: R) -> Result<CaptureBuffer, AttackError> {
        let (port, frames) = read_capture(r)?;
        CaptureBuffer::new(port, frames)
    }
}

/// Mirrors the process bus of `bus` for `samples` intervals while the
/// simulation runs.
pub fn capture_traffic(sim: &mut SystemSim, bus: usize, port: usize, samples: u64) -> Result<CaptureBuffer, AttackError> {
    sim.start_capture(bus, port)?;
    let run = sim.run_for(samples);
    let frames = sim.stop_capture(bus)?;
    run?;
    CaptureBuffer::new(port as u32, frames)
}

/// Re-emits the capture from sample `start`, keeping the sample spacing and
/// the bytes.
pub fn replay(capture: &CaptureBuffer, start: u64) -> Result<Vec<(u64, RawFrame)>, AttackError> {
    let first = capture.frames.first().ok_or(AttackError::EmptyCapture)?;
    let n0 = micros_to_sample(first.timestamp_us);
    Ok(capture
        .frames
        .iter()
        .map(|f| (start + micros_to_sample(f.timestamp_us) - n0, f.clone()))
        .collect())
}

/// SV stream of a bay carrying the local measurements the grid would show
/// with `signature` applied, from `start` for `samples` intervals.
pub fn forge_sv_fault(
    sim: &SystemSim,
    template: &SvFrame,
    bus: usize,
    bay: u8,
    signature: &FaultSpec,
    start: u64,
    samples: u64,
) -> Result<Vec<(u64, RawFrame)>, AttackError> {
    let net = sim.net();
    let layout = &sim.substation(bus)?.layout;
    let b = layout.bay(bay).ok_or(SimError::UnknownIed { bus, bay })?;
    match b.terminal {
        Terminal::Line { branch, .. } if branch == signature.branch => {}
        _ => {
            return Err(AttackError::NonLocalSignature {
                branch: signature.branch,
                bus,
                bay,
            })
        }
    }
    let st = faulted_state(net, sim.operating_point(), signature, sim.open_set())?;
    let i = st.currents[b.cb_index];
    let v = st.voltages[bus - 1];
    let scale = Scaling::new(net.base_mva, net.buses[bus - 1].base_kv);
    let mut f = template.clone();
    let mut out = Vec::with_capacity(samples as usize);
    for n in start..start + samples {
        f.smp_cnt = (n % SAMPLES_PER_SECOND) as u16;
        for (e, x) in f.dataset.iter_mut().zip(quantize(&i, &v, scale, n)) {
            e.value = x;
        }
        out.push((n, encode_sv(&f)?));
    }
    Ok(out)
}

/// The bay's live GOOSE state with the trip raised as a new event.
pub fn forge_goose_trip(template: &GooseFrame) -> GooseFrame {
    let mut g = template.clone();
    let mut e = g.all_data.first().copied().unwrap_or(GooseEntry {
        trip: false,
        cb_closed: true,
    });
    e.trip = true;
    g.all_data = vec![e];
    g.st_num = template.st_num.wrapping_add(1);
    g.sq_num = 0;
    g
}

/// Queues the attack's frames on the target bus and marks its start and
/// end in the event log. `capture` is required for replays.
pub fn launch(sim: &mut SystemSim, spec: &AttackSpec, capture: Option<&CaptureBuffer>) -> Result<(), AttackError> {
    spec.validate()?;
    let start = spec.start_sample();
    if start < sim.sample() {
        return Err(AttackError::Invalid(format!(
            "start sample {start} already simulated (now {})",
            sim.sample()
        )));
    }
    let dur = spec.duration_samples();
    let frames = match spec.kind {
        AttackKind::ReplaySv | AttackKind::ReplayGoose => {
            let cap = capture.ok_or_else(|| AttackError::Invalid("replay needs a capture".into()))?;
            let mine = cap.bay_frames(spec.bus, spec.bay, spec.kind);
            let mut s = replay(&mine, start)?;
            s.retain(|(n, _)| *n < start + dur);
            s
        }
        AttackKind::FdiSv => {
            let sig = spec.signature.as_ref().expect("validated");
            let template = sim.live_sv(spec.bus, spec.bay)?;
            forge_sv_fault(sim, &template, spec.bus, spec.bay, sig, start, dur)?
        }
        AttackKind::FdiGoose => {
            let live = sim.live_goose(spec.bus, spec.bay)?;
            let mut g = forge_goose_trip(&live);
            g.all_data = vec![GooseEntry {
                trip: true,
                ..spec.trip_payload
            }];
            let hb = (g.time_allowed_to_live as u64 * SAMPLES_PER_SECOND / 2000).max(1);
            let mut out = Vec::new();
            let mut n = start;
            while n < start + dur {
                out.push((n, encode_goose(&g)?));
                g.sq_num = g.sq_num.wrapping_add(1);
                n += hb;
            }
            out
        }
    };
    if frames.is_empty() {
        return Err(AttackError::EmptyCapture);
    }
    let end = frames.last().map(|(n, _)| n + 1).unwrap_or(start);
    sim.inject(spec.bus, frames)?;
    sim.schedule(
        start,
        Action::Log {
            source: "attacker".into(),
            kind: EventKind::AttackStarted,
            detail: spec.label(),
        },
    );
    sim.schedule(
        end,
        Action::Log {
            source: "attacker".into(),
            kind: EventKind::AttackEnded,
            detail: spec.label(),
        },
    );
    Ok(())
}
