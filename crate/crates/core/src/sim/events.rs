use std::fmt;
use std::str::FromStr;

use super::SAMPLES_PER_SECOND;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum EventKind {
    SvPublish,
    GoosePublish,
    TripIssued,
    TripReset,
    CbOpened,
    CbClosed,
    CbTripIgnored,
    FaultApplied,
    FaultCleared,
    AttackStarted,
    AttackEnded,
    ScadaFlagSet,
    PortDisabled,
    PortEnabled,
    CiedActivated,
    Classification,
    FrameDropped,
    SvMissing,
    GooseRejected,
}

impl EventKind {
    pub const ALL: [EventKind; 19] = [
        EventKind::SvPublish,
        EventKind::GoosePublish,
        EventKind::TripIssued,
        EventKind::TripReset,
        EventKind::CbOpened,
        EventKind::CbClosed,
        EventKind::CbTripIgnored,
        EventKind::FaultApplied,
        EventKind::FaultCleared,
        EventKind::AttackStarted,
        EventKind::AttackEnded,
        EventKind::ScadaFlagSet,
        EventKind::PortDisabled,
        EventKind::PortEnabled,
        EventKind::CiedActivated,
        EventKind::Classification,
        EventKind::FrameDropped,
        EventKind::SvMissing,
        EventKind::GooseRejected,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            EventKind::SvPublish => "SV_PUBLISH",
            EventKind::GoosePublish => "GOOSE_PUBLISH",
            EventKind::TripIssued => "TRIP_ISSUED",
            EventKind::TripReset => "TRIP_RESET",
            EventKind::CbOpened => "CB_OPENED",
            EventKind::CbClosed => "CB_CLOSED",
            EventKind::CbTripIgnored => "CB_TRIP_IGNORED",
            EventKind::FaultApplied => "FAULT_APPLIED",
            EventKind::FaultCleared => "FAULT_CLEARED",
            EventKind::AttackStarted => "ATTACK_STARTED",
            EventKind::AttackEnded => "ATTACK_ENDED",
            EventKind::ScadaFlagSet => "SCADA_FLAG_SET",
            EventKind::PortDisabled => "PORT_DISABLED",
            EventKind::PortEnabled => "PORT_ENABLED",
            EventKind::CiedActivated => "CIED_ACTIVATED",
            EventKind::Classification => "CLASSIFICATION",
            EventKind::FrameDropped => "FRAME_DROPPED",
            EventKind::SvMissing => "SV_MISSING",
            EventKind::GooseRejected => "GOOSE_REJECTED",
        }
    }
}

impl fmt::Display for EventKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for EventKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        EventKind::ALL
            .iter()
            .copied()
            .find(|k| k.as_str() == s)
            .ok_or_else(|| format!("unknown event kind '{s}'"))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Event {
    /// Sample index; the timestamp is `sample / 4800` seconds.
    pub sample: u64,
    pub source: String,
    pub kind: EventKind,
    pub detail: String,
}

impl Event {
    pub fn time(&self) -> f64 {
        self.sample as f64 / SAMPLES_PER_SECOND as f64
    }
}

impl fmt::Display for Event {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:.6}\t{}\t{}\t{}", self.time(), self.source, self.kind, self.detail)
    }
}

/// Append-only record, ordered by sample.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct EventLog {
    events: Vec<Event>,
}

impl EventLog {
    pub fn new() -> EventLog {
        EventLog::default()
    }

    pub fn push(&mut self, sample: u64, source: impl Into<String>, kind: EventKind, detail: impl Into<String>) {
        debug_assert!(self.events.last().is_none_or(|e| e.sample <= sample));
        self.events.push(Event {
            sample,
            source: source.into(),
            kind,
            detail: detail.into(),
        });
    }

    pub fn events(&self) -> &[Event] {
        &self.events
    }

    pub fn len(&self) -> usize {
        self.events.len()
    }

    pub fn is_empty(&self) -> bool {
        self.events.is_empty()
    }

    pub fn of_kind(&self, kind: EventKind) -> impl Iterator<Item = &Event> {
        self.events.iter().filter(move |e| e.kind == kind)
    }

    pub fn first(&self, kind: EventKind) -> Option<&Event> {
        self.of_kind(kind).next()
    }

    pub fn first_after(&self, kind: EventKind, sample: u64) -> Option<&Event> {
        self.of_kind(kind).find(|e| e.sample >= sample)
    }

    pub fn to_text(&self) -> String {
        let mut s = String::new();
        for e in &self.events {
            s.push_str(&e.to_string());
            s.push('\n');
        }
        s
    }
}
