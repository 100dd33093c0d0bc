//! IEC 61850-9-2 Sampled Values and GOOSE frames on raw Ethernet.

pub mod ber;
mod capture;
mod ether;
mod goose;
mod hex;
mod sv;

pub use capture::{read_capture, write_capture, CAPTURE_MAGIC, MAX_RECORD_LEN};
pub use ether::{MacAddr, RawFrame, VlanTag, ETHERTYPE_GOOSE, ETHERTYPE_SV, ETHERTYPE_VLAN};
pub use goose::{decode_goose, encode_goose, GooseEntry, GooseFrame, Timestamp};
pub use hex::{parse_hex, to_hex};
pub use sv::{decode_sv, encode_sv, SvEntry, SvFrame, SV_CURRENT_UNIT_A, SV_VOLTAGE_UNIT_V};

use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum CodecError {
    #[error("truncated {0}")]
    Truncated(&'static str),
    #[error("indefinite-length encoding is not supported")]
    IndefiniteLength,
    #[error("unsupported length encoding 0x{0:02X}")]
    UnsupportedLength(u8),
    #[error("payload of {0} bytes is too long to encode")]
    PayloadTooLong(usize),
    #[error("unsupported Ethertype 0x{0:04X}")]
    WrongEthertype(u16),
    #[error("unexpected tag 0x{found:02X} (expected 0x{expected:02X})")]
    UnexpectedTag { expected: u8, found: u8 },
    #[error("dataset length {0} bytes, expected 64 (8 entries)")]
    DatasetLength(usize),
    #[error("length-field mismatch: header says {declared} bytes, frame carries {actual}")]
    LengthMismatch { declared: usize, actual: usize },
    #[error("numDatSetEntries {declared} does not match {actual} allData entries")]
    EntryCount { declared: u32, actual: usize },
    #[error("invalid {0}")]
    InvalidValue(&'static str),
    #[error("{0} trailing bytes")]
    TrailingBytes(usize),
    #[error("invalid hex: {0}")]
    Hex(String),
    #[error("capture file: {0}")]
    Capture(String),
}

/// A decoded frame of either kind.
#[derive(Debug, Clone, PartialEq)]
pub enum Frame {
    Sv(SvFrame),
    Goose(GooseFrame),
}

impl Frame {
    pub fn encode(&self, timestamp_us: u64) -> Result<RawFrame, CodecError> {
        let mut raw = match self {
            Frame::Sv(f) => encode_sv(f)?,
            Frame::Goose(f) => encode_goose(f)?,
        };
        raw.timestamp_us = timestamp_us;
        Ok(raw)
    }

    pub fn dst(&self) -> MacAddr {
        match self {
            Frame::Sv(f) => f.dst,
            Frame::Goose(f) => f.dst,
        }
    }

    /// Field listing, one `name: value` per line.
    pub fn describe(&self) -> String {
        match self {
            Frame::Sv(f) => f.describe(),
            Frame::Goose(f) => f.describe(),
        }
    }
}

/// Dispatches on the Ethertype.
pub fn decode_frame(raw: &RawFrame) -> Result<Frame, CodecError> {
    match ether::ethertype(&raw.bytes)? {
        ETHERTYPE_SV => decode_sv(raw).map(Frame::Sv),
        ETHERTYPE_GOOSE => decode_goose(raw).map(Frame::Goose),
        other => Err(CodecError::WrongEthertype(other)),
    }
}
