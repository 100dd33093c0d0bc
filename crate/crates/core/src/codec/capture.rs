//! Capture files.
//!
//! ```text
//! magic     8 bytes  "SUBCAP01"
//! port      u32 LE   switch port the frames were taken from
//! records   repeated until end of file:
//!   timestamp_us  u64 LE
//!   length        u32 LE  (at most MAX_RECORD_LEN)
//!   frame         `length` bytes
//! ```

use std::io::{self, Read, Write};

use super::ether::RawFrame;
use super::CodecError;

pub const CAPTURE_MAGIC: &[u8; 8] = b"SUBCAP01";
/// Larger records are rejected before any allocation.
pub const MAX_RECORD_LEN: u32 = 65_535;

fn io_err(e: io::Error) -> CodecError {
    CodecError::Capture(e.to_string())
}

pub fn write_capture<W: Write>(mut w: W, port: u32, frames: &[RawFrame]) -> Result<(), CodecError> {
    w.write_all(CAPTURE_MAGIC).map_err(io_err)?;
    w.write_all(&port.to_le_bytes()).map_err(io_err)?;
    for f in frames {
        let len = u32::try_from(f.bytes.len())
            .ok()
            .filter(|&l| l <= MAX_RECORD_LEN)
            .ok_or_else(|| CodecError::Capture(format!("frame of {} bytes exceeds record limit", f.bytes.len())))?;
        w.write_all(&f.timestamp_us.to_le_bytes()).map_err(io_err)?;
        w.write_all(&len.to_le_bytes()).map_err(io_err)?;
        w.write_all(&f.bytes).map_err(io_err)?;
    }
    w.flush().map_err(io_err)
}

/// Fills `buf` completely, or reports a clean end of input if nothing at all
/// was read.
fn read_exact_or_eof<R: Read>(r: &mut R, buf: &mut [u8]) -> Result<bool, CodecError> {
    let mut got = 0;
    while got < buf.len() {
        match r.read(&mut buf[got..]) {
            Ok(0) if got == 0 => return Ok(false),
            Ok(0) => return Err(CodecError::Capture("truncated record".into())),
            Ok(n) => got += n,
            Err(e) if e.kind() == io::ErrorKind::Interrupted => {}
            Err(e) => return Err(io_err(e)),
        }
    }
    Ok(true)
}

pub fn read_capture<R: Read>(mut r: R) -> Result<(u32, Vec<RawFrame>), CodecError> {
    let mut magic = [0u8; 8];
    if !read_exact_or_eof(&mut r, &mut magic)? || &magic != CAPTURE_MAGIC {
        return Err(CodecError::Capture("bad magic".into()));
    }
    let mut port = [0u8; 4];
    if !read_exact_or_eof(&mut r, &mut port)? {
        return Err(CodecError::Capture("missing port id".into()));
    }
    let mut frames = Vec::new();
    let mut head = [0u8; 12];
    while read_exact_or_eof(&mut r, &mut head)? {
        let ts = u64::from_le_bytes(head[0..8].try_into().unwrap());
        let len = u32::from_le_bytes(head[8..12].try_into().unwrap());
        if len > MAX_RECORD_LEN {
            return Err(CodecError::Capture(format!("record length {len} exceeds limit")));
        }
        let mut bytes = vec![0u8; len as usize];
        if len > 0 && !read_exact_or_eof(&mut r, &mut bytes)? {
            return Err(CodecError::Capture("truncated record".into()));
        }
        frames.push(RawFrame { bytes, timestamp_us: ts });
    }
    Ok((u32::from_le_bytes(port), frames))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trip() {
        let frames = vec![
            RawFrame {
                bytes: vec![1, 2, 3],
                timestamp_us: 10,
            },
            RawFrame {
                bytes: vec![4; 100],
                timestamp_us: 218,
            },
        ];
        let mut buf = Vec::new();
        write_capture(&mut buf, 7, &frames).unwrap();
        assert_eq!(&buf[..8], b"SUBCAP01");
        assert_eq!(buf.len(), 12 + 2 * 12 + 103);
        let (port, back) = read_capture(&buf[..]).unwrap();
        assert_eq!(port, 7);
        assert_eq!(back, frames);
    }

    #[test]
    fn rejects_bad_input() {
        assert!(read_capture(&b"NOTACAP!\0\0\0\0"[..]).is_err());
        let mut buf = Vec::new();
        write_capture(&mut buf, 1, &[RawFrame { bytes: vec![9; 10], timestamp_us: 1 }]).unwrap();
        assert!(read_capture(&buf[..buf.len() - 1]).is_err());
        let mut huge = b"SUBCAP01".to_vec();
        huge.extend_from_slice(&0u32.to_le_bytes());
        huge.extend_from_slice(&0u64.to_le_bytes());
        huge.extend_from_slice(&u32::MAX.to_le_bytes());
        assert!(matches!(read_capture(&huge[..]), Err(CodecError::Capture(_))));
    }
}
