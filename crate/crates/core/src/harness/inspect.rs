use crate::codec::{decode_frame, parse_hex, CodecError, RawFrame};

/// Field listing of a hex-encoded frame.
pub fn inspect_frame(hex: &str) -> Result<String, CodecError> {
    let bytes = parse_hex(hex)?;
    Ok(decode_frame(&RawFrame::new(bytes))?.describe())
}
