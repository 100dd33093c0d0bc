//! Definite-length BER TLVs with single-byte tags.

use super::CodecError;

/// `tag`, definite length, `payload`. Lengths below 128 use the short form,
/// longer ones `0x81 n` or `0x82 hi lo`.
pub fn encode_tlv(tag: u8, payload: &[u8]) -> Result<Vec<u8>, CodecError> {
    let mut out = Vec::with_capacity(payload.len() + 4);
    push_tlv(&mut out, tag, payload)?;
    Ok(out)
}

pub fn push_tlv(out: &mut Vec<u8>, tag: u8, payload: &[u8]) -> Result<(), CodecError> {
    let len = payload.len();
    out.push(tag);
    match len {
        0..=0x7F => out.push(len as u8),
        0x80..=0xFF => out.extend_from_slice(&[0x81, len as u8]),
        0x100..=0xFFFF => out.extend_from_slice(&[0x82, (len >> 8) as u8, len as u8]),
        _ => return Err(CodecError::PayloadTooLong(len)),
    }
    out.extend_from_slice(payload);
    Ok(())
}

/// Returns the tag, the payload and the number of bytes consumed.
pub fn decode_tlv(bytes: &[u8]) -> Result<(u8, &[u8], usize), CodecError> {
    let (&tag, rest) = bytes.split_first().ok_or(CodecError::Truncated("TLV"))?;
    let (&first, rest) = rest.split_first().ok_or(CodecError::Truncated("TLV"))?;
    let (len, hdr) = match first {
        0x00..=0x7F => (first as usize, 2),
        0x80 => return Err(CodecError::IndefiniteLength),
        0x81 => {
            let b = *rest.first().ok_or(CodecError::Truncated("TLV"))?;
            (b as usize, 3)
        }
        0x82 => {
            if rest.len() < 2 {
                return Err(CodecError::Truncated("TLV"));
            }
            (((rest[0] as usize) << 8) | rest[1] as usize, 4)
        }
        other => return Err(CodecError::UnsupportedLength(other)),
    };
    let end = hdr + len;
    if bytes.len() < end {
        return Err(CodecError::Truncated("TLV"));
    }
    Ok((tag, &bytes[hdr..end], end))
}

/// Reads the next TLV and checks its tag.
pub fn expect_tlv<'a>(bytes: &mut &'a [u8], tag: u8) -> Result<&'a [u8], CodecError> {
    let (t, payload, used) = decode_tlv(bytes)?;
    if t != tag {
        return Err(CodecError::UnexpectedTag { expected: tag, found: t });
    }
    *bytes = &bytes[used..];
    Ok(payload)
}

/// Minimal two's-complement content octets of a non-negative integer.
pub fn uint_content(v: u32) -> Vec<u8> {
    let be = (v as u64).to_be_bytes();
    let mut start = 0;
    // Drop leading 0x00 octets while the next one keeps the sign bit clear.
    while start < be.len() - 1 && be[start] == 0 && be[start + 1] & 0x80 == 0 {
        start += 1;
    }
    be[start..].to_vec()
}

pub fn decode_uint(content: &[u8]) -> Result<u32, CodecError> {
    if content.is_empty() || content.len() > 5 {
        return Err(CodecError::InvalidValue("integer length"));
    }
    if content[0] & 0x80 != 0 {
        return Err(CodecError::InvalidValue("negative integer"));
    }
    let v = content.iter().fold(0u64, |acc, &b| (acc << 8) | b as u64);
    u32::try_from(v).map_err(|_| CodecError::InvalidValue("integer range"))
}

pub fn decode_bool(content: &[u8]) -> Result<bool, CodecError> {
    match content {
        [b] => Ok(*b != 0),
        _ => Err(CodecError::InvalidValue("boolean length")),
    }
}

pub fn bool_content(v: bool) -> [u8; 1] {
    [if v { 0xFF } else { 0x00 }]
}

pub fn decode_string(content: &[u8]) -> Result<String, CodecError> {
    if !content.is_ascii() {
        return Err(CodecError::InvalidValue("visible string"));
    }
    Ok(String::from_utf8_lossy(content).into_owned())
}
