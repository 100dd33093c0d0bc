use super::CodecError;

/// Two-digit uppercase bytes separated by single spaces.
pub fn to_hex(bytes: &[u8]) -> String {
    let mut s = String::with_capacity(bytes.len() * 3);
    for (i, b) in bytes.iter().enumerate() {
        if i > 0 {
            s.push(' ');
        }
        s.push_str(&format!("{b:02X}"));
    }
    s
}

/// Accepts the dump format above; any whitespace (including none) between
/// bytes is tolerated.
pub fn parse_hex(text: &str) -> Result<Vec<u8>, CodecError> {
    let compact: String = text.split_whitespace().collect();
    if compact.is_empty() {
        return Err(CodecError::Hex("no bytes".into()));
    }
    hex::decode(&compact).map_err(|e| CodecError::Hex(e.to_string()))
}
