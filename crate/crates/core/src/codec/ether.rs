use std::fmt;
use std::str::FromStr;

use super::CodecError;

pub const ETHERTYPE_SV: u16 = 0x88BA;
pub const ETHERTYPE_GOOSE: u16 = 0x88B8;
pub const ETHERTYPE_VLAN: u16 = 0x8100;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub struct MacAddr(pub [u8; 6]);

impl MacAddr {
    pub fn is_multicast(&self) -> bool {
        self.0[0] & 0x01 != 0
    }
}

impl fmt::Display for MacAddr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let b = self.0;
        write!(f, "{:02X}-{:02X}-{:02X}-{:02X}-{:02X}-{:02X}", b[0], b[1], b[2], b[3], b[4], b[5])
    }
}

impl FromStr for MacAddr {
    type Err = CodecError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let parts: Vec<&str> = s.split(['-', ':']).collect();
        if parts.len() != 6 {
            return Err(CodecError::InvalidValue("MAC address"));
        }
        let mut out = [0u8; 6];
        for (o, p) in out.iter_mut().zip(parts) {
            *o = u8::from_str_radix(p, 16).map_err(|_| CodecError::InvalidValue("MAC address"))?;
        }
        Ok(MacAddr(out))
    }
}

/// 802.1Q tag control information.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct VlanTag {
    pub priority: u8,
    pub vid: u16,
}

/// A frame as it appears on the wire, with its capture time.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct RawFrame {
    pub bytes: Vec<u8>,
    pub timestamp_us: u64,
}

impl RawFrame {
    pub fn new(bytes: Vec<u8>) -> RawFrame {
        RawFrame { bytes, timestamp_us: 0 }
    }

    /// Destination MAC, when the frame is long enough to carry one.
    pub fn dst(&self) -> Option<MacAddr> {
        self.bytes.get(..6).map(|b| MacAddr(b.try_into().unwrap()))
    }

    pub fn src(&self) -> Option<MacAddr> {
        self.bytes.get(6..12).map(|b| MacAddr(b.try_into().unwrap()))
    }
}

/// The part of both protocols before the APDU.
#[derive(Debug, Clone, PartialEq)]
pub(crate) struct Header {
    pub dst: MacAddr,
    pub src: MacAddr,
    pub vlan: Option<VlanTag>,
    pub appid: u16,
}

pub(crate) fn ethertype(bytes: &[u8]) -> Result<u16, CodecError> {
    if bytes.len() < 14 {
        return Err(CodecError::Truncated("Ethernet header"));
    }
    let mut et = u16::from_be_bytes([bytes[12], bytes[13]]);
    if et == ETHERTYPE_VLAN {
        if bytes.len() < 18 {
            return Err(CodecError::Truncated("Ethernet header"));
        }
        et = u16::from_be_bytes([bytes[16], bytes[17]]);
    }
    Ok(et)
}

/// Ethernet header, APPID, Length (8 + APDU), two zero reserved words, APDU.
pub(crate) fn write_frame(h: &Header, ethertype: u16, apdu: &[u8]) -> Result<Vec<u8>, CodecError> {
    let length = 8 + apdu.len();
    if length > u16::MAX as usize {
        return Err(CodecError::PayloadTooLong(apdu.len()));
    }
    let mut out = Vec::with_capacity(26 + apdu.len());
    out.extend_from_slice(&h.dst.0);
    out.extend_from_slice(&h.src.0);
    if let Some(v) = h.vlan {
        out.extend_from_slice(&ETHERTYPE_VLAN.to_be_bytes());
        let tci = ((v.priority as u16 & 0x7) << 13) | (v.vid & 0x0FFF);
        out.extend_from_slice(&tci.to_be_bytes());
    }
    out.extend_from_slice(&ethertype.to_be_bytes());
    out.extend_from_slice(&h.appid.to_be_bytes());
    out.extend_from_slice(&(length as u16).to_be_bytes());
    out.extend_from_slice(&[0, 0, 0, 0]);
    out.extend_from_slice(apdu);
    Ok(out)
}

/// Splits a frame into header fields, the declared Length and the bytes
/// after the reserved words.
pub(crate) fn read_frame(bytes: &[u8], want: u16) -> Result<(Header, usize, &[u8]), CodecError> {
    let et = ethertype(bytes)?;
    if et != want {
        return Err(CodecError::WrongEthertype(et));
    }
    let mut off = 12;
    let vlan = if u16::from_be_bytes([bytes[12], bytes[13]]) == ETHERTYPE_VLAN {
        let tci = u16::from_be_bytes([bytes[14], bytes[15]]);
        off += 4;
        Some(VlanTag {
            priority: (tci >> 13) as u8,
            vid: tci & 0x0FFF,
        })
    } else {
        None
    };
    off += 2;
    if bytes.len() < off + 8 {
        return Err(CodecError::Truncated("protocol header"));
    }
    let appid = u16::from_be_bytes([bytes[off], bytes[off + 1]]);
    let length = u16::from_be_bytes([bytes[off + 2], bytes[off + 3]]) as usize;
    let h = Header {
        dst: MacAddr(bytes[0..6].try_into().unwrap()),
        src: MacAddr(bytes[6..12].try_into().unwrap()),
        vlan,
        appid,
    };
    Ok((h, length, &bytes[off + 8..]))
}

/// Checks the declared Length against the APDU that was actually decoded and
/// the bytes the frame carries.
pub(crate) fn check_length(declared: usize, apdu_len: usize, available: usize) -> Result<(), CodecError> {
    let actual = 8 + apdu_len;
    if declared != actual {
        return Err(CodecError::LengthMismatch { declared, actual });
    }
    if available > apdu_len {
        return Err(CodecError::TrailingBytes(available - apdu_len));
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn mac_display_and_parse() {
        let m = MacAddr([0x01, 0x0C, 0xCD, 0x04, 0x08, 0x02]);
        assert_eq!(m.to_string(), "01-0C-CD-04-08-02");
        assert_eq!("01:0c:cd:04:08:02".parse::<MacAddr>().unwrap(), m);
        assert!(m.is_multicast());
        assert!("01-02".parse::<MacAddr>().is_err());
    }

    #[test]
    fn vlan_tag_round_trip() {
        let h = Header {
            dst: MacAddr([1, 2, 3, 4, 5, 6]),
            src: MacAddr([7, 8, 9, 10, 11, 12]),
            vlan: Some(VlanTag { priority: 4, vid: 0x123 }),
            appid: 0x4000,
        };
        let bytes = write_frame(&h, ETHERTYPE_SV, &[0x60, 0x00]).unwrap();
        assert_eq!(&bytes[12..14], &[0x81, 0x00]);
        assert_eq!(ethertype(&bytes).unwrap(), ETHERTYPE_SV);
        let (back, len, rest) = read_frame(&bytes, ETHERTYPE_SV).unwrap();
        assert_eq!(back, h);
        assert_eq!(len, 10);
        assert_eq!(rest, &[0x60, 0x00]);
    }
}
