use std::fmt::Write as _;

use super::ber::{self, expect_tlv};
use super::ether::{self, Header, MacAddr, RawFrame, VlanTag, ETHERTYPE_GOOSE};
use super::CodecError;

/// UtcTime: seconds since the epoch, a 24-bit binary fraction and a quality
/// octet.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, PartialOrd, Ord)]
pub struct Timestamp {
    pub seconds: u32,
    /// Fraction of a second in units of 2^-24 s.
    pub fraction: u32,
    pub quality: u8,
}

impl Timestamp {
    pub fn from_micros(us: u64) -> Timestamp {
        let seconds = (us / 1_000_000) as u32;
        let rem = us % 1_000_000;
        Timestamp {
            seconds,
            fraction: ((rem << 24) / 1_000_000) as u32,
            quality: 0,
        }
    }

    pub fn as_secs_f64(&self) -> f64 {
        self.seconds as f64 + self.fraction as f64 / (1u64 << 24) as f64
    }

    fn to_bytes(self) -> [u8; 8] {
        let s = self.seconds.to_be_bytes();
        let f = (self.fraction & 0x00FF_FFFF).to_be_bytes();
        [s[0], s[1], s[2], s[3], f[1], f[2], f[3], self.quality]
    }

    fn from_bytes(b: &[u8]) -> Result<Timestamp, CodecError> {
        let b: [u8; 8] = b.try_into().map_err(|_| CodecError::InvalidValue("UtcTime length"))?;
        Ok(Timestamp {
            seconds: u32::from_be_bytes([b[0], b[1], b[2], b[3]]),
            fraction: u32::from_be_bytes([0, b[4], b[5], b[6]]),
            quality: b[7],
        })
    }
}

/// One dataset member: a bay's trip output and breaker position.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub struct GooseEntry {
    pub trip: bool,
    pub cb_closed: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct GooseFrame {
    pub dst: MacAddr,
    pub src: MacAddr,
    pub vlan: Option<VlanTag>,
    pub appid: u16,
    pub gocb_ref: String,
    /// timeAllowedtoLive, ms.
    pub time_allowed_to_live: u32,
    pub dat_set: String,
    pub go_id: String,
    pub t: Timestamp,
    pub st_num: u32,
    pub sq_num: u32,
    pub test: bool,
    pub conf_rev: u32,
    pub nds_com: bool,
    pub all_data: Vec<GooseEntry>,
}

impl GooseFrame {
    pub fn num_dat_set_entries(&self) -> usize {
        self.all_data.len()
    }

    pub fn describe(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "protocol: GOOSE");
        let _ = writeln!(s, "dst: {}", self.dst);
        let _ = writeln!(s, "src: {}", self.src);
        if let Some(v) = self.vlan {
            let _ = writeln!(s, "vlan: priority {} vid {}", v.priority, v.vid);
        }
        let _ = writeln!(s, "appid: 0x{:04X}", self.appid);
        let _ = writeln!(s, "gocbRef: {}", self.gocb_ref);
        let _ = writeln!(s, "timeAllowedtoLive: {}", self.time_allowed_to_live);
        let _ = writeln!(s, "datSet: {}", self.dat_set);
        let _ = writeln!(s, "goID: {}", self.go_id);
        let _ = writeln!(s, "t: {:.6} (q=0x{:02X})", self.t.as_secs_f64(), self.t.quality);
        let _ = writeln!(s, "stNum: {}", self.st_num);
        let _ = writeln!(s, "sqNum: {}", self.sq_num);
        let _ = writeln!(s, "test: {}", self.test);
        let _ = writeln!(s, "confRev: {}", self.conf_rev);
        let _ = writeln!(s, "ndsCom: {}", self.nds_com);
        let _ = writeln!(s, "numDatSetEntries: {}", self.all_data.len());
        for (i, e) in self.all_data.iter().enumerate() {
            let _ = writeln!(s, "allData[{i}]: trip={} cb_closed={}", e.trip, e.cb_closed);
        }
        s
    }
}

pub fn encode_goose(f: &GooseFrame) -> Result<RawFrame, CodecError> {
    let entries = u32::try_from(f.all_data.len()).map_err(|_| CodecError::PayloadTooLong(f.all_data.len()))?;
    let mut data = Vec::with_capacity(8 * f.all_data.len());
    for e in &f.all_data {
        let mut member = ber::encode_tlv(0x83, &ber::bool_content(e.trip))?;
        ber::push_tlv(&mut member, 0x83, &ber::bool_content(e.cb_closed))?;
        ber::push_tlv(&mut data, 0xA2, &member)?;
    }
    let mut body = Vec::with_capacity(128 + data.len());
    ber::push_tlv(&mut body, 0x80, f.gocb_ref.as_bytes())?;
    ber::push_tlv(&mut body, 0x81, &ber::uint_content(f.time_allowed_to_live))?;
    ber::push_tlv(&mut body, 0x82, f.dat_set.as_bytes())?;
    ber::push_tlv(&mut body, 0x83, f.go_id.as_bytes())?;
    ber::push_tlv(&mut body, 0x84, &f.t.to_bytes())?;
    ber::push_tlv(&mut body, 0x85, &ber::uint_content(f.st_num))?;
    ber::push_tlv(&mut body, 0x86, &ber::uint_content(f.sq_num))?;
    ber::push_tlv(&mut body, 0x87, &ber::bool_content(f.test))?;
    ber::push_tlv(&mut body, 0x88, &ber::uint_content(f.conf_rev))?;
    ber::push_tlv(&mut body, 0x89, &ber::bool_content(f.nds_com))?;
    ber::push_tlv(&mut body, 0x8A, &ber::uint_content(entries))?;
    ber::push_tlv(&mut body, 0xAB, &data)?;
    let apdu = ber::encode_tlv(0x61, &body)?;
    let h = Header {
        dst: f.dst,
        src: f.src,
        vlan: f.vlan,
        appid: f.appid,
    };
    Ok(RawFrame::new(ether::write_frame(&h, ETHERTYPE_GOOSE, &apdu)?))
}

pub fn decode_goose(raw: &RawFrame) -> Result<GooseFrame, CodecError> {
    let (h, declared, rest) = ether::read_frame(&raw.bytes, ETHERTYPE_GOOSE)?;
    let (frame, used) = decode_apdu(rest, h).map_err(|e| match e {
        CodecError::Truncated(_) => CodecError::Truncated("APDU"),
        other => other,
    })?;
    ether::check_length(declared, used, rest.len())?;
    Ok(frame)
}

fn decode_apdu(bytes: &[u8], h: Header) -> Result<(GooseFrame, usize), CodecError> {
    let (tag, body, used) = ber::decode_tlv(bytes)?;
    if tag != 0x61 {
        return Err(CodecError::UnexpectedTag { expected: 0x61, found: tag });
    }
    let mut b = body;
    let gocb_ref = ber::decode_string(expect_tlv(&mut b, 0x80)?)?;
    let time_allowed_to_live = ber::decode_uint(expect_tlv(&mut b, 0x81)?)?;
    let dat_set = ber::decode_string(expect_tlv(&mut b, 0x82)?)?;
    let go_id = ber::decode_string(expect_tlv(&mut b, 0x83)?)?;
    let t = Timestamp::from_bytes(expect_tlv(&mut b, 0x84)?)?;
    let st_num = ber::decode_uint(expect_tlv(&mut b, 0x85)?)?;
    let sq_num = ber::decode_uint(expect_tlv(&mut b, 0x86)?)?;
    let test = ber::decode_bool(expect_tlv(&mut b, 0x87)?)?;
    let conf_rev = ber::decode_uint(expect_tlv(&mut b, 0x88)?)?;
    let nds_com = ber::decode_bool(expect_tlv(&mut b, 0x89)?)?;
    let declared = ber::decode_uint(expect_tlv(&mut b, 0x8A)?)?;
    let mut data = expect_tlv(&mut b, 0xAB)?;
    if !b.is_empty() {
        return Err(CodecError::TrailingBytes(b.len()));
    }
    let mut all_data = Vec::new();
    while !data.is_empty() {
        let mut member = expect_tlv(&mut data, 0xA2)?;
        let trip = ber::decode_bool(expect_tlv(&mut member, 0x83)?)?;
        let cb_closed = ber::decode_bool(expect_tlv(&mut member, 0x83)?)?;
        if !member.is_empty() {
            return Err(CodecError::TrailingBytes(member.len()));
        }
        all_data.push(GooseEntry { trip, cb_closed });
    }
    if declared as usize != all_data.len() {
        return Err(CodecError::EntryCount {
            declared,
            actual: all_data.len(),
        });
    }
    Ok((
        GooseFrame {
            dst: h.dst,
            src: h.src,
            vlan: h.vlan,
            appid: h.appid,
            gocb_ref,
            time_allowed_to_live,
            dat_set,
            go_id,
            t,
            st_num,
            sq_num,
            test,
            conf_rev,
            nds_com,
            all_data,
        },
        used,
    ))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample() -> GooseFrame {
        GooseFrame {
            dst: MacAddr([0x01, 0x0C, 0xCD, 0x01, 0x08, 0x02]),
            src: MacAddr([0x02, 0x00, 0x00, 0x08, 0x02, 0x02]),
            vlan: None,
            appid: 0x0082,
            gocb_ref: "S08IED02/LLN0$GO$gcb01".into(),
            time_allowed_to_live: 1000,
            dat_set: "S08IED02/LLN0$DS01".into(),
            go_id: "S08IED02".into(),
            t: Timestamp::from_micros(1_000_208),
            st_num: 1,
            sq_num: 7,
            test: false,
            conf_rev: 1,
            nds_com: false,
            all_data: vec![GooseEntry {
                trip: false,
                cb_closed: true,
            }],
        }
    }

    #[test]
    fn round_trip_and_ethertype() {
        let f = sample();
        let raw = encode_goose(&f).unwrap();
        assert_eq!(&raw.bytes[12..14], &[0x88, 0xB8]);
        assert_eq!(decode_goose(&raw).unwrap(), f);
    }

    #[test]
    fn booleans_are_ber_booleans() {
        let raw = encode_goose(&sample()).unwrap();
        let tail = &raw.bytes[raw.bytes.len() - 10..];
        assert_eq!(tail, &[0xAB, 0x08, 0xA2, 0x06, 0x83, 0x01, 0x00, 0x83, 0x01, 0xFF]);
    }

    #[test]
    fn timestamp_fraction() {
        let t = Timestamp::from_micros(2_500_000);
        assert_eq!(t.seconds, 2);
        assert_eq!(t.fraction, 1 << 23);
        assert!((t.as_secs_f64() - 2.5).abs() < 1e-12);
        assert_eq!(Timestamp::from_bytes(&t.to_bytes()).unwrap(), t);
    }

    #[test]
    fn entry_count_mismatch() {
        let f = sample();
        let raw = encode_goose(&f).unwrap();
        let mut bytes = raw.bytes.clone();
        // numDatSetEntries content octet sits just before the allData TLV.
        let pos = bytes.len() - 11;
        assert_eq!(bytes[pos - 2..pos], [0x8A, 0x01]);
        bytes[pos] = 2;
        assert_eq!(
            decode_goose(&RawFrame::new(bytes)),
            Err(CodecError::EntryCount { declared: 2, actual: 1 })
        );
    }

    #[test]
    fn truncated_frame() {
        let mut raw = encode_goose(&sample()).unwrap();
        raw.bytes.truncate(40);
        assert_eq!(decode_goose(&raw), Err(CodecError::Truncated("APDU")));
    }

    #[test]
    fn sv_bytes_are_not_goose() {
        let mut raw = encode_goose(&sample()).unwrap();
        raw.bytes[13] = 0xBA;
        assert_eq!(decode_goose(&raw), Err(CodecError::WrongEthertype(0x88BA)));
    }
}
